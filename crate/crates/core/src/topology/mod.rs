//! Zero sets and their discrete invariants: sorted roots on S¹, and on S²
//! the component count together with the containment forest.

pub mod circle;
pub mod mesh;
pub mod nesting;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::SphereFunction;
use crate::norms::{delta, DeltaReport, SearchOptions};
use crate::sphere::{Rotation3, SpherePoint};

pub use circle::roots_on_circle;
pub use mesh::{curves_csv, default_level, extract_curves, resolving_level, CurveSet, Polyline, MAX_LEVEL};
pub use nesting::{nesting_forest, NestingForest};

/// Discrete invariants of the pair `(Sⁿ, Z(p))`.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologySignature {
    Circle { roots: Vec<f64> },
    Sphere { components: usize, forest: String, depth: usize },
}

impl TopologySignature {
    pub fn n(&self) -> usize {
        match self {
            Self::Circle { .. } => 1,
            Self::Sphere { .. } => 2,
        }
    }

    /// Number of connected components of the zero set.
    pub fn component_count(&self) -> usize {
        match self {
            Self::Circle { roots } => roots.len(),
            Self::Sphere { components, .. } => *components,
        }
    }

    /// Sum of the Z₂ Betti numbers of the zero set.
    pub fn betti_total(&self) -> usize {
        match self {
            Self::Circle { roots } => roots.len(),
            Self::Sphere { components, .. } => 2 * components,
        }
    }

    /// Longest containment chain, 0 on S¹.
    pub fn nest_depth(&self) -> usize {
        match self {
            Self::Circle { .. } => 0,
            Self::Sphere { depth, .. } => *depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignatureJson {
    Circle { n: usize, roots: Vec<f64> },
    Sphere { n: usize, components: usize, forest: String, depth: usize, betti: usize },
}

impl From<&TopologySignature> for SignatureJson {
    fn from(s: &TopologySignature) -> Self {
        match s {
            TopologySignature::Circle { roots } => Self::Circle { n: 1, roots: roots.clone() },
            TopologySignature::Sphere { components, forest, depth } => Self::Sphere {
                n: 2,
                components: *components,
                forest: forest.clone(),
                depth: *depth,
                betti: 2 * components,
            },
        }
    }
}

impl Serialize for TopologySignature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SignatureJson::from(self).serialize(s)
    }
}

/// Same root count on S¹; same component count and forest on S².
pub fn topology_equal(a: &TopologySignature, b: &TopologySignature) -> bool {
    match (a, b) {
        (TopologySignature::Circle { roots: r }, TopologySignature::Circle { roots: s }) => r.len() == s.len(),
        (
            TopologySignature::Sphere { components: c1, forest: f1, .. },
            TopologySignature::Sphere { components: c2, forest: f2, .. },
        ) => c1 == c2 && f1 == f2,
        _ => false,
    }
}

#[derive(Debug, Clone)]
pub struct TopologyOptions {
    /// Mesh level on S²; `None` takes the larger of `⌈log₂(8d)⌉` and the level that resolves `δ(p)`.
    pub level: Option<u32>,
    /// `y∞`; defaults to the north pole.
    pub basepoint: Option<SpherePoint>,
    pub basepoint_retries: usize,
    pub search: SearchOptions,
}

impl Default for TopologyOptions {
    fn default() -> Self {
        Self { level: None, basepoint: None, basepoint_retries: 8, search: SearchOptions::default() }
    }
}

/// Signature plus the intermediate objects it was read off.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub signature: TopologySignature,
    pub delta: DeltaReport,
    pub curves: Option<CurveSet>,
    pub forest: Option<NestingForest>,
}

/// The k-th fallback basepoint: `y` tilted by a small angle about a
/// direction that turns by the golden angle each time.
fn perturbed(y: &SpherePoint, k: usize) -> SpherePoint {
    let c = y.coords();
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let t = golden * k as f64;
    let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = crate::sphere::normalize3(crate::sphere::cross(&[c[0], c[1], c[2]], &helper));
    let v = crate::sphere::cross(&[c[0], c[1], c[2]], &u);
    let axis = [0, 1, 2].map(|i| t.cos() * u[i] + t.sin() * v[i]);
    let r = Rotation3::about_axis(axis, 0.05 * k as f64);
    SpherePoint::new(r.apply(c).to_vec()).expect("unit vector")
}

/// Extracts the signature after checking `δ(p)`; singular inputs are refused.
pub fn extract_signature(f: &dyn SphereFunction, opts: &TopologyOptions) -> Result<Extraction> {
    let d = delta(f, &opts.search)?;
    extract_signature_with_delta(f, d, opts)
}

/// As [`extract_signature`] with an already computed `δ(p)`.
pub fn extract_signature_with_delta(
    f: &dyn SphereFunction,
    delta: DeltaReport,
    opts: &TopologyOptions,
) -> Result<Extraction> {
    if delta.singular {
        return Err(Error::Degenerate(format!(
            "delta = {:.3e} is below the singular threshold",
            delta.value
        )));
    }
    match f.n() {
        1 => {
            let roots = roots_on_circle(f, Some(delta.value))?;
            Ok(Extraction { signature: TopologySignature::Circle { roots }, delta, curves: None, forest: None })
        }
        2 => {
            let level = match opts.level {
                Some(l) => l,
                None => {
                    let needed = resolving_level(f.degree(), delta.value, f.bw_norm());
                    if needed >= MAX_LEVEL {
                        return Err(Error::Resolution(format!(
                            "delta = {:.3e} needs mesh level {needed}, above the verifiable maximum {}",
                            delta.value,
                            MAX_LEVEL - 1
                        )));
                    }
                    needed.max(default_level(f.degree()))
                }
            };
            let set = extract_curves(f, Some(level))?;
            let base = opts.basepoint.clone().unwrap_or_else(|| SpherePoint::basis(2, 2));
            let mut last = None;
            for k in 0..=opts.basepoint_retries {
                let y = if k == 0 { base.clone() } else { perturbed(&base, k) };
                match nesting_forest(&set.curves, &y, set.edge_length) {
                    Ok(forest) => {
                        let signature = TopologySignature::Sphere {
                            components: forest.len(),
                            forest: forest.canonical(),
                            depth: forest.nest_depth(),
                        };
                        return Ok(Extraction { signature, delta, curves: Some(set), forest: Some(forest) });
                    }
                    Err(e @ Error::Basepoint { .. }) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.expect("at least one attempt"))
        }
        n => Err(Error::UnsupportedDimension(n)),
    }
}
