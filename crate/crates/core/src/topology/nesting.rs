use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{arc_distance, cross, dot3, normalize3, SpherePoint};
use crate::topology::mesh::Polyline;

/// Containment forest of zero curves relative to a basepoint `y∞`.
///
/// A curve's bounded side is the complementary region that does not
/// contain `y∞`. Depth is counted in vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingForest {
    pub parents: Vec<Option<usize>>,
    pub depths: Vec<usize>,
    pub basepoint: SpherePoint,
}

impl NestingForest {
    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn nest_depth(&self) -> usize {
        self.depths.iter().copied().max().unwrap_or(0)
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parents[c] == Some(node)).collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parents[c].is_none()).collect()
    }

    /// Parenthesized form with children sorted, invariant under relabeling.
    pub fn canonical(&self) -> String {
        fn encode(f: &NestingForest, node: usize) -> String {
            let mut kids: Vec<String> = f.children(node).into_iter().map(|c| encode(f, c)).collect();
            kids.sort();
            format!("({})", kids.concat())
        }
        let mut roots: Vec<String> = self.roots().into_iter().map(|r| encode(self, r)).collect();
        roots.sort();
        roots.concat()
    }
}

/// True when the arcs `ab` and `cd` (each shorter than π) cross.
fn arcs_cross(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: &[f64; 3]) -> bool {
    let n1 = cross(a, b);
    let (sc, sd) = (dot3(c, &n1), dot3(d, &n1));
    if (sc > 0.0) == (sd > 0.0) {
        return false;
    }
    let n2 = cross(c, d);
    let (sa, sb) = (dot3(a, &n2), dot3(b, &n2));
    if (sa > 0.0) == (sb > 0.0) {
        return false;
    }
    let x = [0, 1, 2].map(|k| sd.abs() * c[k] + sc.abs() * d[k]);
    let y = [0, 1, 2].map(|k| sb.abs() * a[k] + sa.abs() * b[k]);
    dot3(&x, &y) > 0.0
}

fn crossings(from: &[f64; 3], to: &[f64; 3], curve: &Polyline) -> usize {
    let m = curve.len();
    (0..m).filter(|&k| arcs_cross(from, to, &curve[k], &curve[(k + 1) % m])).count()
}

/// Path from `s` to `y` as two arcs, each well below π.
fn path(s: &[f64; 3], y: &[f64; 3]) -> [[f64; 3]; 3] {
    let sum = [s[0] + y[0], s[1] + y[1], s[2] + y[2]];
    let mid = if dot3(&sum, &sum) > 1e-6 {
        normalize3(sum)
    } else {
        let axis = if s[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        normalize3(cross(s, &axis))
    };
    [*s, mid, *y]
}

/// Builds the containment forest by geodesic crossing parity.
///
/// `clearance` is the minimum arc distance required between `y∞` and
/// every curve vertex (normally the mesh edge length).
pub fn nesting_forest(curves: &[Polyline], basepoint: &SpherePoint, clearance: f64) -> Result<NestingForest> {
    if basepoint.n() != 2 {
        return Err(Error::UnsupportedDimension(basepoint.n()));
    }
    let c = basepoint.coords();
    let y = [c[0], c[1], c[2]];
    let closest = curves
        .iter()
        .flatten()
        .map(|p| arc_distance(p, &y))
        .fold(f64::INFINITY, f64::min);
    if closest <= clearance {
        return Err(Error::Basepoint { distance: closest, required: clearance });
    }
    let k = curves.len();
    // inside[a][b]: curve a lies in the bounded side of curve b
    let mut inside = vec![vec![false; k]; k];
    for (a, ca) in curves.iter().enumerate() {
        if ca.is_empty() {
            return Err(Error::InvalidInput("empty polyline".into()));
        }
        let s = ca.iter().max_by(|p, q| dot3(p, &y).total_cmp(&dot3(q, &y))).expect("nonempty");
        let [p0, p1, p2] = path(s, &y);
        for (b, cb) in curves.iter().enumerate() {
            if a != b {
                inside[a][b] = (crossings(&p0, &p1, cb) + crossings(&p1, &p2, cb)) % 2 == 1;
            }
        }
    }
    let containers: Vec<usize> = (0..k).map(|a| inside[a].iter().filter(|&&x| x).count()).collect();
    let parents: Vec<Option<usize>> = (0..k)
        .map(|a| (0..k).filter(|&b| inside[a][b]).max_by_key(|&b| (containers[b], std::cmp::Reverse(b))))
        .collect();
    let mut depths = vec![0; k];
    for a in 0..k {
        let mut depth = 1;
        let mut node = a;
        while let Some(p) = parents[node] {
            depth += 1;
            node = p;
            if depth > k {
                return Err(Error::Degenerate("containment relation is cyclic".into()));
            }
        }
        depths[a] = depth;
    }
    Ok(NestingForest { parents, depths, basepoint: basepoint.clone() })
}
