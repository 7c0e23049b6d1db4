//! Monte Carlo harness: stability probability, low-degree isotopy rate,
//! Betti and nest tails, mean root count and the C¹/Sobolev ratio.
//!
//! Trial `t` of degree `d` always draws from stream `d·2³² + t`, so every
//! cell is a deterministic function of the config. Trials run on a rayon
//! pool and are reduced in trial order, so the report does not depend on
//! the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::Evaluator;
use crate::harmonics::HarmonicExpansion;
use crate::norms::{c1_norm, delta, SearchOptions};
use crate::sampler::{sample_harmonic, SeedSpec, NORMAL_METHOD};
use crate::topology::{extract_signature, extract_signature_with_delta, topology_equal, SignatureJson, TopologyOptions};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Largest tolerated share of excluded or non-monotone trials.
pub const MAX_EXCLUSION_RATE: f64 = 0.01;

pub const STREAM_RULE: &str = "stream_id = d * 2^32 + trial";

pub fn stream_id(d: usize, trial: usize) -> u64 {
    ((d as u64) << 32) | trial as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    StabilityProbability,
    LowDegreeIsotopyRate,
    BettiTail,
    NestTail,
    MeanRootCount,
    C1SobolevRatio,
}

/// Truncation degrees: a single value, a list, or `⌈√(b·d·ln d)⌉`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cutoff {
    Fixed(usize),
    List(Vec<usize>),
    Rule { b: f64 },
}

impl Cutoff {
    pub fn resolve(&self, d: usize) -> Vec<usize> {
        match self {
            Self::Fixed(l) => vec![*l],
            Self::List(ls) => ls.clone(),
            Self::Rule { b } => vec![rule_cutoff(*b, d)],
        }
    }
}

/// `⌈√(b·d·ln d)⌉`, capped at `d` and lowered by one if its parity differs from `d`.
pub fn rule_cutoff(b: f64, d: usize) -> usize {
    let raw = (b * d as f64 * (d as f64).ln()).max(0.0).sqrt().ceil() as usize;
    let l = raw.min(d);
    if (d - l) % 2 == 1 {
        l - 1
    } else {
        l
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Vec<usize>, D::Error> {
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(d) => vec![d],
        OneOrMany::Many(ds) => ds,
    })
}

/// Numerical resolutions shared by every trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolution {
    pub points_per_degree: usize,
    pub seeds: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// S² mesh level; `None` picks it from `d` and `δ(p)`.
    pub mesh_level: Option<u32>,
}

impl Default for Resolution {
    fn default() -> Self {
        let s = SearchOptions::default();
        Self {
            points_per_degree: s.points_per_degree,
            seeds: s.seeds,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            mesh_level: None,
        }
    }
}

impl Resolution {
    pub fn search(&self) -> SearchOptions {
        SearchOptions {
            points_per_degree: self.points_per_degree,
            seeds: self.seeds,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }

    pub fn topology(&self) -> TopologyOptions {
        TopologyOptions { level: self.mesh_level, search: self.search(), ..TopologyOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub kind: ExperimentKind,
    pub n: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub d: Vec<usize>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Cutoff>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n: usize, d: Vec<usize>, trials: usize, master_seed: u64) -> Self {
        Self {
            schema: 1,
            kind,
            n,
            d,
            cutoff: None,
            alpha: None,
            trials,
            master_seed,
            resolution: Resolution::default(),
            output: None,
        }
    }

    pub fn with_cutoff(mut self, cutoff: Cutoff) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.schema != 1 {
            return bad("unsupported config schema (expected 1)");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.d.is_empty() || self.d.contains(&0) {
            return bad("d must be a nonempty list of positive degrees");
        }
        if self.d.iter().any(|&d| d >= 1 << 31) || self.trials >= 1 << 32 {
            return bad("d or trials too large for the stream layout");
        }
        match (self.kind, self.n) {
            (ExperimentKind::MeanRootCount, 1) | (ExperimentKind::NestTail, 2) => {}
            (ExperimentKind::MeanRootCount, n) | (ExperimentKind::NestTail, n) => {
                return Err(Error::UnsupportedDimension(n))
            }
            (_, 1) | (_, 2) => {}
            (_, n) => return Err(Error::UnsupportedDimension(n)),
        }
        match self.kind {
            ExperimentKind::StabilityProbability | ExperimentKind::LowDegreeIsotopyRate => match &self.cutoff {
                None => return bad("this experiment needs L"),
                Some(Cutoff::Rule { b }) if !(*b > 0.0) => return bad("rule parameter b must be positive"),
                Some(Cutoff::List(ls)) if ls.is_empty() => return bad("L list is empty"),
                _ => {}
            },
            ExperimentKind::BettiTail | ExperimentKind::NestTail => match self.alpha {
                Some(a) if a > 0.0 => {}
                _ => return bad("this experiment needs a positive alpha"),
            },
            _ => {}
        }
        if self.resolution.points_per_degree == 0 || self.resolution.seeds == 0 {
            return bad("resolution.points_per_degree and resolution.seeds must be positive");
        }
        Ok(())
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTally {
    /// trials where `‖p − p|_L‖_{C¹} < δ(p)/2`
    pub stable: usize,
    pub stable_and_equal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanReport {
    pub circle_mean: f64,
    pub circle_std_error: f64,
    pub projective_mean: f64,
    pub projective_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub max: f64,
    pub median: f64,
    pub q90: f64,
    pub q99: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub label: String,
    pub d: usize,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    /// event threshold `α dⁿ` (tails) or `α d` (nests)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub trials: usize,
    pub exclusions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub successes: Option<usize>,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<ConditionalTally>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<MeanReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub cell: String,
    pub trial: usize,
    pub stream_id: u64,
    pub message: String,
}

/// A stable trial whose truncation changed the topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub d: usize,
    #[serde(rename = "L")]
    pub cutoff: usize,
    pub trial: usize,
    pub master_seed: u64,
    pub stream_id: u64,
    pub c1_residual: f64,
    pub delta: f64,
    /// both extremum searches reached their stationarity tolerance
    pub certified: bool,
    pub signature_p: SignatureJson,
    pub signature_truncated: SignatureJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub normal_method: String,
    pub stream_rule: String,
    pub cells: Vec<CellReport>,
    pub failures: Vec<TrialFailure>,
    pub counterexamples: Vec<Counterexample>,
    /// trials whose stability events were not monotone in L
    #[serde(skip_serializing_if = "Option::is_none")]
    pub non_monotone_trials: Option<usize>,
    pub valid: bool,
    pub invalid_reasons: Vec<String>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per cell.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let mut s = String::from("cell,d,L,threshold,estimate,ci_lo,ci_hi,successes,trials,exclusions\n");
        for c in &self.cells {
            s.push_str(&format!(
                "\"{}\",{},{},{},{},{},{},{},{},{}\n",
                c.label,
                c.d,
                opt(c.cutoff.map(|v| v.to_string())),
                opt(c.threshold.map(|v| v.to_string())),
                c.estimate,
                c.ci_lo,
                c.ci_hi,
                opt(c.successes.map(|v| v.to_string())),
                c.trials,
                c.exclusions
            ));
        }
        s
    }

    pub fn cell(&self, label: &str) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.label == label)
    }
}

/// Per-cell outcome of one trial.
#[derive(Debug, Clone)]
enum Outcome {
    Event(bool),
    Pair { stable: bool, equal: bool, counterexample: Option<Box<Counterexample>> },
    Value(f64),
    Skip,
}

struct Trial {
    index: usize,
    stream_id: u64,
    cells: Vec<std::result::Result<Outcome, String>>,
    non_monotone: bool,
}

struct CellSpec {
    label: String,
    cutoff: Option<usize>,
    threshold: Option<f64>,
}

fn cell_specs(cfg: &ExperimentConfig, d: usize) -> Vec<CellSpec> {
    let cutoffs = |ls: Vec<usize>| -> Vec<CellSpec> {
        ls.into_iter()
            .map(|l| CellSpec { label: format!("d={d},L={l}"), cutoff: Some(l), threshold: None })
            .collect()
    };
    match cfg.kind {
        ExperimentKind::StabilityProbability | ExperimentKind::LowDegreeIsotopyRate => {
            cutoffs(cfg.cutoff.as_ref().expect("validated").resolve(d))
        }
        ExperimentKind::BettiTail => {
            let t = cfg.alpha.expect("validated") * (d as f64).powi(cfg.n as i32);
            vec![CellSpec { label: format!("d={d}"), cutoff: None, threshold: Some(t) }]
        }
        ExperimentKind::NestTail => {
            let t = cfg.alpha.expect("validated") * d as f64;
            vec![CellSpec { label: format!("d={d}"), cutoff: None, threshold: Some(t) }]
        }
        ExperimentKind::MeanRootCount | ExperimentKind::C1SobolevRatio => {
            vec![CellSpec { label: format!("d={d}"), cutoff: None, threshold: None }]
        }
    }
}

fn draw(n: usize, d: usize, seed: SeedSpec) -> Result<(HarmonicExpansion, Evaluator)> {
    let p = sample_harmonic(n, d, seed)?;
    let ev = Evaluator::from_expansion(&p)?;
    Ok((p, ev))
}

/// Residual `p − p|_L` reduced to the cutoffs that actually differ.
fn effective_cutoff(d: usize, l: usize) -> usize {
    if l >= d {
        d
    } else if (d - l) % 2 == 1 {
        l.saturating_sub(1)
    } else {
        l
    }
}

fn residual_c1(p: &HarmonicExpansion, l: usize, search: &SearchOptions) -> Result<(f64, bool)> {
    let r = p.residual(l);
    if r.is_zero() {
        return Ok((0.0, true));
    }
    let rep = c1_norm(&Evaluator::from_expansion(&r)?, search)?;
    Ok((rep.value, rep.certified))
}

fn run_trial(cfg: &ExperimentConfig, d: usize, specs: &[CellSpec], index: usize) -> Trial {
    let sid = stream_id(d, index);
    let seed = SeedSpec::new(cfg.master_seed, sid);
    let search = cfg.resolution.search();
    let topo = cfg.resolution.topology();
    let all = |e: Error| specs.iter().map(|_| Err(e.to_string())).collect();
    let mut trial = Trial { index, stream_id: sid, cells: Vec::new(), non_monotone: false };
    let (p, ev) = match draw(cfg.n, d, seed) {
        Ok(x) => x,
        Err(e) => {
            trial.cells = all(e);
            return trial;
        }
    };
    match cfg.kind {
        ExperimentKind::StabilityProbability => {
            let dp = match delta(&ev, &search) {
                Ok(r) => r,
                Err(e) => {
                    trial.cells = all(e);
                    return trial;
                }
            };
            let mut cache: Vec<(usize, Result<(f64, bool)>)> = Vec::new();
            for s in specs {
                let l = effective_cutoff(d, s.cutoff.expect("cutoff cell"));
                if !cache.iter().any(|(k, _)| *k == l) {
                    cache.push((l, residual_c1(&p, l, &search)));
                }
                let r = &cache.iter().find(|(k, _)| *k == l).expect("cached").1;
                trial.cells.push(match r {
                    Ok((c1, _)) => Ok(Outcome::Event(*c1 < dp.value / 2.0)),
                    Err(e) => Err(e.to_string()),
                });
            }
            let mut order: Vec<(usize, bool)> = specs
                .iter()
                .zip(&trial.cells)
                .filter_map(|(s, c)| match c {
                    Ok(Outcome::Event(b)) => Some((s.cutoff.expect("cutoff cell"), *b)),
                    _ => None,
                })
                .collect();
            order.sort_by_key(|(l, _)| *l);
            trial.non_monotone = order.windows(2).any(|w| w[0].1 && !w[1].1);
        }
        ExperimentKind::LowDegreeIsotopyRate => {
            let full = match extract_signature(&ev, &topo) {
                Ok(x) => x,
                Err(e) => {
                    trial.cells = all(e);
                    return trial;
                }
            };
            for s in specs {
                let l = s.cutoff.expect("cutoff cell");
                let outcome = (|| -> Result<Outcome> {
                    let q = if l >= d { p.clone() } else { p.truncate(l) };
                    if q.is_zero() {
                        return Err(Error::Degenerate(format!("truncation to L = {l} vanishes")));
                    }
                    let qev = Evaluator::from_expansion(&q)?;
                    let (c1, c1_cert) = residual_c1(&p, effective_cutoff(d, l), &search)?;
                    let stable = c1 < full.delta.value / 2.0;
                    let sig_q = if effective_cutoff(d, l) == d {
                        extract_signature_with_delta(&qev, full.delta.clone(), &topo)?.signature
                    } else {
                        extract_signature(&qev, &topo)?.signature
                    };
                    let equal = topology_equal(&full.signature, &sig_q);
                    let counterexample = (stable && !equal).then(|| {
                        Box::new(Counterexample {
                            d,
                            cutoff: l,
                            trial: index,
                            master_seed: cfg.master_seed,
                            stream_id: sid,
                            c1_residual: c1,
                            delta: full.delta.value,
                            certified: c1_cert && full.delta.extremum.certified,
                            signature_p: SignatureJson::from(&full.signature),
                            signature_truncated: SignatureJson::from(&sig_q),
                        })
                    });
                    Ok(Outcome::Pair { stable, equal, counterexample })
                })();
                trial.cells.push(outcome.map_err(|e| e.to_string()));
            }
        }
        ExperimentKind::BettiTail | ExperimentKind::NestTail => {
            let sig = extract_signature(&ev, &topo);
            for s in specs {
                let t = s.threshold.expect("threshold cell");
                trial.cells.push(match &sig {
                    Ok(x) => {
                        let v = if cfg.kind == ExperimentKind::BettiTail {
                            x.signature.betti_total()
                        } else {
                            x.signature.nest_depth()
                        };
                        Ok(Outcome::Event(v as f64 >= t))
                    }
                    Err(e) => Err(e.to_string()),
                });
            }
        }
        ExperimentKind::MeanRootCount => {
            let sig = extract_signature(&ev, &topo);
            trial.cells.push(sig.map(|x| Outcome::Value(x.signature.component_count() as f64)).map_err(|e| e.to_string()));
        }
        ExperimentKind::C1SobolevRatio => {
            let q = (cfg.n as f64 + 1.0) / 2.0;
            let h = p.sobolev_norm(q);
            trial.cells.push(if h == 0.0 {
                Ok(Outcome::Skip)
            } else {
                c1_norm(&ev, &search)
                    .map(|c| Outcome::Value(c.value / ((d as f64).sqrt() * h)))
                    .map_err(|e| e.to_string())
            });
        }
    }
    trial
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let k = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[k]
}

fn aggregate(cfg: &ExperimentConfig, d: usize, specs: &[CellSpec], trials: &[Trial], report: &mut ExperimentReport) {
    for (ci, spec) in specs.iter().enumerate() {
        let mut exclusions = 0;
        let mut skipped = 0;
        let mut successes = 0;
        let mut stable = 0;
        let mut stable_and_equal = 0;
        let mut values = Vec::new();
        for t in trials {
            match &t.cells[ci] {
                Err(message) => {
                    exclusions += 1;
                    report.failures.push(TrialFailure {
                        cell: spec.label.clone(),
                        trial: t.index,
                        stream_id: t.stream_id,
                        message: message.clone(),
                    });
                }
                Ok(Outcome::Event(b)) => successes += *b as usize,
                Ok(Outcome::Pair { stable: s, equal, counterexample }) => {
                    successes += *equal as usize;
                    stable += *s as usize;
                    stable_and_equal += (*s && *equal) as usize;
                    if let Some(c) = counterexample {
                        report.counterexamples.push((**c).clone());
                    }
                }
                Ok(Outcome::Value(v)) => values.push(*v),
                Ok(Outcome::Skip) => skipped += 1,
            }
        }
        let used = cfg.trials - exclusions - skipped;
        let mut cell = CellReport {
            label: spec.label.clone(),
            d,
            cutoff: spec.cutoff,
            threshold: spec.threshold,
            trials: cfg.trials,
            exclusions: exclusions + skipped,
            successes: None,
            estimate: 0.0,
            ci_lo: 0.0,
            ci_hi: 1.0,
            stability: None,
            mean: None,
            ratio: None,
        };
        match cfg.kind {
            ExperimentKind::MeanRootCount => {
                let m = values.len() as f64;
                let mean = values.iter().sum::<f64>() / m;
                let var = if values.len() > 1 {
                    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
                } else {
                    0.0
                };
                let se = (var / m).sqrt();
                cell.mean = Some(MeanReport {
                    circle_mean: mean,
                    circle_std_error: se,
                    projective_mean: mean / 2.0,
                    projective_std_error: se / 2.0,
                });
                cell.estimate = mean / 2.0;
                cell.ci_lo = mean / 2.0 - Z95 * se / 2.0;
                cell.ci_hi = mean / 2.0 + Z95 * se / 2.0;
            }
            ExperimentKind::C1SobolevRatio => {
                values.sort_by(f64::total_cmp);
                let r = RatioReport {
                    max: values.last().copied().unwrap_or(f64::NAN),
                    median: quantile(&values, 0.5),
                    q90: quantile(&values, 0.9),
                    q99: quantile(&values, 0.99),
                };
                cell.estimate = r.max;
                cell.ci_lo = values.first().copied().unwrap_or(f64::NAN);
                cell.ci_hi = r.max;
                cell.ratio = Some(r);
            }
            _ => {
                let (lo, hi) = wilson_interval(successes, used, Z95);
                cell.successes = Some(successes);
                cell.estimate = if used == 0 { 0.0 } else { successes as f64 / used as f64 };
                cell.ci_lo = lo;
                cell.ci_hi = hi;
                if cfg.kind == ExperimentKind::LowDegreeIsotopyRate {
                    cell.stability = Some(ConditionalTally { stable, stable_and_equal });
                }
            }
        }
        if exclusions as f64 > MAX_EXCLUSION_RATE * cfg.trials as f64 {
            report.invalid_reasons.push(format!(
                "{}: {exclusions} of {} trials excluded",
                spec.label, cfg.trials
            ));
        }
        report.cells.push(cell);
    }
}

/// Runs `cfg` on `threads` worker threads (0 picks the machine default).
pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let mut report = ExperimentReport {
        config: cfg.clone(),
        normal_method: NORMAL_METHOD.to_string(),
        stream_rule: STREAM_RULE.to_string(),
        cells: Vec::new(),
        failures: Vec::new(),
        counterexamples: Vec::new(),
        non_monotone_trials: None,
        valid: true,
        invalid_reasons: Vec::new(),
    };
    let mut non_monotone = 0;
    for &d in &cfg.d {
        let specs = cell_specs(cfg, d);
        let trials: Vec<Trial> =
            pool.install(|| (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, d, &specs, t)).collect());
        non_monotone += trials.iter().filter(|t| t.non_monotone).count();
        aggregate(cfg, d, &specs, &trials, &mut report);
    }
    if cfg.kind == ExperimentKind::StabilityProbability {
        report.non_monotone_trials = Some(non_monotone);
        let total = cfg.trials * cfg.d.len();
        if non_monotone as f64 >= MAX_EXCLUSION_RATE * total as f64 && non_monotone > 0 {
            report.invalid_reasons.push(format!("{non_monotone} of {total} trials not monotone in L"));
        }
    }
    if !report.counterexamples.is_empty() {
        report.invalid_reasons.push(format!(
            "{} stable trials changed topology under truncation",
            report.counterexamples.len()
        ));
    }
    report.valid = report.invalid_reasons.is_empty();
    Ok(report)
}

fn with_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig { kind, ..cfg.clone() }
}

/// `P{‖p − p|_L‖_{C¹} < δ(p)/2}` for every configured `(d, L)`.
pub fn stability_probability(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    run(&with_kind(cfg, ExperimentKind::StabilityProbability), threads)
}

/// Rate of `topology_equal(p, p|_L)`, with the stability event tallied alongside.
pub fn low_degree_isotopy_rate(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    run(&with_kind(cfg, ExperimentKind::LowDegreeIsotopyRate), threads)
}

/// `P{b(Z(p)) ≥ α dⁿ}`.
pub fn betti_tail(cfg: &ExperimentConfig, alpha: f64, threads: usize) -> Result<ExperimentReport> {
    run(&with_kind(cfg, ExperimentKind::BettiTail).with_alpha(alpha), threads)
}

/// `P{nest depth ≥ α d}` on S².
pub fn nest_tail(cfg: &ExperimentConfig, alpha: f64, threads: usize) -> Result<ExperimentReport> {
    run(&with_kind(cfg, ExperimentKind::NestTail).with_alpha(alpha), threads)
}

/// Mean number of zeros on S¹, as circle and projective counts.
pub fn mean_root_count(d: usize, trials: usize, master_seed: u64, threads: usize) -> Result<MeanReport> {
    let cfg = ExperimentConfig::new(ExperimentKind::MeanRootCount, 1, vec![d], trials, master_seed);
    let report = run(&cfg, threads)?;
    Ok(report.cells[0].mean.clone().expect("mean cell"))
}

/// `‖p‖_{C¹} / (√d ‖p‖_{H^{(n+1)/2}})` statistics per degree.
pub fn c1_sobolev_ratio_survey(
    n: usize,
    ds: &[usize],
    trials: usize,
    master_seed: u64,
    threads: usize,
) -> Result<ExperimentReport> {
    run(&ExperimentConfig::new(ExperimentKind::C1SobolevRatio, n, ds.to_vec(), trials, master_seed), threads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_cutoffs_match_parity() {
        assert_eq!(rule_cutoff(4.0, 20), 16);
        assert_eq!(rule_cutoff(4.0, 40), 24);
        assert_eq!(rule_cutoff(4.0, 80), 38);
        assert_eq!(rule_cutoff(1e6, 50), 50);
        assert_eq!(rule_cutoff(1e6, 7), 7);
        for d in 2..60 {
            let l = rule_cutoff(2.0, d);
            assert!(l <= d && (d - l) % 2 == 0);
        }
    }

    #[test]
    fn wilson_against_root_finding() {
        // the interval ends solve |p̂ − p| = z √(p(1−p)/n)
        for (s, n) in [(0usize, 10usize), (3, 10), (10, 10), (412, 1000), (1, 3)] {
            let (lo, hi) = wilson_interval(s, n, Z95);
            let ph = s as f64 / n as f64;
            let g = |p: f64| (ph - p).powi(2) - Z95 * Z95 * p * (1.0 - p) / n as f64;
            let bisect = |mut a: f64, mut b: f64| {
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if (g(a) > 0.0) == (g(m) > 0.0) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            };
            let want_lo = if s == 0 { 0.0 } else { bisect(0.0, ph) };
            let want_hi = if s == n { 1.0 } else { bisect(ph, 1.0) };
            assert!((lo - want_lo).abs() < 1e-12, "{s}/{n}: {lo} vs {want_lo}");
            assert!((hi - want_hi).abs() < 1e-12, "{s}/{n}: {hi} vs {want_hi}");
            assert!(lo <= ph && ph <= hi);
        }
    }

    #[test]
    fn config_parses_scalar_or_list_degrees() {
        let a: ExperimentConfig = serde_json::from_str(
            r#"{"schema":1,"kind":"stability_probability","n":1,"d":30,"L":[6,30],"trials":5,"master_seed":1}"#,
        )
        .unwrap();
        assert_eq!(a.d, vec![30]);
        assert_eq!(a.cutoff, Some(Cutoff::List(vec![6, 30])));
        let b: ExperimentConfig = serde_json::from_str(
            r#"{"schema":1,"kind":"low_degree_isotopy_rate","n":1,"d":[20,40],"L":{"b":4},"trials":5,"master_seed":1}"#,
        )
        .unwrap();
        assert_eq!(b.cutoff, Some(Cutoff::Rule { b: 4.0 }));
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"schema":1,"kind":"betti_tail","n":1,"d":3,"trials":1,"master_seed":1,"threads":4}"#
        )
        .is_err());
        let bad = ExperimentConfig::new(ExperimentKind::BettiTail, 1, vec![5], 3, 0);
        assert!(bad.validate().is_err());
        let mut s = ExperimentConfig::new(ExperimentKind::MeanRootCount, 1, vec![5], 3, 0);
        s.schema = 2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn full_cutoff_is_always_stable() {
        let cfg = ExperimentConfig::new(ExperimentKind::StabilityProbability, 1, vec![12], 20, 5)
            .with_cutoff(Cutoff::List(vec![0, 12]));
        let r = run(&cfg, 1).unwrap();
        let full = r.cell("d=12,L=12").unwrap();
        assert_eq!(full.successes, Some(20));
        assert_eq!(full.estimate, 1.0);
        assert!(r.cell("d=12,L=0").unwrap().estimate < 0.2);
    }

    #[test]
    fn full_truncation_preserves_topology() {
        let cfg = ExperimentConfig::new(ExperimentKind::LowDegreeIsotopyRate, 1, vec![15], 20, 3)
            .with_cutoff(Cutoff::Rule { b: 1e6 });
        let r = run(&cfg, 1).unwrap();
        let c = &r.cells[0];
        assert_eq!(c.cutoff, Some(15));
        assert_eq!(c.estimate, 1.0);
        assert_eq!(c.stability.as_ref().unwrap().stable, 20);
        assert!(r.valid);
    }

    #[test]
    fn root_count_projective_is_half() {
        let m = mean_root_count(1, 10, 0, 1).unwrap();
        assert_eq!(m.circle_mean, 2.0);
        assert_eq!(m.projective_mean, 1.0);
        assert_eq!(m.circle_std_error, 0.0);
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let cfg = ExperimentConfig::new(ExperimentKind::BettiTail, 1, vec![4, 6], 5, 9).with_alpha(2.2);
        let r = run(&cfg, 1).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(r.cells.iter().all(|c| c.successes == Some(0)));
        let cfg = ExperimentConfig::new(ExperimentKind::StabilityProbability, 1, vec![6], 3, 9)
            .with_cutoff(Cutoff::List(vec![2, 4]));
        for row in run(&cfg, 1).unwrap().to_csv().lines().skip(1) {
            let (label, rest) = row[1..].split_once("\",").unwrap();
            assert!(label.starts_with("d=6,L="));
            assert_eq!(rest.split(',').count(), 9);
        }
    }
}
