//! `kostlan`: sampling, decomposition, norms, discriminant distance,
//! zero-set topology and Monte Carlo experiments from the command line.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use kostlan_core::experiments::{self, ExperimentConfig};
use kostlan_core::harmonics::ExpansionJson;
use kostlan_core::norms::{c1_norm, delta, SearchOptions};
use kostlan_core::sampler::{sample_harmonic, sample_monomial, SeedSpec};
use kostlan_core::topology::{curves_csv, extract_signature, TopologyOptions, TopologySignature};
use kostlan_core::{decompose, Evaluator, HarmonicExpansion, HomogeneousPoly, PolyJson, SphereFunction};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl From<kostlan_core::Error> for CliError {
    fn from(e: kostlan_core::Error) -> Self {
        use kostlan_core::Error as E;
        match e {
            E::Degenerate(_) | E::Resolution(_) | E::Basepoint { .. } => Self::Numerical(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "kostlan", version, about = "Random Kostlan polynomials on S¹ and S²")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Repr {
    Monomial,
    Harmonic,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Common {
    /// Sphere dimension
    #[arg(long)]
    n: Option<usize>,
    /// Degree
    #[arg(long)]
    d: Option<usize>,
    /// Master seed; without --input a fresh sample is drawn
    #[arg(long)]
    seed: Option<u64>,
    /// Stream id used together with --seed
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Polynomial or expansion JSON (default: stdin)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Search {
    /// Seeding grid points per great circle per unit degree
    #[arg(long, default_value_t = 8)]
    points_per_degree: usize,
    /// Grid seeds refined by gradient descent
    #[arg(long, default_value_t = 8)]
    seeds: usize,
}

impl Search {
    fn options(&self) -> CliResult<SearchOptions> {
        if self.points_per_degree == 0 || self.seeds == 0 {
            return Err(CliError::Usage("--points-per-degree and --seeds must be positive".into()));
        }
        Ok(SearchOptions { points_per_degree: self.points_per_degree, seeds: self.seeds, ..SearchOptions::default() })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a Kostlan sample
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Repr::Monomial)]
        repr: Repr,
    },
    /// Harmonic decomposition of a polynomial
    Decompose {
        #[command(flatten)]
        common: Common,
    },
    /// Keep harmonic components of degree at most L
    Truncate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "L")]
        cutoff: usize,
    },
    /// Bombieri-Weil, L², Sobolev and C¹ norms
    Norms {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: Search,
        /// Sobolev exponent (default (n+1)/2)
        #[arg(long)]
        q: Option<f64>,
    },
    /// Distance to the discriminant
    Delta {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: Search,
    },
    /// Zero-set signature
    Topology {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: Search,
        /// Mesh subdivision level on S² (default: chosen from d and δ)
        #[arg(long)]
        level: Option<u32>,
        /// Write zero curves (S²) or roots (S¹) as CSV to this file
        #[arg(long)]
        emit_curves: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment from a JSON or TOML config
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: all cores)
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

enum Input {
    Poly(HomogeneousPoly),
    Expansion(HarmonicExpansion),
}

impl Input {
    fn n(&self) -> usize {
        match self {
            Self::Poly(p) => p.n(),
            Self::Expansion(e) => e.n(),
        }
    }

    fn d(&self) -> usize {
        match self {
            Self::Poly(p) => p.degree(),
            Self::Expansion(e) => e.degree(),
        }
    }

    fn expansion(&self) -> CliResult<HarmonicExpansion> {
        match self {
            Self::Poly(p) => Ok(decompose(p)?),
            Self::Expansion(e) => Ok(e.clone()),
        }
    }

    fn function(&self) -> CliResult<Box<dyn SphereFunction>> {
        match self {
            Self::Poly(p) => match p.n() {
                1 | 2 => Ok(Box::new(p.clone())),
                n => Err(kostlan_core::Error::UnsupportedDimension(n).into()),
            },
            Self::Expansion(e) => Ok(Box::new(Evaluator::from_expansion(e)?)),
        }
    }
}

fn read_text(path: Option<&Path>) -> CliResult<String> {
    let mut s = String::new();
    match path {
        Some(p) => {
            s = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?
        }
        None => {
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Usage(format!("cannot read stdin: {e}")))?;
        }
    }
    Ok(s)
}

fn parse_input(text: &str) -> CliResult<Input> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed input JSON: {e}")))?;
    if v.get("components").is_some() {
        let j: ExpansionJson =
            serde_json::from_value(v).map_err(|e| CliError::Usage(format!("malformed expansion JSON: {e}")))?;
        Ok(Input::Expansion(HarmonicExpansion::try_from(j)?))
    } else {
        let j: PolyJson =
            serde_json::from_value(v).map_err(|e| CliError::Usage(format!("malformed polynomial JSON: {e}")))?;
        Ok(Input::Poly(HomogeneousPoly::try_from(j)?))
    }
}

fn require(v: Option<usize>, flag: &str) -> CliResult<usize> {
    v.ok_or_else(|| CliError::Usage(format!("{flag} is required")))
}

fn load(common: &Common) -> CliResult<Input> {
    let input = match (&common.input, common.seed) {
        (None, Some(seed)) => {
            let (n, d) = (require(common.n, "--n")?, require(common.d, "--d")?);
            if d == 0 {
                return Err(CliError::Usage("--d must be at least 1".into()));
            }
            Input::Poly(sample_monomial(n, d, SeedSpec::new(seed, common.stream)))
        }
        (path, _) => parse_input(&read_text(path.as_deref())?)?,
    };
    if common.n.is_some_and(|n| n != input.n()) || common.d.is_some_and(|d| d != input.d()) {
        return Err(CliError::Usage(format!(
            "input has n = {}, d = {}, which contradicts --n/--d",
            input.n(),
            input.d()
        )));
    }
    Ok(input)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("cannot write stdout: {e}")))
        }
    }
}

fn resolved(value: serde_json::Value) {
    eprintln!("resolved: {value}");
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn poly_csv(p: &HomogeneousPoly) -> String {
    let mut s = String::from("alpha,gamma\n");
    for (a, g) in p.terms() {
        let alpha: Vec<String> = a.0.iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("{},{g}\n", alpha.join(" ")));
    }
    s
}

fn expansion_csv(e: &HarmonicExpansion) -> String {
    let mut s = String::from("ell,index,coeff\n");
    for (l, c) in e.components() {
        for (j, v) in c.iter().enumerate() {
            s.push_str(&format!("{l},{j},{v}\n"));
        }
    }
    s
}

fn expansion_output(e: &HarmonicExpansion, format: Format) -> String {
    match format {
        Format::Json => pretty(&ExpansionJson::from(e)),
        Format::Csv => expansion_csv(e),
    }
}

fn signature_csv(s: &TopologySignature) -> String {
    match s {
        TopologySignature::Circle { roots } => {
            let mut out = String::from("root\n");
            roots.iter().for_each(|r| out.push_str(&format!("{r}\n")));
            out
        }
        TopologySignature::Sphere { components, forest, depth } => {
            format!("components,forest,depth,betti\n{components},{forest},{depth},{}\n", 2 * components)
        }
    }
}

fn execute(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Sample { common, repr } => {
            let (n, d) = (require(common.n, "--n")?, require(common.d, "--d")?);
            let seed = common.seed.ok_or_else(|| CliError::Usage("--seed is required".into()))?;
            if d == 0 {
                return Err(CliError::Usage("--d must be at least 1".into()));
            }
            resolved(json!({"command": "sample", "args": common, "repr": repr}));
            let spec = SeedSpec::new(seed, common.stream);
            let text = match repr {
                Repr::Monomial => {
                    let p = sample_monomial(n, d, spec);
                    match common.format {
                        Format::Json => pretty(&PolyJson::from(&p)),
                        Format::Csv => poly_csv(&p),
                    }
                }
                Repr::Harmonic => expansion_output(&sample_harmonic(n, d, spec)?, common.format),
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Decompose { common } => {
            resolved(json!({"command": "decompose", "args": common}));
            let e = load(&common)?.expansion()?;
            emit(common.out.as_deref(), &expansion_output(&e, common.format))
        }
        Command::Truncate { common, cutoff } => {
            resolved(json!({"command": "truncate", "args": common, "L": cutoff}));
            let e = load(&common)?.expansion()?;
            let t = if cutoff >= e.degree() { e } else { e.truncate(cutoff) };
            emit(common.out.as_deref(), &expansion_output(&t, common.format))
        }
        Command::Norms { common, search, q } => {
            let input = load(&common)?;
            let q = q.unwrap_or((input.n() as f64 + 1.0) / 2.0);
            resolved(json!({"command": "norms", "args": common, "search": search, "q": q}));
            let e = input.expansion()?;
            let c1 = c1_norm(input.function()?.as_ref(), &search.options()?)?;
            let report = json!({
                "bw": e.bw_norm(),
                "l2": e.l2_norm(),
                "sobolev_q": q,
                "sobolev": e.sobolev_norm(q),
                "c1": c1.value,
                "sup": c1.sup.value,
                "gradient_sup": c1.gradient_sup.value,
                "certified": c1.certified,
            });
            let text = match common.format {
                Format::Json => pretty(&report),
                Format::Csv => {
                    let mut s = String::from("quantity,value\n");
                    for k in ["bw", "l2", "sobolev_q", "sobolev", "c1", "sup", "gradient_sup", "certified"] {
                        s.push_str(&format!("{k},{}\n", report[k]));
                    }
                    s
                }
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Delta { common, search } => {
            resolved(json!({"command": "delta", "args": common, "search": search}));
            let f = load(&common)?.function()?;
            let r = delta(f.as_ref(), &search.options()?)?;
            let text = match common.format {
                Format::Json => pretty(&r),
                Format::Csv => format!(
                    "value,raw_value,singular,degree,certified\n{},{},{},{},{}\n",
                    r.value, r.raw_value, r.singular, r.degree, r.extremum.certified
                ),
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Topology { common, search, level, emit_curves } => {
            resolved(json!({"command": "topology", "args": common, "search": search, "level": level, "emit_curves": emit_curves}));
            let f = load(&common)?.function()?;
            let opts = TopologyOptions { level, search: search.options()?, ..TopologyOptions::default() };
            let e = extract_signature(f.as_ref(), &opts)?;
            if let Some(path) = &emit_curves {
                let csv = match (&e.curves, &e.signature) {
                    (Some(set), _) => curves_csv(&set.curves),
                    (None, sig) => signature_csv(sig),
                };
                std::fs::write(path, csv)
                    .map_err(|err| CliError::Usage(format!("cannot write {}: {err}", path.display())))?;
            }
            let text = match common.format {
                Format::Json => pretty(&e.signature),
                Format::Csv => signature_csv(&e.signature),
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Experiment { config, threads, out, format } => {
            let text = read_text(Some(&config))?;
            let cfg: ExperimentConfig = if config.extension().is_some_and(|e| e == "toml") {
                toml::from_str(&text).map_err(|e| CliError::Usage(format!("malformed config: {e}")))?
            } else {
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed config: {e}")))?
            };
            let out = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            let threads = threads.unwrap_or(0);
            resolved(json!({"command": "experiment", "config": cfg, "threads": threads, "out": out, "format": format}));
            let start = Instant::now();
            let report = experiments::run(&cfg, threads)?;
            eprintln!("wall-clock: {:.3} s", start.elapsed().as_secs_f64());
            let text = match format {
                Format::Json => {
                    let mut s = report.to_json();
                    s.push('\n');
                    s
                }
                Format::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &text)?;
            if report.valid {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("report flagged invalid: {}", report.invalid_reasons.join("; "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 1,
                CliError::Numerical(_) => 2,
            })
        }
    }
}
