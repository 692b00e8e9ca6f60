//! Argument parsing and dispatch for the `kll` binary. Every subcommand
//! produces one JSON report.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use kll_core::fibration::{FibrationCertificate, FibrationSearch};
use kll_core::kummer::KummerLattice;
use kll_core::monodromy::{self, AffineAction, Mat2, Point, SL2_S, SL2_T};
use kll_core::scenario::{self, ConstructionScenario, RationalEnvelopeInput, Verdict};
use kll_core::torsion::{self, FibrationPicardModel};
use kll_core::verify::{self, RootOracle, VerificationReport};
use kll_core::{make_standard, Lattice, LatticeVector, StandardLattice, Sublattice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_EXHAUSTED: i32 = 4;
pub const EXIT_INCONSISTENT: i32 = 5;

pub const THREADS_ENV: &str = "KLL_THREADS";

#[derive(Debug, Clone, PartialEq, Eq, Parser)]
#[command(name = "kll", version, about = "Lattice, fibration and scenario certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads; KLL_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    #[command(subcommand)]
    Lattice(LatticeCommand),
    #[command(subcommand)]
    Fibration(FibrationCommand),
    #[command(subcommand)]
    Monodromy(MonodromyCommand),
    /// Torsion graph of a multisection model.
    TorsionGraph(TorsionArgs),
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    #[command(subcommand)]
    Envelope(EnvelopeCommand),
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
#[group(required = true, multiple = false)]
pub struct LatticeSource {
    /// A standard lattice (H, E8neg, MinusTwoId(n), KummerPi, K3, A2neg).
    #[arg(long)]
    pub name: Option<String>,
    /// A lattice JSON file `{rank, gram, labels}`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum LatticeCommand {
    /// Vectors of a given negative norm.
    Roots {
        #[command(flatten)]
        source: LatticeSource,
        #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
        norm: i64,
    },
    /// Invariant factors of a full-rank sublattice quotient.
    Quotient {
        /// `{ambient, generators}`; without it, the Kummer lattice over its exceptional classes.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchLattice {
    Kummer,
    Toy,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum FibrationCommand {
    /// Search for a fibration certificate.
    Search {
        #[arg(long, value_enum, default_value = "kummer")]
        lattice: SearchLattice,
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
    /// Check a search report with the independent verifier.
    Verify {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum MonodromyCommand {
    /// Orbits of an affine action `{m, gens}`.
    Orbits {
        #[arg(long)]
        input: PathBuf,
    },
    /// Order of the subgroup of SL(2, Z/p) generated by matrices.
    Sl2Order {
        #[arg(long)]
        prime: i64,
        /// JSON list of 2×2 matrices; defaults to S and T.
        #[arg(long)]
        gens: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
#[group(required = true, multiple = false)]
pub struct TorsionArgs {
    /// A model `{ambient, multisections, fiber, kernel}`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Exceptional curves of the Kummer surface over the searched fibration.
    #[arg(long)]
    pub kummer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum ScenarioCommand {
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum EnvelopeCommand {
    /// Dimension of the rational envelope and the genericity.
    Dim {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// `--help` or `--version` output.
    Help(String),
    Usage(String),
    Input(String),
    Core(kll_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INVALID,
            CliError::Core(kll_core::Error::SearchExhausted { .. }) => EXIT_EXHAUSTED,
            CliError::Core(kll_core::Error::InconsistentScenario(_)) => EXIT_INCONSISTENT,
            CliError::Core(_) => EXIT_INVALID,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Help(m) | CliError::Usage(m) | CliError::Input(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<kll_core::Error> for CliError {
    fn from(e: kll_core::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn input_paths(cmd: &Command) -> Vec<&Path> {
    let mut out: Vec<&Path> = Vec::new();
    match cmd {
        Command::Lattice(LatticeCommand::Roots { source, .. }) => out.extend(source.input.as_deref()),
        Command::Lattice(LatticeCommand::Quotient { input }) => out.extend(input.as_deref()),
        Command::Fibration(FibrationCommand::Verify { input })
        | Command::Monodromy(MonodromyCommand::Orbits { input })
        | Command::Scenario(ScenarioCommand::Classify { input })
        | Command::Envelope(EnvelopeCommand::Dim { input }) => out.push(input),
        Command::Monodromy(MonodromyCommand::Sl2Order { gens, .. }) => out.extend(gens.as_deref()),
        Command::TorsionGraph(args) => out.extend(args.input.as_deref()),
        Command::Fibration(FibrationCommand::Search { .. }) => {}
    }
    out
}

/// Parses `argv` (without the program name) and checks input files exist.
pub fn parse_args<I, S>(argv: I) -> CliResult<Cli>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("kll")).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    if let Some(missing) = input_paths(&cli.command).into_iter().find(|p| !p.is_file()) {
        return Err(CliError::Usage(format!("no such file: {}", missing.display())));
    }
    Ok(cli)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootsReport {
    pub lattice: String,
    pub rank: usize,
    pub norm: i64,
    pub count: usize,
    pub vectors: Vec<LatticeVector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientInput {
    pub ambient: Lattice,
    pub generators: Vec<LatticeVector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub ambient_rank: usize,
    pub sublattice_rank: usize,
    pub invariant_factors: Vec<u64>,
    pub nontrivial_factors: Vec<u64>,
    pub order: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub lattice: SearchLattice,
    pub bound: i64,
    pub certificate: FibrationCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub lattice: SearchLattice,
    #[serde(flatten)]
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitsReport {
    pub modulus: i64,
    pub orbit_count: usize,
    pub orbit_sizes: Vec<usize>,
    pub orbits: Vec<Vec<Point>>,
    /// `null` unless the modulus is prime.
    pub preimage_irreducible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl2Report {
    pub prime: i64,
    pub generators: Vec<Mat2>,
    pub order: usize,
    pub sl2_order: i64,
    pub surjective: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub vertices: usize,
    pub eta_kernel_rank: usize,
    pub degrees: Vec<i64>,
    pub edges: Vec<(usize, usize)>,
    pub vertex_degrees: Vec<usize>,
    pub min_degree: Option<usize>,
    pub connected: bool,
    pub diameter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    #[serde(rename = "dim_VQ")]
    pub dim_vq: usize,
    pub envelope_dim: usize,
    pub k: usize,
    pub weakly_lagrangian_obstructed: bool,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn search_for(lattice: SearchLattice) -> CliResult<FibrationSearch> {
    Ok(match lattice {
        SearchLattice::Kummer => FibrationSearch::kummer()?,
        SearchLattice::Toy => FibrationSearch::toy()?,
    })
}

fn lattice_roots(source: &LatticeSource, norm: i64) -> CliResult<RootsReport> {
    let (name, lattice) = match (&source.name, &source.input) {
        (Some(n), _) => {
            let std = StandardLattice::from_str(n)?;
            (std.to_string(), make_standard(std)?)
        }
        (None, Some(p)) => (p.display().to_string(), read_json::<Lattice>(p)?),
        (None, None) => return Err(CliError::Usage("need --name or --input".into())),
    };
    let vectors = lattice.enumerate_norm_vectors(norm)?;
    Ok(RootsReport { lattice: name, rank: lattice.rank(), norm, count: vectors.len(), vectors })
}

fn lattice_quotient(input: Option<&Path>) -> CliResult<QuotientReport> {
    let sub = match input {
        Some(p) => {
            let q: QuotientInput = read_json(p)?;
            Sublattice::new(q.ambient, q.generators)?
        }
        None => KummerLattice::build()?.exceptional_sublattice(),
    };
    let factors = sub.ambient().smith_quotient(&sub)?;
    Ok(QuotientReport {
        ambient_rank: sub.ambient().rank(),
        sublattice_rank: sub.rank(),
        nontrivial_factors: factors.iter().copied().filter(|&d| d > 1).collect(),
        order: factors.iter().product(),
        invariant_factors: factors,
    })
}

fn fibration_verify(path: &Path) -> CliResult<VerifyReport> {
    let report: SearchReport = read_json(path)?;
    let verification = match report.lattice {
        SearchLattice::Kummer => {
            let k = KummerLattice::build()?;
            verify::verify_certificate(
                k.lattice.gram(),
                &report.certificate,
                RootOracle::HalfFrame { half_basis: &k.half_basis },
            )
        }
        SearchLattice::Toy => {
            let l = make_standard(StandardLattice::A2Neg)?;
            verify::verify_certificate(l.gram(), &report.certificate, RootOracle::CoordinateBox)
        }
    };
    Ok(VerifyReport { lattice: report.lattice, report: verification })
}

fn orbits(path: &Path) -> CliResult<OrbitsReport> {
    let action: AffineAction = read_json(path)?;
    let partition = action.orbits();
    Ok(OrbitsReport {
        modulus: action.modulus(),
        orbit_count: partition.blocks.len(),
        orbit_sizes: partition.sizes(),
        orbits: partition.blocks,
        preimage_irreducible: action.is_preimage_irreducible().ok(),
    })
}

fn sl2(prime: i64, gens: Option<&Path>) -> CliResult<Sl2Report> {
    let generators: Vec<Mat2> = match gens {
        Some(p) => read_json(p)?,
        None => vec![SL2_S, SL2_T],
    };
    let surjective = monodromy::monodromy_surjective_mod_p(&generators, prime)?;
    Ok(Sl2Report {
        prime,
        order: monodromy::subgroup_order(&generators, prime)?,
        sl2_order: monodromy::sl2_order(prime),
        generators,
        surjective,
    })
}

fn torsion_graph(args: &TorsionArgs) -> CliResult<TorsionReport> {
    let model: FibrationPicardModel = match &args.input {
        Some(p) => read_json(p)?,
        None => torsion::kummer_exceptional_model(2)?,
    };
    let graph = model.torsion_graph();
    Ok(TorsionReport {
        vertices: graph.vertices,
        eta_kernel_rank: model.eta_kernel_rank(),
        degrees: (0..model.len()).map(|i| model.degree(i)).collect(),
        vertex_degrees: graph.degrees(),
        min_degree: graph.min_degree(),
        connected: graph.is_connected()?,
        diameter: graph.diameter()?,
        edges: graph.edges,
    })
}

fn envelope(path: &Path) -> CliResult<EnvelopeReport> {
    let input: RationalEnvelopeInput = read_json(path)?;
    let dim = scenario::rational_envelope_dim(&input)?;
    let k = input.dim_vq() - dim;
    Ok(EnvelopeReport {
        dim_vq: input.dim_vq(),
        envelope_dim: dim,
        k,
        weakly_lagrangian_obstructed: scenario::weakly_lagrangian_obstruction(k as i64)?,
    })
}

/// The report as a JSON document plus a one-line summary.
pub struct Report {
    pub json: String,
    pub summary: String,
    /// Nonzero when the command ran but its verdict is negative.
    pub exit_code: i32,
}

fn dispatch(cmd: &Command) -> CliResult<Report> {
    let ok = |json: String, summary: String| Ok(Report { json, summary, exit_code: EXIT_OK });
    match cmd {
        Command::Lattice(LatticeCommand::Roots { source, norm }) => {
            let r = lattice_roots(source, *norm)?;
            ok(to_json(&r), format!("{}: {} vectors of norm {}", r.lattice, r.count, r.norm))
        }
        Command::Lattice(LatticeCommand::Quotient { input }) => {
            let r = lattice_quotient(input.as_deref())?;
            ok(to_json(&r), format!("quotient of order {} with factors {:?}", r.order, r.nontrivial_factors))
        }
        Command::Fibration(FibrationCommand::Search { lattice, bound }) => {
            let certificate = search_for(*lattice)?.run_search(*bound)?;
            let r = SearchReport { lattice: *lattice, bound: *bound, certificate };
            ok(to_json(&r), format!("x = {}, hS² = {}", r.certificate.x, r.certificate.hs_square))
        }
        Command::Fibration(FibrationCommand::Verify { input }) => {
            let r = fibration_verify(input)?;
            let failed: Vec<&str> = r.report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let summary = if r.report.valid {
                "certificate valid".to_string()
            } else {
                format!("certificate invalid: {failed:?}")
            };
            let exit_code = if r.report.valid { EXIT_OK } else { EXIT_INVALID };
            Ok(Report { json: to_json(&r), summary, exit_code })
        }
        Command::Monodromy(MonodromyCommand::Orbits { input }) => {
            let r = orbits(input)?;
            ok(to_json(&r), format!("{} orbits of sizes {:?} mod {}", r.orbit_count, r.orbit_sizes, r.modulus))
        }
        Command::Monodromy(MonodromyCommand::Sl2Order { prime, gens }) => {
            let r = sl2(*prime, gens.as_deref())?;
            ok(to_json(&r), format!("order {} of {} in SL(2, Z/{})", r.order, r.sl2_order, r.prime))
        }
        Command::TorsionGraph(args) => {
            let r = torsion_graph(args)?;
            ok(
                to_json(&r),
                format!("{} vertices, connected = {}, min degree {:?}", r.vertices, r.connected, r.min_degree),
            )
        }
        Command::Scenario(ScenarioCommand::Classify { input }) => {
            let s: ConstructionScenario = read_json(input)?;
            let v: Verdict = scenario::classify(&s)?;
            ok(to_json(&v), format!("fibered: {}", v.fibered))
        }
        Command::Envelope(EnvelopeCommand::Dim { input }) => {
            let r = envelope(input)?;
            ok(to_json(&r), format!("envelope dimension {} of {}, k = {}", r.envelope_dim, r.dim_vq, r.k))
        }
    }
}

/// `KLL_THREADS` wins over `--threads`; `None` keeps rayon's default pool.
pub fn thread_count(flag: Option<usize>, env: Option<&str>) -> CliResult<Option<usize>> {
    match env {
        Some(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        None => Ok(flag),
    }
}

/// Runs the command on a pool of the requested size.
pub fn run(cli: &Cli) -> CliResult<Report> {
    let env = std::env::var(THREADS_ENV).ok();
    match thread_count(cli.threads, env.as_deref())? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    exit_code: i32,
}

/// Full invocation: parse, run, write the report. Returns the exit status.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(CliError::Help(text)) => {
            print!("{text}");
            return EXIT_OK;
        }
        Err(e) => {
            eprint!("{}", e.to_string().trim_end());
            eprintln!();
            return e.exit_code();
        }
    };
    let (json, code) = match run(&cli) {
        Ok(report) => {
            eprintln!("{}", report.summary);
            (report.json, report.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let msg = e.to_string();
            (to_json(&ErrorReport { error: &msg, exit_code: e.exit_code() }), e.exit_code())
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, &json).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{json}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("{e}");
        return EXIT_USAGE;
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_roots_by_name() {
        let cli = parse_args(["lattice", "roots", "--name", "E8neg"]).unwrap();
        assert_eq!(
            cli.command,
            Command::Lattice(LatticeCommand::Roots {
                source: LatticeSource { name: Some("E8neg".into()), input: None },
                norm: -2
            })
        );
    }

    #[test]
    fn parses_search_bound() {
        let cli = parse_args(["fibration", "search", "--bound", "2"]).unwrap();
        assert_eq!(
            cli.command,
            Command::Fibration(FibrationCommand::Search { lattice: SearchLattice::Kummer, bound: 2 })
        );
    }

    #[test]
    fn rejects_unknown_subcommand_and_missing_file() {
        assert_eq!(parse_args(["bogus"]).unwrap_err().exit_code(), EXIT_USAGE);
        let err = parse_args(["scenario", "classify", "--input", "/nonexistent/s.json"]).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
        assert_eq!(parse_args(["lattice", "roots"]).unwrap_err().exit_code(), EXIT_USAGE);
    }

    #[test]
    fn env_overrides_thread_flag() {
        assert_eq!(thread_count(Some(2), Some("4")).unwrap(), Some(4));
        assert_eq!(thread_count(Some(2), None).unwrap(), Some(2));
        assert!(thread_count(None, Some("many")).is_err());
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        use kll_core::Error;
        assert_eq!(CliError::Core(Error::SearchExhausted { bound: 1 }).exit_code(), EXIT_EXHAUSTED);
        assert_eq!(CliError::Core(Error::InconsistentScenario(String::new())).exit_code(), EXIT_INCONSISTENT);
        assert_eq!(CliError::Core(Error::NotPrime(4)).exit_code(), EXIT_INVALID);
    }
}
