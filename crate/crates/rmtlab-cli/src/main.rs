//! `rmtlab`: sampling, law tables, transforms and verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use rmtlab::heavy::{
    nu_alpha_z_table, y_functional, GDensity, NuAlphaTable, PopulationConfig, StableSampleBank,
};
use rmtlab::laws::{
    circular_h_limit, circular_modulus_cdf, ginibre_mean_density, gumbel_cdf, kostlan_radius_cdf, nu_z_density,
    quarter_circular_density,
};
use rmtlab::spectral::{eigenvalues, singular_values};
use rmtlab::stats::GofReport;
use rmtlab::suites::{run_suite, Suite, SuiteConfig, NU_ALPHA_EPS, NU_Z_EPS};
use rmtlab::transforms::{
    b_field, b_field_normal, extrapolate_fields, log_potential_empirical, quaternionic_transform,
    recover_density_from_b, Axis, Lattice, QPoint,
};
use rmtlab::{ComplexMatrix, EntryLaw, Error, Phase, Seed};

#[derive(Parser)]
#[command(name = "rmtlab", version, about = "Non-Hermitian random matrix laboratory")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a matrix and write its eigenvalues and singular values.
    Sample(SampleArgs),
    /// Tabulate a reference law on a grid.
    Law(LawArgs),
    /// Run a verification suite; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Potential, quaternionic transform or recovered density on a lattice.
    Transform(TransformArgs),
    /// Re-run a command from its emitted config file.
    Replay {
        #[arg(long)]
        config: PathBuf,
    },
}

/// The resolved configuration echoed next to every output.
#[derive(Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum RunConfig {
    Sample(SampleArgs),
    Law(LawArgs),
    Verify(VerifyArgs),
    Transform(TransformArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Ensemble {
    GinibreComplex,
    GinibreReal,
    Bernoulli,
    Heavy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PhaseArg {
    One,
    Rademacher,
    Circle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Scaling {
    /// n^{-1/2}, or n^{-1/α} for heavy tails.
    Natural,
    None,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct EnsembleArgs {
    #[arg(long, value_enum)]
    ensemble: Option<Ensemble>,
    #[arg(long)]
    n: Option<usize>,
    /// Tail index for the heavy ensemble.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Phase of heavy-tailed entries.
    #[arg(long, value_enum, default_value_t = PhaseArg::Rademacher)]
    phase: PhaseArg,
    #[arg(long, value_enum, default_value_t = Scaling::Natural)]
    scale: Scaling,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    matrix: EnsembleArgs,
    #[arg(long, env = "RMT_DEFAULT_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory for spectrum.csv and singular.csv.
    #[arg(long, default_value = "sample-out")]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum LawName {
    QuarterCircular,
    CircularModulus,
    GinibreDensity,
    Kostlan,
    Gumbel,
    CircularH,
    GAlpha,
    NuZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum AlphaMode {
    FiniteVariance,
    Heavy,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct LawArgs {
    #[arg(long, value_enum)]
    name: LawName,
    /// a:b:step
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Dimension for finite-n formulas.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Complex point as `re` or `re,im`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    z: String,
    #[arg(long, value_enum, default_value_t = AlphaMode::FiniteVariance)]
    alpha_mode: AlphaMode,
    /// Comma-separated ε schedule for singular value densities.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    bank_size: usize,
    #[arg(long, env = "RMT_DEFAULT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "law.csv")]
    output: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, env = "RMT_DEFAULT_SEED", default_value_t = 0)]
    seed: u64,
    /// Report file (JSON array); defaults to verify-<suite>.json.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum TransformKind {
    Density,
    Potential,
    Gamma,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct TransformArgs {
    #[arg(long, value_enum, default_value_t = TransformKind::Density)]
    kind: TransformKind,
    /// Spectrum CSV (header `re,im`); used as the normal matrix diag(λ).
    #[arg(long, conflicts_with = "ensemble")]
    input: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    matrix: EnsembleArgs,
    /// Real axis of the lattice, a:b:step.
    #[arg(long, default_value = "-1.5:1.5:0.1", allow_hyphen_values = true)]
    re: String,
    /// Imaginary axis of the lattice, a:b:step.
    #[arg(long, default_value = "-1.5:1.5:0.1", allow_hyphen_values = true)]
    im: String,
    /// Comma-separated t values; several are extrapolated linearly to t = 0.
    #[arg(long, default_value = "0.05")]
    t: String,
    #[arg(long, env = "RMT_DEFAULT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "transform.csv")]
    output: PathBuf,
}

enum Failure {
    Verification,
    /// Numerical fault while computing; reported like a failed verification.
    Computation(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification | Failure::Computation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InvalidDimension(_)
            | Error::InsufficientSamples { .. }
            | Error::LengthMismatch { .. }
            | Error::Empty => Failure::Usage(e.to_string()),
            _ => Failure::Computation(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse::<Suite>().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|k| k.name()).collect();
        format!("unknown suite '{s}' (expected one of: {})", names.join(", "))
    })
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("'{s}' is not a comma-separated list of numbers"))))
        .collect()
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, Failure> {
    match parse_list(s)?.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(Failure::Usage(format!("'{s}' is not a complex number re[,im]"))),
    }
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn config_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn echo_config(path: &Path, cfg: RunConfig) -> Outcome {
    let text = serde_json::to_string_pretty(&cfg).expect("config serializes");
    write_file(path, &(text + "\n"))
}

impl EnsembleArgs {
    fn law(&self) -> std::result::Result<EntryLaw, Failure> {
        let law = match self.ensemble {
            Some(Ensemble::GinibreComplex) => EntryLaw::ComplexGaussian,
            Some(Ensemble::GinibreReal) => EntryLaw::RealGaussian,
            Some(Ensemble::Bernoulli) => EntryLaw::SymmetricBernoulli,
            Some(Ensemble::Heavy) => {
                let phase = match self.phase {
                    PhaseArg::One => Phase::DeterministicOne,
                    PhaseArg::Rademacher => Phase::Rademacher,
                    PhaseArg::Circle => Phase::UniformCircle,
                };
                EntryLaw::HeavyTailed { alpha: self.alpha, phase }
            }
            None => return Err(Failure::Usage("an ensemble is required".into())),
        };
        law.validate()?;
        Ok(law)
    }

    fn sample(&self, seed: u64) -> std::result::Result<ComplexMatrix, Failure> {
        let law = self.law()?;
        let n = self.n.filter(|&n| n >= 1).ok_or_else(|| Failure::Usage("--n must be at least 1".into()))?;
        let x = rmtlab::rng::sample_iid_matrix(n, law, Seed::new(seed, 0))?;
        let nf = n as f64;
        Ok(match (self.scale, law) {
            (Scaling::None, _) => x,
            (Scaling::Natural, EntryLaw::HeavyTailed { alpha, .. }) => x.scaled(nf.powf(-1.0 / alpha)),
            (Scaling::Natural, _) => x.scaled(1.0 / nf.sqrt()),
        })
    }
}

fn cmd_sample(args: SampleArgs) -> Outcome {
    let x = args.matrix.sample(args.seed)?;
    let e = eigenvalues(&x)?;
    let s = singular_values(&x)?;
    let mut eig_csv = String::from("re,im\n");
    for v in e.values() {
        writeln!(eig_csv, "{},{}", v.re, v.im).unwrap();
    }
    let mut sing = String::from("s\n");
    for v in s.values() {
        writeln!(sing, "{v}").unwrap();
    }
    fs::create_dir_all(&args.output).map_err(|e| Failure::Io(format!("cannot create {}: {e}", args.output.display())))?;
    write_file(&args.output.join("spectrum.csv"), &eig_csv)?;
    write_file(&args.output.join("singular.csv"), &sing)?;
    let cfg = args.output.join("sample.config.json");
    echo_config(&cfg, RunConfig::Sample(args))
}

fn default_grid(name: LawName, mode: AlphaMode) -> &'static str {
    match name {
        LawName::QuarterCircular => "0:2:0.01",
        LawName::CircularModulus | LawName::CircularH => "0:1.5:0.01",
        LawName::GinibreDensity | LawName::Kostlan => "0:2:0.01",
        LawName::Gumbel => "-3:8:0.05",
        LawName::GAlpha => "0:4:0.05",
        LawName::NuZ => match mode {
            AlphaMode::FiniteVariance => "0:2:0.01",
            AlphaMode::Heavy => "0:10:0.05",
        },
    }
}

#[derive(Serialize)]
struct GAlphaSidecar {
    bank_size: usize,
    seed: Seed,
    normalization: rmtlab::heavy::GNormalization,
    max_residual: f64,
}

#[derive(Serialize)]
struct NuAlphaSidecar {
    population: PopulationConfig,
    eps: Vec<f64>,
    seed: Seed,
    /// Mass on the grid plus the power-tail allowance (grids starting at 0 only).
    total_mass: Option<f64>,
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".sidecar.json");
    PathBuf::from(s)
}

fn cmd_law(mut args: LawArgs) -> Outcome {
    let grid = args.grid.clone().unwrap_or_else(|| default_grid(args.name, args.alpha_mode).to_string());
    let xs = Axis::parse(&grid)?.points();
    let z = parse_complex(&args.z)?;
    let seed = Seed::new(args.seed, 0);
    let heavy_nu = args.name == LawName::NuZ && args.alpha_mode == AlphaMode::Heavy;
    let eps = match &args.eps {
        Some(s) => parse_list(s)?,
        None if heavy_nu => NU_ALPHA_EPS.to_vec(),
        None => NU_Z_EPS.to_vec(),
    };
    args.grid = Some(grid);
    args.eps = Some(eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","));
    let n = args.n;
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let mut sidecar: Option<String> = None;
    let (header, values): (&str, Vec<f64>) = match args.name {
        LawName::QuarterCircular => ("x,density", xs.iter().map(|&x| quarter_circular_density(x)).collect()),
        LawName::CircularModulus => ("r,cdf", xs.iter().map(|&r| circular_modulus_cdf(r)).collect()),
        LawName::GinibreDensity => {
            let m = n as f64;
            ("r,density", xs.iter().map(|&r| m * ginibre_mean_density(n, Complex64::new(m.sqrt() * r, 0.0))).collect())
        }
        LawName::Kostlan => ("r,cdf", xs.iter().map(|&r| kostlan_radius_cdf(n, r)).collect()),
        LawName::Gumbel => ("x,cdf", xs.iter().map(|&x| gumbel_cdf(x)).collect()),
        LawName::CircularH => ("r,h", xs.iter().map(|&r| circular_h_limit(Complex64::new(r, 0.0))).collect()),
        LawName::GAlpha => {
            let bank = StableSampleBank::generate(args.alpha, args.bank_size, seed)?;
            let g = GDensity::new(&bank, None)?;
            let mut vals = Vec::with_capacity(xs.len());
            let mut max_residual = 0.0f64;
            for &r in &xs {
                vals.push(g.at(r)?);
                let y = g.y_star(r * r)?;
                max_residual = max_residual.max((y_functional(&bank, r * r, 0.0, y) - 1.0).abs());
            }
            let normalization = rmtlab::heavy::g_normalization(&bank)?;
            let meta = GAlphaSidecar { bank_size: bank.len(), seed, normalization, max_residual };
            sidecar = Some(serde_json::to_string_pretty(&meta).expect("sidecar serializes"));
            ("r,g_alpha", vals)
        }
        LawName::NuZ if heavy_nu => {
            let cfg = PopulationConfig::default();
            let vals = nu_alpha_z_table(z, &xs, args.alpha, &eps, &cfg, seed)?;
            let total_mass = NuAlphaTable::new(args.alpha, xs.clone(), vals.clone()).ok().map(|t| t.total_mass());
            let meta = NuAlphaSidecar { population: cfg, eps: eps.clone(), seed, total_mass };
            sidecar = Some(serde_json::to_string_pretty(&meta).expect("sidecar serializes"));
            ("x,nu_alpha_z", vals)
        }
        LawName::NuZ => ("x,density", xs.iter().map(|&x| nu_z_density(z, x, &eps)).collect::<rmtlab::Result<_>>()?),
    };
    let mut out = format!("{header}\n");
    for (x, v) in xs.iter().zip(&values) {
        writeln!(out, "{x},{v}").unwrap();
    }
    write_file(&args.output, &out)?;
    if let Some(meta) = sidecar {
        write_file(&sidecar_path(&args.output), &(meta + "\n"))?;
    }
    let cfg = config_path(&args.output);
    echo_config(&cfg, RunConfig::Law(args))
}

fn cmd_verify(mut args: VerifyArgs) -> Outcome {
    let suite = args.suite;
    args.n = Some(args.n.unwrap_or(suite.default_n()));
    args.replicas = Some(args.replicas.unwrap_or(suite.default_replicas()));
    if suite == Suite::Heavy {
        args.alpha = Some(args.alpha.unwrap_or(1.0));
    }
    let output = args.output.clone().unwrap_or_else(|| PathBuf::from(format!("verify-{suite}.json")));
    args.output = Some(output.clone());
    let cfg = SuiteConfig { n: args.n, replicas: args.replicas, alpha: args.alpha, seed: Seed::new(args.seed, 0) };
    let reports: Vec<GofReport> = run_suite(suite, &cfg)?;
    for r in &reports {
        println!("{} {} statistic={:.4e} critical={:.4e}", if r.pass { "PASS" } else { "FAIL" }, r.test_name, r.statistic, r.critical_value);
    }
    write_file(&output, &(serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"))?;
    echo_config(&config_path(&output), RunConfig::Verify(args))?;
    if reports.iter().all(|r| r.pass) { Ok(()) } else { Err(Failure::Verification) }
}

fn read_spectrum(path: &Path) -> std::result::Result<Vec<Complex64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut atoms = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (k == 0 && line == "re,im") {
            continue;
        }
        let bad = || Failure::Usage(format!("{}: line {}: expected 're,im', got '{line}'", path.display(), k + 1));
        let (re, im) = line.split_once(',').ok_or_else(bad)?;
        let re: f64 = re.trim().parse().map_err(|_| bad())?;
        let im: f64 = im.trim().parse().map_err(|_| bad())?;
        if !re.is_finite() || !im.is_finite() {
            return Err(bad());
        }
        atoms.push(Complex64::new(re, im));
    }
    if atoms.is_empty() {
        return Err(Failure::Usage(format!("{}: no eigenvalues", path.display())));
    }
    Ok(atoms)
}

fn cmd_transform(args: TransformArgs) -> Outcome {
    let lattice = Lattice { re: Axis::parse(&args.re)?, im: Axis::parse(&args.im)? };
    let ts = parse_list(&args.t)?;
    if !ts.iter().all(|&t| t > 0.0) {
        return Err(Failure::Usage("every t must be positive".into()));
    }
    let (atoms, matrix) = match &args.input {
        Some(path) => (read_spectrum(path)?, None),
        None => {
            let x = args.matrix.sample(args.seed)?;
            (eigenvalues(&x)?.values().to_vec(), Some(x))
        }
    };
    let points = lattice.points();
    let mut out = String::new();
    match args.kind {
        TransformKind::Potential => {
            out.push_str("re,im,potential\n");
            for z in &points {
                let u = match log_potential_empirical(&atoms, *z) {
                    Ok(u) => u,
                    Err(Error::AtomCollision { .. }) => f64::INFINITY,
                    Err(e) => return Err(e.into()),
                };
                writeln!(out, "{},{},{u}", z.re, z.im).unwrap();
            }
        }
        TransformKind::Gamma => {
            let m = matrix.unwrap_or_else(|| ComplexMatrix::diagonal(&atoms));
            out.push_str("re,im,a_re,a_im,b_re,b_im\n");
            for z in &points {
                let g = quaternionic_transform(&m, &QPoint::imaginary(*z, ts[0])?)?;
                writeln!(out, "{},{},{},{},{},{}", z.re, z.im, g.a.re, g.a.im, g.b.re, g.b.im).unwrap();
            }
        }
        TransformKind::Density => {
            let fields = ts
                .iter()
                .map(|&t| match &matrix {
                    Some(m) => b_field(m, &lattice, t),
                    None => b_field_normal(&atoms, &lattice, t),
                })
                .collect::<rmtlab::Result<Vec<_>>>()?;
            let field = extrapolate_fields(&ts, &fields);
            let grid = recover_density_from_b(&field, &lattice)?;
            if !grid.negative_dips.is_empty() {
                eprintln!("note: {} lattice points with density below -0.05", grid.negative_dips.len());
            }
            out.push_str("re,im,density\n");
            for (z, d) in points.iter().zip(&grid.density) {
                writeln!(out, "{},{},{d}", z.re, z.im).unwrap();
            }
        }
    }
    write_file(&args.output, &out)?;
    let cfg = config_path(&args.output);
    echo_config(&cfg, RunConfig::Transform(args))
}

fn dispatch(cfg: RunConfig) -> Outcome {
    match cfg {
        RunConfig::Sample(a) => cmd_sample(a),
        RunConfig::Law(a) => cmd_law(a),
        RunConfig::Verify(a) => cmd_verify(a),
        RunConfig::Transform(a) => cmd_transform(a),
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot set thread count: {e}")))?;
    }
    match cli.command {
        Command::Sample(a) => dispatch(RunConfig::Sample(a)),
        Command::Law(a) => dispatch(RunConfig::Law(a)),
        Command::Verify(a) => dispatch(RunConfig::Verify(a)),
        Command::Transform(a) => dispatch(RunConfig::Transform(a)),
        Command::Replay { config } => {
            let text = fs::read_to_string(&config).map_err(|e| Failure::Io(format!("cannot read {}: {e}", config.display())))?;
            let cfg: RunConfig =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: invalid config: {e}", config.display())))?;
            dispatch(cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verification => eprintln!("verification failed"),
                Failure::Computation(m) => eprintln!("numerical failure: {m}"),
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Io(m) => eprintln!("I/O error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
