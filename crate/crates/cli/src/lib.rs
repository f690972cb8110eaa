//! The `cmm` command-line tool: build, store and query compressed products.
//!
//! Indices on the command line and in printed output are 1-based, matching
//! Matrix Market. Data goes to stdout; timing and memory diagnostics go to
//! stderr. Floats are printed in Rust's shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmm_core::alloc::TrackingAllocator;
use cmm_core::covariance::{scan_correlations_with, sketch_covariance_with, GramSketch, Orientation, SampleSet, SketchMode};
use cmm_core::estimate::{estimate_frobenius_ub_with, estimate_nnz_with, DEFAULT_NNZ_REPS};
use cmm_core::hashing::SignIndependence;
use cmm_core::matrix::load_matrix_market;
use cmm_core::matrix::{Layout, Operand, SparseMatrix, Transposed};
use cmm_core::recovery::{compressed_product_recoverable_with, default_codes, default_threshold, CodeParams, DEFAULT_KAPPA};
use cmm_core::reference::{err_f_k, exact_product_capped};
use cmm_core::sketch::{compressed_product_with, SketchParams, DEFAULT_DENSE_CAP};
use cmm_core::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod file;

pub use file::{FormatError, StoredSketch};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cmm_core::Error),
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    IndexOutOfRange(String),
    #[error("{0}")]
    NotRecoverable(String),
}

impl CliError {
    /// 1 parse/usage, 2 dimensions or indices, 3 I/O, 4 plain sketch where a
    /// recoverable one is needed, 5 memory cap.
    pub fn exit_code(&self) -> u8 {
        use cmm_core::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::DimensionMismatch(_) | E::IndexOutOfRange { .. } | E::LengthMismatch { .. } | E::SketchMismatch(_) => 2,
                E::Io { .. } => 3,
                E::MemoryCap { .. } => 5,
                _ => 1,
            },
            CliError::Format { source, .. } => match source {
                FormatError::Core(cmm_core::Error::Io { .. }) => 3,
                _ => 1,
            },
            CliError::Io { .. } => 3,
            CliError::Usage(_) => 1,
            CliError::IndexOutOfRange(_) => 2,
            CliError::NotRecoverable(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cmm", version, about = "Compressed matrix multiplication via Count-Sketch and FFT")]
pub struct Cli {
    /// Worker threads; 1 selects the sequential path. Defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sketch the product of two Matrix Market files and store it.
    Sketch(SketchArgs),
    /// Estimate one entry of the product from a stored sketch.
    Query(QueryArgs),
    /// List significant entries of a recoverable sketch.
    Topk(TopkArgs),
    /// Estimate nnz(AB) or an upper bound on ||AB||_F^2.
    Estimate(EstimateArgs),
    /// Sketch a sample covariance matrix and scan it for large entries.
    Cov(CovArgs),
    /// Compare a sketch against the exact product.
    Compare(CompareArgs),
    /// Generate synthetic inputs.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Args)]
pub struct ProductArgs {
    /// Left factor A (Matrix Market).
    #[arg(long)]
    pub a: PathBuf,
    /// Right factor B (Matrix Market).
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Signs {
    /// 2-wise independent signs.
    #[value(name = "2")]
    Two,
    /// 4-wise independent signs.
    #[value(name = "4")]
    Four,
}

impl From<Signs> for SignIndependence {
    fn from(s: Signs) -> Self {
        match s {
            Signs::Two => SignIndependence::Pairwise,
            Signs::Four => SignIndependence::FourWise,
        }
    }
}

#[derive(Debug, Args)]
pub struct SketchOptions {
    /// Buckets per repetition; rounded up to a power of two.
    #[arg(long)]
    pub buckets: usize,
    /// Repetitions; defaults to 6 * ceil(lg max(n1, n3)).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "2")]
    pub signs: Signs,
}

#[derive(Debug, Args)]
pub struct CodeOptions {
    /// Also build the code-masked families needed by `topk`.
    #[arg(long)]
    pub recoverable: bool,
    /// Code length; defaults to 4 * ceil(lg n), grown until certified.
    #[arg(long, requires = "recoverable")]
    pub code_len: Option<usize>,
    /// Relative decoding radius as NUM/DEN.
    #[arg(long, value_parser = parse_ratio, default_value = "1/8", requires = "recoverable")]
    pub code_delta: (u32, u32),
}

impl CodeOptions {
    fn params(&self) -> CodeParams {
        CodeParams {
            len: self.code_len,
            delta_num: self.code_delta.0,
            delta_den: self.code_delta.1,
        }
    }
}

fn parse_ratio(s: &str) -> std::result::Result<(u32, u32), String> {
    let (n, d) = s.split_once('/').ok_or("expected NUM/DEN")?;
    let n = n.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let d = d.trim().parse::<u32>().map_err(|e| e.to_string())?;
    Ok((n, d))
}

#[derive(Debug, Args)]
pub struct SketchArgs {
    #[command(flatten)]
    pub inputs: ProductArgs,
    #[command(flatten)]
    pub sketch: SketchOptions,
    #[command(flatten)]
    pub code: CodeOptions,
    /// Output sketch file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub sketch: PathBuf,
    /// 1-based row index.
    #[arg(long)]
    pub row: usize,
    /// 1-based column index.
    #[arg(long)]
    pub col: usize,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("threshold_source").required(true).args(["threshold", "auto_threshold"])))]
pub struct TopkArgs {
    #[arg(long)]
    pub sketch: PathBuf,
    /// Significance threshold Delta.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Derive Delta = kappa * sqrt(F / b) from an upper bound F on
    /// ||AB||_F^2; needs the original factors via --a and --b.
    #[arg(long, requires_all = ["a", "b"])]
    pub auto_threshold: bool,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    pub kappa: f64,
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Print at most K entries.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimateKind {
    Nnz,
    Frobenius,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(value_enum)]
    pub kind: EstimateKind,
    #[command(flatten)]
    pub inputs: ProductArgs,
    /// Repetitions; defaults to 10 for nnz and 6 * ceil(lg max(n1, n3)) for
    /// frobenius.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("action").required(true).multiple(true).args(["out", "scan"])))]
pub struct CovArgs {
    /// CSV of samples, one variable per row unless --observations-as-rows.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub observations_as_rows: bool,
    #[command(flatten)]
    pub sketch: SketchOptions,
    #[command(flatten)]
    pub code: CodeOptions,
    /// Scan threshold; defaults to kappa * sqrt(F / b) with F an upper bound
    /// on the squared Frobenius norm of the covariance matrix.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Store the off-diagonal covariance sketch.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print variable pairs whose covariance estimate exceeds the threshold.
    #[arg(long)]
    pub scan: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub inputs: ProductArgs,
    #[command(flatten)]
    pub sketch: SketchOptions,
    /// Largest dense n1*n3 the comparison may materialize.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    pub max_entries: usize,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Uniform samples in [-1, 1) where one variable copies another in a
    /// random fraction `rho` of the observations.
    CorrelatedRows(CorrelatedRowsArgs),
}

#[derive(Debug, Args)]
pub struct CorrelatedRowsArgs {
    #[arg(long, default_value_t = 100)]
    pub variables: usize,
    #[arg(long, default_value_t = 100)]
    pub observations: usize,
    #[arg(long, default_value_t = 0.9)]
    pub rho: f64,
    /// 1-based variables (source, copy).
    #[arg(long, value_parser = parse_pair, default_value = "21,66")]
    pub pair: (usize, usize),
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected I,J")?;
    Ok((
        a.trim().parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
        b.trim().parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
    ))
}

/// Shortest round-trip form; negative zero prints as `0.0`.
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0 + 0.0)
    }
}

/// Where output goes, plus an optional allocator to report peak memory from.
pub struct Io<'a> {
    pub out: &'a mut (dyn Write + Send),
    pub err: &'a mut (dyn Write + Send),
    pub alloc: Option<&'a TrackingAllocator>,
}

impl Io<'_> {
    fn data(&mut self, args: std::fmt::Arguments) -> Result<()> {
        self.out.write_fmt(args).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
    }

    /// Diagnostics are best-effort.
    fn diag(&mut self, args: std::fmt::Arguments) {
        let _ = self.err.write_fmt(args);
    }

    fn start(&self) -> Instant {
        if let Some(a) = self.alloc {
            a.reset_peak();
        }
        Instant::now()
    }

    fn report(&mut self, what: &str, t0: Instant) {
        let secs = t0.elapsed().as_secs_f64();
        match self.alloc.map(|a| a.peak_above_baseline()) {
            Some(bytes) => self.diag(format_args!("{what}: time={secs:.6}s peak_aux_bytes={bytes}\n")),
            None => self.diag(format_args!("{what}: time={secs:.6}s\n")),
        }
    }
}

/// Runs `cli`, honouring `--threads`.
pub fn run(cli: Cli, io: &mut Io) -> Result<()> {
    let exec = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(1) => Exec::Sequential,
        _ => Exec::Parallel,
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads.filter(|&n| n > 1) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
        return pool.install(|| dispatch(cli.command, exec, io));
    }
    dispatch(cli.command, exec, io)
}

fn dispatch(cmd: Command, exec: Exec, io: &mut Io) -> Result<()> {
    match cmd {
        Command::Sketch(a) => cmd_sketch(&a, exec, io),
        Command::Query(a) => cmd_query(&a, io),
        Command::Topk(a) => cmd_topk(&a, exec, io),
        Command::Estimate(a) => cmd_estimate(&a, exec, io),
        Command::Cov(a) => cmd_cov(&a, exec, io),
        Command::Compare(a) => cmd_compare(&a, exec, io),
        Command::Gen(GenCommand::CorrelatedRows(a)) => cmd_gen_correlated_rows(&a, io),
    }
}

/// Loads `A` column-major and `B` row-major, the layouts the sketch walks.
pub fn load_factors(p: &ProductArgs) -> Result<(SparseMatrix, SparseMatrix)> {
    let a = load_matrix_market(&p.a)?;
    let b = load_matrix_market(&p.b)?.to_layout(Layout::RowMajor);
    if a.ncols() != b.nrows() {
        return Err(cmm_core::Error::DimensionMismatch(format!(
            "A is {}x{} but B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        ))
        .into());
    }
    Ok((a, b))
}

fn sketch_params(o: &SketchOptions, n1: usize, n3: usize) -> Result<SketchParams> {
    let reps = o.reps.unwrap_or_else(|| SketchParams::default_reps(n1, n3));
    Ok(SketchParams::new(o.buckets, reps, o.seed)?.with_signs(o.signs.into()))
}

pub fn load_sketch(path: &Path) -> Result<StoredSketch> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    file::from_bytes(&bytes).map_err(|source| CliError::Format {
        path: path.into(),
        source,
    })
}

pub fn save_sketch(path: &Path, s: &StoredSketch) -> Result<()> {
    let bytes = file::to_bytes(s).map_err(|source| CliError::Format {
        path: path.into(),
        source,
    })?;
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn describe(s: &StoredSketch, io: &mut Io) -> Result<()> {
    let (n1, n2, n3) = s.dims();
    let p = s.params();
    io.data(format_args!(
        "mode={} buckets={} reps={} dims={n1}x{n2}x{n3} seed={}",
        s.mode_name(),
        p.buckets(),
        p.reps(),
        p.seed()
    ))?;
    if let StoredSketch::Recoverable(r) = s {
        let (num, den) = r.row_code().delta();
        io.data(format_args!(
            " row_code_len={} col_code_len={} code_delta={num}/{den}",
            r.row_code().len(),
            r.col_code().len()
        ))?;
    }
    io.data(format_args!("\n"))
}

pub fn cmd_sketch(args: &SketchArgs, exec: Exec, io: &mut Io) -> Result<()> {
    let (a, b) = load_factors(&args.inputs)?;
    let params = sketch_params(&args.sketch, a.nrows(), b.ncols())?;
    let t0 = io.start();
    let stored = if args.code.recoverable {
        let (rc, cc) = default_codes(a.nrows(), b.ncols(), &args.code.params(), params.seed())?;
        StoredSketch::Recoverable(compressed_product_recoverable_with(&a, &b, &params, &rc, &cc, exec)?)
    } else {
        StoredSketch::Plain(compressed_product_with(&a, &b, &params, exec)?)
    };
    io.report("sketch", t0);
    save_sketch(&args.out, &stored)?;
    describe(&stored, io)
}

fn check_index(i: usize, j: usize, rows: usize, cols: usize) -> Result<(usize, usize)> {
    if i == 0 || j == 0 || i > rows || j > cols {
        return Err(CliError::IndexOutOfRange(format!(
            "entry ({i}, {j}) is outside the {rows}x{cols} product (indices are 1-based)"
        )));
    }
    Ok((i - 1, j - 1))
}

pub fn cmd_query(args: &QueryArgs, io: &mut Io) -> Result<()> {
    let s = load_sketch(&args.sketch)?;
    let (n1, _, n3) = s.dims();
    let (i, j) = check_index(args.row, args.col, n1, n3)?;
    let est = match &s {
        StoredSketch::Plain(s) => s.decompress(i, j)?,
        StoredSketch::Recoverable(s) => s.decompress(i, j)?,
    };
    io.data(format_args!("{}\n", Num(est.value)))?;
    let reps: Vec<String> = est.per_rep.iter().map(|&v| Num(v).to_string()).collect();
    io.data(format_args!("{}\n", reps.join(" ")))
}

pub fn cmd_topk(args: &TopkArgs, exec: Exec, io: &mut Io) -> Result<()> {
    let s = load_sketch(&args.sketch)?;
    let StoredSketch::Recoverable(r) = s else {
        return Err(CliError::NotRecoverable(format!(
            "{} holds a plain sketch; rebuild it with `cmm sketch --recoverable`",
            args.sketch.display()
        )));
    };
    let delta = match args.threshold {
        Some(d) => d,
        None => {
            let inputs = ProductArgs {
                a: args.a.clone().expect("enforced by clap"),
                b: args.b.clone().expect("enforced by clap"),
            };
            let (a, b) = load_factors(&inputs)?;
            if (a.nrows(), a.ncols(), b.ncols()) != r.dims() {
                return Err(cmm_core::Error::DimensionMismatch("--a/--b do not match the sketch".into()).into());
            }
            let p = r.params();
            let f = estimate_frobenius_ub_with(&a, &b, p.reps(), p.seed(), exec)?;
            // A zero bound means the product is (almost surely) zero; any
            // positive threshold then gives the same, empty, answer.
            let d = default_threshold(f.upper_bound, p.buckets(), args.kappa).max(f64::MIN_POSITIVE);
            io.diag(format_args!("threshold={d:?} frobenius_sq_ub={:?}\n", f.upper_bound));
            d
        }
    };
    if !(delta.is_finite() && delta > 0.0) {
        return Err(CliError::Usage(format!("threshold must be finite and positive, got {delta}")));
    }
    let t0 = io.start();
    let mut rows = r.extract_sparse_approx(delta)?;
    io.report("topk", t0);
    if let Some(k) = args.k {
        rows.truncate(k);
    }
    for (i, j, v) in rows {
        io.data(format_args!("{},{},{}\n", i + 1, j + 1, Num(v)))?;
    }
    Ok(())
}

pub fn cmd_estimate(args: &EstimateArgs, exec: Exec, io: &mut Io) -> Result<()> {
    let (a, b) = load_factors(&args.inputs)?;
    let t0 = io.start();
    match args.kind {
        EstimateKind::Nnz => {
            let e = estimate_nnz_with(&a, &b, args.reps.unwrap_or(DEFAULT_NNZ_REPS), args.seed, exec)?;
            io.report("estimate", t0);
            io.data(format_args!("nnz upper bound: {}\n", e.upper_bound))?;
            io.data(format_args!("repetitions: {}\n", e.reps))?;
            io.data(format_args!("capped at trivial bound: {}\n", e.capped))?;
            io.data(format_args!("per-level failure probability: {:?}\n", e.failure_probability))?;
            io.data(format_args!(
                "kind=nnz upper_bound={} reps={} capped={} failure_probability={:?} tolerance={:?}\n",
                e.upper_bound, e.reps, e.capped, e.failure_probability, e.tolerance
            ))
        }
        EstimateKind::Frobenius => {
            let reps = args.reps.unwrap_or_else(|| SketchParams::default_reps(a.nrows(), b.ncols()));
            let e = estimate_frobenius_ub_with(&a, &b, reps, args.seed, exec)?;
            io.report("estimate", t0);
            io.data(format_args!("squared Frobenius norm upper bound: {:?}\n", e.upper_bound))?;
            io.data(format_args!("median estimate: {:?}\n", e.median_sq))?;
            io.data(format_args!("repetitions: {}\n", e.reps))?;
            io.data(format_args!(
                "kind=frobenius upper_bound={:?} median_sq={:?} reps={}\n",
                e.upper_bound, e.median_sq, e.reps
            ))
        }
    }
}

pub fn cmd_cov(args: &CovArgs, exec: Exec, io: &mut Io) -> Result<()> {
    let orientation = if args.observations_as_rows {
        Orientation::ObservationsAsRows
    } else {
        Orientation::VariablesAsRows
    };
    let samples = SampleSet::from_csv_path(&args.samples, orientation)?;
    let n = samples.variables();
    let params = sketch_params(&args.sketch, n, n)?;
    let mode = if args.code.recoverable {
        SketchMode::Recoverable(args.code.params())
    } else {
        SketchMode::Plain
    };
    let t0 = io.start();
    let cs = sketch_covariance_with(&samples, &params, mode, exec)?;
    io.report("cov sketch", t0);
    if let Some(out) = &args.out {
        let stored = match &cs.sketch {
            GramSketch::Plain(s) => StoredSketch::Plain(s.clone()),
            GramSketch::Recoverable(s) => StoredSketch::Recoverable(s.clone()),
        };
        save_sketch(out, &stored)?;
        if !args.scan {
            describe(&stored, io)?;
        }
    }
    if args.scan {
        let delta = match args.threshold {
            Some(d) => d,
            None => {
                let m = cmm_core::covariance::center_and_scale_with(&samples, exec);
                let f = estimate_frobenius_ub_with(&m, &Transposed(&m), params.reps(), params.seed(), exec)?;
                let d = default_threshold(f.upper_bound, params.buckets(), DEFAULT_KAPPA).max(f64::MIN_POSITIVE);
                io.diag(format_args!("threshold={d:?}\n"));
                d
            }
        };
        let t0 = io.start();
        let pairs = scan_correlations_with(&cs, delta, exec)?;
        io.report("cov scan", t0);
        for (i, j, v) in pairs {
            io.data(format_args!("{},{},{}\n", i + 1, j + 1, Num(v)))?;
        }
    }
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs, exec: Exec, io: &mut Io) -> Result<()> {
    let (a, b) = load_factors(&args.inputs)?;
    let params = sketch_params(&args.sketch, a.nrows(), b.ncols())?;
    let t0 = io.start();
    let exact = exact_product_capped(&a, &b, args.max_entries)?;
    let approx = compressed_product_with(&a, &b, &params, exec)?.decompress_all_with(args.max_entries, exec)?;
    io.report("compare", t0);
    let k = params.buckets() / 20;
    let err = err_f_k(&exact, k);
    let bound = 12.0 * (err / params.buckets() as f64).sqrt();
    // Floating-point slack, so that exactly recovered entries count as held
    // when the bound is zero.
    let slack = 1e-9 * (a.frobenius_norm() * b.frobenius_norm()).max(1.0);
    let total = exact.as_slice().len();
    let held = exact
        .as_slice()
        .iter()
        .zip(approx.as_slice())
        .filter(|(x, y)| (*x - *y).abs() <= bound + slack)
        .count();
    let frac = if total == 0 { 1.0 } else { held as f64 / total as f64 };
    io.data(format_args!("max_error={}\n", Num(exact.max_abs_diff(&approx))))?;
    io.data(format_args!("product_frobenius={}\n", Num(exact.frobenius_norm())))?;
    io.data(format_args!("k={k}\n"))?;
    io.data(format_args!("err_f_k={}\n", Num(err)))?;
    io.data(format_args!("bound={}\n", Num(bound)))?;
    io.data(format_args!("slack={}\n", Num(slack)))?;
    io.data(format_args!("bound_held={held}/{total}\n"))?;
    io.data(format_args!("bound_held_fraction={}\n", Num(frac)))
}

pub fn cmd_gen_correlated_rows(args: &CorrelatedRowsArgs, io: &mut Io) -> Result<()> {
    let (n, m) = (args.variables, args.observations);
    let (src, dst) = args.pair;
    if src == 0 || dst == 0 || src > n || dst > n || src == dst {
        return Err(CliError::IndexOutOfRange(format!(
            "--pair {src},{dst} must name two distinct variables in 1..={n}"
        )));
    }
    if !(0.0..=1.0).contains(&args.rho) {
        return Err(CliError::Usage(format!("--rho must lie in [0, 1], got {}", args.rho)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    for c in 0..m {
        if rng.random_bool(args.rho) {
            rows[dst - 1][c] = rows[src - 1][c];
        }
    }
    let mut text = String::new();
    for row in &rows {
        let fields: Vec<String> = row.iter().map(|&v| Num(v).to_string()).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => io.data(format_args!("{text}")),
    }
}
