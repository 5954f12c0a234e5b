use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use lattice_density::arith::DensityValue;
use lattice_density::density::{self, DensityResult, HyperplaneSystem, SystemFile};
use lattice_density::densityset::{self, ExactEndpoint, GreedyApproximation, IntervalUnion};
use lattice_density::enumerate::{self, ConvergenceTrace};
use lattice_density::fmt::sig12;
use lattice_density::intlinalg::{self, SnfDecomposition};
use lattice_density::{input, Error};

const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;
const EXIT_GUARD: u8 = 5;

#[derive(Parser)]
#[command(
    name = "lattice-density",
    version,
    about = "Densities of visible and k-free lattice points on hyperplane intersections",
    after_help = "Exit codes: 0 success, 2 parse error, 3 precondition violated \
                  (e.g. no integral points), 4 tolerance failure in `estimate`, \
                  5 overflow or size guard.\n\
                  Set LATTICE_DENSITY_THREADS to override the enumeration thread count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Write output to this file instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Exact density of k-free points on a hyperplane system
    #[command(after_help = "CSV columns: density,value,codim,ambient,k,anchor_gcd,invariant_factors,path,extrapolated")]
    Density {
        #[command(flatten)]
        system: SystemInput,
        /// Points spanning the hyperplane, e.g. "2,0;0,3" (visible points only)
        #[arg(long, conflicts_with_all = ["plane", "system"])]
        points: Option<String>,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Brute-force box counts compared with the exact density
    #[command(after_help = "CSV columns: r,total,hits,ratio,predicted,deviation\n\
                            r is the box half-width, total the integral points in the box, \
                            hits the k-free ones, ratio = hits/total, predicted the exact density, \
                            deviation = |ratio - predicted|.")]
    Estimate {
        #[command(flatten)]
        system: SystemInput,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Sieve gcd(x, b) instead of gcd(x)
        #[arg(long)]
        b: Option<i64>,
        /// Box half-widths: "100,1000" or "100..100000x10"
        #[arg(long, default_value = "100..10000x10")]
        schedule: String,
        /// Fail with exit code 4 unless the final deviation is below this
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Smith normal form U·A·V = D of an integer matrix
    Snf {
        /// Rows separated by ';', entries by ','
        #[arg(long)]
        matrix: String,
    },
    /// Structure of the set of achievable densities
    Dset {
        #[command(subcommand)]
        command: DsetCommand,
    },
}

#[derive(Args)]
struct SystemInput {
    /// A single hyperplane "c1,...,cn=b"
    #[arg(long, allow_hyphen_values = true)]
    plane: Option<String>,
    /// JSON file {"A": [[...]], "b": [...]} or {"A": [[...]], "p": [...]}
    #[arg(long, conflicts_with = "plane")]
    system: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DsetCommand {
    /// Interval decomposition of the closure of D_n
    #[command(after_help = "CSV columns: lo,hi,lo_exact,hi_exact,certified")]
    Intervals {
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Primes checked by the subsum criterion when n > 2
        #[arg(long, default_value_t = 100_000)]
        prime_bound: u64,
    },
    /// Greedy Euler-product approximation of a target density
    #[command(after_help = "CSV columns: step,prime,numerator,denominator,value,residual,line")]
    Greedy {
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long, default_value_t = densityset::DEFAULT_PRIME_BOUND)]
        prime_bound: u64,
    },
    /// Certificates for the gap just below 1 - 2^-n
    #[command(after_help = "CSV columns: n,left,right,right_lower,margin,valid")]
    Gaps {
        #[arg(long, default_value_t = 2)]
        n_min: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Primes failing the finite-union criterion
    #[command(after_help = "CSV columns: p,lhs,tail_lower,pass")]
    Threshold {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        prime_bound: u64,
    },
    /// Every density of a square-free product of small primes
    #[command(after_help = "CSV columns: primes,b,numerator,denominator,value\n\
                            primes is the space-separated prime set (empty for b = 1); \
                            rows are sorted by value, then b.")]
    Sample {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 61)]
        prime_bound: u64,
        #[arg(long, default_value_t = densityset::DEFAULT_MAX_PRIMES)]
        max_primes: usize,
    },
}

enum Failure {
    Lib(Error),
    Io(String),
    Tolerance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    let (text, code) = match result {
        Ok(text) => (Some(text), 0),
        Err(Failure::Tolerance(text)) => (Some(text), EXIT_TOLERANCE),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            (None, EXIT_PARSE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse(_) => EXIT_PARSE,
                Error::Overflow(_) | Error::TooManyPrimes { .. } => EXIT_GUARD,
                _ => EXIT_PRECONDITION,
            };
            (None, code)
        }
    };
    if let Some(text) = text {
        match &cli.output {
            Some(path) => {
                if let Err(e) = fs::write(path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_PARSE);
                }
            }
            None => print!("{text}"),
        }
    }
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Outcome {
    let fmt = |default| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Density { system, points, k } => match points {
            Some(points) => points_report(points, fmt(Format::Human)),
            None => {
                let sys = system.load()?;
                let result = density::density_of_system(&sys, *k)?;
                density_report(&result, fmt(Format::Human))
            }
        },
        Command::Estimate {
            system,
            k,
            b,
            schedule,
            tol,
        } => {
            let sys = system.load()?;
            let schedule = input::parse_schedule(schedule)?;
            let trace = enumerate::convergence_trace(&sys, *k, *b, &schedule)?;
            let text = estimate_report(&trace, *tol, fmt(Format::Csv))?;
            match tol {
                Some(t) if trace.final_deviation.is_nan() || trace.final_deviation >= *t => Err(Failure::Tolerance(text)),
                _ => Ok(text),
            }
        }
        Command::Snf { matrix } => {
            let a = input::parse_matrix(matrix)?;
            snf_report(&intlinalg::smith_normal_form(&a), fmt(Format::Json))
        }
        Command::Dset { command } => match command {
            DsetCommand::Intervals { n, prime_bound } => {
                let union = densityset::dn_intervals(*n, *prime_bound)?;
                intervals_report(&union, fmt(Format::Human))
            }
            DsetCommand::Greedy {
                target,
                n,
                steps,
                prime_bound,
            } => {
                let g = densityset::greedy_approximate_bounded(*target, *n, *steps, *prime_bound)?;
                greedy_report(&g, fmt(Format::Human))
            }
            DsetCommand::Gaps { n_min, n_max, tol } => {
                if n_min > n_max {
                    return Err(Error::Parse("--n-min exceeds --n-max".into()).into());
                }
                let certs = (*n_min..=*n_max)
                    .map(|n| densityset::gap_certificate(n, *tol))
                    .collect::<Result<Vec<_>, _>>()?;
                gaps_report(&certs, fmt(Format::Human))
            }
            DsetCommand::Threshold { n, prime_bound } => {
                let report = densityset::finite_union_threshold(*n, *prime_bound)?;
                threshold_report(&report, fmt(Format::Human))
            }
            DsetCommand::Sample {
                n,
                prime_bound,
                max_primes,
            } => {
                let pts = densityset::dn_sample(*n, *prime_bound, *max_primes)?;
                match fmt(Format::Csv) {
                    Format::Json => json(&pts),
                    _ => Ok(densityset::sample_csv(&pts)),
                }
            }
        },
    }
}

impl SystemInput {
    fn load(&self) -> Result<HyperplaneSystem, Failure> {
        match (&self.plane, &self.system) {
            (Some(plane), None) => Ok(input::parse_plane(plane)?),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
                let file: SystemFile = serde_json::from_str(&text)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                Ok(file.into_system()?)
            }
            _ => Err(Error::Parse("give one of --plane, --system or --points".into()).into()),
        }
    }
}

fn json<T: Serialize>(value: &T) -> Outcome {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    Ok(s)
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

fn density_value_text(v: &DensityValue) -> String {
    match v {
        DensityValue::InverseZeta { argument: 1 } => "0".into(),
        other => other.to_string(),
    }
}

fn density_report(r: &DensityResult, format: Format) -> Outcome {
    let value = density_value_text(&r.density);
    let float = sig12(r.density.to_f64());
    let factors = join(r.invariant_factors(), " ");
    Ok(match format {
        Format::Json => return json(r),
        Format::Csv => format!(
            "density,value,codim,ambient,k,anchor_gcd,invariant_factors,path,extrapolated\n\
             {value},{float},{},{},{},{},{factors},{},{}\n",
            r.codim,
            r.ambient,
            r.k,
            r.anchor_gcd,
            r.path.label(),
            r.extrapolated
        ),
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(s, "density            {value}");
            let _ = writeln!(s, "value              {float}");
            let _ = writeln!(s, "codimension        {}", r.codim);
            let _ = writeln!(s, "ambient dimension  {}", r.ambient);
            let _ = writeln!(s, "k                  {}", r.k);
            let _ = writeln!(s, "invariant factors  {factors}");
            let _ = writeln!(s, "anchor gcd b'      {}", r.anchor_gcd);
            let _ = writeln!(s, "path               {}", r.path.label());
            if r.extrapolated {
                let _ = writeln!(s, "note               extrapolated beyond the product formula");
            }
            s
        }
    })
}

fn points_report(points: &str, format: Format) -> Outcome {
    let rows = input::parse_rows(points)?;
    let pd = density::density_from_points(&rows)?;
    match format {
        Format::Json => json(&pd),
        Format::Csv => Ok(format!(
            "density,value,determinant,content,equation\n{},{},{},{},{}\n",
            density_value_text(&pd.result.density),
            sig12(pd.result.density.to_f64()),
            pd.determinant,
            pd.content,
            equation_text(&pd.coefficients, &(-&pd.constant))
        )),
        Format::Human => {
            let mut s = density_report(&pd.result, Format::Human)?;
            let _ = writeln!(s, "equation           {}", equation_text(&pd.coefficients, &(-&pd.constant)));
            let _ = writeln!(s, "|det|              {}", pd.determinant);
            let _ = writeln!(s, "content            {}", pd.content);
            Ok(s)
        }
    }
}

fn variable(i: usize, n: usize) -> String {
    match (n, i) {
        (2, 0) => "x".into(),
        (2, 1) => "y".into(),
        _ => format!("x{}", i + 1),
    }
}

/// `a·x = b` in the usual written form, e.g. `137x + 138y = 138`, with a
/// positive leading coefficient.
fn equation_text(a: &[BigInt], b: &BigInt) -> String {
    let zero = BigInt::from(0);
    if a.iter().find(|c| **c != zero).is_some_and(|c| c < &zero) {
        let a: Vec<BigInt> = a.iter().map(|c| -c).collect();
        return equation_text(&a, &-b);
    }
    let n = a.len();
    let mut s = String::new();
    for (i, c) in a.iter().enumerate() {
        if c == &BigInt::from(0) {
            continue;
        }
        let neg = c < &BigInt::from(0);
        let mag = c.magnitude();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if mag != &1u32.into() {
            s.push_str(&mag.to_string());
        }
        s.push_str(&variable(i, n));
    }
    if s.is_empty() {
        s.push('0');
    }
    format!("{s} = {b}")
}

fn estimate_report(trace: &ConvergenceTrace, tol: Option<f64>, format: Format) -> Outcome {
    match format {
        Format::Json => json(trace),
        Format::Csv => {
            let mut s = String::from("r,total,hits,ratio,predicted,deviation\n");
            for row in &trace.rows {
                let c = &row.count;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    c.r,
                    c.total,
                    c.hits,
                    sig12(c.ratio_f64),
                    sig12(row.predicted),
                    sig12(row.deviation)
                );
            }
            Ok(s)
        }
        Format::Human => {
            let mut s = format!(
                "predicted density {} = {}\n{:>10} {:>14} {:>14} {:>16} {:>16}\n",
                density_value_text(&trace.predicted),
                sig12(trace.predicted.to_f64()),
                "r",
                "total",
                "hits",
                "ratio",
                "deviation"
            );
            for row in &trace.rows {
                let c = &row.count;
                let _ = writeln!(
                    s,
                    "{:>10} {:>14} {:>14} {:>16} {:>16}{}",
                    c.r,
                    c.total,
                    c.hits,
                    sig12(c.ratio_f64),
                    sig12(row.deviation),
                    if row.growth_flag { "  deviation grew" } else { "" }
                );
            }
            let _ = write!(s, "final deviation {}", sig12(trace.final_deviation));
            if let Some(t) = tol {
                let verdict = if trace.final_deviation < t { "within" } else { "EXCEEDS" };
                let _ = write!(s, " ({verdict} tolerance {})", sig12(t));
            }
            s.push('\n');
            Ok(s)
        }
    }
}

fn snf_report(snf: &SnfDecomposition, format: Format) -> Outcome {
    match format {
        Format::Human => Ok(format!(
            "invariant factors: {}\nD =\n{}\nU =\n{}\nV =\n{}\n",
            join(&snf.invariant_factors, " "),
            snf.d,
            snf.u,
            snf.v
        )),
        Format::Csv => Ok(format!(
            "index,invariant_factor\n{}",
            snf.invariant_factors
                .iter()
                .enumerate()
                .map(|(i, d)| format!("{},{d}\n", i + 1))
                .collect::<String>()
        )),
        Format::Json => json(snf),
    }
}

fn endpoint_text(e: &ExactEndpoint) -> String {
    match e {
        ExactEndpoint::Rational { value } => {
            if value.denom() == &BigInt::from(1) {
                value.numer().to_string()
            } else {
                format!("{}/{}", value.numer(), value.denom())
            }
        }
        ExactEndpoint::ZetaMultiple {
            coefficient,
            argument,
        } => {
            if coefficient.denom() == &BigInt::from(1) && coefficient.numer() == &BigInt::from(1) {
                format!("1/zeta({argument})")
            } else {
                format!("({}/{})/zeta({argument})", coefficient.numer(), coefficient.denom())
            }
        }
    }
}

fn intervals_report(u: &IntervalUnion, format: Format) -> Outcome {
    match format {
        Format::Json => json(u),
        Format::Csv => {
            let mut s = String::from("lo,hi,lo_exact,hi_exact,certified\n");
            for i in &u.intervals {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    sig12(i.lo.value),
                    sig12(i.hi.value),
                    endpoint_text(&i.lo.exact),
                    endpoint_text(&i.hi.exact),
                    u.certified
                );
            }
            Ok(s)
        }
        Format::Human => {
            let mut s = format!(
                "closure of D_{} is a union of {} intervals (split primes: {})\n",
                u.n,
                u.intervals.len(),
                join(&u.split_primes, ", ")
            );
            if let Some(note) = &u.note {
                let _ = writeln!(s, "{note}");
            }
            for i in &u.intervals {
                let _ = writeln!(
                    s,
                    "[{}, {}]  = [{}, {}]",
                    sig12(i.lo.value),
                    sig12(i.hi.value),
                    endpoint_text(&i.lo.exact),
                    endpoint_text(&i.hi.exact)
                );
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct GreedyReport<'a> {
    approximation: &'a GreedyApproximation,
    lines: Vec<LineReport>,
}

#[derive(Serialize)]
struct LineReport {
    step: usize,
    #[serde(with = "lattice_density::serde_big::int_vec")]
    a: Vec<BigInt>,
    #[serde(with = "lattice_density::serde_big::int")]
    b: BigInt,
    equation: String,
}

fn greedy_report(g: &GreedyApproximation, format: Format) -> Outcome {
    let lines = (1..=g.primes.len())
        .map(|step| {
            let (a, b) = densityset::hyperplane_for_approximation(g, step)?;
            let equation = equation_text(&a, &b);
            Ok(LineReport { step, a, b, equation })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    match format {
        Format::Json => json(&GreedyReport {
            approximation: g,
            lines,
        }),
        Format::Csv => {
            let mut s = String::from("step,prime,numerator,denominator,value,residual,line\n");
            for (i, line) in lines.iter().enumerate() {
                let p = &g.partials[i];
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    i + 1,
                    g.primes[i],
                    p.numer(),
                    p.denom(),
                    sig12(g.partial_values[i]),
                    sig12(g.residuals[i]),
                    line.equation
                );
            }
            Ok(s)
        }
        Format::Human => {
            let mut s = format!("target {} with exponent n = {}\n", sig12(g.target), g.n);
            for (i, line) in lines.iter().enumerate() {
                let p = &g.partials[i];
                let _ = writeln!(
                    s,
                    "{:>3}  p = {:<8} partial {}/{} = {}  residual {}  line {}",
                    i + 1,
                    g.primes[i],
                    p.numer(),
                    p.denom(),
                    sig12(g.partial_values[i]),
                    sig12(g.residuals[i]),
                    line.equation
                );
            }
            if g.exhausted {
                let _ = writeln!(s, "stopped: no admissible prime below the bound");
            }
            if !g.tail_can_bridge {
                let _ = writeln!(s, "target unreachable: the remaining product cannot fall to it");
            }
            Ok(s)
        }
    }
}

fn gaps_report(certs: &[densityset::GapCertificate], format: Format) -> Outcome {
    match format {
        Format::Json => json(&certs),
        Format::Csv => {
            let mut s = String::from("n,left,right,right_lower,margin,valid\n");
            for c in certs {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    c.n,
                    arith_ratio(&c.left),
                    sig12(c.right),
                    sig12(c.right_lower),
                    sig12(c.margin),
                    c.is_valid()
                );
            }
            Ok(s)
        }
        Format::Human => {
            let mut s = String::new();
            for c in certs {
                let _ = writeln!(
                    s,
                    "n = {:>2}  gap ({}, {})  margin {}  {}",
                    c.n,
                    sig12(c.left_value),
                    sig12(c.right),
                    sig12(c.margin),
                    if c.is_valid() { "certified" } else { "NOT certified" }
                );
            }
            Ok(s)
        }
    }
}

fn arith_ratio(r: &num_rational::BigRational) -> String {
    lattice_density::serde_big::ratio_to_string(r)
}

fn threshold_report(r: &densityset::ThresholdReport, format: Format) -> Outcome {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let mut s = String::from("p,lhs,tail_lower,pass\n");
            for c in &r.checks {
                let _ = writeln!(s, "{},{},{},{}", c.p, sig12(c.lhs), sig12(c.tail_lower), c.pass);
            }
            Ok(s)
        }
        Format::Human => Ok(format!(
            "n = {}, primes up to {}\nfailing primes: {}\nthreshold: {}\n",
            r.n,
            r.prime_bound,
            if r.failing.is_empty() { "none".into() } else { join(&r.failing, ", ") },
            r.threshold.map_or("none below the bound".into(), |t| t.to_string())
        )),
    }
}
