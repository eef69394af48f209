//! `opuc`: build orthonormal systems and run the verification suites.

mod config;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opuc::disc::{delta, generalized_discriminant, write_disc_csv, DiscOperator, DiscRow};
use opuc::engine::random_reflections;
use opuc::families::{build_system, reference_system};
use opuc::moments::{system_from_moments, trig_moments};
use opuc::report::VerificationReport;
use opuc::suites::{default_config, run_config, run_suite, RunConfig, Suite, SuiteInput, SuiteOptions};
use opuc::zeros::roots;
use opuc::{ErrorKind, Exec, OpucError, OpucSystem, QReal, Route, WeightSpec};
use output::{write_atomic, Aggregate, Summary};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "opuc", version, about = "Orthogonal polynomials on the unit circle: construction and verification")]
struct Cli {
    /// Describe what a suite checks and exit.
    #[arg(long, value_name = "SUITE")]
    explain: Option<String>,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build phi_0..phi_N and write the system as JSON.
    Build {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, value_enum, default_value_t = RouteArg::Closed)]
        route: RouteArg,
        #[arg(long, default_value = "opuc-system.json")]
        out: PathBuf,
    },
    /// Run one suite and write its report.
    Verify {
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value = "opuc-report.json")]
        out: PathBuf,
        /// Also write the checks as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Multiply every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_factor: f64,
        #[arg(long)]
        sequential: bool,
    },
    /// Run every suite listed in a config file (the built-in grid when omitted).
    ReportAll {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "opuc-reports")]
        out_dir: PathBuf,
        /// Write gnuplot data files of residual against n.
        #[arg(long)]
        gnuplot: bool,
        #[arg(long)]
        sequential: bool,
        /// Print the effective config as TOML and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Zeros of phi_N as CSV.
    Zeros {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discriminants of phi_1..phi_N by both routes, as CSV.
    Disc {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Seed for random reflection coefficients (family 'unspecified') and random test data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FamilyArg {
    Lebesgue,
    Cj,
    Sz,
    Mb,
    Rs,
    Unspecified,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RouteArg {
    Closed,
    Recurrence,
    Moments,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Route {
        match r {
            RouteArg::Closed => Route::ClosedForm,
            RouteArg::Recurrence => Route::SzegoRecurrence,
            RouteArg::Moments => Route::Moments,
        }
    }
}

/// Failure of a command, carrying its exit code.
enum Fail {
    Opuc(OpucError),
    Usage(String),
    Io(String),
    ChecksFailed,
    /// Some suites of a batch stopped with an error.
    Incomplete { runs: usize, code: u8 },
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Opuc(e) => kind_code(e.kind()),
            Fail::Usage(_) => 1,
            Fail::ChecksFailed => 2,
            Fail::Incomplete { code, .. } => *code,
            Fail::Io(_) => 3,
        }
    }
}

impl From<OpucError> for Fail {
    fn from(e: OpucError) -> Self {
        Fail::Opuc(e)
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Io(e.to_string())
    }
}

fn kind_code(k: ErrorKind) -> u8 {
    match k {
        ErrorKind::Domain => 1,
        ErrorKind::Numerical => 2,
    }
}

fn hint(e: &OpucError) -> Option<&'static str> {
    match e {
        OpucError::DegenerateReflection { .. } => Some(
            "the identity divides by phi_n(0); it is undefined for weights whose reflection coefficients vanish \
             (Lebesgue measure, or the symmetric Szegő weight at odd n)",
        ),
        OpucError::NoLadderForOperator(_) => Some("run 'opuc --explain <suite>' to see which weights a suite accepts"),
        OpucError::GridTooCoarse { .. } => Some("raise OPUC_GRID_M or unset it"),
        _ => None,
    }
}

impl FamilyArgs {
    fn weight(&self) -> Result<WeightSpec, Fail> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Fail::Usage(format!("family {:?} needs --{name}", self.family).to_lowercase()))
        };
        let w = match self.family {
            FamilyArg::Lebesgue => WeightSpec::Lebesgue,
            FamilyArg::Cj => WeightSpec::CircularJacobi { a: need(self.a, "a")? },
            FamilyArg::Sz => WeightSpec::Szego { a: need(self.a, "a")?, b: need(self.b, "b")? },
            FamilyArg::Mb => WeightSpec::ModifiedBessel { t: need(self.t, "t")? },
            FamilyArg::Rs => WeightSpec::RogersSzego { q: need(self.q, "q")? },
            FamilyArg::Unspecified => WeightSpec::Unspecified,
        };
        w.validate()?;
        Ok(w)
    }

    fn system(&self, n: usize) -> Result<OpucSystem, Fail> {
        match self.weight()? {
            WeightSpec::Unspecified => Ok(OpucSystem::build_from_reflections(&random_reflections(n, 0.9, self.seed))?),
            w => Ok(reference_system(&w, n)?),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match (cli.explain, cli.cmd) {
        (Some(s), _) => explain(&s),
        (None, Some(cmd)) => run(cmd),
        (None, None) => Err(Fail::Usage("no command given; see 'opuc --help'".into())),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Fail::Opuc(e) => {
                    eprintln!("error: {e}");
                    if let Some(h) = hint(e) {
                        eprintln!("  {h}");
                    }
                }
                Fail::Usage(s) | Fail::Io(s) => eprintln!("error: {s}"),
                Fail::ChecksFailed => {}
                Fail::Incomplete { runs, .. } => {
                    eprintln!("error: {runs} suite run(s) did not complete; see the notes in the report")
                }
            }
            ExitCode::from(f.code())
        }
    }
}

fn explain(name: &str) -> Result<(), Fail> {
    let suites: Vec<Suite> = if name == "all" { Suite::ALL.to_vec() } else { vec![parse_suite(name)?] };
    for s in suites {
        println!("{}  [{}]\n  {}\n", s.name(), s.anchor(), s.explain());
    }
    Ok(())
}

fn parse_suite(name: &str) -> Result<Suite, Fail> {
    name.parse().map_err(|_| {
        let all: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        Fail::Usage(format!("unknown suite '{name}'; available: {}", all.join(", ")))
    })
}

fn options(sequential: bool) -> Result<SuiteOptions, Fail> {
    Ok(SuiteOptions {
        grid_m: config::grid_from_env().map_err(Fail::Usage)?,
        exec: if sequential { Exec::Sequential } else { Exec::default() },
    })
}

fn hash_of<T: Serialize>(v: &T) -> Result<String, Fail> {
    Ok(output::sha256_hex(&serde_json::to_vec(v).map_err(|e| Fail::Io(e.to_string()))?))
}

fn run(cmd: Cmd) -> Result<(), Fail> {
    match cmd {
        Cmd::Build { fam, n, route, out } => build(&fam, n, route.into(), &out),
        Cmd::Verify { suite, fam, n, out, csv, tol_factor, sequential } => {
            verify(&suite, &fam, n, &out, csv.as_deref(), tol_factor, sequential)
        }
        Cmd::ReportAll { config, out_dir, gnuplot, sequential, print_config } => {
            report_all(config.as_deref(), &out_dir, gnuplot, sequential, print_config)
        }
        Cmd::Zeros { fam, n, out } => zeros(&fam, n, out.as_deref()),
        Cmd::Disc { fam, n, out } => disc(&fam, n, out.as_deref()),
    }
}

fn build(fam: &FamilyArgs, n: usize, route: Route, out: &Path) -> Result<(), Fail> {
    let w = fam.weight()?;
    let grid = config::grid_from_env().map_err(Fail::Usage)?;
    let sys = match (&w, route, grid) {
        (WeightSpec::Unspecified, _, _) => fam.system(n)?,
        (_, Route::Moments, Some(m)) => system_from_moments(&trig_moments(&w, n, m)?, n, w.clone())?,
        _ => build_system(&w, n, route)?,
    };
    write_atomic(out, &output::to_json(&sys)?)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{:>3} {:>24} {:>24} {:>24} {:>24} {:>24}", "n", "kappa_n", "Re phi_n(0)", "Im phi_n(0)", "Re l_n", "Im l_n")?;
    for k in 0..=n {
        let (p, l) = (sys.phi0(k), sys.ell(k));
        writeln!(stdout, "{k:>3} {:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e}", sys.kappa(k), p.re, p.im, l.re, l.im)?;
    }
    writeln!(stdout, "wrote {}", out.display())?;
    Ok(())
}

fn verify(
    suite: &str,
    fam: &FamilyArgs,
    n: usize,
    out: &Path,
    csv: Option<&Path>,
    tol_factor: f64,
    sequential: bool,
) -> Result<(), Fail> {
    let suite = parse_suite(suite)?;
    if !(tol_factor > 0.0 && tol_factor.is_finite()) {
        return Err(Fail::Usage("--tol-factor must be positive".into()));
    }
    let opts = options(sequential)?;
    let input = SuiteInput { weight: fam.weight()?, n, seed: fam.seed };
    let mut rep = run_suite(suite, &input, &opts)?;
    if tol_factor != 1.0 {
        for c in &mut rep.checks {
            c.tolerance *= tol_factor;
            c.pass = c.residual <= c.tolerance;
        }
        rep.params.insert("tol_factor".into(), tol_factor);
    }
    rep.config_hash = hash_of(&(suite, &input, opts.grid_m, tol_factor))?;
    write_atomic(out, &output::to_json(&rep)?)?;
    if let Some(p) = csv {
        write_atomic(p, &output::checks_csv(std::slice::from_ref(&rep))?)?;
    }
    print_report(&rep);
    if rep.passed() {
        Ok(())
    } else {
        Err(Fail::ChecksFailed)
    }
}

fn print_report(rep: &VerificationReport) {
    println!("{} [{}] {} {}", rep.suite, rep.anchor, rep.family, output::format_params(&rep.params));
    for c in &rep.checks {
        println!(
            "  {} {:<60} {:>10.2e} <= {:<8.0e}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        );
    }
    for s in &rep.notes {
        println!("  note: {s}");
    }
}

fn report_all(
    cfg_path: Option<&Path>,
    out_dir: &Path,
    gnuplot: bool,
    sequential: bool,
    print_config: bool,
) -> Result<(), Fail> {
    let cfg: RunConfig = match cfg_path {
        Some(p) => config::load(p).map_err(|e| Fail::Io(e.to_string()))?,
        None => default_config(),
    };
    if print_config {
        print!("{}", toml::to_string(&cfg).map_err(|e| Fail::Io(e.to_string()))?);
        return Ok(());
    }
    let opts = options(sequential)?;
    let runs = run_config(&cfg, &opts);
    let mut reports = Vec::with_capacity(runs.len());
    let mut worst_error: Option<u8> = None;
    for (run, (suite, input)) in runs.into_iter().zip(cfg.inputs()) {
        let mut rep = run.report;
        rep.config_hash = hash_of(&(suite, &input, opts.grid_m))?;
        if let Some(e) = run.error {
            let code = kind_code(e.kind());
            worst_error = Some(worst_error.map_or(code, |c| c.min(code)));
        }
        reports.push(rep);
    }
    let agg = Aggregate {
        schema: opuc::report::SCHEMA_VERSION,
        config_hash: hash_of(&(&cfg, opts.grid_m))?,
        determinism_hash: output::determinism_hash(&reports)?,
        summary: Summary::of(&reports),
        reports: &reports,
    };
    let table = output::summary_table(&reports);
    write_atomic(&out_dir.join("report.json"), &output::to_json(&agg)?)?;
    write_atomic(&out_dir.join("summary.txt"), table.as_bytes())?;
    write_atomic(&out_dir.join("checks.csv"), &output::checks_csv(&reports)?)?;
    if gnuplot {
        for (name, body) in output::gnuplot_files(&reports) {
            write_atomic(&out_dir.join("gnuplot").join(name), body.as_bytes())?;
        }
    }
    print!("{table}");
    println!("determinism hash {}", agg.determinism_hash);
    println!("wrote {}", out_dir.join("report.json").display());
    match worst_error {
        Some(code) => Err(Fail::Incomplete { runs: count_incomplete(&reports), code }),
        None if reports.iter().all(|r| r.passed()) => Ok(()),
        None => Err(Fail::ChecksFailed),
    }
}

fn count_incomplete(reports: &[VerificationReport]) -> usize {
    reports.iter().filter(|r| r.checks.iter().any(|c| c.name == "suite completed")).count()
}

fn open_out(out: Option<&Path>) -> Box<dyn FnOnce(Vec<u8>) -> std::io::Result<()>> {
    match out {
        Some(p) => {
            let p = p.to_path_buf();
            Box::new(move |b| write_atomic(&p, &b))
        }
        None => Box::new(|b| std::io::stdout().lock().write_all(&b)),
    }
}

fn zeros(fam: &FamilyArgs, n: usize, out: Option<&Path>) -> Result<(), Fail> {
    if n == 0 {
        return Err(Fail::Usage("phi_0 is constant and has no zeros".into()));
    }
    let sys = fam.system(n)?;
    let rs = roots(sys.phi(n))?;
    let mut buf = Vec::new();
    rs.write_csv(&mut buf)?;
    open_out(out)(buf)?;
    Ok(())
}

fn disc(fam: &FamilyArgs, n: usize, out: Option<&Path>) -> Result<(), Fail> {
    let w = fam.weight()?;
    let sys = fam.system(n + 1)?;
    let op = match w {
        WeightSpec::RogersSzego { q } => DiscOperator::QDifference(QReal::new(q)?),
        _ => DiscOperator::Derivative,
    };
    let mut rows: Vec<DiscRow> = Vec::new();
    for k in 1..=n {
        rows.extend(DiscRow::from_pair(w.name(), &delta(&sys, k)?));
        match generalized_discriminant(&sys, k, op) {
            Ok(p) => rows.extend(DiscRow::from_pair(w.name(), &p)),
            Err(OpucError::NoLadderForOperator(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let mut buf = Vec::new();
    write_disc_csv(&rows, &mut buf)?;
    open_out(out)(buf)?;
    Ok(())
}
