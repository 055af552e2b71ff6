//! `polynomiogram` command-line entry point.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad config or degenerate input,
//! 3 too many non-converged solves, 4 failed validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polynomiogram::analysis::report::{
    cubic_suite, kac_suite, lucas_suite, lucas_tolerance, KacOptions, Report, LUCAS_DEFAULT_CASES,
};
use polynomiogram::config::{preset_config_text, LoadError, RunConfig};
use polynomiogram::expr::CoefficientExpr;
use polynomiogram::family::FamilySpec;
use polynomiogram::pipeline::{execute, PipelineError};
use polynomiogram::solver::{solve, Engine, PrecisionConfig};
use polynomiogram::{Complex64, Polynomial64};

const EXIT_IO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "polynomiogram", version, about = "Root-density images of parametric polynomial families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config and write its outputs.
    Render {
        config: PathBuf,
        /// Override the sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the worker count (0 = one per core).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a validation suite; exits 4 if any metric fails.
    Validate {
        suite: Suite,
        /// Lucas: a single degree instead of the default cases.
        #[arg(long)]
        n: Option<usize>,
        /// Lucas: working precision for `--n` (53 or 106).
        #[arg(long, default_value_t = 53)]
        bits: u32,
        /// Kac: polynomial degree.
        #[arg(long, default_value_t = 50)]
        degree: usize,
        /// Kac: lower degree for the real-root slope.
        #[arg(long, default_value_t = 10)]
        low_degree: usize,
        /// Kac: ensemble size.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// JSON report path [default: validate-<suite>.json].
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Solve one polynomial given by ascending coefficients `a0 a1 ... an`,
    /// or by `--term k=EXPR` coefficient expressions at fixed `--t1`, `--t2`.
    Roots {
        #[arg(long, default_value = "companion")]
        engine: Engine,
        /// Aberth working precision (53 or 106).
        #[arg(long, default_value_t = 53)]
        bits: u32,
        /// Coefficient of x^k as an expression in t1, t2.
        #[arg(long = "term", value_name = "K=EXPR")]
        terms: Vec<String>,
        /// Parameter value `re,im` (or `re`).
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        t1: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        t2: String,
        /// Coefficients; each may be a constant expression such as `1+2*i`.
        #[arg(last = true, allow_hyphen_values = true)]
        coeffs: Vec<String>,
    },
    /// Render a named preset, or print its equivalent config.
    Preset {
        name: String,
        #[arg(long)]
        print_config: bool,
        /// Image path [default: <name>.png].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Kac,
    Lucas,
    Cubic,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Kac => "kac",
            Suite::Lucas => "lucas",
            Suite::Cubic => "cubic",
        }
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Render { config, seed, workers } => match RunConfig::load(&config) {
            Ok(cfg) => run(cfg, seed, workers),
            Err(LoadError::Io(p, e)) => fail(EXIT_IO, format!("cannot read {}: {e}", p.display())),
            Err(LoadError::Config(e)) => fail(EXIT_INPUT, e),
        },
        Command::Validate {
            suite,
            n,
            bits,
            degree,
            low_degree,
            samples,
            seed,
            workers,
            json,
        } => {
            let report = match suite {
                Suite::Kac => kac_suite(&KacOptions {
                    degree,
                    low_degree,
                    samples,
                    seed,
                    workers,
                }),
                Suite::Lucas => match n {
                    Some(n) => lucas_suite(&[(n, bits)]),
                    None => lucas_suite(&LUCAS_DEFAULT_CASES),
                },
                Suite::Cubic => cubic_suite(),
            };
            if suite.name() == "lucas" {
                if let Some(n) = n {
                    println!("lucas.n={n} lucas.bits={bits} lucas.tolerance={:?}", lucas_tolerance(bits));
                }
            }
            let path = json.unwrap_or_else(|| PathBuf::from(format!("validate-{}.json", suite.name())));
            report_out(&report, &path)
        }
        Command::Roots {
            engine,
            bits,
            terms,
            t1,
            t2,
            coeffs,
        } => roots(engine, bits, &terms, &t1, &t2, &coeffs),
        Command::Preset {
            name,
            print_config,
            out,
            seed,
            workers,
        } => {
            if print_config {
                return match preset_config_text(&name) {
                    Ok(text) => {
                        print!("{text}");
                        ExitCode::SUCCESS
                    }
                    Err(e) => fail(EXIT_INPUT, e),
                };
            }
            match RunConfig::from_preset(&name) {
                Ok(mut cfg) => {
                    cfg.output.image = Some(out.unwrap_or_else(|| PathBuf::from(format!("{name}.png"))));
                    run(cfg, seed, workers)
                }
                Err(e) => fail(EXIT_INPUT, e),
            }
        }
    }
}

fn run(mut cfg: RunConfig, seed: Option<u64>, workers: Option<usize>) -> ExitCode {
    if let Some(s) = seed {
        cfg.plan.seed = s;
        if let FamilySpec::Kac { seed, .. } = &mut cfg.family {
            *seed = s;
        }
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    let out = match execute(&cfg) {
        Ok(o) => o,
        Err(PipelineError::Io(p, e)) => return fail(EXIT_IO, format!("cannot write {}: {e}", p.display())),
        Err(e) => return fail(EXIT_IO, e),
    };
    for line in out.summary.lines() {
        println!("{line}");
    }
    let show = |key: &str, p: &Option<PathBuf>| {
        if let Some(p) = p {
            println!("{key}={}", p.display());
        }
    };
    show("image", &cfg.output.image);
    show("grid_dump", &cfg.output.grid_dump);
    show("roots_csv", &cfg.output.roots_csv);
    if let Some(rows) = out.csv_rows {
        println!("csv_rows={rows}");
    }
    println!("pixel_hash={}", out.image.pixel_hash());
    if out.summary.excessive_no_convergence() {
        return fail(
            EXIT_NO_CONVERGENCE,
            format!(
                "{} of {} samples did not converge",
                out.summary.tally.no_convergence, out.summary.tally.samples
            ),
        );
    }
    ExitCode::SUCCESS
}

fn report_out(report: &Report, path: &Path) -> ExitCode {
    print!("{}", report.to_text());
    if let Err(e) = std::fs::write(path, report.to_json()) {
        return fail(EXIT_IO, format!("cannot write {}: {e}", path.display()));
    }
    println!("report={}", path.display());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VALIDATION)
    }
}

/// `re`, `re,im`, or a constant expression.
fn parse_param(s: &str) -> Result<Complex64, String> {
    if let Some((re, im)) = s.split_once(',') {
        let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
        return Ok(Complex64::new(p(re)?, p(im)?));
    }
    constant(s)
}

fn constant(s: &str) -> Result<Complex64, String> {
    let e = CoefficientExpr::parse(s).map_err(|e| format!("`{s}`: {e}"))?;
    let zero = Complex64::new(0.0, 0.0);
    e.evaluate(zero, zero).map_err(|e| format!("`{s}`: {e}"))
}

fn build_coeffs(terms: &[String], t1: &str, t2: &str, coeffs: &[String]) -> Result<Vec<Complex64>, String> {
    if terms.is_empty() {
        return coeffs.iter().map(|c| constant(c)).collect();
    }
    if !coeffs.is_empty() {
        return Err("give either --term expressions or a coefficient list, not both".into());
    }
    let (t1, t2) = (parse_param(t1)?, parse_param(t2)?);
    let mut map = BTreeMap::new();
    for t in terms {
        let (k, src) = t.split_once('=').ok_or_else(|| format!("--term `{t}`: expected K=EXPR"))?;
        let k: usize = k.trim().parse().map_err(|_| format!("--term `{t}`: bad exponent"))?;
        let e = CoefficientExpr::parse(src).map_err(|e| format!("--term `{t}`: {e}"))?;
        let v = e.evaluate(t1, t2).map_err(|e| format!("--term `{t}`: {e}"))?;
        map.insert(k, v);
    }
    let n = *map.keys().next_back().expect("terms nonempty");
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, v) in map {
        c[k] = v;
    }
    Ok(c)
}

fn roots(engine: Engine, bits: u32, terms: &[String], t1: &str, t2: &str, coeffs: &[String]) -> ExitCode {
    let c = match build_coeffs(terms, t1, t2, coeffs) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let p = match Polynomial64::new(c) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    if p.degree() == 0 {
        return fail(EXIT_INPUT, "a constant polynomial has no roots");
    }
    if !matches!(bits, 53 | 106) {
        return fail(EXIT_INPUT, format!("--bits {bits}: supported values are 53 and 106"));
    }
    let rs = match solve(&p, engine, &PrecisionConfig::with_bits(bits)) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_NO_CONVERGENCE, e),
    };
    let mut rows: Vec<(Complex64, f64)> = rs.roots.iter().copied().zip(rs.residuals.iter().copied()).collect();
    rows.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    println!("degree={} engine={engine}", p.degree());
    for (z, r) in rows {
        println!("re={:?} im={:?} residual={:e}", z.re, z.im, r);
    }
    ExitCode::SUCCESS
}
