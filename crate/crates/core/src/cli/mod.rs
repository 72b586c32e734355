//! `copol` command-line front end.
//!
//! ```text
//! copol matrix <MAP> [SPACE]
//! copol check <CHECK> <ARGS>...
//! copol verify-paper
//! ```
//!
//! Global flags: `--config --out --format json|csv --trunc --seed`.
//! Precedence for the seed is flag, then `COPOL_SEED`, then config.
//! Exit codes: 0 pass, 1 fail, 2 usage error.

pub mod config;
pub mod parse;
pub mod suite;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::maps::SelfMap;
use crate::operators::{
    almost_mult_defect, build_matrix, check_product_isometry, isometry_defect, kernel_adjoint_check, monomial_pairs,
    norm_bounds, op_norm_est, unitary_defect, verify_composition_structure, Bound, NormOptions, OpMatrix,
    OperatorError, ProductOptions, ProductVariant, Report,
};
use crate::series::TruncSeries;
use crate::spaces::SpaceSpec;
use config::{ExperimentConfig, Format, SEED_ENV};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CHECKS: [&str; 8] = ["isometry", "unitary", "norm", "bounds", "kernel", "almost-mult", "recover", "product-isometry"];

#[derive(Debug, Parser)]
#[command(name = "copol", version, about = "Composition operators on Hardy, Bergman and S2 spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Truncation order N.
    #[arg(long, global = true)]
    pub trunc: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the truncated matrix of C_MAP with exactness metadata.
    Matrix {
        /// Map name from the config, or inline (`z2`, `rotation(i)`, `moebius(1,0.5)`, `poly(0,0.45,0.45)`).
        map: Option<String>,
        /// `hardy`, `s2`, `bergman`, `bergman:<alpha>`; defaults to the config space.
        space: Option<String>,
    },
    /// Run one check: isometry, unitary, norm, bounds, kernel, almost-mult, recover, product-isometry.
    Check {
        check: String,
        /// Maps, then an optional space, then check-specific values. Write
        /// negative points as `(-0.4+0.2i)`.
        args: Vec<String>,
    },
    /// Run the full reproduction suite.
    VerifyPaper {
        /// Run criteria one after another instead of concurrently.
        #[arg(long)]
        serial: bool,
    },
}

/// A failure that is the caller's fault.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, T>(argv: I, env_seed: Option<String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli, env_seed.as_deref()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() || e.downcast_ref::<config::ConfigError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_FAIL
            }
        }
    }
}

/// Resolves config file, environment and flags into one config.
pub fn resolve_config(cli: &Cli, env_seed: Option<&str>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_seed_env(env_seed)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.trunc {
        cfg.truncation = n;
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(p) = &cli.out {
        cfg.output.path = Some(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, env_seed: Option<&str>) -> anyhow::Result<i32> {
    let cfg = resolve_config(cli, env_seed)?;
    match &cli.command {
        Command::Matrix { map, space } => {
            let m = resolve_map(&cfg, map.as_deref())?;
            let space = resolve_space(&cfg, space.as_deref())?;
            let mat = build_matrix(&m, space, cfg.truncation).map_err(|e| usage(e.to_string()))?;
            let text = match cfg.output.format {
                Format::Json => serde_json::to_string_pretty(&mat.to_serializable())? + "\n",
                Format::Csv => matrix_csv(&mat),
            };
            emit(&cfg, &text)?;
            Ok(EXIT_PASS)
        }
        Command::Check { check, args } => {
            let report = cmd_check(&cfg, check, args)?;
            emit(&cfg, &render(&cfg, &report))?;
            Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::VerifyPaper { serial } => {
            let report = suite::run_suite(&cfg, !serial);
            emit(&cfg, &render(&cfg, &report))?;
            eprint!("{}", report.summary_table());
            Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

fn render(cfg: &ExperimentConfig, report: &Report) -> String {
    match cfg.output.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    }
}

fn emit(cfg: &ExperimentConfig, text: &str) -> anyhow::Result<()> {
    match &cfg.output.path {
        Some(p) => std::fs::write(p, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn matrix_csv(m: &OpMatrix) -> String {
    let mut out = String::from("row,col,re,im,column_exact\n");
    for j in 0..m.dim() {
        for i in 0..m.dim() {
            let v = m.entry(i, j);
            let _ = writeln!(out, "{i},{j},{:e},{:e},{}", v.re, v.im, m.column_is_exact(j));
        }
    }
    out
}

/// Config map name first, then inline syntax. With no argument the config
/// must define exactly one map.
pub fn resolve_map(cfg: &ExperimentConfig, arg: Option<&str>) -> anyhow::Result<SelfMap> {
    match arg {
        Some(a) if cfg.maps.contains_key(a) => Ok(cfg.map(a)?),
        Some(a) => parse::parse_map(a).map_err(usage),
        None if cfg.maps.len() == 1 => Ok(cfg.map(cfg.maps.keys().next().expect("one map"))?),
        None => Err(usage("a map is required (name from the config or inline syntax)")),
    }
}

pub fn resolve_space(cfg: &ExperimentConfig, arg: Option<&str>) -> anyhow::Result<SpaceSpec> {
    match arg {
        Some(a) => SpaceSpec::from_str(a).map_err(|e| usage(e.to_string())),
        None => Ok(cfg.space),
    }
}

/// Splits check arguments into maps, an optional space and the rest.
struct CheckArgs<'a> {
    maps: Vec<&'a str>,
    space: Option<&'a str>,
    extra: Vec<&'a str>,
}

fn split_args<'a>(args: &'a [String], n_maps: usize) -> CheckArgs<'a> {
    let maps: Vec<&str> = args.iter().take(n_maps).map(String::as_str).collect();
    let rest = &args[maps.len()..];
    let (space, extra) = match rest.first() {
        Some(s) if SpaceSpec::from_str(s).is_ok() => (Some(s.as_str()), &rest[1..]),
        _ => (None, rest),
    };
    CheckArgs { maps, space, extra: extra.iter().map(String::as_str).collect() }
}

fn refused(mut r: Report, what: &str, e: OperatorError) -> Report {
    r.fail(what, format!("refused: {e}"));
    r
}

/// Runs one named check. Unknown checks and malformed arguments are usage
/// errors; refusals inside a check become failed reports.
pub fn cmd_check(cfg: &ExperimentConfig, check: &str, args: &[String]) -> anyhow::Result<Report> {
    if !CHECKS.contains(&check) {
        return Err(usage(format!("unknown check `{check}`; expected one of {}", CHECKS.join(", "))));
    }
    let n_maps = if check == "product-isometry" { 2 } else { 1 };
    let a = split_args(args, n_maps);
    let maps = if a.maps.is_empty() {
        vec![resolve_map(cfg, None)?]
    } else {
        a.maps.iter().map(|m| resolve_map(cfg, Some(m))).collect::<anyhow::Result<Vec<_>>>()?
    };
    if maps.len() != n_maps {
        return Err(usage(format!("`{check}` takes {n_maps} map arguments")));
    }
    let space = resolve_space(cfg, a.space)?;
    if check != "kernel" && check != "product-isometry" && !a.extra.is_empty() {
        return Err(usage(format!("unexpected arguments: {}", a.extra.join(" "))));
    }
    let n = cfg.truncation;
    let t = cfg.tolerances;
    let opts = NormOptions { seed: cfg.seed, ..NormOptions::default() };
    let phi = &maps[0];
    let base = |tol: f64| {
        let mut r = Report::new(check, tol).input("space", space).input("trunc_order", n);
        for (k, m) in maps.iter().enumerate() {
            let key = if k == 0 { "map" } else { "map2" };
            r.push_input(key, serde_json::to_string(&m.descriptor()).unwrap_or_default());
        }
        r
    };

    let report = match check {
        "isometry" | "unitary" => {
            let mut r = base(t.defect_zero);
            let d = build_matrix(phi, space, n)
                .and_then(|m| if check == "isometry" { isometry_defect(&m) } else { unitary_defect(&m) });
            match d {
                Ok(d) => {
                    r.metric(&format!("{check}_defect"), d.value, Bound::AtMost { limit: t.defect_zero });
                    r.info("block", d.block as f64);
                    r.push_input("worst_entry", format!("{:?}", d.worst));
                    r
                }
                Err(e) => refused(r, &format!("{check}_defect"), e),
            }
        }
        "norm" => {
            let mut r = base(t.norm_agreement);
            match build_matrix(phi, space, n).and_then(|m| op_norm_est(&m, &opts)) {
                Ok(est) => {
                    r.info("norm_estimate", est.value);
                    r.info("iterations", est.iterations as f64);
                    r.flag("converged", est.converged);
                    if let Ok(b) = norm_bounds(phi, space) {
                        let tol = t.norm_agreement;
                        r.metric("within_bounds", est.value, Bound::InRange { lo: b.lower - tol, hi: b.upper + tol });
                    }
                    r
                }
                Err(e) => refused(r, "norm_estimate", e),
            }
        }
        "bounds" => {
            let mut r = base(0.0);
            match norm_bounds(phi, space) {
                Ok(b) => {
                    r.info("lower", b.lower);
                    r.info("upper", b.upper);
                    r
                }
                Err(e) => refused(r, "bounds", e),
            }
        }
        "kernel" => {
            let mut r = base(t.kernel);
            let points: Vec<Complex64> = if a.extra.is_empty() {
                vec![Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.5), Complex64::new(-0.4, 0.2)]
            } else {
                a.extra.iter().map(|s| parse::parse_complex(s)).collect::<Result<_, _>>().map_err(usage)?
            };
            for w in points {
                let name = format!("residual/w={w}");
                match kernel_adjoint_check(phi, space, w, n) {
                    Ok(k) => {
                        r.metric(&name, k.residual, Bound::AtMost { limit: t.kernel });
                        r.info(&format!("tail/w={w}"), k.tail_w);
                    }
                    Err(e) => r = refused(r, &name, e),
                }
            }
            r
        }
        "almost-mult" => {
            let mut r = base(t.almost_mult);
            let res = build_matrix(phi, space, n).and_then(|m| {
                let one = Complex64::new(1.0, 0.0);
                let pairs = monomial_pairs(n, m.symbol_degree());
                let mut worst = 0.0f64;
                for &(p, q) in &pairs {
                    let d = almost_mult_defect(&m, &TruncSeries::monomial(p, one), &TruncSeries::monomial(q, one))?;
                    worst = worst.max(d);
                }
                Ok((worst, pairs.len()))
            });
            match res {
                Ok((worst, count)) => {
                    r.metric("almost_mult_defect", worst, Bound::AtMost { limit: t.almost_mult });
                    r.info("pairs", count as f64);
                    r
                }
                Err(e) => refused(r, "almost_mult_defect", e),
            }
        }
        "recover" => {
            let r = base(t.exactness);
            match build_matrix(phi, space, n).and_then(|m| verify_composition_structure(&m, t.exactness)) {
                Ok(mut v) => {
                    v.check_name = check.to_string();
                    v.inputs.extend(r.inputs);
                    v
                }
                Err(e) => refused(r, "composition_structure", e),
            }
        }
        "product-isometry" => {
            let mut r = base(t.defect_zero);
            let variants = match a.extra.as_slice() {
                [] => vec![ProductVariant::PhiPsiStar, ProductVariant::PhiStarPsi],
                [v] => vec![ProductVariant::from_str(v).map_err(usage)?],
                more => return Err(usage(format!("unexpected arguments: {}", more.join(" ")))),
            };
            let popts = ProductOptions { zero_tol: t.defect_zero, norm_tol: t.norm_agreement, norm: opts };
            for v in variants {
                match check_product_isometry(phi, &maps[1], space, n, v, &popts) {
                    Ok(mut c) => {
                        c.check_name = v.label().to_string();
                        r.child(c);
                    }
                    Err(e) => r = refused(r, v.label(), e),
                }
            }
            r
        }
        _ => unreachable!("checked against CHECKS"),
    };
    Ok(report)
}

/// Entry point for the binary.
pub fn main_from_env() -> i32 {
    run(std::env::args_os(), std::env::var(SEED_ENV).ok())
}
