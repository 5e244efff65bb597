use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use circle_quant::bohr_sommerfeld::enumerate_bs_fibres_shifted;
use circle_quant::circle_action::{holonomy_division, holonomy_formula, holonomy_transport, OrbitSample};
use circle_quant::cli_io::{
    bs_csv, emit_report, parse_spec, parse_window, run_quantise, run_verify, to_canonical_json, RunConfig, Suite,
    EXIT_INPUT_ERROR, EXIT_OK, EXIT_VERIFY_FAILED,
};
use circle_quant::models::{make_model, HolonomyConvention, ModelKind, ModelSpec};
use circle_quant::numerics::{QuadratureRule, C64};
use circle_quant::quantisation::FibrationBase;
use circle_quant::{Error, Result};

#[derive(Parser)]
#[command(name = "circle-quant", version, about = "Quantisation counts and Kostant-complex checks on local models")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 5e-4)]
    fd_step: f64,
    #[arg(long, global = true)]
    no_fd_richardson: bool,
    #[arg(long, global = true, default_value_t = 2048)]
    quadrature_steps: usize,
    #[arg(long, global = true, value_enum, default_value_t = Rule::SimpsonRichardson)]
    quadrature_rule: Rule,
    #[arg(long, global = true, default_value_t = 1e-12)]
    ode_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    eq_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Convention::TransportOracle)]
    disk_convention: Convention,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Simpson,
    SimpsonRichardson,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    TransportOracle,
    PaperPrinted,
}

#[derive(Subcommand)]
enum Command {
    /// Per-degree dimensions for a spec file.
    Quantise {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the BS records as CSV (next to --out, else to stdout instead of JSON).
        #[arg(long)]
        csv: bool,
    },
    /// Holonomy of a circle generator at a point.
    Holonomy {
        /// Model name (cylinder, disk, focus_focus, linear:N, liouville:N:K,
        /// elliptic:N:K) or a spec file.
        #[arg(long)]
        model: String,
        /// Comma-separated coordinates.
        #[arg(long)]
        point: String,
        /// 1-based generator index; defaults to the first circle generator.
        #[arg(long)]
        generator: Option<usize>,
        /// Cross-check the closed form against transport integration.
        #[arg(long)]
        oracle: bool,
    },
    /// Bohr-Sommerfeld fibres of a spec as CSV.
    Bs {
        #[arg(long)]
        spec: PathBuf,
        /// `lo:hi` per action, comma separated; an empty side is unbounded.
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Divide `(Q^-1 - 1) g` by the holonomy gap at a point.
    Divide {
        #[arg(long, default_value = "disk")]
        model: String,
        /// Factor g: one, x, y, z (x + i y) or gauss.
        #[arg(long = "fn")]
        func: String,
        #[arg(long)]
        point: String,
        /// Divide g itself rather than `(Q^-1 - 1) g`.
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Operators,
    Holonomy,
    Homotopy,
    Division,
    Bs,
    Focusfocus,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Operators => Suite::Operators,
            SuiteArg::Holonomy => Suite::Holonomy,
            SuiteArg::Homotopy => Suite::Homotopy,
            SuiteArg::Division => Suite::Division,
            SuiteArg::Bs => Suite::Bs,
            SuiteArg::Focusfocus => Suite::Focusfocus,
            SuiteArg::All => Suite::All,
        }
    }
}

impl Common {
    fn run_config(&self, output: Option<&Path>, csv: bool) -> RunConfig {
        RunConfig {
            fd_step: self.fd_step,
            fd_richardson: !self.no_fd_richardson,
            quadrature_steps: self.quadrature_steps,
            quadrature_rule: match self.quadrature_rule {
                Rule::Simpson => QuadratureRule::Simpson,
                Rule::SimpsonRichardson => QuadratureRule::SimpsonRichardson,
            },
            ode_tol: self.ode_tol,
            eq_tol: self.eq_tol,
            seed: self.seed,
            samples: self.samples,
            disk_convention: match self.disk_convention {
                Convention::TransportOracle => HolonomyConvention::TransportOracle,
                Convention::PaperPrinted => HolonomyConvention::PaperPrinted,
            },
            tol: self.tol,
            output: output.map(|p| p.display().to_string()),
            csv,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::schema("point", format!("not a number: {t:?}")))
        })
        .collect()
}

fn model_from_arg(arg: &str) -> Result<ModelSpec> {
    let parts: Vec<&str> = arg.split(':').collect();
    let num = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::schema("model", format!("expected an integer in {arg:?}")))
    };
    match parts[0] {
        "cylinder" => Ok(ModelSpec::cylinder()),
        "disk" => Ok(ModelSpec::disk()),
        "focus_focus" => Ok(ModelSpec::focus_focus()),
        "linear" => Ok(ModelSpec::linear(num(1)?)),
        "liouville" => Ok(ModelSpec::liouville(num(1)?, num(2)?)),
        "elliptic" => Ok(ModelSpec::elliptic(num(1)?, num(2)?)),
        _ if Path::new(arg).is_file() => match parse_spec(&read(Path::new(arg))?)?.descriptor.base {
            FibrationBase::ModelChart(s) => Ok(s),
            FibrationBase::ToricPolytope(p) => Ok(ModelSpec::new(ModelKind::ToricPolytope(p))),
            _ => Err(Error::schema("model", "spec file does not describe a model chart")),
        },
        _ => Err(Error::schema("model", format!("unknown model {arg:?}"))),
    }
}

#[derive(Serialize)]
struct HolonomyOut {
    model: String,
    generator: usize,
    point: Vec<f64>,
    formula: C64,
    period: f64,
    hamiltonian: f64,
    fixed_point: bool,
    transport: Option<C64>,
    difference: Option<f64>,
}

#[derive(Serialize)]
struct DivideOut {
    model: String,
    function: String,
    point: Vec<f64>,
    value: C64,
}

/// Transport and closed form must agree to this when `--oracle` is given.
const ORACLE_TOL: f64 = 1e-8;

fn run(cli: Cli) -> Result<i32> {
    let c = &cli.common;
    match cli.command {
        Command::Quantise { spec, out, csv } => {
            let cfg = c.run_config(out.as_deref(), csv);
            let parsed = parse_spec(&read(&spec)?)?;
            let doc = run_quantise(&parsed, &cfg)?;
            match (&out, csv) {
                (Some(o), true) => {
                    write_or_print(Some(o), &emit_report(&doc))?;
                    write_or_print(Some(&o.with_extension("csv")), &bs_csv(&doc.bs_fibres)?)?;
                }
                (None, true) => write_or_print(None, &bs_csv(&doc.bs_fibres)?)?,
                _ => write_or_print(out.as_deref(), &emit_report(&doc))?,
            }
            Ok(EXIT_OK)
        }
        Command::Holonomy { model, point, generator, oracle } => {
            let cfg = c.run_config(None, false).numerics();
            cfg.validate()?;
            let m = make_model(model_from_arg(&model)?)?;
            let p = parse_point(&point)?;
            m.check_point(&p)?;
            let x = match generator {
                Some(j) => m.generator(j)?,
                None => *m
                    .circle_generators()
                    .first()
                    .ok_or_else(|| Error::InvalidModel(format!("{} has no circle generator", m.name())))?,
            };
            let orbit = OrbitSample::new(p.clone(), x);
            let h = holonomy_formula(&m, &orbit, cfg.convention)?;
            let transport = if oracle {
                Some(holonomy_transport(&m, &orbit, &cfg)?.value)
            } else {
                None
            };
            let difference = transport.map(|t| (t - h.value).norm());
            let out = HolonomyOut {
                model: m.name(),
                generator: x.index,
                point: p,
                formula: h.value,
                period: h.period,
                hamiltonian: h.hamiltonian_value,
                fixed_point: h.fixed_point,
                transport,
                difference,
            };
            print!("{}", to_canonical_json(&out));
            Ok(if difference.is_some_and(|d| d > ORACLE_TOL) { EXIT_VERIFY_FAILED } else { EXIT_OK })
        }
        Command::Bs { spec, window, out } => {
            let parsed = parse_spec(&read(&spec)?)?;
            let model_spec = match &parsed.descriptor.base {
                FibrationBase::ModelChart(s) => s.clone(),
                FibrationBase::ToricPolytope(p) | FibrationBase::AlmostToric4 { polytope: p, .. } => {
                    ModelSpec::new(ModelKind::ToricPolytope(p.clone()))
                }
                FibrationBase::LagrangianBundle { fibre_rank, base_dim } => ModelSpec::liouville(*base_dim, *fibre_rank),
            };
            let m = make_model(model_spec)?;
            let w = match window {
                None => parsed.window.clone(),
                Some(text) => {
                    let v: Vec<serde_json::Value> = text
                        .split(',')
                        .map(|piece| {
                            let (lo, hi) = piece
                                .split_once(':')
                                .ok_or_else(|| Error::schema("window", format!("expected lo:hi, got {piece:?}")))?;
                            let side = |s: &str| -> Result<serde_json::Value> {
                                if s.trim().is_empty() {
                                    return Ok(serde_json::Value::Null);
                                }
                                let x: f64 = s
                                    .trim()
                                    .parse()
                                    .map_err(|_| Error::schema("window", format!("not a number: {s:?}")))?;
                                Ok(serde_json::json!(x))
                            };
                            Ok(serde_json::Value::Array(vec![side(lo)?, side(hi)?]))
                        })
                        .collect::<Result<_>>()?;
                    parse_window(&serde_json::Value::Array(v), m.rank(), "window")?
                }
            };
            let offsets = parsed.descriptor.lattice_offset.clone().unwrap_or_default();
            let conv = c.run_config(None, false).disk_convention;
            let records = enumerate_bs_fibres_shifted(&m, &w, conv, &offsets)?;
            write_or_print(out.as_deref(), &bs_csv(&records)?)?;
            Ok(EXIT_OK)
        }
        Command::Verify { suite, out } => {
            let cfg = c.run_config(out.as_deref(), false);
            cfg.numerics().validate()?;
            let report = run_verify(suite.into(), &cfg);
            write_or_print(out.as_deref(), &to_canonical_json(&report))?;
            for f in report.failures() {
                eprintln!(
                    "FAIL {}: residual {:e} > tolerance {:e}{}",
                    f.name,
                    f.residual,
                    f.tolerance,
                    f.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
                );
            }
            Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Divide { model, func, point, raw } => {
            let cfg = c.run_config(None, false).numerics();
            cfg.validate()?;
            let m = make_model(model_from_arg(&model)?)?;
            let p = parse_point(&point)?;
            let g: fn(&[f64]) -> C64 = match func.as_str() {
                "one" => |_| C64::new(1.0, 0.0),
                "x" => |p| C64::new(p[0], 0.0),
                "y" => |p| C64::new(p[1], 0.0),
                "z" => |p| C64::new(p[0], p[1]),
                "gauss" => |p| C64::new((-p.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0),
                other => return Err(Error::schema("fn", format!("unknown function {other:?}"))),
            };
            let x = *m
                .circle_generators()
                .first()
                .ok_or_else(|| Error::InvalidModel(format!("{} has no circle generator", m.name())))?;
            let mm = m.clone();
            let f = move |q: &[f64]| -> C64 {
                if raw {
                    return g(q);
                }
                let hol = holonomy_formula(&mm, &OrbitSample::new(q.to_vec(), x), cfg.convention)
                    .map(|h| h.value)
                    .unwrap_or(C64::new(f64::NAN, 0.0));
                (hol.inv() - 1.0) * g(q)
            };
            let value = holonomy_division(&m, &f, &p, &cfg)?;
            let out = DivideOut {
                model: m.name(),
                function: if raw { func } else { format!("(Q^-1 - 1) * {func}") },
                point: p,
                value,
            };
            print!("{}", to_canonical_json(&out));
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}
