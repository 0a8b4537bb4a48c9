//! Command-line front end for `arrangelab-core`.
//!
//! Every subcommand prints JSON by default and a plain table with
//! `--pretty`. Exit codes: 0 on success, 1 when a verification fails, 2 on
//! input errors.

pub mod example;
pub mod render;
pub mod scalar;
mod table;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use arrangelab_core::arrangement::TOL_POINT;
use arrangelab_core::deformation::{certify_path, link};
use arrangelab_core::fiber::{nearby_fiber_report, BallSpec};
use arrangelab_core::invariants::InvariantReport;
use arrangelab_core::{
    combinatorics, critical_points, is_generic, morse_report, parse_arrangement, Arrangement, ComplexScalar, Point,
    SolverConfig,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::render::{render_svg, RenderSpec};
use crate::scalar::{parse_list, parse_reals, parse_scalar};
use crate::table::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "arrangelab", version, about = "Complex line arrangements: invariants, critical points, deformations, fibers")]
pub struct Cli {
    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "ARRANGELAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub cluster_tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub value_tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub off_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub newton_max_iter: usize,
    #[arg(long, default_value_t = 500)]
    pub root_max_iter: usize,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            residual_tol: self.residual_tol,
            cluster_tol: self.cluster_tol,
            value_tol: self.value_tol,
            off_tol: self.off_tol,
            newton_max_iter: self.newton_max_iter,
            root_max_iter: self.root_max_iter,
            seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Combinatorics, genericity and fiber invariants.
    Info { input: PathBuf },
    /// Critical points off the arrangement.
    Crit {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Critical points, critical values and the Morse verdict.
    Morse {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Links two arrangements with the same combinatorics and certifies the path.
    Deform {
        input0: PathBuf,
        input1: PathBuf,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Also compare the number of critical values along the path.
        #[arg(long)]
        check_morse: bool,
        /// Where to write the sampled path.
        #[arg(long)]
        path_out: Option<PathBuf>,
        /// Where to write the certificate.
        #[arg(long)]
        cert_out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Ribbon model of the nearby fiber in a ball.
    Fiber {
        input: PathBuf,
        #[arg(long)]
        radius: f64,
        /// Ball center as `x,y`; complex entries like `1+2i` are allowed.
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
    },
    /// SVG drawing of the real trace.
    Render {
        input: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// `xmin,xmax,ymin,ymax`; fitted to the intersection points when absent.
        #[arg(long, allow_hyphen_values = true)]
        viewport: Option<String>,
        #[arg(long, default_value_t = 600)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
        /// Draw the ball of this radius.
        #[arg(long)]
        ball_radius: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        ball_center: Option<String>,
    },
    /// Checks the family x y (x + y - 4)(x - t y) at one value of t.
    VerifyExample {
        /// `2`, `1+i`, `j`, `jbar`, ...
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad files, documents, flags or preconditions.
    Input(anyhow::Error),
    /// The computation itself failed.
    Failed(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(e) | CliError::Failed(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<arrangelab_core::Error> for CliError {
    fn from(e: arrangelab_core::Error) -> CliError {
        use arrangelab_core::Error::*;
        match e {
            Malformed(_) | DegenerateLine { .. } | DuplicateLine { .. } | NonFinite { .. } | Empty
            | ClusterAmbiguity { .. } | SingleDirection | CombinatoricsMismatch { .. } | NotGeneric
            | TooFewClasses { .. } | InvalidBall(_) | ForbiddenBand { .. } => CliError::Input(e.into()),
            _ => CliError::Failed(e.into()),
        }
    }
}

fn bad_input<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Input(e.into())
}

/// What a command produced.
pub struct Output {
    pub json: Value,
    pub pretty: String,
    /// Written to standard output as is, bypassing `json`/`pretty`.
    pub raw: Option<String>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl Output {
    fn ok(json: Value, pretty: String) -> Output {
        Output { json, pretty, raw: None, warnings: Vec::new(), passed: true }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_FAILED
        }
    }

    pub fn render(&self, pretty: bool) -> String {
        if let Some(raw) = &self.raw {
            return raw.clone();
        }
        if pretty {
            self.pretty.clone()
        } else {
            let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
            s.push('\n');
            s
        }
    }
}

pub fn load(path: &Path) -> Result<Arrangement, CliError> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(bad_input)?;
    parse_arrangement(&text).map_err(|e| bad_input(anyhow!(e).context(format!("parsing {}", path.display()))))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display())).map_err(bad_input)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn fmt_c(z: ComplexScalar) -> String {
    if z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) {
        format!("{:.10}", z.re)
    } else {
        format!("{:.10} {} {:.10}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
    }
}

fn fmt_opt(x: Option<i64>, why: &str) -> String {
    x.map_or_else(|| format!("n/a ({why})"), |v| v.to_string())
}

fn parse_point(token: &str) -> Result<Point, CliError> {
    let v = parse_list(token).map_err(bad_input)?;
    match v.as_slice() {
        [x, y] => Ok([*x, *y]),
        _ => Err(bad_input(anyhow!("a point needs two coordinates, got {token:?}"))),
    }
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Info { input } => cmd_info(&load(input)?),
        Command::Crit { input, solver } => cmd_crit(&load(input)?, &solver.config(cli.seed)),
        Command::Morse { input, solver } => cmd_morse(&load(input)?, &solver.config(cli.seed)),
        Command::Deform { input0, input1, steps, check_morse, path_out, cert_out, solver } => cmd_deform(
            &load(input0)?,
            &load(input1)?,
            *steps,
            *check_morse,
            path_out.as_deref(),
            cert_out.as_deref(),
            &solver.config(cli.seed),
        ),
        Command::Fiber { input, radius, center } => {
            let center = center.as_deref().map(parse_point).transpose()?;
            cmd_fiber(&load(input)?, *radius, center, cli.seed)
        }
        Command::Render { input, output, viewport, width, height, ball_radius, ball_center } => {
            let arr = load(input)?;
            let ball = match ball_radius {
                Some(r) => {
                    let center = ball_center.as_deref().map(parse_point).transpose()?;
                    let zero = ComplexScalar::new(0.0, 0.0);
                    Some(BallSpec::new(center.unwrap_or([zero, zero]), *r)?)
                }
                None => None,
            };
            let spec = match viewport {
                Some(v) => {
                    let b = parse_reals(v).map_err(bad_input)?;
                    let [x0, x1, y0, y1] = b[..] else {
                        return Err(bad_input(anyhow!("viewport needs four numbers xmin,xmax,ymin,ymax")));
                    };
                    RenderSpec::new((x0, x1, y0, y1), *width, *height, ball).map_err(bad_input)?
                }
                None => RenderSpec::fit(&arr, ball, *width, *height).map_err(bad_input)?,
            };
            cmd_render(&arr, &spec, output.as_deref())
        }
        Command::VerifyExample { t, solver } => {
            let t = parse_scalar(t).map_err(bad_input)?;
            cmd_verify_example(t, &solver.config(cli.seed))
        }
    }
}

pub fn cmd_info(arr: &Arrangement) -> Result<Output, CliError> {
    let genericity = is_generic(arr, TOL_POINT)?;
    let inv = InvariantReport::compute(arr, TOL_POINT)?;
    let json = json!({
        "d": inv.d,
        "combinatorics": inv.combinatorics,
        "genericity": genericity,
        "invariants": inv,
    });
    let not_generic = "not generic";
    let mut t = Table::new(&["quantity", "value"]);
    t.row(&["lines", &inv.d.to_string()]);
    t.row(&["combinatorics", &format!("{:?}", inv.combinatorics.class_sizes())]);
    t.row(&["generic", &genericity.is_generic.to_string()]);
    t.row(&["triple points", &genericity.triple_points.len().to_string()]);
    t.row(&["all parallel", &genericity.all_parallel.to_string()]);
    t.row(&["chi generic fiber", &fmt_opt(inv.chi_generic_fiber, not_generic)]);
    t.row(&["chi zero fiber", &inv.chi_zero_fiber.to_string()]);
    t.row(&["mu(0)", &fmt_opt(inv.mu_zero, not_generic)]);
    t.row(&["predicted #B", &fmt_opt(inv.predicted_b_count, "all lines parallel")]);
    Ok(Output::ok(json, t.render()))
}

fn points_table(points: &[arrangelab_core::CriticalPoint]) -> Table {
    let mut t = Table::new(&["x", "y", "value", "hessian det", "nondegenerate", "residual"]);
    for p in points {
        t.row(&[
            &fmt_c(p.location[0]),
            &fmt_c(p.location[1]),
            &fmt_c(p.value),
            &format!("{:.3e}", p.hessian_det.norm()),
            &p.nondegenerate.to_string(),
            &format!("{:.2e}", p.residual),
        ]);
    }
    t
}

pub fn cmd_crit(arr: &Arrangement, cfg: &SolverConfig) -> Result<Output, CliError> {
    let points = critical_points(arr, cfg)?;
    let pretty = format!("{} critical point(s)\n{}", points.len(), points_table(&points).render());
    Ok(Output::ok(to_value(&points), pretty))
}

pub fn cmd_morse(arr: &Arrangement, cfg: &SolverConfig) -> Result<Output, CliError> {
    let report = morse_report(arr, cfg)?;
    let mut pretty = points_table(&report.critical_points).render();
    let mut t = Table::new(&["quantity", "value"]);
    t.row(&["morse outside", &report.is_morse_outside.to_string()]);
    let values: Vec<String> = report.critical_values_nonzero.iter().map(|v| fmt_c(*v)).collect();
    t.row(&["nonzero critical values", &values.join(", ")]);
    t.row(&["predicted count", &fmt_opt(report.predicted_count, "not generic")]);
    t.row(&["measured #B", &report.measured_bifurcation_count.to_string()]);
    t.row(&["predicted #B", &report.predicted_bifurcation_count.to_string()]);
    pretty.push('\n');
    pretty.push_str(&t.render());
    Ok(Output::ok(to_value(&report), pretty))
}

pub fn cmd_deform(
    arr0: &Arrangement,
    arr1: &Arrangement,
    steps: usize,
    check_morse: bool,
    path_out: Option<&Path>,
    cert_out: Option<&Path>,
    cfg: &SolverConfig,
) -> Result<Output, CliError> {
    let (c0, c1) = (combinatorics(arr0), combinatorics(arr1));
    if c0 != c1 {
        return Err(arrangelab_core::Error::CombinatoricsMismatch {
            left: c0.class_sizes().to_vec(),
            right: c1.class_sizes().to_vec(),
        }
        .into());
    }
    if steps < 2 {
        return Err(bad_input(anyhow!("--steps must be at least 2")));
    }
    let path = link(arr0, arr1, steps, cfg.seed)?;
    let cert = certify_path(&path, cfg, check_morse);
    if let Some(p) = path_out {
        write_file(p, &path.to_json())?;
    }
    if let Some(p) = cert_out {
        write_file(p, &(serde_json::to_string_pretty(&cert).expect("certificate serializes") + "\n"))?;
    }
    let jump = path.max_coefficient_jump();
    let json = json!({
        "steps": steps,
        "combinatorics": path.combinatorics,
        "max_coefficient_jump": jump,
        "certified": cert.certified(),
        "certificate": cert,
    });
    let mut t = Table::new(&["quantity", "value"]);
    t.row(&["samples", &steps.to_string()]);
    t.row(&["combinatorics", &format!("{:?}", path.combinatorics.class_sizes())]);
    t.row(&["degree constant", &cert.degree_constant.to_string()]);
    t.row(&["all generic", &cert.all_generic.to_string()]);
    t.row(&["combinatorics constant", &cert.combinatorics_constant.to_string()]);
    t.row(&["#B constant", &cert.b_count_constant.map_or("not checked".into(), |b| b.to_string())]);
    t.row(&["max coefficient jump", &format!("{jump:.6e}")]);
    let mut pretty = t.render();
    for f in &cert.failures {
        pretty.push_str(&format!("failure at t = {}: {}\n", f.t, f.reason));
    }
    let mut out = Output::ok(json, pretty);
    out.passed = cert.certified();
    Ok(out)
}

pub fn cmd_fiber(arr: &Arrangement, radius: f64, center: Option<Point>, seed: u64) -> Result<Output, CliError> {
    let ball = match center {
        Some(c) => BallSpec::new(c, radius)?,
        None => BallSpec::centered(radius)?,
    };
    let report = nearby_fiber_report(arr, &ball, seed)?;
    let inv = &report.invariants;
    let mut t = Table::new(&["quantity", "value"]);
    t.row(&["disks", &report.surface.disks.len().to_string()]);
    t.row(&["bands", &report.surface.bands.len().to_string()]);
    t.row(&["euler characteristic", &inv.euler.to_string()]);
    t.row(&["boundary components", &inv.boundary_components.to_string()]);
    t.row(&["genus", &inv.genus.to_string()]);
    t.row(&["connected components", &inv.connected_components.to_string()]);
    t.row(&["perturbation", &format!("{:.3e}", report.perturbation)]);
    let check = match &report.formula_check {
        Some(c) => format!("expected {}, agrees {}", c.expected_euler, c.agrees),
        None => "n/a".into(),
    };
    t.row(&["formula check", &check]);
    let mut out = Output::ok(to_value(&report), t.render());
    out.passed = report.formula_check.as_ref().is_none_or(|c| c.agrees);
    Ok(out)
}

pub fn cmd_render(arr: &Arrangement, spec: &RenderSpec, output: Option<&Path>) -> Result<Output, CliError> {
    let rendered = render_svg(arr, spec);
    let summary = json!({
        "classes": arrangelab_core::arrangement::parallel_classes(arr).len(),
        "lines": arr.degree(),
        "viewport": [spec.viewport.0, spec.viewport.1, spec.viewport.2, spec.viewport.3],
        "output": output.map(|p| p.display().to_string()),
        "warnings": rendered.warnings,
    });
    let mut out = match output {
        Some(p) => {
            write_file(p, &rendered.svg)?;
            Output::ok(summary, format!("wrote {}\n", p.display()))
        }
        None => Output { raw: Some(rendered.svg), ..Output::ok(summary, String::new()) },
    };
    out.warnings = rendered.warnings;
    Ok(out)
}

pub fn cmd_verify_example(t: ComplexScalar, cfg: &SolverConfig) -> Result<Output, CliError> {
    let report = example::verify_example(t, cfg).map_err(|e| match e.downcast::<arrangelab_core::Error>() {
        Ok(core) => CliError::from(core),
        Err(other) => bad_input(other),
    })?;
    let mut t = Table::new(&["check", "result", "detail"]);
    for c in &report.checks {
        let verdict = match c.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "skipped",
        };
        t.row(&[&c.name, verdict, &c.detail]);
    }
    let mut pretty = format!("t = {} ({})\n", fmt_c(report.t), report.regime);
    if let Some(d) = &report.degenerate {
        pretty.push_str(&format!("degenerate configuration: {d}\n"));
    }
    let values: Vec<String> = report.critical_values_nonzero.iter().map(|v| fmt_c(*v)).collect();
    pretty.push_str(&format!("nonzero critical values: {}\n", values.join(", ")));
    pretty.push_str(&t.render());
    let passed = report.passed;
    let mut out = Output::ok(to_value(&report), pretty);
    out.passed = passed;
    Ok(out)
}
