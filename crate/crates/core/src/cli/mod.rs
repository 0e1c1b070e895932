//! Command-line front end.
//!
//! Subcommands: `solve-angles`, `three-box`, `cheshire`, `meter-sim`. Each
//! prints a human-readable table; `--out PATH` additionally writes a CSV
//! (atomically) plus a `PATH.manifest.json` sidecar, and `--out -` sends the
//! CSV to stdout instead of the table.
//!
//! Exit codes: 0 success, 1 residuals above tolerance, 2 configuration or
//! usage error, 3 physically impossible request (orthogonal post-selection).

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::conditions::{
    closed_form_cross_check, joint_solution, residual_cheshire, residual_condition1, residual_condition2, solve_gamma,
    solve_phi, ClosedFormCheck,
};
use crate::error::{Error, Result};
use crate::interferometer::{run_scenario, Location, Report, ScenarioKind};
use crate::meter::{epsilon_response, weak_limit_report, ConvergenceReport, EpsilonResponse};
use crate::spin_algebra::Angle;
use config::{bundled, ObservableName, RunConfig, Sweep};
use output::{csv_header, manifest_path, num, short, write_atomic, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RESIDUAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PHYSICAL: i32 = 3;

/// Locations covered by the Cheshire ε-rotation subreport.
pub const EPSILON_LOCATIONS: [Location; 4] = [Location::C0, Location::C2, Location::C3, Location::C5];

#[derive(Parser, Debug)]
#[command(name = "weakspin", version, about = "Spin-1 three-box and Cheshire-cat weak-value simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the path conditions for phi (and the Cheshire condition for gamma).
    SolveAngles(SolveArgs),
    /// Three-box weak-value table.
    ThreeBox(CommonArgs),
    /// Cheshire-cat weak-value table with the epsilon-rotation subreport.
    Cheshire(CommonArgs),
    /// Meter-pointer convergence towards the weak value.
    MeterSim(MeterArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Scenario file, or the name of a bundled config.
    #[arg(long, value_name = "PATH")]
    pub config: Option<String>,
    /// CSV destination (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Residual tolerance override.
    #[arg(long, value_name = "FLOAT")]
    pub tol: Option<f64>,
    /// Reserved; every computation is deterministic.
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Report the joint solution of both path conditions.
    #[arg(long, conflicts_with_all = ["alpha", "sweep"])]
    pub joint: bool,
    /// Single alpha, in degrees.
    #[arg(long, value_name = "DEG", allow_hyphen_values = true, conflicts_with = "sweep")]
    pub alpha: Option<f64>,
    /// Alpha grid in degrees.
    #[arg(long, value_name = "START:STOP:STEP")]
    pub sweep: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct MeterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated couplings, strictly descending.
    #[arg(long, value_name = "LIST")]
    pub g: Option<String>,
    /// Observable name (pi_a, pi_abar, identity, j_gamma, ...).
    #[arg(long, value_name = "NAME")]
    pub obs: Option<String>,
}

/// Everything a command produced, before it reaches the terminal.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    /// CSV text, whether or not it was written anywhere.
    pub csv: String,
    pub manifest: Option<RunManifest>,
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { code: EXIT_CONFIG, stderr: text, ..Default::default() }
            } else {
                Outcome { code: EXIT_OK, stdout: text, ..Default::default() }
            }
        }
    }
}

struct Computed {
    table: String,
    csv: String,
    scenario: String,
    config_hash: String,
    code: i32,
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_physical() {
        EXIT_PHYSICAL
    } else {
        EXIT_CONFIG
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let (common, result) = match &cli.command {
        Command::SolveAngles(a) => (&a.common, cmd_solve_angles(a)),
        Command::ThreeBox(a) => (a, cmd_scenario(a, ScenarioKind::ThreeBox)),
        Command::Cheshire(a) => (a, cmd_scenario(a, ScenarioKind::Cheshire)),
        Command::MeterSim(a) => (&a.common, cmd_meter(a)),
    };
    let computed = match result {
        Ok(c) => c,
        Err(e) => {
            return Outcome {
                code: exit_code(&e),
                stderr: format!("error: {e}\n"),
                ..Default::default()
            }
        }
    };

    let mut out = Outcome {
        code: computed.code,
        csv: computed.csv,
        ..Default::default()
    };
    match common.out.as_deref() {
        None => out.stdout = computed.table,
        Some(p) if p == Path::new("-") => out.stdout = out.csv.clone(),
        Some(p) => {
            out.stdout = computed.table;
            let manifest = RunManifest::new(&computed.scenario, &computed.config_hash, vec![p.to_path_buf()]);
            let written = write_atomic(p, &out.csv).and_then(|_| {
                let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
                write_atomic(&manifest_path(p), &(json + "\n"))
            });
            match written {
                Ok(()) => {
                    let _ = writeln!(out.stdout, "wrote {}", p.display());
                    out.manifest = Some(manifest);
                }
                Err(e) => {
                    out.code = EXIT_CONFIG;
                    out.stderr = format!("error: cannot write {}: {e}\n", p.display());
                }
            }
        }
    }
    if out.code == EXIT_RESIDUAL {
        out.stderr.push_str("residuals exceed the configured tolerance\n");
    }
    out
}

/// Reads `--config` (file path or bundled name), falling back to `default`,
/// and applies `--tol`.
fn load_config(common: &CommonArgs, default: &str) -> Result<RunConfig> {
    let name = common.config.as_deref().unwrap_or(default);
    let text = if Path::new(name).is_file() {
        std::fs::read_to_string(name).map_err(|e| Error::Config(format!("cannot read '{name}': {e}")))?
    } else if let Some(text) = bundled(name.strip_suffix(".toml").unwrap_or(name)) {
        text.to_string()
    } else {
        return Err(Error::Config(format!("config '{name}' is neither a readable file nor a bundled config")));
    };
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(tol) = common.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Config("--tol must be a positive number".into()));
        }
        cfg.residual_tol = tol;
    }
    Ok(cfg)
}

fn deg(a: Angle) -> String {
    format!("{:.6}", a.degrees())
}

fn complex_cells(z: num_complex::Complex64) -> String {
    format!("{},{}", num(z.re), num(z.im))
}

// ---------------------------------------------------------------- solve-angles

/// One row of the angle table: a (α, φ) pair with its residuals and γ roots.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleRow {
    pub alpha: Angle,
    pub phi: Angle,
    pub source: String,
    pub residual_c1: f64,
    pub residual_c2: f64,
    pub gamma: Option<Angle>,
    pub residual_cc: Option<f64>,
}

impl AngleRow {
    fn new(alpha: Angle, phi: Angle, source: &str) -> Self {
        let gamma = solve_gamma(alpha, phi).first().copied();
        AngleRow {
            alpha,
            phi,
            source: source.to_string(),
            residual_c1: residual_condition1(alpha, phi).norm(),
            residual_c2: residual_condition2(alpha, phi).norm(),
            gamma,
            residual_cc: gamma.map(|g| residual_cheshire(alpha, phi, g).norm()),
        }
    }

    pub const CSV_COLUMNS: &'static str = "alpha_deg,phi_deg,source,residual_c1,residual_c2,gamma_deg,residual_cc";

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}\n",
            num(self.alpha.degrees()),
            num(self.phi.degrees()),
            self.source,
            short(self.residual_c1),
            short(self.residual_c2),
            self.gamma.map(|g| num(g.degrees())).unwrap_or_default(),
            self.residual_cc.map(short).unwrap_or_default(),
        )
    }

    fn table_line(&self) -> String {
        format!(
            "{:>12} {:>12}  {:<14} {:>10} {:>10} {:>12} {:>10}\n",
            deg(self.alpha),
            deg(self.phi),
            self.source,
            short(self.residual_c1),
            short(self.residual_c2),
            self.gamma.map(deg).unwrap_or_else(|| "-".into()),
            self.residual_cc.map(short).unwrap_or_else(|| "-".into()),
        )
    }
}

/// Numerical φ roots of condition 1 at `alpha` plus the closed-form value,
/// with notes on singular or disagreeing closed forms.
pub fn angle_rows(alpha: Angle) -> (Vec<AngleRow>, Vec<String>) {
    let mut rows: Vec<AngleRow> = solve_phi(alpha).into_iter().map(|phi| AngleRow::new(alpha, phi, "numeric")).collect();
    let mut notes = Vec::new();
    match closed_form_cross_check(alpha) {
        ClosedFormCheck::Agrees { branch_n, phi, numeric_match, .. } => {
            rows.push(AngleRow::new(alpha, phi.wrapped(), &format!("closed_form_n{branch_n}")));
            if numeric_match.is_none() {
                notes.push(format!(
                    "closed-form phi at alpha = {} deg is not among the numerical roots",
                    deg(alpha)
                ));
            }
        }
        ClosedFormCheck::Discrepancy { best_branch, best_residual } => notes.push(format!(
            "discrepancy: alpha = {} deg, best closed-form branch n = {best_branch} leaves residual {}",
            deg(alpha),
            short(best_residual)
        )),
        ClosedFormCheck::Singular => notes.push(format!(
            "warning: closed-form phi is singular at alpha = {} deg; numerical roots only",
            deg(alpha)
        )),
    }
    if rows.is_empty() {
        notes.push(format!("no phi root at alpha = {} deg", deg(alpha)));
    }
    (rows, notes)
}

fn cmd_solve_angles(args: &SolveArgs) -> Result<Computed> {
    let cfg = match &args.common.config {
        Some(_) => Some(load_config(&args.common, "")?),
        None => None,
    };
    let config_hash = cfg.as_ref().map(|c| c.config_hash()).unwrap_or_else(|| "none".into());
    let tol = args.common.tol.or(cfg.as_ref().map(|c| c.residual_tol)).unwrap_or(config::DEFAULT_RESIDUAL_TOL);

    let sweep = match (&args.sweep, cfg.as_ref().and_then(|c| c.sweep)) {
        (Some(s), _) => Some(Sweep::parse_degrees(s)?),
        (None, from_file) if !args.joint && args.alpha.is_none() => from_file,
        _ => None,
    };
    let (scenario, alphas, joint) = if let Some(s) = sweep {
        ("sweep", s.points(), None)
    } else if let Some(a) = args.alpha {
        if !a.is_finite() {
            return Err(Error::Config("--alpha must be finite".into()));
        }
        ("alpha", vec![Angle::from_degrees(a)], None)
    } else {
        let sol = joint_solution();
        ("joint", vec![sol.alpha], Some(AngleRow::new(sol.alpha, sol.phi, "joint")))
    };

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    rows.extend(joint.clone());
    for &alpha in &alphas {
        let (r, n) = angle_rows(alpha);
        rows.extend(r);
        notes.extend(n);
    }

    // Exit 1 only when the headline quantity misses the tolerance: the joint
    // residuals, or the accepted numerical roots of a sweep / single alpha.
    let code = match &joint {
        Some(j) if j.residual_c1.max(j.residual_c2) > tol => EXIT_RESIDUAL,
        Some(_) => EXIT_OK,
        None if rows.iter().filter(|r| r.source == "numeric").any(|r| r.residual_c1 > tol) => EXIT_RESIDUAL,
        None => EXIT_OK,
    };

    let mut table = String::new();
    let _ = writeln!(table, "solve-angles ({scenario}); tolerance {}", short(tol));
    let _ = writeln!(
        table,
        "{:>12} {:>12}  {:<14} {:>10} {:>10} {:>12} {:>10}",
        "alpha[deg]", "phi[deg]", "source", "|c1|", "|c2|", "gamma[deg]", "|cc|"
    );
    for r in &rows {
        table.push_str(&r.table_line());
    }
    for n in &notes {
        let _ = writeln!(table, "{n}");
    }

    let mut csv = csv_header("solve_angles/1", scenario, &config_hash);
    csv.push_str("# residual_c1 is the solved condition; residual_c2 is reported for reference\n");
    for n in &notes {
        let _ = writeln!(csv, "# {n}");
    }
    csv.push_str(AngleRow::CSV_COLUMNS);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv());
    }

    Ok(Computed {
        table,
        csv,
        scenario: scenario.to_string(),
        config_hash,
        code,
    })
}

// ------------------------------------------------------- three-box / cheshire

pub const SCENARIO_CSV_COLUMNS: &str = "section,label,location,kind,time,value_re,value_im,aux";

/// Scenario report plus, for Cheshire runs, the ε-rotation responses.
#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub config: RunConfig,
    pub report: Report,
    pub epsilon: Vec<EpsilonResponse>,
}

pub fn scenario_output(cfg: RunConfig) -> Result<ScenarioOutput> {
    let report = run_scenario(&cfg.scenario)?;
    let epsilon = match cfg.scenario.kind {
        ScenarioKind::Cheshire => EPSILON_LOCATIONS
            .iter()
            .map(|&loc| epsilon_response(&cfg.scenario, loc, cfg.eps))
            .collect::<Result<Vec<_>>>()?,
        ScenarioKind::ThreeBox => Vec::new(),
    };
    Ok(ScenarioOutput { config: cfg, report, epsilon })
}

fn kind_name(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::ThreeBox => "three-box",
        ScenarioKind::Cheshire => "cheshire",
    }
}

fn cmd_scenario(args: &CommonArgs, kind: ScenarioKind) -> Result<Computed> {
    let default = match kind {
        ScenarioKind::ThreeBox => "three_box_default",
        ScenarioKind::Cheshire => "cheshire_default",
    };
    let cfg = load_config(args, default)?;
    if cfg.scenario.kind != kind {
        return Err(Error::Config(format!(
            "config '{}' describes a {} scenario, not {}",
            cfg.scenario.name,
            kind_name(cfg.scenario.kind),
            kind_name(kind)
        )));
    }
    let config_hash = cfg.config_hash();
    let out = scenario_output(cfg)?;
    let tol = out.config.residual_tol;
    let code = if out.report.max_residual() <= tol { EXIT_OK } else { EXIT_RESIDUAL };
    Ok(Computed {
        table: scenario_table(&out, &config_hash),
        csv: scenario_csv(&out, &config_hash),
        scenario: out.report.scenario.clone(),
        config_hash,
        code,
    })
}

fn scenario_table(out: &ScenarioOutput, hash: &str) -> String {
    let r = &out.report;
    let mut t = String::new();
    let _ = writeln!(t, "{} scenario '{}' (config {hash})", kind_name(r.kind), r.scenario);
    let _ = write!(t, "alpha = {} deg   phi = {} deg", deg(r.alpha), deg(r.phi));
    if let Some(g) = r.gamma {
        let _ = write!(t, "   gamma = {} deg", deg(g));
    }
    let _ = writeln!(t);
    let _ = writeln!(t, "post-selection probability = {:.15}", r.postselection_probability);
    let _ = writeln!(t);
    let _ = writeln!(t, "{:<14} {:<9} {:>20} {:>20} {:>10}", "weak value", "location", "re", "im", "overlap");
    for p in &r.probes {
        let z = p.weak_value.value;
        let _ = writeln!(
            t,
            "{:<14} {:<9} {:>20.15} {:>20.15} {:>10.6}",
            p.label,
            p.probe.location.to_string(),
            z.re,
            z.im,
            p.overlap_factor
        );
    }
    for d in &r.derived {
        let z = d.weak_value.value;
        let _ = writeln!(t, "{:<14} {:<9} {:>20.15} {:>20.15}", d.label, "derived", z.re, z.im);
    }
    let _ = writeln!(t);
    for res in &r.residuals {
        let _ = writeln!(t, "residual {:<12} {}", res.name, short(res.value.norm()));
    }
    if !out.epsilon.is_empty() {
        let _ = writeln!(t);
        let _ = writeln!(t, "epsilon rotation exp(-i eps J_gamma), eps = {:e}", out.config.eps);
        let _ = writeln!(t, "{:<9} {:>20} {:>14} {:>14}", "location", "P(eps)", "dP/P", "dP/deps");
        for e in &out.epsilon {
            let _ = writeln!(
                t,
                "{:<9} {:>20.15} {:>14} {:>14}",
                e.location.to_string(),
                e.p_eps,
                short(e.relative_change),
                short(e.first_order)
            );
        }
    }
    let status = if r.max_residual() <= out.config.residual_tol { "ok" } else { "FAILED" };
    let _ = writeln!(t);
    let _ = writeln!(t, "residual check ({}): {status}", short(out.config.residual_tol));
    t
}

fn scenario_csv(out: &ScenarioOutput, hash: &str) -> String {
    let r = &out.report;
    let schema = match r.kind {
        ScenarioKind::ThreeBox => "three_box/1",
        ScenarioKind::Cheshire => "cheshire/1",
    };
    let mut c = csv_header(schema, &r.scenario, hash);
    let _ = writeln!(
        c,
        "# alpha_deg={} phi_deg={} gamma_deg={}",
        num(r.alpha.degrees()),
        num(r.phi.degrees()),
        r.gamma.map(|g| num(g.degrees())).unwrap_or_else(|| "none".into())
    );
    c.push_str("# probe rows: aux = spatial overlap factor; epsilon rows: value_re = dP/P, value_im = P(eps), aux = dP/deps\n");
    c.push_str(SCENARIO_CSV_COLUMNS);
    c.push('\n');
    let _ = writeln!(c, "summary,postselection_probability,,,,{},{},", num(r.postselection_probability), num(0.0));
    for p in &r.probes {
        let kind = serde_json::to_value(p.probe.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let _ = writeln!(
            c,
            "probe,{},{},{},{},{},{}",
            p.label,
            p.probe.location,
            kind,
            p.probe.time.map(num).unwrap_or_default(),
            complex_cells(p.weak_value.value),
            num(p.overlap_factor)
        );
    }
    for d in &r.derived {
        let _ = writeln!(c, "derived,{},,path_projector,,{},", d.label, complex_cells(d.weak_value.value));
    }
    for res in &r.residuals {
        let _ = writeln!(c, "residual,{},,,,{},", res.name, complex_cells(res.value));
    }
    for e in &out.epsilon {
        let _ = writeln!(
            c,
            "epsilon,eps={:e},{},rotation,,{},{},{}",
            e.eps,
            e.location,
            num(e.relative_change),
            num(e.p_eps),
            num(e.first_order)
        );
    }
    c
}

// -------------------------------------------------------------- meter-sim

/// Parses a comma-separated coupling list.
pub fn parse_g_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse coupling '{t}' in --g")))
        })
        .collect()
}

/// Convergence report for the observable/couplings chosen by config and flags.
pub fn meter_report(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let s = &cfg.scenario;
    let obs = cfg.meter.observable.build(s)?;
    weak_limit_report(&s.pre_state()?, &s.post_state()?, &obs, &cfg.meter.g_list, cfg.meter.sigma)
}

fn cmd_meter(args: &MeterArgs) -> Result<Computed> {
    let mut cfg = load_config(&args.common, "three_box_default")?;
    if let Some(g) = &args.g {
        cfg.meter.g_list = parse_g_list(g)?;
    }
    if let Some(o) = &args.obs {
        cfg.meter.observable = o.parse::<ObservableName>()?;
    }
    let config_hash = cfg.config_hash();
    let report = meter_report(&cfg)?;

    let mut t = String::new();
    let _ = writeln!(
        t,
        "meter-sim '{}' observable {} sigma {} (config {config_hash})",
        cfg.scenario.name, cfg.meter.observable, report.sigma
    );
    let _ = writeln!(t, "target Re<O>_w = {:.15}   Im<O>_w = {:.15}", report.weak_value_re, report.weak_value_im);
    let _ = writeln!(t, "{:>10} {:>22} {:>12} {:>20}", "g", "shift/g", "|error|", "P(post)");
    for r in &report.rows {
        let _ = writeln!(t, "{:>10e} {:>22.15} {:>12} {:>20.15}", r.g, r.shift_over_g, short(r.abs_error), r.probability);
    }
    let _ = writeln!(
        t,
        "fitted order: {}   monotone: {}",
        report.fitted_order.map(|o| format!("{o:.4}")).unwrap_or_else(|| "none (errors at round-off)".into()),
        report.monotone
    );

    let mut csv = csv_header("meter/1", &cfg.scenario.name, &config_hash);
    let _ = writeln!(
        csv,
        "# observable={} sigma={} weak_value_re={} weak_value_im={}",
        cfg.meter.observable,
        report.sigma,
        num(report.weak_value_re),
        num(report.weak_value_im)
    );
    csv.push_str(&report.to_csv());

    Ok(Computed {
        table: t,
        csv,
        scenario: cfg.scenario.name.clone(),
        config_hash,
        code: EXIT_OK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Outcome {
        run(std::iter::once("weakspin").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(go(&["solve-angles", "--alpha", "abc"]).code, EXIT_CONFIG);
        assert_eq!(go(&["bogus"]).code, EXIT_CONFIG);
        assert_eq!(go(&["three-box", "--config", "/nonexistent.toml"]).code, EXIT_CONFIG);
        assert_eq!(go(&["meter-sim", "--g", "0.1,x"]).code, EXIT_CONFIG);
    }

    #[test]
    fn help_exits_0() {
        let o = go(&["--help"]);
        assert_eq!(o.code, EXIT_OK);
        assert!(o.stdout.contains("solve-angles"));
    }

    #[test]
    fn joint_row_first() {
        let o = go(&["solve-angles", "--joint"]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        assert!(o.stdout.contains("63.434949"));
        assert!(o.stdout.contains("153.434949"));
        let row = o.csv.lines().find(|l| l.contains(",joint,")).unwrap();
        assert!(row.starts_with("6.34349488"));
    }

    #[test]
    fn kind_mismatch_rejected() {
        let o = go(&["three-box", "--config", "cheshire_default"]);
        assert_eq!(o.code, EXIT_CONFIG);
    }

    #[test]
    fn g_list_parsing() {
        assert_eq!(parse_g_list("0.1, 1e-2").unwrap(), vec![0.1, 0.01]);
        assert!(parse_g_list("").is_err());
    }
}
