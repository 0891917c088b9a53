//! Command implementations behind the `sglab` binary.
//!
//! Every command returns a [`CommandOutput`]: an exit status, a JSON summary
//! and any CSV/JSON artifacts. Exit statuses: 0 all checks passed, 1 a check
//! failed, 2 invalid input (returned as `Err` and mapped by the caller).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generation::{
    counterexample_witness, heat_example, lumer_phillips_verdict, network_pairing_test, CheckReport,
};
use crate::grid::{Grid, GridFunction};
use crate::network::{
    network_resolvent, step_upwind, supnorm_l1, total_mass, EdgeState, Network, NetworkConfig, NetworkGenerator,
    NetworkSemigroup, SupNormL1,
};
use crate::operators::{
    laplacian_generator, left_shift_generator, right_translation_generator, Generator, OperatorLabel,
};
use crate::output::{fmt_f64, to_json};
use crate::samples::{edge_library, function_library, ramp, reference_bump, Sample};
use crate::semigroups::{
    euler_convergence, euler_csv, laplace_resolvent, RightTranslationSemigroup, Semigroup, ShiftSemigroup,
};
use crate::seminorms::{CompactSeminormFamily, WindowOrientation};
use crate::space::VectorState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Check,
    Euler,
    Counterexample,
    Heat,
    Simulate,
    Resolvent,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    Characteristics,
    Upwind,
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "characteristics" => Ok(Self::Characteristics),
            "upwind" => Ok(Self::Upwind),
            other => Err(Error::InvalidParameter(format!("unknown solver '{other}' (characteristics, upwind)"))),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Characteristics => "characteristics",
            Self::Upwind => "upwind",
        })
    }
}

/// Parameters of one run. `None` fields take per-command defaults.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub operator: Option<String>,
    pub network: Option<PathBuf>,
    pub lambdas: Vec<f64>,
    pub t: Option<f64>,
    pub m_ladder: Vec<usize>,
    pub n_cells: Option<usize>,
    pub n: Option<usize>,
    pub solver: Solver,
    pub cfl: f64,
    pub horizon: Option<f64>,
    pub steps: Option<usize>,
    pub frames: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            operator: None,
            network: None,
            lambdas: Vec::new(),
            t: None,
            m_ladder: Vec::new(),
            n_cells: None,
            n: None,
            solver: Solver::default(),
            cfl: 0.9,
            horizon: None,
            steps: None,
            frames: 10,
            out: None,
            seed: 42,
        }
    }

    fn lambdas_or(&self, default: &[f64]) -> Vec<f64> {
        if self.lambdas.is_empty() {
            default.to_vec()
        } else {
            self.lambdas.clone()
        }
    }

    fn operator(&self) -> Result<OperatorLabel> {
        self.operator.as_deref().ok_or_else(|| Error::InvalidParameter("--operator is required".into()))?.parse()
    }

    /// Rejects parameters outside the preconditions of the commands.
    pub fn validate(&self) -> Result<()> {
        for &l in &self.lambdas {
            crate::error::positive_lambda(l)?;
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::NonPositive { name: "t", value: t });
            }
        }
        if self.m_ladder.contains(&0) {
            return Err(Error::InvalidParameter("Euler ladder entries must be >= 1".into()));
        }
        if matches!(self.n_cells, Some(n) if n < 2) {
            return Err(Error::InvalidParameter("--grid needs at least 2 cells".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!("CFL number {} outside (0, 1]", self.cfl)));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::NonPositive { name: "horizon", value: h });
            }
        }
        if self.steps == Some(0) || self.frames == 0 {
            return Err(Error::InvalidParameter("--steps and --frames must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    Invalid = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn from_passed(passed: bool) -> Self {
        if passed {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub status: ExitStatus,
    /// JSON summary, also printed to stdout.
    pub summary: String,
    /// `(file name, contents)` written under `--out`.
    pub artifacts: Vec<(String, String)>,
}

impl CommandOutput {
    fn new(passed: bool, summary: String) -> Self {
        Self { status: ExitStatus::from_passed(passed), summary, artifacts: Vec::new() }
    }

    fn with(mut self, name: &str, contents: String) -> Self {
        self.artifacts.push((name.into(), contents));
        self
    }

    /// Write all artifacts under `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.artifacts {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

/// Validate, dispatch and (when `--out` is set) write artifacts.
pub fn run(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let out = match cfg.command {
        CommandKind::Check => cmd_check(cfg),
        CommandKind::Euler => cmd_euler(cfg),
        CommandKind::Counterexample => cmd_counterexample(cfg),
        CommandKind::Heat => cmd_heat(cfg),
        CommandKind::Simulate => cmd_simulate(cfg),
        CommandKind::Resolvent => cmd_resolvent(cfg),
    }?;
    if let Some(dir) = &cfg.out {
        out.write_to(dir)?;
    }
    Ok(out)
}

fn report_output(report: &CheckReport) -> CommandOutput {
    let text = to_json(report);
    CommandOutput::new(report.passed, text.clone()).with("report.json", text)
}

fn samples_with<S>(extra: Vec<Sample<S>>, library: Vec<Sample<S>>) -> Vec<Sample<S>> {
    extra.into_iter().chain(library).collect()
}

/// Lumer–Phillips verdict for a named operator or a network config.
pub fn cmd_check(cfg: &RunConfig) -> Result<CommandOutput> {
    if let Some(path) = &cfg.network {
        return check_network(cfg, path);
    }
    let report = match cfg.operator()? {
        OperatorLabel::LeftShift => {
            let grid = Grid::new(0.0, 10.0, cfg.n_cells.unwrap_or(2000))?;
            let a = left_shift_generator(grid)?;
            let family = CompactSeminormFamily::new(WindowOrientation::Right, 10)?;
            let samples = function_library(grid, 20, cfg.seed);
            let probes = function_library(grid, 5, cfg.seed.wrapping_add(1));
            lumer_phillips_verdict(&a, &family, &samples, &cfg.lambdas_or(&[0.1, 1.0, 10.0]), &probes)?
        }
        OperatorLabel::RightTranslation => {
            let grid = Grid::new(-10.0, 0.0, cfg.n_cells.unwrap_or(4000))?;
            let a = right_translation_generator(grid)?;
            let n = cfg.n.unwrap_or(2);
            let family = CompactSeminormFamily::new(WindowOrientation::Left, n.max(1))?;
            let resolved_ramp = a.resolvent(1.0, &ramp(grid, n as f64))?;
            let extra = vec![Sample { id: format!("R(1,A) ramp(n={n})"), f: resolved_ramp }];
            let samples = samples_with(extra, function_library(grid, 20, cfg.seed));
            let probes = function_library(grid, 5, cfg.seed.wrapping_add(1));
            lumer_phillips_verdict(&a, &family, &samples, &cfg.lambdas_or(&[1.0]), &probes)?
        }
        OperatorLabel::Laplacian => {
            let grid = Grid::new(-2.0, 2.0, cfg.n_cells.unwrap_or(4000))?;
            let a = laplacian_generator(grid);
            let family = CompactSeminormFamily::new(WindowOrientation::Symmetric, 2)?;
            let extra = vec![Sample { id: "x^2".into(), f: GridFunction::from_fn(grid, |x| x * x) }];
            let samples = samples_with(extra, function_library(grid, 8, cfg.seed));
            let probes = samples.clone();
            lumer_phillips_verdict(&a, &family, &samples, &cfg.lambdas_or(&[1.0]), &probes)?
        }
    };
    Ok(report_output(&report.param("seed", cfg.seed)))
}

fn load_network(path: &Path, n_cells: Option<usize>) -> Result<(NetworkConfig, Network)> {
    let mut config = NetworkConfig::load(path)?;
    if let Some(n) = n_cells {
        config.grid.n_cells = n;
    }
    let net = config.build()?;
    Ok((config, net))
}

fn check_network(cfg: &RunConfig, path: &Path) -> Result<CommandOutput> {
    let (_, net) = load_network(path, cfg.n_cells)?;
    let gen = NetworkGenerator::new(net.clone());
    // resolvent images lie in the domain by construction
    let raw = edge_library(&net, 8, cfg.seed);
    let mut samples = Vec::with_capacity(raw.len());
    for s in &raw {
        samples.push(Sample { id: format!("R(1,A) {}", s.id), f: gen.resolvent(1.0, &s.f)? });
    }
    let probes = edge_library(&net, 4, cfg.seed.wrapping_add(1));
    let mut report = lumer_phillips_verdict(&gen, &SupNormL1, &samples, &cfg.lambdas_or(&[1.0, 5.0]), &probes)?;

    let mut pairing =
        CheckReport::new("pairing", 0.0).param("functional", "signs of f_j at the first maximizer of sum_j |f_j|");
    let mut worst_tol = 0.0f64;
    let mut witnesses = Vec::new();
    for s in &samples {
        let (x, value, tol) = network_pairing_test(&gen, &s.f);
        worst_tol = worst_tol.max(tol);
        if value > tol {
            witnesses.push(crate::generation::Witness {
                input_id: format!("{} at x={}", s.id, fmt_f64(x)),
                lambda: 0.0,
                n: 1,
                lhs: value,
                rhs: 0.0,
            });
        }
    }
    pairing.tolerance = worst_tol;
    pairing.passed = witnesses.is_empty();
    pairing.witnesses = witnesses;
    if !pairing.passed {
        report.passed = false;
        report.verdict = Some("pairing test failed: <Af, chi> > 0 at a norming point".into());
        report.witnesses.extend(pairing.witnesses.iter().cloned());
    }
    report.notes.push(
        "the one-element family {sup-l1 norm} is used; pairing functional reported as a diagnostic sub-report".into(),
    );
    report.sub_reports.push(pairing);
    let semigroup = NetworkSemigroup::new(net);
    if !semigroup.is_contraction() {
        report.notes.push(
            "velocities are not uniform or q has positive values: the sup-l1 norm need not be contractive".into(),
        );
    }
    Ok(report_output(&report.param("network", path.display().to_string()).param("seed", cfg.seed)))
}

#[derive(Serialize)]
struct EulerSummary {
    operator: String,
    t: f64,
    n_cells: usize,
    ladder: Vec<usize>,
    p5_errors: Vec<f64>,
    f_norm: f64,
    monotone_with_5pct_slack: bool,
    final_error: f64,
    final_threshold: f64,
    passed: bool,
}

/// Euler ladder for the left shift against the exact translation.
pub fn cmd_euler(cfg: &RunConfig) -> Result<CommandOutput> {
    let op = cfg.operator.as_deref().unwrap_or("left_shift").parse::<OperatorLabel>()?;
    if op != OperatorLabel::LeftShift {
        return Err(Error::InvalidParameter(format!("euler supports left_shift only, got {op}")));
    }
    let n_cells = cfg.n_cells.unwrap_or(4000);
    let grid = Grid::new(0.0, 5.0, n_cells)?;
    let a = left_shift_generator(grid)?;
    let s = ShiftSemigroup::new(grid);
    let family = CompactSeminormFamily::new(WindowOrientation::Right, 5)?;
    let f = reference_bump(grid);
    let t = cfg.t.unwrap_or(1.0);
    let ladder = if cfg.m_ladder.is_empty() { vec![4, 16, 64, 256, 1024] } else { cfg.m_ladder.clone() };
    let rungs = euler_convergence(&a, &s, &family, t, &ladder, &f)?;
    let p5: Vec<f64> = rungs.iter().map(|r| r.errors[4]).collect();
    let monotone = p5.windows(2).all(|w| w[1] <= 1.05 * w[0]);
    let final_error = *p5.last().expect("non-empty ladder");
    let threshold = 0.02 * f.sup_norm();
    let passed = monotone && final_error <= threshold;
    let summary = to_json(&EulerSummary {
        operator: op.to_string(),
        t,
        n_cells,
        ladder,
        p5_errors: p5,
        f_norm: f.sup_norm(),
        monotone_with_5pct_slack: monotone,
        final_error,
        final_threshold: threshold,
        passed,
    });
    Ok(CommandOutput::new(passed, summary.clone()).with("euler.json", summary).with("euler.csv", euler_csv(&rungs)))
}

/// The ramp counterexample for the right translation.
pub fn cmd_counterexample(cfg: &RunConfig) -> Result<CommandOutput> {
    let n = cfg.n.unwrap_or(2);
    if n == 0 {
        return Err(Error::InvalidParameter("ramp index n must be >= 1".into()));
    }
    let lambda = cfg.lambdas_or(&[1.0])[0];
    let left = -(10.0f64.max(n as f64 + 8.0));
    let grid = Grid::new(left, 0.0, cfg.n_cells.unwrap_or(4000))?;
    let report = counterexample_witness(n, lambda, grid)?;
    let text = to_json(&report);
    Ok(CommandOutput::new(report.passed, text.clone()).with("counterexample.json", text))
}

/// `x²` against the Laplacian: succeeds when the failing inequality is reproduced.
pub fn cmd_heat(cfg: &RunConfig) -> Result<CommandOutput> {
    let lambda = cfg.lambdas_or(&[1.0])[0];
    let report = heat_example(lambda, cfg.n_cells.unwrap_or(4000))?;
    let text = to_json(&report);
    Ok(CommandOutput::new(report.reproduced && report.violated, text.clone()).with("heat.json", text))
}

#[derive(Serialize)]
struct Frame {
    t: f64,
    mass: f64,
    supnorm_l1: f64,
}

#[derive(Serialize)]
struct SimulationSummary {
    network: String,
    solver: Solver,
    t_max: f64,
    n_cells: usize,
    dt: Option<f64>,
    cfl: Option<f64>,
    frames: Vec<Frame>,
    max_relative_mass_drift: f64,
    mass_tolerance: Option<f64>,
    final_minus_initial: f64,
    passed: bool,
}

/// Evolve a network config and record `t,edge,x,u` frames.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<CommandOutput> {
    let path = cfg.network.as_deref().ok_or_else(|| Error::InvalidParameter("--network is required".into()))?;
    let (config, net) = load_network(path, cfg.n_cells)?;
    let f0 = config.initial_state(&net)?;
    let t_max = cfg.t.unwrap_or(2.0);
    let times: Vec<f64> = (0..=cfg.frames).map(|k| t_max * k as f64 / cfg.frames as f64).collect();

    let (states, dt) = match cfg.solver {
        Solver::Characteristics => {
            let sg = NetworkSemigroup::new(net.clone());
            let states = crate::parallel::map_slice(&times, |&t| sg.apply(t, &f0).map(|s| s.with_time(t)));
            (states.into_iter().collect::<Result<Vec<_>>>()?, None)
        }
        Solver::Upwind => {
            let dt = cfg.cfl * net.grid().spacing() / net.c_max();
            let mut states = vec![f0.clone()];
            let mut u = f0.clone();
            for &target in &times[1..] {
                while u.time() < target - 1e-12 * t_max.max(1.0) {
                    let step = dt.min(target - u.time());
                    u = step_upwind(&net, &u, step)?;
                }
                u = u.with_time(target);
                states.push(u.clone());
            }
            (states, Some(dt))
        }
    };

    let m0 = total_mass(&f0);
    let frames: Vec<Frame> =
        states.iter().map(|s| Frame { t: s.time(), mass: total_mass(s), supnorm_l1: supnorm_l1(s) }).collect();
    let scale = m0.abs().max(f64::MIN_POSITIVE);
    let drift = frames.iter().map(|f| (f.mass - m0).abs() / scale).fold(0.0, f64::max);
    let conservative = net.absorption().iter().all(|q| q.values().iter().all(|v| *v == 0.0));
    let mass_tolerance = conservative.then_some(match cfg.solver {
        Solver::Characteristics => 1e-12,
        Solver::Upwind => 1e-3,
    });
    let passed =
        mass_tolerance.is_none_or(|tol| drift <= tol || m0 == 0.0 && frames.iter().all(|f| f.mass.abs() <= tol));
    let last = states.last().expect("at least the initial frame");
    let summary = to_json(&SimulationSummary {
        network: path.display().to_string(),
        solver: cfg.solver,
        t_max,
        n_cells: net.grid().n_cells(),
        dt,
        cfl: dt.map(|d| d * net.c_max() / net.grid().spacing()),
        frames,
        max_relative_mass_drift: drift,
        mass_tolerance,
        final_minus_initial: last.distance(&f0),
        passed,
    });
    let mut csv = String::from("t,edge,x,u\n");
    for s in &states {
        csv.push_str(&s.csv_rows());
    }
    Ok(CommandOutput::new(passed, summary.clone()).with("simulate.json", summary).with("simulate.csv", csv))
}

/// Exact resolvent versus the Laplace transform of the semigroup.
pub fn cmd_resolvent(cfg: &RunConfig) -> Result<CommandOutput> {
    if let Some(path) = &cfg.network {
        return resolvent_network(cfg, path);
    }
    let op = cfg.operator()?;
    let horizon = cfg.horizon.unwrap_or(15.0);
    let steps = cfg.steps.unwrap_or(3000);
    let lambdas = cfg.lambdas_or(&[1.0]);
    let mut rows = Vec::new();
    let mut passed = true;
    let mut csv = String::from("lambda,x,exact,laplace\n");
    for &lambda in &lambdas {
        let (grid, exact, laplace) = match op {
            OperatorLabel::LeftShift => {
                let grid = Grid::new(0.0, 20.0, cfg.n_cells.unwrap_or(4000))?;
                let f = reference_bump(grid);
                let a = left_shift_generator(grid)?;
                (
                    grid,
                    a.resolvent(lambda, &f)?,
                    laplace_resolvent(&ShiftSemigroup::new(grid), lambda, &f, horizon, steps)?,
                )
            }
            OperatorLabel::RightTranslation => {
                let grid = Grid::new(-10.0, 0.0, cfg.n_cells.unwrap_or(2000))?;
                let f = GridFunction::from_fn(grid, |x| (0.7 * x).cos());
                let a = right_translation_generator(grid)?;
                let s = RightTranslationSemigroup::new(grid);
                (grid, a.resolvent(lambda, &f)?, laplace_resolvent(&s, lambda, &f, horizon, steps)?)
            }
            OperatorLabel::Laplacian => return Err(Error::ResolventUnavailable("laplacian".into())),
        };
        let (lo, hi) = if grid.a() < 0.0 { (-5.0, 0.0) } else { (0.0, 5.0) };
        let diff = exact.combine(1.0, &laplace.value, -1.0)?;
        let err = diff.window_sup(lo, hi)?;
        let ok = err <= 1e-3 + laplace.tail_bound;
        passed &= ok;
        rows.push(json!({
            "lambda": lambda,
            "window": [lo, hi],
            "window_error": err,
            "tail_bound": laplace.tail_bound,
            "tolerance": 1e-3,
            "passed": ok,
        }));
        for (i, x) in grid.nodes().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(lambda),
                fmt_f64(x),
                fmt_f64(exact.value(i)),
                fmt_f64(laplace.value.value(i))
            ));
        }
    }
    let summary = to_json(&json!({
        "operator": op.to_string(),
        "horizon": horizon,
        "steps": steps,
        "results": Value::Array(rows),
        "passed": passed,
    }));
    Ok(CommandOutput::new(passed, summary.clone()).with("resolvent.json", summary).with("resolvent.csv", csv))
}

fn resolvent_network(cfg: &RunConfig, path: &Path) -> Result<CommandOutput> {
    let (config, net) = load_network(path, cfg.n_cells)?;
    let g = match &config.initial {
        Some(_) => config.initial_state(&net)?,
        None => EdgeState::constant(&net, 1.0),
    };
    let contraction_expected = NetworkSemigroup::new(net.clone()).is_contraction();
    let horizon = cfg.horizon.unwrap_or(20.0);
    let steps = cfg.steps.unwrap_or(4000);
    let mut rows = Vec::new();
    let mut passed = true;
    let mut csv = String::from("lambda,edge,x,f\n");
    for &lambda in &cfg.lambdas_or(&[1.0]) {
        let sol = network_resolvent(&net, lambda, &g)?;
        let lhs = lambda * supnorm_l1(&sol.state);
        let rhs = supnorm_l1(&g);
        let contraction = lhs <= rhs * (1.0 + 1e-6);
        let boundary_ok = sol.boundary_residual <= 1e-9;
        let mut ok = boundary_ok && (contraction || !contraction_expected);
        let mut row = json!({
            "lambda": lambda,
            "condition": sol.condition,
            "warning": sol.warning,
            "boundary_residual": sol.boundary_residual,
            "equation_residual": sol.residual,
            "lambda_supnorm_f": lhs,
            "supnorm_g": rhs,
            "contraction_expected": contraction_expected,
            "contraction": contraction,
        });
        if cfg.horizon.is_some() || cfg.steps.is_some() {
            let lap = laplace_resolvent(&NetworkSemigroup::new(net.clone()), lambda, &g, horizon, steps)?;
            let err = lap.value.distance(&sol.state);
            row["laplace_error"] = json!(err);
            row["tail_bound"] = json!(lap.tail_bound);
            ok &= err <= 1e-3 + lap.tail_bound;
        }
        row["passed"] = json!(ok);
        passed &= ok;
        rows.push(row);
        for (j, e) in sol.state.edges().iter().enumerate() {
            for (x, v) in e.grid().nodes().zip(e.values()) {
                csv.push_str(&format!("{},{j},{},{}\n", fmt_f64(lambda), fmt_f64(x), fmt_f64(*v)));
            }
        }
    }
    let summary = to_json(&json!({
        "network": path.display().to_string(),
        "results": Value::Array(rows),
        "passed": passed,
    }));
    Ok(CommandOutput::new(passed, summary.clone()).with("resolvent.json", summary).with("resolvent.csv", csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: CommandKind) -> RunConfig {
        RunConfig::new(kind)
    }

    fn write_two_cycle(dir: &Path, c: [f64; 2], n_cells: usize) -> PathBuf {
        let p = dir.join("net.json");
        std::fs::write(&p, NetworkConfig::two_cycle_example(c, n_cells).to_json()).unwrap();
        p
    }

    #[test]
    fn check_exit_statuses() {
        let mut c = cfg(CommandKind::Check);
        c.operator = Some("left_shift".into());
        let out = run(&c).unwrap();
        assert_eq!(out.status, ExitStatus::Pass, "{}", out.summary);

        c.operator = Some("laplacian".into());
        let out = run(&c).unwrap();
        assert_eq!(out.status, ExitStatus::Fail);
        let v: Value = serde_json::from_str(&out.summary).unwrap();
        let w = v["witnesses"]
            .as_array()
            .unwrap()
            .iter()
            .find(|w| w["input_id"].as_str().unwrap().ends_with("x^2"))
            .unwrap();
        assert!((w["lhs"].as_f64().unwrap() - 2.0).abs() < 1e-6);
        assert!((w["rhs"].as_f64().unwrap() - 4.0).abs() < 1e-12);

        c.operator = Some("bogus".into());
        assert!(matches!(run(&c), Err(Error::UnknownOperator(_))));
    }

    #[test]
    fn right_translation_check_fails_on_resolved_ramp() {
        let mut c = cfg(CommandKind::Check);
        c.operator = Some("right_translation".into());
        c.n_cells = Some(2000);
        let out = run(&c).unwrap();
        assert_eq!(out.status, ExitStatus::Fail);
        assert!(out.summary.contains("R(1,A) ramp(n=2)"));
    }

    #[test]
    fn counterexample_and_heat() {
        let mut c = cfg(CommandKind::Counterexample);
        let out = run(&c).unwrap();
        assert_eq!(out.status, ExitStatus::Pass);
        let v: Value = serde_json::from_str(&out.summary).unwrap();
        assert_eq!(v["p_n_of_f"].as_f64(), Some(0.0));
        assert!((v["lower_bound"].as_f64().unwrap() - 0.0497871).abs() < 1e-7);
        c.n = Some(0);
        assert!(run(&c).is_err());

        let out = run(&cfg(CommandKind::Heat)).unwrap();
        assert_eq!(out.status, ExitStatus::Pass);
    }

    #[test]
    fn simulate_two_cycle_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_two_cycle(dir.path(), [1.0, 1.0], 200);
        let mut c = cfg(CommandKind::Simulate);
        c.network = Some(path.clone());
        c.t = Some(2.0);
        let a = run(&c).unwrap();
        assert_eq!(a.status, ExitStatus::Pass, "{}", a.summary);
        let v: Value = serde_json::from_str(&a.summary).unwrap();
        assert!(v["final_minus_initial"].as_f64().unwrap() <= 1e-9);
        let b = run(&c).unwrap();
        assert_eq!(a.artifacts, b.artifacts);
        assert!(a.artifacts[1].1.starts_with("t,edge,x,u\n"));

        c.solver = Solver::Upwind;
        c.t = Some(10.0);
        let u = run(&c).unwrap();
        assert_eq!(u.status, ExitStatus::Pass, "{}", u.summary);

        let sink = dir.path().join("sink.json");
        std::fs::write(&sink, r#"{"vertices": 2, "edges": [{"tail": 0, "head": 1}], "velocities": [1.0]}"#).unwrap();
        c.network = Some(sink);
        let err = run(&c).unwrap_err();
        assert!(err.to_string().contains("column sum ≠ 1"));
    }

    #[test]
    fn resolvent_commands() {
        let mut c = cfg(CommandKind::Resolvent);
        c.operator = Some("left_shift".into());
        c.n_cells = Some(2000);
        c.steps = Some(1500);
        let out = run(&c).unwrap();
        assert_eq!(out.status, ExitStatus::Pass, "{}", out.summary);

        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(CommandKind::Resolvent);
        c.network = Some(write_two_cycle(dir.path(), [1.0, 1.0], 200));
        c.lambdas = vec![1.0, 5.0];
        let out = run(&c).unwrap();
        assert_eq!(out.status, ExitStatus::Pass, "{}", out.summary);
    }

    #[test]
    fn network_check_verdict() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(CommandKind::Check);
        c.network = Some(write_two_cycle(dir.path(), [1.0, 1.0], 400));
        let out = run(&c).unwrap();
        assert_eq!(out.status, ExitStatus::Pass, "{}", out.summary);
        assert!(out.summary.contains("generator"));
    }

    #[test]
    fn invalid_parameters() {
        let mut c = cfg(CommandKind::Euler);
        c.m_ladder = vec![4, 0];
        assert!(run(&c).is_err());
        let mut c = cfg(CommandKind::Simulate);
        c.cfl = 1.5;
        assert!(run(&c).is_err());
        let mut c = cfg(CommandKind::Heat);
        c.lambdas = vec![-1.0];
        assert!(run(&c).is_err());
    }
}
