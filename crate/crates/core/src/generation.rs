//! Verification suite for generator hypotheses.
//!
//! Each check returns a [`CheckReport`]; a report passes exactly when it has
//! no witnesses. Inequalities `lhs >= rhs` (or `lhs <= rhs`) are tested with
//! slack `tolerance * (1 + |rhs|)`. Discretized operators use the
//! generator's own consistency tolerance (an `h²`-type bound); matrix and
//! resolvent bounds that hold in exact arithmetic use `1e-9`.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::network::{EdgeState, NetworkGenerator};
use crate::operators::{right_translation_resolvent, Generator, UpwindMatrix};
use crate::parallel;
use crate::samples::{ramp, random_probes, Sample};
use crate::seminorms::{CompactSeminormFamily, SeminormFamily, WindowOrientation};
use crate::space::VectorState;

/// Slack for claims that are exact up to rounding.
pub const EXACT_TOL: f64 = 1e-9;
/// Relative slack for the Hille–Yosida power bound.
pub const HY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Parameter {
    pub name: String,
    pub value: Value,
}

/// A failing input. `n = 0` refers to the norm rather than a seminorm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub input_id: String,
    pub lambda: f64,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub parameters: Vec<Parameter>,
    pub passed: bool,
    pub tolerance: f64,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sub_reports: Vec<CheckReport>,
}

impl CheckReport {
    pub fn new(check_name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            check_name: check_name.into(),
            parameters: Vec::new(),
            passed: true,
            tolerance,
            witnesses: Vec::new(),
            verdict: None,
            notes: Vec::new(),
            sub_reports: Vec::new(),
        }
    }

    pub fn param(mut self, name: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).expect("parameter serializes");
        self.parameters.push(Parameter { name: name.into(), value });
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn parameter(&self, name: &str) -> Option<&Value> {
        self.parameters.iter().find(|p| p.name == name).map(|p| &p.value)
    }

    fn with_witnesses(mut self, witnesses: Vec<Witness>) -> Self {
        self.passed = witnesses.is_empty();
        self.witnesses = witnesses;
        self
    }

    pub fn to_json(&self) -> String {
        crate::output::to_json(self)
    }
}

/// Sort reports by check name so parallel runs merge deterministically.
pub fn merge_reports(mut reports: Vec<CheckReport>) -> Vec<CheckReport> {
    reports.sort_by(|a, b| a.check_name.cmp(&b.check_name));
    reports
}

fn slack(tol: f64, rhs: f64) -> f64 {
    tol * (1.0 + rhs.abs())
}

fn ensure_domain<G: Generator>(g: &G, samples: &[Sample<G::State>]) -> Result<()> {
    match samples.iter().position(|s| !g.domain_check(&s.f)) {
        Some(index) => Err(Error::DomainViolation { generator: g.label().into(), index }),
        None => Ok(()),
    }
}

fn ensure_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("no λ values given".into()));
    }
    lambdas.iter().try_for_each(|&l| crate::error::positive_lambda(l))
}

fn discretization_tol<G: Generator>(g: &G, lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|&l| g.consistency_tolerance(l)).fold(EXACT_TOL, f64::max)
}

fn pairs(n_samples: usize, lambdas: &[f64]) -> Vec<(usize, f64)> {
    (0..n_samples).flat_map(|i| lambdas.iter().map(move |&l| (i, l))).collect()
}

/// `‖(λ - A) f‖ >= λ ‖f‖` for every sample and `λ`.
pub fn check_dissipative<G: Generator>(g: &G, samples: &[Sample<G::State>], lambdas: &[f64]) -> Result<CheckReport> {
    ensure_domain(g, samples)?;
    ensure_lambdas(lambdas)?;
    let tol = discretization_tol(g, lambdas);
    let witnesses = parallel::map_slice(&pairs(samples.len(), lambdas), |&(i, lambda)| {
        let f = &samples[i].f;
        let mut y = f.clone();
        y.scale_mut(lambda);
        y.axpy(-1.0, &g.apply(f));
        let (lhs, rhs) = (y.norm(), lambda * f.norm());
        (lhs < rhs - slack(tol, rhs)).then(|| Witness { input_id: samples[i].id.clone(), lambda, n: 0, lhs, rhs })
    });
    Ok(CheckReport::new("dissipative", tol)
        .param("generator", g.label())
        .param("lambdas", lambdas)
        .param("samples", samples.len())
        .param("inequality", "||(lambda - A) f|| >= lambda ||f||")
        .with_witnesses(witnesses.into_iter().flatten().collect()))
}

/// `p_n((λ - A) f) >= λ p_n(f)` for every `n`, sample and `λ`, plus the
/// norming residual when the largest window covers the grid.
pub fn check_bi_dissipative<G, F>(
    g: &G,
    family: &F,
    samples: &[Sample<G::State>],
    lambdas: &[f64],
) -> Result<CheckReport>
where
    G: Generator,
    F: SeminormFamily<G::State> + Sync,
{
    ensure_domain(g, samples)?;
    ensure_lambdas(lambdas)?;
    let tol = discretization_tol(g, lambdas);
    let rows = parallel::map_slice(&pairs(samples.len(), lambdas), |&(i, lambda)| -> Result<Vec<Witness>> {
        let f = &samples[i].f;
        let mut y = f.clone();
        y.scale_mut(lambda);
        y.axpy(-1.0, &g.apply(f));
        let mut out = Vec::new();
        for n in 1..=family.len() {
            let (lhs, rhs) = (family.eval(n, &y)?, lambda * family.eval(n, f)?);
            if lhs < rhs - slack(tol, rhs) {
                out.push(Witness { input_id: samples[i].id.clone(), lambda, n, lhs, rhs });
            }
        }
        Ok(out)
    });
    let mut witnesses = Vec::new();
    for r in rows {
        witnesses.extend(r?);
    }
    let mut covered = 0usize;
    for s in samples {
        if family.covers(&s.f) {
            covered += 1;
            let r = family.norming_residual(&s.f);
            if r > EXACT_TOL {
                witnesses.push(Witness {
                    input_id: format!("{}:norming", s.id),
                    lambda: 0.0,
                    n: family.len(),
                    lhs: r,
                    rhs: 0.0,
                });
            }
        }
    }
    Ok(CheckReport::new("bi_dissipative", tol)
        .param("generator", g.label())
        .param("family", family.name())
        .param("max_index", family.len())
        .param("lambdas", lambdas)
        .param("samples", samples.len())
        .param("norming_checked_on", covered)
        .param("inequality", "p_n((lambda - A) f) >= lambda p_n(f)")
        .with_witnesses(witnesses))
}

/// `λ p_n(R(λ, A) f) <= p_n(f)`.
pub fn check_resolvent_contraction<G, F>(
    g: &G,
    family: &F,
    samples: &[Sample<G::State>],
    lambdas: &[f64],
) -> Result<CheckReport>
where
    G: Generator,
    F: SeminormFamily<G::State> + Sync,
{
    if !g.has_resolvent() {
        return Err(Error::ResolventUnavailable(g.label().into()));
    }
    ensure_lambdas(lambdas)?;
    let rows = parallel::map_slice(&pairs(samples.len(), lambdas), |&(i, lambda)| -> Result<Vec<Witness>> {
        let f = &samples[i].f;
        let r = g.resolvent(lambda, f)?;
        let mut out = Vec::new();
        for n in 1..=family.len() {
            let (lhs, rhs) = (lambda * family.eval(n, &r)?, family.eval(n, f)?);
            if lhs > rhs + slack(EXACT_TOL, rhs) {
                out.push(Witness { input_id: samples[i].id.clone(), lambda, n, lhs, rhs });
            }
        }
        Ok(out)
    });
    let mut witnesses = Vec::new();
    for r in rows {
        witnesses.extend(r?);
    }
    Ok(CheckReport::new("resolvent_contraction", EXACT_TOL)
        .param("generator", g.label())
        .param("family", family.name())
        .param("max_index", family.len())
        .param("lambdas", lambdas)
        .param("samples", samples.len())
        .param("inequality", "lambda p_n(R(lambda, A) f) <= p_n(f)")
        .with_witnesses(witnesses))
}

/// Induced sup-norm (max absolute row sum).
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `‖(λ - A_h)^{-k}‖_∞ <= λ^{-k} (1 + 1e-10)` for `k = 1..=n_max`.
pub fn check_hy_powers(m: &UpwindMatrix, lambdas: &[f64], n_max: usize) -> Result<CheckReport> {
    ensure_lambdas(lambdas)?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    let a = m.to_dense();
    let size = m.size();
    let id = format!("upwind(size={size},h={})", m.spacing());
    let rows = parallel::map_slice(lambdas, |&lambda| -> Result<(Vec<Witness>, f64)> {
        let shifted = DMatrix::identity(size, size) * lambda - &a;
        let r = shifted.try_inverse().ok_or_else(|| Error::Singular(format!("lambda I - A_h at lambda = {lambda}")))?;
        let mut power = r.clone();
        let mut out = Vec::new();
        let mut worst = 0.0f64;
        for k in 1..=n_max {
            if k > 1 {
                power = &power * &r;
            }
            let (lhs, rhs) = (inf_norm(&power), lambda.powi(-(k as i32)));
            worst = worst.max(lhs / rhs);
            if lhs > rhs * (1.0 + HY_TOL) {
                out.push(Witness { input_id: id.clone(), lambda, n: k, lhs, rhs });
            }
        }
        Ok((out, worst))
    });
    let mut witnesses = Vec::new();
    let mut worst = 0.0f64;
    for r in rows {
        let (w, ratio) = r?;
        witnesses.extend(w);
        worst = worst.max(ratio);
    }
    Ok(CheckReport::new("hille_yosida_powers", HY_TOL)
        .param("matrix", id)
        .param("lambdas", lambdas)
        .param("n_max", n_max)
        .param("max_ratio_to_bound", worst)
        .param("inequality", "||R(lambda)^k||_inf <= lambda^-k")
        .with_witnesses(witnesses))
}

/// `φ = sign · δ_location`, a norm-one functional on grid functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointFunctional {
    pub location: f64,
    pub sign: f64,
}

impl PointFunctional {
    pub fn pair(&self, f: &GridFunction) -> f64 {
        self.sign * f.interpolate(self.location).unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct SubdifferentialOutcome {
    pub functional: PointFunctional,
    /// `⟨Af, φ⟩`
    pub pairing: f64,
    pub report: CheckReport,
}

/// Number of random probes used to test `φ ∈ J(f, p_n)`.
pub const J_PROBES: usize = 100;

/// Largest second difference divided by `h`: how far a central first
/// derivative can be from zero at a discrete maximizer.
fn maximizer_slack(values: &[f64], h: f64) -> f64 {
    values.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs()).fold(0.0, f64::max) / h
}

/// Builds `φ ∈ J(f, p_n)` at the first node (increasing `x`) where `|f|`
/// attains `p_n(f)` and checks `⟨Af, φ⟩ <= tol`.
///
/// The tolerance is first order in `h` because the discrete maximizer can
/// sit up to a cell away from the continuum one.
pub fn subdifferential_test<G>(
    g: &G,
    family: &CompactSeminormFamily,
    f: &GridFunction,
    n: usize,
    seed: u64,
) -> Result<SubdifferentialOutcome>
where
    G: Generator<State = GridFunction>,
{
    if !g.domain_check(f) {
        return Err(Error::DomainViolation { generator: g.label().into(), index: 0 });
    }
    let p = family.eval_pn(n, f)?;
    if p == 0.0 {
        return Err(Error::DegenerateSeminorm(n));
    }
    let grid = *f.grid();
    let (lo, hi) = family.window(n);
    let (i0, i1) = grid.node_range(lo, hi).expect("window met the grid");
    let idx = (i0..=i1).find(|&i| f.value(i).abs() == p).expect("sup attained at a node");
    let functional = PointFunctional { location: grid.node(idx), sign: f.value(idx).signum() };

    let mut witnesses = Vec::new();
    let attained = functional.pair(f);
    if (attained - p).abs() > EXACT_TOL * (1.0 + p) {
        witnesses.push(Witness { input_id: "membership:<f,phi>=p_n(f)".into(), lambda: 0.0, n, lhs: attained, rhs: p });
    }
    for (k, y) in random_probes(grid, J_PROBES, seed).iter().enumerate() {
        let (lhs, rhs) = (functional.pair(y).abs(), family.eval_pn(n, y)?);
        if lhs > rhs + EXACT_TOL || rhs > y.sup_norm() {
            witnesses.push(Witness { input_id: format!("membership:probe{k}"), lambda: 0.0, n, lhs, rhs });
        }
    }
    let tol = g.consistency_tolerance(1.0) + maximizer_slack(f.values(), grid.spacing());
    let pairing = functional.pair(&g.apply(f));
    if pairing > tol {
        witnesses.push(Witness { input_id: "pairing:<Af,phi><=0".into(), lambda: 0.0, n, lhs: pairing, rhs: 0.0 });
    }
    let report = CheckReport::new("subdifferential", tol)
        .param("generator", g.label())
        .param("family", family.name())
        .param("n", n)
        .param("location", functional.location)
        .param("sign", functional.sign)
        .param("pairing", pairing)
        .param("probes", J_PROBES)
        .param("seed", seed)
        .with_witnesses(witnesses);
    Ok(SubdifferentialOutcome { functional, pairing, report })
}

/// The functional `χ` for the sup-ℓ¹ norm: signs of `f_j(x*)` at the first
/// node `x*` where `Σ_j |f_j|` is maximal up to rounding. Returns
/// `(x*, ⟨Af, χ⟩, tol)`.
pub fn network_pairing_test(g: &NetworkGenerator, f: &EdgeState) -> (f64, f64, f64) {
    let grid = *f.grid();
    let sums: Vec<f64> = (0..grid.num_nodes()).map(|i| f.edges().iter().map(|u| u.value(i).abs()).sum()).collect();
    let max = sums.iter().copied().fold(0.0, f64::max);
    // the vertex condition ties x = 1 with x = 0 when the max sits at a tail
    let idx = sums.iter().position(|s| *s >= max * (1.0 - 1e-12)).unwrap_or(0);
    let af = g.apply(f);
    let pairing = f.edges().iter().zip(af.edges()).map(|(u, a)| u.value(idx).signum() * a.value(idx)).sum();
    let c_max = g.network().c_max();
    let slack = f.edges().iter().map(|u| maximizer_slack(u.values(), grid.spacing())).fold(0.0, f64::max);
    let tol = g.consistency_tolerance(1.0) + c_max * slack * f.n_edges() as f64;
    (grid.node(idx), pairing, tol)
}

/// Resolves each probe and checks domain membership and the equation
/// residual `‖λ f - A f - g‖ <= tol (1 + ‖g‖)`. Passing means the probe
/// passed; it certifies nothing beyond the probe set.
pub fn surjectivity_probe<G: Generator>(g: &G, probes: &[Sample<G::State>], lambdas: &[f64]) -> Result<CheckReport> {
    ensure_lambdas(lambdas)?;
    let tol = discretization_tol(g, lambdas);
    let mut report = CheckReport::new("surjectivity_probe", tol)
        .param("generator", g.label())
        .param("lambdas", lambdas)
        .param("probes", probes.len());
    if !g.has_resolvent() {
        let w = Witness { input_id: "resolvent unavailable".into(), lambda: lambdas[0], n: 0, lhs: 0.0, rhs: 0.0 };
        return Ok(report.note("no resolvent is offered, so λ - A cannot be probed").with_witnesses(vec![w]));
    }
    let rows = parallel::map_slice(&pairs(probes.len(), lambdas), |&(i, lambda)| -> Result<Option<Witness>> {
        let rhs_g = &probes[i].f;
        let f = g.resolvent(lambda, rhs_g)?;
        let mut r = f.clone();
        r.scale_mut(lambda);
        r.axpy(-1.0, &g.apply(&f));
        r.axpy(-1.0, rhs_g);
        let (lhs, bound) = (r.norm(), tol * (1.0 + rhs_g.norm()));
        let in_domain = g.domain_check(&f);
        Ok((!in_domain || lhs > bound).then(|| Witness {
            input_id: if in_domain { probes[i].id.clone() } else { format!("{}:outside domain", probes[i].id) },
            lambda,
            n: 0,
            lhs,
            rhs: bound,
        }))
    });
    let mut witnesses = Vec::new();
    for r in rows {
        witnesses.extend(r?);
    }
    report = report.with_witnesses(witnesses);
    if report.passed {
        report.notes.push("probe passed".into());
    }
    Ok(report)
}

/// Bi-dissipativity plus a surjectivity probe, aggregated into one verdict.
pub fn lumer_phillips_verdict<G, F>(
    g: &G,
    family: &F,
    samples: &[Sample<G::State>],
    lambdas: &[f64],
    surjectivity_probe_set: &[Sample<G::State>],
) -> Result<CheckReport>
where
    G: Generator,
    F: SeminormFamily<G::State> + Sync,
{
    let bi = check_bi_dissipative(g, family, samples, lambdas)?;
    let probe = surjectivity_probe(g, surjectivity_probe_set, lambdas)?;
    let verdict = match (bi.passed, probe.passed) {
        (true, true) => "generator: bi-dissipative and surjectivity probe passed",
        (false, _) => "not bi-dissipative for this family",
        (true, false) => "bi-dissipative, but the surjectivity probe failed",
    };
    let mut witnesses = Vec::new();
    for sub in [&bi, &probe] {
        witnesses.extend(
            sub.witnesses
                .iter()
                .map(|w| Witness { input_id: format!("{}/{}", sub.check_name, w.input_id), ..w.clone() }),
        );
    }
    let mut report = CheckReport::new("lumer_phillips", bi.tolerance.max(probe.tolerance))
        .param("generator", g.label())
        .param("family", family.name())
        .param("lambdas", lambdas)
        .with_witnesses(witnesses);
    report.verdict = Some(verdict.into());
    report.sub_reports = vec![bi, probe];
    Ok(report)
}

/// Values of the ramp counterexample for the right translation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub lambda: f64,
    pub p_n_of_f: f64,
    #[serde(rename = "p_1_of_Rf")]
    pub p_1_of_rf: f64,
    pub lower_bound: f64,
    pub passed: bool,
}

/// The ramp vanishes on `[-n, 0]`, yet its resolvent image does not vanish
/// on `[-1, 0]`: no chain `p_1 <= C q <= K p_n` can carry the resolvent
/// estimate. `lower_bound = e^{-λ(n+1)} / λ`.
pub fn counterexample_witness(n: usize, lambda: f64, grid: Grid) -> Result<CounterexampleReport> {
    crate::error::positive_lambda(lambda)?;
    if n == 0 {
        return Err(Error::InvalidParameter("ramp index n must be >= 1".into()));
    }
    if grid.b() != 0.0 || grid.a() > -(n as f64) - 1.0 {
        return Err(Error::InvalidGrid(format!("ramp needs a grid [a, 0] with a <= {}", -(n as f64) - 1.0)));
    }
    let f = ramp(grid, n as f64);
    let left = CompactSeminormFamily::new(WindowOrientation::Left, n)?;
    let p_n_of_f = left.eval_pn(n, &f)?;
    let rf = right_translation_resolvent(lambda, &f)?;
    let p_1_of_rf = left.eval_pn(1, &rf)?;
    let lower_bound = (-lambda * (n as f64 + 1.0)).exp() / lambda;
    let passed = p_n_of_f == 0.0 && p_1_of_rf > 0.0 && p_1_of_rf >= lower_bound - 1e-6;
    Ok(CounterexampleReport { n, lambda, p_n_of_f, p_1_of_rf, lower_bound, passed })
}

/// `f = x²` on `[-2, 2]` against the Laplacian with symmetric windows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatReport {
    pub n: usize,
    pub lambda: f64,
    pub n_cells: usize,
    /// `p_n((λ - A) f)`
    pub lhs: f64,
    /// `λ p_n(f)`
    pub rhs: f64,
    pub lhs_expected: f64,
    pub rhs_expected: f64,
    /// `lhs < rhs`: the bi-dissipativity inequality fails.
    pub violated: bool,
    pub reproduced: bool,
}

pub fn heat_example(lambda: f64, n_cells: usize) -> Result<HeatReport> {
    crate::error::positive_lambda(lambda)?;
    let n = 2;
    let grid = Grid::new(-2.0, 2.0, n_cells)?;
    let f = GridFunction::from_fn(grid, |x| x * x);
    let family = CompactSeminormFamily::new(WindowOrientation::Symmetric, n)?;
    let y = f.combine(lambda, &f.second_derivative(), -1.0)?;
    let lhs = family.eval_pn(n, &y)?;
    let rhs = lambda * family.eval_pn(n, &f)?;
    // sup over [-2, 2] of |λ x² - 2| and λ sup x²
    let lhs_expected = (4.0 * lambda - 2.0).abs().max(2.0);
    let rhs_expected = 4.0 * lambda;
    let reproduced = (lhs - lhs_expected).abs() <= 1e-6 && (rhs - rhs_expected).abs() <= 1e-12;
    Ok(HeatReport { n, lambda, n_cells, lhs, rhs, lhs_expected, rhs_expected, violated: lhs < rhs, reproduced })
}
