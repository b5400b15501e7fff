//! Reproducible experiment sweeps and their reports.
//!
//! Every run is deterministic: sup norms are taken on fixed grids, wall
//! times are recorded only when `timing` is switched on, and the report
//! carries a SHA-256 hash of the serialized configuration.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::analysis::{fit_geometric_rate_scaled, pole_rho, CompactModel, RateFit};
use crate::error::{Error, Result};
use crate::functionals::{Affine, TestFunction};
use crate::poly::{Polynomial, C64};
use crate::projector::{newton_product, NewtonStructuredProjector};
use crate::zoo::{kergin, lagrange, NodeFamily, ZooSpec};

/// Smallest accepted grid resolution per dimension.
pub const MIN_GRID: usize = 64;

fn default_grid() -> usize {
    MIN_GRID
}

/// A convergence sweep: `projector` is rebuilt at every listed degree and
/// applied to `function`; errors are measured on `compact` sampled at
/// resolution `grid`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub projector: ZooSpec,
    pub function: TestFunction,
    pub compact: CompactModel,
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub degrees: Vec<usize>,
    /// Recorded in the metadata; the sweeps use no randomness.
    #[serde(default)]
    pub seed: u64,
    /// Build once at the largest degree and truncate, which is valid when
    /// the node family does not depend on the degree (Leja, explicit nodes).
    #[serde(default)]
    pub nested: bool,
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        check_degrees(&self.degrees)?;
        check_grid(self.grid)?;
        if self.function.min_nvars() > self.compact.dim() {
            return Err(Error::DimensionMismatch {
                what: "function vs compact model",
                expected: self.compact.dim(),
                found: self.function.min_nvars(),
            });
        }
        Ok(())
    }
}

fn check_degrees(degrees: &[usize]) -> Result<()> {
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("degrees must be strictly increasing".into()));
    }
    Ok(())
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < MIN_GRID {
        return Err(Error::InvalidArgument(format!("grid resolution {grid} is below {MIN_GRID}")));
    }
    Ok(())
}

/// SHA-256 of the compact JSON form, as lowercase hex.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub d: usize,
    pub sup_error: f64,
    /// `sup_error^(1/d)`.
    pub root_error: f64,
    /// Zero unless timing was requested.
    pub seconds: f64,
}

impl DegreeRecord {
    fn new(d: usize, sup_error: f64, seconds: f64) -> Self {
        let root_error = if d == 0 { sup_error } else { sup_error.powf(1.0 / d as f64) };
        DegreeRecord { d, sup_error, root_error, seconds }
    }
}

/// Errors of one function across the degree sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub records: Vec<DegreeRecord>,
    pub fit: Option<RateFit>,
    /// `1 / rho(f)` when it is known in closed form; zero for entire functions.
    pub reference_rate: Option<f64>,
}

impl Series {
    /// `scale` is the sup norm of the function, for the rounding floor.
    fn new(label: impl Into<String>, records: Vec<DegreeRecord>, scale: f64, reference_rate: Option<f64>) -> Result<Self> {
        let degrees: Vec<usize> = records.iter().map(|r| r.d).collect();
        let errors: Vec<f64> = records.iter().map(|r| r.sup_error).collect();
        let fit = if records.len() >= 2 { Some(fit_geometric_rate_scaled(&degrees, &errors, scale)?) } else { None };
        Ok(Series { label: label.into(), records, fit, reference_rate })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub d: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
    pub skipped: Vec<Skipped>,
    pub checks: Vec<Check>,
    /// Experiment-specific quantities.
    pub details: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub series: Vec<Series>,
    pub metadata: Metadata,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.metadata.checks.iter().all(|c| c.passed)
    }

    pub fn primary(&self) -> Option<&Series> {
        self.series.first()
    }
}

fn sup_error(p: &Polynomial, grid: &[Vec<C64>], values: &[C64]) -> f64 {
    grid.iter().zip(values).map(|(x, v)| (p.eval(x) - v).norm()).fold(0.0, f64::max)
}

fn function_values(f: &TestFunction, grid: &[Vec<C64>]) -> Result<Vec<C64>> {
    grid.iter().map(|x| f.eval(x)).collect()
}

fn sup_norm(values: &[C64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn pole_check(f: &TestFunction, k: &CompactModel) -> Result<()> {
    match f.pole_forms().into_iter().find(|l| k.meets_zero_set(l)) {
        Some(l) => Err(Error::Pole { locus: l.describe() }),
        None => Ok(()),
    }
}

fn elapsed(start: Instant, timing: bool) -> f64 {
    if timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    }
}

/// Sup error of `Pi_d f` on the sampled compact for every configured degree.
///
/// Degrees whose projector fails the conditioning check are skipped and
/// listed in the metadata. The report checks that the tail log-error slope
/// is negative and, when `rho(f)` is known, that the fitted rate is within
/// 10% of `1 / rho(f)`.
pub fn convergence_run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    pole_check(&cfg.function, &cfg.compact)?;
    let wall = Instant::now();
    let grid = cfg.compact.sample(cfg.grid);
    let values = function_values(&cfg.function, &grid)?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();

    if cfg.nested && !cfg.degrees.is_empty() {
        let dmax = *cfg.degrees.last().expect("nonempty");
        let start = Instant::now();
        let mut top = dmax;
        let p = loop {
            match cfg.projector.with_degree(top).build() {
                Err(Error::NestedUnisolvenceFailure { level, .. }) if level >= 1 => top = level - 1,
                other => break other?,
            }
        };
        check_projector_dim(&p, &cfg.compact)?;
        let levels = p.apply_levels(&cfg.function)?;
        let build = elapsed(start, cfg.timing);
        for &d in &cfg.degrees {
            if d > top {
                skipped.push(Skipped { d, reason: format!("conditioning check fails above degree {top}") });
                continue;
            }
            let start = Instant::now();
            let e = sup_error(&levels[d], &grid, &values);
            records.push(DegreeRecord::new(d, e, build + elapsed(start, cfg.timing)));
        }
    } else {
        for &d in &cfg.degrees {
            let start = Instant::now();
            let p = match cfg.projector.with_degree(d).build() {
                Err(e @ Error::NestedUnisolvenceFailure { .. }) => {
                    skipped.push(Skipped { d, reason: e.to_string() });
                    continue;
                }
                other => other?,
            };
            check_projector_dim(&p, &cfg.compact)?;
            let e = sup_error(&p.apply(&cfg.function)?, &grid, &values);
            records.push(DegreeRecord::new(d, e, elapsed(start, cfg.timing)));
        }
    }

    let reference = pole_rho(&cfg.function, &cfg.compact).map(|rho| if rho.is_finite() { 1.0 / rho } else { 0.0 });
    let series = Series::new("f", records, sup_norm(&values), reference)?;
    let checks = convergence_checks(&series);
    Ok(ExperimentReport {
        metadata: Metadata {
            experiment: "converge".into(),
            config_hash: config_hash(cfg)?,
            seed: cfg.seed,
            grid: Some(cfg.grid),
            wall_seconds: cfg.timing.then(|| wall.elapsed().as_secs_f64()),
            skipped,
            checks,
            details: serde_json::json!({ "grid_points": grid.len() }),
        },
        series: vec![series],
    })
}

fn check_projector_dim(p: &NewtonStructuredProjector, k: &CompactModel) -> Result<()> {
    if p.nvars() != k.dim() {
        return Err(Error::DimensionMismatch { what: "projector vs compact model", expected: k.dim(), found: p.nvars() });
    }
    Ok(())
}

fn convergence_checks(s: &Series) -> Vec<Check> {
    let mut checks = Vec::new();
    let Some(fit) = &s.fit else { return checks };
    checks.push(Check::new("tail_slope_negative", fit.rate < 1.0, format!("fitted rate {:.6}", fit.rate)));
    if let Some(r) = s.reference_rate.filter(|&r| r > 0.0) {
        let ratio = fit.rate / r;
        checks.push(Check::new(
            "rate_matches_rho",
            (0.9..=1.1).contains(&ratio),
            format!("fitted {:.6}, expected {:.6}, ratio {:.4}", fit.rate, r, ratio),
        ));
    }
    checks
}

/// Largest degree accepted by [`cylinder_run`].
pub const CYLINDER_MAX_DEGREE: usize = 12;

/// Kergin at circle Leja points in the real plane times Lagrange at the
/// distinct real parts of those points, on the unit disk times `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderConfig {
    pub degrees: Vec<usize>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Functions of `(x, y, t)`; the default pair is `exp(x + y + t)` and
    /// `1 / (x + y/2 + t - 3)`.
    #[serde(default)]
    pub functions: Option<Vec<TestFunction>>,
    /// Bound checked for the first function's error at the largest degree.
    #[serde(default = "default_final_error")]
    pub final_error_max: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub timing: bool,
}

fn default_final_error() -> f64 {
    1e-3
}

impl CylinderConfig {
    pub fn new(degrees: Vec<usize>) -> Self {
        CylinderConfig { degrees, grid: MIN_GRID, functions: None, final_error_max: default_final_error(), seed: 0, timing: false }
    }

    fn functions(&self) -> Vec<TestFunction> {
        self.functions.clone().unwrap_or_else(|| {
            vec![
                TestFunction::Exp(Affine::real(&[1.0, 1.0, 1.0], 0.0)),
                TestFunction::Recip(Affine::real(&[1.0, 0.5, 1.0], -3.0)),
            ]
        })
    }
}

/// One product node `(a_i, b_j)` with `a_i = (x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderNode {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// `(x, y, t)` samples: the disk sampled as a complex set and read as
/// `(Re, Im)`, times Chebyshev–Lobatto points in `t`.
pub fn cylinder_grid(res: usize) -> Vec<Vec<C64>> {
    let disk = CompactModel::Disk.sample(res);
    let line = CompactModel::Interval.sample(res);
    let mut out = Vec::with_capacity(disk.len() * line.len());
    for z in &disk {
        for t in &line {
            out.push(vec![C64::new(z[0].re, 0.0), C64::new(z[0].im, 0.0), t[0]]);
        }
    }
    out
}

/// The Kergin and Lagrange node sequences of the cylinder projector at
/// degree `d`.
pub fn cylinder_nodes(d: usize) -> Result<(Vec<Vec<C64>>, Vec<C64>)> {
    let a = NodeFamily::Leja.generate(d + 1)?.to_real_plane()?.points;
    let b = NodeFamily::RLeja.generate(d + 1)?.scalars();
    Ok((a, b))
}

/// Builds the cylinder projector at the largest degree and truncates it.
/// Every degree gets the sup error of each function on the cylinder grid
/// and the largest residual at the product nodes `i + j <= d`.
pub fn cylinder_run(cfg: &CylinderConfig) -> Result<(ExperimentReport, Vec<CylinderNode>)> {
    check_degrees(&cfg.degrees)?;
    check_grid(cfg.grid)?;
    let dmax = cfg.degrees.last().copied().unwrap_or(0);
    if dmax > CYLINDER_MAX_DEGREE {
        return Err(Error::InvalidArgument(format!("cylinder degrees are capped at {CYLINDER_MAX_DEGREE}, got {dmax}")));
    }
    let wall = Instant::now();
    let (a, b) = cylinder_nodes(dmax)?;
    let start = Instant::now();
    let p = newton_product(&kergin(&a, dmax)?, &lagrange(&b, dmax)?)?;
    let build = elapsed(start, cfg.timing);

    let grid = cylinder_grid(cfg.grid);
    let node_point = |i: usize, j: usize| vec![a[i][0], a[i][1], b[j]];
    let mut series = Vec::new();
    let mut residuals: Vec<Vec<f64>> = Vec::new();
    for (idx, f) in cfg.functions().iter().enumerate() {
        if let Some(l) = f.pole_forms().into_iter().find(|l| grid.iter().any(|x| l.eval(x).norm() < 1e-9)) {
            return Err(Error::Pole { locus: l.describe() });
        }
        let start = Instant::now();
        let levels = p.apply_levels(f)?;
        let apply = elapsed(start, cfg.timing);
        let values = function_values(f, &grid)?;
        let mut records = Vec::new();
        let mut res = vec![0.0f64; cfg.degrees.len()];
        for (k, &d) in cfg.degrees.iter().enumerate() {
            let start = Instant::now();
            let e = sup_error(&levels[d], &grid, &values);
            for i in 0..=d {
                for j in 0..=d - i {
                    let z = node_point(i, j);
                    let r = (levels[d].eval(&z) - f.eval(&z)?).norm() / f.eval(&z)?.norm().max(1.0);
                    res[k] = res[k].max(r);
                }
            }
            let secs = if cfg.timing { build + apply + elapsed(start, true) } else { 0.0 };
            records.push(DegreeRecord::new(d, e, secs));
        }
        residuals.push(res);
        series.push(Series::new(format!("f{idx}"), records, sup_norm(&values), None)?);
    }

    let mut nodes = Vec::new();
    for i in 0..=dmax {
        for j in 0..=dmax - i {
            nodes.push(CylinderNode { i, j, x: a[i][0].re, y: a[i][1].re, t: b[j].re });
        }
    }

    let mut checks = Vec::new();
    if let Some(s) = series.first() {
        let e: Vec<f64> = s.records.iter().filter(|r| r.d >= 2).map(|r| r.sup_error).collect();
        checks.push(Check::new(
            "strictly_decreasing",
            e.windows(2).all(|w| w[1] < w[0]),
            format!("errors {e:?}"),
        ));
        if let Some(last) = s.records.last() {
            checks.push(Check::new("final_error", last.sup_error < cfg.final_error_max, format!("{:.3e} at d = {}", last.sup_error, last.d)));
        }
    }
    // the simplex rules limit residuals for functions with nearby poles, so
    // only the first function is gated
    if let Some(r) = residuals.first() {
        let worst = r.iter().cloned().fold(0.0, f64::max);
        checks.push(Check::new("node_residuals", worst < 1e-8, format!("max residual {worst:.3e}")));
    }
    let count_ok = nodes.len() == (dmax + 1) * (dmax + 2) / 2;
    checks.push(Check::new("node_count", count_ok, format!("{} nodes at d = {dmax}", nodes.len())));

    let report = ExperimentReport {
        metadata: Metadata {
            experiment: "cylinder".into(),
            config_hash: config_hash(cfg)?,
            seed: cfg.seed,
            grid: Some(cfg.grid),
            wall_seconds: cfg.timing.then(|| wall.elapsed().as_secs_f64()),
            skipped: Vec::new(),
            checks,
            details: serde_json::json!({
                "functions": cfg.functions().iter().map(|f| f.to_json()).collect::<Vec<_>>(),
                "node_residuals": residuals,
                "grid_points": grid.len(),
            }),
        },
        series,
    };
    Ok((report, nodes))
}

/// Largest degree accepted by [`polya_run`].
pub const POLYA_MAX_DEGREE: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyaConfig {
    pub lambda: f64,
    pub dmax: usize,
    /// Samples of `[0, 1]` for the sup norms.
    #[serde(default = "default_polya_grid")]
    pub grid: usize,
    /// Also bisect the verdict between these exponents.
    #[serde(default)]
    pub bisect: Option<Bisection>,
    #[serde(default)]
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bisection {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

fn default_polya_grid() -> usize {
    1000
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converge,
    Diverge,
}

/// Newton series of `exp(lambda x)` at the nodes `0, 1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyaOutcome {
    pub lambda: f64,
    /// `ln |f[0, ..., k]|`.
    pub log_coefficients: Vec<f64>,
    /// `ln sup_[0,1] |c_k (x)(x-1)...(x-k+1)|`.
    pub log_term_norms: Vec<f64>,
    /// Extrapolated limit of successive term-norm ratios.
    pub ratio: f64,
    /// `|exp(lambda) - 1|`.
    pub driving_ratio: f64,
    pub verdict: Verdict,
}

/// `ln k!` for `k = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Interior sample points of `[0, 1]`.
fn unit_samples(m: usize) -> Vec<f64> {
    (1..m).map(|i| i as f64 / m as f64).collect()
}

/// Term norms of the Newton series, kept in logarithms.
///
/// At unit-spaced nodes the divided differences of `exp(lambda x)` are
/// forward differences over `k!`, and the `k`-th forward difference at 0 is
/// `(exp(lambda) - 1)^k`. The ratio of successive term norms behaves like
/// `q (1 - c / k)`; a least-squares line in `1 / k` over the tail half
/// extrapolates it to `q`.
pub fn polya_series(lambda: f64, dmax: usize, grid: usize) -> Result<PolyaOutcome> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite".into()));
    }
    if dmax > POLYA_MAX_DEGREE || dmax < 4 {
        return Err(Error::InvalidArgument(format!("dmax must lie in 4..={POLYA_MAX_DEGREE}, got {dmax}")));
    }
    let q = lambda.exp_m1().abs();
    let lf = log_factorials(dmax);
    let log_coefficients: Vec<f64> = (0..=dmax).map(|k| k as f64 * q.ln() - lf[k]).collect();
    let xs = unit_samples(grid.max(8));
    let mut log_omega = vec![0.0f64; xs.len()];
    let mut log_term_norms = Vec::with_capacity(dmax + 1);
    for k in 0..=dmax {
        if k > 0 {
            for (w, x) in log_omega.iter_mut().zip(&xs) {
                *w += (x - (k - 1) as f64).abs().ln();
            }
        }
        let sup = log_omega.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        log_term_norms.push(log_coefficients[k] + sup);
    }

    let lo = (dmax / 2).max(1);
    let inv_k: Vec<f64> = (lo..dmax).map(|k| 1.0 / k as f64).collect();
    let log_ratios: Vec<f64> = (lo..dmax).map(|k| log_term_norms[k + 1] - log_term_norms[k]).collect();
    let ratio = crate::analysis::linear_fit(&inv_k, &log_ratios).intercept.exp();
    let verdict = if ratio < 1.0 { Verdict::Converge } else { Verdict::Diverge };
    Ok(PolyaOutcome { lambda, log_coefficients, log_term_norms, ratio, driving_ratio: q, verdict })
}

/// Partial sums of the Newton series against `exp(lambda x)` on `[0, 1]`,
/// with the ratio estimate and verdict in the metadata.
pub fn polya_run(cfg: &PolyaConfig) -> Result<ExperimentReport> {
    let wall = Instant::now();
    let out = polya_series(cfg.lambda, cfg.dmax, cfg.grid)?;
    let xs = unit_samples(cfg.grid.max(8));
    let sign = cfg.lambda.exp_m1().signum();
    let mut log_omega = vec![0.0f64; xs.len()];
    let mut partial = vec![0.0f64; xs.len()];
    let mut records = Vec::new();
    for k in 0..=cfg.dmax {
        let start = Instant::now();
        if k > 0 {
            for (w, x) in log_omega.iter_mut().zip(&xs) {
                *w += (x - (k - 1) as f64).abs().ln();
            }
        }
        // sign of c_k prod_{i<k} (x - i) for x in (0, 1)
        let s = sign.powi(k as i32) * if k >= 2 { (-1f64).powi(k as i32 - 1) } else { 1.0 };
        for (p, w) in partial.iter_mut().zip(&log_omega) {
            *p += s * (out.log_coefficients[k] + w).exp();
        }
        let e = xs.iter().zip(&partial).map(|(x, p)| ((cfg.lambda * x).exp() - p).abs()).fold(0.0, f64::max);
        records.push(DegreeRecord::new(k, e, elapsed(start, cfg.timing)));
    }
    let rel = (out.ratio / out.driving_ratio - 1.0).abs();
    let mut details = serde_json::to_value(&out)?;
    let mut checks = vec![
        Check::new("ratio_matches_driving", rel < 0.02, format!("ratio {:.6} vs |e^lambda - 1| = {:.6}", out.ratio, out.driving_ratio)),
        Check::new(
            "verdict_consistent",
            (out.verdict == Verdict::Converge) == (out.driving_ratio < 1.0),
            format!("{:?}", out.verdict),
        ),
    ];
    if let Some(b) = &cfg.bisect {
        let (lo, hi) = polya_threshold(b.lo, b.hi, cfg.dmax, b.tol)?;
        let mid = 0.5 * (lo + hi);
        details["threshold_bracket"] = serde_json::json!([lo, hi]);
        checks.push(Check::new(
            "threshold_near_ln2",
            (mid - 2f64.ln()).abs() < 0.05,
            format!("bracket [{lo:.6}, {hi:.6}]"),
        ));
    }
    Ok(ExperimentReport {
        series: vec![Series::new("newton", records, 0.0, None)?],
        metadata: Metadata {
            experiment: "polya".into(),
            config_hash: config_hash(cfg)?,
            seed: 0,
            grid: Some(cfg.grid),
            wall_seconds: cfg.timing.then(|| wall.elapsed().as_secs_f64()),
            skipped: Vec::new(),
            checks,
            details,
        },
    })
}

/// Bisection on the verdict of [`polya_series`]: `lo` must converge and
/// `hi` diverge. Returns the final bracket.
pub fn polya_threshold(mut lo: f64, mut hi: f64, dmax: usize, tol: f64) -> Result<(f64, f64)> {
    let verdict = |l: f64| polya_series(l, dmax, default_polya_grid()).map(|o| o.verdict);
    if verdict(lo)? != Verdict::Converge || verdict(hi)? != Verdict::Diverge {
        return Err(Error::InvalidArgument(format!("[{lo}, {hi}] does not bracket the threshold")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match verdict(mid)? {
            Verdict::Converge => lo = mid,
            Verdict::Diverge => hi = mid,
        }
    }
    Ok((lo, hi))
}

/// Writes `<stem>.csv` for the first series, `<stem>_<label>.csv` for the
/// others, and the whole report as `<stem>.json`.
pub fn report_write(report: &ExperimentReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let empty = Vec::new();
    let mut tables: Vec<(PathBuf, &Vec<DegreeRecord>)> = Vec::new();
    match report.series.split_first() {
        None => tables.push((dir.join(format!("{stem}.csv")), &empty)),
        Some((first, rest)) => {
            tables.push((dir.join(format!("{stem}.csv")), &first.records));
            for s in rest {
                tables.push((dir.join(format!("{stem}_{}.csv", s.label)), &s.records));
            }
        }
    }
    for (path, records) in tables {
        write_csv(&path, &["d", "sup_error", "root_error", "seconds"], records)?;
        paths.push(path);
    }
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&json, serde_json::to_string_pretty(report)? + "\n")?;
    paths.push(json);
    Ok(paths)
}

/// CSV with a fixed header (written even when there are no rows).
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use crate::zoo::ScalarNodes;

    fn cheb_lagrange() -> ZooSpec {
        ZooSpec::Lagrange { nodes: ScalarNodes::Family { family: NodeFamily::ChebyshevLeja }, degree: 0 }
    }

    fn interval_config(function: TestFunction, degrees: Vec<usize>) -> ExperimentConfig {
        ExperimentConfig {
            projector: cheb_lagrange(),
            function,
            compact: CompactModel::Interval,
            grid: 256,
            degrees,
            seed: 0,
            nested: false,
            timing: false,
        }
    }

    #[test]
    fn univariate_rate_matches_pole() {
        let f = TestFunction::Recip(Affine::real(&[1.0], -2.0));
        let rep = convergence_run(&interval_config(f, (2..=40).step_by(2).collect())).unwrap();
        let s = rep.primary().unwrap();
        let want = 1.0 / (2.0 + 3f64.sqrt());
        assert!((s.reference_rate.unwrap() - want).abs() < 1e-12);
        let rate = s.fit.as_ref().unwrap().rate;
        assert!((rate / want - 1.0).abs() < 0.1, "{rate} vs {want}");
        assert!(rep.passed(), "{:?}", rep.metadata.checks);
    }

    #[test]
    fn polynomial_reproduced_from_its_degree() {
        let f = TestFunction::Pow(Affine::real(&[1.0], 0.3), 5);
        let rep = convergence_run(&interval_config(f, (1..=9).collect())).unwrap();
        for r in &rep.primary().unwrap().records {
            if r.d >= 5 {
                assert!(r.sup_error < 1e-9, "d = {}: {}", r.d, r.sup_error);
            } else {
                assert!(r.sup_error > 1e-6);
            }
        }
    }

    #[test]
    fn pole_on_compact_is_rejected() {
        let f = TestFunction::Recip(Affine::real(&[1.0], 0.2));
        assert!(matches!(convergence_run(&interval_config(f, vec![2, 4])), Err(Error::Pole { .. })));
    }

    #[test]
    fn config_validation() {
        let f = TestFunction::Coord(0);
        assert!(convergence_run(&interval_config(f.clone(), vec![3, 3])).is_err());
        let mut c = interval_config(f, vec![1, 2]);
        c.grid = 63;
        assert!(convergence_run(&c).is_err());
    }

    #[test]
    fn nested_sweep_matches_rebuilds() {
        let f = TestFunction::Exp(Affine::real(&[1.0], 0.0));
        let mut c = interval_config(f, vec![2, 5, 8]);
        c.projector = ZooSpec::Lagrange { nodes: ScalarNodes::Family { family: NodeFamily::RLeja }, degree: 0 };
        let a = convergence_run(&c).unwrap();
        c.nested = true;
        let b = convergence_run(&c).unwrap();
        for (x, y) in a.primary().unwrap().records.iter().zip(&b.primary().unwrap().records) {
            assert!((x.sup_error - y.sup_error).abs() <= 1e-12 + 1e-6 * x.sup_error);
        }
    }

    #[test]
    fn cylinder_small() {
        let (rep, nodes) = cylinder_run(&CylinderConfig::new(vec![1, 2, 3, 4])).unwrap();
        assert_eq!(nodes.len(), 15);
        assert_eq!(rep.series.len(), 2);
        let check = |name: &str| rep.metadata.checks.iter().find(|c| c.name == name).unwrap().passed;
        assert!(check("node_residuals") && check("strictly_decreasing") && check("node_count"), "{:?}", rep.metadata.checks);
        let res = rep.metadata.details["node_residuals"][1].as_array().unwrap();
        assert!(res.iter().all(|r| r.as_f64().unwrap() < 1e-5));
        assert!(cylinder_run(&CylinderConfig::new(vec![13])).is_err());
    }

    /// Divided differences by the recursive table, in double-double. The
    /// node values are powers of the rounded `exp(lambda)`, formed exactly
    /// enough that the table only loses accuracy to cancellation.
    fn divided_differences(lambda: f64, n: usize) -> Vec<f64> {
        let base = Dd::from(lambda.exp());
        let mut col: Vec<Dd> = Vec::new();
        let mut v = Dd::from(1.0);
        for _ in 0..=n {
            col.push(v);
            v = v.mul(base);
        }
        let mut out = vec![col[0].value()];
        for k in 1..=n {
            col = (0..=n - k).map(|i| col[i + 1].add(col[i].neg()).mul(Dd::from(1.0 / k as f64))).collect();
            out.push(col[0].value());
        }
        out
    }

    #[test]
    fn newton_coefficients_match_recursive_table() {
        for lambda in [0.3, 0.5, 0.8] {
            let out = polya_series(lambda, 40, 1000).unwrap();
            for (k, c) in divided_differences(lambda, 20).iter().enumerate() {
                assert!((out.log_coefficients[k] - c.abs().ln()).abs() < 1e-6, "lambda {lambda}, k {k}");
            }
        }
    }

    #[test]
    fn polya_ratio_and_verdict() {
        for (lambda, v) in [(0.3, Verdict::Converge), (0.5, Verdict::Converge), (0.8, Verdict::Diverge)] {
            let out = polya_series(lambda, 40, 1000).unwrap();
            assert!((out.ratio / out.driving_ratio - 1.0).abs() < 0.02, "{lambda}: {} vs {}", out.ratio, out.driving_ratio);
            assert_eq!(out.verdict, v);
        }
        let (lo, hi) = polya_threshold(0.3, 1.0, 40, 1e-3).unwrap();
        assert!(lo <= 2f64.ln() + 0.05 && hi >= 2f64.ln() - 0.05, "[{lo}, {hi}]");
        assert!(polya_series(0.5, 61, 100).is_err());
    }

    #[test]
    fn polya_partial_sums() {
        let rep = polya_run(&PolyaConfig { lambda: 0.5, dmax: 40, grid: 500, bisect: Some(Bisection { lo: 0.3, hi: 1.0, tol: 1e-3 }), timing: false }).unwrap();
        let e: Vec<f64> = rep.primary().unwrap().records.iter().map(|r| r.sup_error).collect();
        assert!(e[40] < 1e-8 && e[40] < e[10]);
        assert!(rep.passed());
        let rep = polya_run(&PolyaConfig { lambda: 0.8, dmax: 40, grid: 500, bisect: None, timing: false }).unwrap();
        let e: Vec<f64> = rep.primary().unwrap().records.iter().map(|r| r.sup_error).collect();
        assert!(e[40] > e[20]);
    }

    #[test]
    fn report_files_round_trip_and_are_deterministic() {
        let f = TestFunction::Recip(Affine::real(&[1.0], -3.0));
        let cfg = interval_config(f, vec![2, 4, 6, 8]);
        let dir = tempfile::tempdir().unwrap();
        let a = report_write(&convergence_run(&cfg).unwrap(), &dir.path().join("a"), "run").unwrap();
        let b = report_write(&convergence_run(&cfg).unwrap(), &dir.path().join("b"), "run").unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
        let csv = std::fs::read_to_string(&a[0]).unwrap();
        assert!(csv.starts_with("d,sup_error,root_error,seconds\n"));
        assert_eq!(csv.lines().count(), 5);
        let back = read_report(&a[1]).unwrap();
        assert_eq!(back, convergence_run(&cfg).unwrap());
    }

    #[test]
    fn empty_sweep_writes_header_only() {
        let rep = convergence_run(&interval_config(TestFunction::Coord(0), vec![])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = report_write(&rep, dir.path(), "empty").unwrap();
        assert_eq!(std::fs::read_to_string(&paths[0]).unwrap(), "d,sup_error,root_error,seconds\n");
    }

    #[test]
    fn hash_depends_on_config() {
        let a = interval_config(TestFunction::Coord(0), vec![1]);
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
    }
}
