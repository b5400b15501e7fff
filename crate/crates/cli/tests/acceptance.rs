//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are
//! always printed.

use std::f64::consts::LN_2;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use nprox_core::analysis::{bws_check, gelfond_constant, growth_norm_monomial, CompactModel, GrowthParams, Norm};
use nprox_core::experiments::{
    convergence_run, cylinder_run, polya_series, polya_threshold, CylinderConfig, ExperimentConfig, Verdict,
};
use nprox_core::functionals::{Affine, TestFunction};
use nprox_core::points::{
    chebyshev_measure, circle_grid, circle_measure, gram_schmidt_basis, leja_disk, leja_greedy_oracle, leja_objective,
    product_measure,
};
use nprox_core::poly::{monomial_count, MultiIndex, Polynomial, C64};
use nprox_core::projector::{apply_product_formula, newton_product, residual_expansion, BSet, NewtonStructuredProjector};
use nprox_core::zoo::{kergin, lagrange, orthogonal, taylor, NodeFamily, ScalarNodes, ZooSpec};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

/// Runs a criterion, adding its wall-time limit to the verdict.
fn run(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(o) => (o.passed, o.detail),
        Err(_) => (false, "panicked".to_string()),
    };
    if let Some(l) = limit {
        if elapsed > l {
            passed = false;
            detail.push_str(&format!("; runtime {:.1}s exceeds {:.0}s", elapsed.as_secs_f64(), l.as_secs_f64()));
        }
    }
    println!(
        "{} [{id:2}] {name} ({:.2}s): {detail}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    passed
}

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rc(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Polynomial {
    let len = monomial_count(n, d).unwrap();
    Polynomial::from_coeffs(n, d, (0..len).map(|_| rc(rng)).collect()).unwrap()
}

/// Random polynomial with a nonzero top-degree part.
fn exact_degree_poly(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Polynomial {
    let p = random_poly(rng, n, d);
    let mut c = p.coeffs().to_vec();
    *c.last_mut().unwrap() += 2.0;
    Polynomial::from_coeffs(n, d, c).unwrap()
}

fn random_function(rng: &mut ChaCha8Rng, n: usize) -> TestFunction {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect();
    match rng.gen_range(0..3) {
        0 => TestFunction::Exp(Affine::real(&w, rng.gen_range(-0.5..0.5))),
        1 => TestFunction::Recip(Affine::real(&w, 3.0)),
        _ => TestFunction::Poly(random_poly(rng, n, 5)),
    }
}

fn scalar_family(f: NodeFamily, count: usize) -> Vec<C64> {
    f.generate(count).unwrap().scalars()
}

fn plane_leja(count: usize) -> Vec<Vec<C64>> {
    NodeFamily::Leja.generate(count).unwrap().to_real_plane().unwrap().points
}

fn relative(err: f64, scale: f64) -> f64 {
    err / scale.max(1e-300)
}

/// Worst relative defect of reproduction, idempotence and condition
/// membership for one projector.
fn projector_laws(p: &NewtonStructuredProjector, f: &TestFunction, rng: &mut ChaCha8Rng) -> f64 {
    let q = random_poly(rng, p.nvars(), p.degree());
    let reproduction = relative(p.apply_polynomial(&q).unwrap().max_coeff_distance(&q), q.max_coeff_abs());
    let pf = p.apply(f).unwrap();
    let idempotence = relative(p.apply_polynomial(&pf).unwrap().max_coeff_distance(&pf), pf.max_coeff_abs());
    let want = p.values_of(f).unwrap();
    let got = p.values_of_polynomial(&pf).unwrap();
    let scale = want.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let membership = relative(want.iter().zip(&got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max), scale);
    reproduction.max(idempotence).max(membership)
}

fn c1_projector_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: (f64, String) = (0.0, String::new());
    let mut count = 0;
    let mut record = |name: String, p: NewtonStructuredProjector, f: TestFunction, rng: &mut ChaCha8Rng| {
        let e = projector_laws(&p, &f, rng);
        count += 1;
        if e > worst.0 {
            worst = (e, name);
        }
    };
    for (n, d) in [(1, 10), (2, 6), (3, 4)] {
        let center: Vec<C64> = (0..n).map(|_| rc(&mut rng) * 0.5).collect();
        let f = TestFunction::Exp(Affine::real(&vec![0.7; n], 0.1));
        record(format!("taylor n={n} d={d}"), taylor(&center, d).unwrap(), f, &mut rng);
    }
    for d in 0..=15 {
        let f = TestFunction::Recip(Affine::real(&[1.0], -2.0));
        record(format!("lagrange chebyshev d={d}"), lagrange(&scalar_family(NodeFamily::ChebyshevLeja, d + 1), d).unwrap(), f.clone(), &mut rng);
        record(format!("lagrange leja d={d}"), lagrange(&scalar_family(NodeFamily::Leja, d + 1), d).unwrap(), f, &mut rng);
    }
    for d in 1..=8 {
        let f = TestFunction::Exp(Affine::real(&[0.6, -0.4], 0.0));
        record(format!("kergin d={d}"), kergin(&plane_leja(d + 1), d).unwrap(), f, &mut rng);
    }
    for d in [2, 5, 10, 15, 20] {
        let f = TestFunction::Recip(Affine::real(&[1.0], -2.5));
        record(format!("orthogonal chebyshev d={d}"), orthogonal(Arc::new(chebyshev_measure(d + 1)), d).unwrap(), f.clone(), &mut rng);
        record(format!("orthogonal circle d={d}"), orthogonal(Arc::new(circle_measure(2 * d + 1)), d).unwrap(), f, &mut rng);
    }
    let m = product_measure(&chebyshev_measure(9), &circle_measure(17));
    let f = TestFunction::Exp(Affine::real(&[0.5, 0.5], 0.0));
    record("orthogonal product d=8".into(), orthogonal(Arc::new(m), 8).unwrap(), f, &mut rng);
    outcome(worst.0 < 1e-8, format!("{count} projectors, worst relative defect {:.2e} ({})", worst.0, worst.1))
}

fn zoo_pick(kind: usize, d: usize, rng: &mut ChaCha8Rng) -> NewtonStructuredProjector {
    match kind {
        0 => taylor(&[rc(rng)], d).unwrap(),
        1 => {
            let nodes: Vec<C64> = (0..=d).map(|k| r((k as f64 * 1.9 + rng.gen_range(0.0..0.1)).cos())).collect();
            lagrange(&nodes, d).unwrap()
        }
        2 => kergin(&plane_leja(d + 1), d).unwrap(),
        _ => orthogonal(Arc::new(chebyshev_measure(d + 2)), d).unwrap(),
    }
}

fn c2_product_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let cases = 24;
    for _ in 0..cases {
        let d = rng.gen_range(1..=4);
        let p1 = zoo_pick(rng.gen_range(0..4), d, &mut rng);
        let p2 = zoo_pick(rng.gen_range(0..4), d, &mut rng);
        let (n1, n2) = (p1.nvars(), p2.nvars());
        let f1 = random_function(&mut rng, n1);
        let f2 = random_function(&mut rng, n2);
        let formula = apply_product_formula(&p1, &p2, &f1, &f2).unwrap();
        let generic = newton_product(&p1, &p2).unwrap().apply(&TestFunction::tensor(&f1, n1, &f2, n2)).unwrap();
        worst = worst.max(formula.max_coeff_distance(&generic));
    }
    outcome(worst < 1e-8, format!("{cases} cases, max coefficient discrepancy {worst:.2e}"))
}

fn c3_residual_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut cases = 0;
    while cases < 24 {
        let (a, b, d) = (rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5));
        if a + b < d + 1 {
            continue;
        }
        cases += 1;
        let deg = a.max(b).max(d);
        let p1 = zoo_pick(rng.gen_range(0..4), deg, &mut rng);
        let p2 = zoo_pick(rng.gen_range(0..4), deg, &mut rng);
        let pa = exact_degree_poly(&mut rng, p1.nvars(), a);
        let pb = exact_degree_poly(&mut rng, p2.nvars(), b);
        let expansion = residual_expansion(&p1, &p2, d, &pa, &pb).unwrap();
        let prod = newton_product(&p1.truncate(d).unwrap(), &p2.truncate(d).unwrap()).unwrap();
        let t = pa.tensor_embed(&pb);
        let direct = t.sub(&prod.apply_polynomial(&t).unwrap().with_degree(t.degree()));
        worst = worst.max(relative(expansion.max_coeff_distance(&direct), 1.0 + direct.max_coeff_abs()));
    }
    let mut bound_ok = true;
    for d in 0..=6 {
        for a in 0..=10 {
            for b in 0..=10 {
                let s = BSet::new(d, a, b);
                let brute = (0..=a).flat_map(|i| (0..=b).map(move |j| (i, j))).filter(|&(i, j)| i + j > d).count();
                bound_ok &= s.card() == brute && s.card() <= (a + 1) * (b + 1);
            }
        }
    }
    outcome(
        worst < 1e-8 && bound_ok,
        format!("{cases} cases, worst discrepancy {worst:.2e}; card bound exhaustive d<=6: {bound_ok}"),
    )
}

fn c4_taylor_product() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for d in 0..=6 {
        let (a, b) = (rc(&mut rng) * 0.5, [rc(&mut rng) * 0.5, rc(&mut rng) * 0.5]);
        let prod = newton_product(&taylor(&[a], d).unwrap(), &taylor(&b, d).unwrap()).unwrap();
        let joined = taylor(&[a, b[0], b[1]], d).unwrap();
        for f in [
            TestFunction::Exp(Affine::real(&[0.4, -0.3, 0.8], 0.1)),
            TestFunction::Recip(Affine::real(&[0.5, 0.2, -0.4], 3.0)),
            TestFunction::Poly(random_poly(&mut rng, 3, d + 2)),
        ] {
            worst = worst.max(prod.apply(&f).unwrap().max_coeff_distance(&joined.apply(&f).unwrap()));
        }
    }
    outcome(worst < 1e-12, format!("d = 0..=6, max coefficient distance {worst:.2e}"))
}

fn c5_bierman_grid() -> Outcome {
    let mut worst = 0.0f64;
    let mut nodes_checked = 0;
    let f = TestFunction::Exp(Affine::real(&[1.0, 0.7], 0.0));
    for d in 1..=15 {
        let a = scalar_family(NodeFamily::ChebyshevLeja, d + 1);
        let b = scalar_family(NodeFamily::Leja, d + 1);
        let pf = newton_product(&lagrange(&a, d).unwrap(), &lagrange(&b, d).unwrap()).unwrap().apply(&f).unwrap();
        let mut count = 0;
        for i in 0..=d {
            for j in 0..=d - i {
                let z = [a[i], b[j]];
                let v = f.eval(&z).unwrap();
                worst = worst.max((pf.eval(&z) - v).norm() / v.norm().max(1.0));
                count += 1;
            }
        }
        if count != (d + 1) * (d + 2) / 2 {
            return outcome(false, format!("node count {count} at d = {d}"));
        }
        nodes_checked += count;
    }
    outcome(worst < 1e-9, format!("{nodes_checked} nodes over d = 1..=15, max residual {worst:.2e}"))
}

fn c6_orthonormal_factorization() -> Outcome {
    let d = 12;
    let (mc, mx) = (circle_measure(2 * d + 1), chebyshev_measure(d + 1));
    let joint = gram_schmidt_basis(&product_measure(&mc, &mx), d).unwrap();
    let bc = gram_schmidt_basis(&mc, d).unwrap();
    let bx = gram_schmidt_basis(&mx, d).unwrap();
    let idx = nprox_core::poly::basis(2, d);
    let mut worst = 0.0f64;
    for (alpha, b) in idx.iter().zip(&joint.polys) {
        let (i, j) = (alpha.exponents()[0] as usize, alpha.exponents()[1] as usize);
        let t = bc.polys[i].tensor_embed(&bx.polys[j]);
        worst = worst.max(relative(b.max_coeff_distance(&t), t.max_coeff_abs()));
    }
    outcome(worst < 1e-10, format!("{} basis polynomials up to degree {d}, max relative distance {worst:.2e}", idx.len()))
}

fn lagrange_spec() -> Box<ZooSpec> {
    Box::new(ZooSpec::Lagrange { nodes: ScalarNodes::Family { family: NodeFamily::ChebyshevLeja }, degree: 0 })
}

fn c7_rate_reproduction() -> Outcome {
    let want = 1.0 / (2.0 + 3f64.sqrt());
    let uni = ExperimentConfig {
        projector: *lagrange_spec(),
        function: TestFunction::Recip(Affine::real(&[1.0], -2.0)),
        compact: CompactModel::Interval,
        grid: 512,
        degrees: (2..=40).collect(),
        seed: 0,
        nested: false,
        timing: false,
    };
    let biv = ExperimentConfig {
        projector: ZooSpec::Product { left: lagrange_spec(), right: lagrange_spec() },
        function: TestFunction::Product(vec![
            TestFunction::Recip(Affine::real(&[1.0], -2.0)),
            TestFunction::Recip(Affine::real(&[0.0, 1.0], -3.0)),
        ]),
        compact: CompactModel::Product(vec![CompactModel::Interval, CompactModel::Interval]),
        grid: 64,
        degrees: (2..=30).step_by(2).collect(),
        seed: 0,
        nested: false,
        timing: false,
    };
    let rate = |cfg: &ExperimentConfig| {
        let rep = convergence_run(cfg).unwrap();
        (rep.series[0].fit.as_ref().unwrap().rate, rep.metadata.skipped.len())
    };
    let (r1, s1) = rate(&uni);
    let (r2, s2) = rate(&biv);
    let ok = (r1 / want - 1.0).abs() <= 0.1 && (r2 / want - 1.0).abs() <= 0.1;
    outcome(
        ok,
        format!("target {want:.5}; univariate {r1:.5} ({s1} degrees skipped), bivariate {r2:.5} ({s2} skipped)"),
    )
}

fn c8_leja_oracle() -> Outcome {
    let rec = leja_disk(16).unwrap().scalars();
    let oracle = leja_greedy_oracle(&circle_grid(100_000), 16).scalars();
    let mut worst = 0.0f64;
    for k in 0..16 {
        let a = leja_objective(&rec[..k], rec[k]).exp();
        let b = leja_objective(&oracle[..k], oracle[k]).exp();
        worst = worst.max((a - b).abs() / b);
    }
    // ties are broken differently, but every dyadic prefix is the same set
    // of roots of unity
    let same_set = |x: &[C64], y: &[C64]| x.iter().all(|p| y.iter().any(|q| (p - q).norm() < 1e-9));
    let prefixes = [1usize, 2, 4, 8, 16];
    let dyadic = prefixes.iter().all(|&n| same_set(&rec[..n], &oracle[..n]));
    outcome(
        worst < 1e-6 && dyadic,
        format!("max relative objective gap {worst:.2e}; dyadic prefixes agree as sets: {dyadic}"),
    )
}

fn c9_gelfond() -> Outcome {
    let c = gelfond_constant(1.0).unwrap();
    let err = (c - LN_2).abs();
    outcome(err < 1e-8, format!("c(1) = {c:.15}, |c(1) - ln 2| = {err:.2e}"))
}

fn c10_polya() -> Outcome {
    let v05 = polya_series(0.5, 40, 1000).unwrap();
    let v08 = polya_series(0.8, 40, 1000).unwrap();
    let (lo, hi) = polya_threshold(0.3, 1.0, 40, 1e-3).unwrap();
    let mid = 0.5 * (lo + hi);
    let ok = v05.verdict == Verdict::Converge && v08.verdict == Verdict::Diverge && (mid - LN_2).abs() <= 0.05;
    outcome(
        ok,
        format!(
            "lambda 0.5: ratio {:.4} {:?}; lambda 0.8: ratio {:.4} {:?}; threshold bracket [{lo:.4}, {hi:.4}]",
            v05.ratio, v05.verdict, v08.ratio, v08.verdict
        ),
    )
}

fn c11_cylinder() -> Outcome {
    let cfg = CylinderConfig::new((2..=10).collect());
    let (rep, nodes) = cylinder_run(&cfg).unwrap();
    let failing: Vec<&str> = rep.metadata.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let errors: Vec<String> = rep.series[0].records.iter().map(|r| format!("{:.1e}", r.sup_error)).collect();
    let residual = rep.metadata.checks.iter().find(|c| c.name == "node_residuals").map(|c| c.detail.clone());
    outcome(
        failing.is_empty() && nodes.len() == 66,
        format!(
            "exp(x+y+t) errors d=2..10 [{}]; {}; failing checks {failing:?}",
            errors.join(", "),
            residual.unwrap_or_default()
        ),
    )
}

/// `-ln |z^alpha| + |alpha| ln N(z)` as a function of the log-moduli of the
/// active variables.
struct NegLogMonomial {
    norm: Norm,
    alpha: Vec<u32>,
    active: Vec<usize>,
}

impl argmin::core::CostFunction for NegLogMonomial {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, y: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        let mut r = vec![0.0; self.alpha.len()];
        for (&i, &v) in self.active.iter().zip(y) {
            r[i] = v.exp();
        }
        let k: f64 = self.alpha.iter().map(|&a| a as f64).sum();
        let v: f64 = self.active.iter().zip(y).map(|(&i, x)| self.alpha[i] as f64 * x).sum();
        Ok(k * self.norm.of_moduli(&r).ln() - v)
    }
}

/// `max |z^alpha|` on the unit sphere of `norm` by restarted Nelder–Mead.
fn delta_oracle(norm: &Norm, alpha: &[u32]) -> f64 {
    use argmin::core::Executor;
    use argmin::solver::neldermead::NelderMead;
    let active: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > 0).collect();
    if active.is_empty() {
        return 1.0;
    }
    let mut best = vec![0.0; active.len()];
    let mut cost = f64::INFINITY;
    for restart in 0..8 {
        let h = 0.5f64.powi(restart);
        let mut simplex = vec![best.clone()];
        for i in 0..active.len() {
            let mut v = best.clone();
            v[i] += h;
            simplex.push(v);
        }
        let problem = NegLogMonomial { norm: norm.clone(), alpha: alpha.to_vec(), active: active.clone() };
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).unwrap();
        let res = Executor::new(problem, solver).configure(|s| s.max_iters(4000)).run().unwrap();
        if res.state.best_cost <= cost {
            cost = res.state.best_cost;
            best = res.state.best_param.clone().unwrap();
        }
    }
    (-cost).exp()
}

/// `max_r delta r^k exp(-A r^omega)` by golden section in `ln r`, where the
/// log of the objective is concave.
fn growth_oracle(delta: f64, k: f64, omega: f64, a: f64) -> f64 {
    let g = |s: f64| k * s - a * (omega * s).exp();
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if g(m1) < g(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    delta * g(0.5 * (lo + hi)).exp()
}

fn random_norm(rng: &mut ChaCha8Rng, kind: usize) -> Norm {
    let pick = |k: u32| match k {
        0 => Norm::L1,
        1 => Norm::L2,
        _ => Norm::LInf,
    };
    let mut composite = |power: bool| {
        let first = Box::new(pick(rng.gen_range(0..3)));
        let second = Box::new(pick(rng.gen_range(0..3)));
        let (a1, a2) = (rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0));
        if power {
            Norm::PowerCombined { split: 2, a1, a2, omega: rng.gen_range(1.0..3.0), first, second }
        } else {
            Norm::WeightedSum { split: 2, a1, a2, first, second }
        }
    };
    match kind {
        0 => Norm::L1,
        1 => Norm::L2,
        2 => Norm::LInf,
        3 => composite(false),
        _ => composite(true),
    }
}

fn c12_growth_formulas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst_delta, mut worst_growth) = (0.0f64, 0.0f64);
    let cases = 100;
    for case in 0..cases {
        let norm = random_norm(&mut rng, case % 5);
        let mut alpha: Vec<u32> = (0..4).map(|_| rng.gen_range(0..5)).collect();
        while alpha.iter().sum::<u32>() > 10 {
            let i = alpha.iter().position(|&a| a > 0).unwrap();
            alpha[i] -= 1;
        }
        let mi = MultiIndex::new(alpha.clone());
        let delta = norm.delta(&mi).unwrap();
        let oracle = delta_oracle(&norm, &alpha);
        worst_delta = worst_delta.max((delta / oracle - 1.0).abs());
        let params = GrowthParams { omega: rng.gen_range(0.5..3.0), a: rng.gen_range(0.2..3.0), norm };
        let closed = growth_norm_monomial(&mi, &params).unwrap();
        let g = growth_oracle(oracle, mi.degree() as f64, params.omega, params.a);
        worst_growth = worst_growth.max((closed / g - 1.0).abs());
    }
    outcome(
        worst_delta < 1e-6 && worst_growth < 1e-6,
        format!("{cases} cases over all norms, |alpha| <= 10: delta rel. error {worst_delta:.2e}, growth norm rel. error {worst_growth:.2e}"),
    )
}

fn c13_bernstein_walsh() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let sets = [
        CompactModel::Interval,
        CompactModel::Disk,
        CompactModel::Product(vec![CompactModel::Interval, CompactModel::Disk]),
    ];
    let mut worst = 0.0f64;
    let mut checks = 0;
    for k in &sets {
        let res = if k.dim() == 1 { 512 } else { 96 };
        for _ in 0..100 {
            let d = rng.gen_range(1..=6);
            let p = random_poly(&mut rng, k.dim(), d);
            for rr in [1.5, 2.0] {
                worst = worst.max(bws_check(&p, k, rr, res).unwrap());
                checks += 1;
            }
        }
    }
    outcome(worst <= 1.0 + 1e-9, format!("{checks} checks, largest sampled ratio {worst:.6}"))
}

fn nprox(cmd: &str, cfg: &serde_json::Value, dir: &Path) -> bool {
    let cfg_path = dir.with_extension("json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_nprox"))
        .args([cmd, "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()])
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn c14_determinism() -> Outcome {
    let recip = json!(["recip", ["affine", [1.0], -2.0]]);
    let configs = [
        ("points", json!({"family": "r_leja", "count": 12})),
        ("ortho", json!({"measure": {"kind": "circle"}, "degree": 6, "compact": {"kind": "disk"}})),
        (
            "project",
            json!({"projector": {"kind": "product",
                                  "left": {"kind": "lagrange", "nodes": {"family": "leja"}, "degree": 4},
                                  "right": {"kind": "taylor", "center": [0.0], "degree": 4}},
                   "function": ["exp", ["affine", [1.0, 1.0], 0.0]]}),
        ),
        (
            "converge",
            json!({"projector": {"kind": "lagrange", "nodes": {"family": "chebyshev_leja"}, "degree": 0},
                   "function": recip, "compact": {"kind": "interval"}, "degrees": [4, 8, 12, 16]}),
        ),
        ("cylinder", json!({"degrees": [2, 3, 4]})),
        ("polya", json!({"lambda": 0.8, "dmax": 40})),
        ("gelfond", json!({"omegas": [0.5, 1.0, 1.5, 2.0]})),
        (
            "rho",
            json!({"function": recip, "compact": {"kind": "interval"}, "dmax": 24, "measure": {"kind": "chebyshev", "nodes": 50}}),
        ),
        (
            "density",
            json!({"nodes": {"family": "integer"}, "count": 100, "norm": {"kind": "l1"}, "omegas": [1.0], "rmax": 80.0}),
        ),
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (cmd, cfg) in &configs {
        let (a, b) = (tmp.path().join(format!("{cmd}_1")), tmp.path().join(format!("{cmd}_2")));
        if !nprox(cmd, cfg, &a) || !nprox(cmd, cfg, &b) {
            differing.push(format!("{cmd} (failed to run)"));
            continue;
        }
        let (x, y) = (csv_bytes(&a), csv_bytes(&b));
        if x.is_empty() || x != y {
            differing.push(cmd.to_string());
        }
    }
    outcome(differing.is_empty(), format!("{} subcommands run twice; differing: {differing:?}", configs.len()))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "projector laws", Some(secs(30)), c1_projector_laws),
        run(2, "product formula", None, c2_product_formula),
        run(3, "residual expansion", None, c3_residual_lemma),
        run(4, "Taylor product at the joined point", None, c4_taylor_product),
        run(5, "Bierman grid interpolation", None, c5_bierman_grid),
        run(6, "orthonormal basis factorization", None, c6_orthonormal_factorization),
        run(7, "convergence rate reproduction", Some(secs(60)), c7_rate_reproduction),
        run(8, "Leja recursion vs greedy oracle", None, c8_leja_oracle),
        run(9, "Gelfond constant c(1)", Some(secs(1)), c9_gelfond),
        run(10, "Newton series threshold at the integers", Some(secs(10)), c10_polya),
        run(11, "cylinder experiment", Some(secs(120)), c11_cylinder),
        run(12, "growth formulas vs maximization", None, c12_growth_formulas),
        run(13, "Bernstein-Walsh inequality", None, c13_bernstein_walsh),
        run(14, "CLI determinism", None, c14_determinism),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
