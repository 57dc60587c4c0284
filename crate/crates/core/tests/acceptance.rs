//! Acceptance checks, run in sequence so wall-clock limits are meaningful.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

mod common;

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::{Col, Mat};
use fpielm::experiment::{median_rel, run_replicates, run_single};
use fpielm::fdm::{solve_fdm, FdmGrid};
use fpielm::{
    assemble, get_problem, least_squares, ActivationKind, BoundaryRegime, Domain, ExperimentConfig, HiddenLayer,
    Operator, Order, SolveConfig, PROBLEM_NAMES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config(problem: &str, lo: [f64; 2], hi: [f64; 2], activation: ActivationKind, delta: Option<f64>) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        problem: problem.into(),
        activation,
        delta,
        ..Default::default()
    };
    c.set("domain.kind", "box").unwrap();
    c.set("domain.lo", &format!("{}, {}", lo[0], lo[1])).unwrap();
    c.set("domain.hi", &format!("{}, {}", hi[0], hi[1])).unwrap();
    c
}

fn median_of(c: &ExperimentConfig) -> f64 {
    let records = run_replicates(c).expect("replicate runs");
    median_rel(&records).expect("successful runs")
}

fn unit_box_accuracy() -> Outcome {
    let start = Instant::now();
    let c = config("dirichlet-poly2d", [-1.0, -1.0], [1.0, 1.0], ActivationKind::Sine, Some(8.0));
    let rel = median_of(&c);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rel <= 1e-9 && secs <= 60.0,
        format!("poly2d on [-1,1]^2, sine, N=1000, delta=8, 5 seeds: median REL {rel:.3e} (<= 1e-9) in {secs:.1} s (<= 60 s)"),
    )
}

fn shifted_box_accuracy() -> Outcome {
    let c = config("dirichlet-poly2d", [0.0, 0.0], [5.0, 5.0], ActivationKind::Sine, Some(5.0));
    let rel = median_of(&c);
    outcome(rel <= 1e-9, format!("poly2d on [0,5]^2, sine, delta=5: median REL {rel:.3e} (<= 1e-9)"))
}

fn activation_ordering() -> Outcome {
    let rel = |kind| median_of(&config("dirichlet-poly2d", [5.0, 0.0], [15.0, 10.0], kind, None));
    let sine = rel(ActivationKind::Sine);
    let mut pass = true;
    let mut parts = vec![format!("sine {sine:.3e}")];
    for kind in [ActivationKind::Sigmoid, ActivationKind::Gaussian, ActivationKind::Tanh] {
        let other = rel(kind);
        pass &= sine * 100.0 <= other;
        parts.push(format!("{kind} {other:.3e} ({:.0}x)", other / sine));
    }
    outcome(pass, format!("poly2d on [5,15]x[0,10], reference deltas, median REL: {} (each >= 100x)", parts.join(", ")))
}

fn navier_boxes() -> Outcome {
    let unit = median_of(&config("navier-sinsq2d", [0.0, 0.0], [1.0, 1.0], ActivationKind::Sine, Some(9.0)));
    let wide = median_of(&config("navier-sinsq2d", [0.0, 0.0], [4.0, 4.0], ActivationKind::Sine, Some(11.0)));
    let sigmoid = median_of(&config("navier-sinsq2d", [0.0, 0.0], [4.0, 4.0], ActivationKind::Sigmoid, None));
    let tanh = median_of(&config("navier-sinsq2d", [0.0, 0.0], [4.0, 4.0], ActivationKind::Tanh, None));
    outcome(
        unit <= 1e-11 && wide <= 1e-5 && sigmoid > 0.1 && tanh > 0.1,
        format!(
            "sinsq2d: [0,1]^2 delta=9 median REL {unit:.3e} (<= 1e-11); [0,4]^2 delta=11 {wide:.3e} (<= 1e-5); \
             sigmoid {sigmoid:.3e}, tanh {tanh:.3e} (> 1e-1)"
        ),
    )
}

fn fdm_convergence() -> Outcome {
    let start = Instant::now();
    let domain = Domain::new_box([0.0, 0.0], [5.0, 5.0]).unwrap();
    let problem = get_problem("dirichlet-poly2d", Some(domain)).unwrap();
    let expected = [1.65e-3, 4.14e-4, 1.04e-4];
    let mut rels = Vec::new();
    for n in [64, 128, 256] {
        let grid = FdmGrid::with_resolution([0.0, 0.0], [5.0, 5.0], n).unwrap();
        rels.push(solve_fdm(&problem, &grid).unwrap().rel_error(&problem).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    let within = rels.iter().zip(&expected).all(|(r, e)| (r / e - 1.0).abs() <= 0.2);
    let orders: Vec<f64> = rels.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ordered = orders.iter().all(|o| (1.7..=2.3).contains(o));
    outcome(
        within && ordered && secs <= 30.0,
        format!(
            "FDM poly2d on [0,5]^2 at 64/128/256: REL {:.3e}, {:.3e}, {:.3e} (+-20% of 1.65e-3, 4.14e-4, 1.04e-4); \
             orders {:.3}, {:.3} (in [1.7, 2.3]); {secs:.2} s (<= 30 s)",
            rels[0], rels[1], rels[2], orders[0], orders[1]
        ),
    )
}

fn delta_robustness() -> Outcome {
    let mut worst = (0.0, 0.0f64);
    for d in 1..=15 {
        let mut c = config("dirichlet-poly2d", [-1.0, -1.0], [1.0, 1.0], ActivationKind::Sine, Some(d as f64));
        c.replicates = 1;
        let rel = run_single(&c).expect("sweep point").rel;
        if rel > worst.1 {
            worst = (d as f64, rel);
        }
    }
    outcome(
        worst.1 <= 1e-7,
        format!("poly2d on [-1,1]^2, sine, delta = 1..15: max REL {:.3e} at delta={} (<= 1e-7)", worst.1, worst.0),
    )
}

fn network_field(layer: &HiddenLayer, beta: &[f64], x: &[f64]) -> f64 {
    let pts = Mat::from_fn(1, x.len(), |_, k| x[k]);
    let values = layer.feature_block(pts.as_ref(), Operator::Value).unwrap();
    (0..beta.len()).map(|i| values[(0, i)] * beta[i]).sum()
}

fn operator_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // Activation derivatives against differences of the activation value.
    let mut worst_act = 0.0f64;
    for kind in ActivationKind::ALL {
        for _ in 0..200 {
            let x: f64 = rng.random_range(-5.0..5.0);
            let f = |t: f64| kind.eval(Order::Value, t);
            for (order, op, h) in [(1, Order::First, 1e-4), (2, Order::Second, 1e-4), (4, Order::Fourth, 2e-2)] {
                let exact = kind.eval(op, x);
                let approx = common::derivative_1d(&f, x, order, h);
                worst_act = worst_act.max((exact - approx).abs() / exact.abs().max(1.0));
            }
        }
    }
    if worst_act > 1e-5 {
        failures.push("activation derivatives");
    }

    // Assembled rows against differences of the network field, step 1e-2.
    let mut worst_rows = 0.0f64;
    let mut binomial = 0.0f64;
    for (dirichlet, navier) in [("dirichlet-poly2d", "navier-sinsq2d"), ("dirichlet-holes3d", "navier-shell3d")] {
        for kind in ActivationKind::ALL {
            let pd = get_problem(dirichlet, None).unwrap();
            let pn = get_problem(navier, None).unwrap();
            let d = pd.dim();
            let layer = HiddenLayer::init(40, d, kind, 1.5, &mut rng).unwrap();
            let beta: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
            let beta_col = Col::from_fn(40, |i| beta[i]);
            let u = |x: &[f64]| network_field(&layer, &beta, x);
            let h = 1e-2;
            for (problem, regime) in [(&pd, BoundaryRegime::Dirichlet), (&pn, BoundaryRegime::Navier)] {
                let colloc = problem.domain.collocation(15, 15, &mut rng).unwrap();
                let sys = assemble(&layer, &colloc, problem, regime).unwrap();
                let hb = &sys.matrix * &beta_col;
                let row = |i: usize, m: &Mat<f64>| -> Vec<f64> { (0..d).map(|k| m[(i, k)]).collect() };
                let (mut got, mut want) = (Vec::new(), Vec::new());
                for (i, r) in sys.blocks.interior.clone().enumerate() {
                    got.push(hb[r]);
                    want.push(common::bilaplacian(&u, &row(i, &colloc.interior), h));
                }
                let (mut got_f, mut want_f) = (Vec::new(), Vec::new());
                for (j, r) in sys.blocks.flux.clone().enumerate() {
                    let x = row(j, &colloc.boundary);
                    got_f.push(hb[r]);
                    want_f.push(match regime {
                        BoundaryRegime::Navier => common::laplacian(&u, &x, h),
                        BoundaryRegime::Dirichlet => {
                            let n = row(j, &colloc.normals);
                            common::gradient(&u, &x, h).iter().zip(&n).map(|(g, n)| g * n).sum()
                        }
                    });
                }
                worst_rows = worst_rows.max(common::max_rel(&got, &want)).max(common::max_rel(&got_f, &want_f));
            }

            // (Σ w²)² against Σ w⁴ + 2 Σ_{k<l} w_k² w_l².
            let pts = Mat::from_fn(5, d, |_, _| rng.random_range(0.0..1.0));
            let bih = layer.feature_block(pts.as_ref(), Operator::Biharmonic).unwrap();
            let pre = layer.preactivations(pts.as_ref()).unwrap();
            for i in 0..40 {
                let w: Vec<f64> = (0..d).map(|k| layer.weights[(i, k)]).collect();
                let mut expanded = w.iter().map(|v| v.powi(4)).sum::<f64>();
                for k in 0..d {
                    for l in k + 1..d {
                        expanded += 2.0 * w[k] * w[k] * w[l] * w[l];
                    }
                }
                for q in 0..5 {
                    let want = kind.eval(Order::Fourth, pre[(q, i)]) * expanded;
                    binomial = binomial.max((bih[(q, i)] - want).abs() / want.abs().max(1e-300));
                }
            }
        }
    }
    if worst_rows > 1e-3 {
        failures.push("assembled rows");
    }
    if binomial > 1e-14 {
        failures.push("binomial identity");
    }

    // Manufactured solutions: differenced Δ²u against f.
    let mut worst_source = 0.0f64;
    for name in PROBLEM_NAMES {
        let p = get_problem(name, None).unwrap();
        let pts = p.domain.sample_interior(50, &mut rng).unwrap();
        let (lo, hi) = p.domain.bounding_box();
        let scale = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
        let u = |x: &[f64]| p.exact_u(x);
        let (mut got, mut want) = (Vec::new(), Vec::new());
        for i in 0..50 {
            let x: Vec<f64> = (0..p.dim()).map(|k| pts[(i, k)]).collect();
            got.push(common::bilaplacian_extrapolated(&u, &x, 1e-2 * scale));
            want.push(p.source_f(&x));
        }
        worst_source = worst_source.max(common::max_rel(&got, &want));
    }
    if worst_source > 1e-3 {
        failures.push("manufactured sources");
    }

    outcome(
        failures.is_empty(),
        format!(
            "activation derivatives rel {worst_act:.1e} (<= 1e-5); assembled rows rel {worst_rows:.1e} (<= 1e-3); \
             binomial identity rel {binomial:.1e}; manufactured f rel {worst_source:.1e} (<= 1e-3){}",
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    )
}

fn solver_identities() -> Outcome {
    let h = Mat::from_fn(2, 1, |_, _| 1.0);
    let s = Col::from_fn(2, |_| 1.0);
    let ridge = least_squares(h.as_ref(), &s, &SolveConfig::ridge(1.0)).unwrap().beta[0];
    let hand = (ridge - 2.0 / 3.0).abs() <= 1e-15;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_ne = 0.0f64;
    let mut worst_cont = 0.0f64;
    for _ in 0..20 {
        let h = Mat::from_fn(50, 10, |_, _| rng.random_range(-1.0..1.0));
        let s = Col::from_fn(50, |_| rng.random_range(-1.0..1.0));
        let fit = least_squares(h.as_ref(), &s, &SolveConfig::default()).unwrap().beta;
        let gram = h.transpose() * &h;
        let oracle = gram.llt(faer::Side::Lower).unwrap().solve(h.transpose() * &s);
        worst_ne = worst_ne.max((&fit - &oracle).norm_l2() / oracle.norm_l2());
        let tiny = least_squares(h.as_ref(), &s, &SolveConfig::ridge(1e-12)).unwrap().beta;
        worst_cont = worst_cont.max((&tiny - &fit).norm_l2() / fit.norm_l2());
    }
    outcome(
        hand && worst_ne <= 1e-8 && worst_cont <= 1e-6,
        format!(
            "ridge hand case beta {ridge:.15} (2/3); normal equations rel {worst_ne:.1e} (<= 1e-8); \
             lambda=1e-12 vs 0 rel {worst_cont:.1e} (<= 1e-6)"
        ),
    )
}

fn three_dimensional() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["dirichlet-holes3d", "navier-shell3d"] {
        let c = ExperimentConfig {
            problem: name.into(),
            hidden_n: 2000,
            replicates: 1,
            ..Default::default()
        };
        let start = Instant::now();
        let record = run_single(&c).expect("3D run");
        let secs = start.elapsed().as_secs_f64();
        pass &= record.rel <= 1e-4 && secs < 300.0;
        parts.push(format!(
            "{name} delta={} REL {:.3e} in {secs:.1} s",
            record.config.delta.unwrap(),
            record.rel
        ));
    }
    outcome(pass, format!("sine, N=2000: {} (REL <= 1e-4, < 300 s each)", parts.join("; ")))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, unit_box_accuracy),
        (2, shifted_box_accuracy),
        (3, activation_ordering),
        (4, navier_boxes),
        (5, fdm_convergence),
        (6, delta_robustness),
        (7, operator_properties),
        (8, solver_identities),
        (9, three_dimensional),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {status}: {} [{:.1} s]", o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
