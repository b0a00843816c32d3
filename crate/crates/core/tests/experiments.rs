use graphstream::cavity::{CavityParams, RateConvention};
use graphstream::experiments::{
    evaluate, jitter_mc, jitter_with, jittered_plan, sweep, witness_entangled, yield_seconds, Evaluator,
    JitterMode, JitterSpec, PhysicalParams, SweepGrid,
};
use graphstream::graphs::{compile_schedule, StarChain};
use graphstream::noisy::Protocol;
use graphstream::ode::SolverOptions;
use proptest::prelude::*;

fn schedule(chain: &str, keep: bool) -> graphstream::Schedule {
    compile_schedule(&chain.parse::<StarChain>().unwrap(), keep).0
}

fn pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn lossless_evaluation_is_perfect_for_small_chains() {
    for chain in StarChain::enumerate(5) {
        for keep in [false, true] {
            let (s, _) = compile_schedule(&chain, keep);
            let m = evaluate(&s, &CavityParams::<f64>::lossless()).unwrap();
            assert!((m.fidelity - 1.0).abs() < 1e-9, "{chain} keep={keep}");
            assert!((m.success_prob - 1.0).abs() < 1e-9, "{chain} keep={keep}");
        }
    }
}

#[test]
fn default_grid_shape() {
    let grid = SweepGrid::<f64>::default_axes(schedule("0,0", false));
    let rows = sweep(&grid, &Protocol::default(), &SolverOptions::default()).unwrap();
    assert_eq!(rows.len(), 169);
    let at = |i: usize, j: usize| &rows[i * 13 + j];
    for i in 0..13 {
        for j in 0..13 {
            let r = at(i, j);
            assert!((r.kappa - grid.kappas[i]).abs() < 1e-15 && (r.gamma - grid.gammas[j]).abs() < 1e-15);
            if i + 1 < 13 {
                assert!(at(i + 1, j).probability <= r.probability + 1e-9);
            }
            if j + 1 < 13 {
                assert!(at(i, j + 1).probability <= r.probability + 1e-9);
            }
        }
        if i + 1 < 13 {
            assert!(at(i + 1, 0).fidelity <= at(i, 0).fidelity + 1e-9);
            assert!(at(0, i + 1).fidelity <= at(0, i).fidelity + 1e-9);
        }
    }
}

#[test]
fn balanced_losses_preserve_fidelity() {
    // κ = 2γ damps every one-excitation state at the same rate, so the heralded state is exact
    let ev = Evaluator::<f64>::new(&schedule("1,0", false), &Protocol::default(), &SolverOptions::default()).unwrap();
    for gamma in [0.01, 0.05, 0.1, 0.15] {
        let m = ev.evaluate(&CavityParams::symmetric(2.0 * gamma, gamma)).unwrap();
        assert!((m.fidelity - 1.0).abs() < 1e-9, "gamma={gamma}");
        assert!(m.success_prob < 1.0);
        let off = ev.evaluate(&CavityParams::symmetric(2.0 * gamma + 0.02, gamma)).unwrap();
        assert!(off.fidelity < m.fidelity);
    }
}

#[test]
fn sweep_is_smooth_between_grid_points() {
    let ev = Evaluator::<f64>::new(&schedule("1,1", false), &Protocol::default(), &SolverOptions::default()).unwrap();
    let mut prev = ev.evaluate(&CavityParams::symmetric(0.1, 0.1)).unwrap();
    for k in 1..=20 {
        let kappa = 0.1 + 0.001 * k as f64;
        let m = ev.evaluate(&CavityParams::symmetric(kappa, 0.1)).unwrap();
        assert!((m.fidelity - prev.fidelity).abs() < 5e-3);
        assert!(m.success_prob < prev.success_prob);
        prev = m;
    }
}

#[test]
fn sweep_respects_rate_convention() {
    let mut grid = SweepGrid {
        kappas: vec![0.1f64],
        gammas: vec![0.1],
        schedule: schedule("0", false),
        convention: RateConvention::Literal,
    };
    let lit = sweep(&grid, &Protocol::default(), &SolverOptions::default()).unwrap()[0];
    grid.convention = RateConvention::Half;
    let half = sweep(&grid, &Protocol::default(), &SolverOptions::default()).unwrap()[0];
    assert!(half.probability > lit.probability);
}

#[test]
fn jitter_is_deterministic_and_pool_independent() {
    let s = schedule("0,1", false);
    let p = CavityParams::<f64>::symmetric(0.05, 0.1);
    let spec = JitterSpec::new(0.1, 24, 7).unwrap();
    let run = || jitter_mc(&s, &p, &spec, &Protocol::default(), &SolverOptions::default()).unwrap();
    let a = pool(1, run);
    let b = pool(4, run);
    assert_eq!(a, b);
    let other = jitter_mc(&s, &p, &JitterSpec { seed: 8, ..spec }, &Protocol::default(), &SolverOptions::default()).unwrap();
    assert_ne!(a.mean_fidelity, other.mean_fidelity);
}

#[test]
fn jitter_summary_matches_manual_statistics() {
    let ev = Evaluator::<f64>::new(&schedule("0,0", false), &Protocol::default(), &SolverOptions::default()).unwrap();
    let p = CavityParams::symmetric(0.0, 0.0);
    let spec = JitterSpec {
        mode: JitterMode::Shared,
        ..JitterSpec::new(0.2, 12, 3).unwrap()
    };
    let summary = jitter_with(&ev, &p, &spec).unwrap();
    let f: Vec<f64> = (0..12)
        .map(|i| ev.evaluate_plan(&jittered_plan(ev.plan(), &spec, i), &p).unwrap().fidelity)
        .collect();
    let mean = f.iter().sum::<f64>() / 12.0;
    let var = f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 11.0;
    assert!((summary.mean_fidelity - mean).abs() < 1e-14);
    assert!((summary.std_fidelity - var.sqrt()).abs() < 1e-14);
    assert!(summary.mean_fidelity < 1.0);
    assert!(summary.mean_probability < 1.0 && summary.std_probability > 0.0);
}

#[test]
fn zero_jitter_reproduces_nominal() {
    let ev = Evaluator::<f64>::new(&schedule("0,0", false), &Protocol::default(), &SolverOptions::default()).unwrap();
    let p = CavityParams::symmetric(0.08, 0.19);
    let nominal = ev.evaluate(&p).unwrap();
    let s = jitter_with(&ev, &p, &JitterSpec::new(0.0, 4, 1).unwrap()).unwrap();
    assert!((s.mean_fidelity - nominal.fidelity).abs() < 1e-14);
    assert_eq!(s.std_fidelity, 0.0);
}

#[test]
fn jitter_spec_validation() {
    assert!(JitterSpec::<f64>::new(-0.1, 10, 0).is_err());
    assert!(JitterSpec::<f64>::new(1.5, 10, 0).is_err());
    assert!(JitterSpec::<f64>::new(0.1, 0, 0).is_err());
}

#[test]
fn physical_parameters() {
    assert!(PhysicalParams::<f64>::new(0.0, 1.0, 1.0).is_err());
    assert!(PhysicalParams::<f64>::new(1.0, -1.0, 1.0).is_err());
    let rb = PhysicalParams::<f64>::rubidium();
    assert!((rb.to_seconds(rb.angular_g()) - 1.0).abs() < 1e-12);
    assert!(yield_seconds(1.0f64, 0.0).is_err());
    assert!((yield_seconds(2.0f64, 0.5).unwrap() - 4.0).abs() < 1e-15);
}

#[test]
fn entanglement_witness() {
    assert!(witness_entangled(0.9f64).unwrap());
    assert!(!witness_entangled(0.5f64).unwrap());
    assert!(witness_entangled(1.1f64).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metrics_are_probabilities(kappa in 0.0..0.3f64, gamma in 0.0..0.3f64, chain in prop::collection::vec(0usize..3, 1..=2)) {
        let s = compile_schedule(&StarChain::new(chain).unwrap(), false).0;
        let m = evaluate(&s, &CavityParams::symmetric(kappa, gamma)).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m.fidelity));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m.success_prob));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m.fidelity_post_measurement));
    }
}
