use kdvlab_core::control::*;
use kdvlab_core::critical::{enum_lattice_set, n_witness, SetTag};
use kdvlab_core::numerics::CompositeGauss;
use kdvlab_core::sim::{
    rotate, simulate_with, smallest_pairs, Grid, ModalBasis, Mode, SimConfig, StateField, TimeSeries,
};
use kdvlab_core::spectral::{is_resonant_length, CaseSpec, UncontrollableMode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;

fn unit_random(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn analytic_gramian_matches_trajectory_quadrature() {
    let (l, t, modes) = (5.0, 1.0, 8);
    let case = CaseSpec::new(1).unwrap();
    let g = observability_gramian(l, t, &case, modes).unwrap();
    let pairs = smallest_pairs(l, modes).unwrap();
    let lambdas: Vec<f64> = pairs.iter().map(|p| p.lambda).collect();
    let tau = trace_row(&pairs, case.observed()[0]);
    let dim = 2 * modes;
    // observed signal of each basis coordinate along its exact modal trajectory
    let signal = |i: usize, s: f64| {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        rotate(&e, &lambdas, s).iter().zip(&tau).map(|(a, b)| a * b).sum::<f64>()
    };
    let q = CompositeGauss::new(0.0, t, 400, 10);
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let want = q.integrate(|s| signal(i, s) * signal(j, s));
            worst = worst.max((g.matrix[(i, j)] - want).abs());
        }
    }
    assert!(worst <= 1e-6, "analytic vs quadrature gramian: {worst:e}");
}

#[test]
fn gramian_at_non_critical_length_is_definite() {
    let g = observability_gramian(5.0, 1.0, &CaseSpec::new(1).unwrap(), 16).unwrap();
    assert!(g.symmetry_defect() <= 1e-12);
    assert!(g.min_eig > 1e4 * f64::EPSILON * g.max_eig, "min {:e} max {:e}", g.min_eig, g.max_eig);
}

#[test]
fn gramian_null_space_at_two_pi_is_the_uncontrollable_mode() {
    let l = TAU;
    let case = CaseSpec::new(1).unwrap();
    let pairs = smallest_pairs(l, 16).unwrap();
    let g = gramian_from_pairs(&pairs, l, 1.0, &case).unwrap();
    assert!(g.ratio() <= 1e-8, "ratio {:e}", g.ratio());
    let mode = UncontrollableMode::new(1, 1).unwrap();
    assert!((mode.l - l).abs() < 1e-12);
    let (re, im) = mode_coordinates(&mode, &pairs);
    // the mode lies in the truncation
    assert!((norm(&re).hypot(norm(&im)) - 1.0).abs() < 1e-6);
    let cos = g.null_cosine(&[&re, &im], 1e-8);
    assert!(cos >= 0.999, "cosine {cos}");
}

#[test]
fn hum_reaches_zero_on_the_truncation() {
    let q0 = unit_random(32, 11);
    let z = vec![0.0; 32];
    let s = hum_control(&q0, &z, 1.0, 5.0, 0.0, 16, 4096).unwrap();
    assert!(s.min_eig > 0.0);
    let err = s.modal_terminal_error(1024, 10);
    assert!(err <= 1e-6, "modal terminal error {err:e}");
    let tol = s.condition * f64::EPSILON * s.rhs_norm;
    assert!(s.predicted_error <= tol, "{:e} > {tol:e}", s.predicted_error);
}

#[test]
fn hum_with_feedback_reaches_target() {
    let q0 = unit_random(12, 5);
    let target = unit_random(12, 6).iter().map(|x| 0.5 * x).collect::<Vec<_>>();
    let s = hum_control(&q0, &target, 4.0, 5.0, 1.0, 6, 2048).unwrap();
    let tol = s.condition * f64::EPSILON * s.rhs_norm;
    assert!(s.predicted_error <= tol);
    assert!(s.modal_terminal_error(512, 10) <= 1e-8);
}

#[test]
fn ill_conditioned_truncation_is_rejected() {
    let z = vec![0.0; 32];
    let mut q0 = z.clone();
    q0[0] = 1.0;
    let e = hum_control(&q0, &z, 1.0, TAU, 0.0, 16, 64).unwrap_err();
    assert!(!e.is_validation());
    assert!(e.to_string().contains("ill-conditioned"));
}

const REPLAY: (f64, f64, usize) = (5.0, 4.0, 6);

fn replay_signal(steps: usize, noise: Option<u64>) -> (Vec<f64>, TimeSeries) {
    let (l, t, modes) = REPLAY;
    let q0 = unit_random(2 * modes, 3);
    let s = hum_control(&q0, &vec![0.0; 2 * modes], t, l, 0.0, modes, steps).unwrap();
    let mut signal = s.signal.clone();
    if let Some(seed) = noise {
        let rms = (s.signal_norm_sq() / t).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in signal.values.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += 0.1 * rms * e;
        }
    }
    (q0, signal)
}

fn replay_error(n: usize, steps: usize, noise: Option<u64>) -> f64 {
    let (l, t, modes) = REPLAY;
    let (q0, signal) = replay_signal(steps, noise);
    let grid = Grid::new(l, n).unwrap();
    let init = ModalBasis::smallest(grid, modes).unwrap().reconstruct(&q0);
    verify_terminal(&signal, 0.0, &init, &StateField::zeros(n), grid, t, steps).unwrap().error
}

fn replay_state(n: usize, steps: usize) -> StateField {
    let (l, t, modes) = REPLAY;
    let (q0, signal) = replay_signal(steps, None);
    let grid = Grid::new(l, n).unwrap();
    let init = ModalBasis::smallest(grid, modes).unwrap().reconstruct(&q0);
    let mut cfg = SimConfig::new(Mode::LinearHomogeneous, l, t);
    cfg.n = n;
    cfg.dt = t / steps as f64;
    simulate_with(&cfg, &init, |s| signal.eval(s)).unwrap().final_state().clone()
}

/// ‖coarse − fine‖ on the coarse points; coarse point i sits at fine point 2i + 1.
fn nested_gap(c: &StateField, f: &StateField, h: f64) -> f64 {
    let d = |a: &[f64], b: &[f64]| (0..a.len()).map(|i| (a[i] - b[2 * i + 1]).powi(2)).sum::<f64>();
    (h * (d(&c.eta, &f.eta) + d(&c.v, &f.v))).sqrt()
}

#[test]
fn grid_replay_self_converges() {
    // An L² control that jumps at s = 0 and s = T excites mode m with amplitude ~ m⁻²;
    // dispersive phase error then limits the replay to roughly h^0.6.
    let ys: Vec<StateField> =
        [(511, 2048), (1023, 4096), (2047, 8192)].iter().map(|&(n, k)| replay_state(n, k)).collect();
    let d1 = nested_gap(&ys[0], &ys[1], REPLAY.0 / 512.0);
    let d2 = nested_gap(&ys[1], &ys[2], REPLAY.0 / 1024.0);
    assert!(d2 < 0.8 * d1, "successive replay gaps {d1:e}, {d2:e}");
}

#[test]
fn noisy_control_replays_worse() {
    let clean = replay_error(512, 4096, None);
    for seed in [1, 2, 3] {
        let noisy = replay_error(512, 4096, Some(seed));
        assert!(noisy > clean, "noisy {noisy:e} <= clean {clean:e}");
    }
}

#[test]
fn terminal_verification_needs_fine_enough_control() {
    let grid = Grid::new(5.0, 64).unwrap();
    let z = StateField::zeros(64);
    let c = TimeSeries { dt: 0.25, values: vec![0.0; 5] };
    assert!(verify_terminal(&c, 0.0, &z, &z, grid, 1.0, 100).unwrap_err().is_validation());
}

#[test]
fn case_one_sweep_finds_only_two_pi() {
    let case = CaseSpec::new(1).unwrap();
    let step = 0.05;
    let r = observability_sweep(5.0, 8.0, step, &case, 20.0, 8, None).unwrap();
    assert_eq!(r.dips.len(), 1, "dips {:?}", r.dips);
    let d = &r.dips[0];
    let w = n_witness(1, 1);
    assert!((d.l - w.l).abs() <= 10.0 * step);
    assert_eq!(d.nearest_tag, Some(SetTag::N));
    assert!((d.nearest_critical.unwrap() - TAU).abs() < 1e-12);
    assert!(r.points.iter().all(|p| !is_resonant_length(p.l)));
    assert_eq!(r.csv_rows().len(), r.points.len());
}

#[test]
fn every_critical_length_in_range_dips() {
    // modes: 8 contains the (1, 1) and (1, 2) obstructions at these lengths
    let case = CaseSpec::new(1).unwrap();
    let step = 0.05;
    let r = observability_sweep(5.0, 10.0, step, &case, 20.0, 8, None).unwrap();
    let crit: Vec<f64> =
        enum_lattice_set(SetTag::N, 10.0).iter().map(|c| c.value).filter(|&v| (5.0..=10.0).contains(&v)).collect();
    assert_eq!(crit.len(), 2);
    for c in &crit {
        assert!(r.dips.iter().any(|d| (d.l - c).abs() <= 10.0 * step), "no dip near {c}: {:?}", r.dips);
    }
    for d in &r.dips {
        assert!(crit.iter().any(|c| (d.l - c).abs() <= 10.0 * step), "stray dip {d:?}");
    }
}

#[test]
fn case_five_sweep_has_no_dip() {
    let r = observability_sweep(1.0, 12.0, 0.05, &CaseSpec::new(5).unwrap(), 20.0, 8, None).unwrap();
    assert!(r.dips.is_empty(), "{:?}", r.dips);
    assert!(!r.masked.is_empty() || r.points.iter().all(|p| !is_resonant_length(p.l)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gramian_symmetric_psd(l in 1.0f64..12.0, t in 0.2f64..5.0, id in 1u8..=12) {
        prop_assume!(!is_resonant_length(l));
        let g = observability_gramian(l, t, &CaseSpec::new(id).unwrap(), 6).unwrap();
        prop_assert!(g.symmetry_defect() <= 1e-12 * g.max_eig.max(1.0));
        prop_assert!(g.min_eig >= -1e-12 * g.max_eig.max(1.0), "min {:e} max {:e}", g.min_eig, g.max_eig);
    }

    #[test]
    fn min_eig_nondecreasing_in_t(l in 2.0f64..9.0, t in 0.5f64..4.0, dt in 0.05f64..2.0, id in 1u8..=12) {
        prop_assume!(!is_resonant_length(l));
        let c = CaseSpec::new(id).unwrap();
        let a = observability_gramian(l, t, &c, 6).unwrap();
        let b = observability_gramian(l, t + dt, &c, 6).unwrap();
        prop_assert!(b.min_eig >= a.min_eig - 1e-12 * b.max_eig.max(1.0));
    }

    #[test]
    fn control_preserving_perturbations_cost_more(seed in 0u64..1000) {
        let (l, t, modes) = (5.0, 4.0, 6);
        let dim = 2 * modes;
        let q0 = unit_random(dim, seed);
        let s = hum_control(&q0, &vec![0.0; dim], t, l, 0.0, modes, 256).unwrap();
        let quad = CompositeGauss::new(0.0, t, 128, 10);
        // reproducing span {τᵀ e^{Mᵀ(T−s)} e_i} at the quadrature nodes
        let phi: Vec<Vec<f64>> = quad.nodes.iter().map(|&x| s.kernel(t - x)).collect();
        let gram = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
            quad.weights.iter().zip(&phi).map(|(w, k)| w * k[i] * k[j]).sum::<f64>()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 7);
        let raw: Vec<f64> = quad.nodes.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
        let proj = nalgebra::DVector::from_fn(dim, |i, _| {
            quad.weights.iter().zip(&phi).zip(&raw).map(|((w, k), r)| w * k[i] * r).sum::<f64>()
        });
        let c = gram.cholesky().unwrap().solve(&proj);
        let delta: Vec<f64> = phi.iter().zip(&raw).map(|(k, r)| r - k.iter().zip(c.iter()).map(|(a, b)| a * b).sum::<f64>()).collect();
        let g: Vec<f64> = quad.nodes.iter().map(|&x| s.control_at(x)).collect();
        let nrm = |f: &dyn Fn(usize) -> f64| quad.weights.iter().enumerate().map(|(k, w)| w * f(k) * f(k)).sum::<f64>();
        let base = nrm(&|k| g[k]);
        let perturbed = nrm(&|k| g[k] + delta[k]);
        let dn = nrm(&|k| delta[k]);
        // terminal state unchanged: ∫ e^{M(T−s)} τ δ(s) ds = 0
        let shift: f64 = (0..dim)
            .map(|i| quad.weights.iter().zip(&phi).zip(&delta).map(|((w, k), d)| w * k[i] * d).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt();
        prop_assert!(shift <= 1e-8 * dn.sqrt().max(1.0));
        prop_assert!(perturbed > base);
        prop_assert!((perturbed - base - dn).abs() <= 1e-8 * perturbed);
    }
}
