use kdvlab_core::numerics::CompositeGauss;
use kdvlab_core::sim::*;
use kdvlab_core::spectral::eig_b;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn smooth(grid: &Grid) -> StateField {
    let l = grid.l;
    StateField::from_fn(
        grid,
        |x| (x * (l - x)).powi(2) * (1.0 + 0.3 * x) / l.powi(4) * 8.0,
        |x| (PI * x / l).sin().powi(3) * (1.0 - 0.2 * x / l),
    )
}

fn config(mode: Mode, l: f64, t: f64, n: usize, steps: usize) -> SimConfig {
    let mut c = SimConfig::new(mode, l, t);
    c.n = n;
    c.dt = t / steps as f64;
    c
}

#[test]
fn generator_spectrum_is_imaginary() {
    let g = Generator::new(Grid::new(4.0, 200).unwrap()).dense();
    let scale = g.amax();
    for z in g.complex_eigenvalues().iter() {
        assert!(z.re.abs() <= 1e-10 * scale.max(1.0), "{z}");
    }
}

#[test]
fn discrete_frequencies_converge() {
    let l = 3.0;
    let exact = eig_b(l, -3, 3).unwrap().lambdas();
    let err = |n: usize| {
        let b = Generator::new(Grid::new(l, n).unwrap()).reflected_dense();
        let ev = b.symmetric_eigenvalues();
        exact
            .iter()
            .map(|&lam| ev.iter().map(|&e| (e - lam).abs()).fold(f64::INFINITY, f64::min) / lam.abs().max(1.0))
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(99), err(199));
    assert!(e1 / e2 >= 2.0, "{e1} {e2}");
}

#[test]
fn feedback_energy_identity_and_monotone() {
    let grid = Grid::new(5.0, 256).unwrap();
    let init = smooth(&grid);
    let tr = simulate(&config(Mode::Feedback, 5.0, 2.0, 256, 2048), &init).unwrap();
    let d = diagnostics(&tr, None).unwrap();
    let e0 = 0.5 * init.norm_sq(&grid);
    assert!(d.max_energy_residual() <= 1e-8 * e0);
    for w in d.norm.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
    assert!(d.dissipation.last().unwrap() > &0.0);
}

#[test]
fn controlled_energy_identity() {
    let grid = Grid::new(4.0, 128).unwrap();
    let mut cfg = config(Mode::Feedback, 4.0, 1.0, 128, 512);
    cfg.alpha = 0.5;
    cfg.control = Some(TimeSeries::from_fn(|t| (3.0 * t).sin() * t, 1.0, 512));
    let init = smooth(&grid);
    let tr = simulate(&cfg, &init).unwrap();
    let d = diagnostics(&tr, None).unwrap();
    assert!(d.max_energy_residual() <= 1e-10 * init.norm_sq(&grid));
}

#[test]
fn kato_ratio_below_bound() {
    let grid = Grid::new(5.0, 512).unwrap();
    let tr = simulate(&config(Mode::Feedback, 5.0, 4.0, 512, 4096), &smooth(&grid)).unwrap();
    let r = diagnostics(&tr, None).unwrap().kato_ratio().unwrap();
    assert!(r <= 1.05, "{r}");
}

#[test]
fn trace_bound_finite_over_random_inits() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let l = 4.0;
    let grid = Grid::new(l, 256).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = |x: f64, off: usize| {
            let s = x / l;
            let bump = (s * (1.0 - s)).powi(2);
            bump * (0..4).map(|k| c[k + off] * ((k + 1) as f64 * PI * s).cos()).sum::<f64>()
        };
        let init = StateField::from_fn(&grid, |x| f(x, 0), |x| f(x, 4));
        let tr = simulate(&config(Mode::LinearHomogeneous, l, 1.0, 256, 512), &init).unwrap();
        let h = grid.h;
        let x1 = init.norm_sq(&grid)
            + traces::grad_sq(&init.eta, 0.0, 0.0, h)
            + traces::grad_sq(&init.v, 0.0, 0.0, h);
        let s = &tr.samples;
        let num: f64 = (1..s.len())
            .map(|k| 0.5 * tr.dt * (s[k - 1].eta_x_l.powi(2) + s[k - 1].v_x_0.powi(2) + s[k].eta_x_l.powi(2) + s[k].v_x_0.powi(2)))
            .sum();
        let r = num / x1;
        assert!(r.is_finite());
        worst = worst.max(r);
    }
    println!("max trace ratio over 20 inits: {worst:.4e}");
    assert!(worst < 1e3);
}

#[test]
fn morawetz_residual_refines() {
    let mut prev: Option<f64> = None;
    for (n, steps) in [(127usize, 256usize), (255, 512), (511, 1024)] {
        let grid = Grid::new(5.0, n).unwrap();
        let init = smooth(&grid);
        let tr = simulate(&config(Mode::LinearHomogeneous, 5.0, 1.0, n, steps), &init).unwrap();
        let m = diagnostics(&tr, None).unwrap().morawetz.last().unwrap().abs();
        if let Some(p) = prev {
            assert!(p / m >= 3.0, "n = {n}: ratio {}", p / m);
        }
        prev = Some(m);
    }
}

#[test]
fn modal_propagator_matches_crank_nicolson_at_second_order() {
    let l = 5.0;
    let grid = Grid::new(l, 4096).unwrap();
    let basis = ModalBasis::smallest(grid, 6).unwrap();
    let lam = basis.lambdas();
    let q0: Vec<f64> =
        (0..basis.dim()).map(|i| if lam[i / 2].abs() <= 10.0 { ((i + 1) as f64 * 0.9).sin() } else { 0.0 }).collect();
    let init = basis.reconstruct(&q0);
    let exact = propagate_modal(&init, 1.0, &basis).unwrap();
    assert!(exact.projection_loss < 1e-6);
    let gaps: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&steps| {
            let tr = simulate(&config(Mode::LinearHomogeneous, l, 1.0, 4096, steps), &init).unwrap();
            let q = basis.project(tr.final_state());
            q.iter().zip(&exact.coords).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    for w in gaps.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..=4.5).contains(&r), "{gaps:?}");
    }
}

fn ramp(t: f64, t_end: f64) -> f64 {
    // smooth start: vanishes with its first two derivatives at t = 0
    let s = t / t_end;
    s * s * s * (2.0 * PI * s).cos()
}

#[test]
fn duality_identity_on_paired_runs() {
    let l = 4.0;
    let n = 128;
    let steps = 400;
    let grid = Grid::new(l, n).unwrap();
    let mut cfg = config(Mode::Nonhomogeneous, l, 1.0, n, steps);
    cfg.save_every = 1;
    cfg.boundary.g2 = Some(TimeSeries::from_fn(|t| ramp(t, 1.0), 1.0, steps));
    cfg.boundary.h1 = Some(TimeSeries::from_fn(|t| 0.5 * ramp(t, 1.0).powi(2), 1.0, steps));
    cfg.boundary.g0 = Some(TimeSeries::from_fn(|t| -0.3 * ramp(t, 1.0), 1.0, steps));
    let traj = simulate(&cfg, &smooth(&grid)).unwrap();
    let mut acfg = config(Mode::LinearHomogeneous, l, 1.0, n, steps);
    acfg.save_every = 1;
    let adj_init = StateField::from_fn(&grid, |x| (PI * x / l).sin().powi(4), |x| (x * (l - x)).powi(2) / 16.0);
    let adj = simulate(&acfg, &adj_init).unwrap();
    let d = diagnostics(&traj, Some(&adj)).unwrap();
    assert!(d.max_duality_residual().unwrap() <= 1e-6);
}

#[test]
fn duality_requires_dense_adjoint() {
    let grid = Grid::new(4.0, 64).unwrap();
    let mut cfg = config(Mode::Nonhomogeneous, 4.0, 0.5, 64, 50);
    cfg.boundary.g2 = Some(TimeSeries::from_fn(|t| t * t, 0.5, 50));
    let tr = simulate(&cfg, &smooth(&grid)).unwrap();
    let adj = simulate(&config(Mode::LinearHomogeneous, 4.0, 0.5, 64, 50), &smooth(&grid)).unwrap();
    assert!(diagnostics(&tr, Some(&adj)).unwrap_err().is_validation());
}

/// ⟨c_j, ψ⟩_h against the boundary terms of the continuous duality identity.
fn pairings(n: usize) -> ([f64; 6], [f64; 6]) {
    let l = 5.0;
    let grid = Grid::new(l, n).unwrap();
    let c = boundary_inputs(&Generator::new(grid));
    // θ(0)=θ(L)=θ′(0)=0, u(0)=u(L)=u′(L)=0
    let th = |x: f64| x * x * (l - x) * (1.0 + 0.3 * x);
    let u = |x: f64| x * (l - x).powi(2) * (1.0 + 0.2 * x);
    let psi = StateField::from_fn(&grid, th, u);
    let d = |f: &dyn Fn(f64) -> f64, k: u32, x: f64| {
        let e = 1e-3;
        match k {
            1 => (f(x + e) - f(x - e)) / (2.0 * e),
            _ => (f(x + e) - 2.0 * f(x) + f(x - e)) / (e * e),
        }
    };
    // polynomial data: finite differences are exact up to rounding at this step
    let want = [d(&u, 2, 0.0), -d(&u, 2, l), -d(&u, 1, 0.0), d(&th, 2, 0.0), -d(&th, 2, l), d(&th, 1, l)];
    (std::array::from_fn(|j| c[j].inner(&psi, &grid)), want)
}

fn pairing_errors(n: usize) -> [f64; 6] {
    let (got, want) = pairings(n);
    std::array::from_fn(|j| got[j] - want[j])
}

#[test]
fn boundary_pairings_converge_to_traces() {
    let a = pairing_errors(400);
    let b = pairing_errors(800);
    for j in [1usize, 2, 3, 5] {
        assert!(b[j].abs() < 0.3 && a[j] / b[j] > 1.8, "{}: {} {}", DATA_NAMES[j], a[j], b[j]);
    }
}

#[test]
fn reflection_closure_halves_h0_and_g1_pairings() {
    // the ghost closures at the under-determined ends pair η(0) and v(L) data
    // with half of u_xx(0) and −θ_xx(L)
    let (got, want) = pairings(1600);
    for j in [0usize, 4] {
        assert!((got[j] / want[j] - 0.5).abs() < 0.01, "{}: {} vs {}", DATA_NAMES[j], got[j], want[j]);
    }
}

#[test]
fn stall_and_decay() {
    use kdvlab_core::spectral::UncontrollableMode;
    let m = UncontrollableMode::new(1, 1).unwrap();
    let grid = Grid::new(m.l, 512).unwrap();
    let init = StateField::from_fn(&grid, |x| m.theta(0, x).re, |x| m.u(0, x).re);
    let tr = simulate(&config(Mode::Feedback, m.l, 10.0, 512, 4096), &init).unwrap();
    let e0 = tr.samples[0].norm_sq;
    let drift = tr.samples.iter().map(|s| (s.norm_sq - e0).abs() / e0).fold(0.0, f64::max);
    assert!(drift <= 1e-6, "{drift}");

    let grid = Grid::new(5.0, 512).unwrap();
    let init = smooth(&grid).scaled(0.05);
    let mut cfg = config(Mode::NonlinearFeedback, 5.0, 10.0, 512, 4096);
    cfg.scheme = Scheme::Imex;
    let tr = simulate(&cfg, &init).unwrap();
    let fit = decay_fit_trace(&diagnostics(&tr, None).unwrap()).unwrap();
    assert!(fit.mu > 0.0 && fit.interval.0 > 0.0, "{fit:?}");
}

#[test]
fn modal_basis_is_orthonormal_on_grid() {
    let grid = Grid::new(3.5, 600).unwrap();
    let basis = ModalBasis::smallest(grid, 8).unwrap();
    assert!(basis.orthonormality_defect() < 1e-8);
    let quad = CompositeGauss::new(0.0, 3.5, 128, 12);
    for p in &basis.pairs {
        assert!((quad.integrate(|x| p.value(x).powi(2)) - 1.0).abs() < 1e-10);
    }
}
