use kdvlab_core::critical::{n_witness, solve_transcendental_set, Branch, SearchBox, Witness};
use kdvlab_core::spectral::{
    eig_b, eigenfunction_samples, lift_to_A, min_sv, min_sv_sweep, default_p_grid, refine_dip, second_trace_ratio,
    CaseSpec,
};
use kdvlab_core::numerics::{CompositeGauss, C64};
use std::f64::consts::PI;

#[test]
fn first_ten_modes_orthonormal() {
    let l = PI;
    let s = eig_b(l, -4, 5).unwrap();
    assert_eq!(s.pairs.len(), 10);
    let quad = CompositeGauss::new(0.0, l, 256, 12);
    for a in &s.pairs {
        for b in &s.pairs {
            let ip = quad.integrate(|x| a.value(x) * b.value(x));
            let want = if a.index == b.index { 1.0 } else { 0.0 };
            assert!((ip - want).abs() <= 1e-8, "({}, {}) -> {ip}", a.index, b.index);
        }
    }
}

#[test]
fn trapezoid_samples_orthonormal() {
    let l = 4.0;
    let s = eig_b(l, -2, 3).unwrap();
    let n = 20_000;
    let grid: Vec<f64> = (0..=n).map(|i| l * i as f64 / n as f64).collect();
    let v: Vec<Vec<f64>> = s.pairs.iter().map(|p| eigenfunction_samples(p, &grid).unwrap()).collect();
    let h = l / n as f64;
    for i in 0..v.len() {
        for j in 0..v.len() {
            let mut ip: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum::<f64>() * h;
            ip -= 0.5 * h * (v[i][0] * v[j][0] + v[i][n] * v[j][n]);
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-6, "{i} {j} {ip}");
        }
    }
}

#[test]
fn asymptotic_ratio_and_gaps() {
    let l = PI;
    let s = eig_b(l, 1, 41).unwrap();
    assert!(s.warnings.is_empty(), "{:?}", s.warnings);
    for n in 20..=40 {
        let lam = s.get(n).unwrap().lambda;
        let m = (n + s.k1) as f64;
        let ratio = lam / ((PI / 6.0 + 2.0 * PI * m) / l).powi(3);
        assert!((ratio - 1.0).abs() <= 0.02, "n = {n}: {ratio}");
    }
    for n in 30..=40 {
        let gap = s.get(n + 1).unwrap().lambda - s.get(n).unwrap().lambda;
        let m = (n + s.k1) as f64;
        let model = 24.0 * PI.powi(3) * m * m / l.powi(3);
        assert!((gap / model - 1.0).abs() <= 0.1, "n = {n}: {}", gap / model);
    }
}

#[test]
fn second_trace_ratio_limits() {
    let l = PI;
    let s = eig_b(l, -40, 40).unwrap();
    for p in &s.pairs {
        assert!(p.deriv_complex(2, 0.0).norm() > 0.0 && p.deriv_complex(2, l).norm() > 0.0);
    }
    for n in 30..=40 {
        let r = second_trace_ratio(s.get(n).unwrap()).unwrap();
        assert!((r - C64::new(3f64.sqrt(), 0.0)).norm() <= 0.01 * 3f64.sqrt(), "n = {n}: {r}");
    }
    // K₋: successive ratios settle on a nonzero constant
    let tail: Vec<C64> = (-40..=-30).map(|n| second_trace_ratio(s.get(n).unwrap()).unwrap()).collect();
    let last = tail[tail.len() - 1];
    assert!(last.norm() > 1e-3);
    for r in &tail {
        assert!((r - last).norm() <= 0.05 * last.norm(), "{r} vs {last}");
    }
}

#[test]
fn lifted_family_orthonormal() {
    let l = 3.5;
    let s = eig_b(l, -2, 2).unwrap();
    let n = 8000;
    let grid: Vec<f64> = (0..=n).map(|i| l * i as f64 / n as f64).collect();
    let mut modes = Vec::new();
    for p in &s.pairs {
        let (a, b) = lift_to_A(p, &grid).unwrap();
        modes.push(a);
        modes.push(b);
    }
    let w: Vec<f64> = (0..=n).map(|i| if i == 0 || i == n { 0.5 } else { 1.0 } * l / n as f64).collect();
    for a in &modes {
        for b in &modes {
            let ip: C64 = (0..=n).map(|i| w[i] * (a.theta[i] * b.theta[i].conj() + a.u[i] * b.u[i].conj())).sum();
            let same = std::ptr::eq(a, b);
            let want = if same { 1.0 } else { 0.0 };
            assert!((ip - C64::new(want, 0.0)).norm() < 1e-6, "{ip}");
        }
    }
}

#[test]
fn case5_has_no_dip() {
    let case = CaseSpec::new(5).unwrap();
    for l in [3.0, 5.0, 2.0 * PI, 8.0] {
        let rep = min_sv_sweep(l, &case, &default_p_grid(l, 3)).unwrap();
        assert!(rep.dips().is_empty(), "L = {l}: {:?}", rep.dips());
    }
}

#[test]
fn lattice_witnesses_produce_dips_in_every_case_of_their_set() {
    // 𝒩 appears in cases 1,2,3,4,6,7,8,9
    for (k, ll) in [(1, 1), (1, 2), (2, 2)] {
        let w = n_witness(k, ll);
        for id in [1u8, 2, 3, 4, 6, 7, 8, 9] {
            let case = CaseSpec::new(id).unwrap();
            let scale = 1e-6 * (1.0 + w.p.abs());
            let d = refine_dip(w.l, &case, w.p - scale, w.p + scale);
            assert!(d.sigma <= 1e-8, "case {id} at ({k},{ll}): {}", d.sigma);
        }
    }
}

#[test]
fn transcendental_lengths_cross_check() {
    let bx = SearchBox { re_max: 8.0, im_max: 16.0 };
    let scan = solve_transcendental_set(Branch::G, bx, 0.5);
    assert!(!scan.lengths.is_empty());
    let case = CaseSpec::new(3).unwrap();
    for cl in scan.lengths.iter().take(3) {
        let Witness::Transcendental(gw) = &cl.witness else { panic!("lattice witness in G scan") };
        let (_, p) = gw.mus_and_p();
        assert!(p.im.abs() < 1e-8 * (1.0 + p.re.abs()));
        let l = cl.value;
        let scale = 1e-6 * (1.0 + p.re.abs());
        let d = refine_dip(l, &case, p.re - scale, p.re + scale);
        assert!(d.sigma <= 1e-8, "L = {l}: {}", d.sigma);
        assert!(min_sv(l, &case, p.re + 0.3).unwrap() > 1e-6);
    }
}

#[test]
fn random_noncritical_lengths_show_no_dip() {
    use kdvlab_core::critical::{case_sets, enum_lattice_set};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 20 {
        let l: f64 = rng.random_range(1.0..12.0);
        for id in [1u8, 2, 4, 5, 6, 7, 8, 9, 10, 11] {
            let sets = case_sets(id).unwrap();
            let near = sets.iter().any(|&t| enum_lattice_set(t, 13.0).iter().any(|c| (c.value - l).abs() < 0.05));
            if near {
                continue;
            }
            let case = CaseSpec::new(id).unwrap();
            let rep = min_sv_sweep(l, &case, &default_p_grid(l, 3)).unwrap();
            let m = rep.refined_min().map(|d| d.sigma).unwrap_or(f64::INFINITY);
            assert!(m > 1e-6, "case {id} at L = {l}: {m}");
        }
        checked += 1;
    }
}
