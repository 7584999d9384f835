use crate::numerics::{phi1, C64};

/// k-th ρ-power times e^{ρy}: the k-th x-derivative of e^{ρ(x−shift)}, y = x − shift.
pub(crate) fn exp_term(k: u32, y: f64, rho: C64) -> C64 {
    rho.powu(k) * (rho * y).exp()
}

/// Divided difference over ρ of ρ^k e^{ρy} between `ra` and `rb`; exact at ra = rb.
pub(crate) fn dd_term(k: u32, y: f64, ra: C64, rb: C64) -> C64 {
    let e = (ra * y).exp();
    let mut s = rb.powu(k) * e * y * phi1((rb - ra) * y);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..k {
        acc += rb.powu(i) * ra.powu(k - 1 - i);
    }
    s += e * acc;
    s
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum ExpColumn {
    Simple { rho: C64, shift: f64 },
    Divided { ra: C64, rb: C64, shift: f64 },
}

impl ExpColumn {
    pub fn deriv(&self, k: u32, x: f64) -> C64 {
        match *self {
            ExpColumn::Simple { rho, shift } => exp_term(k, x - shift, rho),
            ExpColumn::Divided { ra, rb, shift } => dd_term(k, x - shift, ra, rb),
        }
    }
}

pub(crate) fn growth_shift(re: f64, l: f64) -> f64 {
    if re > 1e-9 {
        l
    } else {
        0.0
    }
}

/// Index pair of the closest roots when they fall inside the confluent radius.
pub(crate) fn confluent_pair(roots: &[C64; 3], l: f64) -> Option<(usize, usize)> {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let (i, j) = pairs
        .into_iter()
        .min_by(|a, b| (roots[a.0] - roots[a.1]).norm().total_cmp(&(roots[b.0] - roots[b.1]).norm()))
        .unwrap();
    ((roots[i] - roots[j]).norm() <= 0.5 / l.max(1.0)).then_some((i, j))
}

/// Scaled exponentials e^{ρ(x − x_ref)}, x_ref = L for growing modes; the
/// column of a near-coincident root is replaced by the divided difference.
pub(crate) fn exp_basis(roots: [C64; 3], l: f64) -> [ExpColumn; 3] {
    let mut cols = roots.map(|rho| ExpColumn::Simple { rho, shift: growth_shift(rho.re, l) });
    if let Some((i, j)) = confluent_pair(&roots, l) {
        let shift = growth_shift(0.5 * (roots[i].re + roots[j].re), l);
        cols[i] = ExpColumn::Simple { rho: roots[i], shift };
        cols[j] = ExpColumn::Divided { ra: roots[i], rb: roots[j], shift };
    }
    cols
}
