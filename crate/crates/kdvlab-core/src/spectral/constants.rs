use crate::numerics::golden_section;

/// Roots of 4X² + X − 2 = 0 and the cosines cos(1/√(X⁻²−1)).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Case5Constants {
    pub x_plus: f64,
    pub x_minus: f64,
    pub cos_plus: f64,
    pub cos_minus: f64,
}

pub fn case5_constants() -> Case5Constants {
    let s = 33f64.sqrt();
    let x_plus = (-1.0 + s) / 8.0;
    let x_minus = (-1.0 - s) / 8.0;
    let f = |x: f64| (1.0 / (1.0 / (x * x) - 1.0).sqrt()).cos();
    Case5Constants { x_plus, x_minus, cos_plus: f(x_plus), cos_minus: f(x_minus) }
}

/// ζ(L) = h(L)² + k(L)².
pub fn zeta(l: f64) -> f64 {
    let r3 = 3f64.sqrt();
    let c = l / r3;
    let (s1, c1) = c.sin_cos();
    let (s2, c2) = (2.0 * c).sin_cos();
    let h = c1 * (c1 * (1.0 - 4.0 * s1 * s1) - 1.0) / l - l * c2 + (s1 + s2) / r3;
    let k = (0.5 / l + l) * s2 + (c2 + 2.0 * c1) / r3;
    h * h + k * k
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ZetaInfimum {
    pub value: f64,
    pub argmin: f64,
    /// The infimum is approached at the left end of the scan rather than attained inside.
    pub at_left_end: bool,
    pub samples: usize,
}

/// Log-uniform scan of ζ on [l_min, l_max] with golden-section refinement of
/// every interior local minimum.
pub fn zeta_infimum(l_min: f64, l_max: f64, samples: usize) -> ZetaInfimum {
    assert!(l_min > 0.0 && l_max > l_min && samples >= 3);
    let (a, b) = (l_min.ln(), l_max.ln());
    let xs: Vec<f64> = (0..samples).map(|i| (a + (b - a) * i as f64 / (samples - 1) as f64).exp()).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| zeta(x)).collect();
    let mut best = (ys[0], xs[0], true);
    if ys[samples - 1] < best.0 {
        best = (ys[samples - 1], xs[samples - 1], false);
    }
    for i in 1..samples - 1 {
        if ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1] {
            let (x, y) = golden_section(zeta, xs[i - 1], xs[i + 1], 1e-12 * xs[i]);
            if y < best.0 {
                best = (y, x, false);
            }
        }
    }
    ZetaInfimum { value: best.0, argmin: best.1, at_left_end: best.2, samples }
}
