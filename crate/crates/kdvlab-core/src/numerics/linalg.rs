use super::C64;
use nalgebra::{DMatrix, DVector};

/// Scales every nonzero row to unit Euclidean norm.
pub fn normalize_rows(m: &mut DMatrix<C64>) {
    for mut row in m.row_iter_mut() {
        let n = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            row.iter_mut().for_each(|z| *z /= n);
        }
    }
}

pub fn min_singular_value(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().singular_values();
    sv.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Smallest singular value and its right singular vector.
pub fn min_singular_pair(m: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let ncols = m.ncols();
    let svd = if m.nrows() >= ncols {
        m.clone().svd(false, true)
    } else {
        // pad with zero rows so that V_t spans all columns
        let mut sq = DMatrix::zeros(ncols, ncols);
        sq.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        sq.svd(false, true)
    };
    let vt = svd.v_t.expect("v_t requested");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let v = vt.row(k).transpose().map(|z| z.conj());
    (s, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_vector_of_rank_deficient_matrix() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0].map(|x| C64::new(x, 0.5 * x)),
        );
        let (s, v) = min_singular_pair(&m);
        assert!(s < 1e-12);
        assert!((&m * &v).norm() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wide_matrix_null_vector() {
        let m = DMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let (s, v) = min_singular_pair(&m);
        assert!(s < 1e-14);
        assert!((v[0] + v[1]).norm() < 1e-14);
    }
}
