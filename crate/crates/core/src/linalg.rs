//! Dense complex least squares with a conditioning guard.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::signal::C64;

/// Largest admissible condition number of the normal matrix `AᴴA`.
pub const MAX_NORMAL_CONDITION: f64 = 1e12;

/// Least-squares solution `x = (AᴴA)⁻¹Aᴴy` of an `rows × cols` system given
/// column-major as `columns[j][i]`.
///
/// Solved through the SVD of `A` rather than by forming `AᴴA`; the guard is
/// still expressed on `cond(AᴴA) = cond(A)²`.
pub fn least_squares(columns: &[Vec<C64>], y: &[C64]) -> Result<Vec<C64>> {
    let rows = y.len();
    let cols = columns.len();
    if cols == 0 {
        return Ok(Vec::new());
    }
    if rows < cols {
        return Err(Error::RankDeficient {
            rows,
            cols,
            condition: f64::INFINITY,
        });
    }
    if let Some(c) = columns.iter().find(|c| c.len() != rows) {
        return Err(Error::LengthMismatch {
            expected: rows,
            actual: c.len(),
        });
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| columns[j][i]);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        (smax / smin).powi(2)
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_NORMAL_CONDITION) {
        return Err(Error::RankDeficient {
            rows,
            cols,
            condition,
        });
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::invalid(format!("least-squares solve failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// `A x` for column-major `A`.
pub fn apply(columns: &[Vec<C64>], x: &[C64], rows: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows];
    for (col, xi) in columns.iter().zip(x) {
        for (o, a) in out.iter_mut().zip(col) {
            *o += a * xi;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_identity() {
        let cols = vec![
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ];
        let y = vec![C64::new(2.0, 1.0), C64::new(-1.0, 3.0)];
        let x = least_squares(&cols, &y).unwrap();
        assert!((x[0] - y[0]).norm() < 1e-14);
        assert!((x[1] - y[1]).norm() < 1e-14);
    }

    #[test]
    fn underdetermined_is_rank_error() {
        let cols = vec![vec![C64::new(1.0, 0.0)], vec![C64::new(2.0, 0.0)]];
        assert!(matches!(
            least_squares(&cols, &[C64::new(1.0, 0.0)]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn collinear_is_rank_error() {
        let c: Vec<C64> = (0..5).map(|i| C64::new(i as f64, 1.0)).collect();
        let d: Vec<C64> = c.iter().map(|v| v * C64::new(0.0, 2.0)).collect();
        let y = c.clone();
        assert!(matches!(
            least_squares(&[c, d], &y),
            Err(Error::RankDeficient { .. })
        ));
    }
}
