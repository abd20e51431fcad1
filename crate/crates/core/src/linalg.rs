//! Small dense linear algebra on row-major `n × n` slices.

use nalgebra::DMatrix;

/// Determinant by LU factorisation with partial pivoting. An exactly zero
/// pivot column yields an exact zero rather than a division by zero.
pub fn det_lu(a: &[f64], n: usize) -> f64 {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("non-empty range");
        let pv = m[pivot * n + col];
        if pv == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        det *= pv;
        for row in col + 1..n {
            let factor = m[row * n + col] / pv;
            if factor != 0.0 {
                for k in col..n {
                    m[row * n + k] -= factor * m[col * n + k];
                }
            }
        }
    }
    det
}

/// Singular values of a symmetric matrix (absolute eigenvalues), descending.
pub fn symmetric_singular_values(a: &[f64], n: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, a);
    let sym = (&m + m.transpose()) * 0.5;
    let mut s: Vec<f64> = sym.symmetric_eigenvalues().iter().map(|v| v.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol` times the largest one; a
/// matrix whose largest singular value is at most `abs_floor` has rank 0.
pub fn symmetric_rank(a: &[f64], n: usize, rel_tol: f64, abs_floor: f64) -> usize {
    let s = symmetric_singular_values(a, n);
    let top = s.first().copied().unwrap_or(0.0);
    if !(top > abs_floor) {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Inverse via nalgebra's LU; `None` when singular.
pub fn inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, a);
    m.try_inverse().map(|inv| inv.transpose().as_slice().to_vec())
}

/// Cholesky test for positive definiteness of a symmetric matrix.
pub fn is_positive_definite(a: &[f64], n: usize) -> bool {
    DMatrix::from_row_slice(n, n, a).cholesky().is_some()
}

pub fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Most frequent value; ties go to the smaller value.
pub fn mode(values: &[usize]) -> Option<usize> {
    let mut counts = std::collections::BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Leibniz expansion, independent of the LU route.
    fn det_leibniz(a: &[f64], n: usize) -> f64 {
        fn perms(k: usize, p: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            if p.len() == k {
                out.push(p.clone());
                return;
            }
            for i in 0..k {
                if !used[i] {
                    used[i] = true;
                    p.push(i);
                    perms(k, p, used, out);
                    p.pop();
                    used[i] = false;
                }
            }
        }
        let mut all = Vec::new();
        perms(n, &mut Vec::new(), &mut vec![false; n], &mut all);
        all.iter()
            .map(|p| {
                let inversions = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                sign * (0..n).map(|i| a[i * n + p[i]]).product::<f64>()
            })
            .sum()
    }

    #[test]
    fn lu_matches_leibniz() {
        let a = [2.0, -1.0, 0.5, 0.3, 1.0, 4.0, -2.0, 0.7, 3.0, 1.0, 1.0, 0.0, 0.2, -0.5, 1.5, 2.5];
        assert!((det_lu(&a, 4) - det_leibniz(&a, 4)).abs() < 1e-12);
    }

    #[test]
    fn bordered_euclidean_case() {
        let a = [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        assert_eq!(det_lu(&a, 3), -1.0);
    }

    #[test]
    fn zero_pivot_column_gives_exact_zero() {
        let a = [0.0, 0.0, 1.0, 0.0, 0.0, 2.0, 1.0, 3.0, 0.0];
        assert_eq!(det_lu(&a, 3), 0.0);
    }

    #[test]
    fn rank_with_floor() {
        let a = [1.0, 0.0, 0.0, 1e-12];
        assert_eq!(symmetric_rank(&a, 2, 1e-8, 0.0), 1);
        assert_eq!(symmetric_rank(&[0.0; 4], 2, 1e-8, 0.0), 0);
        assert_eq!(symmetric_rank(&[1e-14, 0.0, 0.0, 1e-14], 2, 1e-8, 1e-10), 0);
    }

    #[test]
    fn inverse_row_major() {
        let a = [2.0, 1.0, 0.0, 3.0];
        let inv = inverse(&a, 2).unwrap();
        assert!((inv[0] - 0.5).abs() < 1e-15 && (inv[1] + 1.0 / 6.0).abs() < 1e-15);
        assert!((inv[2]).abs() < 1e-15 && (inv[3] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mode_prefers_smaller_on_ties() {
        assert_eq!(mode(&[2, 1, 2, 1]), Some(1));
        assert_eq!(mode(&[2, 2, 1]), Some(2));
        assert_eq!(mode(&[]), None);
    }
}
