use crate::{Error, Result};

/// Dense real symmetric matrix, row-major. Writes go to both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("matrix dimension must be at least 1".into()));
        }
        Ok(Self {
            dim,
            data: vec![0.0; dim * dim],
        })
    }

    /// Builds from the upper triangle of `f(i, j)`, `i <= j`.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = Self::zeros(dim)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Domain(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Domain(format!("entry ({i}, {j}) is not finite")));
                }
                if v != rows[j][i] {
                    return Err(Error::Domain(format!("entry ({i}, {j}) breaks symmetry")));
                }
                m.data[i * dim + j] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    let v = self.get(i, j);
                    sum += v * v;
                }
            }
        }
        sum.sqrt()
    }

    /// Conjugation by a permutation: `result[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim {
            return Err(Error::Domain(
                "permutation length differs from dimension".into(),
            ));
        }
        Self::from_upper_fn(self.dim, |i, j| self.get(perm[i], perm[j]))
    }
}

/// Eigenvalues in ascending order, each with the norm of what remains of its
/// row off the diagonal when the solver stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sweeps: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.abs()).sum()
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JacobiOptions {
    /// Stop once the off-diagonal norm is below `tolerance * ||A||_F`.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_sweeps: 100,
        }
    }
}

pub fn eigenvalues_symmetric(m: &SymmetricMatrix) -> Result<Spectrum> {
    eigenvalues_symmetric_with(m, JacobiOptions::default())
}

/// Cyclic Jacobi: sweep over every upper off-diagonal pair, annihilating each
/// with a plane rotation, until the off-diagonal norm is small.
pub fn eigenvalues_symmetric_with(m: &SymmetricMatrix, opts: JacobiOptions) -> Result<Spectrum> {
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let n = m.dim;
    let mut a = m.clone();
    let threshold = opts.tolerance * m.frobenius_norm();
    let mut sweeps = 0;
    let mut off = a.off_diagonal_norm();

    while off > threshold || (off > 0.0 && threshold == 0.0) {
        if sweeps == opts.max_sweeps {
            return Err(Error::Convergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, p, q);
            }
        }
        off = a.off_diagonal_norm();
    }

    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let r = (0..n)
                .filter(|&j| j != i)
                .map(|j| a.get(i, j).powi(2))
                .sum::<f64>()
                .sqrt();
            (a.get(i, i), r)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (eigenvalues, residuals) = pairs.into_iter().unzip();
    Ok(Spectrum {
        eigenvalues,
        residuals,
        sweeps,
    })
}

/// Applies the rotation that zeroes `a[p][q]`.
fn rotate(a: &mut SymmetricMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    // smaller root of t^2 + 2 t theta - 1 = 0
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    let n = a.dim;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        a.set(r, p, arp - s * (arq + tau * arp));
        a.set(r, q, arq + s * (arp - tau * arq));
    }
    a.set(p, p, app - t * apq);
    a.set(q, q, aqq + t * apq);
    a.set(p, q, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(dim: usize, rng: &mut impl Rng) -> SymmetricMatrix {
        SymmetricMatrix::from_upper_fn(dim, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    /// det(A - x I) by Gaussian elimination with partial pivoting.
    fn char_poly(m: &SymmetricMatrix, x: f64) -> f64 {
        let n = m.dim();
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| m.get(i, j) - if i == j { x } else { 0.0 })
                    .collect()
            })
            .collect();
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            if a[piv][col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det *= a[col][col];
            for row in (col + 1)..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
        det
    }

    /// Roots of the characteristic polynomial: scan the Gershgorin interval
    /// for sign changes, then bisect each bracket.
    fn char_poly_roots(m: &SymmetricMatrix) -> Vec<f64> {
        let n = m.dim();
        let bound = (0..n)
            .map(|i| (0..n).map(|j| m.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1e-6;
        let steps = 200_000;
        let h = 2.0 * bound / steps as f64;
        let mut roots = Vec::new();
        let mut x0 = -bound;
        let mut f0 = char_poly(m, x0);
        for k in 1..=steps {
            let x1 = -bound + h * k as f64;
            let f1 = char_poly(m, x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0.signum() != f1.signum() && f1 != 0.0 {
                let (mut lo, mut hi, flo) = (x0, x1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if char_poly(m, mid).signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn one_by_one() {
        let m = SymmetricMatrix::from_rows(&[vec![3.5]]).unwrap();
        let s = eigenvalues_symmetric(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![3.5]);
        assert_eq!(s.sweeps, 0);
    }

    #[test]
    fn pauli_x_pair() {
        let a = 0.37;
        let m = SymmetricMatrix::from_rows(&[vec![0.0, a], vec![a, 0.0]]).unwrap();
        let s = eigenvalues_symmetric(&m).unwrap();
        assert!((s.eigenvalues[0] + a).abs() < 1e-15);
        assert!((s.eigenvalues[1] - a).abs() < 1e-15);
        assert!((s.trace_norm() - 2.0 * a).abs() < 1e-15);
    }

    #[test]
    fn random_six_by_six_matches_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let m = random_symmetric(6, &mut rng);
            let s = eigenvalues_symmetric(&m).unwrap();
            let roots = char_poly_roots(&m);
            assert_eq!(roots.len(), 6, "oracle found {roots:?}");
            for (got, want) in s.eigenvalues.iter().zip(&roots) {
                assert!((got - want).abs() < 1e-9, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn residuals_and_trace_meet_tolerances() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for dim in [2, 7, 20, 60] {
            let m = random_symmetric(dim, &mut rng);
            let s = eigenvalues_symmetric(&m).unwrap();
            assert_eq!(s.len(), dim);
            let fro = m.frobenius_norm();
            let off = s.residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
            assert!(off < 1e-12 * fro);
            assert!((s.sum() - m.trace()).abs() <= 1e-10 * m.trace().abs().max(fro));
        }
    }

    #[test]
    fn spectrum_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random_symmetric(5, &mut rng);
            let mut perm: Vec<usize> = (0..5).collect();
            for i in (1..5).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let a = eigenvalues_symmetric(&m).unwrap();
            let b = eigenvalues_symmetric(&m.permuted(&perm).unwrap()).unwrap();
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let s = eigenvalues_symmetric(&SymmetricMatrix::zeros(4).unwrap()).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0; 4]);
    }

    #[test]
    fn exhausted_budget_reports_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_symmetric(8, &mut rng);
        let err = eigenvalues_symmetric_with(
            &m,
            JacobiOptions {
                tolerance: 1e-12,
                max_sweeps: 1,
            },
        )
        .unwrap_err();
        match err {
            Error::Convergence { sweeps, residual } => {
                assert_eq!(sweeps, 1);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric_and_empty_input() {
        assert!(SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(SymmetricMatrix::zeros(0).is_err());
    }
}
