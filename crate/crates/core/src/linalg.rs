//! Small dense complex linear algebra used pointwise on the spectrum:
//! a cyclic Jacobi eigensolver for Hermitian matrices and modified
//! Gram-Schmidt orthonormalization.

use num_complex::Complex64;

/// Off-diagonal Frobenius mass, relative to `max(1, ||A||_F)`, below which
/// the Jacobi sweep stops.
pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn off_diagonal_mass(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

/// Cyclic Jacobi eigensolver. Only the Hermitian part of `a` is used.
/// Returns `None` if the sweep limit is hit before convergence.
pub fn hermitian_eigen(a: &CMatrix) -> Option<HermitianEigen> {
    let n = a.n;
    // symmetrize so roundoff asymmetry cannot stall the sweeps
    let mut m = CMatrix::from_fn(n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius().max(1.0);

    let mut sweeps = 0;
    while m.off_diagonal_mass() > JACOBI_TOL * scale {
        if sweeps == MAX_SWEEPS {
            return None;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Some(HermitianEigen { values, vectors })
}

/// One Jacobi rotation annihilating `m[p][q]`. The rotation is
/// `J = diag(1, e^{-i phi}) * [[c, s], [-s, c]]` on the `(p, q)` plane,
/// where `phi` is the phase of `m[p][q]`; `m <- J^H m J`, `v <- v J`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = m.n;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * jpp + mkq * jqp;
        m[(k, q)] = mkp * jpq + mkq * jqq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
        m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Modified Gram-Schmidt on the columns of `a`. Returns `None` when the
/// columns are numerically dependent.
pub fn orthonormalize_columns(a: &CMatrix) -> Option<CMatrix> {
    let n = a.n;
    let mut q = a.clone();
    for j in 0..n {
        for i in 0..j {
            let mut proj = Complex64::new(0.0, 0.0);
            for r in 0..n {
                proj += q[(r, i)].conj() * q[(r, j)];
            }
            for r in 0..n {
                let qi = q[(r, i)];
                q[(r, j)] -= proj * qi;
            }
        }
        let norm = (0..n).map(|r| q[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return None;
        }
        for r in 0..n {
            q[(r, j)] /= norm;
        }
    }
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn check_decomposition(a: &CMatrix) {
        let e = hermitian_eigen(a).expect("converges");
        let n = a.dim();
        for k in 0..n {
            for r in 0..n {
                let mut av = c(0.0, 0.0);
                for s in 0..n {
                    av += a[(r, s)] * e.vectors[(s, k)];
                }
                let lv = e.vectors[(r, k)] * e.values[k];
                assert!((av - lv).norm() < 1e-10, "residual {}", (av - lv).norm());
            }
        }
        let vhv = e.vectors.adjoint().matmul(&e.vectors);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vhv[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn diagonal_matrix() {
        let a = CMatrix::from_fn(3, |i, j| if i == j { c([3.0, -1.0, 2.0][i], 0.0) } else { c(0.0, 0.0) });
        let e = hermitian_eigen(&a).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_has_eigenvalues_plus_minus_one() {
        let a = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        let e = hermitian_eigen(&a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        check_decomposition(&a);
    }

    #[test]
    fn dense_hermitian_matrices() {
        // deterministic pseudo-random entries
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in 1..8 {
            let raw = CMatrix::from_fn(n, |_, _| c(next(), next()));
            let a = CMatrix::from_fn(n, |i, j| raw[(i, j)] + raw[(j, i)].conj());
            check_decomposition(&a);
            let e = hermitian_eigen(&a).unwrap();
            let tr: f64 = e.values.iter().sum();
            assert!((tr - a.trace().re).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_eigenvalues() {
        let a = CMatrix::from_fn(3, |_, _| c(1.0, 0.0));
        let e = hermitian_eigen(&a).unwrap();
        assert!(e.values[0].abs() < 1e-14 && e.values[1].abs() < 1e-14);
        assert!((e.values[2] - 3.0).abs() < 1e-14);
        check_decomposition(&a);
    }

    #[test]
    fn gram_schmidt_gives_unitary() {
        let a = CMatrix::from_fn(3, |i, j| {
            c((i + 2 * j) as f64 + 1.0, (i * j) as f64 - 1.0) + if i == j { c(5.0, 0.0) } else { c(0.0, 0.0) }
        });
        let q = orthonormalize_columns(&a).unwrap();
        let qhq = q.adjoint().matmul(&q);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qhq[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
        assert!(orthonormalize_columns(&CMatrix::zeros(2)).is_none());
    }
}
