//! Dense complex Hermitian eigensolver.
//!
//! Householder reflections reduce the matrix to a complex tridiagonal form, a
//! diagonal unitary rotates the off-diagonal into real non-negative numbers,
//! and the resulting real symmetric tridiagonal matrix is diagonalized by the
//! implicit-shift QL iteration. Eigenvectors are accumulated through all
//! three stages.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data must hold n * n entries");
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

/// Ascending eigenvalues with eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn vector(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.vectors.dim()).map(|i| self.vectors[(i, j)]).collect()
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eigh<T: Real>(a: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = a.dim();
    let scale = a.max_abs().max(T::one());
    let dev = a.hermitian_deviation();
    if dev > T::lit(1e-12) * scale {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
        });
    }
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: CMatrix::zeros(0),
        });
    }
    let (diag, offdiag, q) = tridiagonalize(a);

    // D^dagger T D has real non-negative off-diagonal |e_k|
    let mut phases = vec![Complex::new(T::one(), T::zero()); n];
    let mut e = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let mag = offdiag[k].norm();
        e[k] = mag;
        phases[k + 1] = if mag > T::zero() {
            phases[k] * (offdiag[k] / mag)
        } else {
            phases[k]
        };
    }
    let mut d = diag;
    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    tql(&mut d, &mut e, &mut z, n)?;

    // sort ascending
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values = order.iter().map(|&i| d[i]).collect();

    // vectors = Q D Z
    let mut qd = q;
    for i in 0..n {
        for k in 0..n {
            qd[(i, k)] = qd[(i, k)] * phases[k];
        }
    }
    let mut vectors = CMatrix::zeros(n);
    for i in 0..n {
        let row = qd.row(i);
        for (col, &j) in order.iter().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..n {
                acc = acc + row[k] * z[k * n + j];
            }
            vectors[(i, col)] = acc;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Householder reduction `A = Q T Q^dagger`; returns the real diagonal, the
/// complex subdiagonal `T_{k+1,k}` and `Q`.
fn tridiagonalize<T: Real>(a: &CMatrix<T>) -> (Vec<T>, Vec<Complex<T>>, CMatrix<T>) {
    let n = a.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut m = a.clone();
    let mut q = CMatrix::identity(n);
    let mut sub = vec![zero; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let x0 = m[(k + 1, k)];
        let alpha = (k + 1..n).fold(T::zero(), |acc, i| acc + m[(i, k)].norm_sqr()).sqrt();
        if alpha <= T::min_positive_value() {
            sub[k] = zero;
            continue;
        }
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        // v = x + phase alpha e1, so that H x = -phase alpha e1
        let mut v: Vec<Complex<T>> = (k + 1..n).map(|i| m[(i, k)]).collect();
        v[0] = v[0] + phase * alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let tau = T::lit(2.0) / vnorm2;

        // trailing block update A22 <- A22 - v w^dagger - w v^dagger
        let len = n - k - 1;
        let mut p = vec![zero; len];
        for (r, pr) in p.iter_mut().enumerate() {
            let mut acc = zero;
            for c in 0..len {
                acc = acc + m[(k + 1 + r, k + 1 + c)] * v[c];
            }
            *pr = acc * tau;
        }
        let vp = v
            .iter()
            .zip(&p)
            .fold(zero, |acc, (vi, pi)| acc + vi.conj() * pi);
        let kk = vp * (tau * T::lit(0.5));
        let w: Vec<Complex<T>> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for r in 0..len {
            for c in 0..len {
                let upd = v[r] * w[c].conj() + w[r] * v[c].conj();
                m[(k + 1 + r, k + 1 + c)] = m[(k + 1 + r, k + 1 + c)] - upd;
            }
        }
        let beta = -phase * alpha;
        sub[k] = beta;
        m[(k + 1, k)] = beta;
        m[(k, k + 1)] = beta.conj();
        for i in k + 2..n {
            m[(i, k)] = zero;
            m[(k, i)] = zero;
        }

        // Q <- Q (I - tau v v^dagger)
        for i in 0..n {
            let mut qv = zero;
            for c in 0..len {
                qv = qv + q[(i, k + 1 + c)] * v[c];
            }
            let qv = qv * tau;
            for c in 0..len {
                q[(i, k + 1 + c)] = q[(i, k + 1 + c)] - qv * v[c].conj();
            }
        }
    }
    if n >= 2 {
        sub[n - 2] = m[(n - 1, n - 2)];
    }
    let diag = (0..n).map(|i| m[(i, i)].re).collect();
    (diag, sub, q)
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e[i]` coupling `i` and `i + 1`. Rotations are applied to
/// the columns of the row-major `z`.
fn tql<T: Real>(d: &mut [T], e: &mut [T], z: &mut [T], n: usize) -> Result<()> {
    if n < 2 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::NoConvergence(format!("QL iteration stalled at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zf = z[k * n + i + 1];
                    let zi = z[k * n + i];
                    z[k * n + i + 1] = s * zi + c * zf;
                    z[k * n + i] = c * zi - s * zf;
                }
            }
            if deflated {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn residual(a: &CMatrix<f64>, eig: &EigenDecomposition<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..a.dim() {
            let v = eig.vector(j);
            let av = a.mul_vec(&v);
            for (x, y) in av.iter().zip(&v) {
                worst = worst.max((x - y * eig.values[j]).norm());
            }
        }
        worst
    }

    fn lcg_matrix(n: usize, seed: u64) -> CMatrix<f64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = C::new(next(), 0.0);
            for j in i + 1..n {
                let z = C::new(next(), next());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn random_hermitian_residual_and_orthonormality() {
        let a = lcg_matrix(50, 7);
        let eig = eigh(&a).unwrap();
        assert!(residual(&a, &eig) < 1e-10 * a.max_abs() * 50.0);
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for i in 0..50 {
            for j in 0..50 {
                let vi = eig.vector(i);
                let vj = eig.vector(j);
                let dot: C = vi.iter().zip(&vj).map(|(a, b)| a.conj() * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - C::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_is_preserved() {
        let a = lcg_matrix(17, 3);
        let eig = eigh(&a).unwrap();
        let tr: f64 = (0..17).map(|i| a[(i, i)].re).sum();
        assert!((eig.values.iter().sum::<f64>() - tr).abs() < 1e-12);
    }

    #[test]
    fn pauli_y() {
        let a = CMatrix::from_rows(2, vec![C::new(0.0, 0.0), C::new(0.0, -1.0), C::new(0.0, 1.0), C::new(0.0, 0.0)]);
        let eig = eigh(&a).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
        assert!(residual(&a, &eig) < 1e-15);
    }

    #[test]
    fn tiny_and_diagonal_inputs() {
        let one = CMatrix::from_rows(1, vec![C::new(0.0, 0.0)]);
        assert_eq!(eigh(&one).unwrap().values, vec![0.0]);
        let mut d = CMatrix::zeros(4);
        for (i, v) in [3.0, -1.0, 2.0, 0.5].into_iter().enumerate() {
            d[(i, i)] = C::new(v, 0.0);
        }
        assert_eq!(eigh(&d).unwrap().values, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn degenerate_spectrum() {
        // all-ones 6x6 has eigenvalues 0 (x5) and 6
        let a = CMatrix::from_rows(6, vec![C::new(1.0, 0.0); 36]);
        let eig = eigh(&a).unwrap();
        assert!((eig.values[5] - 6.0).abs() < 1e-12);
        assert!(eig.values[..5].iter().all(|v| v.abs() < 1e-12));
        assert!(residual(&a, &eig) < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let a = CMatrix::from_rows(2, vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]);
        assert!(matches!(eigh(&a), Err(Error::NotHermitian { .. })));
    }
}
