//! Exact diagonalization of the interacting SSH chain with a boundary flux.
//!
//! Sites are ordered `(1,A), (1,B), (2,A), ...`; site `(j,A)` is bit `2(j-1)`
//! and `(j,B)` is bit `2(j-1)+1` of an occupation pattern.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{eigh, CMatrix};
use crate::error::{Error, Result};
use crate::loschmidt::{check_times, RateSeries};
use crate::scalar::Real;

pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

/// Gap below which the ground state counts as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

/// Occupation-number basis with a fixed particle count.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_sites: usize,
    n_particles: usize,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl FockBasis {
    pub fn new(l_cells: usize, n_particles: usize) -> Result<Self> {
        Self::with_cap(l_cells, n_particles, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(l_cells: usize, n_particles: usize, cap: usize) -> Result<Self> {
        let n_sites = 2 * l_cells;
        if n_sites > 63 {
            return Err(Error::InvalidArgument(format!(
                "{l_cells} cells do not fit a 64-bit occupation pattern"
            )));
        }
        if n_particles > n_sites {
            return Err(Error::InvalidArgument(format!(
                "{n_particles} particles on {n_sites} sites"
            )));
        }
        let dim = binomial(n_sites, n_particles);
        if dim > cap as u128 {
            return Err(Error::DimensionTooLarge {
                dim: usize::try_from(dim).unwrap_or(usize::MAX),
                cap,
            });
        }
        let states = patterns(n_sites, n_particles, dim as usize);
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Self {
            n_sites,
            n_particles,
            states,
            index,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn l_cells(&self) -> usize {
        self.n_sites / 2
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, pattern: u64) -> Option<usize> {
        self.index.get(&pattern).copied()
    }
}

/// Shorthand for [`FockBasis::new`].
pub fn build_basis(l_cells: usize, n_particles: usize) -> Result<FockBasis> {
    FockBasis::new(l_cells, n_particles)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `n_sites`-bit patterns with `n` set bits, ascending.
fn patterns(n_sites: usize, n: usize, dim: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(dim);
    if n == 0 {
        out.push(0);
        return out;
    }
    let limit = 1u64 << n_sites;
    let mut s: u64 = (1u64 << n) - 1;
    while s < limit {
        out.push(s);
        // Gosper's hack
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
    out
}

/// Dense Hermitian operator on a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct ManyBodyOperator<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> ManyBodyOperator<T> {
    pub fn new(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        self.matrix.mul_vec(v)
    }

    pub fn hermitian_deviation(&self) -> T {
        self.matrix.hermitian_deviation()
    }
}

/// Quench of the intercell hopping `J_2` at fixed `J_1`, `U` and flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdQuench<T> {
    pub l_cells: usize,
    pub u: T,
    pub j1: T,
    pub j2_initial: T,
    pub j2_final: T,
    pub phi: T,
}

impl<T: Real> EdQuench<T> {
    pub fn new(l_cells: usize, u: T, j1: T, j2_initial: T, j2_final: T, phi: T) -> Result<Self> {
        let q = Self {
            l_cells,
            u,
            j1,
            j2_initial,
            j2_final,
            phi,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_cells < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 cells, got {}",
                self.l_cells
            )));
        }
        if !(self.u >= T::zero()) || !self.u.is_finite() {
            return Err(Error::InvalidArgument(format!("U must be finite and >= 0, got {}", self.u)));
        }
        for (name, v) in [("J1", self.j1), ("J2 initial", self.j2_initial), ("J2 final", self.j2_final)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.phi >= T::zero() && self.phi < T::TAU()) {
            return Err(Error::InvalidArgument(format!(
                "flux must lie in [0, 2pi), got {}",
                self.phi
            )));
        }
        Ok(())
    }

    /// Half-filling sector basis.
    pub fn basis(&self) -> Result<FockBasis> {
        build_basis(self.l_cells, self.l_cells)
    }
}

/// Directed hopping amplitude `amp c^dagger_to c_from`.
struct Bond<T> {
    to: usize,
    from: usize,
    amp: Complex<T>,
}

fn bonds<T: Real>(l_cells: usize, j1: T, j2: T, phi: T) -> Vec<Bond<T>> {
    let n_sites = 2 * l_cells;
    let mut out = Vec::with_capacity(4 * l_cells);
    for j in 0..l_cells {
        let a = 2 * j;
        let b = a + 1;
        let a_next = (a + 2) % n_sites;
        let intra = Complex::new(j1, T::zero());
        let inter = if j + 1 == l_cells {
            Complex::from_polar(j2, -phi)
        } else {
            Complex::new(j2, T::zero())
        };
        out.push(Bond { to: a, from: b, amp: intra });
        out.push(Bond { to: b, from: a, amp: intra.conj() });
        out.push(Bond { to: b, from: a_next, amp: inter });
        out.push(Bond { to: a_next, from: b, amp: inter.conj() });
    }
    out
}

/// Applies `c^dagger_to c_from` to `state`; returns the new pattern and sign.
fn hop(state: u64, to: usize, from: usize) -> Option<(u64, bool)> {
    if state & (1 << from) == 0 {
        return None;
    }
    let cleared = state & !(1u64 << from);
    if cleared & (1 << to) != 0 {
        return None;
    }
    let (lo, hi) = if to < from { (to, from) } else { (from, to) };
    let between = if hi - lo > 1 {
        ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1)
    } else {
        0
    };
    let negative = (cleared & between).count_ones() % 2 == 1;
    Some((cleared | (1 << to), negative))
}

fn interaction_energy<T: Real>(state: u64, l_cells: usize, u: T) -> T {
    let n_sites = 2 * l_cells;
    let occ = |i: usize| (state >> i) & 1;
    let pairs: u64 = (0..l_cells)
        .map(|j| {
            let a = 2 * j;
            let b = a + 1;
            occ(a) * occ(b) + occ(b) * occ((a + 2) % n_sites)
        })
        .sum();
    u * T::from_count(pairs as usize)
}

/// Many-body Hamiltonian at intercell hopping `j2` (the quench's `J_1`, `U`
/// and flux are used).
pub fn build_hamiltonian<T: Real>(quench: &EdQuench<T>, j2: T, basis: &FockBasis) -> Result<ManyBodyOperator<T>> {
    if basis.n_sites() != 2 * quench.l_cells {
        return Err(Error::BasisMismatch(format!(
            "basis has {} sites, quench needs {}",
            basis.n_sites(),
            2 * quench.l_cells
        )));
    }
    let dim = basis.dim();
    let mut m = CMatrix::zeros(dim);
    let hops = bonds(quench.l_cells, quench.j1, j2, quench.phi);
    for (col, &s) in basis.states().iter().enumerate() {
        for bond in &hops {
            if let Some((target, negative)) = hop(s, bond.to, bond.from) {
                let row = basis
                    .index_of(target)
                    .ok_or_else(|| Error::BasisMismatch(format!("pattern {target:#b} outside basis")))?;
                let amp = if negative { -bond.amp } else { bond.amp };
                m[(row, col)] = m[(row, col)] + amp;
            }
        }
        let e = interaction_energy(s, quench.l_cells, quench.u);
        m[(col, col)] = m[(col, col)] + Complex::new(e, T::zero());
    }
    Ok(ManyBodyOperator::new(m))
}

/// Single-particle `2L x 2L` hopping matrix with the same site order and flux.
pub fn one_body_matrix<T: Real>(l_cells: usize, j1: T, j2: T, phi: T) -> CMatrix<T> {
    let mut m = CMatrix::zeros(2 * l_cells);
    for bond in bonds(l_cells, j1, j2, phi) {
        m[(bond.to, bond.from)] = m[(bond.to, bond.from)] + bond.amp;
    }
    m
}

/// Lowest eigenpair. Fails if the first gap is below [`DEGENERACY_THRESHOLD`];
/// perturbing the flux by about `1e-8` usually lifts an accidental degeneracy.
pub fn ground_state<T: Real>(h: &ManyBodyOperator<T>) -> Result<(T, Vec<Complex<T>>)> {
    let eig = eigh(h.matrix())?;
    if eig.values.len() > 1 {
        let gap = eig.values[1] - eig.values[0];
        if gap < T::lit(DEGENERACY_THRESHOLD) {
            return Err(Error::DegenerateGroundState {
                gap: gap.to_f64().unwrap_or(f64::NAN),
                threshold: DEGENERACY_THRESHOLD,
            });
        }
    }
    let e0 = eig.values[0];
    let v = eig.vector(0);
    let hv = h.apply(&v);
    let res = hv
        .iter()
        .zip(&v)
        .fold(T::zero(), |acc, (x, y)| acc + (x - y * e0).norm_sqr())
        .sqrt();
    let bound = T::lit(1e-10) * h.matrix().max_abs().max(T::one()) * T::from_count(h.dim());
    if res > bound {
        return Err(Error::NoConvergence(format!("ground-state residual {res}")));
    }
    Ok((e0, v))
}

/// Postquench spectrum and the initial state's weights on it:
/// `a(t) = sum_n w_n exp(-i E_n t)`.
#[derive(Debug, Clone)]
pub struct SpectralEvolution<T> {
    pub energies: Vec<T>,
    pub weights: Vec<T>,
    pub l_cells: usize,
}

impl<T: Real> SpectralEvolution<T> {
    pub fn new(quench: &EdQuench<T>) -> Result<Self> {
        quench.validate()?;
        let basis = quench.basis()?;
        let h_i = build_hamiltonian(quench, quench.j2_initial, &basis)?;
        let (_, psi) = ground_state(&h_i)?;
        let h_f = build_hamiltonian(quench, quench.j2_final, &basis)?;
        let eig = eigh(h_f.matrix())?;
        let weights = (0..eig.values.len())
            .map(|n| {
                (0..psi.len())
                    .fold(Complex::new(T::zero(), T::zero()), |acc, i| {
                        acc + eig.vectors[(i, n)].conj() * psi[i]
                    })
                    .norm_sqr()
            })
            .collect();
        Ok(Self {
            energies: eig.values,
            weights,
            l_cells: quench.l_cells,
        })
    }

    pub fn amplitude(&self, t: T) -> Complex<T> {
        self.energies
            .iter()
            .zip(&self.weights)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&e, &w)| {
                acc + Complex::from_polar(w, -e * t)
            })
    }

    pub fn echo(&self, t: T) -> T {
        self.amplitude(t).norm_sqr()
    }

    pub fn rate(&self, t: T) -> T {
        let le = self.echo(t);
        if le <= T::underflow_floor() {
            T::infinity()
        } else {
            T::zero() - le.ln() / T::from_count(self.l_cells)
        }
    }
}

/// Rate function of the half-filled quench, normalized by the number of cells.
pub fn ed_rate_function<T: Real>(quench: &EdQuench<T>, times: &[T]) -> Result<RateSeries<T>> {
    check_times(times)?;
    let evo = SpectralEvolution::new(quench)?;
    let (lambda, le): (Vec<T>, Vec<T>) = times.par_iter().map(|&t| (evo.rate(t), evo.echo(t))).unzip();
    let mut metadata = BTreeMap::new();
    metadata.insert("model".to_string(), "interacting-ssh".to_string());
    metadata.insert("l_cells".to_string(), quench.l_cells.to_string());
    metadata.insert("u".to_string(), quench.u.to_string());
    metadata.insert("j1".to_string(), quench.j1.to_string());
    metadata.insert("j2_initial".to_string(), quench.j2_initial.to_string());
    metadata.insert("j2_final".to_string(), quench.j2_final.to_string());
    metadata.insert("flux".to_string(), quench.phi.to_string());
    Ok(RateSeries {
        times: times.to_vec(),
        lambda,
        le: Some(le),
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_dimensions() {
        assert_eq!(build_basis(5, 5).unwrap().dim(), 252);
        let vac = build_basis(2, 0).unwrap();
        assert_eq!(vac.dim(), 1);
        assert_eq!(vac.states(), &[0]);
        assert_eq!(build_basis(2, 2).unwrap().dim(), 6);
        assert!(matches!(
            FockBasis::with_cap(5, 5, 100),
            Err(Error::DimensionTooLarge { dim: 252, cap: 100 })
        ));
        assert!(build_basis(2, 5).is_err());
    }

    #[test]
    fn basis_is_sorted_and_indexed() {
        let b = build_basis(4, 3).unwrap();
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        for (i, &s) in b.states().iter().enumerate() {
            assert_eq!(s.count_ones(), 3);
            assert_eq!(b.index_of(s), Some(i));
        }
    }

    #[test]
    fn hop_signs() {
        // c+_0 c_2 on |0111>: one occupied site strictly between
        assert_eq!(hop(0b0110, 0, 2), Some((0b0011, true)));
        assert_eq!(hop(0b0010, 0, 1), Some((0b0001, false)));
        assert_eq!(hop(0b0011, 0, 1), None);
        assert_eq!(hop(0b0001, 2, 1), None);
    }

    #[test]
    fn alternating_state_has_no_interaction() {
        assert_eq!(interaction_energy(0b0101010101, 5, 0.7), 0.0);
        assert_eq!(interaction_energy(0b0000000011, 5, 0.7), 0.7);
        // n_{L,B} n_{1,A} across the boundary
        assert_eq!(interaction_energy(0b1000000001, 5, 0.7), 0.7);
    }

    #[test]
    fn vacuum_ground_state() {
        let q = EdQuench::new(2, 0.3, 1.0, 0.2, 2.0, 0.0).unwrap();
        let b = build_basis(2, 0).unwrap();
        let h = build_hamiltonian(&q, 0.2, &b).unwrap();
        let (e0, _) = ground_state(&h).unwrap();
        assert_eq!(e0, 0.0);
    }

    #[test]
    fn mismatched_basis() {
        let q = EdQuench::new(3, 0.0, 1.0, 0.2, 2.0, 0.0).unwrap();
        let b = build_basis(2, 2).unwrap();
        assert!(matches!(build_hamiltonian(&q, 0.2, &b), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn rate_starts_at_zero() {
        let q = EdQuench::new(3, 0.1, 1.0, 0.2, 2.0, 0.4).unwrap();
        let s = ed_rate_function(&q, &[0.0, 0.5]).unwrap();
        assert!(f64::abs(s.lambda[0]) < 1e-12);
        assert!(s.lambda[1] > 0.0);
    }

    #[test]
    fn invalid_quench() {
        assert!(EdQuench::new(1, 0.0, 1.0, 0.2, 2.0, 0.0).is_err());
        assert!(EdQuench::new(3, -0.1, 1.0, 0.2, 2.0, 0.0).is_err());
        assert!(EdQuench::new(3, 0.1, 1.0, 0.2, 2.0, 7.0).is_err());
    }
}
