use std::f64::consts::PI;

use dqpt::ed::{one_body_matrix, SpectralEvolution};
use dqpt::{
    build_basis, build_hamiltonian, eigh, ground_state, loschmidt_echo, EdQuench, Error, MomentumGrid, QuenchSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// One-body levels `±|J1 + J2 e^{ik}|` on the twisted grid.
fn band_levels(l: usize, j1: f64, j2: f64, phi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for m in 0..l {
        let k = (2.0 * PI * m as f64 + phi) / l as f64;
        let e = Complex64::new(j1 + j2 * k.cos(), j2 * k.sin()).norm();
        out.push(e);
        out.push(-e);
    }
    out.sort_by(f64::total_cmp);
    out
}

fn subset_sums(levels: &[f64], n: usize) -> Vec<f64> {
    let mut sums = Vec::new();
    for mask in 0u32..(1 << levels.len()) {
        if mask.count_ones() as usize == n {
            sums.push((0..levels.len()).filter(|i| mask & (1 << i) != 0).map(|i| levels[i]).sum());
        }
    }
    sums.sort_by(f64::total_cmp);
    sums
}

#[test]
fn free_spectrum_is_sum_of_one_body_levels() {
    for phi in [0.0, 0.37, 1.4111, 2.9, 5.5] {
        let q = EdQuench::new(3, 0.0, 1.0, 0.6, 1.7, phi).unwrap();
        let basis = q.basis().unwrap();
        let h = build_hamiltonian(&q, 0.6, &basis).unwrap();
        let many = eigh(h.matrix()).unwrap().values;
        let oracle = subset_sums(&band_levels(3, 1.0, 0.6, phi), 3);
        assert_eq!(many.len(), oracle.len());
        for (a, b) in many.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "phi = {phi}: {a} vs {b}");
        }
    }
}

#[test]
fn one_body_matrix_has_band_spectrum() {
    for phi in [0.0, 0.8, 3.0] {
        let vals = eigh(&one_body_matrix(5, 1.0, 0.2, phi)).unwrap().values;
        for (a, b) in vals.iter().zip(&band_levels(5, 1.0, 0.2, phi)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn free_ground_energy_fills_lower_band() {
    let q = EdQuench::new(5, 0.0, 1.0, 0.2, 2.0, 0.0).unwrap();
    let basis = q.basis().unwrap();
    assert_eq!(basis.dim(), 252);
    let h = build_hamiltonian(&q, 0.2, &basis).unwrap();
    let (e0, v) = ground_state(&h).unwrap();
    let expected: f64 = band_levels(5, 1.0, 0.2, 0.0)[..5].iter().sum();
    assert!((e0 - expected).abs() < 1e-10);
    let hv = h.apply(&v);
    let res: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * e0).norm_sqr()).sum::<f64>().sqrt();
    assert!(res <= 1e-10 * h.matrix().max_abs() * 252.0);
}

#[test]
fn free_echo_factorizes_over_band_modes() {
    for l in [3usize, 4, 5] {
        for phi in [0.0, 0.61, 1.4111, 2.2, 4.0] {
            let q = EdQuench::new(l, 0.0, 1.0, 0.2, 2.0, phi).unwrap();
            let evo = SpectralEvolution::new(&q).unwrap();
            let band = QuenchSpec::ssh(0.2, 2.0).unwrap();
            let grid = MomentumGrid::chain(l, phi).unwrap();
            for i in 0..=80 {
                let t = i as f64 * 0.125;
                let ed = evo.echo(t);
                let product = loschmidt_echo(&band, &grid, t).unwrap();
                assert!((ed - product).abs() < 1e-8, "L = {l}, phi = {phi}, t = {t}: {ed} vs {product}");
            }
        }
    }
}

fn rk4_echo(h: &dqpt::ManyBodyOperator<f64>, psi0: &[Complex64], dt: f64, steps: usize, every: usize) -> Vec<(f64, f64)> {
    let minus_i = Complex64::new(0.0, -1.0);
    let deriv = |v: &[Complex64]| -> Vec<Complex64> { h.apply(v).into_iter().map(|x| x * minus_i).collect() };
    let axpy = |v: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> {
        v.iter().zip(k).map(|(x, y)| x + y * a).collect()
    };
    let mut psi = psi0.to_vec();
    let mut out = Vec::new();
    for step in 1..=steps {
        let k1 = deriv(&psi);
        let k2 = deriv(&axpy(&psi, &k1, dt / 2.0));
        let k3 = deriv(&axpy(&psi, &k2, dt / 2.0));
        let k4 = deriv(&axpy(&psi, &k3, dt));
        for i in 0..psi.len() {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
        if step % every == 0 {
            let overlap: Complex64 = psi0.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-10);
            out.push((step as f64 * dt, overlap.norm_sqr()));
        }
    }
    out
}

#[test]
fn spectral_evolution_matches_stepper() {
    for (u, phi) in [(0.1, 1.4111), (0.6, 0.2012), (0.0, 0.0)] {
        let q = EdQuench::new(3, u, 1.0, 0.2, 2.0, phi).unwrap();
        let basis = q.basis().unwrap();
        let (_, psi0) = ground_state(&build_hamiltonian(&q, 0.2, &basis).unwrap()).unwrap();
        let h_f = build_hamiltonian(&q, 2.0, &basis).unwrap();
        let evo = SpectralEvolution::new(&q).unwrap();
        for (t, le) in rk4_echo(&h_f, &psi0, 1e-3, 10_000, 250) {
            assert!((le - evo.echo(t)).abs() < 1e-6, "U = {u}, t = {t}");
        }
    }
}

#[test]
fn degenerate_ground_state_is_reported() {
    // J2 = J1 at zero flux puts two zero modes at the Fermi level for L = 4
    let q = EdQuench::new(4, 0.0, 1.0, 1.0, 2.0, 0.0).unwrap();
    let basis = q.basis().unwrap();
    let h = build_hamiltonian(&q, 1.0, &basis).unwrap();
    assert!(matches!(ground_state(&h), Err(Error::DegenerateGroundState { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn hamiltonian_is_hermitian(
        l in 2usize..5, u in 0.0..2.0f64, j1 in -2.0..2.0f64, j2 in -2.0..2.0f64, phi in 0.0..(2.0 * PI)
    ) {
        let q = EdQuench::new(l, u, j1, j2, j2, phi).unwrap();
        let basis = q.basis().unwrap();
        let h = build_hamiltonian(&q, j2, &basis).unwrap();
        prop_assert!(h.hermitian_deviation() < 1e-14);
    }

    #[test]
    fn hopping_preserves_particle_number(
        l in 2usize..5, n_frac in 0.0..1.0f64, u in 0.0..2.0f64, j2 in 0.1..2.0f64, phi in 0.0..(2.0 * PI)
    ) {
        let n = ((2 * l) as f64 * n_frac).round() as usize;
        let q = EdQuench::new(l, u, 1.0, j2, j2, phi).unwrap();
        let basis = build_basis(l, n).unwrap();
        let h = build_hamiltonian(&q, j2, &basis).unwrap();
        for (col, &s) in basis.states().iter().enumerate() {
            let mut e = vec![Complex64::new(0.0, 0.0); basis.dim()];
            e[col] = Complex64::new(1.0, 0.0);
            for (row, z) in h.apply(&e).iter().enumerate() {
                if z.norm() > 0.0 {
                    prop_assert_eq!(basis.states()[row].count_ones(), s.count_ones());
                }
            }
        }
    }

    #[test]
    fn echo_is_a_probability(
        u in 0.0..1.0f64, j2i in 0.1..0.9f64, j2f in 1.1..2.5f64, phi in 0.0..(2.0 * PI), t in 0.0..20.0f64
    ) {
        let q = EdQuench::new(3, u, 1.0, j2i, j2f, phi).unwrap();
        let evo = SpectralEvolution::new(&q).unwrap();
        let total: f64 = evo.weights.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        let le = evo.echo(t);
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&le));
    }
}
