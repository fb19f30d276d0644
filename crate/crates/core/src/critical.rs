//! Critical momenta, fluxes and times.
//!
//! A mode echo vanishes exactly when the pre- and postquench Bloch vectors are
//! orthogonal, `d_i(k)·d_f(k) = 0`, and then only at the times
//! `t_n* = pi (2n - 1) / (2 eps_f(k_c))`. On a ring of `L` cells such a
//! momentum `k_c` is made an allowed mode by threading the flux
//! `phi_c = min(mod(L k_c, 2 pi), mod(-L k_c, 2 pi))`.

use serde::Serialize;

use crate::band::{d_vector, Momentum, ModelSpec, QuenchSpec};
use crate::error::{Error, Result};
use crate::loschmidt::TwistAxis;
use crate::roots::scan_roots;
use crate::scalar::{modulo, wrap_momentum, Real};

/// Number of scan panels on `(0, pi)` for models without a closed form.
pub const ROOT_SCAN_PANELS: usize = 2048;

/// Bisection stops once the bracket is below this width.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// One critical momentum and the quantities it generates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPair<T> {
    /// Positive representative of a `±k_c` pair (chains) or an explicit point (square lattice).
    pub k_c: Momentum<T>,
    pub epsilon_f_kc: T,
    /// Critical flux on each lattice axis, in `[0, pi]`.
    pub phi_c: Vec<T>,
    /// Axis carrying the flux (square lattice only).
    pub axis: Option<TwistAxis>,
    /// `t_n*` for `n = 1..=n_max`.
    pub t_star: Vec<T>,
}

/// Solved critical data for one quench on one lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet<T> {
    pub quench: QuenchSpec<T>,
    pub sizes: Vec<usize>,
    pub pairs: Vec<CriticalPair<T>>,
    /// Closed-form range of `t_1*` for the square lattice.
    pub t_star_interval: Option<(T, T)>,
}

impl<T: Real> CriticalSet<T> {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `sum_{x,y,z} d_a(initial, k) d_a(final, k)`.
pub fn constraint_residual<T: Real>(quench: &QuenchSpec<T>, k: impl Into<Momentum<T>>) -> Result<T> {
    let (di, df) = quench.d_pair(k)?;
    Ok(di.dot(&df))
}

/// Critical momenta in `(0, pi]`, ascending. Each stands for a `±k_c` pair.
pub fn solve_critical_momenta<T: Real>(quench: &QuenchSpec<T>) -> Result<Vec<T>> {
    let one = T::one();
    match (quench.initial, quench.post) {
        (ModelSpec::Ssh { gamma: gi }, ModelSpec::Ssh { gamma: gf }) => {
            let denom = gi + gf;
            let numer = one + gi * gf;
            if denom == T::zero() {
                return Err(Error::NoSolution(format!(
                    "gamma_i + gamma_f = 0 (gamma_i = {gi}, gamma_f = {gf}); the constraint degenerates"
                )));
            }
            let c = -numer / denom;
            Ok(if c.abs() <= one { keep_open(vec![c.acos()]) } else { Vec::new() })
        }
        (
            ModelSpec::Creutz {
                theta: ti,
                jv_tilde: jv,
            },
            ModelSpec::Creutz { theta: tf, .. },
        ) => {
            let a = ti.sin() * tf.sin();
            let denom = one - a;
            let disc = a * (jv * jv - one + a);
            if denom <= T::zero() || disc < T::zero() {
                return Ok(Vec::new());
            }
            let root = disc.sqrt();
            let mut ks: Vec<T> = [(-jv + root) / denom, (-jv - root) / denom]
                .into_iter()
                .filter(|c| c.abs() <= one)
                .map(|c| c.acos())
                .collect();
            ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ks.dedup();
            Ok(keep_open(ks))
        }
        (ModelSpec::LongRangeSsh { .. }, _) => {
            let f = |k: T| constraint_residual(quench, k).unwrap_or(T::nan());
            Ok(keep_open(scan_roots(
                f,
                T::zero(),
                T::PI(),
                ROOT_SCAN_PANELS,
                T::lit(ROOT_TOLERANCE),
            )))
        }
        (ModelSpec::Qwz { .. }, _) => Err(Error::InvalidArgument(
            "the square-lattice model has critical pairs, use qwz_critical_pairs".into(),
        )),
        _ => unreachable!("QuenchSpec endpoints share a variant"),
    }
}

/// Drops `k = 0`, which is not in `(0, pi]`.
fn keep_open<T: Real>(ks: Vec<T>) -> Vec<T> {
    ks.into_iter().filter(|&k| k > T::zero() && k <= T::PI()).collect()
}

/// Flux in `[0, pi]` that places `±k_c` on the grid of an `L`-cell ring.
pub fn critical_flux<T: Real>(k_c: T, l: usize) -> T {
    let lk = T::from_count(l) * k_c;
    let plus = modulo(lk, T::TAU());
    let minus = modulo(-lk, T::TAU());
    plus.min(minus)
}

/// `t_n* = pi (2n - 1) / (2 eps_f)` for `n = 1..=n_max`.
pub fn critical_times_from_energy<T: Real>(eps_f: T, n_max: usize) -> Vec<T> {
    (1..=n_max)
        .map(|n| T::PI() * T::from_count(2 * n - 1) / (T::lit(2.0) * eps_f))
        .collect()
}

/// Critical times generated by the momentum `k_c`.
pub fn critical_times<T: Real>(
    quench: &QuenchSpec<T>,
    k_c: impl Into<Momentum<T>>,
    n_max: usize,
) -> Result<Vec<T>> {
    let k_c = k_c.into();
    let eps = d_vector(&quench.post, k_c)?.energy();
    if !(eps > T::lit(1e-14)) {
        return Err(Error::DegenerateMode {
            k: format!("{k_c:?}"),
            eps_initial: f64::NAN,
            eps_final: eps.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(critical_times_from_energy(eps, n_max))
}

/// Small-detuning prediction of the echo of the mode nearest `k_c`,
/// `L_{k*}(t_n*) ≈ B Δ²` with `Δ = phi - phi_c` and `k* = k_c + Δ / L`.
pub fn asymptotic_le<T: Real>(
    quench: &QuenchSpec<T>,
    k_c: T,
    t_star: T,
    l: usize,
    delta: T,
) -> Result<T> {
    if !(delta.abs() < T::lit(0.1)) {
        return Err(Error::InvalidArgument(format!(
            "detuning must satisfy |delta| < 0.1, got {delta}"
        )));
    }
    let one = T::one();
    let lf = T::from_count(l);
    let coefficient = match (quench.initial, quench.post) {
        (ModelSpec::Ssh { gamma: gi }, ModelSpec::Ssh { gamma: gf }) => {
            let s = gi + gf;
            let d = gf - gi;
            (s * s * s + gf * gf * t_star * t_star * d * (one - gi * gi)) / (d * d * s * lf * lf)
        }
        (
            ModelSpec::Creutz {
                theta: ti,
                jv_tilde: jv,
            },
            ModelSpec::Creutz { theta: tf, .. },
        ) => {
            let (si, sf) = (ti.sin(), tf.sin());
            let (sk, ck) = k_c.sin_cos();
            let cos2f = tf.cos() * tf.cos();
            let c = sf * (jv * jv - one + si * sf) / (sk * sk * (sf - si));
            let slope = jv + ck * cos2f;
            T::lit(4.0) * (t_star * t_star * slope * slope - c) / ((sf - si) * sf * lf * lf)
        }
        _ => {
            return Err(Error::NotAvailable(format!(
                "no closed-form detuning expansion for the {} model",
                quench.initial.name()
            )))
        }
    };
    Ok(coefficient * delta * delta)
}

/// Critical momenta, fluxes and `n_max` critical times of a chain quench on `L` cells.
pub fn critical_set<T: Real>(quench: &QuenchSpec<T>, l: usize, n_max: usize) -> Result<CriticalSet<T>> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("lattice size must be >= 2, got {l}")));
    }
    let pairs = solve_critical_momenta(quench)?
        .into_iter()
        .map(|k| {
            let eps = d_vector(&quench.post, k)?.energy();
            Ok(CriticalPair {
                k_c: Momentum::One(k),
                epsilon_f_kc: eps,
                phi_c: vec![critical_flux(k, l)],
                axis: None,
                t_star: critical_times(quench, k, n_max)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriticalSet {
        quench: *quench,
        sizes: vec![l],
        pairs,
        t_star_interval: None,
    })
}

fn qwz_mus<T: Real>(quench: &QuenchSpec<T>) -> Result<(T, T)> {
    match (quench.initial, quench.post) {
        (ModelSpec::Qwz { mu: a }, ModelSpec::Qwz { mu: b }) => Ok((a, b)),
        _ => Err(Error::InvalidArgument("expected a Qi-Wu-Zhang quench".into())),
    }
}

/// `cos` of the partner momentum solving the constraint when one component
/// has cosine `c`; `None` when no real partner exists.
fn qwz_partner_cos<T: Real>(mu_i: T, mu_f: T, c: T) -> Option<T> {
    let two = T::lit(2.0);
    let denom = mu_i + mu_f + two * c;
    if denom == T::zero() {
        return None;
    }
    let partner = (-mu_i * mu_f - (mu_i + mu_f) * c - two) / denom;
    // accept rounding just outside the unit interval
    let slack = T::lit(1e-12);
    if partner.abs() > T::one() + slack {
        return None;
    }
    Some(partner.max(-T::one()).min(T::one()))
}

/// Closed-form range of `t_n*` on the square lattice for `mu_i in (0, 2)`, `mu_f in (-2, 0)`.
pub fn qwz_critical_time_band<T: Real>(quench: &QuenchSpec<T>, n: usize) -> Result<Option<(T, T)>> {
    let (mi, mf) = qwz_mus(quench)?;
    let two = T::lit(2.0);
    let lower_arg = mf * (mf - two) * (mf - mi) / (mi + mf - two);
    let upper_arg = mf * (mf + two) * (mf - mi) / (mi + mf + two);
    if !(lower_arg > T::zero() && upper_arg > T::zero()) {
        return Ok(None);
    }
    let scale = T::from_count(2 * n - 1) * T::PI() / two;
    let a = scale / lower_arg.sqrt();
    let b = scale / upper_arg.sqrt();
    Ok(Some((a.min(b), a.max(b))))
}

/// Critical pairs of a Qi-Wu-Zhang quench on an `Lx x Ly` torus twisted along
/// one axis: the untwisted component runs over its periodic grid and the
/// twisted one is solved from the constraint. `Both` returns the union of the
/// two single-axis families.
pub fn qwz_critical_pairs<T: Real>(
    quench: &QuenchSpec<T>,
    lx: usize,
    ly: usize,
    axis: TwistAxis,
    n_max: usize,
) -> Result<CriticalSet<T>> {
    let (mi, mf) = qwz_mus(quench)?;
    if lx < 2 || ly < 2 {
        return Err(Error::InvalidArgument(format!("lattice sizes must be >= 2, got {lx} x {ly}")));
    }
    let mut pairs = Vec::new();
    if matches!(axis, TwistAxis::X | TwistAxis::Both) {
        pairs.extend(qwz_single_axis(quench, mi, mf, lx, ly, TwistAxis::X, n_max)?);
    }
    if matches!(axis, TwistAxis::Y | TwistAxis::Both) {
        pairs.extend(qwz_single_axis(quench, mi, mf, lx, ly, TwistAxis::Y, n_max)?);
    }
    Ok(CriticalSet {
        quench: *quench,
        sizes: vec![lx, ly],
        pairs,
        t_star_interval: qwz_critical_time_band(quench, 1)?,
    })
}

fn qwz_single_axis<T: Real>(
    quench: &QuenchSpec<T>,
    mi: T,
    mf: T,
    lx: usize,
    ly: usize,
    axis: TwistAxis,
    n_max: usize,
) -> Result<Vec<CriticalPair<T>>> {
    // (periodic axis length, twisted axis length)
    let (l_fixed, l_twisted) = match axis {
        TwistAxis::X => (ly, lx),
        _ => (lx, ly),
    };
    let grid = crate::loschmidt::MomentumGrid::chain(l_fixed, T::zero())?;
    let mut out = Vec::new();
    for k in grid.momenta {
        let Momentum::One(k_fixed) = k else { unreachable!() };
        let k_fixed = wrap_momentum(k_fixed);
        let Some(c) = qwz_partner_cos(mi, mf, k_fixed.cos()) else {
            continue;
        };
        let k_solved = c.acos();
        let signs: &[T] = if k_solved == T::zero() || k_solved == T::PI() {
            &[T::one()]
        } else {
            &[T::one(), -T::one()]
        };
        for &sign in signs {
            let k_tw = sign * k_solved;
            let k_c = match axis {
                TwistAxis::X => Momentum::Two(k_tw, k_fixed),
                _ => Momentum::Two(k_fixed, k_tw),
            };
            let phi = critical_flux(k_solved, l_twisted);
            let phi_c = match axis {
                TwistAxis::X => vec![phi, T::zero()],
                _ => vec![T::zero(), phi],
            };
            let eps = d_vector(&quench.post, k_c)?.energy();
            out.push(CriticalPair {
                k_c,
                epsilon_f_kc: eps,
                phi_c,
                axis: Some(axis),
                t_star: critical_times(quench, k_c, n_max)?,
            });
        }
    }
    Ok(out)
}

/// Continuum critical point for a torus twisted along both axes: given a
/// free `k_x`, solves for `k_y >= 0` and returns it with the per-axis
/// critical fluxes `(phi_x, phi_y)`.
pub fn qwz_dual_flux<T: Real>(
    quench: &QuenchSpec<T>,
    kx: T,
    lx: usize,
    ly: usize,
) -> Result<Option<(T, T, T)>> {
    let (mi, mf) = qwz_mus(quench)?;
    Ok(qwz_partner_cos(mi, mf, kx.cos()).map(|c| {
        let ky = c.acos();
        (ky, critical_flux(kx.abs(), lx), critical_flux(ky, ly))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn ssh_critical_momentum() {
        let q = QuenchSpec::ssh(1.5, 0.5).unwrap();
        let ks = solve_critical_momenta(&q).unwrap();
        assert_eq!(ks.len(), 1);
        assert_abs_diff_eq!(ks[0] / PI, 0.839, epsilon = 5e-4);
        assert!(constraint_residual(&q, ks[0]).unwrap().abs() < 1e-10);
        assert!(constraint_residual(&q, 0.839 * PI).unwrap().abs() < 1e-3);
    }

    #[test]
    fn same_phase_has_no_solution() {
        assert!(solve_critical_momenta(&QuenchSpec::ssh(1.5, 1.2).unwrap())
            .unwrap()
            .is_empty());
        assert!(solve_critical_momenta(&QuenchSpec::creutz(0.4, 0.1, 0.5).unwrap())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn ssh_degenerate_denominator() {
        let q = QuenchSpec::ssh(1.5, -1.5).unwrap();
        assert!(matches!(solve_critical_momenta(&q), Err(Error::NoSolution(_))));
    }

    #[test]
    fn identical_endpoints_residual_is_energy_squared() {
        let q = QuenchSpec::creutz(0.3, 0.3, 0.2).unwrap();
        let e = crate::band::band_energy(&q.post, 0.9).unwrap();
        assert_abs_diff_eq!(constraint_residual(&q, 0.9).unwrap(), e * e, epsilon = 1e-14);
    }

    #[test]
    fn creutz_two_pairs() {
        let q = QuenchSpec::creutz(0.4, -0.4, 0.5).unwrap();
        let ks = solve_critical_momenta(&q).unwrap();
        assert_eq!(ks.len(), 2);
        assert_abs_diff_eq!(ks[0] / PI, 0.536, epsilon = 5e-4);
        assert_abs_diff_eq!(ks[1] / PI, 0.772, epsilon = 5e-4);
    }

    #[test]
    fn flux_examples() {
        assert_eq!(critical_flux(PI / 2.0, 4), 0.0);
        let k = (-(1.75_f64) / 2.0).acos();
        assert_abs_diff_eq!(critical_flux(k, 20) / PI, 0.783, epsilon = 5e-4);
        // symmetric images at pi
        assert_abs_diff_eq!(critical_flux(PI / 4.0, 4), PI, epsilon = 1e-15);
    }

    #[test]
    fn critical_times_ssh() {
        let q = QuenchSpec::ssh(1.5, 0.5).unwrap();
        let k = solve_critical_momenta(&q).unwrap()[0];
        let t = critical_times(&q, k, 2).unwrap();
        assert_abs_diff_eq!(t[0], 2.565, epsilon = 5e-4);
        assert_abs_diff_eq!(t[1], 7.695, epsilon = 5e-4);
        assert_abs_diff_eq!(t[1], 3.0 * t[0], epsilon = 1e-12);
    }

    #[test]
    fn asymptotics_vanish_at_zero_detuning() {
        let q = QuenchSpec::ssh(1.5, 0.5).unwrap();
        assert_eq!(asymptotic_le(&q, 2.6, 2.5, 20, 0.0).unwrap(), 0.0);
        assert!(asymptotic_le(&q, 2.6, 2.5, 20, 0.5).is_err());
        let lr = QuenchSpec::long_range_ssh(1.0, 1.5, 0.5, 1.0, 20).unwrap();
        assert!(matches!(
            asymptotic_le(&lr, 2.0, 3.0, 20, 1e-3),
            Err(Error::NotAvailable(_))
        ));
    }

    #[test]
    fn long_range_root_is_found() {
        let q = QuenchSpec::long_range_ssh(1.0, 1.5, 0.5, 1.0, 20).unwrap();
        let ks = solve_critical_momenta(&q).unwrap();
        assert_eq!(ks.len(), 1);
        assert_abs_diff_eq!(ks[0] / PI, 0.676, epsilon = 1e-3);
        assert!(constraint_residual(&q, ks[0]).unwrap().abs() < 1e-10);
    }

    #[test]
    fn qwz_pairs_per_axis() {
        let q = QuenchSpec::qwz(0.3, -0.9).unwrap();
        let x = qwz_critical_pairs(&q, 12, 12, TwistAxis::X, 1).unwrap();
        let y = qwz_critical_pairs(&q, 12, 12, TwistAxis::Y, 1).unwrap();
        assert_eq!(x.pairs.len(), 8);
        assert_eq!(y.pairs.len(), 8);
        for p in x.pairs.iter().chain(&y.pairs) {
            assert!(f64::abs(constraint_residual(&q, p.k_c).unwrap()) < 1e-10);
        }
        assert!(solve_critical_momenta(&q).is_err());
    }

    #[test]
    fn qwz_dual_flux_solves_constraint() {
        let q = QuenchSpec::qwz(0.3, -0.9).unwrap();
        let (ky, phx, phy) = qwz_dual_flux(&q, 0.9 * PI, 12, 12).unwrap().unwrap();
        assert!(constraint_residual(&q, (0.9 * PI, ky)).unwrap().abs() < 1e-12);
        assert!((0.0..=PI).contains(&phx) && (0.0..=PI).contains(&phy));
        assert!(qwz_dual_flux(&q, 0.5 * PI, 12, 12).unwrap().is_none());
    }
}
