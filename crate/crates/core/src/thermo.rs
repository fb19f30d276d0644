//! Thermodynamic-limit rate function
//! `lambda(t) = -(1/2pi) int_0^{2pi} ln[1 - Lambda_k sin^2(eps_f(k) t)] dk`.
//!
//! At a critical time the integrand has an integrable logarithmic singularity
//! at every critical momentum, so those momenta are used as panel edges.

use std::collections::BTreeMap;

use crate::band::{d_vector, lambda_from_dvectors, QuenchSpec};
use crate::critical::solve_critical_momenta;
use crate::error::{Error, Result};
use crate::loschmidt::{check_times, describe_quench, RateSeries};
use crate::quadrature::AdaptiveQuadrature;
use crate::scalar::Real;

/// Quadrature settings for [`thermo_rate_with`].
#[derive(Debug, Clone, Copy)]
pub struct ThermoOptions {
    pub order: usize,
    pub tol: f64,
    pub max_level: usize,
    pub base_panels: usize,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        Self {
            order: 20,
            tol: 1e-8,
            max_level: 30,
            base_panels: 8,
        }
    }
}

fn integrand<T: Real>(quench: &QuenchSpec<T>, t: T, k: T) -> Result<T> {
    let di = d_vector(&quench.initial, k)?;
    let df = d_vector(&quench.post, k)?;
    let lambda = lambda_from_dvectors(&di, &df)?;
    let s = (df.energy() * t).sin();
    let factor = (T::one() - lambda * s * s).max(T::underflow_floor());
    Ok(-factor.ln())
}

/// Spot check of `f(k) = f(2pi - k)` at a few fixed momenta.
fn integrand_is_even<T: Real>(quench: &QuenchSpec<T>, t: T) -> Result<bool> {
    for frac in [0.037, 0.19, 0.31, 0.45, 0.58, 0.73, 0.91] {
        let k = T::PI() * T::lit(frac);
        let a = integrand(quench, t, k)?;
        let b = integrand(quench, t, T::TAU() - k)?;
        if (a - b).abs() > T::lit(1e-12) * (T::one() + a.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn thermo_rate<T: Real>(quench: &QuenchSpec<T>, t: T) -> Result<T> {
    thermo_rate_with(quench, t, &ThermoOptions::default())
}

pub fn thermo_rate_with<T: Real>(quench: &QuenchSpec<T>, t: T, opts: &ThermoOptions) -> Result<T> {
    if quench.dims() != 1 {
        return Err(Error::InvalidArgument(
            "the thermodynamic-limit integral is implemented for chains".into(),
        ));
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    if t == T::zero() {
        return Ok(T::zero());
    }
    let critical = match solve_critical_momenta(quench) {
        Ok(ks) => ks,
        Err(Error::NoSolution(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    let quad = AdaptiveQuadrature::new(opts.order, T::lit(opts.tol), opts.max_level, opts.base_panels);
    let f = |k: T| integrand(quench, t, k).unwrap_or(T::nan());
    // surface gapless modes before integrating
    integrand(quench, t, T::PI() * T::lit(0.5))?;

    let mut breaks = vec![T::zero()];
    if integrand_is_even(quench, t)? {
        breaks.extend(critical.iter().copied().filter(|&k| k < T::PI()));
        breaks.push(T::PI());
        let value = quad.integrate(f, &breaks)?;
        Ok(value / T::PI())
    } else {
        breaks.extend(critical.iter().copied().filter(|&k| k < T::PI()));
        breaks.push(T::PI());
        breaks.extend(critical.iter().rev().map(|&k| T::TAU() - k).filter(|&k| k > T::PI()));
        breaks.push(T::TAU());
        let value = quad.integrate(f, &breaks)?;
        Ok(value / T::TAU())
    }
}

/// Elementwise [`thermo_rate`].
pub fn thermo_series<T: Real>(quench: &QuenchSpec<T>, times: &[T]) -> Result<RateSeries<T>> {
    check_times(times)?;
    let lambda = times
        .iter()
        .map(|&t| thermo_rate(quench, t))
        .collect::<Result<Vec<_>>>()?;
    let mut metadata: BTreeMap<String, String> = describe_quench(quench);
    metadata.insert("sizes".to_string(), "thermodynamic_limit".to_string());
    Ok(RateSeries {
        times: times.to_vec(),
        lambda,
        le: None,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_zero() {
        let q = QuenchSpec::ssh(1.5, 0.5).unwrap();
        assert_eq!(thermo_rate(&q, 0.0).unwrap(), 0.0);
        assert_eq!(thermo_series(&q, &[0.0]).unwrap().lambda, vec![0.0]);
    }

    #[test]
    fn square_lattice_is_rejected() {
        let q = QuenchSpec::qwz(0.3, -0.9).unwrap();
        assert!(thermo_rate(&q, 1.0).is_err());
    }

    #[test]
    fn no_quench_gives_zero() {
        let q = QuenchSpec::creutz(0.4, 0.4, 0.5).unwrap();
        assert!(f64::abs(thermo_rate(&q, 3.0).unwrap()) < 1e-12);
    }
}
