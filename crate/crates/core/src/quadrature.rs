//! Gauss-Legendre rules and a globally adaptive composite integrator.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0_f64; n];
        let mut weights = vec![0.0_f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn integrate(&self, f: &impl Fn(T) -> T, a: T, b: T) -> T {
        let half = T::lit(0.5);
        let mid = (a + b) * half;
        let rad = (b - a) * half;
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(mid + rad * x);
        }
        acc * rad
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    estimate: T,
    error: T,
    level: usize,
}

/// Adaptive composite Gauss-Legendre integration over consecutive breakpoints.
///
/// Each panel is estimated once whole and once as two halves; the panel with
/// the largest disagreement is bisected until the summed disagreement drops
/// below `tol`.
#[derive(Debug, Clone)]
pub struct AdaptiveQuadrature<T> {
    rule: GaussLegendre<T>,
    pub tol: T,
    pub max_level: usize,
    /// Uniform panels laid between each pair of breakpoints before adapting.
    pub base_panels: usize,
}

impl<T: Real> AdaptiveQuadrature<T> {
    pub fn new(order: usize, tol: T, max_level: usize, base_panels: usize) -> Self {
        Self {
            rule: GaussLegendre::new(order),
            tol,
            max_level,
            base_panels: base_panels.max(1),
        }
    }

    fn panel(&self, f: &impl Fn(T) -> T, a: T, b: T, level: usize) -> Panel<T> {
        let m = (a + b) * T::lit(0.5);
        let coarse = self.rule.integrate(f, a, b);
        let fine = self.rule.integrate(f, a, m) + self.rule.integrate(f, m, b);
        Panel {
            a,
            b,
            estimate: fine,
            error: (fine - coarse).abs(),
            level,
        }
    }

    /// Integrates `f` over `[breaks[0], breaks[last]]`; interior breakpoints
    /// are panel edges, so integrable endpoint singularities are never sampled.
    pub fn integrate(&self, f: impl Fn(T) -> T, breaks: &[T]) -> Result<T> {
        let mut panels = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let h = (b - a) / T::from_count(self.base_panels);
            for i in 0..self.base_panels {
                let lo = a + h * T::from_count(i);
                let hi = if i + 1 == self.base_panels { b } else { lo + h };
                panels.push(self.panel(&f, lo, hi, 0));
            }
        }
        loop {
            let total_err = panels.iter().fold(T::zero(), |acc, p| acc + p.error);
            let estimate = panels.iter().fold(T::zero(), |acc, p| acc + p.estimate);
            if !estimate.is_finite() {
                return Err(Error::Accuracy {
                    levels: 0,
                    estimate: estimate.to_f64().unwrap_or(f64::NAN),
                });
            }
            if total_err < self.tol {
                return Ok(estimate);
            }
            let (worst, _) = panels
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |best, (i, p)| if p.error > best.1 { (i, p.error) } else { best });
            let p = panels.swap_remove(worst);
            if p.level >= self.max_level {
                return Err(Error::Accuracy {
                    levels: p.level,
                    estimate: estimate.to_f64().unwrap_or(f64::NAN),
                });
            }
            let m = (p.a + p.b) * T::lit(0.5);
            panels.push(self.panel(&f, p.a, m, p.level + 1));
            panels.push(self.panel(&f, m, p.b, p.level + 1));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let gl = GaussLegendre::<f64>::new(5);
        let wsum: f64 = gl.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // degree 9 is exact for 5 nodes
        let v = gl.integrate(&|x: f64| x.powi(8) + x.powi(9), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let gl = GaussLegendre::<f64>::new(20);
        for w in gl.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..20 {
            assert!((gl.nodes[i] + gl.nodes[19 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn adaptive_handles_log_endpoint() {
        let q = AdaptiveQuadrature::new(20, 1e-10, 40, 1);
        // int_0^1 ln x dx = -1
        let v = q.integrate(|x: f64| x.ln(), &[0.0, 1.0]).unwrap();
        assert!((v + 1.0).abs() < 1e-9);
        // interior singularity split at the breakpoint
        let v = q.integrate(|x: f64| (x - 0.3).abs().ln(), &[0.0, 0.3, 1.0]).unwrap();
        let exact = 0.3 * 0.3f64.ln() - 0.3 + 0.7 * 0.7f64.ln() - 0.7;
        assert!((v - exact).abs() < 1e-9);
    }

    #[test]
    fn level_cap_reports_best_estimate() {
        let q = AdaptiveQuadrature::new(3, 1e-30, 2, 1);
        match q.integrate(|x: f64| x.ln(), &[0.0, 1.0]) {
            Err(Error::Accuracy { levels, estimate }) => {
                assert_eq!(levels, 2);
                assert!((estimate + 1.0).abs() < 0.1);
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }
}
