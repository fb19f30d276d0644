//! Bracketing root finding on a scanned interval.

use crate::scalar::Real;

/// Bisects `f` on `[a, b]`, assuming `f(a)` and `f(b)` have opposite signs,
/// until the bracket is narrower than `tol`.
pub fn bisect<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let mut fa = f(a);
    let half = T::lit(0.5);
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        let m = a + (b - a) * half;
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == T::zero() {
            return m;
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    a + (b - a) * half
}

/// All sign changes of `f` on `[a, b]` found on `panels` uniform panels, each
/// bisected to `tol`. Exact zeros at panel nodes are reported once.
/// Roots come back in ascending order.
pub fn scan_roots<T: Real>(f: impl Fn(T) -> T, a: T, b: T, panels: usize, tol: T) -> Vec<T> {
    let h = (b - a) / T::from_count(panels);
    let node = |i: usize| if i == panels { b } else { a + h * T::from_count(i) };
    let mut roots = Vec::new();
    let mut x0 = node(0);
    let mut f0 = f(x0);
    if f0 == T::zero() {
        roots.push(x0);
    }
    for i in 1..=panels {
        let x1 = node(i);
        let f1 = f(x1);
        if f1 == T::zero() {
            roots.push(x1);
        } else if f0 != T::zero() && (f0 < T::zero()) != (f1 < T::zero()) {
            roots.push(bisect(&f, x0, x1, tol));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt_two() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn scan_finds_every_root_of_sine() {
        let roots = scan_roots(|x: f64| (3.0 * x).sin(), 0.1, 6.0, 100, 1e-13);
        assert_eq!(roots.len(), 5);
        for (n, r) in roots.iter().enumerate() {
            assert!((r - (n + 1) as f64 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn node_zero_is_reported_once() {
        let roots = scan_roots(|x: f64| x - 0.5, 0.0, 1.0, 4, 1e-12);
        assert_eq!(roots, vec![0.5]);
    }
}
