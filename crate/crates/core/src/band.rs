//! Two-band Bloch Hamiltonians `h(k) = d(k)·σ + d0(k)·1` and the per-mode
//! quench quantities derived from them.
//!
//! Four lattice models are supported: the SSH chain, the Creutz ladder, the
//! SSH chain with exponentially decaying long-range hopping, and the
//! two-dimensional Qi-Wu-Zhang model. Energies are measured in units of the
//! intracell hopping (SSH family) or of the horizontal/diagonal hopping
//! (Creutz), both fixed to one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Momentum argument: a scalar for chains, a pair for the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Momentum<T> {
    One(T),
    Two(T, T),
}

impl<T: Real> Momentum<T> {
    fn describe(&self) -> String {
        match self {
            Momentum::One(k) => format!("{k}"),
            Momentum::Two(kx, ky) => format!("({kx}, {ky})"),
        }
    }
}

impl<T> From<T> for Momentum<T> {
    fn from(k: T) -> Self {
        Momentum::One(k)
    }
}

impl<T> From<(T, T)> for Momentum<T> {
    fn from((kx, ky): (T, T)) -> Self {
        Momentum::Two(kx, ky)
    }
}

/// Pauli components of a two-band Bloch Hamiltonian at one momentum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DVector<T> {
    pub dx: T,
    pub dy: T,
    pub dz: T,
    pub d0: T,
}

impl<T: Real> DVector<T> {
    pub fn new(dx: T, dy: T, dz: T, d0: T) -> Self {
        Self { dx, dy, dz, d0 }
    }

    /// Half the band splitting, `|d|`. The identity part `d0` does not enter.
    pub fn energy(&self) -> T {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }

    /// Euclidean product of the Pauli parts.
    pub fn dot(&self, other: &Self) -> T {
        self.dx * other.dx + self.dy * other.dy + self.dz * other.dz
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dz.is_finite() && self.d0.is_finite()
    }
}

/// Lattice model together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec<T> {
    /// SSH chain with `gamma = J2 / J1`.
    Ssh { gamma: T },
    /// Creutz ladder with `J_h = J_d = 1`; `jv_tilde = J_v / 2`.
    Creutz { theta: T, jv_tilde: T },
    /// SSH chain with hoppings `V_{n,r} = J_n exp(-alpha (r - 1))`, summed to `r = half_range`.
    LongRangeSsh {
        j1: T,
        j2: T,
        j3: T,
        j4: T,
        alpha: T,
        half_range: usize,
    },
    /// Qi-Wu-Zhang model with chemical potential `mu`.
    Qwz { mu: T },
}

impl<T: Real> ModelSpec<T> {
    pub fn ssh(gamma: T) -> Self {
        ModelSpec::Ssh { gamma }
    }

    pub fn creutz(theta: T, jv_tilde: T) -> Self {
        ModelSpec::Creutz { theta, jv_tilde }
    }

    pub fn qwz(mu: T) -> Self {
        ModelSpec::Qwz { mu }
    }

    /// Long-range SSH chain for a ring of `cells` unit cells (`half_range = cells / 2`).
    pub fn long_range_ssh(j1: T, j2: T, j3: T, j4: T, alpha: T, cells: usize) -> Self {
        ModelSpec::LongRangeSsh {
            j1,
            j2,
            j3,
            j4,
            alpha,
            half_range: cells / 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ssh { .. } => "ssh",
            ModelSpec::Creutz { .. } => "creutz",
            ModelSpec::LongRangeSsh { .. } => "long_range_ssh",
            ModelSpec::Qwz { .. } => "qwz",
        }
    }

    /// Spatial dimension of the Brillouin zone.
    pub fn dims(&self) -> usize {
        match self {
            ModelSpec::Qwz { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        match *self {
            ModelSpec::Ssh { gamma } => {
                if !finite(&[gamma]) {
                    return Err(Error::InvalidArgument("SSH gamma must be finite".into()));
                }
            }
            ModelSpec::Creutz { theta, jv_tilde } => {
                if !finite(&[theta, jv_tilde]) || theta.abs() > T::FRAC_PI_2() {
                    return Err(Error::InvalidArgument(format!(
                        "Creutz theta must lie in [-pi/2, pi/2], got {theta}"
                    )));
                }
                if jv_tilde < T::zero() || jv_tilde >= T::one() {
                    return Err(Error::InvalidArgument(format!(
                        "Creutz jv_tilde must lie in [0, 1), got {jv_tilde}"
                    )));
                }
            }
            ModelSpec::LongRangeSsh {
                j1,
                j2,
                j3,
                j4,
                alpha,
                half_range,
            } => {
                if !finite(&[j1, j2, j3, j4, alpha]) || alpha <= T::zero() {
                    return Err(Error::InvalidArgument(format!(
                        "long-range alpha must be positive, got {alpha}"
                    )));
                }
                if half_range == 0 {
                    return Err(Error::InvalidArgument("long-range half_range must be >= 1".into()));
                }
            }
            ModelSpec::Qwz { mu } => {
                if !finite(&[mu]) {
                    return Err(Error::InvalidArgument("QWZ mu must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

/// Bloch components of `model` at momentum `k`.
pub fn d_vector<T: Real>(model: &ModelSpec<T>, k: impl Into<Momentum<T>>) -> Result<DVector<T>> {
    let k = k.into();
    let two = T::lit(2.0);
    let d = match (*model, k) {
        (ModelSpec::Ssh { gamma }, Momentum::One(k)) => {
            DVector::new(T::one() + gamma * k.cos(), -gamma * k.sin(), T::zero(), T::zero())
        }
        (ModelSpec::Creutz { theta, jv_tilde }, Momentum::One(k)) => {
            let (s, c) = k.sin_cos();
            DVector::new(
                -two * (c + jv_tilde),
                T::zero(),
                -two * s * theta.sin(),
                -two * c * theta.cos(),
            )
        }
        (
            ModelSpec::LongRangeSsh {
                j1,
                j2,
                j3,
                j4,
                alpha,
                half_range,
            },
            Momentum::One(k),
        ) => {
            let mut d = DVector::default();
            for r in 1..=half_range {
                let rf = T::from_count(r);
                let decay = (-alpha * (rf - T::one())).exp();
                let (v1, v2, v3, v4) = (j1 * decay, j2 * decay, j3 * decay, j4 * decay);
                let (s_prev, c_prev) = (k * (rf - T::one())).sin_cos();
                let (s_r, c_r) = (k * rf).sin_cos();
                d.dx = d.dx + v1 * c_prev + v2 * c_r;
                d.dy = d.dy + v1 * s_prev - v2 * s_r;
                d.dz = d.dz + (v3 - v4) * c_r;
                d.d0 = d.d0 + (v3 + v4) * c_r;
            }
            d
        }
        (ModelSpec::Qwz { mu }, Momentum::Two(kx, ky)) => DVector::new(
            ky.sin(),
            -kx.sin(),
            -kx.cos() - ky.cos() - mu,
            -two * mu,
        ),
        (m, k) => {
            return Err(Error::InvalidArgument(format!(
                "momentum {} does not match the {}-dimensional {} model",
                k.describe(),
                m.dims(),
                m.name()
            )))
        }
    };
    if !k_is_finite(&k) {
        return Err(Error::InvalidArgument(format!("non-finite momentum {}", k.describe())));
    }
    Ok(d)
}

fn k_is_finite<T: Real>(k: &Momentum<T>) -> bool {
    match *k {
        Momentum::One(k) => k.is_finite(),
        Momentum::Two(kx, ky) => kx.is_finite() && ky.is_finite(),
    }
}

/// `|d(k)|` of `model`; the identity component is excluded.
pub fn band_energy<T: Real>(model: &ModelSpec<T>, k: impl Into<Momentum<T>>) -> Result<T> {
    Ok(d_vector(model, k)?.energy())
}

/// Prequench and postquench models that differ only in their driving parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuenchSpec<T> {
    pub initial: ModelSpec<T>,
    #[serde(rename = "final")]
    pub post: ModelSpec<T>,
}

impl<T: Real> QuenchSpec<T> {
    pub fn new(initial: ModelSpec<T>, post: ModelSpec<T>) -> Result<Self> {
        initial.validate()?;
        post.validate()?;
        use ModelSpec::*;
        let compatible = match (initial, post) {
            (Ssh { .. }, Ssh { .. }) | (Qwz { .. }, Qwz { .. }) => true,
            (Creutz { jv_tilde: a, .. }, Creutz { jv_tilde: b, .. }) => a == b,
            (
                LongRangeSsh {
                    j1,
                    j3,
                    j4,
                    alpha,
                    half_range,
                    ..
                },
                LongRangeSsh {
                    j1: j1f,
                    j3: j3f,
                    j4: j4f,
                    alpha: alphaf,
                    half_range: hf,
                    ..
                },
            ) => j1 == j1f && j3 == j3f && j4 == j4f && alpha == alphaf && half_range == hf,
            _ => false,
        };
        if !compatible {
            return Err(Error::InvalidArgument(format!(
                "quench endpoints must be the same model differing only in the driving parameter: {initial:?} -> {post:?}"
            )));
        }
        Ok(Self { initial, post })
    }

    pub fn ssh(gamma_i: T, gamma_f: T) -> Result<Self> {
        Self::new(ModelSpec::ssh(gamma_i), ModelSpec::ssh(gamma_f))
    }

    pub fn creutz(theta_i: T, theta_f: T, jv_tilde: T) -> Result<Self> {
        Self::new(ModelSpec::creutz(theta_i, jv_tilde), ModelSpec::creutz(theta_f, jv_tilde))
    }

    pub fn qwz(mu_i: T, mu_f: T) -> Result<Self> {
        Self::new(ModelSpec::qwz(mu_i), ModelSpec::qwz(mu_f))
    }

    /// Long-range SSH quench of the `j2` family with `j3 = j4 = 0`.
    pub fn long_range_ssh(j1: T, j2_i: T, j2_f: T, alpha: T, cells: usize) -> Result<Self> {
        let z = T::zero();
        Self::new(
            ModelSpec::long_range_ssh(j1, j2_i, z, z, alpha, cells),
            ModelSpec::long_range_ssh(j1, j2_f, z, z, alpha, cells),
        )
    }

    pub fn dims(&self) -> usize {
        self.initial.dims()
    }

    /// Both d-vectors at `k`.
    pub fn d_pair(&self, k: impl Into<Momentum<T>>) -> Result<(DVector<T>, DVector<T>)> {
        let k = k.into();
        Ok((d_vector(&self.initial, k)?, d_vector(&self.post, k)?))
    }
}

/// `1 - (d_i·d_f / (|d_i| |d_f|))^2` from raw d-vectors.
pub fn lambda_from_dvectors<T: Real>(di: &DVector<T>, df: &DVector<T>) -> Result<T> {
    let (ei, ef) = (di.energy(), df.energy());
    let gap_tol = T::lit(1e-14);
    if !(ei > gap_tol && ef > gap_tol) {
        return Err(Error::DegenerateMode {
            k: "<raw>".into(),
            eps_initial: ei.to_f64().unwrap_or(f64::NAN),
            eps_final: ef.to_f64().unwrap_or(f64::NAN),
        });
    }
    let overlap = di.dot(df) / (ei * ef);
    let mut lambda = T::one() - overlap * overlap;
    if lambda < T::lit(0.5) {
        // |d_i x d_f|^2 / (eps_i eps_f)^2 avoids cancellation near parallel vectors
        let cx = di.dy * df.dz - di.dz * df.dy;
        let cy = di.dz * df.dx - di.dx * df.dz;
        let cz = di.dx * df.dy - di.dy * df.dx;
        lambda = (cx * cx + cy * cy + cz * cz) / (ei * ei * ef * ef);
    }
    // rounding can push the value a hair outside [0, 1]
    Ok(lambda.max(T::zero()).min(T::one()))
}

/// Mode echo `1 - Lambda sin^2(eps_f t)` from raw d-vectors.
pub fn le_from_dvectors<T: Real>(di: &DVector<T>, df: &DVector<T>, t: T) -> Result<T> {
    let lambda = lambda_from_dvectors(di, df)?;
    let s = (df.energy() * t).sin();
    Ok(T::one() - lambda * s * s)
}

fn with_k<T: Real, R>(k: &Momentum<T>, r: Result<R>) -> Result<R> {
    r.map_err(|e| match e {
        Error::DegenerateMode {
            eps_initial,
            eps_final,
            ..
        } => Error::DegenerateMode {
            k: k.describe(),
            eps_initial,
            eps_final,
        },
        other => other,
    })
}

/// Oscillation amplitude `Lambda_k` of the mode echo.
pub fn lambda_k<T: Real>(quench: &QuenchSpec<T>, k: impl Into<Momentum<T>>) -> Result<T> {
    let k = k.into();
    let (di, df) = quench.d_pair(k)?;
    with_k(&k, lambda_from_dvectors(&di, &df))
}

/// Mode Loschmidt echo `L_k(t) = 1 - Lambda_k sin^2(eps_f(k) t)`.
pub fn le_mode<T: Real>(quench: &QuenchSpec<T>, k: impl Into<Momentum<T>>, t: T) -> Result<T> {
    let k = k.into();
    if t < T::zero() {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    let (di, df) = quench.d_pair(k)?;
    with_k(&k, le_from_dvectors(&di, &df, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn ssh_at_zero_momentum() {
        let d = d_vector(&ModelSpec::ssh(0.5), 0.0).unwrap();
        assert_eq!(d, DVector::new(1.5, 0.0, 0.0, 0.0));
        assert_eq!(band_energy(&ModelSpec::ssh(0.5), 0.0).unwrap(), 1.5);
    }

    #[test]
    fn qwz_at_gamma_point() {
        let d = d_vector(&ModelSpec::qwz(0.3), (0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(d.dx, 0.0);
        assert_abs_diff_eq!(d.dy, 0.0);
        assert_abs_diff_eq!(d.dz, -2.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d.d0, -0.6, epsilon = 1e-15);
    }

    #[test]
    fn creutz_at_half_pi() {
        let d = d_vector(&ModelSpec::creutz(0.4, 0.5), PI / 2.0).unwrap();
        assert_abs_diff_eq!(d.dx, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.dy, 0.0);
        assert_abs_diff_eq!(d.dz, -0.778_836_684_617_301_3, epsilon = 1e-12);
        assert_abs_diff_eq!(d.d0, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn long_range_matches_direct_sum() {
        let model = ModelSpec::long_range_ssh(1.0, 0.5, 0.0, 0.0, 10.0, 20);
        let k = PI / 2.0;
        let d = d_vector(&model, k).unwrap();
        let (mut dx, mut dy) = (0.0, 0.0);
        for r in 1..=10 {
            let w = (-10.0 * (r as f64 - 1.0)).exp();
            dx += w * (k * (r as f64 - 1.0)).cos() + 0.5 * w * (k * r as f64).cos();
            dy += w * (k * (r as f64 - 1.0)).sin() - 0.5 * w * (k * r as f64).sin();
        }
        assert_abs_diff_eq!(d.dx, dx, epsilon = 1e-15);
        assert_abs_diff_eq!(d.dy, dy, epsilon = 1e-15);
        assert!((d.dx - 1.0).abs() < 1e-4);
    }

    #[test]
    fn dimensionality_mismatch_is_rejected() {
        assert!(matches!(
            d_vector(&ModelSpec::qwz(0.3), 0.1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            d_vector(&ModelSpec::ssh(0.3), (0.1, 0.2)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn lambda_examples() {
        let q = QuenchSpec::ssh(1.5, 1.5).unwrap();
        assert_eq!(lambda_k(&q, 0.7).unwrap(), 0.0);

        let q = QuenchSpec::ssh(1.5, 0.5).unwrap();
        let expected = 1.0 - 3.0625 / 4.0625;
        assert_abs_diff_eq!(lambda_k(&q, PI / 2.0).unwrap(), expected, epsilon = 1e-14);

        let kc = (-(1.0 + 0.75) / 2.0_f64).acos();
        assert_abs_diff_eq!(lambda_k(&q, kc).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(band_energy(&q.post, kc).unwrap(), 0.375_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn le_mode_period_and_origin() {
        let q = QuenchSpec::creutz(0.4, -0.4, 0.5).unwrap();
        let k = 1.1;
        assert_eq!(le_mode(&q, k, 0.0).unwrap(), 1.0);
        let eps = band_energy(&q.post, k).unwrap();
        assert_abs_diff_eq!(le_mode(&q, k, PI / eps).unwrap(), 1.0, epsilon = 1e-12);
        assert!(le_mode(&q, k, -1.0).is_err());
    }

    #[test]
    fn gapless_mode_is_an_error() {
        // gamma = -1 closes the SSH gap at k = 0
        let q = QuenchSpec::ssh(-1.0, 0.5).unwrap();
        assert!(matches!(lambda_k(&q, 0.0), Err(Error::DegenerateMode { .. })));
    }

    #[test]
    fn quench_endpoints_must_match() {
        assert!(QuenchSpec::new(ModelSpec::ssh(1.0), ModelSpec::qwz(1.0)).is_err());
        assert!(QuenchSpec::new(ModelSpec::creutz(0.4, 0.5), ModelSpec::creutz(-0.4, 0.2)).is_err());
        assert!(QuenchSpec::creutz(2.0, -0.4, 0.5).is_err());
        assert!(QuenchSpec::creutz(0.4, -0.4, 1.0).is_err());
        assert!(QuenchSpec::long_range_ssh(1.0, 1.5, 0.5, 0.0, 20).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let q = QuenchSpec::<f32>::ssh(1.5, 0.5).unwrap();
        let l = lambda_k(&q, std::f32::consts::FRAC_PI_2).unwrap();
        assert!((l - 0.246_153_8).abs() < 1e-5);
    }
}
