//! Loschmidt echo and rate function of a quenched two-band model on a finite
//! lattice with twisted boundary conditions.
//!
//! A flux `phi` threaded through a ring of `L` cells shifts every allowed
//! momentum by `phi / L`. The echo factorizes over momenta, so all sums here
//! run over a [`MomentumGrid`] in its fixed listing order; this keeps results
//! bit-reproducible whether the caller maps over fluxes or sizes in parallel.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::band::{d_vector, lambda_from_dvectors, Momentum, QuenchSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Direction(s) along which a flux is threaded on the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistAxis {
    X,
    Y,
    Both,
}

/// Finite lattice geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lattice {
    Chain(usize),
    Square { lx: usize, ly: usize, axis: TwistAxis },
}

impl Lattice {
    /// Builds the grid for a single flux value threaded as the lattice prescribes.
    pub fn grid<T: Real>(&self, phi: T) -> Result<MomentumGrid<T>> {
        match *self {
            Lattice::Chain(l) => MomentumGrid::chain(l, phi),
            Lattice::Square { lx, ly, axis } => {
                let (fx, fy) = match axis {
                    TwistAxis::X => (phi, T::zero()),
                    TwistAxis::Y => (T::zero(), phi),
                    TwistAxis::Both => (phi, phi),
                };
                MomentumGrid::square(lx, ly, fx, fy)
            }
        }
    }
}

/// Allowed momenta of an `L` chain or `Lx x Ly` torus threaded by flux.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumGrid<T> {
    pub sizes: Vec<usize>,
    pub flux: Vec<T>,
    pub momenta: Vec<Momentum<T>>,
}

/// Quantized momenta `(2 pi m + phi) / L` with `m` centred on zero.
fn axis_momenta<T: Real>(l: usize, phi: T) -> Vec<T> {
    let lf = T::from_count(l);
    let (lo, hi): (i64, i64) = if l.is_multiple_of(2) {
        (-(l as i64) / 2, l as i64 / 2 - 1)
    } else {
        (-((l as i64 - 1) / 2), (l as i64 - 1) / 2)
    };
    (lo..=hi)
        .map(|m| (T::TAU() * T::from_i64(m).unwrap() + phi) / lf)
        .collect()
}

fn check_axis<T: Real>(l: usize, phi: T) -> Result<()> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("lattice size must be >= 2, got {l}")));
    }
    if !(phi >= T::zero() && phi < T::TAU()) {
        return Err(Error::InvalidArgument(format!("flux must lie in [0, 2 pi), got {phi}")));
    }
    Ok(())
}

impl<T: Real> MomentumGrid<T> {
    pub fn chain(l: usize, phi: T) -> Result<Self> {
        check_axis(l, phi)?;
        Ok(Self {
            sizes: vec![l],
            flux: vec![phi],
            momenta: axis_momenta(l, phi).into_iter().map(Momentum::One).collect(),
        })
    }

    /// Cartesian product grid, `kx` varying slowest.
    pub fn square(lx: usize, ly: usize, phi_x: T, phi_y: T) -> Result<Self> {
        check_axis(lx, phi_x)?;
        check_axis(ly, phi_y)?;
        let kys = axis_momenta(ly, phi_y);
        let momenta = axis_momenta(lx, phi_x)
            .into_iter()
            .flat_map(|kx| kys.iter().map(move |&ky| Momentum::Two(kx, ky)))
            .collect();
        Ok(Self {
            sizes: vec![lx, ly],
            flux: vec![phi_x, phi_y],
            momenta,
        })
    }

    /// Grid with explicitly listed momenta; normalization uses the product of `sizes`.
    pub fn from_momenta(sizes: Vec<usize>, flux: Vec<T>, momenta: Vec<Momentum<T>>) -> Self {
        Self { sizes, flux, momenta }
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    /// Number of unit cells, the normalization of the rate function.
    pub fn n_cells(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }
}

/// `make_grid(dims, sizes, flux)` with per-axis sizes and fluxes.
pub fn make_grid<T: Real>(dims: usize, sizes: &[usize], flux: &[T]) -> Result<MomentumGrid<T>> {
    match (dims, sizes, flux) {
        (1, [l], [phi]) => MomentumGrid::chain(*l, *phi),
        (2, [lx, ly], [fx, fy]) => MomentumGrid::square(*lx, *ly, *fx, *fy),
        _ => Err(Error::InvalidArgument(format!(
            "grid needs {dims} sizes and fluxes, got {} and {}",
            sizes.len(),
            flux.len()
        ))),
    }
}

/// Per-mode `(Lambda_k, eps_f(k))` for every momentum of a grid.
#[derive(Debug, Clone)]
pub struct ModeTable<T> {
    modes: Vec<(T, T)>,
    n_cells: usize,
}

impl<T: Real> ModeTable<T> {
    pub fn new(quench: &QuenchSpec<T>, grid: &MomentumGrid<T>) -> Result<Self> {
        let modes = grid
            .momenta
            .iter()
            .map(|&k| {
                let di = d_vector(&quench.initial, k)?;
                let df = d_vector(&quench.post, k)?;
                let lambda = lambda_from_dvectors(&di, &df).map_err(|e| match e {
                    Error::DegenerateMode {
                        eps_initial,
                        eps_final,
                        ..
                    } => Error::DegenerateMode {
                        k: format!("{k:?}"),
                        eps_initial,
                        eps_final,
                    },
                    other => other,
                })?;
                Ok((lambda, df.energy()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            modes,
            n_cells: grid.n_cells(),
        })
    }

    /// `sum_k ln L_k(t)` in grid order, or `None` if some factor underflows.
    pub fn log_echo(&self, t: T) -> Option<T> {
        let floor = T::underflow_floor();
        let mut acc = T::zero();
        for &(lambda, eps) in &self.modes {
            let s = (eps * t).sin();
            let factor = T::one() - lambda * s * s;
            if factor <= floor {
                return None;
            }
            acc = acc + factor.ln();
        }
        Some(acc)
    }

    pub fn echo(&self, t: T) -> T {
        self.log_echo(t).map_or(T::zero(), |s| s.exp())
    }

    /// Rate function, `+inf` when the echo vanishes.
    pub fn rate(&self, t: T) -> T {
        match self.log_echo(t) {
            // 0 - x keeps an unquenched echo at +0 rather than -0
            Some(s) => T::zero() - s / T::from_count(self.n_cells),
            None => T::infinity(),
        }
    }
}

/// `L(t) = prod_k L_k(t)`, accumulated in log space.
pub fn loschmidt_echo<T: Real>(quench: &QuenchSpec<T>, grid: &MomentumGrid<T>, t: T) -> Result<T> {
    check_time(t)?;
    Ok(ModeTable::new(quench, grid)?.echo(t))
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Sampled rate function `lambda(t)` with optional echo values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSeries<T> {
    pub times: Vec<T>,
    pub lambda: Vec<T>,
    pub le: Option<Vec<T>>,
    pub metadata: BTreeMap<String, String>,
}

impl<T: Real> RateSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub(crate) fn check_times<T: Real>(times: &[T]) -> Result<()> {
    for &t in times {
        check_time(t)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be ascending".into()));
    }
    Ok(())
}

pub(crate) fn describe_quench<T: Real>(quench: &QuenchSpec<T>) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("model".to_string(), quench.initial.name().to_string());
    meta.insert("initial".to_string(), format!("{:?}", quench.initial));
    meta.insert("final".to_string(), format!("{:?}", quench.post));
    meta
}

/// `lambda(t) = -(1/N) sum_k ln L_k(t)` on `grid` for every requested time.
pub fn rate_function<T: Real>(
    quench: &QuenchSpec<T>,
    grid: &MomentumGrid<T>,
    times: &[T],
) -> Result<RateSeries<T>> {
    check_times(times)?;
    let table = ModeTable::new(quench, grid)?;
    let (lambda, le): (Vec<T>, Vec<T>) = times
        .iter()
        .map(|&t| match table.log_echo(t) {
            Some(s) => (T::zero() - s / T::from_count(table.n_cells), s.exp()),
            None => (T::infinity(), T::zero()),
        })
        .unzip();
    let mut metadata = describe_quench(quench);
    metadata.insert("sizes".to_string(), format!("{:?}", grid.sizes));
    metadata.insert("flux".to_string(), format!("{:?}", grid.flux));
    Ok(RateSeries {
        times: times.to_vec(),
        lambda,
        le: Some(le),
        metadata,
    })
}

/// Vertex of the parabola through three points.
fn parabola_vertex<T: Real>(p0: (T, T), p1: (T, T), p2: (T, T)) -> Option<(T, T)> {
    let (t0, y0) = p0;
    let (t1, y1) = p1;
    let (t2, y2) = p2;
    let a = (t1 - t0) * (y1 - y2);
    let b = (t1 - t2) * (y1 - y0);
    let denom = a - b;
    if denom == T::zero() || !denom.is_finite() {
        return None;
    }
    let half = T::lit(0.5);
    let tv = t1 - half * ((t1 - t0) * a - (t1 - t2) * b) / denom;
    if !(tv >= t0 && tv <= t2) {
        return None;
    }
    // Lagrange form evaluated at the vertex
    let l0 = (tv - t1) * (tv - t2) / ((t0 - t1) * (t0 - t2));
    let l1 = (tv - t0) * (tv - t2) / ((t1 - t0) * (t1 - t2));
    let l2 = (tv - t0) * (tv - t1) / ((t2 - t0) * (t2 - t1));
    Some((tv, y0 * l0 + y1 * l1 + y2 * l2))
}

/// Indices of discrete 3-point maxima (`y[j-1] < y[j] >= y[j+1]`).
fn discrete_maxima<T: Real>(values: &[T]) -> Vec<usize> {
    if values.len() < 3 {
        return Vec::new();
    }
    (1..values.len() - 1)
        .filter(|&j| values[j] > values[j - 1] && values[j] >= values[j + 1])
        .collect()
}

/// Local maxima of a sampled rate function, refined by parabolic interpolation.
///
/// Divergent samples (`+inf`) are reported at their sampled time.
pub fn local_maxima<T: Real>(series: &RateSeries<T>) -> Vec<(T, T)> {
    let (t, y) = (&series.times, &series.lambda);
    discrete_maxima(y)
        .into_iter()
        .map(|j| {
            if !y[j].is_finite() {
                return (t[j], y[j]);
            }
            parabola_vertex((t[j - 1], y[j - 1]), (t[j], y[j]), (t[j + 1], y[j + 1]))
                .unwrap_or((t[j], y[j]))
        })
        .collect()
}

/// Uniform time sampling of `[start, end]` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeWindow<T> {
    pub start: T,
    pub end: T,
    pub steps: usize,
}

impl<T: Real> TimeWindow<T> {
    pub const DEFAULT_STEPS: usize = 4000;

    /// `[0, end]` sampled with the default `end / 4000` spacing.
    pub fn new(end: T) -> Self {
        Self {
            start: T::zero(),
            end,
            steps: Self::DEFAULT_STEPS,
        }
    }

    pub fn span(start: T, end: T, steps: usize) -> Self {
        Self { start, end, steps }
    }

    /// `[start, end]` with a spacing no larger than `dt`.
    pub fn with_dt(start: T, end: T, dt: T) -> Self {
        let steps = ((end - start) / dt).ceil().to_usize().unwrap_or(1).max(1);
        Self { start, end, steps }
    }

    pub fn dt(&self) -> T {
        (self.end - self.start) / T::from_count(self.steps.max(1))
    }

    pub fn times(&self) -> Vec<T> {
        let dt = self.dt();
        (0..=self.steps)
            .map(|i| {
                if i == self.steps {
                    self.end
                } else {
                    self.start + dt * T::from_count(i)
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.start >= T::zero() && self.end > self.start && self.steps >= 2) {
            return Err(Error::InvalidArgument(format!(
                "time window must satisfy 0 <= start < end with >= 2 steps, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Which local maximum of `lambda(t)` a scan reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakSelection {
    /// Earliest local maximum in the window.
    #[default]
    First,
    /// Largest local maximum in the window.
    Highest,
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..200 {
        if fc.is_infinite() {
            return (c, fc);
        }
        if fd.is_infinite() {
            return (d, fd);
        }
        if (b - a) <= tol * (a.abs() + b.abs()).max(T::one()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Refines a discrete maximum of the sampled curve by maximizing `f` itself
/// between the neighbouring samples.
pub(crate) fn refine_peak<T: Real>(f: impl Fn(T) -> T, times: &[T], values: &[T], j: usize) -> (T, T) {
    if values[j].is_infinite() {
        return (times[j], values[j]);
    }
    let (tg, yg) = golden_max(&f, times[j - 1], times[j + 1]);
    if yg >= values[j] {
        (tg, yg)
    } else {
        (times[j], values[j])
    }
}

/// Selected local maximum of `f` sampled on `window`.
pub(crate) fn select_peak<T: Real>(
    f: impl Fn(T) -> T + Sync,
    window: &TimeWindow<T>,
    selection: PeakSelection,
) -> Option<(T, T)> {
    let times = window.times();
    let values: Vec<T> = times.iter().map(|&t| f(t)).collect();
    let candidates = discrete_maxima(&values);
    match selection {
        PeakSelection::First => candidates
            .first()
            .map(|&j| refine_peak(&f, &times, &values, j)),
        PeakSelection::Highest => candidates
            .into_iter()
            .map(|j| refine_peak(&f, &times, &values, j))
            .fold(None, |best: Option<(T, T)>, p| match best {
                Some(b) if b.1 >= p.1 => Some(b),
                _ => Some(p),
            }),
    }
}

/// One row of a flux scan; `lambda_max` is `None` when the window holds no maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxPoint<T> {
    pub phi: T,
    pub t_peak: Option<T>,
    pub lambda_max: Option<T>,
}

/// Peak height of the rate function as a function of the threaded flux.
pub fn lambda_max_vs_flux<T: Real>(
    quench: &QuenchSpec<T>,
    lattice: Lattice,
    fluxes: &[T],
    window: &TimeWindow<T>,
    selection: PeakSelection,
) -> Result<Vec<FluxPoint<T>>> {
    window.validate()?;
    fluxes
        .par_iter()
        .map(|&phi| {
            let table = ModeTable::new(quench, &lattice.grid(phi)?)?;
            let peak = select_peak(|t| table.rate(t), window, selection);
            Ok(FluxPoint {
                phi,
                t_peak: peak.map(|p| p.0),
                lambda_max: peak.map(|p| p.1),
            })
        })
        .collect()
}

/// First peak of the rate function for one chain length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizePoint<T> {
    pub size: usize,
    pub t_peak: Option<T>,
    pub lambda_max: Option<T>,
}

/// First local maximum of `lambda(t)` for each chain length at fixed flux.
pub fn size_sweep<T: Real>(
    quench: &QuenchSpec<T>,
    sizes: &[usize],
    phi: T,
    window: &TimeWindow<T>,
) -> Result<Vec<SizePoint<T>>> {
    window.validate()?;
    if quench.dims() != 1 {
        return Err(Error::InvalidArgument("size sweeps are defined for chains".into()));
    }
    if let Some(&l) = sizes.iter().find(|&&l| l < 4) {
        return Err(Error::InvalidArgument(format!("sweep sizes must be >= 4, got {l}")));
    }
    sizes
        .par_iter()
        .map(|&size| {
            let table = ModeTable::new(quench, &MomentumGrid::chain(size, phi)?)?;
            let peak = select_peak(|t| table.rate(t), window, PeakSelection::First);
            Ok(SizePoint {
                size,
                t_peak: peak.map(|p| p.0),
                lambda_max: peak.map(|p| p.1),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ks(grid: &MomentumGrid<f64>) -> Vec<f64> {
        grid.momenta
            .iter()
            .map(|k| match k {
                Momentum::One(k) => *k,
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn even_chain_quantization() {
        let g = MomentumGrid::chain(4, 0.0).unwrap();
        assert_eq!(ks(&g), vec![-PI, -PI / 2.0, 0.0, PI / 2.0]);
        let shifted = MomentumGrid::chain(4, PI).unwrap();
        for (a, b) in ks(&shifted).iter().zip(ks(&g)) {
            assert_abs_diff_eq!(*a, b + PI / 4.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn odd_chain_quantization() {
        let g = MomentumGrid::chain(3, 0.0).unwrap();
        let k = ks(&g);
        assert_eq!(k.len(), 3);
        assert_abs_diff_eq!(k[0], -2.0 * PI / 3.0, epsilon = 1e-15);
        assert_eq!(k[1], 0.0);
        assert_abs_diff_eq!(k[2], 2.0 * PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn square_grid_is_a_product() {
        let g = make_grid(2, &[3, 4], &[0.1, 0.2]).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.n_cells(), 12);
        assert_eq!(g.momenta[0], Momentum::Two((-2.0 * PI + 0.1) / 3.0, (-PI * 2.0 * 2.0 + 0.2) / 4.0));
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(MomentumGrid::chain(1, 0.0).is_err());
        assert!(MomentumGrid::chain(0, 0.0).is_err());
        assert!(MomentumGrid::chain(4, 2.0 * PI).is_err());
        assert!(MomentumGrid::chain(4, -0.1).is_err());
        assert!(make_grid(2, &[4], &[0.0]).is_err());
    }

    #[test]
    fn echo_is_one_without_quench_or_time() {
        let q = QuenchSpec::ssh(1.5, 0.5).unwrap();
        let g = MomentumGrid::chain(20, 0.3).unwrap();
        assert_eq!(loschmidt_echo(&q, &g, 0.0).unwrap(), 1.0);
        let same = QuenchSpec::ssh(1.5, 1.5).unwrap();
        for t in [0.5, 2.0, 9.0] {
            assert_eq!(loschmidt_echo(&same, &g, t).unwrap(), 1.0);
        }
    }

    #[test]
    fn rate_series_starts_at_zero() {
        let q = QuenchSpec::creutz(0.4, -0.4, 0.5).unwrap();
        let g = MomentumGrid::chain(20, 0.0).unwrap();
        let s = rate_function(&q, &g, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(s.lambda[0], 0.0);
        assert!(s.lambda.iter().all(|&l| l >= -1e-12));
        assert!(rate_function(&q, &g, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn monotone_series_has_no_maxima() {
        let s = RateSeries {
            times: vec![0.0, 1.0, 2.0, 3.0],
            lambda: vec![0.0, 0.1, 0.2, 0.3],
            le: None,
            metadata: BTreeMap::new(),
        };
        assert!(local_maxima(&s).is_empty());
    }

    #[test]
    fn parabolic_refinement_is_exact_for_parabolas() {
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let lambda = times.iter().map(|t| 2.0 - (t - 0.93) * (t - 0.93)).collect();
        let s = RateSeries {
            times,
            lambda,
            le: None,
            metadata: BTreeMap::new(),
        };
        let peaks = local_maxima(&s);
        assert_eq!(peaks.len(), 1);
        assert_abs_diff_eq!(peaks[0].0, 0.93, epsilon = 1e-12);
        assert_abs_diff_eq!(peaks[0].1, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn infinite_samples_are_peaks_at_sampled_time() {
        let s = RateSeries {
            times: vec![0.0, 1.0, 2.0],
            lambda: vec![0.0, f64::INFINITY, 0.5],
            le: None,
            metadata: BTreeMap::new(),
        };
        assert_eq!(local_maxima(&s), vec![(1.0, f64::INFINITY)]);
    }

    #[test]
    fn golden_section_finds_smooth_maximum() {
        let (t, y) = golden_max(|t: f64| -(t - 0.3).powi(2), 0.0, 1.0);
        assert_abs_diff_eq!(t, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn time_window_sampling() {
        let w = TimeWindow::with_dt(0.0, 1.0, 0.3);
        assert_eq!(w.steps, 4);
        let ts = w.times();
        assert_eq!(ts.len(), 5);
        assert_eq!(*ts.last().unwrap(), 1.0);
        assert_eq!(TimeWindow::new(8.0).dt(), 0.002);
    }
}
