//! Two-nearest-neighbour intrinsic-dimension estimator and the datasets
//! built from trajectory ensembles.

use crate::error::{invalid, Error, Result};
use crate::hilbert::real_embedding;
use crate::scalar::Real;
use crate::trajectory::TrajectoryRecord;
use rayon::prelude::*;

/// Distances at or below this are treated as coincident points.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;
pub const DEFAULT_CUTOFF: f64 = 0.9;
/// Relative RMS deviation above which the Pareto hypothesis is rejected.
pub const PARETO_TOLERANCE: f64 = 0.1;

/// `N` points in `ℝ^D`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: &[Vec<T>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
        }
        Self::from_flat(dim, points.concat())
    }

    pub fn from_flat(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("points need at least one coordinate"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(invalid("flat data length is not a multiple of the dimension"));
        }
        if data.len() / dim < 3 {
            return Err(Error::TooFewPoints { usable: data.len() / dim });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        Ok(Self { dim, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    /// Applies `f` to every point.
    pub fn map_points(&self, mut f: impl FnMut(&[T]) -> Vec<T>) -> Result<Self> {
        let pts: Vec<Vec<T>> = self.points().map(&mut f).collect();
        Self::new(&pts)
    }
}

pub trait Metric<T>: Sync {
    fn distance(&self, a: &[T], b: &[T]) -> T;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl<T: Real> Metric<T> for Euclidean {
    fn distance(&self, a: &[T], b: &[T]) -> T {
        a.iter()
            .zip(b)
            .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSample<T> {
    pub mu: T,
    pub r_nn: T,
    pub r_nnn: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuRatios<T> {
    pub samples: Vec<MuSample<T>>,
    pub discarded: usize,
}

/// `(r_nn, r_nnn)` of point `i` by exhaustive search.
fn two_nearest<T: Real, M: Metric<T>>(cloud: &PointCloud<T>, metric: &M, i: usize) -> (T, T) {
    let q = cloud.point(i);
    let (mut d1, mut d2) = (T::infinity(), T::infinity());
    for (j, p) in cloud.points().enumerate() {
        if j == i {
            continue;
        }
        let d = metric.distance(q, p);
        if d < d1 {
            d2 = d1;
            d1 = d;
        } else if d < d2 {
            d2 = d;
        }
    }
    (d1, d2)
}

/// `μ_i = r_nn / r_nnn` ratios with exact neighbours. Points whose nearest
/// neighbour is closer than [`DEGENERATE_DISTANCE`] are dropped and counted.
pub fn mu_ratios<T: Real, M: Metric<T>>(cloud: &PointCloud<T>, metric: &M) -> Result<MuRatios<T>> {
    let tiny = T::lit(DEGENERATE_DISTANCE);
    let pairs: Vec<(T, T)> = (0..cloud.len()).into_par_iter().map(|i| two_nearest(cloud, metric, i)).collect();
    let mut samples = Vec::with_capacity(pairs.len());
    let mut discarded = 0;
    for (r_nn, r_nnn) in pairs {
        if r_nn < tiny {
            discarded += 1;
        } else {
            samples.push(MuSample { mu: r_nnn / r_nn, r_nn, r_nnn });
        }
    }
    if samples.len() < 3 {
        return Err(Error::TooFewPoints { usable: samples.len() });
    }
    Ok(MuRatios { samples, discarded })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdEstimate<T> {
    pub id: T,
    pub typical_scale: T,
    pub n_points: usize,
    pub cutoff_fraction: T,
    /// RMS deviation of the retained points from the fitted line.
    pub fit_residual: T,
    /// Standard error of the slope from least-squares theory.
    pub std_error: T,
    /// `fit_residual` divided by the RMS of the fitted ordinates.
    pub relative_residual: T,
    pub discarded: usize,
}

impl<T: Real> IdEstimate<T> {
    /// Whether the ratios look Pareto distributed.
    pub fn is_pareto(&self) -> bool {
        self.relative_residual <= T::lit(PARETO_TOLERANCE)
    }
}

fn check_cutoff<T: Real>(cutoff: T) -> Result<()> {
    if !(cutoff > T::zero() && cutoff <= T::one()) {
        return Err(invalid(format!("cutoff fraction must lie in (0, 1], got {cutoff}")));
    }
    Ok(())
}

/// Through-origin fit of `−log(1 − i/N)` against `log μ_(i)` over the
/// smallest `⌊cutoff·N⌋` ratios; the largest ratio is never used.
pub fn fit_mu<T: Real>(mu: &[T], cutoff: T) -> Result<(T, T, T, T)> {
    check_cutoff(cutoff)?;
    let n = mu.len();
    if n < 3 {
        return Err(Error::TooFewPoints { usable: n });
    }
    let mut sorted = mu.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
    let nf = T::from_usize_lossy(n);
    let keep = ((cutoff * nf).floor().to_usize().unwrap_or(0)).min(n - 1);
    if keep < 2 {
        return Err(Error::TooFewPoints { usable: keep });
    }
    let xs: Vec<T> = sorted[..keep].iter().map(|m| m.ln()).collect();
    let ys: Vec<T> = (1..=keep).map(|i| -(T::one() - T::from_usize_lossy(i) / nf).ln()).collect();
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx = sxx + x * x;
        sxy = sxy + x * y;
        syy = syy + y * y;
    }
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let kf = T::from_usize_lossy(keep);
    let sse = (syy - slope * sxy).max(T::zero());
    let rms = (sse / kf).sqrt();
    let rel = rms / (syy / kf).sqrt();
    Ok((slope, rms, order_statistic_error(&xs, &ys, slope, sxx, n), rel))
}

/// Delta-method standard error of the slope. Under the Pareto law `log μ`
/// is exponential with rate `I_d`, so the sorted abscissae are correlated
/// with `Cov(x_(i), x_(j)) = I_d⁻² Σ_{k ≤ min(i,j)} (N − k + 1)⁻²`; the
/// independent-error formula would understate the spread by far.
fn order_statistic_error<T: Real>(xs: &[T], ys: &[T], slope: T, sxx: T, n: usize) -> T {
    let mut suffix = T::zero();
    let mut var = T::zero();
    for k in (0..xs.len()).rev() {
        suffix = suffix + (ys[k] - T::lit(2.0) * slope * xs[k]) / sxx;
        let w = T::from_usize_lossy(n - k);
        var = var + suffix * suffix / (w * w);
    }
    (var / (slope * slope)).sqrt()
}

pub fn two_nn<T: Real>(cloud: &PointCloud<T>, cutoff: T) -> Result<IdEstimate<T>> {
    check_cutoff(cutoff)?;
    two_nn_from_ratios(&mu_ratios(cloud, &Euclidean)?, cutoff)
}

pub fn two_nn_from_ratios<T: Real>(ratios: &MuRatios<T>, cutoff: T) -> Result<IdEstimate<T>> {
    let mu: Vec<T> = ratios.samples.iter().map(|s| s.mu).collect();
    let (id, fit_residual, std_error, relative_residual) = fit_mu(&mu, cutoff)?;
    let n = ratios.samples.len();
    let scale_sum = ratios.samples.iter().fold(T::zero(), |acc, s| acc + s.r_nn + s.r_nnn);
    Ok(IdEstimate {
        id,
        typical_scale: scale_sum / (T::lit(2.0) * T::from_usize_lossy(n)),
        n_points: n,
        cutoff_fraction: cutoff,
        fit_residual,
        std_error,
        relative_residual,
        discarded: ratios.discarded,
    })
}

/// Real embeddings of every trajectory's state at time `t`.
pub fn fixed_time_dataset(ensemble: &[TrajectoryRecord], t: f64) -> Result<PointCloud<f64>> {
    let pts = ensemble
        .iter()
        .map(|r| r.snapshot_at(t).map(real_embedding).ok_or(Error::MissingSnapshot(t)))
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(&pts)
}

/// Snapshots of one trajectory spaced by `delta_t`, starting from `t = 0`.
pub fn single_trajectory_dataset(record: &TrajectoryRecord, delta_t: f64) -> Result<PointCloud<f64>> {
    let every = subsample_factor(record, delta_t)?;
    let pts: Vec<Vec<f64>> = record.snapshots.iter().step_by(every).map(|(_, psi)| real_embedding(psi)).collect();
    PointCloud::new(&pts)
}

fn subsample_factor(record: &TrajectoryRecord, delta_t: f64) -> Result<usize> {
    let base = record.config.snapshot_interval();
    let ratio = delta_t / base;
    let every = ratio.round();
    if every < 1.0 || (ratio - every).abs() > 1e-6 {
        return Err(invalid(format!("Δt = {delta_t} is not a multiple of the snapshot interval {base}")));
    }
    Ok(every as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdSeries<T> {
    pub times: Vec<T>,
    pub estimates: Vec<IdEstimate<T>>,
}

impl<T: Real> IdSeries<T> {
    pub fn new(times: Vec<T>, estimates: Vec<IdEstimate<T>>) -> Result<Self> {
        if times.len() != estimates.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: estimates.len() });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("series times must be strictly increasing"));
        }
        Ok(Self { times, estimates })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mean and sample standard deviation of `f` over estimates with
    /// `t ∈ [t_bar, t_end]`.
    pub fn window_stats(&self, t_bar: T, t_end: T, f: impl Fn(&IdEstimate<T>) -> T) -> Result<(T, T)> {
        if !(t_bar < t_end) {
            return Err(invalid(format!("empty averaging window [{t_bar}, {t_end}]")));
        }
        let vals: Vec<T> = self
            .times
            .iter()
            .zip(&self.estimates)
            .filter(|(t, _)| **t >= t_bar && **t <= t_end)
            .map(|(_, e)| f(e))
            .collect();
        mean_std(&vals).ok_or_else(|| invalid(format!("no estimates in window [{t_bar}, {t_end}]")))
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std<T: Real>(vals: &[T]) -> Option<(T, T)> {
    if vals.is_empty() {
        return None;
    }
    let n = T::from_usize_lossy(vals.len());
    let mean = vals.iter().fold(T::zero(), |a, &b| a + b) / n;
    if vals.len() == 1 {
        return Some((mean, T::zero()));
    }
    let ss = vals.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean));
    Some((mean, (ss / (n - T::one())).sqrt()))
}

pub fn id_time_series(ensemble: &[TrajectoryRecord], times: &[f64], cutoff: f64) -> Result<IdSeries<f64>> {
    let estimates = times
        .iter()
        .map(|&t| two_nn(&fixed_time_dataset(ensemble, t)?, cutoff))
        .collect::<Result<Vec<_>>>()?;
    IdSeries::new(times.to_vec(), estimates)
}

/// `(Īd, std)` over `[t_bar, t_end]`.
pub fn late_time_average<T: Real>(series: &IdSeries<T>, t_bar: T, t_end: T) -> Result<(T, T)> {
    series.window_stats(t_bar, t_end, |e| e.id)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalePoint {
    pub n: usize,
    pub id_mean: f64,
    pub id_std: f64,
    pub r_bar: f64,
}

/// Late-time `Īd` and `r̄` using the first `N` trajectories, for each `N`.
pub fn scale_profile(
    ensemble: &[TrajectoryRecord],
    t_bar: f64,
    t_end: f64,
    n_list: &[usize],
    cutoff: f64,
) -> Result<Vec<ScalePoint>> {
    let first = ensemble.first().ok_or(Error::TooFewPoints { usable: 0 })?;
    let times: Vec<f64> = first.times().filter(|&t| t >= t_bar && t <= t_end).collect();
    n_list
        .iter()
        .map(|&n| {
            if n > ensemble.len() {
                return Err(invalid(format!("N = {n} exceeds the ensemble size {}", ensemble.len())));
            }
            let series = id_time_series(&ensemble[..n], &times, cutoff)?;
            let (id_mean, id_std) = late_time_average(&series, t_bar, t_end)?;
            let (r_bar, _) = series.window_stats(t_bar, t_end, |e| e.typical_scale)?;
            Ok(ScalePoint { n, id_mean, id_std, r_bar })
        })
        .collect()
}
