//! Complex spacing and ratio statistics of non-Hermitian spectra, with the
//! two-dimensional Poisson and Ginibre reference laws.

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::scalar::Real;
use num_complex::{Complex, Complex64 as C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Relative size below which two eigenvalues count as coincident.
pub const DEGENERACY_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum<T> {
    pub eigenvalues: Vec<Complex<T>>,
    /// `max_j ‖A v_j − λ_j v_j‖` for unit eigenvectors, when computed.
    pub residual: Option<T>,
    /// Norm of the source matrix, or the spectral radius for bare values.
    pub scale: T,
}

impl<T: Real> ComplexSpectrum<T> {
    pub fn from_values(eigenvalues: Vec<Complex<T>>) -> Self {
        let scale = eigenvalues.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        Self { eigenvalues, residual: None, scale }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Keeps eigenvalues satisfying `keep`.
    pub fn filtered(&self, keep: impl Fn(&Complex<T>) -> bool) -> Self {
        Self { eigenvalues: self.eigenvalues.iter().copied().filter(|z| keep(z)).collect(), ..self.clone() }
    }
}

/// Eigenvalues of a dense complex matrix. With `with_residual` the
/// eigenvectors are computed too and the worst residual is reported.
pub fn eigen_spectrum(a: &ComplexMatrix, with_residual: bool) -> Result<ComplexSpectrum<f64>> {
    if a.nrows() != a.ncols() {
        return Err(invalid("eigen_spectrum needs a square matrix"));
    }
    let scale = linalg::one_norm(a);
    if !with_residual {
        let ev = a.eigenvalues().map_err(|_| Error::EigenNonConvergence)?;
        return Ok(ComplexSpectrum { eigenvalues: ev, residual: None, scale });
    }
    let evd = a.eigen().map_err(|_| Error::EigenNonConvergence)?;
    let u = evd.U();
    let s = evd.S();
    let n = a.nrows();
    let eigenvalues: Vec<C64> = (0..n).map(|j| s[j]).collect();
    let au = a * u;
    let mut residual = 0.0f64;
    for j in 0..n {
        let norm = (0..n).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let r = (0..n).map(|i| (au[(i, j)] - eigenvalues[j] * u[(i, j)]).norm_sqr()).sum::<f64>().sqrt();
        residual = residual.max(r / norm);
    }
    Ok(ComplexSpectrum { eigenvalues, residual: Some(residual), scale })
}

/// Indices of the two nearest other points, ties broken by index.
fn two_nearest_indices<T: Real>(pts: &[Complex<T>], j: usize) -> (usize, usize) {
    let mut best: [(T, usize); 2] = [(T::infinity(), usize::MAX); 2];
    for (i, z) in pts.iter().enumerate() {
        if i == j {
            continue;
        }
        let d = (z - pts[j]).norm();
        if d < best[0].0 {
            best[1] = best[0];
            best[0] = (d, i);
        } else if d < best[1].0 {
            best[1] = (d, i);
        }
    }
    (best[0].1, best[1].1)
}

fn nearest_distance<T: Real>(pts: &[Complex<T>], j: usize) -> T {
    pts.iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .fold(T::infinity(), |m, (_, z)| m.min((z - pts[j]).norm()))
}

/// Nearest-neighbour distances rescaled to unit mean.
pub fn nn_spacings<T: Real>(spectrum: &ComplexSpectrum<T>) -> Result<Vec<T>> {
    let pts = &spectrum.eigenvalues;
    if pts.len() < 2 {
        return Err(invalid("spacings need at least two eigenvalues"));
    }
    let raw: Vec<T> = (0..pts.len()).into_par_iter().map(|j| nearest_distance(pts, j)).collect();
    normalize_mean(raw)
}

/// Spacings of the points selected by `bulk`, with neighbours searched
/// among all points.
pub fn nn_spacings_of<T: Real>(spectrum: &ComplexSpectrum<T>, bulk: impl Fn(&Complex<T>) -> bool + Sync) -> Result<Vec<T>> {
    let pts = &spectrum.eigenvalues;
    if pts.len() < 2 {
        return Err(invalid("spacings need at least two eigenvalues"));
    }
    let raw: Vec<T> = (0..pts.len())
        .into_par_iter()
        .filter(|&j| bulk(&pts[j]))
        .map(|j| nearest_distance(pts, j))
        .collect();
    if raw.is_empty() {
        return Err(invalid("no eigenvalues in the selected region"));
    }
    normalize_mean(raw)
}

fn normalize_mean<T: Real>(mut v: Vec<T>) -> Result<Vec<T>> {
    let mean = v.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(v.len());
    if !(mean > T::zero()) {
        return Err(invalid("all spacings vanish"));
    }
    v.iter_mut().for_each(|s| *s = *s / mean);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioConvention {
    /// `(λ^{nn} − λ) / (λ^{nnn} − λ)`, inside the unit disk.
    #[default]
    UnitDisk,
    /// `(λ − λ^{nnn}) / (λ − λ^{nn})`, the reciprocal.
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSample<T> {
    pub ratios: Vec<Complex<T>>,
    pub skipped: usize,
}

impl<T: Real> RatioSample<T> {
    pub fn merge(samples: impl IntoIterator<Item = RatioSample<T>>) -> Self {
        let mut out = RatioSample { ratios: Vec::new(), skipped: 0 };
        for s in samples {
            out.ratios.extend(s.ratios);
            out.skipped += s.skipped;
        }
        out
    }
}

pub fn complex_ratios<T: Real>(spectrum: &ComplexSpectrum<T>, convention: RatioConvention) -> Result<RatioSample<T>> {
    complex_ratios_of(spectrum, convention, |_| true)
}

/// Ratios centred on the eigenvalues selected by `centre`, with neighbours
/// searched among all eigenvalues.
pub fn complex_ratios_of<T: Real>(
    spectrum: &ComplexSpectrum<T>,
    convention: RatioConvention,
    centre: impl Fn(&Complex<T>) -> bool + Sync,
) -> Result<RatioSample<T>> {
    let pts = &spectrum.eigenvalues;
    if pts.len() < 3 {
        return Err(invalid("complex ratios need at least three eigenvalues"));
    }
    let tol = T::lit(DEGENERACY_TOLERANCE) * spectrum.scale.max(T::min_positive_value());
    let per: Vec<Option<Complex<T>>> = (0..pts.len())
        .into_par_iter()
        .filter(|&j| centre(&pts[j]))
        .map(|j| {
            let (a, b) = two_nearest_indices(pts, j);
            let nn = pts[a] - pts[j];
            let nnn = pts[b] - pts[j];
            if nn.norm() < tol || nnn.norm() < tol {
                return None;
            }
            Some(match convention {
                RatioConvention::UnitDisk => nn / nnn,
                RatioConvention::Reciprocal => nnn / nn,
            })
        })
        .collect();
    let skipped = per.iter().filter(|z| z.is_none()).count();
    Ok(RatioSample { ratios: per.into_iter().flatten().collect(), skipped })
}

/// `⟨cos θ⟩ = mean of Re z / |z|`.
pub fn mean_cos_theta<T: Real>(sample: &RatioSample<T>) -> Result<T> {
    if sample.ratios.is_empty() {
        return Err(invalid("empty ratio sample"));
    }
    let sum = sample.ratios.iter().fold(T::zero(), |a, z| a + z.re / z.norm());
    Ok(sum / T::from_usize_lossy(sample.ratios.len()))
}

/// `⟨r⟩ = mean |z|`.
pub fn mean_modulus<T: Real>(sample: &RatioSample<T>) -> Result<T> {
    if sample.ratios.is_empty() {
        return Err(invalid("empty ratio sample"));
    }
    let sum = sample.ratios.iter().fold(T::zero(), |a, z| a + z.norm());
    Ok(sum / T::from_usize_lossy(sample.ratios.len()))
}

fn check_spacing<T: Real>(s: T) -> Result<()> {
    if !(s >= T::zero()) {
        return Err(invalid(format!("spacing must be non-negative, got {s}")));
    }
    Ok(())
}

/// `(π s / 2) e^{−π s² / 4}`.
pub fn poisson2d_pdf<T: Real>(s: T) -> Result<T> {
    check_spacing(s)?;
    let q = T::PI() / T::lit(4.0);
    Ok(T::lit(2.0) * q * s * (-q * s * s).exp())
}

pub fn poisson2d_cdf<T: Real>(s: T) -> Result<T> {
    check_spacing(s)?;
    Ok(T::one() - (-T::PI() / T::lit(4.0) * s * s).exp())
}

/// Beyond this spacing the Ginibre density is below 1e-150 and returned as 0.
const GINIBRE_SUPPORT: f64 = 6.0;

/// Ginibre spacing law for unit eigenvalue density,
/// `Π_k Γ(1+k,s²)/k! · Σ_j 2 s^{2j+1} e^{−s²} / Γ(1+j,s²)`,
/// with both series stopped at `max_terms` or once the next factor differs
/// from 1 by less than 1e-12, whichever is first. Its mean is
/// [`ginibre_mean_spacing`], not 1.
pub fn ginibre_pdf<T: Real>(s: T, max_terms: usize) -> Result<T> {
    check_spacing(s)?;
    if max_terms == 0 {
        return Err(invalid("the Ginibre series needs at least one term"));
    }
    if s == T::zero() || s > T::lit(GINIBRE_SUPPORT) {
        return Ok(T::zero());
    }
    let x = s * s;
    let tiny = T::lit(1e-12);
    // Γ(1+k,x)/k! = P(X ≤ k) for X ~ Poisson(x). The upper tails are summed
    // from far out downwards so that 1 − P(X ≤ k) never cancels.
    let xf = x.to_f64_lossy();
    let reach = ((xf + 40.0 * xf.sqrt() + 60.0) as usize).min(max_terms + 1);
    let mut pmf = Vec::with_capacity(reach + 1);
    pmf.push((-x).exp());
    for i in 1..=reach {
        let prev = pmf[i - 1];
        pmf.push(prev * x / T::from_usize_lossy(i));
    }
    let mut tails = vec![T::zero(); reach + 1];
    for i in (0..reach).rev() {
        tails[i] = tails[i + 1] + pmf[i + 1];
    }
    let mut cdf = pmf[0];
    let mut log_prod = T::zero();
    let mut sum = T::zero();
    for k in 1..=max_terms.min(reach) {
        cdf = cdf + pmf[k];
        let tail = tails[k];
        log_prod = log_prod + if tail < T::lit(0.5) { (-tail).ln_1p() } else { cdf.ln() };
        let term = T::lit(2.0) * s * pmf[k] / cdf;
        sum = sum + term;
        if T::from_usize_lossy(k) > x && tail < tiny && term < tiny * sum {
            break;
        }
    }
    Ok(log_prod.exp() * sum)
}

const GINIBRE_TERMS: usize = 200;

/// Mean of [`ginibre_pdf`], by quadrature.
pub fn ginibre_mean_spacing() -> f64 {
    simpson(|s| s * ginibre_pdf(s, GINIBRE_TERMS).unwrap_or(0.0), 0.0, GINIBRE_SUPPORT, 6000)
}

/// Ginibre spacing law rescaled to unit mean spacing.
pub fn ginibre_pdf_unit_mean(s: f64, mean: f64) -> Result<f64> {
    check_spacing(s)?;
    Ok(mean * ginibre_pdf(mean * s, GINIBRE_TERMS)?)
}

/// Composite Simpson rule with `n` (made even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

/// Tabulated CDF of a density on `[0, s_max]`, linearly interpolated.
pub fn tabulated_cdf(pdf: impl Fn(f64) -> f64, s_max: f64, n: usize) -> impl Fn(f64) -> f64 {
    let h = s_max / n as f64;
    let mut table = vec![0.0; n + 1];
    for i in 0..n {
        let a = i as f64 * h;
        // Simpson on each cell
        table[i + 1] = table[i] + h / 6.0 * (pdf(a) + 4.0 * pdf(a + 0.5 * h) + pdf(a + h));
    }
    move |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let u = s / h;
        let i = u.floor() as usize;
        if i >= n {
            return table[n];
        }
        table[i] + (u - i as f64) * (table[i + 1] - table[i])
    }
}

/// Normalized histogram on `[lo, hi)` as `(bin_center, density)`.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    if bins == 0 || !(hi > lo) {
        return Err(invalid("histogram needs bins ≥ 1 and hi > lo"));
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v >= lo && v < hi {
            counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
        }
    }
    let total = values.len().max(1) as f64;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + (i as f64 + 0.5) * w, c as f64 / (total * w)))
        .collect())
}

/// `n × n` matrix of independent standard complex Gaussian entries.
pub fn ginibre_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    faer::Mat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(scale * re, scale * im)
    })
}

/// Default radius, as a fraction of the support radius `√n`, inside which
/// ratios of a Ginibre reference sample are centred.
pub const GINIBRE_BULK_RADIUS: f64 = 0.9;

/// Pooled ratios from `m` Ginibre matrices; matrix `i` uses stream `i`.
/// Only eigenvalues with `|λ| < bulk_radius·√n` serve as centres, so the
/// sample reflects the flat-density bulk rather than the disk edge.
pub fn sample_ginibre_reference(
    n: usize,
    m: usize,
    seed: u64,
    convention: RatioConvention,
    bulk_radius: f64,
) -> Result<RatioSample<f64>> {
    if n < 10 {
        return Err(invalid(format!("Ginibre reference needs n ≥ 10, got {n}")));
    }
    if !(bulk_radius > 0.0) {
        return Err(invalid(format!("bulk radius must be positive, got {bulk_radius}")));
    }
    let cut = bulk_radius * (n as f64).sqrt();
    let samples = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let spec = eigen_spectrum(&ginibre_matrix(n, &mut rng), false)?;
            complex_ratios_of(&spec, convention, |z| z.norm() < cut)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioSample::merge(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{chain_model, vectorize, BondNormalization, ChainParams, ChainVariant};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn uniform_square(n: usize, seed: u64) -> ComplexSpectrum<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexSpectrum::from_values((0..n).map(|_| c(rng.random(), rng.random())).collect())
    }

    #[test]
    fn eigen_examples() {
        let d = linalg::diagonal(&[c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 0.0)]);
        let s = eigen_spectrum(&d, true).unwrap();
        let mut ev = s.eigenvalues.clone();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(ev, vec![c(-3.0, 0.5), c(0.0, 0.0), c(1.0, 2.0)]);
        assert!(s.residual.unwrap() < 1e-14);

        let nil = linalg::from_rows(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]]);
        let s = eigen_spectrum(&nil, true).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.norm() < 1e-12));

        let m = chain_model(&ChainParams {
            variant: ChainVariant::A,
            sites: 2,
            j1: 1.0,
            j2: 0.0,
            delta: 0.5,
            gamma0: 1.0,
            gamma1: 0.0,
            gamma2: 0.0,
            gamma3: 0.0,
            bond_normalization: BondNormalization::InText,
        })
        .unwrap();
        let l = vectorize(&m);
        let s = eigen_spectrum(l.entries(), true).unwrap();
        assert!(s.residual.unwrap() <= 1e-6 * s.scale);
        assert!(s.eigenvalues.iter().any(|z| z.norm() < 1e-8));
        assert!(s.eigenvalues.iter().all(|z| z.re < 1e-8));
    }

    #[test]
    fn spacing_examples() {
        let line = ComplexSpectrum::from_values(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(nn_spacings(&line).unwrap(), vec![1.0; 4]);
        let two = ComplexSpectrum::from_values(vec![c(0.0, 0.0), c(0.3, 0.4)]);
        let s = nn_spacings(&two).unwrap();
        assert_eq!(s[0], s[1]);
        assert!(nn_spacings(&ComplexSpectrum::from_values(vec![c(0.0, 0.0)])).is_err());

        let sq = uniform_square(10_000, 1);
        let s = nn_spacings(&sq).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 1.0).abs() < 1e-12);
        // Edge points have larger spacings; compare the bulk.
        let bulk = nn_spacings_of(&sq, |z| (0.1..0.9).contains(&z.re) && (0.1..0.9).contains(&z.im)).unwrap();
        let ks = ks_statistic(&bulk, |x| poisson2d_cdf(x).unwrap());
        assert!(ks < 0.02, "KS = {ks}");
    }

    #[test]
    fn ratio_examples() {
        let line = ComplexSpectrum::from_values(vec![c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)]);
        let r = complex_ratios(&line, RatioConvention::UnitDisk).unwrap();
        assert!((r.ratios[0] - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let rec = complex_ratios(&line, RatioConvention::Reciprocal).unwrap();
        assert!((rec.ratios[0] - c(3.0, 0.0)).norm() < 1e-15);

        let h = 3f64.sqrt() / 2.0;
        let tri = ComplexSpectrum::from_values(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.5, h)]);
        for z in complex_ratios(&tri, RatioConvention::UnitDisk).unwrap().ratios {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }

        let sq = uniform_square(10_000, 2);
        let r = complex_ratios(&sq, RatioConvention::UnitDisk).unwrap();
        assert!(r.ratios.iter().all(|z| z.norm() <= 1.0));
        assert!(mean_cos_theta(&r).unwrap().abs() <= 0.02);

        let dup = ComplexSpectrum::from_values(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(2.5, 1.0)]);
        let r = complex_ratios(&dup, RatioConvention::UnitDisk).unwrap();
        assert_eq!(r.skipped, 2);
    }

    #[test]
    fn cos_theta_examples() {
        let s = RatioSample { ratios: vec![c(0.5, 0.0), c(0.1, 0.0)], skipped: 0 };
        assert_eq!(mean_cos_theta(&s).unwrap(), 1.0);
        assert!(mean_cos_theta(&RatioSample::<f64> { ratios: vec![], skipped: 0 }).is_err());
    }

    #[test]
    fn poisson_law() {
        assert_eq!(poisson2d_pdf(0.0).unwrap(), 0.0);
        assert!(poisson2d_pdf(-1.0).is_err());
        let norm = simpson(|s| poisson2d_pdf(s).unwrap(), 0.0, 12.0, 20_000);
        assert!((norm - 1.0).abs() < 1e-10);
        let mean = simpson(|s| s * poisson2d_pdf(s).unwrap(), 0.0, 12.0, 20_000);
        assert!((mean - 1.0).abs() < 1e-10);
        let mode = (2.0 / std::f64::consts::PI).sqrt();
        let h = 1e-5;
        let deriv = (poisson2d_pdf(mode + h).unwrap() - poisson2d_pdf(mode - h).unwrap()) / (2.0 * h);
        assert!(deriv.abs() < 1e-8);
        assert!(poisson2d_pdf(mode).unwrap() > poisson2d_pdf(mode + 0.01).unwrap());
    }

    #[test]
    fn ginibre_law() {
        let (a, b) = (1e-3f64, 1e-2f64);
        let slope = (ginibre_pdf(b, 200).unwrap() / ginibre_pdf(a, 200).unwrap()).ln() / (b / a).ln();
        assert!((slope - 3.0).abs() < 0.05, "slope {slope}");
        let ratio = ginibre_pdf(1e-4f64, 200).unwrap() / 1e-12;
        assert!((ratio - 2.0).abs() < 1e-6);
        let norm = simpson(|s| ginibre_pdf(s, 100).unwrap(), 0.0, 6.0, 6000);
        assert!((norm - 1.0).abs() < 1e-6, "norm {norm}");
        assert!(ginibre_pdf(-0.1, 10).is_err());
        assert!(ginibre_pdf(0.5, 0).is_err());
        // truncation: one factor vs the converged value differ
        assert!(ginibre_pdf(1.0, 1).unwrap() != ginibre_pdf(1.0, 200).unwrap());

        let mean = ginibre_mean_spacing();
        assert!((mean - 1.1429).abs() < 1e-3, "mean {mean}");
        let unit = simpson(|s| s * ginibre_pdf_unit_mean(s, mean).unwrap(), 0.0, 6.0, 6000);
        assert!((unit - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_precision_ginibre_law() {
        for s in [0.1f64, 0.5, 1.0, 2.0] {
            let a = ginibre_pdf(s, 200).unwrap();
            let b = ginibre_pdf(s as f32, 200).unwrap() as f64;
            assert!((a - b).abs() < 1e-5 * a.max(1e-3));
        }
    }

    #[test]
    fn ginibre_spacings_match_the_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1000;
        let spec = eigen_spectrum(&ginibre_matrix(n, &mut rng), false).unwrap();
        // The support is the disk of radius √n; keep the flat-density bulk.
        let r = (n as f64).sqrt();
        let bulk = nn_spacings_of(&spec, |z| z.norm() < 0.7 * r).unwrap();
        let mean = ginibre_mean_spacing();
        let cdf = tabulated_cdf(|s| ginibre_pdf_unit_mean(s, mean).unwrap(), 6.0, 3000);
        let ks = ks_statistic(&bulk, &cdf);
        assert!(ks < 0.05, "KS = {ks}");
        let poisson = ks_statistic(&bulk, |s| poisson2d_cdf(s).unwrap());
        assert!(poisson > ks);
    }

    #[test]
    fn ginibre_reference_sample() {
        let r = sample_ginibre_reference(500, 20, 7, RatioConvention::UnitDisk, GINIBRE_BULK_RADIUS).unwrap();
        let cos = mean_cos_theta(&r).unwrap();
        assert!((cos + 0.24).abs() < 0.02, "⟨cos θ⟩ = {cos}");
        let small = r.ratios.iter().filter(|z| z.norm() < 0.1).count() as f64 / r.ratios.len() as f64;
        // 2D Poisson would put about 1% there.
        assert!(small < 0.002, "fraction {small}");
        let a = sample_ginibre_reference(50, 4, 7, RatioConvention::UnitDisk, 1.5).unwrap();
        assert_eq!(a.ratios.len(), 200);
        assert_eq!(a, sample_ginibre_reference(50, 4, 7, RatioConvention::UnitDisk, 1.5).unwrap());
        assert!(sample_ginibre_reference(5, 1, 0, RatioConvention::UnitDisk, 1.0).is_err());
    }

    #[test]
    fn histogram_integrates_to_one() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let h = histogram(&v, 10, 0.0, 1.0).unwrap();
        let total: f64 = h.iter().map(|(_, d)| d * 0.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(histogram(&v, 0, 0.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ratios_are_similarity_invariant(seed in any::<u64>(), phi in 0.0f64..std::f64::consts::TAU, scale in 0.01f64..100.0, shift_re in -5.0f64..5.0, shift_im in -5.0f64..5.0) {
            let base = uniform_square(30, seed);
            let rot = C64::from_polar(scale, phi);
            let moved = ComplexSpectrum::from_values(base.eigenvalues.iter().map(|z| rot * z + c(shift_re, shift_im)).collect());
            let a = complex_ratios(&base, RatioConvention::UnitDisk).unwrap();
            let b = complex_ratios(&moved, RatioConvention::UnitDisk).unwrap();
            prop_assert_eq!(a.ratios.len(), b.ratios.len());
            for (x, y) in a.ratios.iter().zip(&b.ratios) {
                prop_assert!((x - y).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn real_scaling_leaves_ratios_unchanged() {
        let base = uniform_square(500, 11);
        let scaled = ComplexSpectrum::from_values(base.eigenvalues.iter().map(|z| z * 8.0).collect());
        assert_eq!(
            complex_ratios(&base, RatioConvention::UnitDisk).unwrap(),
            complex_ratios(&scaled, RatioConvention::UnitDisk).unwrap()
        );
    }
}
