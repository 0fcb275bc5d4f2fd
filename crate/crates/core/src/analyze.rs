//! Statistical verification: empirical characteristic functions, distances
//! to theoretical laws, tail-exponent estimation, and scaling-law fits.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::measure::MeasureMoments;
use crate::renorm::SpaceConfig;
use crate::special::sphere_moment;

/// A grid of frequencies with the empirical and theoretical characteristic
/// functions evaluated on it.
#[derive(Clone, Debug)]
pub struct CfGrid {
    /// Frequency points; scalar grids use length-1 vectors.
    pub z_points: Vec<Vec<f64>>,
    pub empirical: Vec<Complex64>,
    pub theoretical: Vec<Complex64>,
    pub n_samples: usize,
    pub max_abs_dev: f64,
    /// Monte Carlo comparison bound `4 / sqrt(n_samples)`.
    pub mc_bound: f64,
}

impl CfGrid {
    pub fn new(
        z_points: Vec<Vec<f64>>,
        empirical: Vec<Complex64>,
        theoretical: Vec<Complex64>,
        n_samples: usize,
    ) -> Result<Self> {
        if z_points.len() != empirical.len() || z_points.len() != theoretical.len() {
            return Err(Error::MismatchedGrids(format!(
                "z/empirical/theoretical lengths {} / {} / {}",
                z_points.len(),
                empirical.len(),
                theoretical.len()
            )));
        }
        let max_abs_dev = empirical
            .iter()
            .zip(&theoretical)
            .map(|(e, t)| (e - t).norm())
            .fold(0.0, f64::max);
        Ok(Self {
            z_points,
            empirical,
            theoretical,
            n_samples,
            max_abs_dev,
            mc_bound: 4.0 / (n_samples as f64).sqrt(),
        })
    }
}

/// Sup-norm distance over the grid between the empirical and theoretical
/// values; compare against `grid.mc_bound`.
pub fn cf_distance(grid: &CfGrid) -> f64 {
    grid.max_abs_dev
}

/// Empirical characteristic function of vector samples (flat row-major) on a
/// set of frequency vectors: `(1/n) sum_i exp(i v_i . z)`.
pub fn empirical_cf_vector(samples: &[f64], dim: usize, z_points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    if dim == 0 || samples.len() % dim != 0 {
        return Err(Error::MismatchedGrids(format!(
            "sample length {} is not a multiple of dim {dim}",
            samples.len()
        )));
    }
    let n = samples.len() / dim;
    if n < 2 {
        return Err(Error::TooFewSamples { got: n, need: 2 });
    }
    Ok(z_points
        .par_iter()
        .map(|z| {
            assert_eq!(z.len(), dim, "frequency dimension mismatch");
            let mut re = KahanSum::new();
            let mut im = KahanSum::new();
            for v in samples.chunks_exact(dim) {
                let phase: f64 = v.iter().zip(z).map(|(a, b)| a * b).sum();
                let (s, c) = phase.sin_cos();
                re.add(c);
                im.add(s);
            }
            Complex64::new(re.value() / n as f64, im.value() / n as f64)
        })
        .collect())
}

/// Empirical characteristic function of scalar samples.
pub fn empirical_cf_scalar(samples: &[f64], z_points: &[f64]) -> Result<Vec<Complex64>> {
    let zs: Vec<Vec<f64>> = z_points.iter().map(|&z| vec![z]).collect();
    empirical_cf_vector(samples, 1, &zs)
}

/// Default frequency magnitudes: 20 logarithmically spaced points spanning
/// `[0.1/s, 10/s]` around the theoretical scale parameter `s`.
pub fn default_z_magnitudes(scale: f64) -> Vec<f64> {
    let s = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let lo = 0.1 / s;
    let hi = 10.0 / s;
    let n = 20usize;
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Three fixed unit directions for vector grids (fewer in low dimension).
pub fn force_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    let mut e1 = vec![0.0; dim];
    e1[0] = 1.0;
    dirs.push(e1);
    if dim >= 2 {
        let mut diag = vec![1.0 / (dim as f64).sqrt(); dim];
        diag.truncate(dim);
        dirs.push(diag);
        let mut elast = vec![0.0; dim];
        elast[dim - 1] = 1.0;
        dirs.push(elast);
    }
    dirs
}

/// Hill estimate of a power-law tail index.
#[derive(Clone, Copy, Debug)]
pub struct HillEstimate {
    pub alpha_hat: f64,
    pub std_error: f64,
    pub k_used: usize,
}

/// Hill estimator on the top `k_fraction` order statistics of positive
/// magnitudes, with the asymptotic standard error `alpha_hat / sqrt(k)`.
pub fn hill_tail_exponent(magnitudes: &[f64], k_fraction: f64) -> Result<HillEstimate> {
    if !(k_fraction > 0.0 && k_fraction <= 0.2) {
        return Err(Error::OutOfRange {
            name: "k_fraction",
            value: k_fraction,
            constraint: "0 < k_fraction <= 0.2",
        });
    }
    if magnitudes.len() < 1000 {
        return Err(Error::TooFewSamples {
            got: magnitudes.len(),
            need: 1000,
        });
    }
    let mut sorted: Vec<f64> = magnitudes.iter().copied().filter(|x| *x > 0.0).collect();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let k = ((k_fraction * sorted.len() as f64) as usize).max(2);
    if k + 1 > sorted.len() {
        return Err(Error::TooFewSamples {
            got: sorted.len(),
            need: k + 1,
        });
    }
    let x_k = sorted[k];
    let mean_log: f64 = sorted[..k].iter().map(|x| (x / x_k).ln()).sum::<f64>() / k as f64;
    let alpha_hat = 1.0 / mean_log;
    Ok(HillEstimate {
        alpha_hat,
        std_error: alpha_hat / (k as f64).sqrt(),
        k_used: k,
    })
}

/// Hill estimates across a sensitivity set of tail fractions, plus a crude
/// power-tail detection: a genuine power tail keeps the estimate stable in
/// `k`, while lighter tails drift strongly (for an exponential tail the Hill
/// statistic scales like the threshold itself).
#[derive(Clone, Debug)]
pub struct HillReport {
    pub estimates: Vec<(f64, HillEstimate)>,
    pub power_tail_detected: bool,
}

pub const HILL_SENSITIVITY_FRACTIONS: [f64; 3] = [0.02, 0.05, 0.1];

pub fn hill_report(magnitudes: &[f64]) -> Result<HillReport> {
    let estimates: Vec<(f64, HillEstimate)> = HILL_SENSITIVITY_FRACTIONS
        .iter()
        .map(|&f| hill_tail_exponent(magnitudes, f).map(|e| (f, e)))
        .collect::<Result<_>>()?;
    let alphas: Vec<f64> = estimates.iter().map(|(_, e)| e.alpha_hat).collect();
    let min = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = alphas.iter().cloned().fold(0.0, f64::max);
    let mid = alphas[1];
    let drift = (max - min) / mid.abs().max(1e-300);
    let k_min = estimates.iter().map(|(_, e)| e.k_used).min().unwrap() as f64;
    let threshold = (6.0 / k_min.sqrt()).max(0.25);
    Ok(HillReport {
        estimates,
        power_tail_detected: drift <= threshold,
    })
}

/// Least-squares line fit result.
#[derive(Clone, Copy, Debug)]
pub struct FitResult {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
}

/// Least-squares slope of `ln(width)` against `ln(N)`. Requires at least
/// four grid points spanning two decades of `N`.
pub fn scaling_fit(n_grid: &[u64], widths: &[f64]) -> Result<FitResult> {
    let xs: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < 2.0 * 10f64.ln() - 1e-9 {
        return Err(Error::OutOfRange {
            name: "grid span",
            value: span,
            constraint: "must cover at least two decades of N",
        });
    }
    log_line_fit(&xs, widths)
}

/// Least-squares slope of `ln(width)` against `ln(model)` for a non-power
/// model sequence (for example `sigma_N = K (ln N / N)^{1/2}`); a matching
/// model gives slope 1.
pub fn scaling_fit_against(model_widths: &[f64], widths: &[f64]) -> Result<FitResult> {
    if model_widths.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::OutOfRange {
            name: "model_widths",
            value: f64::NAN,
            constraint: "all model widths must be positive",
        });
    }
    let xs: Vec<f64> = model_widths.iter().map(|&w| w.ln()).collect();
    log_line_fit(&xs, widths)
}

fn log_line_fit(xs: &[f64], widths: &[f64]) -> Result<FitResult> {
    if xs.len() != widths.len() {
        return Err(Error::MismatchedGrids(format!(
            "{} grid points vs {} widths",
            xs.len(),
            widths.len()
        )));
    }
    if xs.len() < 4 {
        return Err(Error::TooFewSamples {
            got: xs.len(),
            need: 4,
        });
    }
    if widths.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::OutOfRange {
            name: "widths",
            value: f64::NAN,
            constraint: "all widths must be positive",
        });
    }
    let n = xs.len() as f64;
    let ys: Vec<f64> = widths.iter().map(|&w| w.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let dof = (xs.len() - 2).max(1) as f64;
    Ok(FitResult {
        slope,
        std_error: (ss_res / dof / sxx).sqrt(),
        intercept,
    })
}

/// Stable-law tail coefficients of the force variable: the Levy exponent
/// `alpha = d/delta`, `A_alpha = (rho(0)/delta) int |z_hat.v_hat|^alpha`,
/// and `B_alpha = 0` (the tail is isotropic when the density is continuous
/// at the test position).
#[derive(Clone, Copy, Debug)]
pub struct TailParams {
    pub alpha: f64,
    pub a_alpha: f64,
    pub b_alpha: f64,
    /// The constant angular profile `C = rho(0)/delta`.
    pub c_profile: f64,
}

pub fn tail_to_stable_params(cfg: &SpaceConfig, moments: &MeasureMoments) -> Result<TailParams> {
    let alpha = cfg.alpha;
    if alpha > 2.0 {
        return Err(Error::GaussianRegime(alpha));
    }
    let c_profile = moments.rho_at_origin / cfg.delta;
    Ok(TailParams {
        alpha,
        a_alpha: c_profile * sphere_moment(alpha, cfg.d)?,
        b_alpha: 0.0,
        c_profile,
    })
}

/// Interquartile range (width statistic robust to infinite variance).
pub fn interquartile_range(xs: &[f64]) -> f64 {
    quantile(xs, 0.75) - quantile(xs, 0.25)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty() && (0.0..=1.0).contains(&q));
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}
