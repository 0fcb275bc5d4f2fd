//! Base probability measures for the unit-scale relative position vector `R`.
//!
//! The test particle always sits at the origin of `R`-space; the relative
//! vector convention `R = y - Y` means a source cloud whose center is
//! displaced by `c` from the test particle produces `R` draws from the same
//! shape centered at `-c`. All three families keep the density continuous
//! and strictly positive at the origin.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::renorm::{EnergyExponent, SpaceConfig};
use crate::special::{gamma, solid_angle};

/// Shape of the source measure.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    /// Uniform on the ball of the given radius, centered on the test particle.
    UniformBall { radius: f64 },
    /// Isotropic centered Gaussian with the given per-component scale.
    IsotropicGaussian { scale: f64 },
    /// Uniform ball whose center is displaced by `center_offset` from the
    /// test particle (in source coordinates); `R` draws are uniform on the
    /// ball centered at `-center_offset`.
    ShiftedUniformBall { radius: f64, center_offset: Vec<f64> },
}

/// A source measure in a fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceMeasure {
    kind: MeasureKind,
    dim: u32,
}

impl SourceMeasure {
    pub fn uniform_ball(d: u32, radius: f64) -> Result<Self> {
        check_dim(d)?;
        check_positive("radius", radius)?;
        Ok(Self {
            kind: MeasureKind::UniformBall { radius },
            dim: d,
        })
    }

    pub fn isotropic_gaussian(d: u32, scale: f64) -> Result<Self> {
        check_dim(d)?;
        check_positive("scale", scale)?;
        Ok(Self {
            kind: MeasureKind::IsotropicGaussian { scale },
            dim: d,
        })
    }

    /// The offset must keep the test particle strictly inside the support,
    /// otherwise the density at the origin is not positive.
    pub fn shifted_uniform_ball(d: u32, radius: f64, center_offset: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        check_positive("radius", radius)?;
        if center_offset.len() != d as usize {
            return Err(Error::OutOfRange {
                name: "center_offset",
                value: center_offset.len() as f64,
                constraint: "length must equal the dimension d",
            });
        }
        let norm = norm2(&center_offset).sqrt();
        if !(norm < radius) {
            return Err(Error::OutOfRange {
                name: "center_offset",
                value: norm,
                constraint: "|center_offset| < radius (the origin must lie strictly inside the support)",
            });
        }
        Ok(Self {
            kind: MeasureKind::ShiftedUniformBall {
                radius,
                center_offset,
            },
            dim: d,
        })
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Characteristic length of the support (ball radius or Gaussian scale).
    pub fn support_scale(&self) -> f64 {
        match &self.kind {
            MeasureKind::UniformBall { radius } | MeasureKind::ShiftedUniformBall { radius, .. } => {
                *radius
            }
            MeasureKind::IsotropicGaussian { scale } => *scale,
        }
    }

    /// Density at the origin of `R`-space (closed form).
    pub fn density_at_origin(&self) -> f64 {
        match &self.kind {
            MeasureKind::UniformBall { radius } | MeasureKind::ShiftedUniformBall { radius, .. } => {
                ball_inverse_volume(self.dim, *radius)
            }
            MeasureKind::IsotropicGaussian { scale } => {
                let d = f64::from(self.dim);
                (2.0 * std::f64::consts::PI * scale * scale).powf(-d / 2.0)
            }
        }
    }

    /// Density at an arbitrary point.
    pub fn density_at(&self, r: &[f64]) -> f64 {
        assert_eq!(r.len(), self.dim as usize);
        match &self.kind {
            MeasureKind::UniformBall { radius } => {
                if norm2(r) <= radius * radius {
                    ball_inverse_volume(self.dim, *radius)
                } else {
                    0.0
                }
            }
            MeasureKind::ShiftedUniformBall {
                radius,
                center_offset,
            } => {
                let d2: f64 = r
                    .iter()
                    .zip(center_offset)
                    .map(|(ri, ci)| (ri + ci) * (ri + ci))
                    .sum();
                if d2 <= radius * radius {
                    ball_inverse_volume(self.dim, *radius)
                } else {
                    0.0
                }
            }
            MeasureKind::IsotropicGaussian { scale } => {
                let d = f64::from(self.dim);
                let norm = (2.0 * std::f64::consts::PI * scale * scale).powf(-d / 2.0);
                norm * (-0.5 * norm2(r) / (scale * scale)).exp()
            }
        }
    }

    /// Draw one `R` into `out` (length `d`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim as usize);
        match &self.kind {
            MeasureKind::UniformBall { radius } => {
                sample_ball(rng, *radius, out);
            }
            MeasureKind::ShiftedUniformBall {
                radius,
                center_offset,
            } => {
                sample_ball(rng, *radius, out);
                for (o, c) in out.iter_mut().zip(center_offset) {
                    *o -= c;
                }
            }
            MeasureKind::IsotropicGaussian { scale } => {
                for o in out.iter_mut() {
                    *o = scale * standard_normal(rng);
                }
            }
        }
    }

    /// Draw `count` iid vectors, returned flat (`count * d`, row-major).
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        let d = self.dim as usize;
        let mut out = vec![0.0; count * d];
        for chunk in out.chunks_exact_mut(d) {
            self.sample_into(rng, chunk);
        }
        out
    }

    /// Monte Carlo moment functionals of the measure under `cfg`.
    ///
    /// Only the moments that are finite in this regime are estimated:
    /// the mean of `V = R_hat / |R|^delta` needs `alpha > 1`, its covariance
    /// `alpha > 2`, the mean of the energy variable `U` needs `alpha' > 1`
    /// and its variance `alpha' > 2`. Standard errors come from 100 batch
    /// means.
    pub fn moments<R: Rng + ?Sized>(
        &self,
        cfg: &SpaceConfig,
        mc_budget: usize,
        rng: &mut R,
    ) -> Result<MeasureMoments> {
        if cfg.d != self.dim {
            return Err(Error::MismatchedGrids(format!(
                "measure dimension {} != configuration dimension {}",
                self.dim, cfg.d
            )));
        }
        if mc_budget < 1000 {
            return Err(Error::TooFewSamples {
                got: mc_budget,
                need: 1000,
            });
        }
        let d = self.dim as usize;
        let want_mean_v = cfg.alpha > 1.0;
        let want_cov_v = cfg.alpha > 2.0;
        let (want_mean_u, want_var_u) = match cfg.alpha_p {
            EnergyExponent::Levy(a) => (a > 1.0, a > 2.0),
            EnergyExponent::GaussianBranch => (true, true),
        };

        let batches = 100usize;
        let per_batch = mc_budget / batches;
        let mut batch_mean_v = vec![vec![0.0; d]; batches];
        let mut batch_cov_v = vec![vec![0.0; d * d]; batches];
        let mut batch_mean_u = vec![0.0; batches];
        let mut batch_m2_u = vec![0.0; batches];

        let mut r = vec![0.0; d];
        let mut v = vec![0.0; d];
        for b in 0..batches {
            let mut sum_v: Vec<KahanSum> = vec![KahanSum::new(); d];
            let mut sum_vv: Vec<KahanSum> = vec![KahanSum::new(); d * d];
            let mut sum_u = KahanSum::new();
            let mut sum_u2 = KahanSum::new();
            for _ in 0..per_batch {
                self.sample_into(rng, &mut r);
                let rn = norm2(&r).sqrt().max(f64::MIN_POSITIVE);
                let w = rn.powf(-(cfg.delta + 1.0));
                for j in 0..d {
                    v[j] = r[j] * w;
                }
                if want_mean_v {
                    for j in 0..d {
                        sum_v[j].add(v[j]);
                    }
                }
                if want_cov_v {
                    for i in 0..d {
                        for j in 0..d {
                            sum_vv[i * d + j].add(v[i] * v[j]);
                        }
                    }
                }
                if want_mean_u || want_var_u {
                    let u = energy_variable(rn, cfg.delta);
                    sum_u.add(u);
                    sum_u2.add(u * u);
                }
            }
            let nb = per_batch as f64;
            for j in 0..d {
                batch_mean_v[b][j] = sum_v[j].value() / nb;
            }
            for j in 0..d * d {
                batch_cov_v[b][j] = sum_vv[j].value() / nb;
            }
            batch_mean_u[b] = sum_u.value() / nb;
            batch_m2_u[b] = sum_u2.value() / nb;
        }

        let mean_force_unit = want_mean_v.then(|| {
            let (value, std_error) = combine_vector_batches(&batch_mean_v);
            VectorEstimate { value, std_error }
        });
        let covariance_v = if want_cov_v {
            let mean_v = mean_force_unit.as_ref().expect("alpha > 2 implies alpha > 1");
            let (raw, raw_se) = combine_vector_batches(&batch_cov_v);
            // Center: Cov_ij = <V_i V_j> - <V_i><V_j>.
            let mut value = raw;
            for i in 0..d {
                for j in 0..d {
                    value[i * d + j] -= mean_v.value[i] * mean_v.value[j];
                }
            }
            Some(MatrixEstimate {
                dim: d,
                value,
                std_error: raw_se,
            })
        } else {
            None
        };
        let mean_u = want_mean_u.then(|| {
            let (value, std_error) = combine_scalar_batches(&batch_mean_u);
            ScalarEstimate { value, std_error }
        });
        let var_u = if want_var_u {
            let m = mean_u.as_ref().expect("alpha' > 2 implies alpha' > 1").value;
            let centered: Vec<f64> = batch_m2_u.iter().map(|m2| m2 - m * m).collect();
            let (value, std_error) = combine_scalar_batches(&centered);
            Some(ScalarEstimate { value, std_error })
        } else {
            None
        };

        Ok(MeasureMoments {
            alpha: cfg.alpha,
            alpha_p: cfg.alpha_p,
            rho_at_origin: self.density_at_origin(),
            mean_force_unit,
            covariance_v,
            mean_u,
            var_u,
            samples_used: per_batch * batches,
        })
    }
}

/// Energy variable of one draw: `|R|^{1-delta}` for `delta != 1`,
/// `-ln |R|` for `delta = 1` (the gauge vanishing at `|R| = 1`).
pub fn energy_variable(r_norm: f64, delta: f64) -> f64 {
    if (delta - 1.0).abs() <= 1e-12 {
        -r_norm.ln()
    } else {
        r_norm.powf(1.0 - delta)
    }
}

/// Scalar Monte Carlo estimate with a batch-means standard error.
#[derive(Clone, Copy, Debug)]
pub struct ScalarEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Vector estimate with per-component standard errors.
#[derive(Clone, Debug)]
pub struct VectorEstimate {
    pub value: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// Symmetric matrix estimate (row-major) with per-entry standard errors.
#[derive(Clone, Debug)]
pub struct MatrixEstimate {
    pub dim: usize,
    pub value: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl MatrixEstimate {
    pub fn quadratic_form(&self, z: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += z[i] * self.value[i * self.dim + j] * z[j];
            }
        }
        acc
    }
}

/// Moment functionals of a measure, with undefined entries left empty.
#[derive(Clone, Debug)]
pub struct MeasureMoments {
    alpha: f64,
    alpha_p: EnergyExponent,
    pub rho_at_origin: f64,
    pub mean_force_unit: Option<VectorEstimate>,
    pub covariance_v: Option<MatrixEstimate>,
    pub mean_u: Option<ScalarEstimate>,
    pub var_u: Option<ScalarEstimate>,
    pub samples_used: usize,
}

impl MeasureMoments {
    pub fn require_mean_force(&self) -> Result<&VectorEstimate> {
        self.mean_force_unit.as_ref().ok_or(Error::UndefinedMoment {
            moment: "mean_force_unit",
            condition: "alpha = d/delta > 1",
            actual: format!("alpha = {}", self.alpha),
        })
    }

    pub fn require_covariance(&self) -> Result<&MatrixEstimate> {
        self.covariance_v.as_ref().ok_or(Error::UndefinedMoment {
            moment: "covariance_V",
            condition: "alpha = d/delta > 2",
            actual: format!("alpha = {}", self.alpha),
        })
    }

    pub fn require_mean_u(&self) -> Result<&ScalarEstimate> {
        self.mean_u.as_ref().ok_or(Error::UndefinedMoment {
            moment: "mean_U",
            condition: "alpha' = d/(delta-1) > 1",
            actual: describe_alpha_p(self.alpha_p),
        })
    }

    pub fn require_var_u(&self) -> Result<&ScalarEstimate> {
        self.var_u.as_ref().ok_or(Error::UndefinedMoment {
            moment: "var_U",
            condition: "alpha' > 2 (for delta <= 1 this is the finite-second-moment hypothesis)",
            actual: describe_alpha_p(self.alpha_p),
        })
    }
}

fn describe_alpha_p(a: EnergyExponent) -> String {
    match a {
        EnergyExponent::Levy(v) => format!("alpha' = {v}"),
        EnergyExponent::GaussianBranch => "alpha' > 2 (Gaussian branch)".to_string(),
    }
}

fn check_dim(d: u32) -> Result<()> {
    if d < 1 {
        Err(Error::InvalidDimension(d as i64))
    } else {
        Ok(())
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            constraint: "must be positive and finite",
        })
    }
}

fn ball_inverse_volume(d: u32, radius: f64) -> f64 {
    let df = f64::from(d);
    // V_d = Omega_d r^d / d.
    let omega = solid_angle(d).expect("d >= 1 by construction");
    df / (omega * radius.powf(df))
}

/// Gamma(d/2 + 1) / (pi^{d/2} r^d), equal to `ball_inverse_volume`; kept for
/// the record as the direct normalization form.
#[allow(dead_code)]
fn ball_inverse_volume_direct(d: u32, radius: f64) -> f64 {
    let df = f64::from(d);
    gamma(df / 2.0 + 1.0) / (std::f64::consts::PI.powf(df / 2.0) * radius.powf(df))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller, single value; clamp away from 0 for the log.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn sample_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    // Gaussian direction, radius from u^{1/d}.
    loop {
        let mut n2 = 0.0;
        for o in out.iter_mut() {
            *o = standard_normal(rng);
            n2 += *o * *o;
        }
        if n2 > 0.0 {
            let u: f64 = rng.gen();
            let r = radius * u.powf(1.0 / out.len() as f64) / n2.sqrt();
            for o in out.iter_mut() {
                *o *= r;
            }
            return;
        }
    }
}

fn combine_scalar_batches(batches: &[f64]) -> (f64, f64) {
    let n = batches.len() as f64;
    let mean = batches.iter().sum::<f64>() / n;
    let var = batches.iter().map(|b| (b - mean) * (b - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn combine_vector_batches(batches: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let dim = batches[0].len();
    let mut mean = vec![0.0; dim];
    let mut se = vec![0.0; dim];
    for j in 0..dim {
        let col: Vec<f64> = batches.iter().map(|b| b[j]).collect();
        let (m, s) = combine_scalar_batches(&col);
        mean[j] = m;
        se[j] = s;
    }
    (mean, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::classify;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn density_at_origin_closed_forms() {
        let m = SourceMeasure::uniform_ball(3, 1.0).unwrap();
        assert!((m.density_at_origin() - 3.0 / (4.0 * PI)).abs() < 1e-14);
        let m = SourceMeasure::isotropic_gaussian(2, 1.0).unwrap();
        assert!((m.density_at_origin() - 1.0 / (2.0 * PI)).abs() < 1e-14);
        let m = SourceMeasure::shifted_uniform_ball(3, 1.0, vec![0.5, 0.0, 0.0]).unwrap();
        assert!((m.density_at_origin() - 3.0 / (4.0 * PI)).abs() < 1e-14);
        // Normalization forms agree.
        for d in 1..=4 {
            let a = ball_inverse_volume(d, 0.7);
            let b = ball_inverse_volume_direct(d, 0.7);
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(SourceMeasure::uniform_ball(0, 1.0).is_err());
        assert!(SourceMeasure::uniform_ball(3, 0.0).is_err());
        assert!(SourceMeasure::isotropic_gaussian(2, -1.0).is_err());
        // Origin on or outside the support violates positivity at the origin.
        assert!(SourceMeasure::shifted_uniform_ball(3, 1.0, vec![1.0, 0.0, 0.0]).is_err());
        assert!(SourceMeasure::shifted_uniform_ball(3, 1.0, vec![2.0, 0.0, 0.0]).is_err());
        assert!(SourceMeasure::shifted_uniform_ball(3, 1.0, vec![0.5, 0.0]).is_err());
    }

    #[test]
    fn sample_means_match_symmetry() {
        let n = 200_000;
        let m = SourceMeasure::uniform_ball(3, 1.0).unwrap();
        let xs = m.sample(n, &mut rng(1));
        for j in 0..3 {
            let mean = xs.iter().skip(j).step_by(3).sum::<f64>() / n as f64;
            // Component variance of the unit ball is 1/5; 4 sigma window.
            let se = (0.2f64 / n as f64).sqrt();
            assert!(mean.abs() < 4.0 * se, "component {j}: {mean}");
        }
    }

    #[test]
    fn gaussian_component_variance() {
        let n = 200_000;
        let m = SourceMeasure::isotropic_gaussian(2, 1.0).unwrap();
        let xs = m.sample(n, &mut rng(2));
        for j in 0..2 {
            let col: Vec<f64> = xs.iter().skip(j).step_by(2).copied().collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
            // Var of the variance estimator is 2/n for a Gaussian.
            let se = (2.0f64 / n as f64).sqrt();
            assert!((var - 1.0).abs() < 4.0 * se, "component {j}: {var}");
        }
    }

    #[test]
    fn shifted_ball_mean_reflects_relative_position_convention() {
        // Cloud center displaced by +0.5 x_hat from the test particle means
        // the R draws center on -0.5 x_hat.
        let n = 200_000;
        let m = SourceMeasure::shifted_uniform_ball(3, 1.0, vec![0.5, 0.0, 0.0]).unwrap();
        let xs = m.sample(n, &mut rng(3));
        let se = (0.2f64 / n as f64).sqrt();
        let mean_x = xs.iter().step_by(3).sum::<f64>() / n as f64;
        assert!((mean_x + 0.5).abs() < 4.0 * se, "{mean_x}");
        let mean_y = xs.iter().skip(1).step_by(3).sum::<f64>() / n as f64;
        assert!(mean_y.abs() < 4.0 * se);
    }

    #[test]
    fn density_normalizes_on_covering_box() {
        // Importance estimate of int rho over a box covering the support.
        let n = 400_000;
        let mut r = rng(4);
        for m in [
            SourceMeasure::uniform_ball(2, 1.0).unwrap(),
            SourceMeasure::shifted_uniform_ball(2, 1.0, vec![0.3, -0.2]).unwrap(),
            SourceMeasure::isotropic_gaussian(2, 0.5).unwrap(),
        ] {
            // Tight covering box: ball support plus the offset, or 4 sigma
            // for the Gaussian (truncated mass ~1e-4, below the tolerance).
            let half = match m.kind() {
                MeasureKind::UniformBall { radius } => radius * 1.05,
                MeasureKind::ShiftedUniformBall { radius, center_offset } => {
                    radius * 1.05 + center_offset.iter().map(|c| c * c).sum::<f64>().sqrt()
                }
                MeasureKind::IsotropicGaussian { scale } => 4.0 * scale,
            };
            let vol = (2.0 * half).powi(2);
            let mut acc = KahanSum::new();
            let mut pt = [0.0; 2];
            for _ in 0..n {
                pt[0] = r.gen_range(-half..half);
                pt[1] = r.gen_range(-half..half);
                acc.add(m.density_at(&pt));
            }
            let integral = vol * acc.value() / n as f64;
            assert!((integral - 1.0).abs() < 1e-2, "{integral}");
        }
    }

    #[test]
    fn density_at_origin_matches_small_ball_frequency() {
        let n = 1_000_000;
        for m in [
            SourceMeasure::uniform_ball(3, 1.0).unwrap(),
            SourceMeasure::isotropic_gaussian(2, 1.0).unwrap(),
            SourceMeasure::shifted_uniform_ball(3, 1.0, vec![0.4, 0.1, 0.0]).unwrap(),
        ] {
            let d = m.dim();
            let eps = 0.02 * m.support_scale();
            let mut hits = 0usize;
            let mut r = rng(5);
            let mut buf = vec![0.0; d as usize];
            for _ in 0..n {
                m.sample_into(&mut r, &mut buf);
                if norm2(&buf) < eps * eps {
                    hits += 1;
                }
            }
            let small_vol = solid_angle(d).unwrap() * eps.powf(f64::from(d)) / f64::from(d);
            let p = hits as f64 / n as f64;
            let est = p / small_vol;
            let se = (p * (1.0 - p) / n as f64).sqrt() / small_vol;
            let exact = m.density_at_origin();
            assert!((est - exact).abs() < 3.0 * se, "est {est} vs {exact}");
        }
    }

    #[test]
    fn moments_centered_ball_mean_force_vanishes() {
        let cfg = classify(3, 2.0).unwrap();
        let m = SourceMeasure::uniform_ball(3, 1.0).unwrap();
        let mom = m.moments(&cfg, 200_000, &mut rng(6)).unwrap();
        let mean = mom.require_mean_force().unwrap();
        for j in 0..3 {
            assert!(
                mean.value[j].abs() < 5.0 * mean.std_error[j].max(1e-4),
                "component {j}: {} +- {}",
                mean.value[j],
                mean.std_error[j]
            );
        }
    }

    #[test]
    fn moments_gate_by_exponents() {
        // alpha = 1.5: covariance of V diverges.
        let cfg = classify(3, 2.0).unwrap();
        let m = SourceMeasure::uniform_ball(3, 1.0).unwrap();
        let mom = m.moments(&cfg, 10_000, &mut rng(7)).unwrap();
        let err = mom.require_covariance().unwrap_err();
        assert!(err.to_string().contains("alpha = d/delta > 2"), "{err}");
        assert!(mom.require_mean_u().is_ok());

        // alpha = 1/3, alpha' = 1/2: neither mean exists.
        let cfg = classify(1, 3.0).unwrap();
        let m = SourceMeasure::uniform_ball(1, 1.0).unwrap();
        let mom = m.moments(&cfg, 10_000, &mut rng(8)).unwrap();
        assert!(mom.require_mean_force().is_err());
        assert!(mom.require_mean_u().is_err());
        assert!(mom.require_var_u().is_err());

        // alpha' = 1 (d=1, delta=2): mean_U still undefined.
        let cfg = classify(1, 2.0).unwrap();
        let m = SourceMeasure::uniform_ball(1, 1.0).unwrap();
        let mom = m.moments(&cfg, 10_000, &mut rng(9)).unwrap();
        assert!(mom.require_mean_u().is_err());
    }

    #[test]
    fn moments_mean_u_matches_quadrature() {
        // Uniform ball d=3, delta=2: <U> = <1/R> = int_0^1 r^{-1} 3r^2 dr = 3/2.
        let cfg = classify(3, 2.0).unwrap();
        let m = SourceMeasure::uniform_ball(3, 1.0).unwrap();
        let mom = m.moments(&cfg, 1_000_000, &mut rng(10)).unwrap();
        let u = mom.require_mean_u().unwrap();
        assert!(
            (u.value - 1.5).abs() < 4.0 * u.std_error,
            "{} +- {}",
            u.value,
            u.std_error
        );
    }

    #[test]
    fn moments_var_u_matches_closed_form_below_delta_one() {
        // Uniform ball d=3, delta=0.5: <U^2> = 3/4, <U> = 6/7,
        // var = 3/196 = 0.015306122448979592.
        let cfg = classify(3, 0.5).unwrap();
        let m = SourceMeasure::uniform_ball(3, 1.0).unwrap();
        let mom = m.moments(&cfg, 1_000_000, &mut rng(11)).unwrap();
        let v = mom.require_var_u().unwrap();
        assert!((v.value - 0.015_306_122_448_979_592).abs() < 1e-3);
    }

    #[test]
    fn energy_variable_gauge_at_delta_one() {
        assert_eq!(energy_variable(1.0, 1.0), 0.0);
        assert!((energy_variable(2.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((energy_variable(0.5, 3.0) - 4.0).abs() < 1e-15);
    }
}
