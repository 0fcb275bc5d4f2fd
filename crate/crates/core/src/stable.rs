//! Stable and Gaussian limit laws at characteristic-function level, the
//! N-asymptotic characteristic functions of the renormalized force and
//! energy sums, and a reference stable sampler for distribution-level
//! cross-checks.
//!
//! Scale convention: the unit symmetric law has
//! `ln Psi(z) = -|z|^alpha / Gamma(alpha + 1)` and the unit asymmetric law
//! carries the extra factor `(1 - i beta sgn(z) tan(alpha pi / 2))`. All
//! comparisons in this crate stay inside this one convention.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::MeasureMoments;
use crate::renorm::{EnergyExponent, Regime, RenormPlan, SpaceConfig};
use crate::special::{gamma, lambda_energy, lambda_force, solid_angle};

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// A stable law in the crate's scale convention: `location + scale * S`
/// where `S` is the unit law with exponent `exponent` and asymmetry
/// `asymmetry` in {-1, 0, +1}.
///
/// `location.len()` fixes the dimension; multivariate laws are isotropic and
/// symmetric (`asymmetry = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct StableLaw {
    exponent: f64,
    asymmetry: i8,
    scale: f64,
    location: Vec<f64>,
}

impl StableLaw {
    pub fn new(exponent: f64, asymmetry: i8, scale: f64, location: Vec<f64>) -> Result<Self> {
        if !(exponent > 0.0 && exponent <= 2.0) {
            return Err(Error::OutOfRange {
                name: "exponent",
                value: exponent,
                constraint: "0 < exponent <= 2",
            });
        }
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::OutOfRange {
                name: "scale",
                value: scale,
                constraint: "scale >= 0",
            });
        }
        if !matches!(asymmetry, -1 | 0 | 1) {
            return Err(Error::OutOfRange {
                name: "asymmetry",
                value: asymmetry as f64,
                constraint: "asymmetry in {-1, 0, +1}",
            });
        }
        if asymmetry != 0 && exponent == 2.0 {
            return Err(Error::OutOfRange {
                name: "asymmetry",
                value: asymmetry as f64,
                constraint: "asymmetry must be 0 when exponent = 2",
            });
        }
        if asymmetry != 0 && location.len() != 1 {
            return Err(Error::OutOfRange {
                name: "asymmetry",
                value: asymmetry as f64,
                constraint: "asymmetric laws are scalar (dimension 1)",
            });
        }
        if asymmetry != 0 && exponent == 1.0 {
            return Err(Error::AsymmetricExponentOne);
        }
        if location.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self {
            exponent,
            asymmetry,
            scale,
            location,
        })
    }

    pub fn symmetric_scalar(exponent: f64, scale: f64, location: f64) -> Result<Self> {
        Self::new(exponent, 0, scale, vec![location])
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn asymmetry(&self) -> i8 {
        self.asymmetry
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn location(&self) -> &[f64] {
        &self.location
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    /// Characteristic function of the law at `z` (same dimension).
    pub fn cf(&self, z: &[f64]) -> Complex64 {
        assert_eq!(z.len(), self.dim());
        let phase = Complex64::new(0.0, dot(z, &self.location));
        let zn = norm(z);
        if zn == 0.0 || self.scale == 0.0 {
            return phase.exp();
        }
        let modulus = -(self.scale * zn).powf(self.exponent) / gamma(self.exponent + 1.0);
        let skew = if self.asymmetry == 0 {
            0.0
        } else {
            // scalar law: sgn(z) from the single component
            let sgn = if z[0] > 0.0 { 1.0 } else { -1.0 };
            -f64::from(self.asymmetry) * sgn * (self.exponent * FRAC_PI_2).tan()
        };
        (phase + Complex64::new(modulus, modulus * skew)).exp()
    }
}

/// `exp(-|z|^alpha / Gamma(alpha+1))`, the symmetric stable characteristic
/// function for vectors.
pub fn cf_symmetric_stable_vector(z: &[f64], alpha: f64) -> Result<Complex64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            constraint: "0 < alpha <= 2",
        });
    }
    let zn = norm(z);
    Ok(Complex64::new((-zn.powf(alpha) / gamma(alpha + 1.0)).exp(), 0.0))
}

/// Asymmetric scalar stable characteristic function,
/// `exp(-|z|^a / Gamma(a+1) (1 - i beta sgn(z) tan(a pi/2)))`, for
/// `a in (0, 2)`, `a != 1` (at 1 the tangent is singular; the energy law
/// uses its dedicated branch instead).
pub fn cf_asymmetric_stable(z: f64, alpha_p: f64, asym: i8) -> Result<Complex64> {
    if !(alpha_p > 0.0 && alpha_p < 2.0) {
        return Err(Error::OutOfRange {
            name: "alpha_p",
            value: alpha_p,
            constraint: "0 < alpha' < 2",
        });
    }
    if alpha_p == 1.0 {
        return Err(Error::AsymmetricExponentOne);
    }
    if !matches!(asym, -1 | 1) {
        return Err(Error::OutOfRange {
            name: "asym",
            value: asym as f64,
            constraint: "asym in {-1, +1}",
        });
    }
    if z == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let base = -z.abs().powf(alpha_p) / gamma(alpha_p + 1.0);
    let skew = -f64::from(asym) * z.signum() * (alpha_p * FRAC_PI_2).tan();
    Ok(Complex64::new(base, base * skew).exp())
}

/// Log of the finite-N asymptotic characteristic function of the
/// renormalized force sum at wave vector `z`.
///
/// Branch by the force exponent `alpha = d/delta`:
/// - `alpha < 1`: N-free stable law with scale set by the density at the
///   origin (no moments needed);
/// - `alpha = 1`: pure fluctuation of width `sigma_N`, concentrating at 0;
/// - `1 < alpha <= 2`: drift at the mean force plus a stable fluctuation of
///   width `sigma_N`;
/// - `alpha > 2`: drift plus Gaussian fluctuation with the covariance of V.
pub fn log_cf_force(
    z: &[f64],
    plan: &RenormPlan,
    cfg: &SpaceConfig,
    moments: &MeasureMoments,
) -> Result<Complex64> {
    check_dims(z, cfg)?;
    let rho0 = moments.rho_at_origin;
    let zn = norm(z);
    let alpha = cfg.alpha;
    if alpha < 1.0 {
        let lam = lambda_force(alpha, cfg.d)?;
        let c = lam * rho0 * plan.k_const / cfg.delta;
        Ok(Complex64::new(-c * zn.powf(alpha) / gamma(alpha + 1.0), 0.0))
    } else if cfg.regime == Regime::SingularD {
        let sigma = plan.sigma_n.expect("alpha = 1 has sigma_N");
        let lam = lambda_force(1.0, cfg.d)?;
        let c = sigma * lam * rho0 / cfg.delta;
        Ok(Complex64::new(-c * zn, 0.0))
    } else if alpha <= 2.0 {
        let mean = moments.require_mean_force()?;
        let sigma = plan.sigma_n.expect("alpha >= 1 has sigma_N");
        let lam = lambda_force(alpha, cfg.d)?;
        let drift = f64::from(plan.q) * plan.k_const * dot(z, &mean.value);
        let c = sigma.powf(alpha) * lam * rho0 / cfg.delta;
        Ok(Complex64::new(
            -c * zn.powf(alpha) / gamma(alpha + 1.0),
            drift,
        ))
    } else {
        let mean = moments.require_mean_force()?;
        let cov = moments.require_covariance()?;
        let sigma = plan.sigma_n.expect("alpha > 2 has sigma_N");
        let drift = f64::from(plan.q) * plan.k_const * dot(z, &mean.value);
        Ok(Complex64::new(
            -0.5 * sigma * sigma * cov.quadratic_form(z),
            drift,
        ))
    }
}

/// Finite-N asymptotic characteristic function of the force sum.
pub fn theoretical_cf_force(
    z: &[f64],
    plan: &RenormPlan,
    cfg: &SpaceConfig,
    moments: &MeasureMoments,
) -> Result<Complex64> {
    Ok(log_cf_force(z, plan, cfg, moments)?.exp())
}

/// N -> infinity limit of the force characteristic function: the stable law
/// itself for `alpha < 1`, the constant 1 (a point mass at zero) for
/// `alpha = 1`, and a pure phase at the mean force for `alpha > 1`.
pub fn limit_cf_force(
    z: &[f64],
    plan: &RenormPlan,
    cfg: &SpaceConfig,
    moments: &MeasureMoments,
) -> Result<Complex64> {
    check_dims(z, cfg)?;
    if cfg.alpha < 1.0 {
        return theoretical_cf_force(z, plan, cfg, moments);
    }
    if cfg.regime == Regime::SingularD {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mean = moments.require_mean_force()?;
    let drift = f64::from(plan.q) * plan.k_const * dot(z, &mean.value);
    Ok(Complex64::new(0.0, drift).exp())
}

/// Log of the finite-N asymptotic characteristic function of the
/// renormalized energy sum at frequency `z`.
///
/// Branch by the energy exponent `alpha' = d/(delta-1)` (Gaussian branch for
/// `delta <= 1`), with the asymmetry fixed at `q' = sign(beta k_N)` and, for
/// `delta = 1`, the extra location `-q' K' ln L_N`.
pub fn log_cf_energy(
    z: f64,
    plan: &RenormPlan,
    cfg: &SpaceConfig,
    moments: &MeasureMoments,
) -> Result<Complex64> {
    let rho0 = moments.rho_at_origin;
    let qp = f64::from(plan.q_prime);
    let omega = solid_angle(cfg.d)?;
    match cfg.alpha_p {
        EnergyExponent::GaussianBranch => {
            // delta <= 1: alpha' > 2 under the finite-second-moment
            // hypothesis; fluctuations are Gaussian with variance of U.
            let mean_u = moments.require_mean_u()?;
            let var_u = moments.require_var_u()?;
            let sigma = plan.sigma_p_n.expect("Gaussian branch has sigma'_N");
            let mut loc = qp * plan.k_prime_const * mean_u.value;
            if let Some(drift) = plan.log_drift {
                loc += drift;
            }
            Ok(Complex64::new(
                -0.5 * sigma * sigma * var_u.value * z * z,
                loc * z,
            ))
        }
        EnergyExponent::Levy(alpha_p) => {
            let za = z.abs();
            let sgn = if z == 0.0 { 0.0 } else { z.signum() };
            if alpha_p < 1.0 {
                let lam = lambda_energy(alpha_p)?;
                let c = lam * omega * rho0 * plan.k_prime_const / (cfg.delta - 1.0);
                let base = -c * za.powf(alpha_p) / gamma(alpha_p + 1.0);
                let skew = -qp * sgn * (alpha_p * FRAC_PI_2).tan();
                Ok(Complex64::new(base, base * skew))
            } else if cfg.regime == Regime::SingularD1 {
                // alpha' = 1: finite location plus a symmetric width that
                // decays like sigma'_N.
                let sigma = plan.sigma_p_n.expect("alpha' = 1 has sigma'_N");
                let lam = lambda_energy(1.0)?;
                let loc = qp * omega * rho0 * plan.k_prime_const / (cfg.delta - 1.0);
                let c = sigma * lam * omega * rho0 / (cfg.delta - 1.0);
                Ok(Complex64::new(-c * za, loc * z))
            } else if alpha_p < 2.0 {
                let mean_u = moments.require_mean_u()?;
                let sigma = plan.sigma_p_n.expect("alpha' > 1 has sigma'_N");
                let lam = lambda_energy(alpha_p)?;
                let loc = qp * plan.k_prime_const * mean_u.value;
                let c = sigma.powf(alpha_p) * lam * omega * rho0 / (cfg.delta - 1.0);
                let base = -c * za.powf(alpha_p) / gamma(alpha_p + 1.0);
                let skew = -qp * sgn * (alpha_p * FRAC_PI_2).tan();
                Ok(Complex64::new(base, base * skew + loc * z))
            } else if (alpha_p - 2.0).abs() <= 1e-12 {
                let mean_u = moments.require_mean_u()?;
                let sigma = plan.sigma_p_n.expect("alpha' = 2 has sigma'_N");
                let lam = lambda_energy(2.0)?;
                let loc = qp * plan.k_prime_const * mean_u.value;
                let c = sigma * sigma * lam * omega * rho0 / (cfg.delta - 1.0);
                Ok(Complex64::new(-c * z * z / gamma(3.0), loc * z))
            } else {
                // alpha' > 2 with delta > 1: Gaussian fluctuations.
                let mean_u = moments.require_mean_u()?;
                let var_u = moments.require_var_u()?;
                let sigma = plan.sigma_p_n.expect("alpha' > 2 has sigma'_N");
                let loc = qp * plan.k_prime_const * mean_u.value;
                Ok(Complex64::new(
                    -0.5 * sigma * sigma * var_u.value * z * z,
                    loc * z,
                ))
            }
        }
    }
}

/// Finite-N asymptotic characteristic function of the energy sum.
pub fn theoretical_cf_energy(
    z: f64,
    plan: &RenormPlan,
    cfg: &SpaceConfig,
    moments: &MeasureMoments,
) -> Result<Complex64> {
    Ok(log_cf_energy(z, plan, cfg, moments)?.exp())
}

/// N -> infinity limit of the energy characteristic function.
///
/// For `alpha' = 1` this is the pure phase at
/// `q' Omega_d rho(0) K' / (delta - 1)`; the sign follows the one-sided
/// expansion of the summands (positive summands with q' = +1 give a
/// positive location).
pub fn limit_cf_energy(
    z: f64,
    plan: &RenormPlan,
    cfg: &SpaceConfig,
    moments: &MeasureMoments,
) -> Result<Complex64> {
    match cfg.alpha_p {
        EnergyExponent::GaussianBranch => {
            if cfg.regime == Regime::SingularD {
                // d = 1 = delta: ln L_N grows without bound.
                return Err(Error::NoFiniteLimit(
                    "delta = d = 1: the energy location -q' K' ln L_N diverges",
                ));
            }
            let mean_u = moments.require_mean_u()?;
            let mut loc = f64::from(plan.q_prime) * plan.k_prime_const * mean_u.value;
            if let Some(drift) = plan.log_drift {
                // Mean-field delta = 1: L_N is constant, the drift survives.
                loc += drift;
            }
            Ok(Complex64::new(0.0, loc * z).exp())
        }
        EnergyExponent::Levy(alpha_p) => {
            if alpha_p < 1.0 {
                theoretical_cf_energy(z, plan, cfg, moments)
            } else if cfg.regime == Regime::SingularD1 {
                let omega = solid_angle(cfg.d)?;
                let loc = f64::from(plan.q_prime) * omega * moments.rho_at_origin
                    * plan.k_prime_const
                    / (cfg.delta - 1.0);
                Ok(Complex64::new(0.0, loc * z).exp())
            } else {
                let mean_u = moments.require_mean_u()?;
                let loc = f64::from(plan.q_prime) * plan.k_prime_const * mean_u.value;
                Ok(Complex64::new(0.0, loc * z).exp())
            }
        }
    }
}

/// Draw `count` samples of the law, returned flat (`count * dim`).
///
/// Scalar sampling uses the Chambers-Mallows-Stuck transform; isotropic
/// vector laws use the sub-Gaussian construction (a totally skewed positive
/// `alpha/2`-stable amplitude under a Gaussian vector), which reproduces the
/// isotropic characteristic function `exp(-c |z|^alpha)`.
pub fn sample_stable<R: Rng + ?Sized>(law: &StableLaw, count: usize, rng: &mut R) -> Vec<f64> {
    let d = law.dim();
    let mut out = vec![0.0; count * d];
    let unit_scale = law.scale / gamma(law.exponent + 1.0).powf(1.0 / law.exponent);
    if d == 1 {
        for slot in out.iter_mut() {
            let s = if law.exponent == 2.0 {
                // exp(-(scale |z|)^2 / Gamma(3)) = exp(-scale^2 z^2 / 2)
                standard_normal(rng)
            } else if law.exponent == 1.0 {
                (std::f64::consts::PI * (rng.gen::<f64>() - 0.5)).tan()
            } else {
                cms_standard(law.exponent, f64::from(law.asymmetry), rng)
            };
            let scale = if law.exponent == 2.0 { law.scale } else { unit_scale };
            *slot = law.location[0] + scale * s;
        }
    } else if law.exponent == 2.0 {
        for chunk in out.chunks_exact_mut(d) {
            for (j, slot) in chunk.iter_mut().enumerate() {
                // exp(-scale^2 |z|^2 / 2): iid components of sd = scale.
                *slot = law.location[j] + law.scale * standard_normal(rng);
            }
        }
    } else {
        // X = sqrt(2 A) G with A = c^{2/alpha} S, S positive alpha/2-stable
        // with Laplace transform exp(-lambda^{alpha/2}).
        let half = law.exponent / 2.0;
        let c = law.scale.powf(law.exponent) / gamma(law.exponent + 1.0);
        let kappa = c.powf(2.0 / law.exponent);
        for chunk in out.chunks_exact_mut(d) {
            let s_pos = positive_stable(half, rng);
            let amp = (2.0 * kappa * s_pos).sqrt();
            for (j, slot) in chunk.iter_mut().enumerate() {
                *slot = law.location[j] + amp * standard_normal(rng);
            }
        }
    }
    out
}

/// Standard Chambers-Mallows-Stuck draw with characteristic function
/// `exp(-|t|^alpha (1 - i beta sgn(t) tan(alpha pi/2)))`, `alpha != 1, 2`.
fn cms_standard<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let tan_half = (alpha * FRAC_PI_2).tan();
    let b = (beta * tan_half).atan() / alpha;
    let s = (1.0 + beta * beta * tan_half * tan_half).powf(1.0 / (2.0 * alpha));
    let v = std::f64::consts::PI * (clamp_open(rng.gen::<f64>()) - 0.5);
    let w = -clamp_open(rng.gen::<f64>()).ln();
    let phi = alpha * (v + b);
    let a = phi.sin() / v.cos().powf(1.0 / alpha);
    let tail = ((v - phi).cos() / w).max(f64::MIN_POSITIVE);
    s * a * tail.powf((1.0 - alpha) / alpha)
}

/// Positive stable draw with Laplace transform `exp(-lambda^rho)`,
/// `rho in (0, 1)`: a rescaled totally skewed CMS draw,
/// `S = cos(rho pi/2)^{1/rho} X_{CMS}(rho, beta = 1)`.
fn positive_stable<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> f64 {
    let x = cms_standard(rho, 1.0, rng);
    (rho * FRAC_PI_2).cos().powf(1.0 / rho) * x.max(0.0)
}

fn clamp_open(u: f64) -> f64 {
    u.clamp(1e-16, 1.0 - 1e-16)
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = clamp_open(rng.gen::<f64>());
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn check_dims(z: &[f64], cfg: &SpaceConfig) -> Result<()> {
    if z.len() != cfg.d as usize {
        return Err(Error::MismatchedGrids(format!(
            "z has dimension {}, configuration has d = {}",
            z.len(),
            cfg.d
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
