//! Regime classification and renormalization plans.
//!
//! For a force exponent `delta` in dimension `d` the pair of Levy exponents
//! `alpha = d/delta` (force) and `alpha' = d/(delta-1)` (energy, for
//! `delta > 1`) selects one of five regimes. Each regime fixes how the
//! coupling `k_N` and the system size `L_N` must depend on the source count
//! `N` so that both the force and the energy sums have nontrivial limits.
//!
//! A [`RenormPlan`] is built directly from the defining conditions (for
//! example `N |a_N|^alpha = K`), so reconstructing those conditions from the
//! emitted constants reproduces `K` and `K'` to machine precision.

use crate::error::{Error, Result};
use crate::special::{h_solve, INV_E};

/// Relative tolerance for detecting the singular rows `delta = d` and
/// `delta = d + 1`. Users type `delta` as a decimal, and the singular rows
/// are measure-zero but physically meaningful.
const BOUNDARY_REL_TOL: f64 = 1e-12;

/// The five renormalization regimes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `delta < d`: constant size, Kac-scaled coupling; force and energy
    /// converge to their means.
    MeanField,
    /// `delta = d`: force concentrates at zero without a defined mean.
    SingularD,
    /// `d < delta < d + 1`: energy converges to its mean, force stays random.
    Mixed,
    /// `delta = d + 1`: energy converges to a finite location without a
    /// defined mean.
    SingularD1,
    /// `delta > d + 1`: growing volume at constant coupling; force and energy
    /// stay genuinely random.
    Thermodynamic,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::MeanField => "mean-field",
            Regime::SingularD => "singular-d",
            Regime::Mixed => "mixed",
            Regime::SingularD1 => "singular-d1",
            Regime::Thermodynamic => "thermodynamic",
        }
    }
}

/// Energy Levy exponent. For `delta <= 1` the exponent is not determined by
/// `(d, delta)` alone; under the finite-second-moment hypothesis it is known
/// only to exceed 2, which selects the Gaussian branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyExponent {
    Levy(f64),
    /// `delta <= 1`: alpha' > 2, Gaussian fluctuations.
    GaussianBranch,
}

impl EnergyExponent {
    /// Numeric value where defined.
    pub fn value(&self) -> Option<f64> {
        match self {
            EnergyExponent::Levy(a) => Some(*a),
            EnergyExponent::GaussianBranch => None,
        }
    }

    /// True when the energy fluctuations are Gaussian (alpha' > 2).
    pub fn is_gaussian(&self) -> bool {
        match self {
            EnergyExponent::Levy(a) => *a > 2.0,
            EnergyExponent::GaussianBranch => true,
        }
    }
}

/// The pair `(d, delta)` with its derived exponents and regime tag.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceConfig {
    pub d: u32,
    pub delta: f64,
    /// Force Levy exponent `alpha = d / delta`.
    pub alpha: f64,
    /// Energy Levy exponent `alpha' = d / (delta - 1)` for `delta > 1`.
    pub alpha_p: EnergyExponent,
    pub regime: Regime,
}

impl SpaceConfig {
    /// True when `delta <= 1`, where the energy-tail classification is only
    /// partial (the Gaussian branch) and results should be read with care.
    pub fn delta_at_most_one(&self) -> bool {
        self.delta <= 1.0 + BOUNDARY_REL_TOL
    }

    fn is_delta_one(&self) -> bool {
        (self.delta - 1.0).abs() <= BOUNDARY_REL_TOL
    }

    /// Energy scale prefactor `beta`: `1/(delta-1)` for `delta != 1`, else 1.
    pub fn beta(&self) -> f64 {
        if self.is_delta_one() {
            1.0
        } else {
            1.0 / (self.delta - 1.0)
        }
    }
}

/// Classify `(d, delta)` into its regime and derive the Levy exponents.
pub fn classify(d: u32, delta: f64) -> Result<SpaceConfig> {
    if d < 1 {
        return Err(Error::InvalidDimension(d as i64));
    }
    if !(delta > 0.0) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            constraint: "delta > 0",
        });
    }
    let df = f64::from(d);
    let near = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_REL_TOL * a.abs().max(b.abs());
    let regime = if near(delta, df) {
        Regime::SingularD
    } else if near(delta, df + 1.0) {
        Regime::SingularD1
    } else if delta < df {
        Regime::MeanField
    } else if delta < df + 1.0 {
        Regime::Mixed
    } else {
        Regime::Thermodynamic
    };
    // Snap exactly onto the singular rows so that downstream branch selection
    // sees alpha = 1 / alpha' = 1 exactly.
    let alpha = match regime {
        Regime::SingularD => 1.0,
        _ => df / delta,
    };
    let alpha_p = if delta <= 1.0 + BOUNDARY_REL_TOL {
        EnergyExponent::GaussianBranch
    } else {
        match regime {
            Regime::SingularD1 => EnergyExponent::Levy(1.0),
            _ => EnergyExponent::Levy(df / (delta - 1.0)),
        }
    };
    Ok(SpaceConfig {
        d,
        delta,
        alpha,
        alpha_p,
        regime,
    })
}

/// All N-dependent constants of one regime at one `N`.
#[derive(Clone, Debug)]
pub struct RenormPlan {
    pub regime: Regime,
    pub k_const: f64,
    pub k_prime_const: f64,
    pub n: u64,
    /// Signed coupling `k_N`.
    pub k_n: f64,
    /// System size `L_N` (dimensionless length).
    pub l_n: f64,
    /// Per-source force scale `a_N = k_N / L_N^delta`.
    pub a_n: f64,
    /// Per-source energy scale `b_N = beta a_N L_N`.
    pub b_n: f64,
    /// `beta = 1/(delta-1)` for `delta != 1`, else 1.
    pub beta: f64,
    /// Sign of `k_N`.
    pub q: i8,
    /// Sign of `beta k_N`.
    pub q_prime: i8,
    /// Fluctuation width of the force law; absent for `alpha < 1`.
    pub sigma_n: Option<f64>,
    /// Fluctuation width of the energy law; absent for `alpha' < 1`.
    pub sigma_p_n: Option<f64>,
    /// Extra energy location `-q' K' ln L_N` present only for `delta = 1`.
    pub log_drift: Option<f64>,
}

/// Fluctuation width `sigma_N` for force exponent `alpha >= 1` and constant
/// `K`, per renormalization row:
/// `N h(K/N)` at `alpha = 1`; `K N^{(1-alpha)/alpha}` for `1 < alpha < 2`;
/// `K (ln N / N)^{1/2}` at `alpha = 2`; `K N^{-1/2} / 2` for `alpha > 2`.
pub fn sigma_table(alpha: f64, k_const: f64, n: u64) -> Result<f64> {
    if !(k_const > 0.0) {
        return Err(Error::OutOfRange {
            name: "K",
            value: k_const,
            constraint: "K > 0",
        });
    }
    if n < 1 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            constraint: "N >= 1",
        });
    }
    if alpha < 1.0 {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            constraint: "alpha >= 1 (no sigma_N exists below 1)",
        });
    }
    let nf = n as f64;
    if (alpha - 1.0).abs() <= BOUNDARY_REL_TOL {
        let h = h_solve(k_const / nf).map_err(|_| threshold_error(k_const, n, "N >= e*K"))?;
        Ok(nf * h)
    } else if alpha < 2.0 {
        Ok(k_const * nf.powf((1.0 - alpha) / alpha))
    } else if (alpha - 2.0).abs() <= 2.0 * BOUNDARY_REL_TOL {
        Ok(k_const * (nf.ln() / nf).sqrt())
    } else {
        Ok(k_const * nf.powf(-0.5) / 2.0)
    }
}

fn threshold_error(k_const: f64, n: u64, condition: &'static str) -> Error {
    Error::ParticleCountBelowThreshold {
        n,
        min: (std::f64::consts::E * k_const).ceil() as u64,
        condition,
    }
}

/// Build the renormalization plan for one regime at one `N`.
///
/// `|a_N|` and `|b_N|` are solved from the regime's defining conditions and
/// `L_N`, `k_N` are then reconstructed through `L_N = |b_N| / (|beta| |a_N|)`
/// and `k_N = q |a_N| L_N^delta`, so the conditions hold exactly.
pub fn plan(
    cfg: &SpaceConfig,
    k_const: f64,
    k_prime_const: f64,
    n: u64,
    coupling_sign: i8,
) -> Result<RenormPlan> {
    for (name, v) in [("K", k_const), ("K'", k_prime_const)] {
        if !(v > 0.0) {
            return Err(Error::OutOfRange {
                name,
                value: v,
                constraint: "must be > 0",
            });
        }
    }
    if n < 1 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            constraint: "N >= 1",
        });
    }
    if coupling_sign != 1 && coupling_sign != -1 {
        return Err(Error::OutOfRange {
            name: "coupling_sign",
            value: coupling_sign as f64,
            constraint: "must be +1 or -1",
        });
    }
    let nf = n as f64;
    let beta = cfg.beta();

    let abs_a = match cfg.regime {
        Regime::MeanField => k_const / nf,
        Regime::SingularD => {
            if k_const / nf > INV_E {
                return Err(threshold_error(k_const, n, "N >= e*K"));
            }
            h_solve(k_const / nf)?
        }
        // alpha < 1 in the remaining rows: N |a_N|^alpha = K.
        Regime::Mixed | Regime::SingularD1 | Regime::Thermodynamic => {
            (k_const / nf).powf(1.0 / cfg.alpha)
        }
    };
    let abs_b = match cfg.regime {
        // N |b_N| = K' wherever alpha' > 1.
        Regime::MeanField | Regime::SingularD | Regime::Mixed => k_prime_const / nf,
        Regime::SingularD1 => {
            if k_prime_const / nf > INV_E {
                return Err(threshold_error(k_prime_const, n, "N >= e*K'"));
            }
            h_solve(k_prime_const / nf)?
        }
        Regime::Thermodynamic => {
            let alpha_p = match cfg.alpha_p {
                EnergyExponent::Levy(a) => a,
                EnergyExponent::GaussianBranch => unreachable!("delta > d+1 implies delta > 1"),
            };
            (k_prime_const / nf).powf(1.0 / alpha_p)
        }
    };

    let l_n = abs_b / (beta.abs() * abs_a);
    let k_n = f64::from(coupling_sign) * abs_a * l_n.powf(cfg.delta);
    let q = coupling_sign;
    let q_prime = if beta < 0.0 { -q } else { q };
    let a_n = f64::from(q) * abs_a;
    let b_n = f64::from(q_prime) * abs_b;

    let sigma_n = if cfg.alpha >= 1.0 {
        Some(sigma_table(cfg.alpha, k_const, n)?)
    } else {
        None
    };
    let sigma_p_n = match cfg.alpha_p {
        EnergyExponent::Levy(a) if a >= 1.0 => Some(sigma_table(a, k_prime_const, n)?),
        EnergyExponent::Levy(_) => None,
        // alpha' > 2 under the finite-second-moment hypothesis.
        EnergyExponent::GaussianBranch => Some(k_prime_const * nf.powf(-0.5) / 2.0),
    };
    let log_drift = if cfg.is_delta_one() {
        Some(-f64::from(q_prime) * k_prime_const * l_n.ln())
    } else {
        None
    };

    Ok(RenormPlan {
        regime: cfg.regime,
        k_const,
        k_prime_const,
        n,
        k_n,
        l_n,
        a_n,
        b_n,
        beta,
        q,
        q_prime,
        sigma_n,
        sigma_p_n,
        log_drift,
    })
}

/// A gravity plan (`delta = 2`, attractive coupling `k_N = -G m_t m_N`)
/// together with the renormalized source mass it implies.
#[derive(Clone, Debug)]
pub struct GravityCase {
    pub plan: RenormPlan,
    pub cfg: SpaceConfig,
    /// Renormalized mass of each source.
    pub source_mass: f64,
}

/// Gravitational renormalization in `d` in {1, 2, 3} with the source mass as
/// the renormalized parameter.
///
/// The meaning of `mass_param` depends on the dimension:
/// - `d = 3`: total source mass `M`; then `K = K' = G m_t M` and `L_N = 1`.
/// - `d = 2`: line density `mu = M_N / L_N`; then `K' = G m_t mu` while `K`
///   is the free constant.
/// - `d = 1`: density parameter `nu = N M_N / L_N^2`; then `K = sqrt(G m_t nu)`
///   while `K'` is the free constant.
///
/// `free_const` supplies the remaining free `K` (`d = 2`) or `K'` (`d = 1`);
/// it is ignored for `d = 3`.
pub fn gravity_case(
    d: u32,
    g: f64,
    m_test: f64,
    mass_param: f64,
    free_const: f64,
    n: u64,
) -> Result<GravityCase> {
    if !matches!(d, 1..=3) {
        return Err(Error::InvalidDimension(d as i64));
    }
    for (name, v) in [("G", g), ("m_test", m_test), ("mass_param", mass_param)] {
        if !(v > 0.0) {
            return Err(Error::OutOfRange {
                name,
                value: v,
                constraint: "must be > 0",
            });
        }
    }
    let cfg = classify(d, 2.0)?;
    let (k_const, k_prime_const) = match d {
        3 => {
            let k = g * m_test * mass_param;
            (k, k)
        }
        2 => (free_const, g * m_test * mass_param),
        1 => ((g * m_test * mass_param).sqrt(), free_const),
        _ => unreachable!(),
    };
    let p = plan(&cfg, k_const, k_prime_const, n, -1)?;
    let source_mass = p.k_n.abs() / (g * m_test);
    Ok(GravityCase {
        plan: p,
        cfg,
        source_mass,
    })
}
