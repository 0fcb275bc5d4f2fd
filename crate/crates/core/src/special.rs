//! Special functions and geometric constants: the gamma function, solid
//! angles, directional sphere moments, the scaling function `h`, and the
//! stable-law prefactors `lambda` used by the force and energy limit laws.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// 1/e, the right endpoint of the domain of the scaling function `h`.
pub const INV_E: f64 = 0.367_879_441_171_442_33;

// Lanczos approximation, g = 7, n = 9 (Godfrey coefficients).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (Lanczos approximation with the
/// reflection formula for x < 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, &c) in LANCZOS_COEFFS[1..].iter().enumerate() {
            acc += c / (z + (i + 1) as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

/// Total solid angle of the unit sphere in `d` dimensions,
/// `Omega_d = 2 pi^{d/2} / Gamma(d/2)`.
///
/// For d = 1 the "sphere" is the two points {-1, +1} and the measure
/// assigns weight 1 to each, so `Omega_1 = 2`.
pub fn solid_angle(d: u32) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidDimension(d as i64));
    }
    let df = f64::from(d);
    Ok(2.0 * PI.powf(df / 2.0) / gamma(df / 2.0))
}

/// Directional sphere moment `int_{S_d} |z_hat . v_hat|^alpha dOmega_d`.
///
/// By isotropy the value does not depend on the reference direction; it is
/// computed with `z_hat` on the first axis, which reduces the integral to the
/// polar angle against the weight `sin^{d-2}(theta) Omega_{d-1}`. The 1-D
/// integral is evaluated by adaptive quadrature to relative tolerance 1e-10.
pub fn sphere_moment(alpha: f64, d: u32) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            constraint: "alpha > 0",
        });
    }
    if d < 1 {
        return Err(Error::InvalidDimension(d as i64));
    }
    if d == 1 {
        // Sum over the two points of S_1: |+1|^alpha + |-1|^alpha.
        return Ok(2.0);
    }
    let omega_prev = solid_angle(d - 1)?;
    let weight_exp = f64::from(d) - 2.0;
    let f = |theta: f64| {
        let c = theta.cos();
        let s = theta.sin();
        let w = if weight_exp == 0.0 { 1.0 } else { s.powf(weight_exp) };
        c.abs().powf(alpha) * w
    };
    // |cos|^alpha has a kink at pi/2; folding [0, pi] onto [0, pi/2] puts it
    // at an interval endpoint where the adaptive scheme bisects towards it.
    let half = adaptive_quadrature(&f, 0.0, FRAC_PI_2, 1e-11);
    Ok(2.0 * omega_prev * half)
}

/// The prefactor `pi cos(a pi/2) / sin(a pi)` of the stable characteristic
/// functions, evaluated through the identity
/// `cos(a pi/2) / sin(a pi) = 1 / (2 sin(a pi/2))`,
/// which removes the 0/0 at a = 1 and takes the limiting value pi/2 there.
fn stable_prefactor(alpha: f64) -> f64 {
    PI / (2.0 * (alpha * FRAC_PI_2).sin())
}

/// Force-law coefficient `lambda_alpha` for exponent `alpha` in (0, 2] and
/// dimension `d`: the stable prefactor times the sphere moment, with the
/// dedicated value `lambda_2 = (1/2) int |z_hat . v_hat|^2 dOmega_d`.
pub fn lambda_force(alpha: f64, d: u32) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            constraint: "0 < alpha <= 2",
        });
    }
    let moment = sphere_moment(alpha, d)?;
    if alpha == 2.0 {
        Ok(0.5 * moment)
    } else {
        Ok(stable_prefactor(alpha) * moment)
    }
}

/// Energy-law coefficient `lambda'_{alpha'}` for exponent `alpha'` in (0, 2]:
/// the bare stable prefactor, with `lambda'_1 = pi/2` (the limiting value)
/// and `lambda'_2 = 1/2`.
pub fn lambda_energy(alpha_p: f64) -> Result<f64> {
    if !(alpha_p > 0.0 && alpha_p <= 2.0) {
        return Err(Error::OutOfRange {
            name: "alpha_p",
            value: alpha_p,
            constraint: "0 < alpha' <= 2",
        });
    }
    if alpha_p == 2.0 {
        Ok(0.5)
    } else {
        Ok(stable_prefactor(alpha_p))
    }
}

/// Scaling function `h`: the solution of `-h ln h = x` on the branch
/// `h in (0, 1/e]`, for `x in (0, 1/e]`.
///
/// The equation has two positive roots for x < 1/e; the lower branch is the
/// one on which `-h ln h` is increasing, so `h` is monotone increasing in x
/// with `h(1/e) = 1/e` and `h -> 0` as `x -> 0`.
///
/// The residual satisfies `|-h ln h - x| <= 1e-12 * x`.
pub fn h_solve(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= INV_E) {
        return Err(Error::ScalingFunctionDomain(x));
    }
    // First-order guess h = x / |ln x| (exact at x = 1/e), then safeguarded
    // Newton on g(h) = -h ln h - x, whose derivative -ln h - 1 is >= 0 on
    // the branch.
    let mut h = x / (-x.ln()).max(1.0);
    let mut lo = 0.0_f64;
    let mut hi = INV_E;
    let tol = 1e-13 * x;
    for _ in 0..128 {
        let g = -h * h.ln() - x;
        if g.abs() <= tol {
            return Ok(h);
        }
        if g > 0.0 {
            hi = h;
        } else {
            lo = h;
        }
        let dg = -h.ln() - 1.0;
        let mut next = if dg > 0.0 { h - g / dg } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == h {
            break;
        }
        h = next;
    }
    Ok(h)
}

/// Adaptive Simpson quadrature with relative tolerance `rel_tol`.
fn adaptive_quadrature(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let tol = (whole.abs() * rel_tol).max(1e-300);
    adaptive_step(f, a, b, fa, fm, fb, whole, tol, 64)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
