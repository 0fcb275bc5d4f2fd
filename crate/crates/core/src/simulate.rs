//! Monte Carlo engine: realize the renormalized force and energy sums for an
//! ensemble of independent trials.
//!
//! Determinism contract: every trial owns a counter-based stream derived from
//! `(seed, trial index)`, and trials write disjoint output slots, so results
//! are bitwise identical for any worker count.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::measure::{energy_variable, SourceMeasure};
use crate::renorm::{plan, RenormPlan, SpaceConfig};

/// Relative radius below which a draw is rejected and redrawn. The hit
/// probability is ~(1e-12)^d, so statistics are unaffected, but extreme
/// `delta` would otherwise overflow the power law.
const NEAR_SINGULAR_GUARD: f64 = 1e-12;

/// Monte Carlo output with full provenance.
#[derive(Clone, Debug)]
pub struct SampleEnsemble {
    pub cfg: SpaceConfig,
    pub plan: RenormPlan,
    pub trials: usize,
    pub dim: usize,
    /// Per-trial force vectors, row-major (`trials * dim`).
    pub forces: Vec<f64>,
    /// Per-trial energies.
    pub energies: Vec<f64>,
    pub seed: u64,
    /// Total near-singular redraws across all trials; expect ~0.
    pub redraws: u64,
    pub wall_time: Duration,
}

impl SampleEnsemble {
    pub fn force(&self, trial: usize) -> &[f64] {
        &self.forces[trial * self.dim..(trial + 1) * self.dim]
    }

    /// Magnitudes |force| per trial.
    pub fn force_magnitudes(&self) -> Vec<f64> {
        self.forces
            .chunks_exact(self.dim)
            .map(|f| f.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    /// One force component across trials.
    pub fn force_component(&self, j: usize) -> Vec<f64> {
        self.forces.iter().skip(j).step_by(self.dim).copied().collect()
    }
}

/// The per-trial random stream: ChaCha keyed by the ensemble seed with the
/// trial index as the stream counter.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Derive an independent sub-seed (splitmix64 step) for sweep elements.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One realization: draw `plan.n` sources and return the renormalized
/// `(force, energy)` plus the number of near-singular redraws.
///
/// `force = a_N sum_i R_hat_i / |R_i|^delta`;
/// `energy = b_N sum_i |R_i|^{1-delta}` for `delta != 1` and
/// `sum_i (-b_N ln L_N - b_N ln |R_i|)` for `delta = 1`, which is
/// `-b_N sum_i ln(L_N |R_i|)`, the per-source energy at physical distance.
pub fn realize_one<R: Rng + ?Sized>(
    cfg: &SpaceConfig,
    plan: &RenormPlan,
    measure: &SourceMeasure,
    rng: &mut R,
) -> (Vec<f64>, f64, u64) {
    let d = cfg.d as usize;
    let mut force_acc = vec![KahanSum::new(); d];
    let mut u_acc = KahanSum::new();
    let mut r = vec![0.0; d];
    let guard = NEAR_SINGULAR_GUARD * measure.support_scale();
    let mut redraws = 0u64;
    for _ in 0..plan.n {
        let rn = loop {
            measure.sample_into(rng, &mut r);
            let n2: f64 = r.iter().map(|x| x * x).sum();
            let rn = n2.sqrt();
            if rn >= guard {
                break rn;
            }
            redraws += 1;
        };
        let w = rn.powf(-(cfg.delta + 1.0));
        for j in 0..d {
            force_acc[j].add(r[j] * w);
        }
        u_acc.add(energy_variable(rn, cfg.delta));
    }
    let force: Vec<f64> = force_acc.iter().map(|k| plan.a_n * k.value()).collect();
    let energy = if plan.log_drift.is_some() {
        // delta = 1: each source carries the -b_N ln L_N gauge shift.
        plan.b_n * u_acc.value() - plan.n as f64 * plan.b_n * plan.l_n.ln()
    } else {
        plan.b_n * u_acc.value()
    };
    (force, energy, redraws)
}

/// Force and energy of one fixed source configuration with the test particle
/// displaced by `offset` (in `R` units) from the origin.
///
/// With `u(offset)` from this function, the dimensionless force obeys
/// `force_j = -(1/L_N) d u / d offset_j`, since physical positions are
/// `L_N` times the `R`-space coordinates.
pub fn realize_at_offset(
    cfg: &SpaceConfig,
    plan: &RenormPlan,
    positions: &[f64],
    offset: &[f64],
) -> (Vec<f64>, f64) {
    let d = cfg.d as usize;
    assert_eq!(positions.len() % d, 0);
    assert_eq!(offset.len(), d);
    let mut force_acc = vec![KahanSum::new(); d];
    let mut u_acc = KahanSum::new();
    let mut shifted = vec![0.0; d];
    for source in positions.chunks_exact(d) {
        // R = y - Y: displacing the test particle by `offset` adds it to R.
        let mut n2 = 0.0;
        for j in 0..d {
            shifted[j] = source[j] + offset[j];
            n2 += shifted[j] * shifted[j];
        }
        let rn = n2.sqrt();
        let w = rn.powf(-(cfg.delta + 1.0));
        for j in 0..d {
            force_acc[j].add(shifted[j] * w);
        }
        u_acc.add(energy_variable(rn, cfg.delta));
    }
    let force: Vec<f64> = force_acc.iter().map(|k| plan.a_n * k.value()).collect();
    let n_sources = (positions.len() / d) as f64;
    let energy = if plan.log_drift.is_some() {
        plan.b_n * u_acc.value() - n_sources * plan.b_n * plan.l_n.ln()
    } else {
        plan.b_n * u_acc.value()
    };
    (force, energy)
}

/// Run `trials` independent realizations.
///
/// Bitwise-deterministic for fixed `(seed, trials)` and independent of
/// `workers` (0 = rayon default).
pub fn run_ensemble(
    cfg: &SpaceConfig,
    plan: &RenormPlan,
    measure: &SourceMeasure,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<SampleEnsemble> {
    if trials < 1 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    if measure.dim() != cfg.d {
        return Err(Error::MismatchedGrids(format!(
            "measure dimension {} != configuration dimension {}",
            measure.dim(),
            cfg.d
        )));
    }
    let start = Instant::now();
    let d = cfg.d as usize;
    let mut forces = Vec::new();
    forces
        .try_reserve_exact(trials * d)
        .map_err(|e| Error::Resource(format!("force buffer ({} trials): {e}", trials)))?;
    forces.resize(trials * d, 0.0);
    let mut energies = Vec::new();
    energies
        .try_reserve_exact(trials)
        .map_err(|e| Error::Resource(format!("energy buffer ({} trials): {e}", trials)))?;
    energies.resize(trials, 0.0);

    let mut run = || -> u64 {
        forces
            .par_chunks_mut(d)
            .zip(energies.par_iter_mut())
            .enumerate()
            .map(|(t, (fslot, eslot))| {
                let mut rng = trial_rng(seed, t as u64);
                let (force, energy, redraws) = realize_one(cfg, plan, measure, &mut rng);
                fslot.copy_from_slice(&force);
                *eslot = energy;
                redraws
            })
            .sum()
    };
    let redraws = if workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
        pool.install(run)
    };

    Ok(SampleEnsemble {
        cfg: cfg.clone(),
        plan: plan.clone(),
        trials,
        dim: d,
        forces,
        energies,
        seed,
        redraws,
        wall_time: start.elapsed(),
    })
}

/// One ensemble per `N`, with the plan recomputed per regime and an
/// independent derived seed per grid element.
#[allow(clippy::too_many_arguments)]
pub fn sweep_n(
    cfg: &SpaceConfig,
    k_const: f64,
    k_prime_const: f64,
    coupling_sign: i8,
    measure: &SourceMeasure,
    n_grid: &[u64],
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<SampleEnsemble>> {
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::MismatchedGrids(
            "N grid must be strictly ascending".into(),
        ));
    }
    n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let p = plan(cfg, k_const, k_prime_const, n, coupling_sign)?;
            run_ensemble(cfg, &p, measure, trials, derive_seed(seed, i as u64), workers)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::classify;
    use num_complex::Complex64;

    fn ball_setup(d: u32, delta: f64, n: u64, sign: i8) -> (SpaceConfig, RenormPlan, SourceMeasure) {
        let cfg = classify(d, delta).unwrap();
        let p = plan(&cfg, 1.0, 1.0, n, sign).unwrap();
        let m = SourceMeasure::uniform_ball(d, 1.0).unwrap();
        (cfg, p, m)
    }

    /// A hand-built plan with k = L = 1 for single-source identity checks.
    fn unit_plan(cfg: &SpaceConfig) -> RenormPlan {
        let beta = cfg.beta();
        RenormPlan {
            regime: cfg.regime,
            k_const: 1.0,
            k_prime_const: 1.0,
            n: 1,
            k_n: 1.0,
            l_n: 1.0,
            a_n: 1.0,
            b_n: beta,
            beta,
            q: 1,
            q_prime: if beta > 0.0 { 1 } else { -1 },
            sigma_n: None,
            sigma_p_n: None,
            log_drift: ((cfg.delta - 1.0).abs() <= 1e-12).then_some(0.0),
        }
    }

    #[test]
    fn single_source_exact_values() {
        // N=1, R=(1,0,0), k=1, delta=2, L=1: force = (1,0,0), energy = 1.
        let cfg = classify(3, 2.0).unwrap();
        let p = unit_plan(&cfg);
        let (force, energy) = realize_at_offset(&cfg, &p, &[1.0, 0.0, 0.0], &[0.0; 3]);
        assert!((force[0] - 1.0).abs() < 1e-15);
        assert!(force[1].abs() < 1e-15 && force[2].abs() < 1e-15);
        assert!((energy - 1.0).abs() < 1e-15);
        // The condition-built mean-field plan at N=1 has the same constants.
        let built = plan(&cfg, 1.0, 1.0, 1, 1).unwrap();
        assert!((built.a_n - 1.0).abs() < 1e-15);
        assert!((built.b_n - 1.0).abs() < 1e-15);

        // N=1, R=(2,0), delta=2, k=1, L=1: energy = 1/(1*2) = 0.5.
        let cfg = classify(2, 2.0).unwrap();
        let p = unit_plan(&cfg);
        let (_, energy) = realize_at_offset(&cfg, &p, &[2.0, 0.0], &[0.0; 2]);
        assert!((energy - 0.5).abs() < 1e-15);
    }

    #[test]
    fn delta_one_energy_gauge() {
        // N=1, delta=1, L=1, |R|=1: the contribution vanishes.
        let cfg = classify(2, 1.0).unwrap();
        let p = unit_plan(&cfg);
        let (_, energy) = realize_at_offset(&cfg, &p, &[1.0, 0.0], &[0.0; 2]);
        assert!(energy.abs() < 1e-15);
        // |R| = e at L = 1: energy = -ln e = -1 (for b_N = 1).
        let (_, energy) = realize_at_offset(&cfg, &p, &[std::f64::consts::E, 0.0], &[0.0; 2]);
        assert!((energy + 1.0).abs() < 1e-14);
    }

    #[test]
    fn determinism_across_worker_counts() {
        let (cfg, p, m) = ball_setup(3, 2.0, 50, 1);
        let a = run_ensemble(&cfg, &p, &m, 400, 42, 1).unwrap();
        let b = run_ensemble(&cfg, &p, &m, 400, 42, 8).unwrap();
        assert_eq!(a.forces, b.forces);
        assert_eq!(a.energies, b.energies);
        assert_eq!(a.redraws, b.redraws);
        // And a different seed actually changes the draw.
        let c = run_ensemble(&cfg, &p, &m, 400, 43, 1).unwrap();
        assert_ne!(a.forces, c.forces);
    }

    #[test]
    fn centered_ball_mean_force_is_zero() {
        let (cfg, p, m) = ball_setup(3, 2.0, 1000, 1);
        let ens = run_ensemble(&cfg, &p, &m, 10_000, 7, 0).unwrap();
        for j in 0..3 {
            let col = ens.force_component(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                / (col.len() - 1) as f64;
            let se = (var / col.len() as f64).sqrt();
            assert!(mean.abs() <= 4.0 * se, "component {j}: {mean} vs 4se {}", 4.0 * se);
        }
    }

    #[test]
    fn mean_energy_matches_quadrature_composition() {
        // d=3, delta=2, K = K' = 1: mean energy -> q' K' <U> = sign(k) * 3/2.
        let (cfg, p, m) = ball_setup(3, 2.0, 1000, 1);
        let ens = run_ensemble(&cfg, &p, &m, 10_000, 8, 0).unwrap();
        let mean = ens.energies.iter().sum::<f64>() / ens.trials as f64;
        let var = ens
            .energies
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / (ens.trials - 1) as f64;
        let se = (var / ens.trials as f64).sqrt();
        assert!(
            (mean - 1.5).abs() <= 4.0 * se.max(1e-3),
            "{mean} +- {se}"
        );
        let (_, pm, _) = ball_setup(3, 2.0, 1000, -1);
        let ens = run_ensemble(&cfg, &pm, &m, 10_000, 8, 0).unwrap();
        let mean = ens.energies.iter().sum::<f64>() / ens.trials as f64;
        assert!((mean + 1.5).abs() <= 4.0 * se.max(1e-3), "{mean}");
    }

    #[test]
    fn energy_sign_strict_for_repulsive_coupling() {
        let (cfg, p, m) = ball_setup(2, 2.5, 200, 1);
        let ens = run_ensemble(&cfg, &p, &m, 2000, 9, 0).unwrap();
        assert!(ens.energies.iter().all(|&e| e > 0.0));
        assert_eq!(ens.redraws, 0);
    }

    #[test]
    fn thermodynamic_energy_skew_follows_coupling_sign() {
        // d=1, delta=3 (alpha' = 1/2): the energy CF's imaginary part at
        // small z > 0 has the sign of q'.
        let (cfg, pp, m) = ball_setup(1, 3.0, 500, 1);
        let (_, pm, _) = ball_setup(1, 3.0, 500, -1);
        let ep = run_ensemble(&cfg, &pp, &m, 20_000, 10, 0).unwrap();
        let em = run_ensemble(&cfg, &pm, &m, 20_000, 10, 0).unwrap();
        for &z in &[0.2, 0.5, 1.0] {
            let imp: f64 = ep
                .energies
                .iter()
                .map(|&e| Complex64::new(0.0, z * e).exp().im)
                .sum::<f64>()
                / ep.trials as f64;
            let imm: f64 = em
                .energies
                .iter()
                .map(|&e| Complex64::new(0.0, z * e).exp().im)
                .sum::<f64>()
                / em.trials as f64;
            assert!(imp > 0.0, "z={z}: q'=+1 gives Im > 0, got {imp}");
            assert!(imm < 0.0, "z={z}: q'=-1 gives Im < 0, got {imm}");
        }
    }

    #[test]
    fn gradient_consistency_on_fixed_configurations() {
        // Central-difference energy gradient vs computed force, delta != 1.
        let (cfg, p, m) = ball_setup(3, 2.0, 50, 1);
        let h = 1e-5;
        let mut rng = trial_rng(99, 0);
        for _ in 0..20 {
            let positions = m.sample(50, &mut rng);
            let (force, _) = realize_at_offset(&cfg, &p, &positions, &[0.0; 3]);
            for j in 0..3 {
                let mut plusd = [0.0; 3];
                plusd[j] = h;
                let mut minusd = [0.0; 3];
                minusd[j] = -h;
                let (_, up) = realize_at_offset(&cfg, &p, &positions, &plusd);
                let (_, um) = realize_at_offset(&cfg, &p, &positions, &minusd);
                let grad = -(up - um) / (2.0 * h) / p.l_n;
                let scale = force.iter().map(|f| f * f).sum::<f64>().sqrt();
                assert!(
                    (grad - force[j]).abs() <= 1e-4 * scale.max(1e-6),
                    "component {j}: {grad} vs {}",
                    force[j]
                );
            }
        }
    }

    #[test]
    fn sweep_recomputes_plans_and_shrinks_mean_field_width() {
        let cfg = classify(3, 2.0).unwrap();
        let m = SourceMeasure::uniform_ball(3, 1.0).unwrap();
        let sweeps = sweep_n(&cfg, 1.0, 1.0, 1, &m, &[100, 1000, 10_000], 2000, 11, 0).unwrap();
        let mut prev = f64::INFINITY;
        for ens in &sweeps {
            let mut col = ens.force_component(0);
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let iqr = col[(0.75 * col.len() as f64) as usize]
                - col[(0.25 * col.len() as f64) as usize];
            assert!(iqr < prev, "IQR must shrink with N");
            prev = iqr;
        }
        // Ascending grid enforced.
        assert!(sweep_n(&cfg, 1.0, 1.0, 1, &m, &[100, 100], 10, 11, 0).is_err());
    }
}
