use cspsa_core::estimators::{gradient_estimate, sample_perturbation};
use cspsa_core::{rng_stream, Field, GainSchedule, Oracle, ProblemSpec};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random stream used for calibration probes.
const CALIBRATION_STREAM: u64 = 3;

/// Settings for [`calibrate_for_problem`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Desired sup-norm of the first update.
    pub target_step: f64,
    /// Gradient estimates per problem instance.
    pub probes: usize,
    /// Number of problem instances whose starting points are probed.
    pub instances: usize,
}

impl Default for Calibration {
    fn default() -> Self {
        Self { target_step: 0.1, probes: 10, instances: 5 }
    }
}

fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn mean_sup_norm<O: Oracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    starts: &[Vec<Complex64>],
    field: Field,
    b1: f64,
    n_probe: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_probe == 0 || starts.is_empty() {
        return Err(Error::Calibration("need at least one probe and one starting point".into()));
    }
    let mut total = 0.0;
    for i in 0..n_probe {
        let z = &starts[i % starts.len()];
        let delta = sample_perturbation(z.len(), field, rng);
        total += sup_norm(&gradient_estimate(oracle, z, b1, &delta)?.gradient);
    }
    Ok(total / n_probe as f64)
}

fn gain_from_norm(target_step: f64, mean_norm: f64, gains: &GainSchedule) -> Result<f64> {
    if !(target_step > 0.0 && target_step.is_finite()) {
        return Err(Error::Calibration(format!("target step must be positive, got {target_step}")));
    }
    if !(mean_norm > 0.0 && mean_norm.is_finite()) {
        return Err(Error::Calibration(format!("mean gradient sup-norm is {mean_norm}")));
    }
    Ok(target_step * (1.0 + gains.offset).powf(gains.s) / mean_norm)
}

/// Step gain `a` such that the first first-order update `a_1 g` has
/// sup-norm `target_step` on average: `a = target · (1 + A)^s / mean ‖g‖∞`,
/// every probe taken with `b_1`. The probes cycle through `starts`.
pub fn calibrate_first_order_gain<O: Oracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    starts: &[Vec<Complex64>],
    field: Field,
    gains: &GainSchedule,
    target_step: f64,
    n_probe: usize,
    rng: &mut R,
) -> Result<f64> {
    let b1 = gains.gains_at(1)?.b;
    let norm = mean_sup_norm(oracle, starts, field, b1, n_probe, rng)?;
    gain_from_norm(target_step, norm, gains)
}

/// Calibrates against `settings.instances` instances of `problem` (seeds
/// `base_seed, base_seed + 1, …`), each probed at its own starting point.
pub fn calibrate_for_problem(
    problem: &ProblemSpec,
    field: Field,
    gains: &GainSchedule,
    settings: &Calibration,
    base_seed: u64,
) -> Result<f64> {
    if settings.instances == 0 {
        return Err(Error::Calibration("need at least one instance".into()));
    }
    let b1 = gains.gains_at(1)?.b;
    let mut rng = rng_stream(base_seed, CALIBRATION_STREAM);
    let mut total = 0.0;
    for i in 0..settings.instances as u64 {
        let mut inst = problem.instantiate(base_seed.wrapping_add(i), field)?;
        let starts = std::slice::from_ref(&inst.z0);
        total += mean_sup_norm(&mut inst.oracle, starts, field, b1, settings.probes, &mut rng)?;
    }
    gain_from_norm(settings.target_step, total / settings.instances as f64, gains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use cspsa_core::FnOracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ratio_example() {
        // f(θ) = 2θ on one coordinate: every gradient estimate has sup-norm 2.
        let mut f = FnOracle::new(1, |z| 2.0 * z[0].re);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let starts = vec![vec![Complex64::new(0.3, 0.0)]];
        let a =
            calibrate_first_order_gain(&mut f, &starts, Field::Real, &GainSchedule::fixed(), 0.1, 7, &mut rng).unwrap();
        assert_abs_diff_eq!(a, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_and_rejects_flat_objectives() {
        let run = |seed| {
            let mut f = FnOracle::new(3, |z| z.iter().map(|w| w.norm_sqr() * 1.5).sum());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let starts = vec![vec![Complex64::new(1.0, -0.5); 3]];
            calibrate_first_order_gain(&mut f, &starts, Field::Complex, &GainSchedule::standard(), 0.1, 9, &mut rng)
                .unwrap()
        };
        assert_eq!(run(4), run(4));
        let mut flat = FnOracle::new(2, |_| 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let starts = vec![vec![Complex64::default(); 2]];
        let err = calibrate_first_order_gain(&mut flat, &starts, Field::Real, &GainSchedule::fixed(), 0.1, 5, &mut rng);
        assert!(matches!(err, Err(Error::Calibration(_))));
    }

    #[test]
    fn problem_calibration_is_reproducible() {
        let p = ProblemSpec::sgqt(2, cspsa_core::Shots::Exact);
        let cal = Calibration::default();
        let a = calibrate_for_problem(&p, Field::Complex, &GainSchedule::standard(), &cal, 3).unwrap();
        let b = calibrate_for_problem(&p, Field::Complex, &GainSchedule::standard(), &cal, 3).unwrap();
        assert_eq!(a, b);
        assert!(a > 0.0);
    }
}
