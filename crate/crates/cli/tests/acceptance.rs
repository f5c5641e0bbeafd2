//! Acceptance checks, one line per criterion.
//!
//! Runs with a plain `main` so every verdict is printed even under
//! `cargo test`. Pass criterion numbers as arguments to run a subset, for
//! example `cargo test -p cspsa-cli --test acceptance -- 1 3 9`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cspsa_bench::{calibrate_first_order_gain, run_ensemble, EnsembleResult};
use cspsa_cli::{execute, Application, ExperimentConfig, GainsSpec, OutputFormat};
use cspsa_core::estimators::{
    gradient_estimate, hessian_estimate, sample_perturbation, GainPreset, PerturbationVector,
};
use cspsa_core::linalg::{hermitize, HermitianMatrix};
use cspsa_core::optimizers::{postprocess_gidi, postprocess_spall, PreconditionerState};
use cspsa_core::{
    run, run_with_observer, Blocking, Counting, Field, FnOracle, GainSchedule, Method, OptimizerConfig, Oracle,
    PostProcessing, ProblemSpec, Shots,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

/// Relative error allowed for gradient estimates averaged over `GRADIENT_DRAWS`.
const GRADIENT_REL_TOL: f64 = 0.01;
const GRADIENT_DRAWS: usize = 100_000;
/// Absolute error allowed for Hessians averaged over every perturbation pair.
const HESSIAN_ABS_TOL: f64 = 1e-10;
/// Median final objective required on the noiseless quadratics.
const QUADRATIC_TARGET: f64 = 1e-6;
/// Reference tomography infidelities and the factor allowed around each.
const SGQT_COMPLEX_MEAN: f64 = 1.03e-4;
const SGQT_REAL_MEAN: f64 = 4.79e-4;
const SGQT_FACTOR: f64 = 2.0;
/// Allowed relative gap between the complex and real VQE mean energies.
const VQE_MEAN_GAP: f64 = 0.05;
const VQE_MEAN_CEILING: f64 = -6.0;
/// Fraction of the ground energy the smoke median must reach.
const VQE_SMOKE_FRACTION: f64 = 0.9;
const VQE_SMOKE_BUDGET: Duration = Duration::from_secs(300);
/// Reference GRAPE median, matched within one decade either way.
const GRAPE_COMPLEX_MEDIAN: f64 = 6.84e-6;
const GRAPE_DECADE: f64 = 10.0;
const GRAPE_SMOKE_TARGET: f64 = 1e-3;
const GRAPE_SMOKE_BUDGET: Duration = Duration::from_secs(120);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn random_vector(p: usize, field: Field, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..p)
        .map(|_| match field {
            Field::Real => c(rng.random_range(-1.0..1.0), 0.0),
            Field::Complex => c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        })
        .collect()
}

/// Random hermitian matrix (real symmetric in the real field).
fn random_hermitian(p: usize, field: Field, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(p, p, |_, _| match field {
        Field::Real => c(rng.random_range(-1.0..1.0), 0.0),
        Field::Complex => c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    });
    (&m + m.adjoint()).scale(0.5 * scale)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `f(z) = z†Hz + 2 Re(c†z)`; in the real field `f(θ) = θᵀHθ/2 + cᵀθ`.
/// Returns the oracle together with the analytic gradient at `z` and the
/// analytic Hessian (Wirtinger `∂²f/∂z*∂zᵀ` in the complex field).
fn quadratic(
    field: Field,
    h: DMatrix<Complex64>,
    lin: Vec<Complex64>,
    z: &[Complex64],
) -> (FnOracle, Vec<Complex64>, DMatrix<Complex64>) {
    let p = lin.len();
    let zv = nalgebra::DVector::from_column_slice(z);
    let hz = &h * &zv;
    let grad: Vec<Complex64> = (0..p).map(|i| hz[i] + lin[i]).collect();
    let (hh, ll) = (h.clone(), lin.clone());
    let f = move |x: &[Complex64]| {
        let xv = nalgebra::DVector::from_column_slice(x);
        let quad = (xv.adjoint() * &hh * &xv)[(0, 0)].re;
        let linear = dot(&ll, x).re;
        match field {
            Field::Real => 0.5 * quad + linear,
            Field::Complex => quad + 2.0 * linear,
        }
    };
    (FnOracle::new(p, f), grad, h)
}

/// Every perturbation vector of length `p` in the field's alphabet.
fn all_perturbations(p: usize, field: Field) -> Vec<PerturbationVector> {
    let alphabet: Vec<Complex64> = match field {
        Field::Real => vec![c(1.0, 0.0), c(-1.0, 0.0)],
        Field::Complex => vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)],
    };
    let mut out = vec![Vec::new()];
    for _ in 0..p {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |&a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(|e| PerturbationVector::new(field, e).unwrap()).collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_grad = 0.0f64;
    let mut worst_hess = 0.0f64;
    for field in [Field::Real, Field::Complex] {
        for p in 1..=4 {
            let h = random_hermitian(p, field, 2.0, &mut rng);
            let lin = random_vector(p, field, &mut rng);
            let z = random_vector(p, field, &mut rng);
            let (mut f, grad, _) = quadratic(field, h, lin, &z);
            let mut avg = vec![Complex64::default(); p];
            for _ in 0..GRADIENT_DRAWS {
                let delta = sample_perturbation(p, field, &mut rng);
                let g = gradient_estimate(&mut f, &z, 0.1, &delta).map_err(|e| e.to_string())?;
                for (a, gi) in avg.iter_mut().zip(&g.gradient) {
                    *a += gi / GRADIENT_DRAWS as f64;
                }
            }
            let diff: Vec<Complex64> = avg.iter().zip(&grad).map(|(a, g)| a - g).collect();
            worst_grad = worst_grad.max(norm(&diff) / norm(&grad));
        }
        for p in 1..=3 {
            let h = random_hermitian(p, field, 2.0, &mut rng);
            let lin = random_vector(p, field, &mut rng);
            let z = random_vector(p, field, &mut rng);
            let (mut f, _, hess) = quadratic(field, h, lin, &z);
            let deltas = all_perturbations(p, field);
            let weight = 1.0 / (deltas.len() * deltas.len()) as f64;
            let (b, b_tilde) = (0.1, 0.07);
            let mut avg = DMatrix::<Complex64>::zeros(p, p);
            for delta in &deltas {
                let g = gradient_estimate(&mut f, &z, b, delta).map_err(|e| e.to_string())?;
                for delta_tilde in &deltas {
                    let (raw, _) =
                        hessian_estimate(&mut f, &z, b, b_tilde, delta, delta_tilde, &g).map_err(|e| e.to_string())?;
                    avg += raw.scale(weight);
                }
            }
            let err = (&avg - &hess).iter().map(|x| x.norm()).fold(0.0, f64::max);
            let herm = hermitize(&avg).map_err(|e| e.to_string())?;
            let err_h = (herm.as_matrix() - &hess).iter().map(|x| x.norm()).fold(0.0, f64::max);
            worst_hess = worst_hess.max(err).max(err_h);
        }
    }
    check(
        worst_grad <= GRADIENT_REL_TOL && worst_hess <= HESSIAN_ABS_TOL,
        format!(
            "worst gradient relative error {worst_grad:.2e} (<= 1e-2), worst Hessian error {worst_hess:.2e} (<= 1e-10)"
        ),
    )
}

fn min_eig(m: &HermitianMatrix) -> Result<f64, String> {
    m.min_eigenvalue().map_err(|e| e.to_string())
}

fn hermiticity_error(m: &HermitianMatrix) -> f64 {
    let a = m.as_matrix();
    (a - a.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn criterion_2() -> Outcome {
    const INPUTS: usize = 10_000;
    const CHAIN: u64 = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut violations = Vec::new();
    let mut spall_margin = f64::INFINITY;
    let mut gidi_margin = f64::INFINITY;
    let mut processed = 0;
    while processed < INPUTS {
        let p = rng.random_range(1..=8);
        let field = if rng.random_bool(0.5) { Field::Real } else { Field::Complex };
        let eps_spall = 10f64.powf(rng.random_range(-6.0..-1.0));
        let eps_gidi = 10f64.powf(rng.random_range(-6.0..-1.0));
        let mut spall = PreconditionerState::matrix(p);
        let mut gidi = PreconditionerState::matrix(p);
        for k in 1..=CHAIN {
            let scale = 10f64.powf(rng.random_range(-3.0..3.0));
            let raw = random_hermitian(p, field, scale, &mut rng);
            // Rounding slack proportional to the magnitudes involved.
            let slack = 1e-12 * (1.0 + scale * p as f64);

            let out = postprocess_spall(&raw, &mut spall, k, eps_spall).map_err(|e| e.to_string())?;
            let lo = min_eig(&out)?;
            spall_margin = spall_margin.min(lo - eps_spall);
            if lo < eps_spall - slack || hermiticity_error(&out) > slack {
                violations.push(format!("spall p={p} k={k}: min eigenvalue {lo:e} < {eps_spall:e}"));
            }

            let previous = match gidi.memory() {
                cspsa_core::optimizers::Preconditioner::Matrix(m) => min_eig(m)?,
                cspsa_core::optimizers::Preconditioner::Scalar(s) => *s,
            };
            let out = postprocess_gidi(&raw, &mut gidi, k, eps_gidi).map_err(|e| e.to_string())?;
            let kf = k as f64;
            let bound = kf / (kf + 1.0) * previous + eps_gidi.sqrt() / (kf + 1.0);
            let lo = min_eig(&out)?;
            gidi_margin = gidi_margin.min(lo - bound);
            if lo < bound - slack || lo < eps_gidi.sqrt() - slack || hermiticity_error(&out) > slack {
                violations.push(format!("gidi p={p} k={k}: min eigenvalue {lo:e} < blend bound {bound:e}"));
            }
            processed += 1;
        }
    }

    let mut not_identity = 0.0f64;
    for p in 1..=8 {
        let mut state = PreconditionerState::matrix(p);
        for k in 1..=5 {
            let out = postprocess_gidi(&DMatrix::zeros(p, p), &mut state, k, 1e-4).map_err(|e| e.to_string())?;
            let m = out.as_matrix();
            let s = m[(0, 0)];
            let dev = (m - DMatrix::<Complex64>::identity(p, p) * s).iter().map(|x| x.norm()).fold(0.0, f64::max);
            not_identity = not_identity.max(dev);
        }
    }
    let detail = format!(
        "{processed} inputs, {} violations, min spall margin {spall_margin:.2e}, min gidi margin {gidi_margin:.2e}, \
         zero input deviation from a multiple of I {not_identity:.1e}",
        violations.len()
    );
    check(violations.is_empty() && not_identity <= 1e-14, detail)
}

/// `|z − c|²` with the Gaussian overlap `exp(−|a − b|²)` as its fidelity.
fn quadratic_bowl(target: Vec<Complex64>) -> FnOracle {
    let p = target.len();
    let f = move |z: &[Complex64]| z.iter().zip(&target).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    FnOracle::new(p, f.clone()).with_exact(f).with_fidelity(|a: &[Complex64], b: &[Complex64]| {
        (-a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()).exp()
    })
}

/// The five method variants.
fn variants() -> [(Method, bool); 5] {
    [
        (Method::FirstOrder, false),
        (Method::SecondOrder, false),
        (Method::QuantumNatural, false),
        (Method::SecondOrder, true),
        (Method::QuantumNatural, true),
    ]
}

fn label(method: Method, scalar: bool, field: Field) -> String {
    OptimizerConfig::new(method, field).with_scalar(scalar).label()
}

fn criterion_3() -> Outcome {
    const K: u64 = 7;
    let mut failures = Vec::new();
    let mut cases = 0;
    for field in [Field::Real, Field::Complex] {
        for (method, scalar) in variants() {
            for n_r in [1usize, 3] {
                let (obj, fid) = match method {
                    Method::FirstOrder => (2, 0),
                    Method::SecondOrder => (4, 0),
                    Method::QuantumNatural => (2, 4),
                };
                let target = vec![c(0.3, -0.2); 3];
                let mut oracle = Counting::new(quadratic_bowl(target));
                let config = OptimizerConfig::new(method, field)
                    .with_scalar(scalar)
                    .with_gains(GainSchedule::fixed())
                    .with_resamples(n_r)
                    .with_iterations(K)
                    .with_seed(5);
                let z0 = vec![Complex64::default(); 3];
                let trace = run(&mut oracle, &config, &z0).map_err(|e| e.to_string())?;
                let budget = oracle.budget();
                let per_iter_ok = trace
                    .records
                    .iter()
                    .all(|r| r.objective_evals == r.k * obj * n_r as u64 && r.fidelity_evals == r.k * fid * n_r as u64);
                let total_ok =
                    budget.objective_evals == K * obj * n_r as u64 && budget.fidelity_evals == K * fid * n_r as u64;
                if !(per_iter_ok && total_ok && trace.records.len() == K as usize) {
                    failures.push(format!(
                        "{} N_R={n_r}: counted {}+{} over {K} iterations",
                        label(method, scalar, field),
                        budget.objective_evals,
                        budget.fidelity_evals
                    ));
                }
                cases += 1;
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{cases} method/field/N_R combinations match 2, 4 and 2+4 evaluations per estimate")
    } else {
        failures.join("; ")
    };
    check(failures.is_empty(), detail)
}

fn criterion_4() -> Outcome {
    const SEEDS: u64 = 50;
    const ITERATIONS: u64 = 2000;
    const P: usize = 4;
    let mut rows = Vec::new();
    let mut ok = true;
    let mut collinearity_failures = 0usize;
    for field in [Field::Real, Field::Complex] {
        for (method, scalar) in variants() {
            let mut finals = Vec::new();
            for seed in 0..SEEDS {
                let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
                let target = random_vector(P, field, &mut rng);
                let z0 = random_vector(P, field, &mut rng);
                let mut oracle = quadratic_bowl(target);
                let base = GainSchedule::fixed();
                let a =
                    calibrate_first_order_gain(&mut oracle, std::slice::from_ref(&z0), field, &base, 0.1, 10, &mut rng)
                        .map_err(|e| e.to_string())?;
                let gains = if method == Method::FirstOrder { base.with_a(a) } else { base.with_a(a).with_a_bar(a) };
                // The scalar curvature has zero mean under independent
                // perturbations, so its inertia average must be taken over
                // magnitudes. Only the gidi pipeline does that.
                let postprocessing = if scalar { PostProcessing::Gidi } else { PostProcessing::Spall };
                let config = OptimizerConfig::new(method, field)
                    .with_scalar(scalar)
                    .with_gains(gains)
                    .with_postprocessing(postprocessing)
                    .with_iterations(ITERATIONS)
                    .with_seed(seed);
                let trace = run_with_observer(&mut oracle, &config, &z0, |event| {
                    if !scalar {
                        return;
                    }
                    let step: Vec<Complex64> = event.candidate.iter().zip(event.previous).map(|(n, o)| n - o).collect();
                    let gg = dot(event.gradient, event.gradient).re;
                    if gg == 0.0 {
                        if norm(&step) != 0.0 {
                            collinearity_failures += 1;
                        }
                        return;
                    }
                    let lambda = -dot(event.gradient, &step).re / gg;
                    let residual: Vec<Complex64> =
                        step.iter().zip(event.gradient).map(|(s, g)| s + g * lambda).collect();
                    // `candidate − previous` carries rounding of order ulp(|z|).
                    let floor = 1e-13 * (norm(event.previous) + norm(event.candidate));
                    let aligned = norm(&residual) <= 1e-9 * norm(&step) + floor;
                    if !aligned || !(lambda > 0.0 || norm(&step) <= floor) {
                        collinearity_failures += 1;
                    }
                })
                .map_err(|e| e.to_string())?;
                finals.push(trace.final_value().unwrap_or(f64::INFINITY));
            }
            let m = median(&finals);
            ok &= m < QUADRATIC_TARGET;
            rows.push(format!("{} {m:.1e}", label(method, scalar, field)));
        }
    }
    ok &= collinearity_failures == 0;
    check(
        ok,
        format!(
            "median final |z-c|^2 over {SEEDS} seeds (< 1e-6): {}; non-collinear scalar steps: {collinearity_failures}",
            rows.join(", ")
        ),
    )
}

fn experiment(app: Application) -> ExperimentConfig {
    ExperimentConfig { application: Some(app), format: Some(OutputFormat::Csv), ..Default::default() }
}

fn ensemble(config: &ExperimentConfig) -> Result<EnsembleResult, String> {
    let experiment = config.resolve(None).map_err(|e| e.to_string())?;
    run_ensemble(&experiment.ensemble).map_err(|e| e.to_string())
}

fn final_values(result: &EnsembleResult, k: u64) -> Vec<f64> {
    result.values_at(k)
}

fn criterion_5() -> Outcome {
    let mut stats = Vec::new();
    for field in [Field::Complex, Field::Real] {
        let config = ExperimentConfig {
            qubits: Some(6),
            shots: Some(Shots::Finite(20_000)),
            gains: Some(GainsSpec::Preset(GainPreset::Asymptotic)),
            iterations: Some(5000),
            runs: Some(100),
            field: Some(field),
            ..experiment(Application::Sgqt)
        };
        let result = ensemble(&config)?;
        let v = final_values(&result, 5000);
        stats.push((mean(&v), median(&v), result.excluded));
    }
    let (c_mean, c_median, c_excl) = stats[0];
    let (r_mean, r_median, r_excl) = stats[1];
    let within = |x: f64, target: f64| x >= target / SGQT_FACTOR && x <= target * SGQT_FACTOR;
    check(
        within(c_mean, SGQT_COMPLEX_MEAN) && within(r_mean, SGQT_REAL_MEAN) && c_mean < r_mean && c_median < r_median,
        format!(
            "CSPSA mean {c_mean:.3e} (target 1.03e-4 within x2), SPSA mean {r_mean:.3e} (target 4.79e-4 within x2), \
             medians {c_median:.3e} < {r_median:.3e}; excluded runs {c_excl}+{r_excl}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let full = |field: Field| ExperimentConfig {
        qubits: Some(10),
        layers: Some(1),
        shots: Some(Shots::Finite(20_000)),
        j: Some(1.0),
        h: Some(0.3),
        periodic: Some(true),
        gains: Some(GainsSpec::Preset(GainPreset::Standard)),
        calibrate: Some(true),
        resampling: Some(5),
        iterations: Some(700),
        runs: Some(30),
        field: Some(field),
        ..experiment(Application::Vqe)
    };
    let ground = ProblemSpec::vqe(10, 1, Shots::Exact).exact_minimum().map_err(|e| e.to_string())?;
    let mut means = Vec::new();
    let mut lowest = f64::INFINITY;
    for field in [Field::Complex, Field::Real] {
        let result = ensemble(&full(field))?;
        for trace in result.completed() {
            for r in &trace.records {
                lowest = lowest.min(r.value);
            }
        }
        means.push((mean(&final_values(&result, 700)), median(&final_values(&result, 700))));
    }
    let (c_mean, c_med) = means[0];
    let (r_mean, r_med) = means[1];
    let gap = (c_mean - r_mean).abs() / c_mean.abs().max(r_mean.abs());
    let bounded = lowest >= ground - 1e-9;
    let full_ok = gap <= VQE_MEAN_GAP && c_mean < VQE_MEAN_CEILING && r_mean < VQE_MEAN_CEILING && bounded;

    let start = Instant::now();
    let smoke_ground = ProblemSpec::vqe(4, 1, Shots::Exact).exact_minimum().map_err(|e| e.to_string())?;
    let mut smoke_medians = Vec::new();
    for field in [Field::Complex, Field::Real] {
        let config = ExperimentConfig {
            qubits: Some(4),
            shots: Some(Shots::Exact),
            iterations: Some(200),
            runs: Some(20),
            resampling: Some(5),
            field: Some(field),
            ..experiment(Application::Vqe)
        };
        smoke_medians.push(median(&final_values(&ensemble(&config)?, 200)));
    }
    let smoke_time = start.elapsed();
    let smoke_target = VQE_SMOKE_FRACTION * smoke_ground;
    let smoke_ok = smoke_medians.iter().all(|&m| m <= smoke_target) && smoke_time < VQE_SMOKE_BUDGET;

    check(
        full_ok && smoke_ok,
        format!(
            "10 qubits: CSPSA mean {c_mean:.3} median {c_med:.3}, SPSA mean {r_mean:.3} median {r_med:.3}, \
             gap {:.1}% (<= 5%), both < -6.0, lowest recorded {lowest:.3} >= ground {ground:.3} [{}]; \
             4-qubit smoke: medians CSPSA {:.3} SPSA {:.3} vs required <= {smoke_target:.3} (ground {smoke_ground:.3}), \
             {:.1}s [{}]",
            100.0 * gap,
            if full_ok { "pass" } else { "fail" },
            smoke_medians[0],
            smoke_medians[1],
            smoke_time.as_secs_f64(),
            if smoke_ok { "pass" } else { "fail" },
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut medians = Vec::new();
    for field in [Field::Complex, Field::Real] {
        let config = ExperimentConfig {
            qubits: Some(5),
            slices: Some(25),
            shots: Some(Shots::Finite(1 << 13)),
            gains: Some(GainsSpec::Preset(GainPreset::Static)),
            iterations: Some(1000),
            runs: Some(100),
            field: Some(field),
            ..experiment(Application::Grape)
        };
        medians.push(median(&final_values(&ensemble(&config)?, 1000)));
    }
    let (c_med, r_med) = (medians[0], medians[1]);
    let full_ok =
        (GRAPE_COMPLEX_MEDIAN / GRAPE_DECADE..=GRAPE_COMPLEX_MEDIAN * GRAPE_DECADE).contains(&c_med) && c_med < r_med;

    let start = Instant::now();
    let smoke = ExperimentConfig {
        qubits: Some(2),
        slices: Some(5),
        shots: Some(Shots::Finite(1 << 13)),
        gains: Some(GainsSpec::Preset(GainPreset::Static)),
        iterations: Some(1000),
        runs: Some(100),
        ..experiment(Application::Grape)
    };
    let smoke_med = median(&final_values(&ensemble(&smoke)?, 1000));
    let smoke_time = start.elapsed();
    let smoke_ok = smoke_med < GRAPE_SMOKE_TARGET && smoke_time < GRAPE_SMOKE_BUDGET;

    check(
        full_ok && smoke_ok,
        format!(
            "5 qubits M=25: CSPSA median {c_med:.3e} (required within [6.84e-7, 6.84e-5]), SPSA median {r_med:.3e} \
             (CSPSA must be lower) [{}]; 2 qubits M=5: CSPSA median {smoke_med:.3e} (< 1e-3) in {:.1}s [{}]",
            if full_ok { "pass" } else { "fail" },
            smoke_time.as_secs_f64(),
            if smoke_ok { "pass" } else { "fail" },
        ),
    )
}

fn criterion_8() -> Outcome {
    const SEEDS: u64 = 20;
    const ITERATIONS: u64 = 500;
    let problems = [ProblemSpec::vqe(3, 1, Shots::Exact), ProblemSpec::sgqt(2, Shots::Exact)];
    let mut runs = 0;
    let mut increases = Vec::new();
    let mut rejections = 0usize;
    for problem in &problems {
        for field in [Field::Real, Field::Complex] {
            for (method, scalar) in variants() {
                for seed in 0..SEEDS {
                    let mut inst = problem.instantiate(seed, field).map_err(|e| e.to_string())?;
                    let config = OptimizerConfig::new(method, field)
                        .with_scalar(scalar)
                        .with_gains(GainSchedule::standard().with_a(0.2).with_a_bar(0.2))
                        .with_blocking(Blocking::Fixed(0.0))
                        .with_iterations(ITERATIONS)
                        .with_seed(seed);
                    let start = inst.oracle.objective(&inst.z0).map_err(|e| e.to_string())?;
                    let trace = run(&mut inst.oracle, &config, &inst.z0).map_err(|e| e.to_string())?;
                    let mut last = start;
                    for r in &trace.records {
                        if r.value > last {
                            increases.push(format!(
                                "{} {} seed {seed} k={}",
                                problem.name(),
                                label(method, scalar, field),
                                r.k
                            ));
                            break;
                        }
                        if !r.accepted {
                            rejections += 1;
                        }
                        last = r.value;
                    }
                    runs += 1;
                }
            }
        }
    }
    let detail = if increases.is_empty() {
        format!("{runs} runs of {ITERATIONS} iterations non-increasing ({rejections} updates blocked)")
    } else {
        format!("{} runs increased, first: {}", increases.len(), increases[0])
    };
    check(increases.is_empty(), detail)
}

fn criterion_9() -> Outcome {
    let configs = [
        ExperimentConfig { qubits: Some(3), runs: Some(6), iterations: Some(60), ..experiment(Application::Sgqt) },
        ExperimentConfig {
            qubits: Some(3),
            shots: Some(Shots::Finite(500)),
            method: Some(Method::SecondOrder),
            postproc: Some(PostProcessing::Gidi),
            blocking: Some(Blocking::auto()),
            resampling: Some(2),
            runs: Some(5),
            iterations: Some(40),
            ..experiment(Application::Vqe)
        },
        ExperimentConfig {
            qubits: Some(2),
            slices: Some(3),
            method: Some(Method::QuantumNatural),
            scalar: Some(true),
            field: Some(Field::Real),
            runs: Some(5),
            iterations: Some(40),
            ..experiment(Application::Grape)
        },
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut identical = 0;
    let mut mismatches = Vec::new();
    for (i, config) in configs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (rep, threads) in [1usize, 1, 3].into_iter().enumerate() {
            let out = dir.path().join(format!("{i}-{rep}"));
            let cfg = ExperimentConfig { out: Some(out), threads: Some(threads), seed: Some(11), ..config.clone() };
            let experiment = cfg.resolve(None).map_err(|e| e.to_string())?;
            let report = execute(&experiment).map_err(|e| e.to_string())?;
            let path = report.statistics_path.ok_or("no CSV written")?;
            outputs.push(std::fs::read(path).map_err(|e| e.to_string())?);
        }
        if outputs.windows(2).all(|w| w[0] == w[1]) {
            identical += 1;
        } else {
            mismatches.push(config.application.map(|a| format!("{a:?}")).unwrap_or_default());
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "{identical}/{} experiments produced identical CSV bytes on repeat and across thread counts {}",
            configs.len(),
            mismatches.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "estimator unbiasedness", criterion_1),
        (2, "post-processing positive definiteness", criterion_2),
        (3, "evaluation accounting", criterion_3),
        (4, "noiseless convergence", criterion_4),
        (5, "SGQT reproduction", criterion_5),
        (6, "VQE", criterion_6),
        (7, "GRAPE", criterion_7),
        (8, "blocking monotonicity", criterion_8),
        (9, "determinism", criterion_9),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS in {secs:.1}s: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL in {secs:.1}s: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
