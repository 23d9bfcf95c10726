//! The acceptance suite: seven pinned checks, each comparing a fast path
//! against an independent reference. Shared by `openqs verify` and the
//! `acceptance` test target.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::evolve::{convergence_study, evolve, reverse, EvolveOptions, StepOptions};
use crate::fixtures::{
    gaussian_packet, harmonic_ground_state, random_composite, random_localized_composite, random_rough_composite,
    two_peak_gaussian,
};
use crate::hamiltonian::{HamiltonianSpec, Preset};
use crate::hilbert_measure::{covariance_residual, empirical_covariance, sample_states, track_evolution, GaussianStateMeasure};
use crate::io::density_csv;
use crate::lattice::make_grid;
use crate::linalg;
use crate::oracle::{partial_trace_dense, ExactPropagator};
use crate::states::{chapman_kolmogorov_check, momentum_density, product_state, reduced_density, CompositeState};
use crate::unravel::{exhaustive_density, mc_density_estimate, Representation, Streams};
use crate::wigner::{joint_wigner, marginalize_wigner, wigner_from_density, wigner_half_step, JOINT_ENTRY_CAP};

/// Pass thresholds of every criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub trotter_order: f64,
    pub trotter_order_width: f64,
    pub exhaustive: f64,
    pub mc_slope: f64,
    pub mc_slope_width: f64,
    pub wigner_two_path: f64,
    pub wigner_marginal: f64,
    pub partial_trace: f64,
    pub invariants: f64,
    pub gaussian_band: f64,
    pub chapman_kolmogorov: f64,
    pub unitarity: f64,
    pub wigner_mass: f64,
    pub overlap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            trotter_order: 1.0,
            trotter_order_width: 0.2,
            exhaustive: 1e-12,
            mc_slope: -0.5,
            mc_slope_width: 0.15,
            wigner_two_path: 1e-7,
            wigner_marginal: 1e-8,
            partial_trace: 1e-12,
            invariants: 1e-10,
            gaussian_band: 5.0,
            chapman_kolmogorov: 1e-10,
            unitarity: 1e-10,
            wigner_mass: 1e-8,
            overlap: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    /// `criterion=<id> status=<pass|fail> seconds=<s> name=<name> detail=<...>`
    pub fn line(&self) -> String {
        format!(
            "criterion={} status={} seconds={:.2} name={} detail={}",
            self.id,
            if self.passed { "pass" } else { "fail" },
            self.seconds,
            self.name,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 7] = [
    (1, "trotter_convergence"),
    (2, "unraveling"),
    (3, "wigner_marginalization"),
    (4, "partial_trace"),
    (5, "gaussian_measure"),
    (6, "chapman_kolmogorov"),
    (7, "structural_invariants"),
];

pub fn run_criterion(id: u8, tol: &Tolerances) -> CriterionReport {
    let start = Instant::now();
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
    let outcome = match id {
        1 => trotter_convergence(tol),
        2 => unraveling(tol),
        3 => wigner_marginalization(tol),
        4 => partial_trace(tol),
        5 => gaussian_measure(tol),
        6 => chapman_kolmogorov(tol),
        7 => structural_invariants(tol),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Runs the selected criteria (all when `only` is empty) in order.
pub fn run_all(tol: &Tolerances, only: &[u8]) -> Vec<CriterionReport> {
    CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.0)).map(|c| run_criterion(c.0, tol)).collect()
}

/// Coupled oscillators on `n × n` grids, system displaced from the origin,
/// environment in its ground state.
pub fn reference_scenario(n: usize, lambda: f64) -> Result<(HamiltonianSpec, CompositeState)> {
    let g = make_grid(n, 12.0, 0.0)?;
    let preset = Preset::CoupledHarmonic { m1: 1.0, m2: 1.0, omega1: 1.0, omega2: 1.0, lambda };
    let spec = preset.build(g, g)?;
    let psi1 = gaussian_packet(&g, 1.0, 0.5f64.sqrt(), 0.0);
    let psi2 = harmonic_ground_state(&g, 1.0, 1.0);
    Ok((spec, product_state(&g, psi1.view(), &g, psi2.view())?))
}

type Outcome = Result<(bool, String)>;

fn within(x: f64, center: f64, width: f64) -> bool {
    (x - center).abs() <= width
}

fn trotter_convergence(tol: &Tolerances) -> Outcome {
    let (spec, phi0) = reference_scenario(32, 0.1)?;
    let study = convergence_study(&phi0, &spec, 1.0, &[64, 128, 256, 512], StepOptions::default())?;
    let errors: Vec<String> = study.rows.iter().map(|r| format!("{:.3e}", r.l2_error)).collect();
    let ok = within(study.fitted_order, tol.trotter_order, tol.trotter_order_width) && study.is_monotone(0.0);
    Ok((ok, format!("order={:.4};errors=[{}]", study.fitted_order, errors.join(" "))))
}

fn evolved_reference(n: usize, lambda: f64, t: f64, steps: usize) -> Result<CompositeState> {
    let (spec, phi0) = reference_scenario(n, lambda)?;
    Ok(evolve(&phi0, &spec, t, steps, EvolveOptions::default())?.state)
}

/// RMS Hilbert–Schmidt error of the sampled estimate over `seeds` streams.
fn mc_rms_error(phi: &CompositeState, n: usize, seeds: u64) -> Result<f64> {
    let exact = reduced_density(phi);
    let mut acc = 0.0;
    for seed in 0..seeds {
        let est = mc_density_estimate(phi, &Streams::new(1000 + seed), 0, n, Representation::Position)?;
        acc += est.estimate.hs_distance(&exact)?.powi(2);
    }
    Ok((acc / seeds as f64).sqrt())
}

fn unraveling(tol: &Tolerances) -> Outcome {
    let phi = evolved_reference(32, 0.5, 2.0, 200)?;
    let exact = reduced_density(&phi);
    let mut worst_exhaustive = 0.0f64;
    for repr in [Representation::Position, Representation::Momentum] {
        worst_exhaustive = worst_exhaustive.max(exhaustive_density(&phi, repr).hs_distance(&exact)?);
    }
    let ns = [100usize, 1000, 10_000];
    let rms = ns.iter().map(|&n| mc_rms_error(&phi, n, 16)).collect::<Result<Vec<f64>>>()?;
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = rms.iter().map(|e| e.ln()).collect();
    let slope = linalg::least_squares_slope(&x, &y);
    let ok = worst_exhaustive <= tol.exhaustive && within(slope, tol.mc_slope, tol.mc_slope_width);
    Ok((ok, format!("exhaustive={worst_exhaustive:.3e};slope={slope:.4};rms=[{:.3e} {:.3e} {:.3e}]", rms[0], rms[1], rms[2])))
}

/// Worst two-path gap and worst marginal error for one composite state.
pub fn wigner_checks(phi: &CompositeState) -> Result<(f64, f64)> {
    let rho = reduced_density(phi);
    let direct = wigner_from_density(&rho)?;
    let via_joint = marginalize_wigner(&joint_wigner(phi, JOINT_ENTRY_CAP)?);
    let (pq, pp) = direct.marginals();
    let dq = pq.iter().zip(rho.diagonal().iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let dp = pp.iter().zip(momentum_density(&rho).iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((direct.max_abs_diff(&via_joint), dq.max(dp)))
}

fn wigner_marginalization(tol: &Tolerances) -> Outcome {
    let g = make_grid(32, 12.0, 0.0)?;
    let product = {
        let a = gaussian_packet(&g, -1.0, 0.8, 0.5);
        let b = gaussian_packet(&g, 0.7, 1.0, -0.3);
        product_state(&g, a.view(), &g, b.view())?
    };
    let entangled = two_peak_gaussian(&g, &g, 4.0, 0.7);
    let evolved = evolved_reference(32, 0.5, 1.0, 100)?;
    let mut detail = Vec::new();
    let mut ok = true;
    for (label, phi) in [("product", &product), ("entangled", &entangled), ("evolved", &evolved)] {
        let (two_path, marginal) = wigner_checks(phi)?;
        ok &= two_path <= tol.wigner_two_path && marginal <= tol.wigner_marginal;
        detail.push(format!("{label}:two_path={two_path:.3e},marginal={marginal:.3e}"));
    }
    Ok((ok, detail.join(";")))
}

fn partial_trace(tol: &Tolerances) -> Outcome {
    let g1 = make_grid(16, 10.0, 0.0)?;
    let g2 = make_grid(16, 8.0, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut worst_inv) = (0.0f64, 0.0f64);
    for trial in 0..100 {
        let phi = if trial % 2 == 0 { random_rough_composite(&g1, &g2, &mut rng) } else { random_composite(&g1, &g2, &mut rng) };
        let kernel = reduced_density(&phi);
        let dense = partial_trace_dense(&phi)?;
        worst = worst.max(kernel.hs_distance(&dense)?);
        kernel.validate()?;
        worst_inv = worst_inv
            .max(kernel.hermitian_residual())
            .max((kernel.trace() - 1.0).abs())
            .max(-kernel.min_eigenvalue()?);
    }
    Ok((worst <= tol.partial_trace && worst_inv <= tol.invariants, format!("max_diff={worst:.3e};invariants={worst_inv:.3e}")))
}

fn gaussian_measure(tol: &Tolerances) -> Outcome {
    let n_samples = 10_000usize;
    let band = tol.gaussian_band / (n_samples as f64).sqrt();
    let (spec, phi0) = reference_scenario(32, 0.5)?;
    let run = evolve(&phi0, &spec, 3.0, 300, EvolveOptions { snapshot_every: Some(50), ..Default::default() })?;
    let trajectory: Vec<_> = run
        .snapshots
        .iter()
        .map(|s| (s.time, reduced_density(s.state.as_ref().expect("small grid keeps states"))))
        .collect();
    let rows = track_evolution(&trajectory, &Streams::new(5), n_samples)?;
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let purity_drop = rows.first().map(|r| r.purity_exact).unwrap_or(1.0) - rows.last().map(|r| r.purity_exact).unwrap_or(1.0);

    // the two measure representations of the final reduced state
    let rho = reduced_density(&run.state);
    let mc = mc_density_estimate(&run.state, &Streams::new(6), 0, n_samples, Representation::Position)?;
    let gauss = empirical_covariance(&sample_states(&GaussianStateMeasure::from_density(&rho)?, &Streams::new(7), 0, n_samples))?;
    let cross = covariance_residual(&gauss, &mc.estimate)?;
    let ok = worst <= band && cross <= 2.0 * band && purity_drop > 0.01;
    Ok((ok, format!("worst_residual={worst:.3e};band={band:.3e};cross={cross:.3e};purity_drop={purity_drop:.3}")))
}

fn chapman_kolmogorov(tol: &Tolerances) -> Outcome {
    let g1 = make_grid(32, 12.0, 0.0)?;
    let g2 = make_grid(16, 10.0, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        worst = worst.max(chapman_kolmogorov_check(&random_composite(&g1, &g2, &mut rng)));
        worst = worst.max(chapman_kolmogorov_check(&random_rough_composite(&g1, &g2, &mut rng)));
    }
    worst = worst.max(chapman_kolmogorov_check(&evolved_reference(32, 0.5, 2.0, 200)?));
    Ok((worst <= tol.chapman_kolmogorov, format!("max_deviation={worst:.3e}")))
}

fn structural_trial(trial: u64, tol: &Tolerances) -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000 + trial);
    let g = make_grid(16, rng.gen_range(8.0..14.0), rng.gen_range(-1.0..1.0))?;
    let lambda = rng.gen_range(-0.5..0.5);
    let preset = Preset::CoupledHarmonic {
        m1: rng.gen_range(0.5..2.0),
        m2: rng.gen_range(0.5..2.0),
        omega1: rng.gen_range(0.5..1.5),
        omega2: rng.gen_range(0.5..1.5),
        lambda,
    };
    let spec = preset.build(g, g)?;
    let phi0 = random_localized_composite(&g, &g, &mut rng);
    let t = rng.gen_range(0.1..1.0);

    // unitarity: the product steps and the exact propagator keep the norm,
    // and the adjoint steps undo the evolution
    let fwd = evolve(&phi0, &spec, t, 40, EvolveOptions::default())?.state;
    if (fwd.norm_sqr() - 1.0).abs() > tol.unitarity {
        return Ok(Some(format!("trial {trial}: norm drift {:.3e}", fwd.norm_sqr() - 1.0)));
    }
    let back = reverse(&fwd, &spec, t, 40, EvolveOptions::default())?.state;
    if back.distance(&phi0)? > 1e-9 {
        return Ok(Some(format!("trial {trial}: reversal error {:.3e}", back.distance(&phi0)?)));
    }
    let exact = ExactPropagator::new(&spec)?.propagate(&phi0, t, Default::default())?;
    if (exact.norm_sqr() - 1.0).abs() > tol.unitarity {
        return Ok(Some(format!("trial {trial}: oracle norm drift {:.3e}", exact.norm_sqr() - 1.0)));
    }

    // density-operator invariants
    let rho = reduced_density(&fwd);
    if let Err(e) = rho.validate() {
        return Ok(Some(format!("trial {trial}: {e}")));
    }

    // Wigner mass and overlap
    let w = wigner_from_density(&rho)?;
    let mass = w.values.sum() * w.dq() * w.dp();
    if (mass - 1.0).abs() > tol.wigner_mass {
        return Ok(Some(format!("trial {trial}: Wigner mass {mass}")));
    }
    // the overlap identity needs packets resolved on the lattice: 32 points
    let gw = make_grid(32, g.length(), g.center())?;
    let a = reduced_density(&random_localized_composite(&gw, &g, &mut rng));
    let b = reduced_density(&random_localized_composite(&gw, &g, &mut rng));
    let tr: f64 = a.operator().dot(&b.operator()).diag().iter().map(|z| z.re).sum();
    let ov = wigner_half_step(&a)?.overlap(&wigner_half_step(&b)?)?;
    if (ov - tr).abs() > tol.overlap {
        return Ok(Some(format!("trial {trial}: overlap {ov} vs tr {tr}")));
    }

    // seed determinism, compared as serialized bytes
    let seed = rng.gen();
    let a = mc_density_estimate(&fwd, &Streams::new(seed), 0, 200, Representation::Position)?;
    let b = mc_density_estimate(&fwd, &Streams::new(seed), 0, 200, Representation::Position)?;
    if density_csv(&a.estimate).as_str() != density_csv(&b.estimate).as_str() {
        return Ok(Some(format!("trial {trial}: sampling not reproducible")));
    }
    Ok(None)
}

fn structural_invariants(tol: &Tolerances) -> Outcome {
    let mut failures = Vec::new();
    for trial in 0..100 {
        if let Some(f) = structural_trial(trial, tol)? {
            failures.push(f);
        }
    }
    let detail = match failures.first() {
        None => "trials=100;failures=0".to_string(),
        Some(first) => format!("trials=100;failures={};first={first}", failures.len()),
    };
    Ok((failures.is_empty(), detail))
}
