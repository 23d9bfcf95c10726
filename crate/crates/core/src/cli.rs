//! Command-line front end. Every command reads a scenario config, runs the
//! library and writes CSV artifacts plus `manifest.toml` into the output
//! directory.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::evolve::{convergence_study, evolve, Evolution};
use crate::hamiltonian::Sign;
use crate::hilbert_measure::track_evolution;
use crate::io::{density_csv, fmt_f64, state_csv, wigner_csv, Csv, Manifest};
use crate::states::{momentum_density, purity, reduced_density};
use crate::unravel::{exhaustive_density, mc_density_estimate, Streams};
use crate::verify::{run_all, Tolerances};
use crate::wigner::{joint_wigner, marginalize_wigner, wigner_from_density, WignerTable};

#[derive(Debug, Parser)]
#[command(name = "openqs", version, about = "Open quantum system dynamics on position grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `outputs.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `-` for e^{-itH} (default), `+` for e^{+itH}.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_sign)]
    pub sign: Option<Sign>,
}

fn parse_sign(s: &str) -> std::result::Result<Sign, String> {
    Sign::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the composite state; write purity/expectation series and the reduced density.
    Run(Common),
    /// Sample conditional system states at the configured times.
    Unravel {
        #[command(flatten)]
        common: Common,
        /// Enumerate every environment lattice point instead of sampling.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Reduced Wigner function, directly and by marginalizing the joint table.
    Wigner(Common),
    /// Gaussian-measure covariance residuals along the trajectory.
    Gaussian(Common),
    /// Trotter error against the exact propagator for the configured step counts.
    Converge(Common),
    /// Run the acceptance suite.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

/// Parses arguments, runs, prints diagnostics; returns the process exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(Outcome { passed: true, .. }) => 0,
        Ok(_) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 2,
                _ => 3,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub dir: Option<PathBuf>,
    pub passed: bool,
}

struct Prepared {
    scenario: Scenario,
    text: String,
    seed: u64,
    dir: PathBuf,
}

fn prepare(common: &Common) -> Result<Prepared> {
    let (config, text) = crate::config::Config::load(&common.config)?;
    let base = common.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut scenario = Scenario::from_config(config, &base)?;
    if let Some(sign) = common.sign {
        scenario = scenario.with_sign(sign);
    }
    let seed = common.seed.unwrap_or(scenario.config.seed);
    let dir = common.out.clone().unwrap_or_else(|| scenario.config.outputs.dir.clone());
    Ok(Prepared { scenario, text, seed, dir })
}

fn sign_label(sign: Sign) -> &'static str {
    match sign {
        Sign::Minus => "-",
        Sign::Plus => "+",
    }
}

fn finish(p: &Prepared, command: &str, files: Vec<(&str, Csv)>) -> Result<Outcome> {
    let mut manifest = Manifest::new(command, &p.text, p.seed, sign_label(p.scenario.options.step.sign));
    for (name, csv) in files {
        csv.write(&p.dir.join(name))?;
        manifest.files.push(name.to_string());
    }
    manifest.write(&p.dir)?;
    Ok(Outcome { dir: Some(p.dir.clone()), passed: true })
}

fn run_evolution(p: &Prepared) -> Result<Evolution> {
    let s = &p.scenario;
    evolve(&s.initial, &s.spec, s.config.evolution.t, s.config.evolution.steps, s.options)
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Run(c) => cmd_run(&prepare(c)?),
        Command::Unravel { common, exhaustive } => cmd_unravel(&prepare(common)?, *exhaustive),
        Command::Wigner(c) => cmd_wigner(&prepare(c)?),
        Command::Gaussian(c) => cmd_gaussian(&prepare(c)?),
        Command::Converge(c) => cmd_converge(&prepare(c)?),
        Command::Verify { out, only } => cmd_verify(out.as_deref(), only),
    }
}

fn cmd_run(p: &Prepared) -> Result<Outcome> {
    let ev = run_evolution(p)?;
    let mut series = Csv::new(&["step", "time", "purity", "mean_q1", "mean_q1_sq"]);
    for s in &ev.snapshots {
        series.row(&[s.step.to_string(), fmt_f64(s.time), fmt_f64(s.purity), fmt_f64(s.mean_q1), fmt_f64(s.mean_q1_sq)]);
    }
    let mut files = vec![("timeseries.csv", series), ("reduced_density.csv", density_csv(&reduced_density(&ev.state)))];
    let names: Vec<String>;
    if p.scenario.config.outputs.snapshots {
        names = ev.snapshots.iter().map(|s| format!("snapshots/state_{:06}.csv", s.step)).collect();
        for (s, name) in ev.snapshots.iter().zip(&names) {
            if let Some(state) = &s.state {
                files.push((name.as_str(), state_csv(state)));
            }
        }
    }
    finish(p, "run", files)
}

fn cmd_unravel(p: &Prepared, exhaustive_flag: bool) -> Result<Outcome> {
    let s = &p.scenario;
    let ev = run_evolution(p)?;
    let exhaustive = exhaustive_flag || s.config.unravel.exhaustive;
    let times: Vec<f64> = if s.config.unravel.times.is_empty() {
        ev.snapshots.iter().map(|s| s.time).collect()
    } else {
        s.config.unravel.times.clone()
    };
    let streams = Streams::new(p.seed);
    let mut csv = Csv::new(&["time", "N", "purity_mc", "purity_exact", "frobenius_error", "stderr"]);
    for (i, &t) in times.iter().enumerate() {
        let snap = ev
            .snapshots
            .iter()
            .find(|x| (x.time - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(Error::MissingSnapshot(t))?;
        let state = snap.state.as_ref().ok_or(Error::MissingSnapshot(t))?;
        let exact = reduced_density(state);
        let (estimate, n, stderr) = if exhaustive {
            (exhaustive_density(state, s.representation), s.grid2.n(), 0.0)
        } else {
            let e = mc_density_estimate(state, &streams, i, s.config.unravel.samples, s.representation)?;
            let se = e.stderr_norm();
            (e.estimate, e.samples, se)
        };
        csv.row(&[
            fmt_f64(snap.time),
            n.to_string(),
            fmt_f64(purity(&estimate)),
            fmt_f64(purity(&exact)),
            fmt_f64(estimate.hs_distance(&exact)?),
            fmt_f64(stderr),
        ]);
    }
    finish(p, "unravel", vec![("ensemble_summary.csv", csv)])
}

fn slice_csv(joint: &crate::wigner::JointWignerTable, k2: usize, j2: usize) -> Csv {
    let mut c = Csv::new(&["q1", "p1", "w"]);
    for (k1, q) in joint.q1.iter().enumerate() {
        for (j1, p) in joint.p1.iter().enumerate() {
            c.row(&[fmt_f64(*q), fmt_f64(*p), fmt_f64(joint.values[[k1, j1, k2, j2]])]);
        }
    }
    c
}

fn cmd_wigner(p: &Prepared) -> Result<Outcome> {
    let s = &p.scenario;
    let ev = run_evolution(p)?;
    let rho = reduced_density(&ev.state);
    let direct = wigner_from_density(&rho)?;
    let joint = joint_wigner(&ev.state, s.config.wigner.joint_cap).map_err(|e| match e {
        Error::Resource { requested, cap, .. } => Error::Config(format!(
            "the joint Wigner table needs {requested} entries but wigner.joint_cap is {cap}; \
             reduce grids.system.n / grids.environment.n or raise wigner.joint_cap"
        )),
        other => other,
    })?;
    let marginalized = marginalize_wigner(&joint);
    let mass = |w: &WignerTable| w.values.sum() * w.dq() * w.dp();
    let (pq, pp) = direct.marginals();
    let err_q = pq.iter().zip(rho.diagonal().iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let err_p = pp.iter().zip(momentum_density(&rho).iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut checks = Csv::new(&[
        "time",
        "two_path_max_diff",
        "mass_direct",
        "mass_marginalized",
        "position_marginal_norm",
        "momentum_marginal_norm",
        "position_marginal_max_err",
        "momentum_marginal_max_err",
    ]);
    checks.row(&[
        fmt_f64(s.config.evolution.t),
        fmt_f64(direct.max_abs_diff(&marginalized)),
        fmt_f64(mass(&direct)),
        fmt_f64(mass(&marginalized)),
        fmt_f64(pq.sum() * direct.dq()),
        fmt_f64(pp.sum() * direct.dp()),
        fmt_f64(err_q),
        fmt_f64(err_p),
    ]);
    let mut files = vec![
        ("wigner_direct.csv".to_string(), wigner_csv(&direct)),
        ("wigner_marginalized.csv".to_string(), wigner_csv(&marginalized)),
        ("wigner_checks.csv".to_string(), checks),
    ];
    for &[k2, j2] in &s.config.wigner.slices {
        if k2 >= s.grid2.n() || j2 >= s.grid2.n() {
            return Err(Error::Config(format!("wigner.slices: index ({k2}, {j2}) outside the environment lattice")));
        }
        files.push((format!("wigner_slice_{k2}_{j2}.csv"), slice_csv(&joint, k2, j2)));
    }
    finish(p, "wigner", files.iter().map(|(n, c)| (n.as_str(), c.clone())).collect())
}

fn cmd_gaussian(p: &Prepared) -> Result<Outcome> {
    let ev = run_evolution(p)?;
    let trajectory = ev
        .snapshots
        .iter()
        .map(|s| Ok((s.time, reduced_density(s.state.as_ref().ok_or(Error::MissingSnapshot(s.time))?))))
        .collect::<Result<Vec<_>>>()?;
    let rows = track_evolution(&trajectory, &Streams::new(p.seed), p.scenario.config.gaussian.samples)?;
    let mut csv = Csv::new(&["t", "N", "frobenius_residual", "purity_exact"]);
    for r in rows {
        csv.row(&[fmt_f64(r.time), r.samples.to_string(), fmt_f64(r.residual), fmt_f64(r.purity_exact)]);
    }
    finish(p, "gaussian", vec![("gaussian_residuals.csv", csv)])
}

/// The convergence table exactly as `converge` writes it.
pub fn convergence_csv(study: &crate::evolve::ConvergenceStudy) -> Csv {
    let mut csv = Csv::new(&["n", "dt", "l2_error", "observed_order"]);
    for r in &study.rows {
        csv.row(&[r.n.to_string(), fmt_f64(r.dt), fmt_f64(r.l2_error), r.observed_order.map(fmt_f64).unwrap_or_default()]);
    }
    csv
}

fn cmd_converge(p: &Prepared) -> Result<Outcome> {
    let s = &p.scenario;
    let study =
        convergence_study(&s.initial, &s.spec, s.config.evolution.t, &s.config.evolution.convergence_steps, s.options.step)?;
    println!("fitted order {:.4}", study.fitted_order);
    finish(p, "converge", vec![("convergence.csv", convergence_csv(&study))])
}

fn cmd_verify(out: Option<&Path>, only: &[u8]) -> Result<Outcome> {
    let reports = run_all(&Tolerances::default(), only);
    let mut csv = Csv::new(&["criterion", "name", "status", "seconds", "detail"]);
    for r in &reports {
        println!("{}", r.line());
        csv.row(&[
            r.id.to_string(),
            r.name.to_string(),
            if r.passed { "pass" } else { "fail" }.to_string(),
            format!("{:.3}", r.seconds),
            format!("\"{}\"", r.detail.replace('"', "'")),
        ]);
    }
    let passed = !reports.is_empty() && reports.iter().all(|r| r.passed);
    if let Some(dir) = out {
        csv.write(&dir.join("verify.csv"))?;
    }
    println!("overall={}", if passed { "pass" } else { "fail" });
    Ok(Outcome { dir: out.map(Path::to_path_buf), passed })
}
