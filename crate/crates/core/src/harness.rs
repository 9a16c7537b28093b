//! Convergence harness: run eps-sweeps of full simulations, compare the
//! rescaled fields against an oracle (or against finer-eps runs), fit a
//! diagnostic rate, and assemble reports.

use crate::drivers::{self, Driver};
use crate::error::{GrowthError, Result};
use crate::fd::fd_cross_solve;
use crate::initial::{self, InitialData};
use crate::lattice::{ScalingMode, Trajectory};
use crate::operators::{smooth_limit_operator, SmoothAH};
use crate::oracles::{hopf_lax_oracle, separable_heat_oracle, ReachableSet};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Configs projecting more site-updates than this are refused.
pub const RESOURCE_CAP: f64 = 5e9;

/// Which reference the rescaled fields are compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OracleKind {
    /// Variational formula for the first-order limits (hyperbolic drivers).
    HopfLax,
    /// Exact heat series for cosine data (parabolic, pure diffusion).
    SeparableHeat { nu: f64 },
    /// Finite-difference solve of the quasilinear limit (parabolic,
    /// smooth-Phi drivers).
    FdCross,
    /// No oracle: Cauchy differences between consecutive eps runs.
    SelfConvergence,
}

impl OracleKind {
    pub fn name(&self) -> &'static str {
        match self {
            OracleKind::HopfLax => "hopf_lax",
            OracleKind::SeparableHeat { .. } => "separable_heat",
            OracleKind::FdCross => "fd_cross",
            OracleKind::SelfConvergence => "self_convergence",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub driver: String,
    /// Even-power exponent for the argmin family, when applicable.
    pub k: Option<u32>,
    /// Fractional-power exponent for the argmin family, when applicable.
    pub delta: Option<f64>,
    /// Flat-well half-width for the argmin family, when applicable.
    pub well_a: Option<f64>,
    pub u0: String,
    pub dim: usize,
    pub window: Vec<(f64, f64)>,
    pub horizon: f64,
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub oracle: OracleKind,
    pub samples_per_axis: usize,
    /// Absolute times; empty selects {0, T/4, T/2, 3T/4, T}.
    pub time_slices: Vec<f64>,
    /// Calibration threshold on the final sup error (the limit theorems
    /// state no rates; this is an experiment-level artifact).
    pub final_error_threshold: f64,
    /// Nodes per axis for the fd cross solver.
    pub fd_nodes: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(
        experiment_id: impl Into<String>,
        driver: impl Into<String>,
        u0: impl Into<String>,
        dim: usize,
        epsilons: Vec<f64>,
        oracle: OracleKind,
    ) -> Self {
        ExperimentConfig {
            experiment_id: experiment_id.into(),
            driver: driver.into(),
            k: None,
            delta: None,
            well_a: None,
            u0: u0.into(),
            dim,
            window: vec![(-2.0, 2.0); dim],
            horizon: 1.0,
            epsilons,
            oracle: OracleKind::SelfConvergence,
            samples_per_axis: 33,
            time_slices: Vec::new(),
            final_error_threshold: 0.05,
            fd_nodes: None,
        }
        .with_oracle(oracle)
    }

    fn with_oracle(mut self, oracle: OracleKind) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window.len() != self.dim {
            return Err(GrowthError::Config(format!(
                "window must have one (lo, hi) pair per axis; dim = {}, got {}",
                self.dim,
                self.window.len()
            )));
        }
        for (axis, &(lo, hi)) in self.window.iter().enumerate() {
            if hi <= lo {
                return Err(GrowthError::EmptyWindow { axis, lo, hi });
            }
        }
        if self.horizon <= 0.0 {
            return Err(GrowthError::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.epsilons.is_empty() {
            return Err(GrowthError::Config("epsilon list is empty".into()));
        }
        for w in self.epsilons.windows(2) {
            if w[1] >= w[0] {
                return Err(GrowthError::Config(format!(
                    "epsilon list must be strictly decreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if *self.epsilons.last().unwrap() <= 0.0 {
            return Err(GrowthError::NonPositiveEpsilon(*self.epsilons.last().unwrap()));
        }
        if self.samples_per_axis < 2 {
            return Err(GrowthError::Config(format!(
                "samples_per_axis must be >= 2, got {}",
                self.samples_per_axis
            )));
        }
        Ok(())
    }

    pub fn slice_times(&self) -> Vec<f64> {
        if self.time_slices.is_empty() {
            let t = self.horizon;
            vec![0.0, 0.25 * t, 0.5 * t, 0.75 * t, t]
        } else {
            self.time_slices.clone()
        }
    }

    /// All window sample points (samples_per_axis^dim of them).
    pub fn sample_grid(&self) -> Vec<Vec<f64>> {
        let n = self.samples_per_axis;
        let d = self.dim;
        let total = n.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                (0..d)
                    .map(|a| {
                        let (lo, hi) = self.window[a];
                        let i = idx % n;
                        idx /= n;
                        lo + (hi - lo) * i as f64 / (n - 1) as f64
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceError {
    pub time: f64,
    pub sup_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonResult {
    pub epsilon: f64,
    pub slices: Vec<SliceError>,
    pub overall: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub scaling: String,
    pub results: Vec<EpsilonResult>,
    /// Fitted log-log slope of overall error vs eps (diagnostic only).
    pub rate: Option<f64>,
    pub pass: bool,
    pub runtime_ms: u128,
}

impl ConvergenceReport {
    /// One row per (epsilon, time slice).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment_id,epsilon,time,sup_error\n");
        for r in &self.results {
            for s in &r.slices {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    self.config.experiment_id, r.epsilon, s.time, s.sup_error
                ));
            }
        }
        out
    }
}

/// Least-squares slope and intercept in log eps - log error. Nonpositive
/// errors are excluded; needs at least 3 usable points.
pub fn rate_fit(epsilons: &[f64], errors: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = epsilons
        .iter()
        .zip(errors)
        .filter(|&(&e, &r)| e > 0.0 && r > 0.0)
        .map(|(&e, &r)| (e.ln(), r.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Some((slope, intercept))
}

fn projected_site_updates(config: &ExperimentConfig, scaling: ScalingMode) -> f64 {
    let mut total = 0.0;
    for &eps in &config.epsilons {
        let steps = (config.horizon / eps).ceil();
        let s = scaling.space_scale(eps);
        let mut volume = 1.0;
        for &(lo, hi) in &config.window {
            volume *= (hi - lo) / s + 2.0 * steps + 2.0;
        }
        total += steps * volume;
    }
    total
}

fn build_driver(config: &ExperimentConfig) -> Result<Driver> {
    drivers::by_name(&config.driver, config.k, config.delta, config.well_a)
}

fn oracle_scaling(oracle: &OracleKind) -> Option<ScalingMode> {
    match oracle {
        OracleKind::HopfLax => Some(ScalingMode::Hyperbolic),
        OracleKind::SeparableHeat { .. } | OracleKind::FdCross => Some(ScalingMode::Parabolic),
        OracleKind::SelfConvergence => None,
    }
}

fn reachable_set_for(driver: &Driver) -> Result<ReachableSet> {
    match driver {
        Driver::MaxNeighbor => Ok(ReachableSet::L1Ball),
        Driver::PosPartAverage => Ok(ReachableSet::SupBox),
        _ => Err(GrowthError::InvalidArgument(format!(
            "no variational oracle for driver {}",
            driver.kind_name()
        ))),
    }
}

/// The fd cross solver runs on the window enlarged by one window-width per
/// side, so its clamped edges stay causally separated from the samples.
fn enlarged_window(window: &[(f64, f64)]) -> Vec<(f64, f64)> {
    window
        .iter()
        .map(|&(lo, hi)| {
            let w = hi - lo;
            (lo - w, hi + w)
        })
        .collect()
}

fn smooth_op(driver: &Driver) -> Result<SmoothAH> {
    match driver {
        Driver::SmoothPhi(spec) => Ok(smooth_limit_operator(spec)),
        _ => Err(GrowthError::InvalidArgument(format!(
            "fd cross-check needs a smooth-Phi driver, not {}",
            driver.kind_name()
        ))),
    }
}

fn run_trajectory(
    driver: &Driver,
    u0: &InitialData,
    config: &ExperimentConfig,
    scaling: ScalingMode,
    eps: f64,
    times: &[f64],
) -> Result<Trajectory> {
    let steps = (config.horizon / eps).ceil() as u64;
    let record: Vec<u64> = times
        .iter()
        .map(|&t| ((t / eps).floor() as u64).min(steps))
        .collect();
    Trajectory::run_recording(driver, u0, &config.window, eps, scaling, steps, &record)
}

/// Run the configured eps sweep and assemble the report.
///
/// Verdict: overall sup errors strictly decreasing along the eps list and
/// the final one at or below the configured threshold. For the
/// self-convergence oracle the errors are the sup differences between
/// consecutive eps runs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let start = Instant::now();
    config.validate()?;
    let driver = build_driver(config)?;
    let scaling = drivers::detect_scaling(&driver, &drivers::default_scaling_probes(config.dim));
    if let Some(required) = oracle_scaling(&config.oracle) {
        if required != scaling {
            return Err(GrowthError::OracleScalingMismatch {
                oracle: config.oracle.name().to_string(),
                scaling: scaling.name().to_string(),
                driver: driver.kind_name().to_string(),
            });
        }
    }
    if config.oracle == OracleKind::SelfConvergence && config.epsilons.len() < 3 {
        return Err(GrowthError::Config(
            "self-convergence needs at least 3 epsilon values".into(),
        ));
    }
    let projected = projected_site_updates(config, scaling);
    if projected > RESOURCE_CAP {
        return Err(GrowthError::ResourceCap { projected, cap: RESOURCE_CAP });
    }
    let u0 = initial::by_name(&config.u0, config.dim)?;
    let times = config.slice_times();
    let grid = config.sample_grid();

    let trajectories: Vec<Trajectory> = config
        .epsilons
        .iter()
        .map(|&eps| run_trajectory(&driver, &u0, config, scaling, eps, &times))
        .collect::<Result<_>>()?;

    let mut results = Vec::new();
    match &config.oracle {
        OracleKind::SelfConvergence => {
            for pair in trajectories.windows(2) {
                let (coarse, fine) = (&pair[0], &pair[1]);
                let mut slices = Vec::new();
                let mut overall = 0.0_f64;
                for &t in &times {
                    let mut sup = 0.0_f64;
                    for x in &grid {
                        let a = coarse.evaluate_scaled(x, t)?;
                        let b = fine.evaluate_scaled(x, t)?;
                        sup = sup.max((a - b).abs());
                    }
                    overall = overall.max(sup);
                    slices.push(SliceError { time: t, sup_error: sup });
                }
                results.push(EpsilonResult { epsilon: coarse.epsilon(), slices, overall });
            }
        }
        oracle => {
            // reference values are eps-independent: compute them once
            let mut reference = vec![vec![0.0; grid.len()]; times.len()];
            match oracle {
                OracleKind::HopfLax => {
                    let set = reachable_set_for(&driver)?;
                    for (ti, &t) in times.iter().enumerate() {
                        for (xi, x) in grid.iter().enumerate() {
                            reference[ti][xi] = hopf_lax_oracle(&u0, set, x, t)?;
                        }
                    }
                }
                OracleKind::SeparableHeat { nu } => {
                    for (ti, &t) in times.iter().enumerate() {
                        for (xi, x) in grid.iter().enumerate() {
                            reference[ti][xi] = separable_heat_oracle(&u0, *nu, x, t)?;
                        }
                    }
                }
                OracleKind::FdCross => {
                    let op = smooth_op(&driver)?;
                    let big = enlarged_window(&config.window);
                    let n = config.fd_nodes.unwrap_or(513);
                    for (ti, &t) in times.iter().enumerate() {
                        let sol = fd_cross_solve(&op, &u0, &big, n, t.max(1e-12))?;
                        for (xi, x) in grid.iter().enumerate() {
                            reference[ti][xi] = if t == 0.0 { u0.eval(x) } else { sol.sample(x)? };
                        }
                    }
                }
                OracleKind::SelfConvergence => unreachable!(),
            }
            for traj in &trajectories {
                let mut slices = Vec::new();
                let mut overall = 0.0_f64;
                for (ti, &t) in times.iter().enumerate() {
                    let mut sup = 0.0_f64;
                    for (xi, x) in grid.iter().enumerate() {
                        let v = traj.evaluate_scaled(x, t)?;
                        sup = sup.max((v - reference[ti][xi]).abs());
                    }
                    overall = overall.max(sup);
                    slices.push(SliceError { time: t, sup_error: sup });
                }
                results.push(EpsilonResult { epsilon: traj.epsilon(), slices, overall });
            }
        }
    }

    let overall: Vec<f64> = results.iter().map(|r| r.overall).collect();
    let eps_used: Vec<f64> = results.iter().map(|r| r.epsilon).collect();
    let decreasing = overall.windows(2).all(|w| w[1] < w[0]);
    let pass = decreasing
        && overall
            .last()
            .map_or(false, |&e| e <= config.final_error_threshold);
    let rate = rate_fit(&eps_used, &overall).map(|(slope, _)| slope);

    Ok(ConvergenceReport {
        config: config.clone(),
        scaling: scaling.name().to_string(),
        results,
        rate,
        pass,
        runtime_ms: start.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_fit_recovers_synthetic_slopes() {
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let lin: Vec<f64> = eps.iter().map(|e| 3.0 * e).collect();
        let (slope, _) = rate_fit(&eps, &lin).unwrap();
        assert!((slope - 1.0).abs() < 0.05);
        let sqrt: Vec<f64> = eps.iter().map(|e| 3.0 * e.sqrt()).collect();
        let (slope, _) = rate_fit(&eps, &sqrt).unwrap();
        assert!((slope - 0.5).abs() < 0.05);
        // zero errors are excluded: too few points left
        assert!(rate_fit(&eps, &[0.0, 0.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(
            "t", "max", "tent", 1,
            vec![0.25, 0.125],
            OracleKind::HopfLax,
        );
        assert!(c.validate().is_ok());
        c.epsilons = vec![0.125, 0.25];
        assert!(c.validate().is_err());
        c.epsilons = vec![];
        assert!(c.validate().is_err());
        c.epsilons = vec![0.25];
        c.window = vec![(1.0, -1.0)];
        assert!(c.validate().is_err());
    }

    #[test]
    fn oracle_scaling_mismatch_is_refused() {
        // median detects as parabolic; the variational oracle is hyperbolic
        let c = ExperimentConfig::new(
            "t", "median", "tent", 1,
            vec![0.25, 0.125],
            OracleKind::HopfLax,
        );
        assert!(matches!(
            run_experiment(&c),
            Err(GrowthError::OracleScalingMismatch { .. })
        ));
    }

    #[test]
    fn resource_cap_is_enforced() {
        let mut c = ExperimentConfig::new(
            "t", "max", "tent", 2,
            vec![1e-5],
            OracleKind::HopfLax,
        );
        c.window = vec![(-2.0, 2.0), (-2.0, 2.0)];
        assert!(matches!(
            run_experiment(&c),
            Err(GrowthError::ResourceCap { .. })
        ));
    }

    #[test]
    fn max_driver_tent_errors_decrease() {
        let c = ExperimentConfig::new(
            "max_tent_1d", "max", "tent", 1,
            vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
            OracleKind::HopfLax,
        );
        let report = run_experiment(&c).unwrap();
        assert_eq!(report.scaling, "hyperbolic");
        assert_eq!(report.results.len(), 3);
        let overall: Vec<f64> = report.results.iter().map(|r| r.overall).collect();
        assert!(overall[1] < overall[0] && overall[2] < overall[1], "{overall:?}");
        let csv = report.to_csv();
        assert!(csv.starts_with("experiment_id,epsilon,time,sup_error\n"));
        assert_eq!(csv.lines().count(), 1 + 3 * 5);
    }

    #[test]
    fn self_convergence_smoke() {
        let mut c = ExperimentConfig::new(
            "median_self", "median", "tanh_x1", 1,
            vec![1.0 / 4.0, 1.0 / 16.0, 1.0 / 64.0],
            OracleKind::SelfConvergence,
        );
        c.horizon = 0.5;
        let report = run_experiment(&c).unwrap();
        assert_eq!(report.results.len(), 2);
        assert!(report.results.iter().all(|r| r.overall >= 0.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let c = ExperimentConfig::new(
            "det", "max", "tent", 1,
            vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
            OracleKind::HopfLax,
        );
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        let ja = serde_json::json!({"results": &a.results, "rate": a.rate, "pass": a.pass});
        let jb = serde_json::json!({"results": &b.results, "rate": b.rate, "pass": b.pass});
        assert_eq!(ja.to_string(), jb.to_string());
    }
}
