//! Seeded simulation of the walk models and Monte Carlo estimators.
//!
//! Trial `i` of a batch is driven by its own ChaCha8 stream seeded with
//! `base_seed + i`; trials run in parallel on the current rayon pool and are
//! reduced in trial order, so results do not depend on the thread count.

mod exits;
mod walker;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec};
use crate::wreath::WreathElement;

pub use exits::{exit_stats_from_source, extract_exit_stats, ExitStats};
pub use walker::Walker;

/// Trajectories up to this length keep their final state in [`WalkStats`].
pub const FINAL_STATE_MAX_STEPS: usize = 10_000;

/// Below this escape rate the boundary proxies are flagged as unreliable.
pub const MIN_ESCAPE_RATE: f64 = 0.99;

pub(crate) fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn in_pool<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidArgument("thread count must be ≥ 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::InvalidArgument(format!("cannot start thread pool: {e}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Checkpoint {
    pub step: usize,
    pub length: usize,
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkStats {
    pub n_steps: usize,
    /// Steps `0, c, 2c, …` and always the last one.
    pub checkpoints: Vec<Checkpoint>,
    /// Present when `n_steps ≤ FINAL_STATE_MAX_STEPS`.
    pub final_state: Option<WreathElement>,
    pub first_letter_at_horizon: Option<u8>,
    pub lamp_at_o_at_horizon: u8,
}

/// One seeded trajectory, sampled every `checkpoint_every` steps.
pub fn run_trajectory(
    model: &ModelSpec,
    n_steps: usize,
    seed: u64,
    checkpoint_every: usize,
) -> Result<WalkStats> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    if checkpoint_every == 0 {
        return Err(Error::InvalidArgument(
            "checkpoint interval must be ≥ 1".into(),
        ));
    }
    let mut rng = trial_rng(seed);
    let mut walker = Walker::new(model.kind, model.q, model.r);
    let mut checkpoints = vec![Checkpoint {
        step: 0,
        length: 0,
        depth: 0,
    }];
    for n in 1..=n_steps {
        walker.step(&model.sample(&mut rng));
        if n % checkpoint_every == 0 || n == n_steps {
            checkpoints.push(Checkpoint {
                step: n,
                length: walker.length(),
                depth: walker.depth(),
            });
        }
    }
    Ok(WalkStats {
        n_steps,
        checkpoints,
        final_state: (n_steps <= FINAL_STATE_MAX_STEPS).then(|| walker.to_element()),
        first_letter_at_horizon: walker.first_letter(),
        lamp_at_o_at_horizon: walker.lamp_at_root(),
    })
}

fn run_to_horizon(model: &ModelSpec, n_steps: usize, seed: u64) -> Walker {
    let mut rng = trial_rng(seed);
    let mut walker = Walker::new(model.kind, model.q, model.r);
    for _ in 0..n_steps {
        walker.step(&model.sample(&mut rng));
    }
    walker
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub std_error: f64,
    pub n_trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl EstimateWithCI {
    /// Sample mean and standard error of the mean; panics on an empty slice.
    pub fn from_values(values: &[f64], keep_values: bool) -> Self {
        assert!(!values.is_empty(), "estimate needs at least one value");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std_error = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        Self {
            mean,
            std_error,
            n_trials: values.len(),
            values: keep_values.then(|| values.to_vec()),
        }
    }

    /// Whether `x` lies within `k` standard errors of the mean.
    pub fn within(&self, x: f64, k: f64) -> bool {
        (self.mean - x).abs() <= k * self.std_error
    }
}

fn check_batch(n_steps: usize, n_trials: usize) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    if n_trials < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 trials, got {n_trials}"
        )));
    }
    Ok(())
}

/// Per-trial `f(seed)` in parallel, returned in trial order.
fn par_trials<T, F>(n_trials: usize, base_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    (0..n_trials)
        .into_par_iter()
        .map(|i| f(trial_seed(base_seed, i)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftEstimate {
    /// `ℓ(Z_n)/n`.
    pub drift: EstimateWithCI,
    /// `|X_n|/n`.
    pub projection_drift: EstimateWithCI,
}

/// Drift and projection drift at horizon `n_steps`.
pub fn estimate_drift_with_projection(
    model: &ModelSpec,
    n_steps: usize,
    n_trials: usize,
    base_seed: u64,
    keep_values: bool,
) -> Result<DriftEstimate> {
    check_batch(n_steps, n_trials)?;
    let n = n_steps as f64;
    let samples = par_trials(n_trials, base_seed, |seed| {
        let w = run_to_horizon(model, n_steps, seed);
        (w.length() as f64 / n, w.depth() as f64 / n)
    });
    let (drift, projection): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    Ok(DriftEstimate {
        drift: EstimateWithCI::from_values(&drift, keep_values),
        projection_drift: EstimateWithCI::from_values(&projection, keep_values),
    })
}

/// Mean of `ℓ(Z_n)/n` over independent trials.
pub fn estimate_drift(
    model: &ModelSpec,
    n_steps: usize,
    n_trials: usize,
    base_seed: u64,
) -> Result<EstimateWithCI> {
    estimate_drift_with_projection(model, n_steps, n_trials, base_seed, false).map(|d| d.drift)
}

/// Finite-horizon proxies for the limiting boundary quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryStats {
    /// Frequency of each first letter `1..=q` of `X_n`.
    pub first_letter_hist: Vec<f64>,
    /// Frequency of the lamp at `o` being off at time `n`.
    pub lamp_off_freq: EstimateWithCI,
    /// First letter ≠ 1 and a lit lamp in the cone of `1` within the ball.
    pub nu1_est: EstimateWithCI,
    /// First letter = 1 and no lit lamp outside the cone of `1` within the ball.
    pub nu2_est: EstimateWithCI,
    /// Fraction of trials with `|X_n| > ball_radius`.
    pub escape_rate: f64,
    pub ball_radius: u32,
    pub n_steps: usize,
    pub warnings: Vec<String>,
}

struct BoundarySample {
    first_letter: Option<u8>,
    lamp_off: bool,
    nu1: bool,
    nu2: bool,
    escaped: bool,
}

fn boundary_sample(walker: &Walker, ball_radius: u32) -> BoundarySample {
    let first_letter = walker.first_letter();
    let mut lit_in_cone = false;
    let mut lit_outside_cone = false;
    for (depth, first, _) in walker.lit_lamps().filter(|&(d, _, _)| d <= ball_radius) {
        if depth > 0 && first == 1 {
            lit_in_cone = true;
        } else {
            lit_outside_cone = true;
        }
    }
    BoundarySample {
        first_letter,
        lamp_off: walker.lamp_at_root() == 0,
        nu1: first_letter.is_some_and(|a| a != 1) && lit_in_cone,
        nu2: first_letter == Some(1) && !lit_outside_cone,
        escaped: walker.depth() > ball_radius,
    }
}

/// Estimates the law of the first letter of `X_∞`, the terminal lamp at `o`,
/// and the events behind `ν₁`, `ν₂`, by truncating at horizon `n_steps` and
/// to lamps within distance `ball_radius` of `o`.
pub fn estimate_boundary_stats(
    model: &ModelSpec,
    n_steps: usize,
    n_trials: usize,
    base_seed: u64,
    ball_radius: u32,
) -> Result<BoundaryStats> {
    if model.kind != ModelKind::WalkOrSwitch {
        return Err(Error::InvalidArgument(format!(
            "boundary statistics need the wos model, got {}",
            model.kind
        )));
    }
    if ball_radius == 0 {
        return Err(Error::InvalidArgument("ball radius must be ≥ 1".into()));
    }
    check_batch(n_steps, n_trials)?;

    let samples = par_trials(n_trials, base_seed, |seed| {
        boundary_sample(&run_to_horizon(model, n_steps, seed), ball_radius)
    });
    let indicator = |f: fn(&BoundarySample) -> bool| {
        let v: Vec<f64> = samples.iter().map(|s| f(s) as u8 as f64).collect();
        EstimateWithCI::from_values(&v, false)
    };
    let mut hist = vec![0.0; model.q as usize];
    for a in samples.iter().filter_map(|s| s.first_letter) {
        hist[a as usize - 1] += 1.0;
    }
    hist.iter_mut().for_each(|h| *h /= n_trials as f64);
    let escape_rate = samples.iter().filter(|s| s.escaped).count() as f64 / n_trials as f64;

    let mut warnings = Vec::new();
    if escape_rate < MIN_ESCAPE_RATE {
        warnings.push(format!(
            "only {:.1}% of trials left the ball of radius {ball_radius}; increase the horizon",
            100.0 * escape_rate
        ));
    }
    Ok(BoundaryStats {
        first_letter_hist: hist,
        lamp_off_freq: indicator(|s| s.lamp_off),
        nu1_est: indicator(|s| s.nu1),
        nu2_est: indicator(|s| s.nu2),
        escape_rate,
        ball_radius,
        n_steps,
        warnings,
    })
}

/// Exit statistics aggregated over trials of the switch-walk-switch walk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExitSummary {
    /// Per-trial mean of `Δ_k`, averaged over trials with at least one exit.
    pub mean_delta: EstimateWithCI,
    pub total_exits: usize,
    pub trials_without_exits: usize,
    /// Certified exits at which `ℓ(Z_{e_k}) ≥ k + Σ Δ_j` failed, over all trials.
    pub star_violations: usize,
    pub horizon_buffer: usize,
    pub notes: Vec<String>,
}

/// The finite horizon cannot certify that a lamp state is final.
pub const EXIT_PROXY_NOTE: &str = "exit times are certified up to the simulated horizon; \
     lamp states at exit times are not known to be final";

pub fn estimate_exit_stats(
    model: &ModelSpec,
    n_steps: usize,
    n_trials: usize,
    base_seed: u64,
    horizon_buffer: usize,
) -> Result<ExitSummary> {
    check_batch(n_steps, n_trials)?;
    let per_trial: Vec<ExitStats> = par_trials(n_trials, base_seed, |seed| {
        extract_exit_stats(model, n_steps, seed, horizon_buffer)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let means: Vec<f64> = per_trial
        .iter()
        .filter(|s| s.exits > 0)
        .map(|s| s.delta_sum() as f64 / s.exits as f64)
        .collect();
    if means.is_empty() {
        return Err(Error::InvalidArgument(
            "no trial produced a certified exit; increase the horizon".into(),
        ));
    }
    Ok(ExitSummary {
        mean_delta: EstimateWithCI::from_values(&means, false),
        total_exits: per_trial.iter().map(|s| s.exits).sum(),
        trials_without_exits: n_trials - means.len(),
        star_violations: per_trial.iter().map(|s| s.star_violations.len()).sum(),
        horizon_buffer,
        notes: vec![EXIT_PROXY_NOTE.to_string()],
    })
}

/// Everything a `simulate` run computes.
#[derive(Clone, Debug)]
pub struct SimulationRequest {
    pub model: ModelSpec,
    pub n_steps: usize,
    pub n_trials: usize,
    pub base_seed: u64,
    /// Boundary statistics within this radius (walk-or-switch only).
    pub ball_radius: Option<u32>,
    /// Exit statistics with this buffer (switch-walk-switch only).
    pub horizon_buffer: Option<usize>,
}

impl SimulationRequest {
    /// Default exit-certification buffer, `10·q` steps.
    pub fn default_horizon_buffer(q: u8) -> usize {
        10 * q as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimates {
    pub drift: EstimateWithCI,
    pub projection_drift: EstimateWithCI,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exits: Option<ExitSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub model: ModelKind,
    pub q: u8,
    pub p: f64,
    pub r: u8,
    pub alpha: Vec<f64>,
    pub n_steps: usize,
    pub n_trials: usize,
    pub base_seed: u64,
    pub estimates: Estimates,
    pub ball_radius: Option<u32>,
    pub horizon_buffer: Option<usize>,
}

pub fn simulate(req: &SimulationRequest) -> Result<SimulationReport> {
    let m = &req.model;
    let DriftEstimate {
        drift,
        projection_drift,
    } = estimate_drift_with_projection(m, req.n_steps, req.n_trials, req.base_seed, false)?;
    let boundary = req
        .ball_radius
        .map(|radius| estimate_boundary_stats(m, req.n_steps, req.n_trials, req.base_seed, radius))
        .transpose()?;
    let exits = req
        .horizon_buffer
        .map(|buffer| estimate_exit_stats(m, req.n_steps, req.n_trials, req.base_seed, buffer))
        .transpose()?;
    Ok(SimulationReport {
        model: m.kind,
        q: m.q,
        p: m.p,
        r: m.r,
        alpha: m.alpha.clone(),
        n_steps: req.n_steps,
        n_trials: req.n_trials,
        base_seed: req.base_seed,
        estimates: Estimates {
            drift,
            projection_drift,
            boundary,
            exits,
        },
        ball_radius: req.ball_radius,
        horizon_buffer: req.horizon_buffer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic;

    #[test]
    fn trajectories_are_deterministic() {
        for model in [
            ModelSpec::walk_or_switch(3, 0.5).unwrap(),
            ModelSpec::switch_walk_switch(4, 0.3).unwrap(),
            ModelSpec::multi_state(3, 0.5, vec![0.25, 0.25]).unwrap(),
        ] {
            let a = run_trajectory(&model, 3000, 42, 100).unwrap();
            let b = run_trajectory(&model, 3000, 42, 100).unwrap();
            assert_eq!(a, b);
            let c = run_trajectory(&model, 3000, 43, 100).unwrap();
            assert_ne!(a.checkpoints, c.checkpoints);
        }
    }

    #[test]
    fn checkpoints_agree_with_final_state() {
        let model = ModelSpec::multi_state(4, 0.4, vec![0.1, 0.3]).unwrap();
        let stats = run_trajectory(&model, 2500, 5, 1000).unwrap();
        let steps: Vec<usize> = stats.checkpoints.iter().map(|c| c.step).collect();
        assert_eq!(steps, [0, 1000, 2000, 2500]);
        let last = stats.checkpoints.last().unwrap();
        let z = stats.final_state.as_ref().unwrap();
        assert_eq!(last.length, geodesic::length(model.kind, z));
        assert_eq!(last.depth as usize, z.position.len());
        assert_eq!(stats.first_letter_at_horizon, z.position.first_letter());
        assert_eq!(
            stats.lamp_at_o_at_horizon,
            z.config.get(&crate::ReducedWord::identity(4))
        );
    }

    #[test]
    fn walk_or_switch_length_moves_by_one() {
        let model = ModelSpec::walk_or_switch(3, 0.5).unwrap();
        for seed in 0..10 {
            let stats = run_trajectory(&model, 20_000, seed, 1).unwrap();
            for w in stats.checkpoints.windows(2) {
                assert_eq!(w[0].length.abs_diff(w[1].length), 1);
                assert!(w[0].depth.abs_diff(w[1].depth) <= 1);
            }
        }
    }

    #[test]
    fn depth_increments_follow_the_model() {
        let multi = ModelSpec::multi_state(3, 0.5, vec![0.2, 0.3]).unwrap();
        let sws = ModelSpec::switch_walk_switch(3, 0.5).unwrap();
        for model in [multi, sws] {
            let mut rng = trial_rng(1);
            let mut w = Walker::new(model.kind, model.q, model.r);
            for _ in 0..20_000 {
                let before = w.depth();
                let g = model.sample(&mut rng);
                w.step(&g);
                let moved = before.abs_diff(w.depth());
                match g {
                    crate::Generator::SwitchAt(_) => assert_eq!(moved, 0),
                    _ => assert_eq!(moved, 1),
                }
            }
        }
    }

    #[test]
    fn projection_drift_short_run() {
        let model = ModelSpec::walk_or_switch(3, 0.5).unwrap();
        let stats = run_trajectory(&model, 100_000, 2024, 100_000).unwrap();
        let last = stats.checkpoints.last().unwrap();
        let speed = last.depth as f64 / 1e5;
        assert!((speed - 1.0 / 6.0).abs() < 0.01, "{speed}");
        let drift = last.length as f64 / 1e5;
        assert!((0.333 - 0.01..=0.3598 + 0.01).contains(&drift), "{drift}");
        assert!(stats.final_state.is_none());
    }

    #[test]
    fn batch_results_ignore_thread_count() {
        let model = ModelSpec::walk_or_switch(5, 0.25).unwrap();
        let one = in_pool(Some(1), || {
            estimate_drift_with_projection(&model, 2000, 16, 7, true)
        })
        .unwrap()
        .unwrap();
        let four = in_pool(Some(4), || {
            estimate_drift_with_projection(&model, 2000, 16, 7, true)
        })
        .unwrap()
        .unwrap();
        assert_eq!(one, four);
        let solo = run_trajectory(&model, 2000, 7 + 3, 2000).unwrap();
        let last = solo.checkpoints.last().unwrap();
        assert_eq!(
            one.drift.values.as_ref().unwrap()[3],
            last.length as f64 / 2000.0
        );
    }

    #[test]
    fn estimate_with_ci_basics() {
        let e = EstimateWithCI::from_values(&[1.0, 2.0, 3.0, 4.0], false);
        assert_eq!(e.mean, 2.5);
        assert!((e.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(e.values.is_none());
        assert_eq!(EstimateWithCI::from_values(&[3.0], true).std_error, 0.0);
    }

    #[test]
    fn estimator_preconditions() {
        let wos = ModelSpec::walk_or_switch(3, 0.5).unwrap();
        let sws = ModelSpec::switch_walk_switch(3, 0.5).unwrap();
        assert!(estimate_drift(&wos, 100, 1, 0).is_err());
        assert!(estimate_drift(&wos, 0, 5, 0).is_err());
        assert!(estimate_boundary_stats(&sws, 100, 5, 0, 3).is_err());
        assert!(estimate_boundary_stats(&wos, 100, 5, 0, 0).is_err());
        assert!(run_trajectory(&wos, 0, 0, 1).is_err());
        assert!(in_pool(Some(0), || ()).is_err());
    }

    #[test]
    fn short_horizon_boundary_run_warns() {
        let wos = ModelSpec::walk_or_switch(3, 0.5).unwrap();
        let stats = estimate_boundary_stats(&wos, 50, 20, 0, 30).unwrap();
        assert_eq!(stats.escape_rate, 0.0);
        assert_eq!(stats.warnings.len(), 1);
    }

    #[test]
    fn simulation_report_json_shape() {
        let req = SimulationRequest {
            model: ModelSpec::switch_walk_switch(3, 0.5).unwrap(),
            n_steps: 2000,
            n_trials: 4,
            base_seed: 1,
            ball_radius: None,
            horizon_buffer: Some(30),
        };
        let report = simulate(&req).unwrap();
        let v: serde_json::Value = serde_json::to_value(&report).unwrap();
        for key in [
            "model",
            "q",
            "p",
            "r",
            "alpha",
            "n_steps",
            "n_trials",
            "base_seed",
            "estimates",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["model"], "switch_walk_switch");
        assert!(v["estimates"]["exits"]["mean_delta"]["mean"].is_number());
        assert!(v["estimates"].get("boundary").is_none());
        assert_eq!(report.estimates.exits.unwrap().star_violations, 0);
    }
}
