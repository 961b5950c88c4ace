//! Exit times and pseudo-increments of the switch-walk-switch walk.
//!
//! `e_k` is the first time the walker stands at depth `k` and never drops
//! below depth `k` again within the simulated horizon; from then on it stays
//! in the cone of `X_{e_k}`. `Δ_k ∈ {0, 2}` records whether, at time `e_k`,
//! some lamp is lit in the cone of `X_{e_{k−1}}` outside `X_{e_{k−1}}` and the
//! cone of `X_{e_k}`: such a lamp costs a detour of two extra steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec, Sampler, StepSource};
use crate::wreath::Generator;

use super::walker::Walker;

/// Certified exits of one trajectory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExitStats {
    /// `e_0 = 0 < e_1 < … < e_K`.
    pub exit_times: Vec<usize>,
    /// `Δ_1..Δ_K`, each 0 or 2.
    pub pseudo_increments: Vec<u8>,
    /// Number of certified exits `K`.
    pub exits: usize,
    /// `ℓ(Z_{e_k})` for `k = 0..=K`.
    pub lengths: Vec<usize>,
    /// Indices `k` at which `ℓ(Z_{e_k}) ≥ k + Σ_{j≤k} Δ_j` failed.
    pub star_violations: Vec<usize>,
}

impl ExitStats {
    pub fn delta_sum(&self) -> usize {
        self.pseudo_increments.iter().map(|&d| d as usize).sum()
    }
}

/// Runs one seeded switch-walk-switch trajectory and extracts its exits.
pub fn extract_exit_stats(
    model: &ModelSpec,
    n_steps: usize,
    seed: u64,
    horizon_buffer: usize,
) -> Result<ExitStats> {
    if model.kind != ModelKind::SwitchWalkSwitch {
        return Err(Error::InvalidArgument(format!(
            "exit statistics need the sws model, got {}",
            model.kind
        )));
    }
    let mut source = Sampler {
        model,
        rng: super::trial_rng(seed),
    };
    exit_stats_from_source(model.q, &mut source, n_steps, horizon_buffer)
}

/// Exit analysis for an arbitrary stream of switch-walk-switch increments.
pub fn exit_stats_from_source<S: StepSource>(
    q: u8,
    source: &mut S,
    n_steps: usize,
    horizon_buffer: usize,
) -> Result<ExitStats> {
    if horizon_buffer == 0 {
        return Err(Error::InvalidArgument("horizon buffer must be ≥ 1".into()));
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }

    // Pass 1: record increments and depths.
    let mut walker = Walker::new(ModelKind::SwitchWalkSwitch, q, 2);
    let mut steps: Vec<Generator> = Vec::with_capacity(n_steps);
    let mut depths: Vec<u32> = Vec::with_capacity(n_steps + 1);
    depths.push(0);
    for _ in 0..n_steps {
        let g = source.next_step();
        if !matches!(g, Generator::SwsMove { .. }) {
            return Err(Error::InvalidArgument(format!(
                "{g:?} is not an sws increment"
            )));
        }
        walker.step(&g);
        steps.push(g);
        depths.push(walker.depth());
    }

    let mut suffix_min = depths.clone();
    for t in (0..n_steps).rev() {
        suffix_min[t] = suffix_min[t].min(suffix_min[t + 1]);
    }
    // Scanning forward finds e_0, e_1, … in order: the walker must pass
    // depth k−1 for the last time before it settles at depth k.
    let mut exit_times = Vec::new();
    for (t, (&d, &m)) in depths.iter().zip(&suffix_min).enumerate() {
        if d as usize == exit_times.len() && m >= d {
            if t + horizon_buffer > n_steps {
                break;
            }
            exit_times.push(t);
        }
    }

    // Pass 2: replay and inspect the configuration at each exit.
    let mut walker = Walker::new(ModelKind::SwitchWalkSwitch, q, 2);
    let mut lengths = vec![0];
    let mut pseudo_increments = Vec::with_capacity(exit_times.len().saturating_sub(1));
    let mut next = 1;
    for (t, g) in steps.iter().enumerate() {
        if next >= exit_times.len() {
            break;
        }
        walker.step(g);
        if t + 1 == exit_times[next] {
            pseudo_increments.push(if walker.lit_in_sibling_cones() { 2 } else { 0 });
            lengths.push(walker.length());
            next += 1;
        }
    }

    let mut star_violations = Vec::new();
    let mut delta_total = 0;
    for (k, &len) in lengths.iter().enumerate().skip(1) {
        delta_total += pseudo_increments[k - 1] as usize;
        if len < k + delta_total {
            star_violations.push(k);
        }
    }

    Ok(ExitStats {
        exits: exit_times.len().saturating_sub(1),
        exit_times,
        pseudo_increments,
        lengths,
        star_violations,
    })
}
