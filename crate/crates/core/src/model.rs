//! Walk models: generating set and step distribution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tree_group::MAX_Q;
use crate::wreath::Generator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Each step either toggles the lamp at the current vertex (prob. `p`) or
    /// moves to a uniform neighbour.
    WalkOrSwitch,
    /// Each step flips the source lamp w.p. `p`, moves to a uniform neighbour,
    /// then flips the destination lamp w.p. `p`.
    SwitchWalkSwitch,
    /// `r` lamp states; add `k` to the current lamp w.p. `α_k`, otherwise move.
    MultiState,
}

impl ModelKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::WalkOrSwitch => "wos",
            ModelKind::SwitchWalkSwitch => "sws",
            ModelKind::MultiState => "multi",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wos" | "walk-or-switch" => Ok(ModelKind::WalkOrSwitch),
            "sws" | "switch-walk-switch" => Ok(ModelKind::SwitchWalkSwitch),
            "multi" | "multi-state" => Ok(ModelKind::MultiState),
            other => Err(Error::InvalidArgument(format!("unknown model '{other}'"))),
        }
    }
}

/// A fully parameterised walk model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub q: u8,
    pub p: f64,
    pub r: u8,
    /// Switch weights `α_1..α_{r−1}`; empty unless `kind` is `MultiState`.
    pub alpha: Vec<f64>,
}

pub(crate) fn check_q_p(q: u32, p: f64) -> Result<()> {
    if q < 3 {
        return Err(Error::InvalidParameter(format!("q must be ≥ 3, got {q}")));
    }
    if q > MAX_Q as u32 {
        return Err(Error::InvalidParameter(format!(
            "q must be ≤ {MAX_Q}, got {q}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in (0, 1), got {p}"
        )));
    }
    Ok(())
}

impl ModelSpec {
    pub fn walk_or_switch(q: u32, p: f64) -> Result<Self> {
        check_q_p(q, p)?;
        Ok(Self {
            kind: ModelKind::WalkOrSwitch,
            q: q as u8,
            p,
            r: 2,
            alpha: Vec::new(),
        })
    }

    pub fn switch_walk_switch(q: u32, p: f64) -> Result<Self> {
        check_q_p(q, p)?;
        Ok(Self {
            kind: ModelKind::SwitchWalkSwitch,
            q: q as u8,
            p,
            r: 2,
            alpha: Vec::new(),
        })
    }

    /// `r = alpha.len() + 1` lamp states; the weights must be positive and sum to `p`.
    pub fn multi_state(q: u32, p: f64, alpha: Vec<f64>) -> Result<Self> {
        check_q_p(q, p)?;
        if alpha.is_empty() || alpha.len() > 254 {
            return Err(Error::InvalidParameter(format!(
                "need between 1 and 254 switch weights, got {}",
                alpha.len()
            )));
        }
        if alpha.iter().any(|&a| a.is_nan() || a <= 0.0) {
            return Err(Error::InvalidParameter(
                "switch weights must be positive".into(),
            ));
        }
        let total: f64 = alpha.iter().sum();
        if (total - p).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "switch weights sum to {total}, expected p = {p}"
            )));
        }
        let r = alpha.len() as u8 + 1;
        Ok(Self {
            kind: ModelKind::MultiState,
            q: q as u8,
            p,
            r,
            alpha,
        })
    }

    /// Builds a model from its kind; `alpha` is only consulted for `MultiState`.
    pub fn from_kind(kind: ModelKind, q: u32, p: f64, alpha: Vec<f64>) -> Result<Self> {
        match kind {
            ModelKind::WalkOrSwitch => Self::walk_or_switch(q, p),
            ModelKind::SwitchWalkSwitch => Self::switch_walk_switch(q, p),
            ModelKind::MultiState => Self::multi_state(q, p, alpha),
        }
    }

    /// Every generator carrying positive mass.
    pub fn generators(&self) -> Vec<Generator> {
        let moves = (1..=self.q).map(Generator::Move);
        match self.kind {
            ModelKind::WalkOrSwitch => std::iter::once(Generator::SwitchAt(1))
                .chain(moves)
                .collect(),
            ModelKind::MultiState => (1..self.r).map(Generator::SwitchAt).chain(moves).collect(),
            ModelKind::SwitchWalkSwitch => {
                let mut gens = Vec::with_capacity(4 * self.q as usize);
                for letter in 1..=self.q {
                    for flip_source in 0..2 {
                        for flip_dest in 0..2 {
                            gens.push(Generator::SwsMove {
                                flip_source,
                                letter,
                                flip_dest,
                            });
                        }
                    }
                }
                gens
            }
        }
    }

    /// Probability of `g` under the step distribution.
    pub fn mass(&self, g: &Generator) -> f64 {
        let q = self.q as f64;
        let p = self.p;
        match (self.kind, *g) {
            (ModelKind::WalkOrSwitch, Generator::SwitchAt(1)) => p,
            (ModelKind::MultiState, Generator::SwitchAt(k)) if k >= 1 && k < self.r => {
                self.alpha[k as usize - 1]
            }
            (ModelKind::WalkOrSwitch | ModelKind::MultiState, Generator::Move(l))
                if l >= 1 && l <= self.q =>
            {
                (1.0 - p) / q
            }
            (
                ModelKind::SwitchWalkSwitch,
                Generator::SwsMove {
                    flip_source,
                    letter,
                    flip_dest,
                },
            ) if letter >= 1 && letter <= self.q && flip_source <= 1 && flip_dest <= 1 => {
                let flip = |f: u8| if f == 1 { p } else { 1.0 - p };
                flip(flip_source) * flip(flip_dest) / q
            }
            _ => 0.0,
        }
    }

    /// Draws one increment. Random numbers are consumed in the fixed order
    /// switch decision, direction, destination flip.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Generator {
        match self.kind {
            ModelKind::WalkOrSwitch => {
                if rng.random::<f64>() < self.p {
                    Generator::SwitchAt(1)
                } else {
                    Generator::Move(rng.random_range(1..=self.q))
                }
            }
            ModelKind::MultiState => {
                let u = rng.random::<f64>();
                if u < self.p {
                    let mut acc = 0.0;
                    for (i, a) in self.alpha.iter().enumerate() {
                        acc += a;
                        if u < acc {
                            return Generator::SwitchAt(i as u8 + 1);
                        }
                    }
                    // u < p but the running sum fell short by rounding.
                    Generator::SwitchAt(self.r - 1)
                } else {
                    Generator::Move(rng.random_range(1..=self.q))
                }
            }
            ModelKind::SwitchWalkSwitch => {
                let flip_source = (rng.random::<f64>() < self.p) as u8;
                let letter = rng.random_range(1..=self.q);
                let flip_dest = (rng.random::<f64>() < self.p) as u8;
                Generator::SwsMove {
                    flip_source,
                    letter,
                    flip_dest,
                }
            }
        }
    }
}

/// Anything that produces a stream of increments.
pub trait StepSource {
    fn next_step(&mut self) -> Generator;
}

/// A model paired with its own random stream.
pub struct Sampler<'a, R> {
    pub model: &'a ModelSpec,
    pub rng: R,
}

impl<R: Rng> StepSource for Sampler<'_, R> {
    fn next_step(&mut self) -> Generator {
        self.model.sample(&mut self.rng)
    }
}
