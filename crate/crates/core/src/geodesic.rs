//! Word length `ℓ(z)` in the Cayley graph of each walk model.
//!
//! To bring `(η, x)` back to the identity the lamplighter has to visit every
//! lit vertex and end at `o`. On a tree the shortest such walk traverses each
//! edge of the Steiner tree spanning `{o, x} ∪ supp(η)` twice, except the
//! edges on the `x–o` path, which are traversed once. That gives
//!
//! * walk-or-switch (and multi-state): `|supp η| + 2·E − |x|`
//! * switch-walk-switch: `2·E − |x|`, since lamps are flipped while moving.
//!
//! [`bfs_oracle`] recomputes the same distances by breadth-first search over
//! the Cayley graph and is used to certify the closed forms.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec};
use crate::tree_group::{common_prefix_len, ReducedWord};
use crate::wreath::{LampConfig, WreathElement};

/// Largest radius accepted by [`bfs_oracle`].
pub const MAX_ORACLE_RADIUS: u32 = 6;

/// Default cap on the number of states the oracle may visit.
pub const DEFAULT_STATE_CAP: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SteinerSummary {
    /// Edges of the Steiner tree spanning `{o, x} ∪ supp(η)`.
    pub edge_count: usize,
    pub dist_x_o: usize,
}

/// Counts the distinct nonempty prefixes of `{x} ∪ supp(η)`.
///
/// With the words in lexicographic order, each word adds exactly the letters
/// beyond its longest common prefix with its predecessor.
pub fn steiner_summary(config: &LampConfig, x: &ReducedWord) -> SteinerSummary {
    let mut lit = config.support().map(|w| w.letters()).peekable();
    let mut x_slot = Some(x.letters());
    // Merge x into the already sorted support.
    let merged = std::iter::from_fn(|| match (x_slot, lit.peek()) {
        (Some(xw), Some(w)) if xw <= *w => x_slot.take(),
        (Some(_), None) => x_slot.take(),
        _ => lit.next(),
    });
    let mut edge_count = 0;
    let mut prev: &[u8] = &[];
    for w in merged {
        edge_count += w.len() - common_prefix_len(prev, w);
        prev = w;
    }
    SteinerSummary {
        edge_count,
        dist_x_o: x.len(),
    }
}

/// `ℓ` for the walk-or-switch generating set `{(𝟙_o, o), (𝟎, a_i)}`; also valid
/// for the multi-state set, where each lit lamp costs one switch whatever its state.
pub fn length_walk_or_switch(z: &WreathElement) -> usize {
    let s = steiner_summary(&z.config, &z.position);
    z.config.support_len() + 2 * s.edge_count - s.dist_x_o
}

/// `ℓ` for the switch-walk-switch generating set.
///
/// Every generator moves, so a lone lit lamp at `o` with the lamplighter at
/// `o` costs a round trip of two steps.
pub fn length_sws(z: &WreathElement) -> usize {
    let s = steiner_summary(&z.config, &z.position);
    if s.edge_count == 0 && !z.config.is_zero() {
        return 2;
    }
    2 * s.edge_count - s.dist_x_o
}

pub fn length(kind: ModelKind, z: &WreathElement) -> usize {
    match kind {
        ModelKind::WalkOrSwitch | ModelKind::MultiState => length_walk_or_switch(z),
        ModelKind::SwitchWalkSwitch => length_sws(z),
    }
}

/// Breadth-first search from the identity over the support of the model's
/// step distribution, calling `visit(z, d)` once per element with its exact
/// Cayley distance `d ≤ radius`.
pub fn bfs_visit<F>(model: &ModelSpec, radius: u32, cap: usize, mut visit: F) -> Result<usize>
where
    F: FnMut(&WreathElement, u32),
{
    if radius > MAX_ORACLE_RADIUS {
        return Err(Error::InvalidArgument(format!(
            "oracle radius must be ≤ {MAX_ORACLE_RADIUS}, got {radius}"
        )));
    }
    let generators = model.generators();
    let identity = WreathElement::identity(model.q, model.r)?;
    let mut seen: HashSet<Box<[u8]>> = HashSet::new();
    seen.insert(encode(&identity));
    visit(&identity, 0);
    let mut frontier = vec![identity];
    for d in 1..=radius {
        let mut next = Vec::new();
        for z in &frontier {
            for g in &generators {
                let mut y = z.clone();
                y.apply_in_place(g);
                if seen.insert(encode(&y)) {
                    if seen.len() > cap {
                        return Err(Error::ResourceLimit { cap });
                    }
                    visit(&y, d);
                    if d < radius {
                        next.push(y);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(seen.len())
}

/// Exact Cayley distances of every element within `radius` of the identity.
pub fn bfs_oracle(model: &ModelSpec, radius: u32) -> Result<HashMap<WreathElement, u32>> {
    let mut out = HashMap::new();
    bfs_visit(model, radius, DEFAULT_STATE_CAP, |z, d| {
        out.insert(z.clone(), d);
    })?;
    Ok(out)
}

/// An element whose closed-form length disagrees with the BFS distance.
#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub element: WreathElement,
    pub closed_form: usize,
    pub bfs: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub model: ModelKind,
    pub q: u8,
    pub r: u8,
    pub radius: u32,
    pub elements: usize,
    pub mismatches: Vec<Mismatch>,
}

/// Compares the closed-form length with BFS on the whole ball.
pub fn oracle_check(model: &ModelSpec, radius: u32, cap: usize) -> Result<OracleReport> {
    let mut mismatches = Vec::new();
    let elements = bfs_visit(model, radius, cap, |z, d| {
        let closed_form = length(model.kind, z);
        if closed_form != d as usize {
            mismatches.push(Mismatch {
                element: z.clone(),
                closed_form,
                bfs: d,
            });
        }
    })?;
    Ok(OracleReport {
        model: model.kind,
        q: model.q,
        r: model.r,
        radius,
        elements,
        mismatches,
    })
}

// Compact hash key: position letters, 0, then per lamp its letters, 0, state.
fn encode(z: &WreathElement) -> Box<[u8]> {
    let mut key = Vec::with_capacity(z.position.len() + 1 + 4 * z.config.support_len());
    key.extend_from_slice(z.position.letters());
    key.push(0);
    for (w, k) in z.config.iter() {
        key.extend_from_slice(w.letters());
        key.push(0);
        key.push(k);
    }
    key.into_boxed_slice()
}
