//! Live lamplighter state for long trajectories.
//!
//! Visited vertices live in an arena indexed by `u32`, so a step never
//! touches a word of length `|X_n|`. The walker maintains the word length
//! incrementally via the Steiner edge count `E` of `{o, x} ∪ supp(η)`.
//!
//! For every arena node `v`, `acc[v]` counts lit lamps as follows:
//! * `v` off the root-to-`x` path: lit lamps in the whole subtree of `v`;
//! * `v` on the path: lamp of `v` plus the subtrees of its off-path children.
//!
//! Both counts change in O(1) per step. An edge `(v⁻, v)` belongs to the
//! Steiner tree iff the subtree of `v` holds `x` or a lit lamp, which is
//! exactly what the counts answer for the neighbours of `x`.

use crate::model::ModelKind;
use crate::tree_group::ReducedWord;
use crate::wreath::{Generator, LampConfig, WreathElement};

const NONE: u32 = u32::MAX;
pub(crate) const ROOT: u32 = 0;

#[derive(Clone, Debug)]
pub struct Walker {
    kind: ModelKind,
    q: u8,
    r: u8,
    parent: Vec<u32>,
    letter: Vec<u8>,
    depth: Vec<u32>,
    first: Vec<u8>,
    lamp: Vec<u8>,
    acc: Vec<u32>,
    children: Vec<u32>,
    pos: u32,
    lit: usize,
    edges: usize,
}

impl Walker {
    pub fn new(kind: ModelKind, q: u8, r: u8) -> Self {
        let mut walker = Self {
            kind,
            q,
            r,
            parent: Vec::new(),
            letter: Vec::new(),
            depth: Vec::new(),
            first: Vec::new(),
            lamp: Vec::new(),
            acc: Vec::new(),
            children: Vec::new(),
            pos: ROOT,
            lit: 0,
            edges: 0,
        };
        walker.push_node(NONE, 0, 0, 0);
        walker
    }

    fn push_node(&mut self, parent: u32, letter: u8, depth: u32, first: u8) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(parent);
        self.letter.push(letter);
        self.depth.push(depth);
        self.first.push(first);
        self.lamp.push(0);
        self.acc.push(0);
        self.children
            .extend(std::iter::repeat_n(NONE, self.q as usize));
        id
    }

    fn child(&mut self, v: u32, letter: u8) -> u32 {
        let slot = v as usize * self.q as usize + (letter - 1) as usize;
        let c = self.children[slot];
        if c != NONE {
            return c;
        }
        let first = if v == ROOT {
            letter
        } else {
            self.first[v as usize]
        };
        let c = self.push_node(v, letter, self.depth[v as usize] + 1, first);
        self.children[slot] = c;
        c
    }

    pub fn step(&mut self, g: &Generator) {
        match *g {
            Generator::SwitchAt(k) => self.switch(k),
            Generator::Move(letter) => self.move_along(letter),
            Generator::SwsMove {
                flip_source,
                letter,
                flip_dest,
            } => {
                self.switch(flip_source);
                self.move_along(letter);
                self.switch(flip_dest);
            }
        }
    }

    fn switch(&mut self, k: u8) {
        if k == 0 {
            return;
        }
        let x = self.pos as usize;
        let before = self.lamp[x];
        let after = ((before as u16 + k as u16) % self.r as u16) as u8;
        self.lamp[x] = after;
        match (before == 0, after == 0) {
            (true, false) => {
                self.acc[x] += 1;
                self.lit += 1;
            }
            (false, true) => {
                self.acc[x] -= 1;
                self.lit -= 1;
            }
            _ => {}
        }
    }

    fn move_along(&mut self, letter: u8) {
        let x = self.pos;
        if x != ROOT && self.letter[x as usize] == letter {
            let w = self.parent[x as usize];
            let below = self.acc[x as usize];
            if below == 0 {
                self.edges -= 1;
            }
            self.acc[w as usize] += below;
            self.pos = w;
        } else {
            let y = self.child(x, letter);
            let below = self.acc[y as usize];
            if below == 0 {
                self.edges += 1;
            }
            self.acc[x as usize] -= below;
            self.pos = y;
        }
    }

    /// Current word length `ℓ(Z_n)` in the model's Cayley graph.
    pub fn length(&self) -> usize {
        let depth = self.depth() as usize;
        match self.kind {
            ModelKind::WalkOrSwitch | ModelKind::MultiState => self.lit + 2 * self.edges - depth,
            ModelKind::SwitchWalkSwitch => {
                if self.edges == 0 && self.lit > 0 {
                    2
                } else {
                    2 * self.edges - depth
                }
            }
        }
    }

    /// `|X_n|`.
    pub fn depth(&self) -> u32 {
        self.depth[self.pos as usize]
    }

    pub fn position(&self) -> u32 {
        self.pos
    }

    pub fn node_depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn lit_count(&self) -> usize {
        self.lit
    }

    pub fn first_letter(&self) -> Option<u8> {
        (self.pos != ROOT).then(|| self.first[self.pos as usize])
    }

    pub fn lamp_at_root(&self) -> u8 {
        self.lamp[ROOT as usize]
    }

    /// Lit lamps strictly inside the cones of the forward neighbours of the
    /// parent of `x` other than `x` itself.
    pub(crate) fn lit_in_sibling_cones(&self) -> bool {
        debug_assert_ne!(self.pos, ROOT);
        let v = self.parent[self.pos as usize] as usize;
        self.acc[v] > (self.lamp[v] != 0) as u32
    }

    /// `(depth, first letter, state)` of every lit lamp; the root reports first letter 0.
    pub fn lit_lamps(&self) -> impl Iterator<Item = (u32, u8, u8)> + '_ {
        (0..self.lamp.len())
            .filter(|&v| self.lamp[v] != 0)
            .map(|v| (self.depth[v], self.first[v], self.lamp[v]))
    }

    fn word(&self, mut v: u32) -> ReducedWord {
        let mut letters = Vec::with_capacity(self.depth[v as usize] as usize);
        while v != ROOT {
            letters.push(self.letter[v as usize] as u32);
            v = self.parent[v as usize];
        }
        letters.reverse();
        ReducedWord::reduce(self.q, &letters).expect("arena words are reduced")
    }

    /// Materialises the current state as a group element.
    pub fn to_element(&self) -> WreathElement {
        let lamps = (0..self.lamp.len() as u32)
            .filter(|&v| self.lamp[v as usize] != 0)
            .map(|v| (self.word(v), self.lamp[v as usize] as u32));
        let config = LampConfig::from_entries(self.q, self.r, lamps).expect("valid modulus");
        WreathElement::new(config, self.word(self.pos)).expect("same alphabet")
    }
}
