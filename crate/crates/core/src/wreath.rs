//! The lamplighter group `(Z/r) ≀ T_q`.
//!
//! An element is a pair `(η, x)` of a finitely supported lamp configuration and
//! the lamplighter position. The product is
//! `(η₁, x)(η₂, y) = (η₁ ⊕ xη₂, xy)` with `(xη)(w) = η(x⁻¹w)` and `⊕` the
//! pointwise sum mod `r`.

use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::tree_group::ReducedWord;

/// Finitely supported map from vertices to `Z/r`. Zero states are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampConfig {
    q: u8,
    r: u8,
    entries: BTreeMap<ReducedWord, u8>,
}

impl LampConfig {
    /// The all-off configuration `𝟎`.
    pub fn zero(q: u8, r: u8) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParameter(format!(
                "lamp modulus r must be >= 2, got {r}"
            )));
        }
        Ok(Self {
            q,
            r,
            entries: BTreeMap::new(),
        })
    }

    /// `k·𝟙_o`.
    pub fn at_root(q: u8, r: u8, k: u32) -> Result<Self> {
        Self::from_entries(q, r, [(ReducedWord::identity(q), k)])
    }

    /// Builds a configuration, reducing states mod `r` and dropping zeros.
    /// Repeated keys are summed.
    pub fn from_entries<I>(q: u8, r: u8, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ReducedWord, u32)>,
    {
        let mut config = Self::zero(q, r)?;
        for (w, k) in entries {
            if w.q() != q {
                return Err(Error::AlphabetMismatch {
                    left: q,
                    right: w.q(),
                });
            }
            config.add(&w, (k % r as u32) as u8);
        }
        Ok(config)
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn r(&self) -> u8 {
        self.r
    }

    pub fn get(&self, w: &ReducedWord) -> u8 {
        self.entries.get(w).copied().unwrap_or(0)
    }

    /// Adds `k` (mod `r`) to the lamp at `w`.
    pub fn add(&mut self, w: &ReducedWord, k: u8) {
        let k = k % self.r;
        if k == 0 {
            return;
        }
        let r = self.r as u16;
        let next = ((self.get(w) as u16 + k as u16) % r) as u8;
        if next == 0 {
            self.entries.remove(w);
        } else {
            self.entries.insert(w.clone(), next);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|supp(η)|`.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &ReducedWord> {
        self.entries.keys()
    }

    /// Lit lamps in lexicographic order of their vertex.
    pub fn iter(&self) -> impl Iterator<Item = (&ReducedWord, u8)> {
        self.entries.iter().map(|(w, &k)| (w, k))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.q != other.q {
            return Err(Error::AlphabetMismatch {
                left: self.q,
                right: other.q,
            });
        }
        if self.r != other.r {
            return Err(Error::ModulusMismatch {
                left: self.r,
                right: other.r,
            });
        }
        Ok(())
    }

    /// `x·η`, the configuration shifted by `w ↦ x∘w`.
    pub fn translate(&self, x: &ReducedWord) -> Result<Self> {
        if x.q() != self.q {
            return Err(Error::AlphabetMismatch {
                left: self.q,
                right: x.q(),
            });
        }
        let mut entries = BTreeMap::new();
        for (w, &k) in &self.entries {
            entries.insert(x.mul(w)?, k);
        }
        Ok(Self {
            q: self.q,
            r: self.r,
            entries,
        })
    }

    /// Pointwise sum mod `r`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, &k) in &other.entries {
            out.add(w, k);
        }
        Ok(out)
    }

    /// `−η` (mod `r`).
    pub fn negate(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(w, &k)| (w.clone(), self.r - k))
            .collect();
        Self {
            q: self.q,
            r: self.r,
            entries,
        }
    }

    /// `η_a` (restriction to the cone `C_a`) when `inside`, otherwise `η̄_a`.
    pub fn restrict_to_cone(&self, a: u8, inside: bool) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(w, _)| (w.first_letter() == Some(a)) == inside)
            .map(|(w, &k)| (w.clone(), k))
            .collect();
        Self {
            q: self.q,
            r: self.r,
            entries,
        }
    }
}

/// One element of the generating set of a walk model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    /// `(k·𝟙_o, o)`: add `k` to the lamp at the current position.
    SwitchAt(u8),
    /// `(𝟎, a_i)`: step along edge `i`.
    Move(u8),
    /// `(𝟙_A, a_i)` of the switch-walk-switch model: optionally flip the
    /// source lamp, move along `letter`, optionally flip the destination lamp.
    SwsMove {
        flip_source: u8,
        letter: u8,
        flip_dest: u8,
    },
}

impl Generator {
    pub fn validate(&self, q: u8, r: u8) -> Result<()> {
        let check_letter = |letter: u8| {
            if letter == 0 || letter > q {
                Err(Error::InvalidGenerator {
                    letter: letter as u32,
                    q,
                })
            } else {
                Ok(())
            }
        };
        match *self {
            Generator::SwitchAt(k) if k == 0 || k >= r => Err(Error::InvalidArgument(format!(
                "switch state {k} outside 1..{r}"
            ))),
            Generator::SwitchAt(_) => Ok(()),
            Generator::Move(letter) => check_letter(letter),
            Generator::SwsMove {
                flip_source,
                letter,
                flip_dest,
            } => {
                if r != 2 || flip_source > 1 || flip_dest > 1 {
                    return Err(Error::InvalidArgument(
                        "switch-walk-switch generators need r = 2 and flips in {0, 1}".into(),
                    ));
                }
                check_letter(letter)
            }
        }
    }

    /// The group element this generator stands for.
    pub fn embed(&self, q: u8, r: u8) -> Result<WreathElement> {
        self.validate(q, r)?;
        WreathElement::identity(q, r)?.apply_generator(self)
    }
}

/// A lamplighter group element `(η, x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathElement {
    pub config: LampConfig,
    pub position: ReducedWord,
}

impl WreathElement {
    pub fn identity(q: u8, r: u8) -> Result<Self> {
        Ok(Self {
            config: LampConfig::zero(q, r)?,
            position: ReducedWord::identity(q),
        })
    }

    pub fn new(config: LampConfig, position: ReducedWord) -> Result<Self> {
        if config.q() != position.q() {
            return Err(Error::AlphabetMismatch {
                left: config.q(),
                right: position.q(),
            });
        }
        Ok(Self { config, position })
    }

    pub fn q(&self) -> u8 {
        self.position.q()
    }

    pub fn r(&self) -> u8 {
        self.config.r()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let shifted = other.config.translate(&self.position)?;
        Ok(Self {
            config: self.config.sum(&shifted)?,
            position: self.position.mul(&other.position)?,
        })
    }

    /// `(−x⁻¹η, x⁻¹)`.
    pub fn inverse(&self) -> Self {
        let position = self.position.inverse();
        let config = self
            .config
            .negate()
            .translate(&position)
            .expect("configuration and position share q");
        Self { config, position }
    }

    /// Right multiplication by a generator, `z · g`.
    pub fn apply_generator(&self, g: &Generator) -> Result<Self> {
        g.validate(self.q(), self.r())?;
        let mut z = self.clone();
        z.apply_in_place(g);
        Ok(z)
    }

    /// Unchecked in-place variant of [`apply_generator`](Self::apply_generator).
    pub(crate) fn apply_in_place(&mut self, g: &Generator) {
        match *g {
            Generator::SwitchAt(k) => self.config.add(&self.position, k),
            Generator::Move(letter) => self.position.push_generator(letter),
            Generator::SwsMove {
                flip_source,
                letter,
                flip_dest,
            } => {
                self.config.add(&self.position, flip_source);
                self.position.push_generator(letter);
                self.config.add(&self.position, flip_dest);
            }
        }
    }

    /// JSON rendering: `{"position":[..],"lamps":[[[..],k],..],"r":r}` with
    /// lamps sorted by vertex.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wreath element serialization is infallible")
    }

    /// Parses the JSON rendering. The alphabet size is not part of the format
    /// and has to be supplied.
    pub fn from_json(json: &str, q: u8) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            position: Vec<u32>,
            lamps: Vec<(Vec<u32>, u32)>,
            r: u8,
        }
        let raw: Raw = serde_json::from_str(json)
            .map_err(|e| Error::InvalidArgument(format!("malformed wreath element: {e}")))?;
        let position = ReducedWord::reduce(q, &raw.position)?;
        let mut lamps = Vec::with_capacity(raw.lamps.len());
        for (w, k) in raw.lamps {
            lamps.push((ReducedWord::reduce(q, &w)?, k));
        }
        Self::new(LampConfig::from_entries(q, raw.r, lamps)?, position)
    }
}

impl Serialize for WreathElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let lamps: Vec<(&[u8], u8)> = self.config.iter().map(|(w, k)| (w.letters(), k)).collect();
        let mut s = serializer.serialize_struct("WreathElement", 3)?;
        s.serialize_field("position", self.position.letters())?;
        s.serialize_field("lamps", &lamps)?;
        s.serialize_field("r", &self.config.r())?;
        s.end()
    }
}
