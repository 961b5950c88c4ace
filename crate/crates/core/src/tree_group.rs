//! Vertices of the homogeneous tree `T_q`, realised as reduced words in the
//! free product of `q` copies of `Z/2`.
//!
//! A word is a sequence of generator indices `1..=q` with no two equal
//! neighbours. The empty word is the root `o`. Multiplication concatenates and
//! cancels `a_i a_i` blocks, every generator is its own inverse, and the word
//! length is the tree distance to the root.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported alphabet size.
pub const MAX_Q: u8 = 64;

/// A vertex of `T_q` in canonical (fully reduced) form.
///
/// Constructors always reduce, so derived equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    q: u8,
    letters: Vec<u8>,
}

fn check_q(q: u8) -> Result<()> {
    if q == 0 || q > MAX_Q {
        return Err(Error::InvalidParameter(format!(
            "alphabet size q must be in 1..={MAX_Q}, got {q}"
        )));
    }
    Ok(())
}

impl ReducedWord {
    /// The root `o`.
    pub fn identity(q: u8) -> Self {
        Self {
            q,
            letters: Vec::new(),
        }
    }

    /// Reduces an arbitrary letter sequence by iterated deletion of `a_i a_i` blocks.
    pub fn reduce(q: u8, letters: &[u32]) -> Result<Self> {
        check_q(q)?;
        let mut out: Vec<u8> = Vec::with_capacity(letters.len());
        for &letter in letters {
            if letter == 0 || letter > q as u32 {
                return Err(Error::InvalidGenerator { letter, q });
            }
            let letter = letter as u8;
            if out.last() == Some(&letter) {
                out.pop();
            } else {
                out.push(letter);
            }
        }
        Ok(Self { q, letters: out })
    }

    /// A single generator `a_i`.
    pub fn generator(q: u8, letter: u8) -> Result<Self> {
        Self::reduce(q, &[letter as u32])
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    /// `|w|`, the distance to the root.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.is_empty()
    }

    pub fn first_letter(&self) -> Option<u8> {
        self.letters.first().copied()
    }

    pub fn last_letter(&self) -> Option<u8> {
        self.letters.last().copied()
    }

    /// Right multiplication by one generator, in place.
    pub fn push_generator(&mut self, letter: u8) {
        debug_assert!(letter >= 1 && letter <= self.q);
        if self.letters.last() == Some(&letter) {
            self.letters.pop();
        } else {
            self.letters.push(letter);
        }
    }

    /// The predecessor `x⁻` (neighbour closer to the root), `None` at the root.
    pub fn parent(&self) -> Option<Self> {
        if self.letters.is_empty() {
            return None;
        }
        Some(Self {
            q: self.q,
            letters: self.letters[..self.letters.len() - 1].to_vec(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::AlphabetMismatch {
                left: self.q,
                right: other.q,
            });
        }
        let cancel = self
            .letters
            .iter()
            .rev()
            .zip(other.letters.iter())
            .take_while(|(a, b)| a == b)
            .count();
        let mut letters = Vec::with_capacity(self.len() + other.len() - 2 * cancel);
        letters.extend_from_slice(&self.letters[..self.len() - cancel]);
        letters.extend_from_slice(&other.letters[cancel..]);
        Ok(Self { q: self.q, letters })
    }

    pub fn inverse(&self) -> Self {
        let mut letters = self.letters.clone();
        letters.reverse();
        Self { q: self.q, letters }
    }

    /// Tree distance `|u⁻¹v|`, computed by stripping the common prefix.
    pub fn dist(&self, other: &Self) -> usize {
        debug_assert_eq!(self.q, other.q);
        let common = common_prefix_len(&self.letters, &other.letters);
        self.len() + other.len() - 2 * common
    }

    /// True iff `root` is a prefix of `self`, i.e. `self ∈ C_root`.
    pub fn is_in_cone(&self, root: &Self) -> bool {
        self.letters.starts_with(&root.letters)
    }

    /// The `q` neighbours of this vertex.
    pub fn neighbors(&self) -> Result<Vec<Self>> {
        if self.q < 3 {
            return Err(Error::InvalidParameter(format!(
                "q must be >= 3, got {}",
                self.q
            )));
        }
        Ok((1..=self.q)
            .map(|letter| {
                let mut w = self.clone();
                w.push_generator(letter);
                w
            })
            .collect())
    }
}

pub(crate) fn common_prefix_len(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Lexicographic on letters: a prefix sorts before its extensions.
impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters.cmp(&other.letters).then(self.q.cmp(&other.q))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("o");
        }
        for (i, letter) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "a{letter}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
