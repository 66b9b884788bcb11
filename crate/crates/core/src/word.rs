//! Finite symbol strings.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Index of a source symbol. Alphabets are `{0, 1, ..., k-1}` or all of `N`.
pub type Symbol = u32;

/// A finite string of symbol indices.
///
/// Words order canonically: shorter words first, then lexicographically by
/// symbol index. The textual form joins indices with `.`; the empty word is
/// written `ε`.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    /// `self` followed by `sym`.
    pub fn child(&self, sym: Symbol) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(sym);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// True if `self` is a (not necessarily strict) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_strict_prefix_of(&self, other: &Word) -> bool {
        self.0.len() < other.0.len() && self.is_prefix_of(other)
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Word(v.to_vec())
    }
}

impl Borrow<[Symbol]> for Word {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Accepts `ε` or an empty string for the empty word, dot-separated
    /// indices (`1.0.12`), or a bare digit string (`110`) where every
    /// character is one symbol.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "ε" {
            return Ok(Word::empty());
        }
        let parse = |t: &str| {
            t.parse::<Symbol>()
                .map_err(|_| Error::Input(format!("bad symbol `{t}` in word `{s}`")))
        };
        if s.contains('.') {
            s.split('.').map(parse).collect::<Result<Vec<_>, _>>().map(Word)
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| Error::Input(format!("bad symbol `{c}` in word `{s}`")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Word)
        }
    }
}

/// Shorthand for building words from digit strings in tests and fixtures.
///
/// ```
/// use vvcode::word::w;
/// assert_eq!(w("110").symbols(), &[1, 1, 0]);
/// ```
pub fn w(s: &str) -> Word {
    s.parse().expect("valid word literal")
}

/// Checks that no word in `words` is a prefix of another (duplicates count).
///
/// Returns the first offending pair in lexicographic order.
pub fn check_prefix_free(words: &[Word]) -> Result<(), Error> {
    let mut sorted: Vec<&Word> = words.iter().collect();
    sorted.sort_by(|a, b| a.symbols().cmp(b.symbols()));
    // In lexicographic order, a word that prefixes anything prefixes its successor.
    for pair in sorted.windows(2) {
        if pair[0].is_prefix_of(pair[1]) {
            return Err(Error::NotProper {
                prefix: pair[0].clone(),
                word: pair[1].clone(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_length_then_lex() {
        let mut v = vec![w("11"), w("0"), w("10"), w("1"), w("000")];
        v.sort();
        assert_eq!(v, vec![w("0"), w("1"), w("10"), w("11"), w("000")]);
    }

    #[test]
    fn display_and_parse_agree() {
        let word = Word::new(vec![12, 0, 3]);
        assert_eq!(word.to_string(), "12.0.3");
        assert_eq!(word.to_string().parse::<Word>().unwrap(), word);
        assert_eq!(Word::empty().to_string().parse::<Word>().unwrap(), Word::empty());
    }

    #[test]
    fn prefix_free_check_names_pair() {
        assert!(check_prefix_free(&[w("0"), w("10"), w("11")]).is_ok());
        match check_prefix_free(&[w("01"), w("0")]) {
            Err(Error::NotProper { prefix, word }) => {
                assert_eq!(prefix, w("0"));
                assert_eq!(word, w("01"));
            }
            other => panic!("expected NotProper, got {other:?}"),
        }
        assert!(check_prefix_free(&[w("10"), w("10")]).is_err());
    }

    #[test]
    fn prefix_detection_skips_unrelated_neighbours() {
        // 0 < 00 < 01 lexicographically; 0 prefixes its successor.
        assert!(check_prefix_free(&[w("01"), w("1"), w("0")]).is_err());
        assert!(check_prefix_free(&[w("00"), w("01"), w("1")]).is_ok());
    }
}
