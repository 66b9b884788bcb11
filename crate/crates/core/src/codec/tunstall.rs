//! Tunstall parsing dictionaries, grown one extension at a time from `A`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dictionary::{Alphabet, Dictionary};
use crate::error::{Error, Result};
use crate::source::SourceModel;
use crate::word::Word;

struct Leaf {
    prob: f64,
    word: Word,
}

// Max-heap order: higher probability first, then the canonically smaller word.
impl Ord for Leaf {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob.total_cmp(&other.prob).then_with(|| other.word.cmp(&self.word))
    }
}

impl PartialOrd for Leaf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Leaf {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Leaf {}

/// Greedy Tunstall dictionary with at most `target_size` words.
///
/// Starts from the alphabet and extends the most probable word while one
/// more extension still fits.
pub fn tunstall_build(source: &SourceModel, target_size: usize) -> Result<Dictionary> {
    let k = source
        .alphabet_size()
        .ok_or_else(|| Error::Unsupported("Tunstall needs a finite alphabet".into()))?;
    if k < 2 {
        return Err(Error::Precondition("Tunstall needs at least two symbols".into()));
    }
    if target_size < k as usize {
        return Err(Error::Precondition(format!("target size {target_size} is below the alphabet size {k}")));
    }
    let probs = source.probs().expect("finite source");
    let mut d = Dictionary::alphabet_dictionary(Alphabet::Finite(k));
    let mut heap: BinaryHeap<Leaf> =
        (0..k).map(|s| Leaf { prob: probs[s as usize], word: Word::new(vec![s]) }).collect();
    let mut size = k as usize;
    while size + (k as usize - 1) <= target_size {
        let Leaf { prob, word } = heap.pop().expect("a complete dictionary is never empty");
        d.extend_in_place(&word)?;
        for s in 0..k {
            heap.push(Leaf { prob: prob * probs[s as usize], word: word.child(s) });
        }
        size += k as usize - 1;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    fn words(d: &Dictionary) -> Vec<Word> {
        d.words().unwrap()
    }

    fn ws(list: &[&str]) -> Vec<Word> {
        let mut v: Vec<Word> = list.iter().map(|s| w(s)).collect();
        v.sort();
        v
    }

    #[test]
    fn examples() {
        assert_eq!(words(&tunstall_build(&SourceModel::fair_bit(), 4).unwrap()), ws(&["00", "01", "10", "11"]));
        let biased = SourceModel::finite(vec![0.9, 0.1]).unwrap();
        assert_eq!(words(&tunstall_build(&biased, 4).unwrap()), ws(&["000", "001", "01", "1"]));
        assert_eq!(words(&tunstall_build(&SourceModel::fair_bit(), 2).unwrap()), ws(&["0", "1"]));
    }

    #[test]
    fn size_and_completeness() {
        let s = SourceModel::finite(vec![0.5, 0.3, 0.2]).unwrap();
        for target in 3..40 {
            let d = tunstall_build(&s, target).unwrap();
            let n = words(&d).len();
            assert!(n <= target && n + 2 > target, "{target}: {n}");
            assert!(d.is_complete(3).unwrap());
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(tunstall_build(&SourceModel::geometric(0.5).unwrap(), 8), Err(Error::Unsupported(_))));
        assert!(matches!(tunstall_build(&SourceModel::uniform(4).unwrap(), 3), Err(Error::Precondition(_))));
    }
}
