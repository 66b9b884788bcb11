//! Shared helpers for the integration tests: a seeded generator of proper
//! dictionaries and brute-force oracles that work on explicit word lists.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use vvcode::dictionary::Alphabet;
use vvcode::{Dictionary, SourceModel, Word};

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn unit(r: &mut Xoshiro256PlusPlus) -> f64 {
    (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Random prefix-free word set over `{0..k-1}` with words of length at most
/// `max_depth`. With `gaps` some branches are left uncovered, so the result
/// is generally neither complete nor almost surely complete.
pub fn random_words(r: &mut Xoshiro256PlusPlus, k: u32, max_depth: usize, gaps: bool) -> Vec<Word> {
    loop {
        let mut out = Vec::new();
        grow(r, k, max_depth, gaps, &mut Vec::new(), &mut out);
        if !out.is_empty() {
            out.sort();
            return out;
        }
    }
}

fn grow(r: &mut Xoshiro256PlusPlus, k: u32, max_depth: usize, gaps: bool, prefix: &mut Vec<u32>, out: &mut Vec<Word>) {
    for s in 0..k {
        prefix.push(s);
        let u = unit(r);
        let gap = if gaps { 0.15 } else { 0.0 };
        if u < gap {
            // uncovered branch
        } else if prefix.len() == max_depth || u < gap + 0.4 {
            out.push(Word::new(prefix.clone()));
        } else {
            grow(r, k, max_depth, gaps, prefix, out);
        }
        prefix.pop();
    }
}

pub fn dict(k: u32, words: &[Word]) -> Dictionary {
    Dictionary::from_words(Alphabet::Finite(k), words.to_vec()).unwrap()
}

/// Fixed corpus of binary word sets: hand-picked cases followed by random
/// ones, half of them with uncovered branches.
pub fn binary_corpus(seed: u64, random: usize) -> Vec<Vec<Word>> {
    let mut corpus: Vec<Vec<Word>> = [&["0"][..], &["0", "10", "11"], &["0", "1"], &["00", "01", "1"], &["1", "01"]]
        .iter()
        .map(|ws| {
            let mut v: Vec<Word> = ws.iter().map(|s| s.parse().unwrap()).collect();
            v.sort();
            v
        })
        .collect();
    let mut r = rng(seed);
    for i in 0..random {
        corpus.push(random_words(&mut r, 2, 8, i % 2 == 0));
    }
    corpus
}

/// Random finite source over `k` symbols with no tiny probabilities.
pub fn random_source(r: &mut Xoshiro256PlusPlus, k: usize) -> SourceModel {
    let raw: Vec<f64> = (0..k).map(|_| 0.05 + unit(r)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    SourceModel::finite(p).unwrap()
}

/// Every string over `{0..k-1}` of length exactly `n`, canonical order.
pub fn all_strings(k: u32, n: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                (0..k).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(Word::new).collect()
}

pub fn has_prefix_in(w: &Word, set: &BTreeSet<Word>) -> bool {
    (1..=w.len()).any(|i| set.contains(&Word::from(&w.symbols()[..i])))
}

/// `T_n` straight from the definition.
pub fn oracle_t(words: &[Word], k: u32, n: usize) -> Vec<Word> {
    let set: BTreeSet<Word> = words.iter().cloned().collect();
    all_strings(k, n).into_iter().filter(|s| !has_prefix_in(s, &set)).collect()
}

/// `D_n` straight from the definition.
pub fn oracle_d_n(words: &[Word], k: u32, n: usize) -> Vec<Word> {
    let mut out: Vec<Word> = words.iter().filter(|w| w.len() <= n).cloned().collect();
    out.extend(oracle_t(words, k, n));
    out.sort();
    out
}

/// `D[α]` straight from the definition.
pub fn oracle_extend(words: &[Word], k: u32, alpha: &Word) -> Vec<Word> {
    let mut out: Vec<Word> = words.iter().filter(|w| *w != alpha).cloned().collect();
    out.extend((0..k).map(|s| alpha.child(s)));
    out.sort();
    out
}

pub fn prob(s: &SourceModel, w: &Word) -> f64 {
    w.symbols().iter().map(|&a| s.prob(a).unwrap()).product()
}

/// `(H(D), l̄(D))` by plain summation.
pub fn oracle_measures(words: &[Word], s: &SourceModel) -> (f64, f64) {
    let mut h = 0.0;
    let mut l = 0.0;
    for w in words {
        let p = prob(s, w);
        h -= p * p.log2();
        l += p * w.len() as f64;
    }
    (h, l)
}
