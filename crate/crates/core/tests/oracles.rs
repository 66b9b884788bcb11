//! Library results against values computed independently in test code.

mod common;

use common::*;
use vvcode::codec::{huffman_build, tunstall_build};
use vvcode::dictionary::{Alphabet, Budget};
use vvcode::measures::{avg_length, dict_entropy, evaluate};
use vvcode::{Dictionary, SourceModel, Word};

fn geometric_pmf(p: f64, n: u32) -> f64 {
    p * (1.0 - p).powi(n as i32)
}

#[test]
fn geometric_entropy_matches_direct_sum() {
    for &p in &[0.1, 0.25, 0.5, 0.9] {
        let direct: f64 = (0..5000).map(|n| geometric_pmf(p, n)).filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum();
        let s = SourceModel::geometric(p).unwrap();
        assert!((s.entropy() - direct).abs() < 1e-12, "p={p}");
    }
}

#[test]
fn run_length_series_oracles() {
    // P(1^k 0) = q^k (1-q) with q = P(1); summed to k = 300.
    for (probs, q) in [(vec![0.5, 0.5], 0.5f64), (vec![0.9, 0.1], 0.1)] {
        let s = SourceModel::finite(probs).unwrap();
        let mut h = 0.0;
        let mut l = 0.0;
        for k in 0..=300 {
            let p = q.powi(k) * (1.0 - q);
            if p > 0.0 {
                h -= p * p.log2();
                l += p * (k + 1) as f64;
            }
        }
        let d = Dictionary::run_length(Alphabet::Finite(2)).unwrap();
        let hi = dict_entropy(&d, &s, 64).unwrap();
        let li = avg_length(&d, &s, 64).unwrap();
        assert!(hi.contains(h, 1e-12) && hi.width() < 1e-9, "{hi:?} vs {h}");
        assert!(li.contains(l, 1e-12) && li.width() < 1e-9, "{li:?} vs {l}");
    }
    assert!((avg_length(&Dictionary::run_length(Alphabet::Finite(2)).unwrap(), &SourceModel::finite(vec![0.9, 0.1]).unwrap(), 64).unwrap().midpoint() - 10.0 / 9.0).abs() < 1e-12);
}

#[test]
fn head_extension_over_geometric_matches_explicit_sum() {
    let p = 0.5;
    let s = SourceModel::geometric(p).unwrap();
    let mut h = 0.0;
    let mut l = 0.0;
    let p0 = geometric_pmf(p, 0);
    for a in 1..1100 {
        let pa = geometric_pmf(p, a);
        if pa > 0.0 {
            h -= pa * pa.log2();
            l += pa;
        }
    }
    for b in 0..1100 {
        let pw = p0 * geometric_pmf(p, b);
        if pw > 0.0 {
            h -= pw * pw.log2();
            l += 2.0 * pw;
        }
    }
    let d = Dictionary::head_extension(0, Alphabet::Countable).unwrap();
    let ev = evaluate(&d, &s, 8).unwrap();
    assert!(ev.exact);
    assert!((ev.h_d.low - h).abs() < 1e-12, "{} vs {h}", ev.h_d.low);
    assert!((ev.lbar.low - l).abs() < 1e-12);
    assert!((h - s.entropy() * (1.0 + p0)).abs() < 1e-12);
}

#[test]
fn frontier_mass_matches_enumeration() {
    let s = SourceModel::finite(vec![0.7, 0.3]).unwrap();
    let mut r = rng(11);
    for _ in 0..30 {
        let ws = random_words(&mut r, 2, 7, true);
        let d = dict(2, &ws);
        for n in 1..=8 {
            let t: f64 = oracle_t(&ws, 2, n).iter().map(|w| prob(&s, w)).sum();
            let got = d.mass_profile(&s, n).unwrap().frontier_mass();
            assert!((got - t).abs() < 1e-12, "n={n}: {got} vs {t}");
        }
    }
    // Lazy family: P(T_n) of run_length is P(1^n).
    let d = Dictionary::run_length(Alphabet::Finite(2)).unwrap();
    for n in 1..30 {
        let got = d.mass_profile(&s, n).unwrap().frontier_mass();
        assert!((got - 0.3f64.powi(n as i32)).abs() < 1e-15);
        let t = d.truncate(n, Budget::default()).unwrap().t_n;
        assert_eq!(t, vec![Word::new(vec![1; n])]);
    }
}

#[test]
fn truncation_matches_definition() {
    for ws in binary_corpus(3, 40) {
        let d = dict(2, &ws);
        for n in 1..=9 {
            let f = d.truncate(n, Budget::default()).unwrap();
            assert_eq!(f.t_n, oracle_t(&ws, 2, n));
            assert_eq!(f.d_n.words().unwrap(), oracle_d_n(&ws, 2, n));
            let mut perp: Vec<Word> = ws.iter().filter(|w| w.len() == n).cloned().collect();
            perp.extend(f.t_n.iter().cloned());
            perp.sort();
            assert_eq!(f.d_n_perp, perp);
        }
    }
}

#[test]
fn lazy_truncation_matches_finite_copy() {
    // run_length's words up to length 12, written out, truncate the same way.
    let lazy = Dictionary::run_length(Alphabet::Finite(2)).unwrap();
    let mut ws: Vec<Word> = (0..12).map(|k| {
        let mut v = vec![1; k];
        v.push(0);
        Word::new(v)
    }).collect();
    ws.sort();
    for n in 1..=12 {
        let a = lazy.truncated(n, Budget::default()).unwrap().words().unwrap();
        assert_eq!(a, oracle_d_n(&ws, 2, n), "n={n}");
    }
}

/// Textbook Huffman on a sorted list; only the expected length is compared.
fn oracle_huffman_cost(p: &[f64]) -> f64 {
    if p.len() == 1 {
        return p[0];
    }
    let mut v: Vec<f64> = p.to_vec();
    let mut cost = 0.0;
    while v.len() > 1 {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let a = v.pop().unwrap();
        let b = v.pop().unwrap();
        cost += a + b;
        v.push(a + b);
    }
    cost
}

#[test]
fn huffman_cost_is_optimal() {
    let mut r = rng(5);
    for n in 1..60 {
        let raw: Vec<f64> = (0..n).map(|_| 0.01 + unit(&mut r)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let phrases: Vec<(Word, f64)> = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                // Words 1^i 0 are prefix-free.
                let mut v = vec![1; i];
                v.push(0);
                (Word::new(v), p)
            })
            .collect();
        let cb = huffman_build(&phrases).unwrap();
        let cost: f64 = phrases.iter().map(|(w, p)| p * cb.codeword(w).unwrap().len() as f64).sum();
        assert!((cost - oracle_huffman_cost(&probs)).abs() < 1e-12, "n={n}");
        assert!(cb.kraft_sum() <= 1.0 + 1e-15);
    }
}

#[test]
fn tunstall_matches_exhaustive_oracle() {
    // Oracle: repeatedly replace the most probable leaf, scanning a plain list.
    let s = SourceModel::finite(vec![0.6, 0.3, 0.1]).unwrap();
    for target in [3, 5, 7, 11, 25] {
        let mut leaves: Vec<Word> = (0..3).map(|a| Word::new(vec![a])).collect();
        while leaves.len() + 2 <= target {
            let best = leaves
                .iter()
                .enumerate()
                .max_by(|a, b| prob(&s, a.1).partial_cmp(&prob(&s, b.1)).unwrap().then_with(|| b.1.cmp(a.1)))
                .unwrap()
                .0;
            let w = leaves.remove(best);
            leaves.extend((0..3).map(|a| w.child(a)));
        }
        leaves.sort();
        assert_eq!(tunstall_build(&s, target).unwrap().words().unwrap(), leaves);
    }
}

#[test]
fn block_family_chain_over_countable_frontier() {
    let g = SourceModel::geometric(0.5).unwrap();
    let d = Dictionary::block(2, Alphabet::Countable).unwrap();
    let d1 = d.truncated(1, Budget::default()).unwrap();
    let ev = evaluate(&d1, &g, 1).unwrap();
    assert!((ev.h_d.low - g.entropy()).abs() < 1e-12);
    assert_eq!(ev.lbar.low, 1.0);
    let ev = evaluate(&d, &g, 1).unwrap();
    assert!((ev.h_d.low - 2.0 * g.entropy()).abs() < 1e-12);
    assert!((ev.lbar.low - 2.0).abs() < 1e-15);
}
