//! Discrete memoryless sources over finite or countably infinite alphabets.
//!
//! A source assigns every symbol a strictly positive probability. Words get
//! the product measure: `P(a1 a2 ... an) = P(a1) P(a2) ... P(an)`, computed
//! left to right starting from `1.0`, so the empty word has probability one.
//!
//! # Sampling
//!
//! Streams are drawn with xoshiro256++ seeded through SplitMix64
//! (`rand_xoshiro`'s `seed_from_u64`). Stream `i` of a seed uses the
//! generator seeded with `seed ^ splitmix64(i)`, where `splitmix64(i)` is the
//! first output of a SplitMix64 generator whose state is `i`. A uniform
//! deviate is `(next_u64 >> 11) * 2^-53`. Finite sources invert the
//! cumulative table (first index whose running sum exceeds the deviate);
//! geometric sources return `floor(ln(1 - u) / ln(1 - p))`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, surprisal_term};
use crate::word::{Symbol, Word};

/// Tolerance on `sum(probs) - 1` for a constructed finite source.
pub const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// Largest `|sum(probs) - 1|` the file loader will silently renormalize.
pub const LOADER_RENORMALIZE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Finite(Vec<f64>),
    Geometric(f64),
}

/// A memoryless source `(P, A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceModel {
    kind: Kind,
}

impl SourceModel {
    /// Finite alphabet `{0, ..., probs.len()-1}`.
    pub fn finite(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("finite source needs at least one symbol".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Domain(format!(
                    "symbol {i} has probability {p}; probabilities must lie in (0, 1]"
                )));
            }
        }
        let total = numeric::sum(probs.iter().copied());
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(SourceModel { kind: Kind::Finite(probs) })
    }

    /// Countable alphabet with `P(i) = p (1-p)^i`.
    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("geometric parameter {p} must lie in (0, 1)")));
        }
        Ok(SourceModel { kind: Kind::Geometric(p) })
    }

    pub fn fair_bit() -> Self {
        SourceModel { kind: Kind::Finite(vec![0.5, 0.5]) }
    }

    /// Uniform over `k` symbols.
    pub fn uniform(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("uniform source needs k >= 1".into()));
        }
        Ok(SourceModel { kind: Kind::Finite(vec![1.0 / k as f64; k as usize]) })
    }

    /// `None` for countably infinite alphabets.
    pub fn alphabet_size(&self) -> Option<u32> {
        match &self.kind {
            Kind::Finite(p) => Some(p.len() as u32),
            Kind::Geometric(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alphabet_size().is_some()
    }

    /// Per-symbol probabilities of a finite source.
    pub fn probs(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Finite(p) => Some(p),
            Kind::Geometric(_) => None,
        }
    }

    /// Geometric parameter, if this is a geometric source.
    pub fn geometric_p(&self) -> Option<f64> {
        match self.kind {
            Kind::Geometric(p) => Some(p),
            Kind::Finite(_) => None,
        }
    }

    pub fn is_valid_symbol(&self, sym: Symbol) -> bool {
        match &self.kind {
            Kind::Finite(p) => (sym as usize) < p.len(),
            Kind::Geometric(_) => true,
        }
    }

    pub fn prob(&self, sym: Symbol) -> Result<f64> {
        match &self.kind {
            Kind::Finite(p) => p.get(sym as usize).copied().ok_or_else(|| {
                Error::Domain(format!("symbol {sym} outside alphabet of size {}", p.len()))
            }),
            Kind::Geometric(p) => Ok(geometric_prob(*p, sym)),
        }
    }

    /// Source entropy `H(P)` in bits per symbol.
    pub fn entropy(&self) -> f64 {
        match &self.kind {
            Kind::Finite(p) => numeric::sum(p.iter().map(|&x| surprisal_term(x))),
            Kind::Geometric(p) => {
                let q = 1.0 - p;
                (surprisal_term(q) + surprisal_term(*p)) / p
            }
        }
    }

    /// Product-measure probability of a word; `1.0` for the empty word.
    pub fn word_prob(&self, word: &Word) -> Result<f64> {
        word.symbols()
            .iter()
            .try_fold(1.0, |acc, &s| Ok(acc * self.prob(s)?))
    }

    /// Mass and entropy contribution (`sum of -P(a) log2 P(a)`) of every
    /// symbol NOT in `listed`. `listed` must be sorted and duplicate-free.
    pub(crate) fn complement_stats(&self, listed: &[Symbol]) -> (f64, f64) {
        match &self.kind {
            Kind::Finite(p) => {
                let mut mass = numeric::CompensatedSum::new();
                let mut ent = numeric::CompensatedSum::new();
                let mut it = listed.iter().peekable();
                for (i, &x) in p.iter().enumerate() {
                    while it.peek().is_some_and(|&&s| (s as usize) < i) {
                        it.next();
                    }
                    if it.peek().is_some_and(|&&s| s as usize == i) {
                        continue;
                    }
                    mass.add(x);
                    ent.add(surprisal_term(x));
                }
                (mass.value(), ent.value())
            }
            Kind::Geometric(p) => {
                let mut mass = numeric::CompensatedSum::new();
                let mut ent = numeric::CompensatedSum::new();
                mass.add(1.0);
                ent.add(self.entropy());
                for &s in listed {
                    let x = geometric_prob(*p, s);
                    mass.add(-x);
                    ent.add(-surprisal_term(x));
                }
                (mass.value().max(0.0), ent.value().max(0.0))
            }
        }
    }

    /// Symbols with `P(a) >= threshold`, in increasing index order.
    pub(crate) fn symbols_at_least(&self, threshold: f64) -> Vec<Symbol> {
        match &self.kind {
            Kind::Finite(p) => p
                .iter()
                .enumerate()
                .filter(|(_, &x)| x >= threshold)
                .map(|(i, _)| i as Symbol)
                .collect(),
            Kind::Geometric(p) => {
                if threshold > *p {
                    return Vec::new();
                }
                // P(i) = p q^i is decreasing in i.
                let bound = ((threshold / p).ln() / (1.0 - p).ln()).floor();
                let last = bound.clamp(0.0, u32::MAX as f64 - 1.0) as Symbol;
                (0..=last).filter(|&i| geometric_prob(*p, i) >= threshold).collect()
            }
        }
    }

    /// A sampler on stream `stream` of `seed`.
    pub fn sampler(&self, seed: u64, stream: u64) -> SymbolSampler {
        let draw = match &self.kind {
            Kind::Finite(p) => {
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = p
                    .iter()
                    .map(|x| {
                        acc += x;
                        acc
                    })
                    .collect();
                if let Some(last) = cdf.last_mut() {
                    *last = f64::INFINITY;
                }
                Draw::Table(cdf)
            }
            Kind::Geometric(p) => Draw::Geometric { log_q: (1.0 - p).ln() },
        };
        SymbolSampler { rng: stream_rng(seed, stream), draw }
    }

    /// `n` i.i.d. symbols from stream 0 of `seed`.
    pub fn sample_stream(&self, seed: u64, n: usize) -> Vec<Symbol> {
        let mut sampler = self.sampler(seed, 0);
        (0..n).map(|_| sampler.next_symbol()).collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: SourceFile = serde_json::from_str(text)?;
        file.into_model()
    }

    pub fn to_file(&self) -> SourceFile {
        match &self.kind {
            Kind::Finite(p) => SourceFile::Finite {
                probs: p.iter().map(|&x| Number::Value(x)).collect(),
            },
            Kind::Geometric(p) => SourceFile::Geometric { p: Number::Value(*p) },
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("source serializes")
    }
}

fn geometric_prob(p: f64, i: Symbol) -> f64 {
    p * (1.0 - p).powi(i.min(i32::MAX as u32) as i32)
}

/// SplitMix64 finalizer applied to `x + golden gamma`: the first output of a
/// SplitMix64 generator whose state is `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed ^ splitmix64(stream))
}

/// Uniform deviate in `[0, 1)` with 53 random bits.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Debug)]
enum Draw {
    Table(Vec<f64>),
    Geometric { log_q: f64 },
}

/// Seeded i.i.d. symbol generator.
#[derive(Clone, Debug)]
pub struct SymbolSampler {
    rng: Xoshiro256PlusPlus,
    draw: Draw,
}

impl SymbolSampler {
    pub fn next_symbol(&mut self) -> Symbol {
        let u = unit_f64(&mut self.rng);
        match &self.draw {
            Draw::Table(cdf) => cdf.partition_point(|&c| c <= u) as Symbol,
            Draw::Geometric { log_q } => {
                let i = ((-u).ln_1p() / log_q).floor();
                i.min(u32::MAX as f64) as Symbol
            }
        }
    }
}

/// A probability given either as a JSON number or a decimal string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Text(String),
}

impl Number {
    fn value(&self) -> Result<f64> {
        match self {
            Number::Value(x) => Ok(*x),
            Number::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("`{s}` is not a decimal number"))),
        }
    }
}

/// On-disk source description.
///
/// `{"kind":"finite","probs":[...]}` or `{"kind":"geometric","p":0.5}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceFile {
    Finite { probs: Vec<Number> },
    Geometric { p: Number },
}

impl SourceFile {
    /// Validates and, when the probabilities miss 1 by at most
    /// [`LOADER_RENORMALIZE_TOLERANCE`], renormalizes them.
    pub fn into_model(self) -> Result<SourceModel> {
        match self {
            SourceFile::Finite { probs } => {
                let probs = probs.iter().map(Number::value).collect::<Result<Vec<_>>>()?;
                if let Some((i, p)) = probs.iter().enumerate().find(|(_, &p)| !(p > 0.0)) {
                    return Err(Error::Input(format!(
                        "symbol {i} has probability {p}; zero-probability symbols are not allowed"
                    )));
                }
                let total = numeric::sum(probs.iter().copied());
                if (total - 1.0).abs() > LOADER_RENORMALIZE_TOLERANCE {
                    return Err(Error::Input(format!(
                        "probabilities sum to {total}; off by more than {LOADER_RENORMALIZE_TOLERANCE}"
                    )));
                }
                SourceModel::finite(probs.into_iter().map(|p| p / total).collect())
            }
            SourceFile::Geometric { p } => SourceModel::geometric(p.value()?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(SourceModel::fair_bit().entropy(), 1.0);
        assert_eq!(SourceModel::finite(vec![1.0]).unwrap().entropy(), 0.0);
        let g = SourceModel::geometric(0.5).unwrap();
        assert!(close(g.entropy(), 2.0, 1e-15));
    }

    #[test]
    fn geometric_entropy_matches_truncated_series() {
        for &p in &[0.5, 0.3, 0.8] {
            let g = SourceModel::geometric(p).unwrap();
            let series = numeric::sum((0..2000).map(|i| surprisal_term(g.prob(i).unwrap())));
            assert!(close(g.entropy(), series, 1e-12), "p={p}");
        }
    }

    #[test]
    fn uniform_entropy_is_log_k() {
        for k in 1..=40u32 {
            let s = SourceModel::uniform(k).unwrap();
            assert!(close(s.entropy(), (k as f64).log2(), 1e-12));
        }
    }

    #[test]
    fn word_prob_examples() {
        let fair = SourceModel::fair_bit();
        assert_eq!(fair.word_prob(&w("10")).unwrap(), 0.25);
        let biased = SourceModel::finite(vec![0.9, 0.1]).unwrap();
        assert!(close(biased.word_prob(&w("110")).unwrap(), 0.009, 1e-17));
        assert_eq!(biased.word_prob(&Word::empty()).unwrap(), 1.0);
        assert!(matches!(fair.word_prob(&w("2")), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_sources() {
        assert!(SourceModel::finite(vec![0.5, 0.6]).is_err());
        assert!(SourceModel::finite(vec![1.0, 0.0]).is_err());
        assert!(SourceModel::finite(vec![]).is_err());
        assert!(SourceModel::geometric(0.0).is_err());
        assert!(SourceModel::geometric(1.0).is_err());
    }

    #[test]
    fn complement_stats_cover_remaining_mass() {
        let s = SourceModel::finite(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let (m, h) = s.complement_stats(&[1, 3]);
        assert!(close(m, 0.625, 1e-15));
        assert!(close(h, 0.5 + 0.375, 1e-15));
        let g = SourceModel::geometric(0.5).unwrap();
        let (m, h) = g.complement_stats(&[0]);
        assert!(close(m, 0.5, 1e-15));
        assert!(close(h, 1.5, 1e-15));
    }

    #[test]
    fn symbols_at_least_threshold() {
        let g = SourceModel::geometric(0.5).unwrap();
        assert_eq!(g.symbols_at_least(0.1), vec![0, 1, 2]);
        assert!(g.symbols_at_least(0.6).is_empty());
        let s = SourceModel::finite(vec![0.9, 0.1]).unwrap();
        assert_eq!(s.symbols_at_least(0.5), vec![0]);
    }

    #[test]
    fn sampling_is_seeded() {
        let s = SourceModel::fair_bit();
        assert!(s.sample_stream(1, 0).is_empty());
        assert_eq!(s.sample_stream(9, 100), s.sample_stream(9, 100));
        assert_ne!(s.sample_stream(9, 100), s.sample_stream(10, 100));
        // A prefix of a longer stream is the shorter stream.
        assert_eq!(&s.sample_stream(9, 100)[..50], &s.sample_stream(9, 50)[..]);
    }

    #[test]
    fn fair_bit_frequency_within_three_sigma() {
        let n = 1_000_000;
        let zeros = SourceModel::fair_bit()
            .sample_stream(1, n)
            .iter()
            .filter(|&&x| x == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.002, "freq {freq}");
    }

    #[test]
    fn geometric_mean_within_three_sigma() {
        let n = 1_000_000;
        let g = SourceModel::geometric(0.5).unwrap();
        let mean = g.sample_stream(7, n).iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() <= 0.005, "mean {mean}");
    }

    #[test]
    fn loader_renormalizes_only_small_defects() {
        let s = SourceModel::from_json_str(r#"{"kind":"finite","probs":["0.5","0.5000000001"]}"#)
            .unwrap();
        let total: f64 = s.probs().unwrap().iter().sum();
        assert!(close(total, 1.0, 1e-15));
        assert!(SourceModel::from_json_str(r#"{"kind":"finite","probs":[0.5,0.6]}"#).is_err());
        assert!(SourceModel::from_json_str(r#"{"kind":"finite","probs":[1.0,0]}"#).is_err());
        let g = SourceModel::from_json_str(r#"{"kind":"geometric","p":0.25}"#).unwrap();
        assert_eq!(g.geometric_p(), Some(0.25));
        let back = SourceModel::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn splitmix_reference_value() {
        // First output of SplitMix64 seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
