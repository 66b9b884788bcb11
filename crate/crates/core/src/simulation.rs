//! Monte Carlo parsing of sampled streams.
//!
//! Phrases are drawn in chunks of [`CHUNK`]; chunk `i` reads symbols from
//! RNG stream `i` of the seed. Chunks only produce integer tallies, merged in
//! chunk order, so the report does not depend on the number of threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dictionary::{Dictionary, Edge};
use crate::error::{Error, Result};
use crate::measures::evaluate;
use crate::numeric::CompensatedSum;
use crate::source::SourceModel;
use crate::word::{Symbol, Word};

pub const CHUNK: usize = 1 << 16;
pub const DEFAULT_STEP_CAP: usize = 1_000_000;
/// Depth used for the analytic side of the report.
pub const DEFAULT_THEORY_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOptions {
    /// Symbols allowed per phrase before giving up.
    pub step_cap: usize,
    pub theory_depth: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { step_cap: DEFAULT_STEP_CAP, theory_depth: DEFAULT_THEORY_DEPTH }
    }
}

/// Caps the global rayon pool at `VVCODE_THREADS` if set. Returns the value
/// applied. Calling it after the pool exists has no effect.
pub fn init_threads_from_env() -> Option<usize> {
    let n = std::env::var("VVCODE_THREADS").ok()?.trim().parse::<usize>().ok()?.max(1);
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok()?;
    Some(n)
}

#[derive(Default)]
struct Tally {
    symbols: u64,
    squares: u128,
    counts: BTreeMap<Word, u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.symbols += other.symbols;
        self.squares += other.squares;
        for (w, c) in other.counts {
            *self.counts.entry(w).or_insert(0) += c;
        }
        self
    }
}

fn run_chunk(d: &Dictionary, source: &SourceModel, seed: u64, chunk: usize, phrases: usize, cap: usize) -> Result<Tally> {
    let mut sampler = source.sampler(seed, chunk as u64);
    let mut t = Tally::default();
    let mut buf: Vec<Symbol> = Vec::new();
    for _ in 0..phrases {
        buf.clear();
        let mut at = 0;
        loop {
            if buf.len() >= cap {
                return Err(stuck(&buf, "step cap reached"));
            }
            let s = sampler.next_symbol();
            buf.push(s);
            match d.step(at, s) {
                Edge::Word => break,
                Edge::Node(r) => at = r,
                Edge::Uncovered => return Err(stuck(&buf, "no dictionary word extends this prefix")),
            }
        }
        let l = buf.len() as u64;
        t.symbols += l;
        t.squares += (l as u128) * (l as u128);
        *t.counts.entry(Word::from(buf.as_slice())).or_insert(0) += 1;
    }
    Ok(t)
}

fn stuck(prefix: &[Symbol], reason: &str) -> Error {
    let shown = &prefix[..prefix.len().min(32)];
    let mut text = Word::from(shown).to_string();
    if prefix.len() > shown.len() {
        text.push_str("...");
    }
    Error::Simulation { prefix: text, steps: prefix.len(), reason: reason.into() }
}

fn tally(d: &Dictionary, source: &SourceModel, n_phrases: usize, seed: u64, opts: SimOptions) -> Result<Tally> {
    if n_phrases == 0 {
        return Err(Error::Precondition("n_phrases must be at least 1".into()));
    }
    d.check_source(source)?;
    let chunks = n_phrases.div_ceil(CHUNK);
    let parts: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK.min(n_phrases - i * CHUNK);
            run_chunk(d, source, seed, i, len, opts.step_cap)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(Tally::default(), Tally::merge))
}

/// Standardized deviation of one phrase count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhraseZ {
    pub word: Word,
    pub count: u64,
    pub expected: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n_phrases: usize,
    pub total_symbols: u64,
    pub empirical_lbar: f64,
    pub lbar_stderr: f64,
    /// Plug-in entropy of the observed phrase frequencies, in bits.
    pub empirical_entropy: f64,
    pub distinct_phrases: usize,
    pub theory_lbar: f64,
    pub theory_hd: f64,
    pub z_lbar: f64,
    /// The five most frequent phrases.
    pub z_phrases: Vec<PhraseZ>,
    pub seed: u64,
}

/// Flat CSV record for [`SimReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub n_phrases: usize,
    pub total_symbols: u64,
    pub empirical_lbar: f64,
    pub lbar_stderr: f64,
    pub empirical_entropy: f64,
    pub theory_lbar: f64,
    pub theory_hd: f64,
    pub z_lbar: f64,
    pub max_abs_phrase_z: f64,
    pub seed: u64,
}

impl SimReport {
    pub fn csv_row(&self) -> SimRow {
        SimRow {
            n_phrases: self.n_phrases,
            total_symbols: self.total_symbols,
            empirical_lbar: self.empirical_lbar,
            lbar_stderr: self.lbar_stderr,
            empirical_entropy: self.empirical_entropy,
            theory_lbar: self.theory_lbar,
            theory_hd: self.theory_hd,
            z_lbar: self.z_lbar,
            max_abs_phrase_z: self.z_phrases.iter().map(|p| p.z.abs()).fold(0.0, f64::max),
            seed: self.seed,
        }
    }
}

fn z_score(diff: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        diff / sd
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

pub fn simulate(d: &Dictionary, source: &SourceModel, n_phrases: usize, seed: u64) -> Result<SimReport> {
    simulate_with(d, source, n_phrases, seed, SimOptions::default())
}

pub fn simulate_with(
    d: &Dictionary,
    source: &SourceModel,
    n_phrases: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<SimReport> {
    let t = tally(d, source, n_phrases, seed, opts)?;
    let n = n_phrases as f64;
    let mean = t.symbols as f64 / n;
    let stderr = if n_phrases > 1 {
        // Σ(l - mean)^2 = Σl^2 - (Σl)^2/n, kept in integers until the division.
        let s = t.symbols as u128;
        let centered = t.squares * n_phrases as u128 - s * s;
        (centered as f64 / n / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let empirical_entropy = t
        .counts
        .values()
        .map(|&c| {
            let f = c as f64 / n;
            -f * f.log2()
        })
        .collect::<CompensatedSum>()
        .value();
    let theory = evaluate(d, source, opts.theory_depth)?;
    let mut top: Vec<(&Word, u64)> = t.counts.iter().map(|(w, &c)| (w, c)).collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let z_phrases = top
        .into_iter()
        .take(5)
        .map(|(w, c)| {
            let p = source.word_prob(w)?;
            let expected = n * p;
            Ok(PhraseZ { word: w.clone(), count: c, expected, z: z_score(c as f64 - expected, (expected * (1.0 - p)).sqrt()) })
        })
        .collect::<Result<_>>()?;
    let theory_lbar = theory.lbar.midpoint();
    Ok(SimReport {
        n_phrases,
        total_symbols: t.symbols,
        empirical_lbar: mean,
        lbar_stderr: stderr,
        empirical_entropy,
        distinct_phrases: t.counts.len(),
        theory_lbar,
        theory_hd: theory.h_d.midpoint(),
        z_lbar: z_score(mean - theory_lbar, stderr),
        z_phrases,
        seed,
    })
}

/// Pearson goodness of fit against `P(α)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins used, the pooled one included.
    pub bins: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Observed phrases in canonical order.
    pub counts: Vec<(Word, u64)>,
    pub n_phrases: usize,
    pub fit: GoodnessOfFit,
    pub seed: u64,
}

/// CSV record for one histogram line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub word: String,
    pub count: u64,
}

impl Histogram {
    pub fn csv_rows(&self) -> Vec<HistogramRow> {
        self.counts.iter().map(|(w, c)| HistogramRow { word: w.to_string(), count: *c }).collect()
    }
}

/// Counts phrases and tests them against `P(α)`. Phrases with expected count
/// at least 5 get their own bin; all others share one pooled bin, which is
/// folded into the smallest bin when its own expectation is below 5.
pub fn phrase_histogram(d: &Dictionary, source: &SourceModel, n_phrases: usize, seed: u64) -> Result<Histogram> {
    phrase_histogram_with(d, source, n_phrases, seed, SimOptions::default())
}

pub fn phrase_histogram_with(
    d: &Dictionary,
    source: &SourceModel,
    n_phrases: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<Histogram> {
    let t = tally(d, source, n_phrases, seed, opts)?;
    let n = n_phrases as f64;
    let heavy = d.words_at_least(source, 5.0 / n, 10_000)?;
    let mut bins: Vec<(f64, f64)> = Vec::with_capacity(heavy.len() + 1);
    let mut binned_obs = 0u64;
    let mut binned_exp = CompensatedSum::new();
    for w in &heavy {
        let e = n * source.word_prob(w)?;
        let o = t.counts.get(w).copied().unwrap_or(0);
        binned_obs += o;
        binned_exp.add(e);
        bins.push((o as f64, e));
    }
    let pooled = ((n_phrases as u64 - binned_obs) as f64, (n - binned_exp.value()).max(0.0));
    if pooled.1 >= 5.0 || bins.is_empty() {
        bins.push(pooled);
    } else if let Some(small) = bins.iter_mut().min_by(|a, b| a.1.total_cmp(&b.1)) {
        small.0 += pooled.0;
        small.1 += pooled.1;
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e) * (o - e) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .collect::<CompensatedSum>()
        .value();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        chi.sf(statistic)
    };
    Ok(Histogram {
        counts: t.counts.into_iter().collect(),
        n_phrases,
        fit: GoodnessOfFit { statistic, dof, p_value, bins: bins.len() },
        seed,
    })
}
