//! Variable-to-variable coding: a parsing dictionary followed by a prefix
//! code over its phrases.
//!
//! Bitstream layout, MSB first:
//!
//! ```text
//! 0x56                       magic byte
//! varint                     phrase count
//! codeword*                  one per phrase
//! varint                     remainder length in symbols
//! symbol*                    remainder, symbol_width bits each
//! 0*                         padding to a byte boundary
//! ```
//!
//! Varints are LEB128: 7 value bits per group, high bit set on every group
//! but the last, each group written as 8 bits.

mod bits;
mod codebook;
mod tunstall;

pub use bits::{from_bit_string, to_bit_string, BitReader, BitWriter};
pub use codebook::{
    fixed_length_build, fixed_length_for, huffman_build, huffman_for, CodebookFile, Frame, PhraseCodebook,
};
pub use tunstall::tunstall_build;

use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::measures::avg_length;
use crate::source::SourceModel;
use crate::word::Symbol;
use codebook::{check_symbols, DecodeEdge};

pub const MAGIC: u8 = 0x56;

/// Encoded bytes plus the number of meaningful bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub bytes: Vec<u8>,
    pub bit_len: usize,
    pub phrases: usize,
    /// Bits spent on phrase codewords alone.
    pub payload_bits: usize,
}

/// Parses `stream` with `d` and writes it with `cb`.
pub fn encode(d: &Dictionary, cb: &PhraseCodebook, stream: &[Symbol]) -> Result<Encoded> {
    if let Some(i) = stream.iter().position(|&s| !d.alphabet().contains(s)) {
        return Err(Error::Domain(format!("symbol {} at position {i} is outside the dictionary alphabet", stream[i])));
    }
    check_symbols(stream, cb.frame())?;
    let (spans, rest) = d.parse_spans(stream);
    let mut w = BitWriter::new();
    w.push_bits(MAGIC as u64, 8);
    w.push_varint(spans.len() as u64);
    let mut payload_bits = 0;
    for r in &spans {
        let phrase = crate::word::Word::from(&stream[r.clone()]);
        let code = cb
            .codeword(&phrase)
            .ok_or_else(|| Error::Domain(format!("phrase `{phrase}` has no codeword")))?;
        payload_bits += code.len();
        for c in code.bytes() {
            w.push_bit(c == b'1');
        }
    }
    let frame = cb.frame();
    w.push_varint((stream.len() - rest) as u64);
    for &s in &stream[rest..] {
        w.push_bits(s as u64, frame.symbol_width);
    }
    let bit_len = w.bit_len();
    Ok(Encoded { bytes: w.finish(), bit_len, phrases: spans.len(), payload_bits })
}

/// Inverse of [`encode`].
pub fn decode(d: &Dictionary, cb: &PhraseCodebook, bytes: &[u8]) -> Result<Vec<Symbol>> {
    let mut r = BitReader::new(bytes);
    let magic = r.read_bits(8)?;
    if magic != MAGIC as u64 {
        return Err(Error::Corrupt { offset: 0, reason: format!("bad magic byte {magic:#04x}") });
    }
    let count_at = r.position();
    let count = r.read_varint()?;
    // Every codeword is at least one bit long.
    if count > r.remaining() as u64 {
        return Err(Error::Corrupt { offset: count_at, reason: format!("phrase count {count} exceeds the input") });
    }
    let trie = cb.decoder();
    let mut out = Vec::new();
    for _ in 0..count {
        let start = r.position();
        let mut at = 0;
        let phrase = loop {
            let b = r.read_bit()? as usize;
            match trie[at][b] {
                DecodeEdge::Node(n) => at = n,
                DecodeEdge::Leaf(i) => break i,
                DecodeEdge::None => {
                    return Err(Error::Corrupt { offset: start, reason: "bits match no codeword".into() });
                }
            }
        };
        out.extend_from_slice(cb.phrases()[phrase].symbols());
    }
    let frame = cb.frame();
    let rem_at = r.position();
    let rem = r.read_varint()?;
    if rem.saturating_mul(frame.symbol_width as u64) > r.remaining() as u64 {
        return Err(Error::Corrupt { offset: rem_at, reason: format!("remainder length {rem} exceeds the input") });
    }
    for _ in 0..rem {
        let at = r.position();
        let s = r.read_bits(frame.symbol_width)?;
        if s >= frame.alphabet_size as u64 || !d.alphabet().contains(s as Symbol) {
            return Err(Error::Corrupt { offset: at, reason: format!("remainder symbol {s} is outside the alphabet") });
        }
        out.push(s as Symbol);
    }
    let tail = r.position();
    if r.remaining() >= 8 {
        return Err(Error::Corrupt { offset: tail, reason: format!("{} dangling bits", r.remaining()) });
    }
    while r.remaining() > 0 {
        let at = r.position();
        if r.read_bit()? {
            return Err(Error::Corrupt { offset: at, reason: "non-zero padding".into() });
        }
    }
    Ok(out)
}

/// Measured coding rate on a sampled stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub symbols: usize,
    pub phrases: usize,
    pub total_bits: usize,
    /// Codeword bits per source symbol, framing excluded.
    pub bits_per_symbol: f64,
    /// Delta-method standard error of `bits_per_symbol`.
    pub stderr: f64,
    /// `L / l̄(D)`.
    pub expected: f64,
    pub h_p: f64,
    pub z: f64,
    pub lossless: bool,
    pub seed: u64,
}

/// Encodes `n_symbols` sampled symbols, checks the round trip and compares
/// the rate with `L / l̄(D)`.
pub fn measure_rate(
    d: &Dictionary,
    cb: &PhraseCodebook,
    source: &SourceModel,
    n_symbols: usize,
    seed: u64,
) -> Result<RateReport> {
    let stream = source.sample_stream(seed, n_symbols);
    let enc = encode(d, cb, &stream)?;
    let lossless = decode(d, cb, &enc.bytes)? == stream;
    let (spans, _) = d.parse_spans(&stream);
    let n = spans.len();
    let consumed: usize = spans.iter().map(|r| r.len()).sum();
    let rate = if consumed == 0 { 0.0 } else { enc.payload_bits as f64 / consumed as f64 };
    // Ratio estimator: Var(b - R l) / (n mean(l)^2).
    let stderr = if n > 1 {
        let mean_l = consumed as f64 / n as f64;
        let ss: f64 = spans
            .iter()
            .map(|r| {
                let b = cb.codeword(&crate::word::Word::from(&stream[r.clone()])).map_or(0, str::len) as f64;
                let dev = b - rate * r.len() as f64;
                dev * dev
            })
            .sum();
        (ss / (n - 1) as f64 / n as f64).sqrt() / mean_l
    } else {
        0.0
    };
    let lbar = avg_length(d, source, 1)?.midpoint();
    let expected = cb.expected_length(source)? / lbar;
    let diff = rate - expected;
    let z = if stderr > 0.0 {
        diff / stderr
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    Ok(RateReport {
        symbols: stream.len(),
        phrases: n,
        total_bits: enc.bit_len,
        bits_per_symbol: rate,
        stderr,
        expected,
        h_p: source.entropy(),
        z,
        lossless,
        seed,
    })
}
