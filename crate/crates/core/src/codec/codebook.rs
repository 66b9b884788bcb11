//! Binary prefix codes over dictionary phrases.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::source::SourceModel;
use crate::word::{check_prefix_free, Symbol, Word};

/// How trailing remainder symbols are written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    /// Remainder symbols must be below this.
    pub alphabet_size: u32,
    /// Bits per remainder symbol: `ceil(log2 alphabet_size)`, at least 1.
    pub symbol_width: u32,
}

impl Frame {
    pub fn for_alphabet(k: u32) -> Self {
        let k = k.max(1);
        Frame { alphabet_size: k, symbol_width: ceil_log2(k as u64).max(1) }
    }
}

pub(crate) fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// One codeword per phrase, phrases in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhraseCodebook {
    phrases: Vec<Word>,
    codewords: Vec<String>,
    frame: Frame,
    index: HashMap<Word, usize>,
    decoder: Vec<[DecodeEdge; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum DecodeEdge {
    None,
    Node(usize),
    Leaf(usize),
}

/// On-disk form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookFile {
    pub phrases: Vec<Word>,
    pub codewords: Vec<String>,
}

impl PhraseCodebook {
    /// Validates and indexes a codebook. Phrases are sorted canonically and
    /// must be prefix-free, codewords must be non-empty binary strings that
    /// form a prefix code.
    pub fn new(phrases: Vec<Word>, codewords: Vec<String>) -> Result<Self> {
        if phrases.is_empty() {
            return Err(Error::Domain("codebook has no phrases".into()));
        }
        if phrases.len() != codewords.len() {
            return Err(Error::Input(format!(
                "{} phrases but {} codewords",
                phrases.len(),
                codewords.len()
            )));
        }
        let mut pairs: Vec<(Word, String)> = phrases.into_iter().zip(codewords).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (phrases, codewords): (Vec<Word>, Vec<String>) = pairs.into_iter().unzip();
        if phrases.iter().any(Word::is_empty) {
            return Err(Error::Domain("the empty word cannot be a phrase".into()));
        }
        check_prefix_free(&phrases)?;
        let decoder = build_decoder(&codewords)?;
        let max_sym = phrases.iter().flat_map(|p| p.symbols().iter().copied()).max().unwrap_or(0);
        let index = phrases.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Ok(PhraseCodebook { frame: Frame::for_alphabet(max_sym + 1), phrases, codewords, index, decoder })
    }

    /// Overrides the remainder framing, e.g. to match a source alphabet
    /// larger than the symbols used by the phrases.
    pub fn with_frame(mut self, frame: Frame) -> Result<Self> {
        let used = self.phrases.iter().flat_map(|p| p.symbols().iter().copied()).max().unwrap_or(0);
        if used >= frame.alphabet_size || frame.symbol_width < ceil_log2(frame.alphabet_size as u64) {
            return Err(Error::Precondition("frame cannot represent the phrase symbols".into()));
        }
        self.frame = frame;
        Ok(self)
    }

    pub fn phrases(&self) -> &[Word] {
        &self.phrases
    }

    pub fn codewords(&self) -> &[String] {
        &self.codewords
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn index_of(&self, phrase: &Word) -> Option<usize> {
        self.index.get(phrase).copied()
    }

    pub fn codeword(&self, phrase: &Word) -> Option<&str> {
        self.index_of(phrase).map(|i| self.codewords[i].as_str())
    }

    pub(crate) fn decoder(&self) -> &[[DecodeEdge; 2]] {
        &self.decoder
    }

    /// `Σ 2^-|c|`.
    pub fn kraft_sum(&self) -> f64 {
        self.codewords.iter().map(|c| (-(c.len() as f64)).exp2()).collect::<CompensatedSum>().value()
    }

    /// Expected codeword length `Σ P(α) |c(α)|` under `source`.
    pub fn expected_length(&self, source: &SourceModel) -> Result<f64> {
        let mut sum = CompensatedSum::new();
        for (p, c) in self.phrases.iter().zip(&self.codewords) {
            sum.add(source.word_prob(p)? * c.len() as f64);
        }
        Ok(sum.value())
    }

    /// True when the phrases are exactly the words of `d`.
    pub fn matches(&self, d: &Dictionary) -> bool {
        d.words().is_some_and(|w| w == self.phrases)
    }

    pub fn to_file(&self) -> CodebookFile {
        CodebookFile { phrases: self.phrases.clone(), codewords: self.codewords.clone() }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("codebook serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let f: CodebookFile = serde_json::from_str(text)?;
        Self::new(f.phrases, f.codewords)
    }
}

/// Binary trie over the codewords; rejects anything that is not a prefix code.
fn build_decoder(codewords: &[String]) -> Result<Vec<[DecodeEdge; 2]>> {
    let mut nodes = vec![[DecodeEdge::None; 2]];
    for (i, c) in codewords.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::Input(format!("codeword {i} is empty")));
        }
        let bits: Vec<usize> = c
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Input(format!("codeword `{c}` is not a binary string"))),
            })
            .collect::<Result<_>>()?;
        let mut at = 0;
        let clash = || Error::Input(format!("codeword `{c}` breaks prefix-freeness"));
        for (j, &b) in bits.iter().enumerate() {
            let last = j + 1 == bits.len();
            match (nodes[at][b], last) {
                (DecodeEdge::None, true) => nodes[at][b] = DecodeEdge::Leaf(i),
                (DecodeEdge::None, false) => {
                    nodes.push([DecodeEdge::None; 2]);
                    let id = nodes.len() - 1;
                    nodes[at][b] = DecodeEdge::Node(id);
                    at = id;
                }
                (DecodeEdge::Node(r), false) => at = r,
                _ => return Err(clash()),
            }
        }
    }
    Ok(nodes)
}

/// Optimal binary prefix code for `(phrase, probability)` pairs.
///
/// Two-queue construction. Leaves enter in order of increasing probability,
/// ties by canonical phrase order; merged nodes queue in creation order. On
/// equal weight a leaf is taken before a merged node. The first node taken
/// in a merge is the `0` branch. A single phrase gets the codeword `0`.
pub fn huffman_build(phrases: &[(Word, f64)]) -> Result<PhraseCodebook> {
    if phrases.is_empty() {
        return Err(Error::Domain("cannot build a code for no phrases".into()));
    }
    if let Some((w, p)) = phrases.iter().find(|(_, p)| !(*p > 0.0) || !p.is_finite()) {
        return Err(Error::Domain(format!("phrase `{w}` has probability {p}")));
    }
    let total: f64 = phrases.iter().map(|(_, p)| *p).collect::<CompensatedSum>().value();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("phrase probabilities sum to {total}, not 1")));
    }
    let mut order: Vec<usize> = (0..phrases.len()).collect();
    order.sort_by(|&a, &b| phrases[a].1.total_cmp(&phrases[b].1).then_with(|| phrases[a].0.cmp(&phrases[b].0)));
    if phrases.len() == 1 {
        return PhraseCodebook::new(vec![phrases[0].0.clone()], vec!["0".into()]);
    }
    // Tree nodes: 0..n are leaves, then merges. children[i] for merges.
    let n = phrases.len();
    let mut children: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
    let mut leaves: VecDeque<(f64, usize)> = order.iter().map(|&i| (phrases[i].1, i)).collect();
    let mut merged: VecDeque<(f64, usize)> = VecDeque::new();
    let take = |leaves: &mut VecDeque<(f64, usize)>, merged: &mut VecDeque<(f64, usize)>| {
        match (leaves.front(), merged.front()) {
            (Some(l), Some(m)) if m.0 < l.0 => merged.pop_front(),
            (Some(_), _) => leaves.pop_front(),
            (None, _) => merged.pop_front(),
        }
        .expect("two nodes remain while merging")
    };
    while leaves.len() + merged.len() > 1 {
        let a = take(&mut leaves, &mut merged);
        let b = take(&mut leaves, &mut merged);
        children.push((a.1, b.1));
        merged.push_back((a.0 + b.0, n + children.len() - 1));
    }
    let root = merged.pop_front().expect("one root").1;
    let mut codewords = vec![String::new(); n];
    let mut stack = vec![(root, String::new())];
    while let Some((id, prefix)) = stack.pop() {
        if id < n {
            codewords[id] = prefix;
        } else {
            let (zero, one) = children[id - n];
            stack.push((one, format!("{prefix}1")));
            stack.push((zero, format!("{prefix}0")));
        }
    }
    PhraseCodebook::new(phrases.iter().map(|(w, _)| w.clone()).collect(), codewords)
}

/// Huffman code for the words of a finite dictionary under `source`, framed
/// for the dictionary alphabet.
pub fn huffman_for(d: &Dictionary, source: &SourceModel) -> Result<PhraseCodebook> {
    let pairs = phrase_probs(d, source)?;
    let cb = huffman_build(&pairs)?;
    frame_for(cb, d)
}

/// Fixed-length indexing: phrase `i` in canonical order gets `i` written in
/// `ceil(log2 |D|)` bits (at least 1).
pub fn fixed_length_build(phrases: &[Word]) -> Result<PhraseCodebook> {
    if phrases.is_empty() {
        return Err(Error::Domain("cannot build a code for no phrases".into()));
    }
    let mut sorted = phrases.to_vec();
    sorted.sort();
    let width = ceil_log2(sorted.len() as u64).max(1) as usize;
    let codewords = (0..sorted.len()).map(|i| format!("{i:0width$b}")).collect();
    PhraseCodebook::new(sorted, codewords)
}

pub fn fixed_length_for(d: &Dictionary) -> Result<PhraseCodebook> {
    let words = finite_words(d)?;
    frame_for(fixed_length_build(&words)?, d)
}

fn finite_words(d: &Dictionary) -> Result<Vec<Word>> {
    d.words().ok_or_else(|| Error::Unsupported("codebooks need a finite dictionary".into()))
}

fn phrase_probs(d: &Dictionary, source: &SourceModel) -> Result<Vec<(Word, f64)>> {
    finite_words(d)?
        .into_iter()
        .map(|w| {
            let p = source.word_prob(&w)?;
            Ok((w, p))
        })
        .collect()
}

fn frame_for(cb: PhraseCodebook, d: &Dictionary) -> Result<PhraseCodebook> {
    match d.alphabet().size() {
        Some(k) => cb.with_frame(Frame::for_alphabet(k)),
        None => Ok(cb),
    }
}

/// Every symbol of `stream` fits the frame.
pub(crate) fn check_symbols(stream: &[Symbol], frame: Frame) -> Result<()> {
    match stream.iter().position(|&s| s >= frame.alphabet_size) {
        Some(i) => Err(Error::Domain(format!(
            "symbol {} at position {i} is outside the alphabet of size {}",
            stream[i], frame.alphabet_size
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::tunstall_build;
    use crate::dictionary::Alphabet;
    use crate::measures::dict_entropy;
    use crate::word::w;

    fn lengths(cb: &PhraseCodebook) -> Vec<usize> {
        cb.codewords().iter().map(String::len).collect()
    }

    #[test]
    fn dyadic_example() {
        let cb = huffman_build(&[(w("0"), 0.5), (w("10"), 0.25), (w("11"), 0.25)]).unwrap();
        assert_eq!(lengths(&cb), vec![1, 2, 2]);
        assert_eq!(cb.kraft_sum(), 1.0);
        assert_eq!(cb.expected_length(&SourceModel::fair_bit()).unwrap(), 1.5);
        // 10 and 11 merge first; the leaf 0 then wins the tie with their merge.
        assert_eq!(cb.codewords(), &["0", "10", "11"]);
    }

    #[test]
    fn single_phrase() {
        let cb = huffman_build(&[(w("0"), 1.0)]).unwrap();
        assert_eq!(cb.codewords(), &["0"]);
    }

    #[test]
    fn errors() {
        assert!(matches!(huffman_build(&[]), Err(Error::Domain(_))));
        assert!(huffman_build(&[(w("0"), 0.5), (w("1"), 0.0)]).is_err());
        assert!(huffman_build(&[(w("0"), 0.5), (w("1"), 0.4)]).is_err());
        assert!(PhraseCodebook::new(vec![w("0"), w("1")], vec!["0".into(), "01".into()]).is_err());
        assert!(PhraseCodebook::new(vec![w("0"), w("01")], vec!["0".into(), "1".into()]).is_err());
    }

    #[test]
    fn tunstall_huffman_within_one_bit() {
        let s = SourceModel::finite(vec![0.9, 0.1]).unwrap();
        let d = tunstall_build(&s, 4).unwrap();
        let cb = huffman_for(&d, &s).unwrap();
        let l = cb.expected_length(&s).unwrap();
        let h = dict_entropy(&d, &s, 8).unwrap().low;
        assert!(h <= l + 1e-12 && l < h + 1.0, "H={h} L={l}");
        assert!(cb.kraft_sum() <= 1.0);
    }

    #[test]
    fn fixed_length_indexing() {
        let d = Dictionary::from_words(Alphabet::Finite(2), vec![w("0"), w("10"), w("11")]).unwrap();
        let cb = fixed_length_for(&d).unwrap();
        assert_eq!(cb.codewords(), &["00", "01", "10"]);
        assert_eq!(cb.frame(), Frame { alphabet_size: 2, symbol_width: 1 });
    }

    #[test]
    fn json_round_trip() {
        let cb = huffman_build(&[(w("0"), 0.5), (w("10"), 0.25), (w("11"), 0.25)]).unwrap();
        let text = cb.to_json_string();
        assert!(text.contains("\"codewords\""));
        assert_eq!(PhraseCodebook::from_json_str(&text).unwrap(), cb);
    }

    #[test]
    fn frame_widths() {
        assert_eq!(Frame::for_alphabet(1).symbol_width, 1);
        assert_eq!(Frame::for_alphabet(2).symbol_width, 1);
        assert_eq!(Frame::for_alphabet(3).symbol_width, 2);
        assert_eq!(Frame::for_alphabet(256).symbol_width, 8);
        assert_eq!(Frame::for_alphabet(257).symbol_width, 9);
    }
}
