//! Prefix-free dictionaries and the greedy parser.
//!
//! A [`Dictionary`] is stored as a rooted transition graph. Every node stands
//! for a set of strings that are strict prefixes of dictionary words; an edge
//! labelled `a` leads to one of
//!
//! * [`Edge::Word`]: the string extended by `a` is a dictionary word,
//! * [`Edge::Node`]: it is still a strict prefix of some word,
//! * [`Edge::Uncovered`]: no word has it as a prefix.
//!
//! Words are leaves of this graph, so every dictionary is proper by
//! construction. Finite word sets are plain tries. The infinite families
//! (`run_length`, `head_extension`, `block` over a countable alphabet) are
//! small graphs with cycles or with an `otherwise` edge that covers every
//! symbol not listed explicitly. Over a finite alphabet `otherwise` is always
//! `Uncovered` and the edges are spelled out.
//!
//! Probabilistic quantities are computed level by level on this graph (see
//! [`Dictionary::mass_profile`]), which gives exact frontier masses `P(T_m)`
//! for every family, countable alphabets included.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{surprisal_term, CompensatedSum};
use crate::source::SourceModel;
use crate::word::{check_prefix_free, Symbol, Word};

pub(crate) type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Edge {
    Word,
    Node(NodeId),
    Uncovered,
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub(crate) edges: BTreeMap<Symbol, Edge>,
    pub(crate) otherwise: Edge,
}

impl Node {
    pub(crate) fn empty() -> Self {
        Node { edges: BTreeMap::new(), otherwise: Edge::Uncovered }
    }
}

/// The symbol set a dictionary is defined over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alphabet {
    /// `{0, ..., k-1}`
    Finite(u32),
    /// All non-negative integers.
    Countable,
}

impl Alphabet {
    pub fn contains(self, sym: Symbol) -> bool {
        match self {
            Alphabet::Finite(k) => sym < k,
            Alphabet::Countable => true,
        }
    }

    pub fn size(self) -> Option<u32> {
        match self {
            Alphabet::Finite(k) => Some(k),
            Alphabet::Countable => None,
        }
    }
}

/// Rule-based infinite (or alphabet-generic) dictionary families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `{0, 10, 110, 1110, ...}`: ones terminated by a zero.
    RunLength,
    /// `(A \ {head}) ∪ head·A`.
    HeadExtension { head: Symbol },
    /// `A^length`, every string of the given length.
    Block { length: u32 },
}

/// A recorded construction step, replayed when a lazy dictionary is loaded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Extend(Word),
    Truncate(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Base {
    Words(Vec<Word>),
    Family(Family),
}

/// Budget for enumerating dictionaries over countable alphabets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Only symbols `< width` are expanded through `otherwise` edges.
    pub width: u32,
    /// Hard cap on the number of words (or graph nodes) materialized.
    pub max_words: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { width: 64, max_words: 1 << 22 }
    }
}

impl Budget {
    pub fn with_width(width: u32) -> Self {
        Budget { width, ..Budget::default() }
    }
}

/// Words found by an enumeration, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enumeration {
    pub words: Vec<Word>,
    /// False when the width budget hid words that belong in the result.
    pub exhaustive: bool,
}

/// Outcome of an ASC certification attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AscStatus {
    CertifiedAsc,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscVerdict {
    pub status: AscStatus,
    pub depth_used: usize,
    /// `P(T_n)` at `depth_used`: mass of strings of that length with no
    /// dictionary prefix.
    pub residual_mass: f64,
}

impl AscVerdict {
    pub fn is_certified(&self) -> bool {
        self.status == AscStatus::CertifiedAsc
    }
}

/// Result of greedy parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parse {
    pub phrases: Vec<Word>,
    /// Trailing symbols that do not complete a phrase.
    pub remainder: Word,
}

/// Where a string sits relative to the dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Position {
    /// Strict prefix of at least one possible word; parked at this node.
    Inside(NodeId),
    /// The string is a dictionary word.
    Word,
    /// A strict prefix of the string is a word.
    PastWord { word_len: usize },
    /// No word is a prefix of the string and none extends it.
    Uncovered,
}

/// Level-by-level mass accounting to a fixed depth.
#[derive(Clone, Debug, PartialEq)]
pub struct MassProfile {
    pub depth: usize,
    /// `sum P(α)` over words with `|α| <= depth`.
    pub covered_mass: f64,
    /// `sum -P(α) log2 P(α)` over the same words.
    pub covered_entropy: f64,
    /// `sum P(α) |α|` over the same words.
    pub covered_length: f64,
    /// Mass of length-`depth` strings that are strict prefixes of words.
    pub live_mass: f64,
    /// `sum -P(β) log2 P(β)` over those strings.
    pub live_entropy: f64,
    /// Mass of strings that can never be completed to a word.
    pub dead_mass: f64,
    /// `P(T_m)` for `m = 1..=depth`.
    pub uncovered: Vec<f64>,
    pub(crate) live: Vec<(NodeId, f64)>,
    pub(crate) levels: Vec<LevelStats>,
}

/// Running totals after one level of [`MassProfile`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LevelStats {
    pub covered_entropy: f64,
    pub covered_length: f64,
    pub live_mass: f64,
    pub live_entropy: f64,
}

impl MassProfile {
    /// `P(T_depth)`.
    pub fn frontier_mass(&self) -> f64 {
        self.live_mass + self.dead_mass
    }
}

/// Per-node transition masses for one source.
pub(crate) struct Transitions {
    rows: Vec<Vec<Arc>>,
}

#[derive(Clone, Copy, Debug)]
struct Arc {
    edge: Edge,
    mass: f64,
    entropy: f64,
}

/// A proper dictionary.
#[derive(Clone, Debug)]
pub struct Dictionary {
    pub(crate) nodes: Vec<Node>,
    pub(crate) alphabet: Alphabet,
    /// Every node is reached by exactly one path, so in-place edits are safe.
    pub(crate) tree: bool,
    /// Longest word length; `None` when the graph has a cycle.
    depth_bound: Option<usize>,
    base: Base,
    pub(crate) ops: Vec<Op>,
}

impl Dictionary {
    /// Builds a trie from an explicit word list.
    pub fn from_words(alphabet: Alphabet, words: Vec<Word>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Domain("a dictionary needs at least one word".into()));
        }
        for word in &words {
            if word.is_empty() {
                return Err(Error::Domain("the empty word cannot be a dictionary member".into()));
            }
            if let Some(&s) = word.symbols().iter().find(|&&s| !alphabet.contains(s)) {
                return Err(Error::Domain(format!(
                    "word `{word}` uses symbol {s} outside the alphabet"
                )));
            }
        }
        check_prefix_free(&words)?;
        let mut words = words;
        words.sort();
        let mut nodes = vec![Node::empty()];
        for word in &words {
            let (last, init) = word.symbols().split_last().expect("non-empty");
            let mut at = 0;
            for &s in init {
                at = match nodes[at].edges.get(&s) {
                    Some(Edge::Node(n)) => *n,
                    _ => {
                        nodes.push(Node::empty());
                        let id = nodes.len() - 1;
                        nodes[at].edges.insert(s, Edge::Node(id));
                        id
                    }
                };
            }
            nodes[at].edges.insert(*last, Edge::Word);
        }
        Ok(Self::assemble(nodes, alphabet, Base::Words(words), Vec::new()))
    }

    /// Binary-style run-length family `{0, 10, 110, ...}`. Symbols other
    /// than 0 and 1 are uncovered.
    pub fn run_length(alphabet: Alphabet) -> Result<Self> {
        if !alphabet.contains(1) {
            return Err(Error::Domain("run_length needs symbols 0 and 1".into()));
        }
        let mut root = Node::empty();
        root.edges.insert(0, Edge::Word);
        root.edges.insert(1, Edge::Node(0));
        Ok(Self::assemble(vec![root], alphabet, Base::Family(Family::RunLength), Vec::new()))
    }

    /// `(A \ {head}) ∪ head·A`.
    pub fn head_extension(head: Symbol, alphabet: Alphabet) -> Result<Self> {
        if !alphabet.contains(head) {
            return Err(Error::Domain(format!("head symbol {head} outside the alphabet")));
        }
        let mut root = Node::empty();
        root.otherwise = Edge::Word;
        root.edges.insert(head, Edge::Node(1));
        let mut tail = Node::empty();
        tail.otherwise = Edge::Word;
        let family = Family::HeadExtension { head };
        Ok(Self::assemble(vec![root, tail], alphabet, Base::Family(family), Vec::new()))
    }

    /// All strings of length `length`.
    pub fn block(length: u32, alphabet: Alphabet) -> Result<Self> {
        if length == 0 {
            return Err(Error::Domain("block length must be at least 1".into()));
        }
        let nodes = (0..length as usize)
            .map(|i| {
                let mut n = Node::empty();
                n.otherwise = if i + 1 == length as usize { Edge::Word } else { Edge::Node(i + 1) };
                n
            })
            .collect();
        Ok(Self::assemble(nodes, alphabet, Base::Family(Family::Block { length }), Vec::new()))
    }

    /// The alphabet itself, `D = A`.
    pub fn alphabet_dictionary(alphabet: Alphabet) -> Self {
        Self::block(1, alphabet).expect("length 1 is valid")
    }

    pub(crate) fn assemble(nodes: Vec<Node>, alphabet: Alphabet, base: Base, ops: Vec<Op>) -> Self {
        let mut d = Dictionary { nodes, alphabet, tree: false, depth_bound: None, base, ops };
        d.normalize();
        d.compact();
        d
    }

    /// Over a finite alphabet, spell out `otherwise` edges explicitly.
    fn normalize(&mut self) {
        if let Alphabet::Finite(k) = self.alphabet {
            for node in &mut self.nodes {
                node.edges.retain(|&s, _| s < k);
                if node.otherwise != Edge::Uncovered {
                    for s in 0..k {
                        node.edges.entry(s).or_insert(node.otherwise);
                    }
                    node.otherwise = Edge::Uncovered;
                }
                node.edges.retain(|_, e| *e != Edge::Uncovered);
            }
        }
    }

    pub(crate) fn compact(&mut self) {
        self.compact_from(0);
    }

    /// Drops nodes unreachable from `root`, renumbers breadth-first with
    /// `root` as node 0 and refreshes the cached shape flags.
    pub(crate) fn compact_from(&mut self, root: NodeId) {
        let n = self.nodes.len();
        let mut map = vec![usize::MAX; n];
        let mut order = vec![root];
        map[root] = 0;
        let mut indegree = vec![0usize; n];
        let mut shared = false;
        let mut i = 0;
        while i < order.len() {
            let node = &self.nodes[order[i]];
            for e in node.edges.values() {
                if let Edge::Node(r) = *e {
                    indegree[r] += 1;
                    if map[r] == usize::MAX {
                        map[r] = order.len();
                        order.push(r);
                    }
                }
            }
            if let Edge::Node(r) = node.otherwise {
                shared = true;
                indegree[r] += 1;
                if map[r] == usize::MAX {
                    map[r] = order.len();
                    order.push(r);
                }
            }
            i += 1;
        }
        let remap = |e: Edge| match e {
            Edge::Node(r) => Edge::Node(map[r]),
            other => other,
        };
        let mut old: Vec<Option<Node>> = std::mem::take(&mut self.nodes).into_iter().map(Some).collect();
        self.nodes = order
            .iter()
            .map(|&id| {
                let node = old[id].take().expect("visited once");
                Node {
                    edges: node.edges.into_iter().map(|(s, e)| (s, remap(e))).collect(),
                    otherwise: remap(node.otherwise),
                }
            })
            .collect();
        self.tree = !shared && indegree[root] == 0 && order.iter().all(|&id| indegree[id] <= 1);
        self.depth_bound = self.longest_word();
    }

    /// A dictionary sharing this one's provenance, built from `nodes` and
    /// recording `op`.
    pub(crate) fn derived(&self, nodes: Vec<Node>, root: NodeId, op: Op) -> Dictionary {
        let mut ops = self.ops.clone();
        ops.push(op);
        let mut d = Dictionary {
            nodes,
            alphabet: self.alphabet,
            tree: false,
            depth_bound: None,
            base: self.base.clone(),
            ops,
        };
        d.normalize();
        d.compact_from(root);
        d
    }

    /// In-place bookkeeping after a tree edit that added a word of length
    /// `new_len`.
    pub(crate) fn note_tree_growth(&mut self, new_len: usize, op: Op) {
        self.depth_bound = self.depth_bound.map(|b| b.max(new_len));
        self.ops.push(op);
    }

    /// Longest word length, or `None` if the graph is cyclic.
    fn longest_word(&self) -> Option<usize> {
        // Iterative post-order DFS with cycle detection.
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let n = self.nodes.len();
        let mut colour = vec![WHITE; n];
        let mut height = vec![0usize; n];
        let mut stack = vec![(0usize, false)];
        while let Some((id, done)) = stack.pop() {
            if done {
                let node = &self.nodes[id];
                let mut h = 0;
                for e in node.edges.values().chain(std::iter::once(&node.otherwise)) {
                    match *e {
                        Edge::Word => h = h.max(1),
                        Edge::Node(r) => h = h.max(height[r] + 1),
                        Edge::Uncovered => {}
                    }
                }
                height[id] = h;
                colour[id] = BLACK;
                continue;
            }
            if colour[id] != WHITE {
                continue;
            }
            colour[id] = GREY;
            stack.push((id, true));
            let node = &self.nodes[id];
            for e in node.edges.values().chain(std::iter::once(&node.otherwise)) {
                if let Edge::Node(r) = *e {
                    match colour[r] {
                        GREY => return None,
                        WHITE => stack.push((r, false)),
                        _ => {}
                    }
                }
            }
        }
        Some(height[0])
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Longest word length; `None` for dictionaries with unbounded words.
    pub fn max_word_len(&self) -> Option<usize> {
        self.depth_bound
    }

    /// True when the word set is finite.
    pub fn is_finite(&self) -> bool {
        self.depth_bound.is_some()
            && (matches!(self.alphabet, Alphabet::Finite(_))
                || self.nodes.iter().all(|n| n.otherwise == Edge::Uncovered))
    }

    pub(crate) fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn step(&self, node: NodeId, sym: Symbol) -> Edge {
        if !self.alphabet.contains(sym) {
            return Edge::Uncovered;
        }
        let n = &self.nodes[node];
        n.edges.get(&sym).copied().unwrap_or(n.otherwise)
    }

    pub(crate) fn locate(&self, symbols: &[Symbol]) -> Position {
        let mut at = 0;
        for (i, &s) in symbols.iter().enumerate() {
            match self.step(at, s) {
                Edge::Node(r) => at = r,
                Edge::Word if i + 1 == symbols.len() => return Position::Word,
                Edge::Word => return Position::PastWord { word_len: i + 1 },
                Edge::Uncovered => return Position::Uncovered,
            }
        }
        Position::Inside(at)
    }

    pub fn contains(&self, word: &Word) -> bool {
        self.locate(word.symbols()) == Position::Word
    }

    /// True if `word` has a strict prefix that is a dictionary word.
    pub fn has_word_strict_prefix(&self, word: &Word) -> bool {
        matches!(self.locate(word.symbols()), Position::PastWord { .. })
    }

    /// All words of a finite dictionary, canonical order.
    pub fn words(&self) -> Option<Vec<Word>> {
        let depth = self.depth_bound?;
        if !self.is_finite() {
            return None;
        }
        let e = self
            .enumerate_up_to(depth, Budget { width: 0, max_words: usize::MAX })
            .expect("finite enumeration");
        Some(e.words)
    }

    /// Every word of length at most `n`.
    pub fn enumerate_up_to(&self, n: usize, budget: Budget) -> Result<Enumeration> {
        let mut out = Vec::new();
        let mut exhaustive = true;
        let mut prefix = Vec::new();
        self.enumerate_from(0, &mut prefix, n, budget, &mut out, &mut exhaustive)?;
        out.sort();
        Ok(Enumeration { words: out, exhaustive })
    }

    /// Words of length `<= n` below `start`, whose incoming path is `prefix`.
    pub(crate) fn enumerate_from(
        &self,
        start: NodeId,
        prefix: &mut Vec<Symbol>,
        n: usize,
        budget: Budget,
        out: &mut Vec<Word>,
        exhaustive: &mut bool,
    ) -> Result<()> {
        if prefix.len() >= n {
            return Ok(());
        }
        let symbols = self.branch_symbols(start, budget.width, exhaustive);
        for s in symbols {
            prefix.push(s);
            match self.step(start, s) {
                Edge::Word => {
                    if out.len() >= budget.max_words {
                        return Err(Error::Resource { budget: "max_words", limit: budget.max_words });
                    }
                    out.push(Word::from(prefix.as_slice()));
                }
                Edge::Node(r) => self.enumerate_from(r, prefix, n, budget, out, exhaustive)?,
                Edge::Uncovered => {}
            }
            prefix.pop();
        }
        Ok(())
    }

    /// Symbols worth following out of `node`, ascending. Over a countable
    /// alphabet the `otherwise` class is cut at `width`; `exhaustive` is
    /// cleared when that hides something.
    pub(crate) fn branch_symbols(&self, node: NodeId, width: u32, exhaustive: &mut bool) -> Vec<Symbol> {
        let n = &self.nodes[node];
        match self.alphabet {
            Alphabet::Finite(k) => (0..k).collect(),
            Alphabet::Countable => {
                if n.otherwise == Edge::Uncovered {
                    return n.edges.keys().copied().collect();
                }
                *exhaustive = false;
                let mut v: Vec<Symbol> = (0..width).collect();
                v.extend(n.edges.keys().copied().filter(|&s| s >= width));
                v
            }
        }
    }

    /// Checks prefix-freeness of the words of length `<= depth` by
    /// enumeration (finite dictionaries are checked in full).
    pub fn is_proper(&self, depth: usize, budget: Budget) -> Result<bool> {
        let depth = self.depth_bound.filter(|_| self.is_finite()).unwrap_or(depth);
        let e = self.enumerate_up_to(depth, budget)?;
        Ok(check_prefix_free(&e.words).is_ok())
    }

    /// Completeness of a finite dictionary over `{0..k-1}`: every internal
    /// trie node has all `k` children.
    pub fn is_complete(&self, k: u32) -> Result<bool> {
        if !self.is_finite() || self.alphabet == Alphabet::Countable {
            return Err(Error::Unsupported(
                "completeness is only decidable for finite dictionaries over finite alphabets; use is_asc".into(),
            ));
        }
        Ok((0..self.nodes.len()).all(|id| (0..k).all(|s| self.step(id, s) != Edge::Uncovered)))
    }

    /// Certifies almost-sure completeness when `P(T_n) < tol`.
    pub fn is_asc(&self, source: &SourceModel, n: usize, tol: f64) -> Result<AscVerdict> {
        if n == 0 {
            return Err(Error::Precondition("depth must be at least 1".into()));
        }
        if !(tol > 0.0) {
            return Err(Error::Precondition(format!("tolerance {tol} must be positive")));
        }
        let profile = self.mass_profile(source, n)?;
        let residual = profile.frontier_mass().clamp(0.0, 1.0);
        let status = if residual < tol { AscStatus::CertifiedAsc } else { AscStatus::Undetermined };
        Ok(AscVerdict { status, depth_used: n, residual_mass: residual })
    }

    /// Greedy unique segmentation of `stream`.
    pub fn parse(&self, stream: &[Symbol]) -> Parse {
        let (spans, rest) = self.parse_spans(stream);
        Parse {
            phrases: spans.into_iter().map(|r| Word::from(&stream[r])).collect(),
            remainder: Word::from(&stream[rest..]),
        }
    }

    /// Phrase ranges and the start of the unparsed remainder.
    ///
    /// Once a prefix falls off the dictionary (an uncovered edge), no later
    /// phrase boundary exists and the remainder absorbs the rest.
    pub fn parse_spans(&self, stream: &[Symbol]) -> (Vec<Range<usize>>, usize) {
        let mut spans = Vec::new();
        let mut start = 0;
        let mut at = 0;
        let mut i = 0;
        while i < stream.len() {
            match self.step(at, stream[i]) {
                Edge::Word => {
                    spans.push(start..i + 1);
                    start = i + 1;
                    at = 0;
                }
                Edge::Node(r) => at = r,
                Edge::Uncovered => break,
            }
            i += 1;
        }
        (spans, start)
    }

    /// Rejects sources whose alphabet cannot supply the dictionary's symbols.
    pub(crate) fn check_source(&self, source: &SourceModel) -> Result<()> {
        for node in &self.nodes {
            if let Some(&s) = node.edges.keys().find(|&&s| !source.is_valid_symbol(s)) {
                return Err(Error::Domain(format!(
                    "dictionary uses symbol {s}, outside the source alphabet"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn transitions(&self, source: &SourceModel) -> Result<Transitions> {
        self.check_source(source)?;
        let rows = self
            .nodes
            .iter()
            .map(|node| {
                let mut arcs = Vec::with_capacity(node.edges.len() + 1);
                let mut listed = Vec::with_capacity(node.edges.len());
                for (&s, &edge) in &node.edges {
                    let p = source.prob(s).expect("checked above");
                    listed.push(s);
                    arcs.push(Arc { edge, mass: p, entropy: surprisal_term(p) });
                }
                // Over a finite dictionary alphabet, symbols beyond it fall
                // through to `otherwise`, which is `Uncovered` there.
                let (mass, entropy) = source.complement_stats(&listed);
                if mass > 0.0 {
                    arcs.push(Arc { edge: node.otherwise, mass, entropy });
                }
                arcs
            })
            .collect();
        Ok(Transitions { rows })
    }

    /// Propagates probability mass from the root for `n` levels.
    pub fn mass_profile(&self, source: &SourceModel, n: usize) -> Result<MassProfile> {
        let table = self.transitions(source)?;
        Ok(self.profile_with(&table, 0, n))
    }

    /// Mass accounting for words below `start`, relative to reaching `start`
    /// (unit mass, zero entropy), for `levels` further symbols.
    pub(crate) fn profile_with(&self, table: &Transitions, start: NodeId, levels: usize) -> MassProfile {
        let n = self.nodes.len();
        let mut cur: Vec<(NodeId, f64, f64)> = vec![(start, 1.0, 0.0)];
        let mut next_mass = vec![0.0f64; n];
        let mut next_ent = vec![0.0f64; n];
        let mut touched: Vec<NodeId> = Vec::new();
        let mut covered_mass = CompensatedSum::new();
        let mut covered_entropy = CompensatedSum::new();
        let mut covered_length = CompensatedSum::new();
        let mut dead = CompensatedSum::new();
        let mut uncovered = Vec::with_capacity(levels);
        let mut stats = Vec::with_capacity(levels);
        for level in 1..=levels {
            for &(id, m, e) in &cur {
                for arc in &table.rows[id] {
                    let m2 = m * arc.mass;
                    match arc.edge {
                        Edge::Word => {
                            covered_mass.add(m2);
                            covered_entropy.add(e * arc.mass + m * arc.entropy);
                            covered_length.add(level as f64 * m2);
                        }
                        Edge::Node(r) => {
                            if next_mass[r] == 0.0 && next_ent[r] == 0.0 {
                                touched.push(r);
                            }
                            next_mass[r] += m2;
                            next_ent[r] += e * arc.mass + m * arc.entropy;
                        }
                        Edge::Uncovered => dead.add(m2),
                    }
                }
            }
            touched.sort_unstable();
            touched.dedup();
            cur.clear();
            for &r in &touched {
                if next_mass[r] > 0.0 {
                    cur.push((r, next_mass[r], next_ent[r]));
                }
                next_mass[r] = 0.0;
                next_ent[r] = 0.0;
            }
            touched.clear();
            let live: f64 = cur.iter().map(|c| c.1).sum();
            uncovered.push(live + dead.value());
            stats.push(LevelStats {
                covered_entropy: covered_entropy.value(),
                covered_length: covered_length.value(),
                live_mass: live,
                live_entropy: cur.iter().map(|c| c.2).sum(),
            });
        }
        let live_mass = cur.iter().map(|c| c.1).sum();
        let live_entropy = cur.iter().map(|c| c.2).sum();
        MassProfile {
            depth: levels,
            covered_mass: covered_mass.value(),
            covered_entropy: covered_entropy.value(),
            covered_length: covered_length.value(),
            live_mass,
            live_entropy,
            dead_mass: dead.value(),
            uncovered,
            live: cur.into_iter().map(|(id, m, _)| (id, m)).collect(),
            levels: stats,
        }
    }

    /// Largest probability, over all nodes, of still being strictly inside
    /// the dictionary after `horizon` more symbols.
    pub(crate) fn survival_bound(&self, table: &Transitions, horizon: usize) -> f64 {
        (0..self.nodes.len())
            .map(|id| self.profile_with(table, id, horizon).live_mass)
            .fold(0.0, f64::max)
    }

    /// Words with `P(α) >= threshold`, canonical order. Stops descending at
    /// `max_len`.
    pub fn words_at_least(&self, source: &SourceModel, threshold: f64, max_len: usize) -> Result<Vec<Word>> {
        self.check_source(source)?;
        if !(threshold > 0.0) {
            return Err(Error::Precondition("threshold must be positive".into()));
        }
        let candidates = source.symbols_at_least(threshold);
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.collect_heavy(0, 1.0, &candidates, source, threshold, max_len, &mut prefix, &mut out);
        out.sort();
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn collect_heavy(
        &self,
        at: NodeId,
        mass: f64,
        candidates: &[Symbol],
        source: &SourceModel,
        threshold: f64,
        max_len: usize,
        prefix: &mut Vec<Symbol>,
        out: &mut Vec<Word>,
    ) {
        if prefix.len() >= max_len {
            return;
        }
        for &s in candidates {
            let m = mass * source.prob(s).expect("candidate symbols are valid");
            if m < threshold {
                continue;
            }
            prefix.push(s);
            match self.step(at, s) {
                Edge::Word => out.push(Word::from(prefix.as_slice())),
                Edge::Node(r) => self.collect_heavy(r, m, candidates, source, threshold, max_len, prefix, out),
                Edge::Uncovered => {}
            }
            prefix.pop();
        }
    }

    /// On-disk form. Finite word sets over finite alphabets use the
    /// `finite` layout; everything else records its family and the
    /// construction steps applied to it.
    pub fn to_file(&self) -> DictionaryFile {
        if let (true, Alphabet::Finite(k)) = (self.is_finite(), self.alphabet) {
            return DictionaryFile {
                kind: Some("finite".into()),
                alphabet_size: Some(k),
                words: self.words(),
                ..DictionaryFile::default()
            };
        }
        let mut f = DictionaryFile {
            kind: Some("lazy".into()),
            alphabet_size: self.alphabet.size(),
            ops: self.ops.clone(),
            ..DictionaryFile::default()
        };
        match &self.base {
            Base::Words(words) => {
                f.family = Some("words".into());
                f.words = Some(words.clone());
            }
            Base::Family(Family::RunLength) => f.family = Some("run_length".into()),
            Base::Family(Family::HeadExtension { head }) => {
                f.family = Some("head_extension".into());
                f.head = Some(*head);
            }
            Base::Family(Family::Block { length }) => {
                f.family = Some("block".into());
                f.length = Some(*length);
            }
        }
        f
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("dictionary serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: DictionaryFile = serde_json::from_str(text)?;
        file.into_dictionary()
    }
}

/// On-disk dictionary description.
///
/// * `{"kind":"finite","alphabet_size":2,"words":[[0],[1,0],[1,1]]}`
/// * `{"kind":"lazy","family":"run_length"}`
/// * `{"family":"head_extension","head":0}` (countable alphabet unless
///   `alphabet_size` is given)
/// * `{"kind":"lazy","family":"block","length":2}`
///
/// Lazy layouts may carry `"ops":[{"extend":[1,0]},{"truncate":3}]`, applied
/// in order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<Word>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<Symbol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ops: Vec<Op>,
}

impl DictionaryFile {
    pub fn into_dictionary(self) -> Result<Dictionary> {
        let kind = match (&self.kind, &self.family) {
            (Some(k), _) => k.as_str(),
            (None, Some(_)) => "lazy",
            (None, None) => "finite",
        };
        let alphabet = |default: Alphabet| self.alphabet_size.map_or(default, Alphabet::Finite);
        let base = match kind {
            "finite" => {
                let k = self
                    .alphabet_size
                    .ok_or_else(|| Error::Input("finite dictionary needs alphabet_size".into()))?;
                let words = self.words.clone().ok_or_else(|| Error::Input("finite dictionary needs words".into()))?;
                Dictionary::from_words(Alphabet::Finite(k), words)?
            }
            "lazy" => match self.family.as_deref() {
                Some("run_length") => Dictionary::run_length(alphabet(Alphabet::Finite(2)))?,
                Some("head_extension") => {
                    let head = self.head.ok_or_else(|| Error::Input("head_extension needs head".into()))?;
                    Dictionary::head_extension(head, alphabet(Alphabet::Countable))?
                }
                Some("block") => {
                    let length = self.length.ok_or_else(|| Error::Input("block needs length".into()))?;
                    Dictionary::block(length, alphabet(Alphabet::Countable))?
                }
                Some("words") => {
                    let words = self.words.clone().ok_or_else(|| Error::Input("words family needs words".into()))?;
                    Dictionary::from_words(alphabet(Alphabet::Countable), words)?
                }
                Some(other) => return Err(Error::Input(format!("unknown dictionary family `{other}`"))),
                None => return Err(Error::Input("lazy dictionary needs a family".into())),
            },
            other => return Err(Error::Input(format!("unknown dictionary kind `{other}`"))),
        };
        self.ops.iter().try_fold(base, |d, op| match op {
            Op::Extend(word) => d.extend(word),
            Op::Truncate(n) => d.truncated(*n, Budget::default()),
        })
    }
}
