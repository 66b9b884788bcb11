//! Dictionary constructions: extension `D[α]`, truncation `D_n`, the depth-`n`
//! frontier `T_n` and `D_n⊥`, cones `(D, β)` and the single-word extension
//! chain that walks from `D_m` to `D_{m+1}`.

use serde::{Deserialize, Serialize};

use crate::dictionary::{Alphabet, Budget, Dictionary, Edge, Node, NodeId, Op, Position};
use crate::error::{Error, Result};
use crate::source::SourceModel;
use crate::word::{Symbol, Word};

/// `T_n`, `D_n⊥` and `D_n` for one depth.
#[derive(Clone, Debug)]
pub struct FrontierSets {
    pub n: usize,
    /// Length-`n` strings with no dictionary prefix, canonical order.
    pub t_n: Vec<Word>,
    /// Length-`n` dictionary words together with `t_n`, canonical order.
    pub d_n_perp: Vec<Word>,
    /// Words shorter than `n` together with `d_n_perp`.
    pub d_n: Dictionary,
    /// False when the width budget cut `t_n` or `d_n_perp` short.
    pub exhaustive: bool,
}

/// Report object for [`FrontierSets`]; `d_n` travels in dictionary layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrontierReport {
    pub n: usize,
    pub t_n: Vec<Word>,
    pub d_n_perp: Vec<Word>,
    pub d_n: crate::dictionary::DictionaryFile,
    pub exhaustive: bool,
}

impl FrontierSets {
    pub fn report(&self) -> FrontierReport {
        FrontierReport {
            n: self.n,
            t_n: self.t_n.clone(),
            d_n_perp: self.d_n_perp.clone(),
            d_n: self.d_n.to_file(),
            exhaustive: self.exhaustive,
        }
    }
}

/// Dictionary words having a given prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub prefix: Word,
    pub words: Vec<Word>,
    /// False when longer members exist beyond the depth budget or the width
    /// budget hid members.
    pub exhaustive: bool,
}

/// Probability accounting for a cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeMass {
    /// `P(β)`.
    pub prefix_mass: f64,
    /// Mass of cone members of length at most the depth used.
    pub covered: f64,
    /// Mass of length-`depth` extensions of `β` still without a dictionary
    /// prefix; bounds the mass of cone members not yet counted.
    pub uncovered: f64,
}

impl Dictionary {
    /// `D[α] = (D \ {α}) ∪ αA`.
    pub fn extend(&self, alpha: &Word) -> Result<Dictionary> {
        let mut d = self.clone();
        d.extend_in_place(alpha)?;
        Ok(d)
    }

    pub(crate) fn extend_in_place(&mut self, alpha: &Word) -> Result<()> {
        if !self.contains(alpha) {
            return Err(Error::Domain(format!("`{alpha}` is not a dictionary word")));
        }
        let expansion = self.expansion_node();
        let (last, init) = alpha.symbols().split_last().expect("members are non-empty");
        if self.tree {
            let mut at = 0;
            for &s in init {
                match self.step(at, s) {
                    Edge::Node(r) => at = r,
                    _ => unreachable!("path of a member word"),
                }
            }
            self.nodes.push(expansion);
            let id = self.nodes.len() - 1;
            self.nodes[at].edges.insert(*last, Edge::Node(id));
            self.note_tree_growth(alpha.len() + 1, Op::Extend(alpha.clone()));
            return Ok(());
        }
        // Shared structure: copy the path so no other word changes.
        let mut nodes = self.nodes.clone();
        let mut path = vec![0];
        for &s in init {
            match self.step(*path.last().expect("non-empty"), s) {
                Edge::Node(r) => path.push(r),
                _ => unreachable!("path of a member word"),
            }
        }
        let first_copy = nodes.len();
        nodes.extend(path.iter().map(|&id| self.nodes[id].clone()));
        for (i, &s) in init.iter().enumerate() {
            nodes[first_copy + i].edges.insert(s, Edge::Node(first_copy + i + 1));
        }
        nodes.push(expansion);
        let exp_id = nodes.len() - 1;
        nodes[first_copy + init.len()].edges.insert(*last, Edge::Node(exp_id));
        *self = self.derived(nodes, first_copy, Op::Extend(alpha.clone()));
        Ok(())
    }

    /// A node all of whose children are words: the `αA` part of `D[α]`.
    fn expansion_node(&self) -> Node {
        let mut n = Node::empty();
        match self.alphabet {
            Alphabet::Finite(k) => n.edges.extend((0..k).map(|s| (s, Edge::Word))),
            Alphabet::Countable => n.otherwise = Edge::Word,
        }
        n
    }

    /// `D_n`: words shorter than `n`, length-`n` words, and every length-`n`
    /// string without a dictionary prefix. `D_1` is the alphabet.
    pub fn truncated(&self, n: usize, budget: Budget) -> Result<Dictionary> {
        if n == 0 {
            return Err(Error::Precondition("truncation depth must be at least 1".into()));
        }
        let mut nodes = Vec::new();
        let root = self.unroll(Some(0), 0, n, &mut nodes, budget)?;
        Ok(self.derived(nodes, root, Op::Truncate(n)))
    }

    fn unroll(
        &self,
        orig: Option<NodeId>,
        depth: usize,
        n: usize,
        nodes: &mut Vec<Node>,
        budget: Budget,
    ) -> Result<NodeId> {
        if nodes.len() >= budget.max_words {
            return Err(Error::Resource { budget: "max_words", limit: budget.max_words });
        }
        nodes.push(Node::empty());
        let id = nodes.len() - 1;
        let map = |e: Edge, nodes: &mut Vec<Node>| -> Result<Edge> {
            if depth + 1 == n {
                return Ok(Edge::Word);
            }
            match e {
                Edge::Word => Ok(Edge::Word),
                Edge::Node(r) => Ok(Edge::Node(self.unroll(Some(r), depth + 1, n, nodes, budget)?)),
                Edge::Uncovered => Ok(Edge::Node(self.unroll(None, depth + 1, n, nodes, budget)?)),
            }
        };
        match self.alphabet {
            Alphabet::Finite(k) => {
                for s in 0..k {
                    let e = orig.map_or(Edge::Uncovered, |o| self.step(o, s));
                    let mapped = map(e, nodes)?;
                    nodes[id].edges.insert(s, mapped);
                }
            }
            Alphabet::Countable => {
                let (edges, otherwise) = match orig {
                    Some(o) => (
                        self.nodes[o].edges.iter().map(|(&s, &e)| (s, e)).collect::<Vec<_>>(),
                        self.nodes[o].otherwise,
                    ),
                    None => (Vec::new(), Edge::Uncovered),
                };
                for (s, e) in edges {
                    let mapped = map(e, nodes)?;
                    nodes[id].edges.insert(s, mapped);
                }
                let mapped = map(otherwise, nodes)?;
                nodes[id].otherwise = mapped;
            }
        }
        Ok(id)
    }

    /// `T_n`, `D_n⊥` and `D_n`.
    pub fn truncate(&self, n: usize, budget: Budget) -> Result<FrontierSets> {
        let d_n = self.truncated(n, budget)?;
        let mut t_n = Vec::new();
        let mut words_n = Vec::new();
        let mut exhaustive = true;
        let mut prefix = Vec::with_capacity(n);
        self.frontier_walk(Some(0), &mut prefix, n, budget, &mut t_n, &mut words_n, &mut exhaustive)?;
        t_n.sort();
        let mut d_n_perp = words_n;
        d_n_perp.extend(t_n.iter().cloned());
        d_n_perp.sort();
        Ok(FrontierSets { n, t_n, d_n_perp, d_n, exhaustive })
    }

    #[allow(clippy::too_many_arguments)]
    fn frontier_walk(
        &self,
        at: Option<NodeId>,
        prefix: &mut Vec<Symbol>,
        n: usize,
        budget: Budget,
        t_n: &mut Vec<Word>,
        words_n: &mut Vec<Word>,
        exhaustive: &mut bool,
    ) -> Result<()> {
        if prefix.len() == n {
            if t_n.len() >= budget.max_words {
                return Err(Error::Resource { budget: "max_words", limit: budget.max_words });
            }
            t_n.push(Word::from(prefix.as_slice()));
            return Ok(());
        }
        let symbols: Vec<Symbol> = match (at, self.alphabet) {
            (Some(o), _) => self.branch_symbols(o, budget.width, exhaustive),
            (None, Alphabet::Finite(k)) => (0..k).collect(),
            (None, Alphabet::Countable) => {
                *exhaustive = false;
                (0..budget.width).collect()
            }
        };
        for s in symbols {
            let e = at.map_or(Edge::Uncovered, |o| self.step(o, s));
            prefix.push(s);
            match e {
                Edge::Word => {
                    if prefix.len() == n {
                        words_n.push(Word::from(prefix.as_slice()));
                    }
                }
                Edge::Node(r) => self.frontier_walk(Some(r), prefix, n, budget, t_n, words_n, exhaustive)?,
                Edge::Uncovered => self.frontier_walk(None, prefix, n, budget, t_n, words_n, exhaustive)?,
            }
            prefix.pop();
        }
        Ok(())
    }

    /// `(D, β)`: members with prefix `β`, up to length `depth`.
    ///
    /// Fails when `β` has a strict prefix in the dictionary, since the cone
    /// identities only hold without one.
    pub fn cone(&self, beta: &Word, depth: usize, budget: Budget) -> Result<Cone> {
        let words = match self.locate(beta.symbols()) {
            Position::PastWord { word_len } => {
                return Err(cone_hypothesis(beta, word_len));
            }
            Position::Word => {
                let words = if beta.len() <= depth { vec![beta.clone()] } else { Vec::new() };
                return Ok(Cone { prefix: beta.clone(), exhaustive: beta.len() <= depth, words });
            }
            Position::Uncovered => {
                return Ok(Cone { prefix: beta.clone(), words: Vec::new(), exhaustive: true });
            }
            Position::Inside(q) => q,
        };
        let q = words;
        let mut out = Vec::new();
        let mut exhaustive = true;
        let mut prefix = beta.symbols().to_vec();
        self.enumerate_from(q, &mut prefix, depth, budget, &mut out, &mut exhaustive)?;
        out.sort();
        if self.live_at_depth(q, beta.len(), depth) {
            exhaustive = false;
        }
        Ok(Cone { prefix: beta.clone(), words: out, exhaustive })
    }

    /// True if some strict prefix of a word, reachable from `start` (sitting
    /// at length `from`), has length `>= to`.
    fn live_at_depth(&self, start: NodeId, from: usize, to: usize) -> bool {
        let mut level = vec![start];
        let mut seen = vec![usize::MAX; self.node_count()];
        for d in from..to {
            let mut next = Vec::new();
            for &id in &level {
                let node = &self.nodes[id];
                for e in node.edges.values().chain(std::iter::once(&node.otherwise)) {
                    if let Edge::Node(r) = *e {
                        if seen[r] != d {
                            seen[r] = d;
                            next.push(r);
                        }
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            level = next;
        }
        !level.is_empty()
    }

    /// `P(β)` against the mass of `(D, β)` counted to `depth`.
    pub fn cone_mass(&self, source: &SourceModel, beta: &Word, depth: usize) -> Result<ConeMass> {
        let prefix_mass = source.word_prob(beta)?;
        match self.locate(beta.symbols()) {
            Position::PastWord { word_len } => Err(cone_hypothesis(beta, word_len)),
            Position::Word => Ok(ConeMass { prefix_mass, covered: prefix_mass, uncovered: 0.0 }),
            Position::Uncovered => Ok(ConeMass { prefix_mass, covered: 0.0, uncovered: prefix_mass }),
            Position::Inside(q) => {
                let table = self.transitions(source)?;
                let levels = depth.saturating_sub(beta.len());
                let p = self.profile_with(&table, q, levels);
                let uncovered = if levels == 0 { 1.0 } else { p.frontier_mass() };
                Ok(ConeMass {
                    prefix_mass,
                    covered: prefix_mass * p.covered_mass,
                    uncovered: prefix_mass * uncovered,
                })
            }
        }
    }
}

fn cone_hypothesis(beta: &Word, word_len: usize) -> Error {
    let prefix = Word::from(&beta.symbols()[..word_len]);
    Error::Precondition(format!("`{beta}` has the shorter dictionary word `{prefix}` as a prefix"))
}

/// The chain `D_{m+1,k} = (D_{m+1,k-1} \ {α_k}) ∪ α_k A` from `D_m` towards
/// `D_{m+1}`, extending the members of `T_m` one at a time in canonical order.
#[derive(Clone, Debug)]
pub struct ExtensionChain {
    pub base: Dictionary,
    pub extending_words: Vec<Word>,
    /// False when `T_m` was cut by the width budget (countable alphabets).
    pub exhaustive: bool,
}

impl ExtensionChain {
    /// Chain from `D_m` of `d`.
    pub fn for_truncation(d: &Dictionary, m: usize, budget: Budget) -> Result<Self> {
        let frontier = d.truncate(m, budget)?;
        Ok(ExtensionChain {
            base: frontier.d_n,
            extending_words: frontier.t_n,
            exhaustive: frontier.exhaustive,
        })
    }

    pub fn new(base: Dictionary, extending_words: Vec<Word>) -> Self {
        ExtensionChain { base, extending_words, exhaustive: true }
    }

    /// `D_{m+1,k}`.
    pub fn step(&self, k: usize) -> Result<Dictionary> {
        if k > self.extending_words.len() {
            return Err(Error::Precondition(format!(
                "chain has {} extending words, asked for {k}",
                self.extending_words.len()
            )));
        }
        let mut d = self.base.clone();
        for alpha in &self.extending_words[..k] {
            d.extend_in_place(alpha)?;
        }
        Ok(d)
    }
}
