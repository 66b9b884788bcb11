//! Variable-to-variable length coding over memoryless sources.
//!
//! Sources, prefix-free parsing dictionaries (finite or lazily described),
//! the extension/truncation algebra on them, exact and bounded entropy and
//! length measures, Tunstall/Huffman coding and Monte Carlo checks.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod codec;
pub mod dictionary;
pub mod measures;
pub mod error;
pub mod numeric;
pub mod simulation;
pub mod source;
pub mod word;

pub use algebra::{Cone, ConeMass, ExtensionChain, FrontierSets};
pub use dictionary::{Alphabet, AscStatus, AscVerdict, Budget, Dictionary, Family, Parse};
pub use error::{Error, Result};
pub use source::SourceModel;
pub use word::{Symbol, Word};
pub use codec::{decode, encode, huffman_build, tunstall_build, PhraseCodebook};
pub use measures::{check_conservation, MeasureReport, Verdict};
pub use simulation::{phrase_histogram, simulate, SimReport};
