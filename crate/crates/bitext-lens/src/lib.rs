//! Statistical analysis toolkit for text↔emoji parallel corpora.
//!
//! The pipeline: load a bitext ([`corpus`]), tokenize with Unicode-correct
//! rules and normalize, compute descriptive and Zipf statistics
//! ([`stats`]), train an IBM Model 1 lexical translation table by EM with
//! a NULL source symbol ([`align`]), and induce per-emoji part-of-speech
//! distributions through the trained table ([`pos`]). The [`cli`] module
//! exposes the same steps as deterministic subcommands that emit CSV/TSV
//! artifacts.

pub mod align;
pub mod cli;
pub mod corpus;
pub mod pos;
pub mod stats;

mod fmt;

pub use align::{
    train, Direction, Initialization, TrainingConfig, TrainingDiagnostics, TranslationTable,
};
pub use corpus::{
    build_corpus, load_corpus, AlignedCorpus, CorpusFormat, NormalizationConfig, Profile, RawPair,
    SentencePair, Side, StopwordList, Token, TokenKind, Vocabulary,
};
