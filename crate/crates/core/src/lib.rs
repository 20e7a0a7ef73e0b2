//! Variable name recovery for minified JavaScript.
//!
//! A corpus of ordinary (non-minified) JavaScript is mined into a
//! [`CorpusIndex`] of per-variable relation graphs and name co-occurrence
//! posting lists. Minified functions are then matched against it using three
//! usage contexts: how a variable touches non-minified members
//! ([`svc`]), which names co-occur inside one function ([`mvc`]) and which
//! names appear in functions with a similar name ([`tsc`]). The [`recovery`]
//! module blends the three with a beam search over joint name assignments.

pub mod extraction;

pub use extraction::{
    parse_functions, tokenize_name, FunctionRecord, ParseError, RelType, RelationEdge,
    RelationGraph,
};
pub mod cli;
pub mod evaluation;
pub mod index;
pub use index::{CorpusIndex, IndexBuilder, NameId};
pub mod mvc;
pub mod svc;
pub mod tsc;
pub mod recovery;
pub use recovery::{recover_file, recover_function, RecoveryConfig, RecoveryResult, TscMode};
