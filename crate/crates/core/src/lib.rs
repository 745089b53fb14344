//! Meta-learned recommendation of text representations.
//!
//! A corpus is summarised by 72 meta-features; a knowledge base associates
//! those vectors with the measured accuracy of every representation in a
//! registry; recommendation strategies map a new corpus to the
//! representation expected to work best.

pub mod corpus;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod knowledgebase;
pub mod learners;
pub mod metafeatures;
pub mod numerics;
pub mod recommend;
pub mod represent;
pub mod seed;
pub mod synth;

pub use corpus::{Document, LabeledCorpus};
pub use error::{Error, Result};
pub use evaluate::{LooConfig, LooReport};
pub use knowledgebase::{BuildConfig, EvalConfig, KnowledgeBase};
pub use learners::ForestConfig;
pub use metafeatures::{MetaFeatureVector, PosLexicon};
pub use recommend::{Recommendation, Strategy};
pub use represent::{RepresentationRegistry, RepresentationSpec, Resources};
