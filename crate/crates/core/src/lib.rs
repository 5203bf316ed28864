//! Social-bias evaluation for word and sense embeddings.
//!
//! * [`embedstore`]: word2vec-text word/sense embedding store.
//! * [`assoc`]: WEAT association statistics, effect size, permutation test,
//!   gender direction.
//! * [`propagation`]: WAT gender-mass propagation and Pearson correlation.
//! * [`sssb`]: template expansion, validation and JSONL I/O for the
//!   sense-sensitive social bias dataset.
//! * [`mlm`]: pseudo log-likelihood and AUL bias scores from token
//!   log-probability files.
//! * [`report`]: command-level reports and their JSON/TSV/markdown renderings.

pub mod assoc;
pub mod embedstore;
pub mod error;
pub mod mlm;
pub mod propagation;
pub mod report;
pub mod sssb;

pub use assoc::{BiasSpec, Term};
pub use embedstore::{EmbeddingStore, Level, SenseKey};
pub use error::{Error, Result};
