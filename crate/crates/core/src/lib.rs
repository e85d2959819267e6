// SPDX-License-Identifier: Apache-2.0

//! Topic clustering for encrypted keyword indexes.
//!
//! The crate works only from what an encrypted index exposes: opaque token
//! ciphertexts and plaintext (document, frequency) postings. From those it
//! estimates how many topic clusters the corpus needs, picks center tokens,
//! assigns the remaining tokens, and uses per-cluster abstracts to restrict
//! which parts of the index a query touches.
//!
//! Module map:
//! - [`index`]: central index, ingestion, keyword extraction, trimming
//! - [`crypto`]: deterministic token encryption and the identity codec
//! - [`matrix`]: A -> N -> R, S -> C and the trace estimate of k
//! - [`cluster`]: center selection and token distribution
//! - [`search`]: abstracts, pruning, ranked retrieval
//! - [`eval`]: coherence, TSAP@10, timing, fixed-k comparison
//! - [`pipeline`]: configuration and the end-to-end run
//! - [`synth`]: seeded synthetic corpora for tests and benchmarks

pub mod cluster;
pub mod crypto;
pub mod error;
pub mod eval;
pub mod index;
pub mod matrix;
pub mod pipeline;
pub mod search;
pub mod synth;

pub use cluster::{choose_centers, distribute, Cluster, ClusterSet};
pub use crypto::{CipherToken, Codec, IdentityCodec, KeyedCipher, SecretKey, TokenCipher};
pub use error::{Error, Result};
pub use index::{ingest, trim, CentralIndex, DocumentId, Posting, TrimmedIndex};
pub use matrix::{estimate_k, KEstimate, MatrixChain};
pub use pipeline::{cluster_index, run_pipeline, KMode, PipelineConfig, PipelineInput};
