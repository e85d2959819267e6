// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the criterion benches.

use clustcrypt::index::encrypt_records;
use clustcrypt::synth::TopicCorpus;
use clustcrypt::{ingest, CentralIndex, Codec, SecretKey};

/// Keyed index over a topic-structured synthetic corpus.
pub fn topic_index(tokens: usize, docs: usize, seed: u64) -> CentralIndex {
    let corpus = TopicCorpus {
        tokens,
        docs,
        topics: (tokens / 250).max(2),
        tokens_per_doc: 40,
        seed,
        ..TopicCorpus::default()
    };
    let cipher = bench_cipher();
    ingest(encrypt_records(&cipher, corpus.keyword_records()).expect("synthetic words encrypt"))
        .expect("consistent")
}

pub fn bench_cipher() -> Codec {
    Codec::keyed(SecretKey::from_bytes([0x5a; 32]))
}

/// Query strings over the synthetic vocabulary.
pub fn queries(tokens: usize, n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let a = (i * 37) % tokens;
            let b = (i * 101 + 3) % tokens;
            format!(
                "{} {}",
                clustcrypt::synth::word_name(a),
                clustcrypt::synth::word_name(b)
            )
        })
        .collect()
}
