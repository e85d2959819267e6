// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic corpora for property tests, acceptance runs and benches.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crypto::CipherToken;
use crate::index::{ingest, CentralIndex, DocumentId, Record};
use crate::pipeline::PlainRecords;

/// Topic-structured corpus: every token and document belongs to one topic,
/// and documents draw most of their tokens from their own topic with a
/// skewed popularity.
#[derive(Clone, Copy, Debug)]
pub struct TopicCorpus {
    pub tokens: usize,
    pub docs: usize,
    pub topics: usize,
    pub tokens_per_doc: usize,
    /// Probability that a drawn token comes from the document's topic.
    pub on_topic: f64,
    pub max_frequency: u32,
    pub seed: u64,
}

impl Default for TopicCorpus {
    fn default() -> Self {
        TopicCorpus {
            tokens: 1000,
            docs: 200,
            topics: 10,
            tokens_per_doc: 20,
            on_topic: 0.8,
            max_frequency: 40,
            seed: 7,
        }
    }
}

pub fn doc_name(j: usize) -> DocumentId {
    DocumentId::new(format!("doc{j:05}")).expect("valid id")
}

pub fn word_name(i: usize) -> String {
    format!("w{i:05}")
}

impl TopicCorpus {
    /// Plaintext keyword lists; every token occurs at least once.
    pub fn keyword_records(&self) -> PlainRecords {
        assert!(self.tokens >= self.topics && self.topics >= 1 && self.docs >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let per_topic: Vec<Vec<usize>> = (0..self.topics)
            .map(|t| (t..self.tokens).step_by(self.topics).collect())
            .collect();
        let mut docs: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new(); self.docs];
        for (j, bag) in docs.iter_mut().enumerate() {
            let topic = &per_topic[j % self.topics];
            let want = self.tokens_per_doc.min(self.tokens);
            let mut guard = 0;
            while bag.len() < want && guard < want * 50 {
                guard += 1;
                let token = if rng.random_bool(self.on_topic) {
                    // squaring a uniform draw favours the head of the topic list
                    let u: f64 = rng.random();
                    topic[((u * u) * topic.len() as f64) as usize]
                } else {
                    rng.random_range(0..self.tokens)
                };
                let f = rng.random_range(1..=self.max_frequency);
                bag.entry(token).or_insert(f);
            }
        }
        let mut used = vec![false; self.tokens];
        for bag in &docs {
            for &t in bag.keys() {
                used[t] = true;
            }
        }
        for (t, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
            let topic_docs = (self.docs + self.topics - 1 - t % self.topics) / self.topics;
            let j = if topic_docs == 0 {
                rng.random_range(0..self.docs)
            } else {
                t % self.topics + self.topics * rng.random_range(0..topic_docs)
            };
            docs[j].insert(t, 1);
        }
        docs.into_iter()
            .enumerate()
            .map(|(j, bag)| {
                (
                    doc_name(j),
                    bag.into_iter().map(|(t, f)| (word_name(t), f)).collect(),
                )
            })
            .collect()
    }
}

/// Unstructured random sparse index with identity-style token labels.
pub fn random_index(rng: &mut impl Rng, max_tokens: usize, max_docs: usize) -> CentralIndex {
    let m = rng.random_range(1..=max_tokens);
    let d = rng.random_range(1..=max_docs);
    let mut by_doc: BTreeMap<usize, Vec<(CipherToken, u32)>> = BTreeMap::new();
    let max_degree = d.min(8);
    for i in 0..m {
        let token = CipherToken::from_bytes(format!("t{i:04}").into_bytes());
        let degree = rng.random_range(1..=max_degree);
        for j in sample(rng, d, degree) {
            by_doc
                .entry(j)
                .or_default()
                .push((token.clone(), rng.random_range(1..=50)));
        }
    }
    let records: Vec<Record> = by_doc
        .into_iter()
        .map(|(j, ts)| (doc_name(j), ts))
        .collect();
    ingest(records).expect("generated records are consistent")
}

/// Rebuilds `index` with every frequency multiplied by `factor`.
pub fn scaled(index: &CentralIndex, factor: u32) -> CentralIndex {
    remapped(index, |d| d.clone(), |f| f * factor)
}

/// Rebuilds `index` with documents renamed through `rename` (a bijection).
pub fn relabeled_docs(
    index: &CentralIndex,
    rename: impl Fn(&DocumentId) -> DocumentId,
) -> CentralIndex {
    remapped(index, rename, |f| f)
}

fn remapped(
    index: &CentralIndex,
    rename: impl Fn(&DocumentId) -> DocumentId,
    freq: impl Fn(u32) -> u32,
) -> CentralIndex {
    let mut by_doc: BTreeMap<DocumentId, Vec<(CipherToken, u32)>> = BTreeMap::new();
    for (t, d, f) in index.triples() {
        by_doc
            .entry(rename(d))
            .or_default()
            .push((t.clone(), freq(f)));
    }
    ingest(by_doc).expect("remapping keeps records consistent")
}
