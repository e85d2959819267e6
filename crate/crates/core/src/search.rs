// SPDX-License-Identifier: Apache-2.0

//! Cluster abstracts, query-time pruning and ranked retrieval.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::{Cluster, ClusterSet};
use crate::crypto::CipherToken;
use crate::error::{Error, Result};
use crate::index::{CentralIndex, DocumentId, Posting};

pub const DEFAULT_ABSTRACT_SIZE: usize = 100;
pub const DEFAULT_PRUNE_WIDTH: usize = 3;
pub const DEFAULT_CUTOFF: usize = 10;

/// The `a` highest-frequency tokens of one cluster with their corpus totals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abstract {
    pub cluster_id: usize,
    pub entries: BTreeMap<CipherToken, u64>,
}

impl Abstract {
    /// Entries by descending frequency, ties by ciphertext.
    pub fn ranked_entries(&self) -> Vec<(&CipherToken, u64)> {
        let mut v: Vec<(&CipherToken, u64)> = self.entries.iter().map(|(t, f)| (t, *f)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

fn total(postings: &[Posting]) -> u64 {
    postings.iter().map(|p| u64::from(p.frequency)).sum()
}

pub fn build_abstracts(clusters: &ClusterSet, a: usize) -> Result<Vec<Abstract>> {
    if a == 0 {
        return Err(Error::InvalidInput("abstract size must be >= 1".into()));
    }
    Ok(clusters
        .clusters
        .iter()
        .map(|cluster| {
            let mut ranked: Vec<(&CipherToken, u64)> = cluster
                .tokens
                .iter()
                .map(|(t, ps)| (t, total(ps)))
                .collect();
            ranked.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
            ranked.truncate(a);
            Abstract {
                cluster_id: cluster.id,
                entries: ranked.into_iter().map(|(t, f)| (t.clone(), f)).collect(),
            }
        })
        .collect())
}

/// Scores each abstract by the summed frequency of the query tokens it holds
/// and keeps the best `c` with a nonzero score. With no hit anywhere every
/// cluster is returned.
pub fn prune(query: &[CipherToken], abstracts: &[Abstract], c: usize) -> Result<Vec<usize>> {
    if c == 0 {
        return Err(Error::InvalidInput("prune width must be >= 1".into()));
    }
    let mut scored: Vec<(usize, u64)> = abstracts
        .iter()
        .map(|a| {
            let s = query.iter().filter_map(|t| a.entries.get(t)).sum();
            (a.cluster_id, s)
        })
        .filter(|&(_, s)| s > 0)
        .collect();
    if scored.is_empty() {
        let mut all: Vec<usize> = abstracts.iter().map(|a| a.cluster_id).collect();
        all.sort_unstable();
        return Ok(all);
    }
    scored.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    scored.truncate(c);
    Ok(scored.into_iter().map(|(id, _)| id).collect())
}

/// Per-posting contribution of a matched query token to a document's score.
pub trait Scorer: Sync {
    fn weight(&self, token: &CipherToken, posting: &Posting) -> f64;
}

/// Additive term frequency.
#[derive(Clone, Copy, Debug, Default)]
pub struct TermFrequency;

impl Scorer for TermFrequency {
    fn weight(&self, _token: &CipherToken, posting: &Posting) -> f64 {
        f64::from(posting.frequency)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub ranked: Vec<(DocumentId, f64)>,
    pub clusters_searched: Vec<usize>,
}

impl SearchResult {
    /// `rank\tdocId\tscore` lines, rank starting at 1.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, (doc, score)) in self.ranked.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}\t{}", i + 1, doc, score);
        }
        out
    }

    pub fn docs(&self) -> Vec<DocumentId> {
        self.ranked.iter().map(|(d, _)| d.clone()).collect()
    }
}

fn rank(scores: HashMap<&DocumentId, f64>, cutoff: usize) -> Vec<(DocumentId, f64)> {
    let mut ranked: Vec<(DocumentId, f64)> =
        scores.into_iter().map(|(d, s)| (d.clone(), s)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(cutoff);
    ranked
}

pub fn search_with(
    scorer: &dyn Scorer,
    query: &[CipherToken],
    clusters: &ClusterSet,
    selected: &[usize],
    cutoff: usize,
) -> Result<SearchResult> {
    if selected.is_empty() {
        return Err(Error::InvalidInput("no clusters selected".into()));
    }
    let chosen: Vec<&Cluster> = selected
        .iter()
        .map(|&id| {
            clusters
                .get(id)
                .ok_or_else(|| Error::InvalidInput(format!("unknown cluster id {id}")))
        })
        .collect::<Result<_>>()?;
    let mut scores: HashMap<&DocumentId, f64> = HashMap::new();
    for token in query {
        for cluster in &chosen {
            if let Some(postings) = cluster.tokens.get(token) {
                for p in postings {
                    *scores.entry(&p.doc).or_default() += scorer.weight(token, p);
                }
            }
        }
    }
    Ok(SearchResult {
        ranked: rank(scores, cutoff),
        clusters_searched: selected.to_vec(),
    })
}

pub fn search(
    query: &[CipherToken],
    clusters: &ClusterSet,
    selected: &[usize],
    cutoff: usize,
) -> Result<SearchResult> {
    search_with(&TermFrequency, query, clusters, selected, cutoff)
}

/// Unclustered reference: the same scoring against the whole central index.
pub fn search_index(
    query: &[CipherToken],
    index: &CentralIndex,
    cutoff: usize,
) -> Vec<(DocumentId, f64)> {
    let mut scores: HashMap<&DocumentId, f64> = HashMap::new();
    for token in query {
        if let Ok(postings) = index.postings(token) {
            for p in postings {
                *scores.entry(&p.doc).or_default() += TermFrequency.weight(token, p);
            }
        }
    }
    rank(scores, cutoff)
}

pub fn all_cluster_ids(clusters: &ClusterSet) -> Vec<usize> {
    clusters.clusters.iter().map(|c| c.id).collect()
}

#[derive(Serialize, Deserialize)]
struct AbstractLine {
    cluster: usize,
    entries: Vec<(String, u64)>,
}

pub fn write_abstracts(abstracts: &[Abstract], mut out: impl Write) -> Result<()> {
    for a in abstracts {
        let line = AbstractLine {
            cluster: a.cluster_id,
            entries: a
                .ranked_entries()
                .into_iter()
                .map(|(t, f)| (t.to_base64(), f))
                .collect(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn format_abstracts(abstracts: &[Abstract]) -> String {
    let mut buf = Vec::new();
    write_abstracts(abstracts, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn parse_abstracts(text: &str, path: &str) -> Result<Vec<Abstract>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::parse(path, i + 1, msg);
        let raw: AbstractLine = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for (t, f) in raw.entries {
            let token = CipherToken::from_base64(&t).map_err(|e| bad(e.to_string()))?;
            if entries.insert(token, f).is_some() {
                return Err(bad(format!("duplicate abstract entry {t}")));
            }
        }
        out.push(Abstract {
            cluster_id: raw.cluster,
            entries,
        });
    }
    Ok(out)
}

pub fn read_abstracts(path: &Path) -> Result<Vec<Abstract>> {
    parse_abstracts(&std::fs::read_to_string(path)?, &path.display().to_string())
}
