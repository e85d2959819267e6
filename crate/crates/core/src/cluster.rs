// SPDX-License-Identifier: Apache-2.0

//! Center selection by uniqueness and centrality, then assignment of every
//! token to its most related center.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crypto::CipherToken;
use crate::error::{Error, Result};
use crate::index::{CentralIndex, DocumentId, Posting};
use crate::matrix::{ordered_sum, StochasticMatrix, StochasticRole};

/// Documents covered by the candidates admitted so far. Only ever grows.
#[derive(Clone, Debug, Default)]
pub struct CoverageSet {
    docs: HashSet<DocumentId>,
}

impl CoverageSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, doc: &DocumentId) -> bool {
        self.docs.contains(doc)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn extend<'a>(&mut self, docs: impl IntoIterator<Item = &'a DocumentId>) {
        self.docs.extend(docs.into_iter().cloned());
    }
}

/// |A_i - U| / |A_i ∩ U|, with +inf when nothing is covered yet and 0 when
/// everything is.
pub fn uniqueness(token: &CipherToken, covered: &CoverageSet, index: &CentralIndex) -> Result<f64> {
    let postings = index.postings(token)?;
    let inside = postings.iter().filter(|p| covered.contains(&p.doc)).count();
    let outside = postings.len() - inside;
    Ok(match (outside, inside) {
        (0, _) => 0.0,
        (_, 0) => f64::INFINITY,
        (o, i) => o as f64 / i as f64,
    })
}

/// ω · c · (1 − c), where a zero factor wins over an infinite ω.
pub fn centrality(uniqueness: f64, separation: f64) -> f64 {
    if uniqueness == 0.0 || separation <= 0.0 || separation >= 1.0 {
        return 0.0;
    }
    uniqueness * separation * (1.0 - separation)
}

#[derive(Clone, Debug)]
pub struct CentralityEntry {
    pub token: CipherToken,
    pub uniqueness: f64,
    pub centrality: f64,
    /// Number of documents the token occurs in.
    pub degree: usize,
}

impl PartialEq for CentralityEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CentralityEntry {}

impl PartialOrd for CentralityEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CentralityEntry {
    /// Greater means extracted first: higher centrality; among infinities the
    /// larger degree; then the smaller ciphertext.
    fn cmp(&self, other: &Self) -> Ordering {
        let by_score = self.centrality.total_cmp(&other.centrality);
        let by_degree = if self.centrality.is_infinite() && other.centrality.is_infinite() {
            self.degree.cmp(&other.degree)
        } else {
            Ordering::Equal
        };
        by_score
            .then(by_degree)
            .then_with(|| other.token.cmp(&self.token))
    }
}

/// Outcome of one selection pass.
#[derive(Clone, Debug)]
pub struct CenterSelection {
    /// At most k centers, best first.
    pub centers: Vec<CipherToken>,
    /// Every token that passed the ω > 1 gate, in admission order.
    pub admitted: Vec<CentralityEntry>,
}

/// Tokens of `c` ordered by descending document count, then ciphertext.
pub fn association_order(
    c: &StochasticMatrix,
    index: &CentralIndex,
) -> Result<Vec<(CipherToken, usize)>> {
    let mut order = c
        .tokens()
        .iter()
        .map(|t| Ok((t.clone(), index.doc_cooccurrence(t)?)))
        .collect::<Result<Vec<_>>>()?;
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(order)
}

/// Single pass over the tokens of `c`: admit tokens with ω > 1, merge their
/// documents into the coverage set, and keep the k most central.
pub fn select_centers(
    k: usize,
    c: &StochasticMatrix,
    index: &CentralIndex,
) -> Result<CenterSelection> {
    if k < 1 {
        return Err(Error::InvalidK("k must be at least 1".into()));
    }
    if c.role() != StochasticRole::TokenToToken {
        return Err(Error::InvalidInput(
            "center selection needs the token-to-token matrix".into(),
        ));
    }
    let mut covered = CoverageSet::new();
    let mut heap = BinaryHeap::new();
    let mut admitted = Vec::new();
    for (token, degree) in association_order(c, index)? {
        let omega = uniqueness(&token, &covered, index)?;
        if omega > 1.0 {
            covered.extend(index.postings(&token)?.iter().map(|p| &p.doc));
            let separation = c.separation(&token).expect("token comes from C");
            let entry = CentralityEntry {
                token,
                uniqueness: omega,
                centrality: centrality(omega, separation),
                degree,
            };
            admitted.push(entry.clone());
            heap.push(entry);
        }
    }
    let centers = std::iter::from_fn(|| heap.pop())
        .take(k)
        .map(|e| e.token)
        .collect();
    Ok(CenterSelection { centers, admitted })
}

pub fn choose_centers(
    k: usize,
    c: &StochasticMatrix,
    index: &CentralIndex,
) -> Result<Vec<CipherToken>> {
    select_centers(k, c, index).map(|s| s.centers)
}

/// κ(d, t) = f(t, d) / Σ_j f(t, j).
pub fn contribution(token: &CipherToken, doc: &DocumentId, index: &CentralIndex) -> Result<f64> {
    let total = index.total_frequency(token)?;
    Ok(f64::from(index.frequency(token, doc)) / total as f64)
}

/// ρ(t, d, γ) = (f(t, d) + f(γ, d)) / Σ_j (f(t, j) + f(γ, j)).
pub fn cooccurrence(
    token: &CipherToken,
    doc: &DocumentId,
    center: &CipherToken,
    index: &CentralIndex,
) -> Result<f64> {
    let total = index.total_frequency(token)? + index.total_frequency(center)?;
    let joint = u64::from(index.frequency(token, doc)) + u64::from(index.frequency(center, doc));
    Ok(joint as f64 / total as f64)
}

/// Σ_j κ(j, t) · ln ρ(t, γ, j) over the documents of t, from (f(t, j),
/// f(γ, j)) pairs and the two corpus totals.
fn relatedness_from(
    pairs: impl Iterator<Item = (u32, u32)>,
    token_total: u64,
    center_total: u64,
) -> f64 {
    let joint_total = (token_total + center_total) as f64;
    let mut terms: Vec<f64> = pairs
        .map(|(ft, fc)| {
            let kappa = f64::from(ft) / token_total as f64;
            let rho = (u64::from(ft) + u64::from(fc)) as f64 / joint_total;
            kappa * rho.ln()
        })
        .collect();
    ordered_sum(&mut terms)
}

/// r(γ, t); never positive, and closer to zero means more related.
pub fn relatedness(center: &CipherToken, token: &CipherToken, index: &CentralIndex) -> Result<f64> {
    let postings = index.postings(token)?;
    let center_postings = index.postings(center)?;
    let token_total = index.total_frequency(token)?;
    let center_total = index.total_frequency(center)?;
    let pairs = postings.iter().map(|p| {
        let fc = center_postings
            .binary_search_by(|q| q.doc.cmp(&p.doc))
            .map(|i| center_postings[i].frequency)
            .unwrap_or(0);
        (p.frequency, fc)
    });
    Ok(relatedness_from(pairs, token_total, center_total))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub id: usize,
    pub center: CipherToken,
    /// Center and members with their postings, in ciphertext order.
    pub tokens: BTreeMap<CipherToken, Vec<Posting>>,
}

impl Cluster {
    pub fn members(&self) -> impl Iterator<Item = &CipherToken> {
        self.tokens.keys().filter(move |t| **t != self.center)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
}

/// Assigns every token of `index` to the center it is most related to.
/// Cluster ids follow the order of `centers`.
pub fn distribute(index: &CentralIndex, centers: &[CipherToken]) -> Result<ClusterSet> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let docs = index.docs();
    let doc_pos = |d: &DocumentId| docs.binary_search(d).expect("posting document is indexed");
    let mut seen = HashSet::new();
    let mut profiles = Vec::with_capacity(centers.len());
    for center in centers {
        if !seen.insert(center) {
            return Err(Error::InvalidInput(format!("duplicate center {center}")));
        }
        let mut dense = vec![0u32; docs.len()];
        for p in index.postings(center)? {
            dense[doc_pos(&p.doc)] = p.frequency;
        }
        profiles.push((dense, index.total_frequency(center)?));
    }

    let tokens: Vec<(&CipherToken, &[Posting])> = index.iter().collect();
    let assignment: Vec<usize> = tokens
        .par_iter()
        .map(|(token, postings)| {
            if let Some(own) = centers.iter().position(|c| c == *token) {
                return own;
            }
            let cols: Vec<(usize, u32)> = postings
                .iter()
                .map(|p| (doc_pos(&p.doc), p.frequency))
                .collect();
            let total: u64 = cols.iter().map(|&(_, f)| u64::from(f)).sum();
            let mut best: Option<(usize, f64)> = None;
            for (x, (dense, center_total)) in profiles.iter().enumerate() {
                let r = relatedness_from(
                    cols.iter().map(|&(j, f)| (f, dense[j])),
                    total,
                    *center_total,
                );
                let better = match best {
                    None => true,
                    Some((b, br)) => r > br || (r == br && centers[x] < centers[b]),
                };
                if better {
                    best = Some((x, r));
                }
            }
            best.expect("at least one center").0
        })
        .collect();

    let mut clusters: Vec<Cluster> = centers
        .iter()
        .enumerate()
        .map(|(id, c)| Cluster {
            id,
            center: c.clone(),
            tokens: BTreeMap::new(),
        })
        .collect();
    for ((token, postings), x) in tokens.into_iter().zip(assignment) {
        clusters[x].tokens.insert(token.clone(), postings.to_vec());
    }
    Ok(ClusterSet { clusters })
}

#[derive(Serialize, Deserialize)]
struct TokenLine {
    t: String,
    postings: Vec<(String, u32)>,
}

#[derive(Serialize, Deserialize)]
struct ClusterLine {
    id: usize,
    center: String,
    tokens: Vec<TokenLine>,
}

impl ClusterSet {
    pub fn k_used(&self) -> usize {
        self.clusters.len()
    }

    pub fn token_count(&self) -> usize {
        self.clusters.iter().map(Cluster::len).sum()
    }

    pub fn centers(&self) -> Vec<CipherToken> {
        self.clusters.iter().map(|c| c.center.clone()).collect()
    }

    /// Token -> id of the cluster holding it.
    pub fn assignment(&self) -> BTreeMap<CipherToken, usize> {
        self.clusters
            .iter()
            .flat_map(|c| c.tokens.keys().map(move |t| (t.clone(), c.id)))
            .collect()
    }

    pub fn get(&self, id: usize) -> Option<&Cluster> {
        self.clusters.get(id).filter(|c| c.id == id)
    }

    /// JSON-lines, one cluster per line, ordered by id.
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for c in &self.clusters {
            let line = ClusterLine {
                id: c.id,
                center: c.center.to_base64(),
                tokens: c
                    .tokens
                    .iter()
                    .map(|(t, ps)| TokenLine {
                        t: t.to_base64(),
                        postings: ps
                            .iter()
                            .map(|p| (p.doc.to_string(), p.frequency))
                            .collect(),
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    /// Parses and validates: ids are 0..n in order, each center is one of its
    /// cluster's tokens, and no token appears twice.
    pub fn parse_jsonl(text: &str, path: &str) -> Result<Self> {
        let mut clusters = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::parse(path, lineno, msg);
            let raw: ClusterLine = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            if raw.id != clusters.len() {
                return Err(bad(format!(
                    "expected cluster id {}, found {}",
                    clusters.len(),
                    raw.id
                )));
            }
            let center = CipherToken::from_base64(&raw.center).map_err(|e| bad(e.to_string()))?;
            let mut tokens = BTreeMap::new();
            for tl in raw.tokens {
                let token = CipherToken::from_base64(&tl.t).map_err(|e| bad(e.to_string()))?;
                if !seen.insert(token.clone()) {
                    return Err(bad(format!("token {token} appears in more than one place")));
                }
                let mut postings = Vec::with_capacity(tl.postings.len());
                for (d, f) in tl.postings {
                    if f == 0 {
                        return Err(bad(format!("zero frequency for {token}")));
                    }
                    postings.push(Posting {
                        doc: DocumentId::new(d).map_err(|e| bad(e.to_string()))?,
                        frequency: f,
                    });
                }
                postings.sort_by(|a, b| a.doc.cmp(&b.doc));
                tokens.insert(token, postings);
            }
            if !tokens.contains_key(&center) {
                return Err(bad(format!(
                    "center {center} is not among the cluster tokens"
                )));
            }
            clusters.push(Cluster {
                id: raw.id,
                center,
                tokens,
            });
        }
        Ok(ClusterSet { clusters })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_jsonl(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}
