// SPDX-License-Identifier: Apache-2.0

//! Evaluation: embedding coherence of clusters, TSAP@10, search timing and
//! the fixed-k baseline comparison.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{Cluster, ClusterSet};
use crate::crypto::{IdentityCodec, TokenCipher};
use crate::error::{Error, Result};
use crate::index::{CentralIndex, DocumentId};
use crate::pipeline::{cluster_index, KMode};
use crate::search::{all_cluster_ids, prune, search, Abstract, SearchResult};

pub const TSAP_CUTOFF: usize = 10;
pub const DEFAULT_STATIC_K: usize = 10;

/// Word vectors in the plain-text `word v1 ... vd` format.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Parses the table. A leading `<count> <dim>` header line is accepted.
    /// Words are lowercased; the first vector for a word wins.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut dimension = None;
        let mut vectors = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if i == 0
                && values.len() == 1
                && word.parse::<usize>().is_ok()
                && values[0].parse::<usize>().is_ok()
            {
                continue;
            }
            let v = values
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::parse(path, i + 1, format!("bad vector component: {e}")))?;
            let expected = *dimension.get_or_insert(v.len());
            if v.len() != expected || expected == 0 {
                return Err(Error::DimensionMismatch {
                    word: word.to_string(),
                    expected,
                    found: v.len(),
                });
            }
            vectors.entry(word.to_lowercase()).or_insert(v);
        }
        let dimension =
            dimension.ok_or_else(|| Error::parse(path, 0, "embedding table is empty"))?;
        Ok(EmbeddingTable { dimension, vectors })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }
}

pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coherence {
    /// Mean pairwise cosine; `None` with fewer than two embeddable words.
    pub value: Option<f64>,
    pub embeddable: usize,
    pub skipped: usize,
}

pub fn cluster_coherence<S: AsRef<str>>(words: &[S], table: &EmbeddingTable) -> Coherence {
    let vecs: Vec<&[f64]> = words.iter().filter_map(|w| table.get(w.as_ref())).collect();
    let skipped = words.len() - vecs.len();
    if vecs.len() < 2 {
        return Coherence {
            value: None,
            embeddable: vecs.len(),
            skipped,
        };
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..vecs.len() {
        for j in i + 1..vecs.len() {
            sum += cosine(vecs[i], vecs[j]);
            pairs += 1;
        }
    }
    Coherence {
        value: Some(sum / pairs as f64),
        embeddable: vecs.len(),
        skipped,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grade {
    Irrelevant = 0,
    Partial = 1,
    Relevant = 2,
}

impl Grade {
    pub fn from_u8(g: u8) -> Option<Self> {
        match g {
            0 => Some(Grade::Irrelevant),
            1 => Some(Grade::Partial),
            2 => Some(Grade::Relevant),
            _ => None,
        }
    }
}

/// Graded relevance per (query, document).
#[derive(Clone, Debug, Default)]
pub struct Judgments {
    grades: HashMap<(String, DocumentId), Grade>,
}

impl Judgments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: &str, doc: DocumentId, grade: Grade) -> Result<()> {
        match self.grades.insert((query.to_string(), doc.clone()), grade) {
            Some(prev) if prev != grade => Err(Error::InvalidInput(format!(
                "conflicting grades for query {query}, document {doc}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn grade(&self, query: &str, doc: &DocumentId) -> Option<Grade> {
        self.grades.get(&(query.to_string(), doc.clone())).copied()
    }

    /// TSV `queryId\tdocId\tgrade`.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut j = Judgments::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::parse(path, i + 1, msg);
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(bad("expected queryId, docId, grade".into()));
            }
            let grade = f[2]
                .trim()
                .parse::<u8>()
                .ok()
                .and_then(Grade::from_u8)
                .ok_or_else(|| bad(format!("grade must be 0, 1 or 2, got {:?}", f[2])))?;
            let doc = DocumentId::new(f[1]).map_err(|e| bad(e.to_string()))?;
            j.insert(f[0], doc, grade).map_err(|e| bad(e.to_string()))?;
        }
        Ok(j)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}

/// (Σ r_i) / 10 with r_i = 1/i for relevant, 1/(2i) for partially relevant.
pub fn tsap_at_10(ranked: &[DocumentId], judgments: &Judgments, query: &str) -> Result<f64> {
    if ranked.len() > TSAP_CUTOFF {
        return Err(Error::InvalidInput(format!(
            "TSAP@10 takes at most {TSAP_CUTOFF} results, got {}",
            ranked.len()
        )));
    }
    let sum: f64 = ranked
        .iter()
        .enumerate()
        .map(|(i, doc)| {
            let rank = (i + 1) as f64;
            match judgments.grade(query, doc) {
                Some(Grade::Relevant) => 1.0 / rank,
                Some(Grade::Partial) => 1.0 / (2.0 * rank),
                _ => 0.0,
            }
        })
        .sum();
    Ok(sum / TSAP_CUTOFF as f64)
}

/// Clusters with a fixed k instead of the trace estimate.
pub fn static_baseline(index: &CentralIndex, k_fixed: usize) -> Result<ClusterSet> {
    Ok(cluster_index(index, KMode::Fixed(k_fixed))?.clusters)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClusterCoherence {
    pub cluster_id: usize,
    pub coherence: Option<f64>,
    pub embeddable: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryScore {
    pub query_id: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryTime {
    pub query_id: String,
    pub milliseconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationReport {
    pub dataset: String,
    /// Digest of every (token, postings) pair the clusters hold.
    pub corpus_digest: String,
    pub cluster_count: usize,
    pub per_cluster: Vec<ClusterCoherence>,
    /// Mean over clusters with at least two embeddable tokens.
    pub overall: Option<f64>,
    pub skipped_tokens: usize,
    #[serde(default)]
    pub tsap_per_query: Vec<QueryScore>,
    #[serde(default)]
    pub search_times: Vec<QueryTime>,
    #[serde(default)]
    pub full_search_times: Vec<QueryTime>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn corpus_digest(clusters: &ClusterSet) -> String {
    let all: BTreeMap<_, _> = clusters
        .clusters
        .iter()
        .flat_map(|c| c.tokens.iter())
        .collect();
    let mut h = Sha256::new();
    for (t, ps) in all {
        h.update(t.as_bytes());
        h.update([0]);
        for p in ps {
            h.update(p.doc.as_str().as_bytes());
            h.update(p.frequency.to_le_bytes());
        }
        h.update([0xff]);
    }
    hex::encode(h.finalize())
}

fn plaintext_words(cluster: &Cluster) -> (Vec<&str>, usize) {
    let mut undecodable = 0;
    let words = cluster
        .tokens
        .keys()
        .filter_map(|t| {
            let w = IdentityCodec::decode(t);
            if w.is_none() {
                undecodable += 1;
            }
            w
        })
        .collect();
    (words, undecodable)
}

/// Coherence of every cluster of an identity-codec run.
pub fn coherence_report(
    clusters: &ClusterSet,
    table: &EmbeddingTable,
    dataset: &str,
) -> EvaluationReport {
    let mut per_cluster = Vec::with_capacity(clusters.k_used());
    let mut skipped_tokens = 0;
    for c in &clusters.clusters {
        let (words, undecodable) = plaintext_words(c);
        let coh = cluster_coherence(&words, table);
        skipped_tokens += coh.skipped + undecodable;
        per_cluster.push(ClusterCoherence {
            cluster_id: c.id,
            coherence: coh.value,
            embeddable: coh.embeddable,
            skipped: coh.skipped + undecodable,
        });
    }
    let scorable: Vec<f64> = per_cluster.iter().filter_map(|c| c.coherence).collect();
    let overall =
        (!scorable.is_empty()).then(|| scorable.iter().sum::<f64>() / scorable.len() as f64);
    EvaluationReport {
        dataset: dataset.to_string(),
        corpus_digest: corpus_digest(clusters),
        cluster_count: clusters.k_used(),
        per_cluster,
        overall,
        skipped_tokens,
        ..Default::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Comparison {
    pub dataset: String,
    pub dynamic_overall: Option<f64>,
    pub static_overall: Option<f64>,
    pub dynamic_clusters: usize,
    pub static_clusters: usize,
    /// dynamic − static.
    pub delta: Option<f64>,
    /// 100 · (dynamic − static) / static; undefined when static is not scorable or zero.
    pub improvement_percent: Option<f64>,
    /// Set when the dynamic run scored below the static one.
    pub flagged: bool,
}

pub fn compare(dynamic: &EvaluationReport, fixed: &EvaluationReport) -> Result<Comparison> {
    if dynamic.corpus_digest != fixed.corpus_digest {
        return Err(Error::CorpusMismatch(
            dynamic.corpus_digest.clone(),
            fixed.corpus_digest.clone(),
        ));
    }
    let delta = match (dynamic.overall, fixed.overall) {
        (Some(d), Some(s)) => Some(d - s),
        _ => None,
    };
    let improvement_percent = match (delta, fixed.overall) {
        (Some(dl), Some(s)) if s != 0.0 => Some(100.0 * dl / s),
        _ => None,
    };
    Ok(Comparison {
        dataset: dynamic.dataset.clone(),
        dynamic_overall: dynamic.overall,
        static_overall: fixed.overall,
        dynamic_clusters: dynamic.cluster_count,
        static_clusters: fixed.cluster_count,
        delta,
        improvement_percent,
        flagged: delta.is_some_and(|d| d < 0.0),
    })
}

/// `queryId\tquery text` lines.
pub fn parse_queries(text: &str, path: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split_once('\t')
                .map(|(id, q)| (id.to_string(), q.to_string()))
                .ok_or_else(|| Error::parse(path, i + 1, "expected queryId<TAB>query"))
        })
        .collect()
}

/// Ranked results per query from `queryId\trank\tdocId[\tscore]` lines.
pub fn parse_results(text: &str, path: &str) -> Result<BTreeMap<String, Vec<DocumentId>>> {
    let mut by_query: BTreeMap<String, Vec<(usize, DocumentId)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::parse(path, i + 1, msg);
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 3 {
            return Err(bad("expected queryId, rank, docId".into()));
        }
        let rank = f[1]
            .parse::<usize>()
            .map_err(|_| bad(format!("bad rank {:?}", f[1])))?;
        let doc = DocumentId::new(f[2]).map_err(|e| bad(e.to_string()))?;
        by_query
            .entry(f[0].to_string())
            .or_default()
            .push((rank, doc));
    }
    Ok(by_query
        .into_iter()
        .map(|(q, mut v)| {
            v.sort_by_key(|(r, _)| *r);
            (q, v.into_iter().map(|(_, d)| d).collect())
        })
        .collect())
}

/// Best-of-`trials` mean wall time of `reps` runs of `f`, on the monotonic clock.
pub fn time_min<T>(trials: usize, reps: usize, mut f: impl FnMut() -> T) -> Duration {
    let reps = reps.max(1);
    (0..trials.max(1))
        .map(|_| {
            let start = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(f());
            }
            start.elapsed() / reps as u32
        })
        .min()
        .expect("at least one trial")
}

/// Like [`time_min`] for two computations, with their trials interleaved so
/// both see the same machine conditions.
pub fn time_min_pair<A, B>(
    trials: usize,
    reps: usize,
    mut f: impl FnMut() -> A,
    mut g: impl FnMut() -> B,
) -> (Duration, Duration) {
    let (mut best_f, mut best_g) = (Duration::MAX, Duration::MAX);
    for _ in 0..trials.max(1) {
        best_f = best_f.min(time_min(1, reps, &mut f));
        best_g = best_g.min(time_min(1, reps, &mut g));
    }
    (best_f, best_g)
}

#[derive(Clone, Debug)]
pub struct QueryRun {
    pub query_id: String,
    pub pruned: SearchResult,
    pub full: SearchResult,
    pub pruned_time: Duration,
    pub full_time: Duration,
}

#[derive(Clone, Copy, Debug)]
pub struct BenchSettings {
    pub prune_width: usize,
    pub cutoff: usize,
    pub trials: usize,
    pub reps: usize,
}

impl Default for BenchSettings {
    fn default() -> Self {
        BenchSettings {
            prune_width: crate::search::DEFAULT_PRUNE_WIDTH,
            cutoff: TSAP_CUTOFF,
            trials: 7,
            reps: 200,
        }
    }
}

/// Runs every query pruned and unpruned and times both searches. When
/// pruning falls back to every cluster the two searches are the same
/// computation and share one measurement.
pub fn run_queries(
    queries: &[(String, String)],
    cipher: &dyn TokenCipher,
    clusters: &ClusterSet,
    abstracts: &[Abstract],
    settings: BenchSettings,
) -> Result<Vec<QueryRun>> {
    let everything = all_cluster_ids(clusters);
    queries
        .iter()
        .map(|(id, text)| {
            let tokens = cipher.encrypt_query(text);
            let selected = prune(&tokens, abstracts, settings.prune_width)?;
            let full = search(&tokens, clusters, &everything, settings.cutoff)?;
            let pruned = search(&tokens, clusters, &selected, settings.cutoff)?;
            let mut sorted = selected.clone();
            sorted.sort_unstable();
            let (full_time, pruned_time) = if sorted == everything {
                let t = time_min(settings.trials, settings.reps, || {
                    search(&tokens, clusters, &everything, settings.cutoff)
                });
                (t, t)
            } else {
                time_min_pair(
                    settings.trials,
                    settings.reps,
                    || search(&tokens, clusters, &everything, settings.cutoff),
                    || search(&tokens, clusters, &selected, settings.cutoff),
                )
            };
            Ok(QueryRun {
                query_id: id.clone(),
                pruned,
                full,
                pruned_time,
                full_time,
            })
        })
        .collect()
}

/// Adds TSAP@10 and timings of `runs` to `report`.
pub fn record_runs(
    report: &mut EvaluationReport,
    runs: &[QueryRun],
    judgments: Option<&Judgments>,
) -> Result<()> {
    for run in runs {
        if let Some(j) = judgments {
            let docs: Vec<DocumentId> = run.pruned.docs().into_iter().take(TSAP_CUTOFF).collect();
            report.tsap_per_query.push(QueryScore {
                query_id: run.query_id.clone(),
                score: tsap_at_10(&docs, j, &run.query_id)?,
            });
        }
        report.search_times.push(QueryTime {
            query_id: run.query_id.clone(),
            milliseconds: run.pruned_time.as_secs_f64() * 1e3,
        });
        report.full_search_times.push(QueryTime {
            query_id: run.query_id.clone(),
            milliseconds: run.full_time.as_secs_f64() * 1e3,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::index::tests::{doc, worked_example};

    fn table(rows: &[(&str, &[f64])]) -> EmbeddingTable {
        let text: String = rows
            .iter()
            .map(|(w, v)| {
                let nums: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("{w} {}\n", nums.join(" "))
            })
            .collect();
        EmbeddingTable::parse(&text, "emb").unwrap()
    }

    #[test]
    fn coherence_examples() {
        let t = table(&[("u", &[1.0, 0.0]), ("v", &[0.0, 1.0])]);
        assert_eq!(cluster_coherence(&["u", "u"], &t).value, Some(1.0));
        assert_eq!(cluster_coherence(&["u", "v"], &t).value, Some(0.0));
        let solo = cluster_coherence(&["u", "missing"], &t);
        assert_eq!((solo.value, solo.embeddable, solo.skipped), (None, 1, 1));
    }

    #[test]
    fn coherence_is_mean_of_pairs() {
        // unit vectors in 3-d with pairwise dot products 0.2, 0.4, 0.6
        // built via Cholesky of the Gram matrix [[1,.2,.4],[.2,1,.6],[.4,.6,1]]
        let a = [1.0, 0.0, 0.0];
        let b = [0.2, (1.0f64 - 0.04).sqrt(), 0.0];
        let c1: f64 = 0.4;
        let c2 = (0.6 - 0.2 * c1) / b[1];
        let c = [c1, c2, (1.0 - c1 * c1 - c2 * c2).sqrt()];
        let t = table(&[("x", &a), ("y", &b), ("z", &c)]);
        let got = cluster_coherence(&["x", "y", "z"], &t).value.unwrap();
        assert!((got - 0.4).abs() < 1e-12, "{got}");
    }

    #[test]
    fn table_loading() {
        let t = EmbeddingTable::parse("2 3\nNet 1 0 0\nweb 0 1 0\n", "e").unwrap();
        assert_eq!(t.dimension(), 3);
        assert!(t.get("net").is_some());
        assert!(matches!(
            EmbeddingTable::parse("a 1 2\nb 1 2 3\n", "e"),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(EmbeddingTable::parse("", "e").is_err());
        assert!(EmbeddingTable::parse("a 1 x\n", "e").is_err());
    }

    fn judged(grades: &[u8]) -> (Vec<DocumentId>, Judgments) {
        let mut j = Judgments::new();
        let docs: Vec<DocumentId> = (0..grades.len()).map(|i| doc(&format!("d{i}"))).collect();
        for (d, g) in docs.iter().zip(grades) {
            j.insert("q", d.clone(), Grade::from_u8(*g).unwrap())
                .unwrap();
        }
        (docs, j)
    }

    #[test]
    fn tsap_examples() {
        let (docs, j) = judged(&[0; 10]);
        assert_eq!(tsap_at_10(&docs, &j, "q").unwrap(), 0.0);
        let (docs, j) = judged(&[2, 0, 0]);
        assert_eq!(tsap_at_10(&docs, &j, "q").unwrap(), 0.1);
        let (docs, j) = judged(&[2; 10]);
        let h10: f64 = (1..=10).map(|i| 1.0 / i as f64).sum();
        assert_eq!(tsap_at_10(&docs, &j, "q").unwrap(), h10 / 10.0);
        assert!((h10 / 10.0 - 0.2929).abs() < 1e-4);
        let (docs, j) = judged(&[1]);
        assert_eq!(tsap_at_10(&docs, &j, "q").unwrap(), 0.05);
        // unjudged results count as irrelevant
        assert_eq!(tsap_at_10(&[doc("zz")], &j, "q").unwrap(), 0.0);
        let (docs, j) = judged(&[2; 11]);
        assert!(tsap_at_10(&docs, &j, "q").is_err());
    }

    #[test]
    fn tsap_upgrades_never_decrease() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let n = rng.random_range(0..=10);
            let mut grades: Vec<u8> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let (docs, j) = judged(&grades);
            let before = tsap_at_10(&docs, &j, "q").unwrap();
            if n > 0 {
                let i = rng.random_range(0..n);
                grades[i] = (grades[i] + rng.random_range(0..3)).min(2);
            }
            let (docs, j) = judged(&grades);
            assert!(tsap_at_10(&docs, &j, "q").unwrap() >= before);
        }
    }

    #[test]
    fn judgments_file() {
        let j = Judgments::parse("q1\td1\t2\nq1\td2\t1\n", "j").unwrap();
        assert_eq!(j.grade("q1", &doc("d1")), Some(Grade::Relevant));
        assert_eq!(j.grade("q2", &doc("d1")), None);
        assert!(Judgments::parse("q1\td1\t3\n", "j").is_err());
        assert!(Judgments::parse("q1\td1\t2\nq1\td1\t0\n", "j").is_err());
    }

    #[test]
    fn compare_cases() {
        let base = EvaluationReport {
            corpus_digest: "x".into(),
            overall: Some(0.2),
            ..Default::default()
        };
        let same = compare(&base, &base).unwrap();
        assert_eq!(same.improvement_percent, Some(0.0));
        assert!(!same.flagged);

        let better = EvaluationReport {
            overall: Some(0.32),
            ..base.clone()
        };
        let c = compare(&better, &base).unwrap();
        assert!((c.improvement_percent.unwrap() - 60.0).abs() < 1e-9);

        let unscorable = EvaluationReport {
            overall: None,
            ..base.clone()
        };
        let c = compare(&better, &unscorable).unwrap();
        assert_eq!((c.improvement_percent, c.delta), (None, None));

        let worse = EvaluationReport {
            overall: Some(0.1),
            ..base.clone()
        };
        assert!(compare(&worse, &base).unwrap().flagged);

        let other = EvaluationReport {
            corpus_digest: "y".into(),
            ..base.clone()
        };
        assert!(matches!(
            compare(&base, &other),
            Err(Error::CorpusMismatch(..))
        ));
    }

    #[test]
    fn static_baseline_cardinality() {
        let idx = worked_example();
        assert_eq!(static_baseline(&idx, 1).unwrap().k_used(), 1);
        assert_eq!(static_baseline(&idx, 1).unwrap().token_count(), 5);
        assert!(static_baseline(&idx, 0).is_err());
    }

    #[test]
    fn duplicated_cluster_has_identical_coherence() {
        let t = table(&[("a", &[1.0, 0.2]), ("b", &[0.3, 1.0]), ("c", &[-1.0, 0.5])]);
        let words = ["a", "b", "c"];
        let x = cluster_coherence(&words, &t).value.unwrap();
        assert_eq!(cluster_coherence(&words, &t).value.unwrap(), x);
        assert!((-1.0..=1.0).contains(&x));
    }

    #[test]
    fn results_and_queries_files() {
        let r = parse_results("q1\t2\td5\t3\nq1\t1\td2\t9\nq2\t1\td1\n", "r").unwrap();
        assert_eq!(r["q1"], vec![doc("d2"), doc("d5")]);
        assert_eq!(r["q2"], vec![doc("d1")]);
        let q = parse_queries("rfc01\tInternet\nrfc02\tFiber Doctor\n", "q").unwrap();
        assert_eq!(q[1], ("rfc02".to_string(), "Fiber Doctor".to_string()));
        assert!(parse_queries("nope\n", "q").is_err());
    }
}
