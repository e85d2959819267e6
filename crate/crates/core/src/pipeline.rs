// SPDX-License-Identifier: Apache-2.0

//! End-to-end orchestration: keywords -> encrypted index -> k estimate ->
//! clusters -> abstracts, with every stage persisted in its file format.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{choose_centers, distribute, ClusterSet};
use crate::crypto::TokenCipher;
use crate::error::{Error, Result};
use crate::index::{
    encrypt_records, extract_keywords, format_index, ingest, parse_keyword_file, trim,
    CentralIndex, DocumentId,
};
use crate::matrix::{KEstimate, MatrixChain};
use crate::search::{
    build_abstracts, format_abstracts, DEFAULT_ABSTRACT_SIZE, DEFAULT_CUTOFF, DEFAULT_PRUNE_WIDTH,
};

pub const CONFIG_ENV: &str = "CLUSTCRYPT_CONFIG";
pub const DEFAULT_KEYWORDS_PER_DOC: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KMode {
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for KMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(KMode::Auto),
            other => match other.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(KMode::Fixed(k)),
                _ => Err(Error::InvalidK(format!(
                    "expected `auto` or a positive integer, got {other:?}"
                ))),
            },
        }
    }
}

impl fmt::Display for KMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KMode::Auto => f.write_str("auto"),
            KMode::Fixed(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClusteringOutcome {
    pub estimate: KEstimate,
    /// k handed to center selection.
    pub k: usize,
    pub clusters: ClusterSet,
}

/// Trim, estimate, select centers over the kept tokens and distribute every
/// token of the index (trimmed ones included).
pub fn cluster_index(index: &CentralIndex, mode: KMode) -> Result<ClusteringOutcome> {
    if let KMode::Fixed(0) = mode {
        return Err(Error::InvalidK("k must be at least 1".into()));
    }
    let trimmed = trim(index)?;
    let chain = MatrixChain::build(&trimmed)?;
    let k = match mode {
        KMode::Auto => chain.estimate.k,
        KMode::Fixed(k) => k,
    };
    let centers = choose_centers(k, &chain.c, index)?;
    let clusters = distribute(index, &centers)?;
    Ok(ClusteringOutcome {
        estimate: chain.estimate,
        k,
        clusters,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodecKind {
    Keyed,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub keywords_per_doc: usize,
    pub abstract_size: usize,
    pub prune_width: usize,
    pub cutoff: usize,
    pub k_mode: KMode,
    pub codec: CodecKind,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            keywords_per_doc: DEFAULT_KEYWORDS_PER_DOC,
            abstract_size: DEFAULT_ABSTRACT_SIZE,
            prune_width: DEFAULT_PRUNE_WIDTH,
            cutoff: DEFAULT_CUTOFF,
            k_mode: KMode::Auto,
            codec: CodecKind::Keyed,
        }
    }
}

fn positive(key: &str, value: &str) -> Result<usize> {
    match value.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(Error::Config(format!(
            "{key} must be a positive integer, got {value:?}"
        ))),
    }
}

impl PipelineConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "keywords_per_doc" => self.keywords_per_doc = positive(key, value)?,
            "abstract_size" => self.abstract_size = positive(key, value)?,
            "prune_width" => self.prune_width = positive(key, value)?,
            "cutoff" => self.cutoff = positive(key, value)?,
            "k" => {
                self.k_mode = value
                    .parse()
                    .map_err(|e: Error| Error::Config(e.to_string()))?
            }
            "codec" => {
                self.codec = match value {
                    "keyed" => CodecKind::Keyed,
                    "identity" => CodecKind::Identity,
                    _ => {
                        return Err(Error::Config(format!(
                            "codec must be keyed or identity, got {value:?}"
                        )))
                    }
                }
            }
            _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Line-oriented `key = value`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Config named by `CLUSTCRYPT_CONFIG`, or the defaults.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => Self::load(Path::new(&p)),
            None => Ok(Self::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PipelineInput {
    /// Directory of plain-text documents named by file name.
    Corpus(PathBuf),
    /// Pre-extracted keyword file.
    Keywords(PathBuf),
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub type PlainRecords = Vec<crate::index::PlainRecord>;

/// Reads the input and returns plaintext keyword lists plus an input digest.
pub fn load_keywords(
    input: &PipelineInput,
    n: usize,
    stopwords: &HashSet<String>,
) -> Result<(PlainRecords, String)> {
    match input {
        PipelineInput::Keywords(path) => {
            let bytes = std::fs::read(path)?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::parse(&path.display().to_string(), 0, "not UTF-8"))?;
            let records = parse_keyword_file(&text, &path.display().to_string())?;
            Ok((records, sha256_hex(&bytes)))
        }
        PipelineInput::Corpus(dir) => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            files.retain(|p| p.is_file());
            files.sort();
            let mut hasher = Sha256::new();
            let mut records = Vec::with_capacity(files.len());
            for path in files {
                let name = path
                    .file_name()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| {
                        Error::InvalidInput(format!("unusable file name {}", path.display()))
                    })?
                    .to_string();
                let bytes = std::fs::read(&path)?;
                hasher.update(name.as_bytes());
                hasher.update([0]);
                hasher.update((bytes.len() as u64).to_le_bytes());
                hasher.update(&bytes);
                let text = String::from_utf8_lossy(&bytes);
                records.push((
                    DocumentId::new(name)?,
                    extract_keywords(&text, n, stopwords)?,
                ));
            }
            Ok((records, hex::encode(hasher.finalize())))
        }
    }
}

pub fn build_index(
    input: &PipelineInput,
    n: usize,
    stopwords: &HashSet<String>,
    cipher: &dyn TokenCipher,
) -> Result<(CentralIndex, String)> {
    let (plain, digest) = load_keywords(input, n, stopwords)?;
    Ok((ingest(encrypt_records(cipher, plain)?)?, digest))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KReport {
    pub m: usize,
    pub trace: f64,
    pub k: usize,
}

impl From<KEstimate> for KReport {
    fn from(e: KEstimate) -> Self {
        KReport {
            m: e.m,
            trace: e.trace,
            k: e.k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestConfig {
    pub keywords_per_doc: usize,
    pub abstract_size: usize,
    pub prune_width: usize,
    pub cutoff: usize,
    pub k_mode: String,
    pub codec: CodecKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub config: ManifestConfig,
    pub input_kind: String,
    pub input_digest: String,
    pub estimate: KReport,
    pub k_used: usize,
    /// File name -> SHA-256 of its bytes.
    pub artifacts: BTreeMap<String, String>,
}

pub const INDEX_FILE: &str = "index.tsv";
pub const K_REPORT_FILE: &str = "k_report.json";
pub const CLUSTERS_FILE: &str = "clusters.jsonl";
pub const ABSTRACTS_FILE: &str = "abstracts.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Runs every stage and writes index, k report, clusters, abstracts and a
/// manifest into `out_dir`. Written artifacts are re-read and validated
/// before the manifest is produced.
pub fn run_pipeline(
    config: &PipelineConfig,
    input: &PipelineInput,
    stopwords: &HashSet<String>,
    cipher: &dyn TokenCipher,
    out_dir: &Path,
) -> Result<Manifest> {
    let (index, input_digest) = build_index(input, config.keywords_per_doc, stopwords, cipher)?;
    let outcome = cluster_index(&index, config.k_mode)?;
    let abstracts = build_abstracts(&outcome.clusters, config.abstract_size)?;

    std::fs::create_dir_all(out_dir)?;
    let contents = [
        (INDEX_FILE, format_index(&index)),
        (
            K_REPORT_FILE,
            to_pretty_json(&KReport::from(outcome.estimate)),
        ),
        (CLUSTERS_FILE, outcome.clusters.to_jsonl()),
        (ABSTRACTS_FILE, format_abstracts(&abstracts)),
    ];
    let mut artifacts = BTreeMap::new();
    for (name, body) in &contents {
        std::fs::write(out_dir.join(name), body)?;
        artifacts.insert(name.to_string(), sha256_hex(body.as_bytes()));
    }
    validate_artifacts(out_dir, &index, &outcome.clusters)?;

    let manifest = Manifest {
        config: ManifestConfig {
            keywords_per_doc: config.keywords_per_doc,
            abstract_size: config.abstract_size,
            prune_width: config.prune_width,
            cutoff: config.cutoff,
            k_mode: config.k_mode.to_string(),
            codec: config.codec,
        },
        input_kind: match input {
            PipelineInput::Corpus(_) => "corpus".into(),
            PipelineInput::Keywords(_) => "keywords".into(),
        },
        input_digest,
        estimate: outcome.estimate.into(),
        k_used: outcome.clusters.k_used(),
        artifacts,
    };
    std::fs::write(out_dir.join(MANIFEST_FILE), to_pretty_json(&manifest))?;
    Ok(manifest)
}

fn validate_artifacts(dir: &Path, index: &CentralIndex, clusters: &ClusterSet) -> Result<()> {
    let reread = crate::index::read_index(&dir.join(INDEX_FILE))?;
    if &reread != index {
        return Err(Error::InvalidInput(
            "index file does not reproduce the index".into(),
        ));
    }
    let reread = ClusterSet::read(&dir.join(CLUSTERS_FILE))?;
    if reread.token_count() != index.token_count() || &reread != clusters {
        return Err(Error::InvalidInput(
            "clusters file does not partition the index".into(),
        ));
    }
    crate::search::read_abstracts(&dir.join(ABSTRACTS_FILE))?;
    Ok(())
}
