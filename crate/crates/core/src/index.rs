// SPDX-License-Identifier: Apache-2.0

//! The central index: encrypted token to posting list, plus ingestion,
//! keyword extraction and the mean-document-count trim.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::crypto::{CipherToken, TokenCipher};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocumentId(String);

impl DocumentId {
    /// Ids must be non-empty and free of tabs, newlines and commas, which
    /// delimit the on-disk formats.
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidInput("empty document id".into()));
        }
        if id.contains(['\t', '\n', '\r', ',']) {
            return Err(Error::InvalidInput(format!(
                "document id {id:?} contains a delimiter character"
            )));
        }
        Ok(DocumentId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Posting {
    pub doc: DocumentId,
    pub frequency: u32,
}

/// Token to postings. Tokens iterate in ciphertext byte order and each
/// posting list is sorted by document id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CentralIndex {
    entries: BTreeMap<CipherToken, Vec<Posting>>,
    docs: Vec<DocumentId>,
}

pub type Record = (DocumentId, Vec<(CipherToken, u32)>);

/// Builds an index from per-document token lists. Repeating a (token, doc)
/// pair is allowed only with the same frequency.
pub fn ingest(records: impl IntoIterator<Item = Record>) -> Result<CentralIndex> {
    let mut entries: BTreeMap<CipherToken, BTreeMap<DocumentId, u32>> = BTreeMap::new();
    let mut docs = BTreeSet::new();
    for (doc, tokens) in records {
        for (token, frequency) in tokens {
            if frequency == 0 {
                return Err(Error::InvalidInput(format!(
                    "zero frequency for token {token} in document {doc}"
                )));
            }
            let slot = entries.entry(token.clone()).or_default();
            match slot.get(&doc) {
                Some(&prev) if prev != frequency => {
                    return Err(Error::ConflictingPosting {
                        token: token.to_base64(),
                        doc: doc.to_string(),
                        first: prev,
                        second: frequency,
                    });
                }
                Some(_) => {}
                None => {
                    slot.insert(doc.clone(), frequency);
                }
            }
        }
        docs.insert(doc);
    }
    let entries = entries
        .into_iter()
        .map(|(t, ps)| {
            let postings = ps
                .into_iter()
                .map(|(doc, frequency)| Posting { doc, frequency })
                .collect();
            (t, postings)
        })
        .collect();
    Ok(CentralIndex {
        entries,
        docs: docs.into_iter().collect(),
    })
}

impl CentralIndex {
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn token_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn docs(&self) -> &[DocumentId] {
        &self.docs
    }

    pub fn tokens(&self) -> impl ExactSizeIterator<Item = &CipherToken> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&CipherToken, &[Posting])> {
        self.entries.iter().map(|(t, p)| (t, p.as_slice()))
    }

    pub fn contains(&self, token: &CipherToken) -> bool {
        self.entries.contains_key(token)
    }

    pub fn postings(&self, token: &CipherToken) -> Result<&[Posting]> {
        self.entries
            .get(token)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::TokenNotFound(token.to_base64()))
    }

    /// f(t, d); zero when the token does not occur in the document.
    pub fn frequency(&self, token: &CipherToken, doc: &DocumentId) -> u32 {
        self.entries
            .get(token)
            .and_then(|ps| {
                ps.binary_search_by(|p| p.doc.cmp(doc))
                    .ok()
                    .map(|i| ps[i].frequency)
            })
            .unwrap_or(0)
    }

    pub fn total_frequency(&self, token: &CipherToken) -> Result<u64> {
        Ok(self
            .postings(token)?
            .iter()
            .map(|p| u64::from(p.frequency))
            .sum())
    }

    /// Number of documents containing `token`.
    pub fn doc_cooccurrence(&self, token: &CipherToken) -> Result<usize> {
        self.postings(token).map(<[Posting]>::len)
    }

    /// Every stored (token, doc, frequency) triple in index order.
    pub fn triples(&self) -> impl Iterator<Item = (&CipherToken, &DocumentId, u32)> {
        self.entries
            .iter()
            .flat_map(|(t, ps)| ps.iter().map(move |p| (t, &p.doc, p.frequency)))
    }

    /// Same postings, restricted to `keep`, over the same document set.
    fn restricted(&self, keep: impl Fn(&CipherToken) -> bool) -> CentralIndex {
        CentralIndex {
            entries: self
                .entries
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, p)| (t.clone(), p.clone()))
                .collect(),
            docs: self.docs.clone(),
        }
    }
}

/// Tokens whose document count reaches the corpus mean, and the rest.
#[derive(Clone, Debug)]
pub struct TrimmedIndex {
    pub kept: CentralIndex,
    pub excluded: Vec<CipherToken>,
    pub mean_doc_cooccurrence: f64,
}

impl TrimmedIndex {
    /// Keeps every token. Used when the matrices should cover the whole index.
    pub fn untrimmed(index: &CentralIndex) -> Result<Self> {
        if index.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let total: usize = index.iter().map(|(_, p)| p.len()).sum();
        Ok(TrimmedIndex {
            kept: index.clone(),
            excluded: Vec::new(),
            mean_doc_cooccurrence: total as f64 / index.token_count() as f64,
        })
    }
}

pub fn trim(index: &CentralIndex) -> Result<TrimmedIndex> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let m = index.token_count();
    let total: usize = index.iter().map(|(_, p)| p.len()).sum();
    // count >= total / m, compared in integers
    let passes = |len: usize| len * m >= total;
    let excluded = index
        .iter()
        .filter(|(_, p)| !passes(p.len()))
        .map(|(t, _)| t.clone())
        .collect();
    let kept = index.restricted(|t| passes(index.entries[t].len()));
    Ok(TrimmedIndex {
        kept,
        excluded,
        mean_doc_cooccurrence: total as f64 / m as f64,
    })
}

pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "may",
    "me",
    "more",
    "most",
    "must",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "one",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

pub fn default_stopwords() -> HashSet<String> {
    DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect()
}

/// Top-`n` non-stopword terms by in-document frequency, ties broken
/// lexicographically. Terms are maximal alphanumeric runs, lowercased.
pub fn extract_keywords(
    text: &str,
    n: usize,
    stopwords: &HashSet<String>,
) -> Result<Vec<(String, u32)>> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "keywords per document must be >= 1".into(),
        ));
    }
    let mut counts: HashMap<String, u32> = HashMap::new();
    for raw in text.split(|c: char| !c.is_alphanumeric()) {
        if raw.is_empty() {
            continue;
        }
        let term = raw.to_lowercase();
        if stopwords.contains(&term) {
            continue;
        }
        *counts.entry(term).or_default() += 1;
    }
    let mut ranked: Vec<(String, u32)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n);
    Ok(ranked)
}

/// Encrypts plaintext keyword lists into index records.
pub fn encrypt_records(
    cipher: &dyn TokenCipher,
    plain: Vec<(DocumentId, Vec<(String, u32)>)>,
) -> Result<Vec<Record>> {
    plain
        .into_iter()
        .map(|(doc, terms)| {
            let tokens = terms
                .into_iter()
                .map(|(w, f)| Ok((cipher.encrypt_token(&w)?, f)))
                .collect::<Result<Vec<_>>>()?;
            Ok((doc, tokens))
        })
        .collect()
}

fn split_pair<'a>(item: &'a str, path: &str, line: usize) -> Result<(&'a str, u32)> {
    let (key, freq) = item
        .rsplit_once(':')
        .ok_or_else(|| Error::parse(path, line, format!("expected <name>:<freq>, got {item:?}")))?;
    let freq = freq
        .parse::<u32>()
        .map_err(|_| Error::parse(path, line, format!("bad frequency in {item:?}")))?;
    if key.is_empty() {
        return Err(Error::parse(path, line, format!("empty name in {item:?}")));
    }
    Ok((key, freq))
}

/// Writes the index TSV: `<b64 token>\t<doc>:<freq>,...`, one line per token.
pub fn write_index(index: &CentralIndex, mut out: impl Write) -> Result<()> {
    for (token, postings) in index.iter() {
        let list: Vec<String> = postings
            .iter()
            .map(|p| format!("{}:{}", p.doc, p.frequency))
            .collect();
        writeln!(out, "{}\t{}", token.to_base64(), list.join(","))?;
    }
    Ok(())
}

pub fn format_index(index: &CentralIndex) -> String {
    let mut buf = Vec::new();
    write_index(index, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("index output is UTF-8")
}

pub fn parse_index(text: &str, path: &str) -> Result<CentralIndex> {
    let mut records: Vec<Record> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let (tok, list) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "missing tab separator"))?;
        let token =
            CipherToken::from_base64(tok).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        for item in list.split(',') {
            let (doc, freq) = split_pair(item, path, lineno)?;
            let doc =
                DocumentId::new(doc).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
            records.push((doc, vec![(token.clone(), freq)]));
        }
    }
    ingest(records).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::parse(path, 0, msg),
        other => other,
    })
}

pub fn read_index(path: &Path) -> Result<CentralIndex> {
    let text = std::fs::read_to_string(path)?;
    parse_index(&text, &path.display().to_string())
}

/// A document with its plaintext keywords and frequencies.
pub type PlainRecord = (DocumentId, Vec<(String, u32)>);

/// Pre-extracted keyword file: `<doc>\t<term>:<freq>,...` per document.
pub fn parse_keyword_file(text: &str, path: &str) -> Result<Vec<PlainRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (doc, list) = line.split_once('\t').unwrap_or((line, ""));
        let doc = DocumentId::new(doc).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if !seen.insert(doc.clone()) {
            return Err(Error::parse(
                path,
                lineno,
                format!("duplicate document id {doc}"),
            ));
        }
        let mut terms = Vec::new();
        for item in list.split(',').filter(|s| !s.is_empty()) {
            let (term, freq) = split_pair(item, path, lineno)?;
            terms.push((term.to_string(), freq));
        }
        out.push((doc, terms));
    }
    Ok(out)
}

pub fn format_keyword_line(doc: &DocumentId, terms: &[(String, u32)]) -> String {
    let list: Vec<String> = terms.iter().map(|(t, f)| format!("{t}:{f}")).collect();
    format!("{doc}\t{}", list.join(","))
}

#[cfg(test)]
pub(crate) mod tests {
    use proptest::prelude::*;

    use super::*;

    pub(crate) fn tok(s: &str) -> CipherToken {
        CipherToken::from_bytes(s.as_bytes())
    }

    pub(crate) fn doc(s: &str) -> DocumentId {
        DocumentId::new(s).unwrap()
    }

    /// Worked-example frequencies, tokens labelled by their hashes.
    pub(crate) fn worked_example() -> CentralIndex {
        let rows: [(&str, [u32; 6]); 5] = [
            ("Uh5W", [30, 0, 23, 4, 40, 0]),
            ("/Vdn", [5, 0, 0, 60, 34, 0]),
            ("oR1r", [0, 23, 0, 30, 0, 0]),
            ("vJHZ", [52, 49, 0, 23, 0, 26]),
            ("tH7c", [0, 45, 68, 0, 3, 5]),
        ];
        let records = (0..6).map(|j| {
            let tokens = rows
                .iter()
                .filter(|(_, f)| f[j] > 0)
                .map(|(t, f)| (tok(t), f[j]))
                .collect();
            (doc(&format!("d{}", j + 1)), tokens)
        });
        ingest(records).unwrap()
    }

    #[test]
    fn extract_ranks_by_frequency() {
        let stop: HashSet<String> = ["a".to_string()].into();
        assert_eq!(
            extract_keywords("a b b c c c", 2, &stop).unwrap(),
            vec![("c".into(), 3), ("b".into(), 2)]
        );
        assert_eq!(
            extract_keywords("x x", 5, &HashSet::new()).unwrap(),
            vec![("x".into(), 2)]
        );
        assert!(extract_keywords("a a a", 3, &stop).unwrap().is_empty());
        assert!(extract_keywords("x", 0, &stop).is_err());
    }

    #[test]
    fn extract_ties_are_lexicographic() {
        let got =
            extract_keywords("Zeta alpha, beta! ALPHA zeta beta", 2, &HashSet::new()).unwrap();
        assert_eq!(got, vec![("alpha".into(), 2), ("beta".into(), 2)]);
    }

    #[test]
    fn ingest_merges_per_token() {
        let t = tok("T");
        let idx = ingest(vec![
            (doc("d1"), vec![(t.clone(), 3)]),
            (doc("d2"), vec![(t.clone(), 5)]),
        ])
        .unwrap();
        assert_eq!(
            idx.postings(&t).unwrap(),
            &[
                Posting {
                    doc: doc("d1"),
                    frequency: 3
                },
                Posting {
                    doc: doc("d2"),
                    frequency: 5
                }
            ]
        );
        assert_eq!(idx.doc_count(), 2);
    }

    #[test]
    fn ingest_empty_and_conflicts() {
        let idx = ingest(Vec::new()).unwrap();
        assert_eq!(idx.doc_count(), 0);
        assert!(matches!(trim(&idx), Err(Error::EmptyIndex)));

        let t = tok("T");
        let err = ingest(vec![(doc("d1"), vec![(t.clone(), 3), (t.clone(), 4)])]).unwrap_err();
        match err {
            Error::ConflictingPosting {
                doc, first, second, ..
            } => {
                assert_eq!((doc.as_str(), first, second), ("d1", 3, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
        // same frequency twice is a harmless duplicate
        assert!(ingest(vec![(doc("d1"), vec![(t.clone(), 3), (t.clone(), 3)])]).is_ok());
        assert!(ingest(vec![(doc("d1"), vec![(t, 0)])]).is_err());
    }

    #[test]
    fn document_id_validation() {
        assert!(DocumentId::new("").is_err());
        assert!(DocumentId::new("a,b").is_err());
        assert!(DocumentId::new("a\tb").is_err());
        assert!(DocumentId::new("rfc:793").is_ok());
    }

    #[test]
    fn worked_example_shape() {
        let idx = worked_example();
        assert_eq!(idx.token_count(), 5);
        assert_eq!(idx.doc_count(), 6);
        let ps: Vec<(String, u32)> = idx
            .postings(&tok("Uh5W"))
            .unwrap()
            .iter()
            .map(|p| (p.doc.to_string(), p.frequency))
            .collect();
        assert_eq!(
            ps,
            vec![
                ("d1".into(), 30),
                ("d3".into(), 23),
                ("d4".into(), 4),
                ("d5".into(), 40)
            ]
        );
        assert_eq!(idx.doc_cooccurrence(&tok("Uh5W")).unwrap(), 4);
        assert_eq!(idx.doc_cooccurrence(&tok("oR1r")).unwrap(), 2);
        assert!(matches!(
            idx.doc_cooccurrence(&tok("nope")),
            Err(Error::TokenNotFound(_))
        ));
        assert_eq!(idx.frequency(&tok("tH7c"), &doc("d3")), 68);
        assert_eq!(idx.frequency(&tok("tH7c"), &doc("d1")), 0);
    }

    #[test]
    fn trim_worked_example() {
        let t = trim(&worked_example()).unwrap();
        assert!((t.mean_doc_cooccurrence - 3.4).abs() < 1e-12);
        let kept: Vec<CipherToken> = t.kept.tokens().cloned().collect();
        let mut want = vec![tok("Uh5W"), tok("vJHZ"), tok("tH7c")];
        want.sort();
        assert_eq!(kept, want);
        let mut excl = t.excluded.clone();
        excl.sort();
        assert_eq!(excl, vec![tok("/Vdn"), tok("oR1r")]);
        assert_eq!(t.kept.doc_count(), 6);
    }

    #[test]
    fn trim_equal_counts_and_single_token() {
        let idx = ingest(vec![
            (doc("d1"), vec![(tok("a"), 1), (tok("b"), 2)]),
            (doc("d2"), vec![(tok("a"), 1), (tok("b"), 2)]),
        ])
        .unwrap();
        assert_eq!(trim(&idx).unwrap().kept.token_count(), 2);
        let one = ingest(vec![(doc("d1"), vec![(tok("a"), 7)])]).unwrap();
        let t = trim(&one).unwrap();
        assert_eq!(t.kept.token_count(), 1);
        assert!(t.excluded.is_empty());
    }

    #[test]
    fn index_file_round_trip() {
        let idx = worked_example();
        let text = format_index(&idx);
        let first = text.lines().next().unwrap();
        // "/Vdn" sorts first by bytes
        assert_eq!(
            first,
            format!("{}\td1:5,d4:60,d5:34", tok("/Vdn").to_base64())
        );
        assert_eq!(parse_index(&text, "mem").unwrap(), idx);
    }

    #[test]
    fn index_file_errors_name_the_line() {
        let err = parse_index("dG9r\td1:x\n", "idx.tsv").unwrap_err();
        assert!(err.to_string().starts_with("idx.tsv:1:"), "{err}");
        assert!(parse_index("no-tab-here\n", "idx.tsv").is_err());
    }

    #[test]
    fn keyword_file_parsing() {
        let text = "d1\tnet:3,traffic:1\nd2\t\n";
        let recs = parse_keyword_file(text, "kw").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(
            recs[0].1,
            vec![("net".to_string(), 3), ("traffic".to_string(), 1)]
        );
        assert!(recs[1].1.is_empty());
        assert_eq!(
            format_keyword_line(&recs[0].0, &recs[0].1),
            "d1\tnet:3,traffic:1"
        );
        assert!(parse_keyword_file("d1\ta:1\nd1\tb:2\n", "kw").is_err());
    }

    fn arb_records() -> impl Strategy<Value = Vec<(u8, Vec<(u8, u32)>)>> {
        prop::collection::vec(
            (0u8..20, prop::collection::vec((0u8..30, 1u32..100), 0..10)),
            0..15,
        )
    }

    proptest! {
        #[test]
        fn ingest_reproduces_input_triples(raw in arb_records()) {
            // first frequency wins per (doc, token) so the input is conflict-free
            let mut expected: BTreeMap<(CipherToken, DocumentId), u32> = BTreeMap::new();
            let mut by_doc: BTreeMap<u8, Vec<(CipherToken, u32)>> = BTreeMap::new();
            for (d, toks) in &raw {
                for (t, f) in toks {
                    let key = (tok(&format!("t{t}")), doc(&format!("d{d}")));
                    if let std::collections::btree_map::Entry::Vacant(e) = expected.entry(key.clone()) {
                        e.insert(*f);
                        by_doc.entry(*d).or_default().push((key.0, *f));
                    }
                }
            }
            let records: Vec<Record> = by_doc
                .into_iter()
                .map(|(d, ts)| (doc(&format!("d{d}")), ts))
                .collect();
            let idx = ingest(records).unwrap();
            let got: BTreeMap<(CipherToken, DocumentId), u32> = idx
                .triples()
                .map(|(t, d, f)| ((t.clone(), d.clone()), f))
                .collect();
            prop_assert_eq!(got, expected);
            prop_assert_eq!(parse_index(&format_index(&idx), "mem").unwrap(), idx.clone());
            if !idx.is_empty() {
                let t = trim(&idx).unwrap();
                prop_assert_eq!(t.kept.token_count() + t.excluded.len(), idx.token_count());
                prop_assert!(t.kept.token_count() >= 1);
                for (_, ps) in t.kept.iter() {
                    prop_assert!(ps.len() as f64 >= t.mean_doc_cooccurrence - 1e-12);
                }
            }
        }

        #[test]
        fn extraction_is_bounded_and_ranked(words in prop::collection::vec("[a-e]{1,2}", 0..60), n in 1usize..8) {
            let text = words.join(" ");
            let got = extract_keywords(&text, n, &HashSet::new()).unwrap();
            prop_assert!(got.len() <= n);
            prop_assert!(got.windows(2).all(|w| w[0].1 >= w[1].1));
        }
    }
}
