// SPDX-License-Identifier: Apache-2.0

//! Token/document matrices and the trace-based cluster-count estimate.
//!
//! The chain is A (raw frequencies) -> N (column-max normalized) -> R (N
//! row-normalized, token -> document) and S (N column-normalized and laid
//! out document -> token) -> C = R * S (token -> token). The number of
//! clusters is the ceiling of trace(C).
//!
//! Every reduction that feeds the estimate (row sums, column sums, the
//! diagonal of C and its trace) sums its terms in ascending order, so the
//! result does not depend on how documents or tokens happen to be labelled.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::crypto::CipherToken;
use crate::error::{Error, Result};
use crate::index::{DocumentId, TrimmedIndex};

/// Absolute tolerance used when rounding the trace up to an integer.
pub const TRACE_TOLERANCE: f64 = 1e-9;

/// Sum that is independent of the order of `terms`.
pub(crate) fn ordered_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// Compressed sparse rows. Column indices within a row are strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl Csr {
    fn from_rows(ncols: usize, rows: Vec<(Vec<u32>, Vec<f64>)>) -> Self {
        let nrows = rows.len();
        let nnz = rows.iter().map(|r| r.0.len()).sum();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for (c, v) in rows {
            col_idx.extend(c);
            values.extend(v);
            row_ptr.push(col_idx.len());
        }
        Csr {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c as usize] = v;
            }
        }
        out
    }

    fn map_values(&self, f: impl Fn(usize, u32, f64) -> f64) -> Csr {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[p] = f(i, self.col_idx[p], self.values[p]);
            }
        }
        out
    }

    fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c as usize + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = &mut next[c as usize];
                col_idx[*slot] = i as u32;
                values[*slot] = v;
                *slot += 1;
            }
        }
        Csr {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Each row divided by its sum; rows summing to zero stay zero.
    fn row_normalized(&self) -> Csr {
        let sums: Vec<f64> = (0..self.nrows)
            .map(|i| ordered_sum(&mut self.row(i).1.to_vec()))
            .collect();
        self.map_values(|i, _, v| if sums[i] > 0.0 { v / sums[i] } else { 0.0 })
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixRole {
    RawA,
    NormalizedN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StochasticRole {
    /// R: token -> document.
    TokenToDoc,
    /// S: document -> token.
    DocToToken,
    /// C: token -> token.
    TokenToToken,
}

/// m x d matrix over the kept tokens and all documents of the index.
#[derive(Clone, Debug)]
pub struct TokenDocMatrix {
    role: MatrixRole,
    tokens: Arc<[CipherToken]>,
    docs: Arc<[DocumentId]>,
    data: Csr,
}

impl TokenDocMatrix {
    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn tokens(&self) -> &[CipherToken] {
        &self.tokens
    }

    pub fn docs(&self) -> &[DocumentId] {
        &self.docs
    }

    pub fn data(&self) -> &Csr {
        &self.data
    }

    pub fn token_index(&self, token: &CipherToken) -> Option<usize> {
        self.tokens.binary_search(token).ok()
    }

    pub fn doc_index(&self, doc: &DocumentId) -> Option<usize> {
        self.docs.binary_search(doc).ok()
    }

    pub fn get(&self, token: &CipherToken, doc: &DocumentId) -> Option<f64> {
        Some(
            self.data
                .get(self.token_index(token)?, self.doc_index(doc)?),
        )
    }
}

#[derive(Clone, Debug)]
pub struct StochasticMatrix {
    role: StochasticRole,
    tokens: Arc<[CipherToken]>,
    docs: Arc<[DocumentId]>,
    data: Csr,
}

impl StochasticMatrix {
    pub fn role(&self) -> StochasticRole {
        self.role
    }

    pub fn tokens(&self) -> &[CipherToken] {
        &self.tokens
    }

    pub fn docs(&self) -> &[DocumentId] {
        &self.docs
    }

    pub fn data(&self) -> &Csr {
        &self.data
    }

    pub fn token_index(&self, token: &CipherToken) -> Option<usize> {
        self.tokens.binary_search(token).ok()
    }

    pub fn doc_index(&self, doc: &DocumentId) -> Option<usize> {
        self.docs.binary_search(doc).ok()
    }

    /// Diagonal of a square matrix (the separation factors of C).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.data.nrows.min(self.data.ncols))
            .map(|i| self.data.get(i, i))
            .collect()
    }

    /// c_{t,t} for a token of C.
    pub fn separation(&self, token: &CipherToken) -> Option<f64> {
        debug_assert_eq!(self.role, StochasticRole::TokenToToken);
        let i = self.token_index(token)?;
        Some(self.data.get(i, i))
    }
}

pub fn build_a(trimmed: &TrimmedIndex) -> Result<TokenDocMatrix> {
    let kept = &trimmed.kept;
    if kept.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let docs: Arc<[DocumentId]> = kept.docs().into();
    let tokens: Arc<[CipherToken]> = kept.tokens().cloned().collect();
    let rows = kept
        .iter()
        .map(|(_, postings)| {
            let mut cols = Vec::with_capacity(postings.len());
            let mut vals = Vec::with_capacity(postings.len());
            for p in postings {
                let j = docs
                    .binary_search(&p.doc)
                    .expect("posting documents are part of the index");
                cols.push(j as u32);
                vals.push(f64::from(p.frequency));
            }
            (cols, vals)
        })
        .collect();
    Ok(TokenDocMatrix {
        role: MatrixRole::RawA,
        tokens,
        docs: docs.clone(),
        data: Csr::from_rows(docs.len(), rows),
    })
}

/// Divides every entry by the maximum of its column.
pub fn normalize(a: &TokenDocMatrix) -> Result<TokenDocMatrix> {
    if a.role != MatrixRole::RawA {
        return Err(Error::InvalidInput(
            "normalize expects the raw frequency matrix".into(),
        ));
    }
    let mut col_max = vec![0.0f64; a.data.ncols];
    for (&c, &v) in a.data.col_idx.iter().zip(&a.data.values) {
        let m = &mut col_max[c as usize];
        *m = m.max(v);
    }
    let data = a.data.map_values(|_, c, v| {
        if col_max[c as usize] > 0.0 {
            v / col_max[c as usize]
        } else {
            0.0
        }
    });
    Ok(TokenDocMatrix {
        role: MatrixRole::NormalizedN,
        tokens: a.tokens.clone(),
        docs: a.docs.clone(),
        data,
    })
}

fn require_normalized(n: &TokenDocMatrix) -> Result<()> {
    if n.role != MatrixRole::NormalizedN {
        return Err(Error::InvalidInput("expected the normalized matrix".into()));
    }
    Ok(())
}

/// r_{i,j} = n_{i,j} / sum_k n_{i,k}.
pub fn build_r(n: &TokenDocMatrix) -> Result<StochasticMatrix> {
    require_normalized(n)?;
    Ok(StochasticMatrix {
        role: StochasticRole::TokenToDoc,
        tokens: n.tokens.clone(),
        docs: n.docs.clone(),
        data: n.data.row_normalized(),
    })
}

/// S(d_j, t_i) = n_{i,j} / sum_q n_{q,j}; d x m.
pub fn build_s(n: &TokenDocMatrix) -> Result<StochasticMatrix> {
    require_normalized(n)?;
    Ok(StochasticMatrix {
        role: StochasticRole::DocToToken,
        tokens: n.tokens.clone(),
        docs: n.docs.clone(),
        data: n.data.transpose().row_normalized(),
    })
}

/// C = R * S, computed row by row in parallel.
pub fn build_c(r: &StochasticMatrix, s: &StochasticMatrix) -> Result<StochasticMatrix> {
    if r.role != StochasticRole::TokenToDoc || s.role != StochasticRole::DocToToken {
        return Err(Error::LabelMismatch("build_c expects R then S".into()));
    }
    if r.tokens != s.tokens || r.docs != s.docs {
        return Err(Error::LabelMismatch(
            "R and S were built over different tokens or documents".into(),
        ));
    }
    let m = r.data.nrows;
    let rows: Vec<(Vec<u32>, Vec<f64>)> = (0..m)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; m], vec![false; m], Vec::<u32>::new()),
            |(acc, seen, touched), i| {
                let (docs, weights) = r.data.row(i);
                let mut diag_terms = Vec::with_capacity(docs.len());
                for (&j, &rij) in docs.iter().zip(weights) {
                    let (toks, svals) = s.data.row(j as usize);
                    for (&k, &sjk) in toks.iter().zip(svals) {
                        let ku = k as usize;
                        if !seen[ku] {
                            seen[ku] = true;
                            touched.push(k);
                        }
                        acc[ku] += rij * sjk;
                        if ku == i {
                            diag_terms.push(rij * sjk);
                        }
                    }
                }
                touched.sort_unstable();
                let cols = touched.clone();
                let vals = cols
                    .iter()
                    .map(|&k| {
                        let ku = k as usize;
                        let v = if ku == i {
                            ordered_sum(&mut diag_terms)
                        } else {
                            acc[ku]
                        };
                        acc[ku] = 0.0;
                        seen[ku] = false;
                        v
                    })
                    .collect();
                touched.clear();
                (cols, vals)
            },
        )
        .collect();
    Ok(StochasticMatrix {
        role: StochasticRole::TokenToToken,
        tokens: r.tokens.clone(),
        docs: r.docs.clone(),
        data: Csr::from_rows(m, rows),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KEstimate {
    pub k: usize,
    pub trace: f64,
    pub m: usize,
}

impl KEstimate {
    /// `m=<int> trace=<float> k=<int>`
    pub fn report_line(&self) -> String {
        format!("m={} trace={:.6} k={}", self.m, self.trace, self.k)
    }
}

/// k = ceil(trace(C)), kept within [1, m].
pub fn estimate_k(c: &StochasticMatrix) -> Result<KEstimate> {
    if c.role != StochasticRole::TokenToToken {
        return Err(Error::InvalidInput(
            "estimate_k expects the token-to-token matrix".into(),
        ));
    }
    let m = c.data.nrows;
    let trace = ordered_sum(&mut c.diagonal());
    // floating noise must not push an integral trace up to the next integer
    let k = ((trace - TRACE_TOLERANCE).ceil().max(1.0) as usize).min(m.max(1));
    Ok(KEstimate { k, trace, m })
}

/// Every intermediate of the estimate, kept for inspection and dumping.
#[derive(Clone, Debug)]
pub struct MatrixChain {
    pub a: TokenDocMatrix,
    pub n: TokenDocMatrix,
    pub r: StochasticMatrix,
    pub s: StochasticMatrix,
    pub c: StochasticMatrix,
    pub estimate: KEstimate,
}

impl MatrixChain {
    pub fn build(trimmed: &TrimmedIndex) -> Result<Self> {
        let a = build_a(trimmed)?;
        let n = normalize(&a)?;
        let r = build_r(&n)?;
        let s = build_s(&n)?;
        let c = build_c(&r, &s)?;
        let estimate = estimate_k(&c)?;
        Ok(MatrixChain {
            a,
            n,
            r,
            s,
            c,
            estimate,
        })
    }

    /// Writes A.tsv, N.tsv, R.tsv, S.tsv and C.tsv into `dir`.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let tokens: Vec<String> = self.a.tokens.iter().map(CipherToken::to_base64).collect();
        let docs: Vec<String> = self.a.docs.iter().map(ToString::to_string).collect();
        let files: [(&str, &Csr, &[String], &[String]); 5] = [
            ("A.tsv", &self.a.data, &tokens, &docs),
            ("N.tsv", &self.n.data, &tokens, &docs),
            ("R.tsv", &self.r.data, &tokens, &docs),
            ("S.tsv", &self.s.data, &docs, &tokens),
            ("C.tsv", &self.c.data, &tokens, &tokens),
        ];
        for (name, data, rows, cols) in files {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(name))?);
            f.write_all(format_tsv(data, rows, cols).as_bytes())?;
            f.flush()?;
        }
        Ok(())
    }
}

fn format_tsv(data: &Csr, rows: &[String], cols: &[String]) -> String {
    let mut out = String::new();
    for (i, label) in rows.iter().enumerate() {
        out.push_str(label);
        let (cs, vs) = data.row(i);
        for (&c, &v) in cs.iter().zip(vs) {
            let _ = write!(out, "\t{}:{}", cols[c as usize], v);
        }
        out.push('\n');
    }
    out
}
