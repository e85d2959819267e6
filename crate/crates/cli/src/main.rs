// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use clustcrypt::eval::{
    coherence_report, compare, parse_queries, parse_results, record_runs, run_queries, tsap_at_10,
    BenchSettings, EmbeddingTable, EvaluationReport, Judgments,
};
use clustcrypt::index::{default_stopwords, format_index, read_index};
use clustcrypt::matrix::MatrixChain;
use clustcrypt::pipeline::{build_index, to_pretty_json, CodecKind};
use clustcrypt::search::{
    all_cluster_ids, build_abstracts, format_abstracts, prune, read_abstracts, search,
};
use clustcrypt::{
    cluster_index, run_pipeline, trim, ClusterSet, Codec, Error, KMode, PipelineConfig,
    PipelineInput, Result, SecretKey, TokenCipher,
};

#[derive(Parser)]
#[command(
    name = "clustcrypt",
    version,
    about = "Cluster and search an encrypted keyword index"
)]
struct Cli {
    /// Config file of `key = value` defaults (overrides CLUSTCRYPT_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(multiple = false)]
struct CodecArgs {
    /// Key file: 32 raw bytes or 64 hex characters.
    #[arg(long)]
    key: Option<PathBuf>,
    /// Leave tokens readable (evaluation mode).
    #[arg(long)]
    identity: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Directory of plain-text documents.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Pre-extracted keywords, `<doc>\t<term>:<freq>,...` per line.
    #[arg(long)]
    keywords: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract, encrypt and write the central index.
    BuildIndex {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        codec: CodecArgs,
        /// Keywords kept per document.
        #[arg(long)]
        n: Option<usize>,
        /// Stopword file, one word per line.
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print `m=<int> trace=<float> k=<int>` for an index.
    EstimateK {
        #[arg(long)]
        index: PathBuf,
        /// Write A/N/R/S/C as TSV into this directory.
        #[arg(long)]
        dump_matrices: Option<PathBuf>,
    },
    /// Select centers and distribute tokens.
    Cluster {
        #[arg(long)]
        index: PathBuf,
        /// `auto` or a fixed positive integer.
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build per-cluster abstracts.
    Abstracts {
        #[arg(long)]
        clusters: PathBuf,
        /// Tokens per abstract.
        #[arg(long)]
        a: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one query; prints `rank\tdocId\tscore`.
    Search {
        #[arg(long)]
        query: String,
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        abstracts: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        /// Clusters kept after pruning.
        #[arg(long)]
        c: Option<usize>,
        /// Result cutoff.
        #[arg(long)]
        top: Option<usize>,
        /// Search every cluster.
        #[arg(long)]
        no_prune: bool,
    },
    /// Coherence, relevance and comparison reports.
    Evaluate {
        #[command(subcommand)]
        what: Evaluate,
    },
    /// Run every stage into an output directory.
    Pipeline {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        a: Option<usize>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Evaluate {
    /// Embedding coherence of identity-mode clusters.
    Coherence {
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        /// Label stored in the report.
        #[arg(long, default_value = "corpus")]
        dataset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// TSAP@10 per query from `queryId\trank\tdocId[\tscore]` results.
    Tsap {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        judgments: PathBuf,
    },
    /// Compare a dynamic-k report with a fixed-k report.
    Compare {
        #[arg(long)]
        dynamic: PathBuf,
        #[arg(long = "static")]
        fixed: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run benchmark queries pruned and unpruned, scoring and timing them.
    Bench {
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        abstracts: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long)]
        judgments: Option<PathBuf>,
        /// Existing coherence report to extend.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        c: Option<usize>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => PipelineConfig::from_env(),
    }
}

fn codec(args: &CodecArgs, cfg: &PipelineConfig) -> Result<Codec> {
    match (&args.key, args.identity) {
        (Some(path), _) => Ok(Codec::keyed(SecretKey::load(path)?)),
        (None, true) => Ok(Codec::Identity),
        (None, false) if cfg.codec == CodecKind::Identity => Ok(Codec::Identity),
        (None, false) => Err(Error::Key("pass --key <file> or --identity".into())),
    }
}

fn input(args: &InputArgs) -> PipelineInput {
    match (&args.corpus, &args.keywords) {
        (Some(dir), _) => PipelineInput::Corpus(dir.clone()),
        (None, Some(file)) => PipelineInput::Keywords(file.clone()),
        (None, None) => unreachable!("clap requires one input"),
    }
}

fn stopwords(path: Option<&Path>) -> Result<HashSet<String>> {
    match path {
        None => Ok(default_stopwords()),
        Some(p) => Ok(std::fs::read_to_string(p)?
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect()),
    }
}

fn k_mode(flag: Option<&str>, cfg: &PipelineConfig) -> Result<KMode> {
    flag.map_or(Ok(cfg.k_mode), str::parse)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::BuildIndex {
            input: inp,
            codec: c,
            n,
            stopwords: sw,
            out,
        } => {
            let cipher = codec(&c, &cfg)?;
            let (index, _) = build_index(
                &input(&inp),
                n.unwrap_or(cfg.keywords_per_doc),
                &stopwords(sw.as_deref())?,
                &cipher,
            )?;
            std::fs::write(out, format_index(&index))?;
        }
        Command::EstimateK {
            index,
            dump_matrices,
        } => {
            let index = read_index(&index)?;
            let chain = MatrixChain::build(&trim(&index)?)?;
            if let Some(dir) = dump_matrices {
                chain.dump(&dir)?;
            }
            println!("{}", chain.estimate.report_line());
        }
        Command::Cluster { index, k, out } => {
            let index = read_index(&index)?;
            let outcome = cluster_index(&index, k_mode(k.as_deref(), &cfg)?)?;
            std::fs::write(out, outcome.clusters.to_jsonl())?;
            eprintln!(
                "{} k_used={}",
                outcome.estimate.report_line(),
                outcome.clusters.k_used()
            );
        }
        Command::Abstracts { clusters, a, out } => {
            let clusters = ClusterSet::read(&clusters)?;
            let abstracts = build_abstracts(&clusters, a.unwrap_or(cfg.abstract_size))?;
            std::fs::write(out, format_abstracts(&abstracts))?;
        }
        Command::Search {
            query,
            clusters,
            abstracts,
            codec: c,
            c: width,
            top,
            no_prune,
        } => {
            let cipher = codec(&c, &cfg)?;
            let clusters = ClusterSet::read(&clusters)?;
            let abstracts = read_abstracts(&abstracts)?;
            let tokens = cipher.encrypt_query(&query);
            let selected = if no_prune {
                all_cluster_ids(&clusters)
            } else {
                prune(&tokens, &abstracts, width.unwrap_or(cfg.prune_width))?
            };
            if selected.is_empty() {
                return Ok(());
            }
            let result = search(&tokens, &clusters, &selected, top.unwrap_or(cfg.cutoff))?;
            print!("{}", result.to_tsv());
        }
        Command::Evaluate { what } => evaluate(what, &cfg)?,
        Command::Pipeline {
            input: inp,
            codec: c,
            out,
            k,
            n,
            a,
            stopwords: sw,
        } => {
            cfg.k_mode = k_mode(k.as_deref(), &cfg)?;
            if let Some(n) = n {
                cfg.set("keywords_per_doc", &n.to_string())?;
            }
            if let Some(a) = a {
                cfg.set("abstract_size", &a.to_string())?;
            }
            let cipher = codec(&c, &cfg)?;
            cfg.codec = match cipher {
                Codec::Identity => CodecKind::Identity,
                Codec::Keyed(_) => CodecKind::Keyed,
            };
            let manifest = run_pipeline(
                &cfg,
                &input(&inp),
                &stopwords(sw.as_deref())?,
                &cipher,
                &out,
            )?;
            let est = &manifest.estimate;
            println!(
                "m={} trace={:.6} k={} k_used={}",
                est.m, est.trace, est.k, manifest.k_used
            );
        }
    }
    Ok(())
}

fn evaluate(what: Evaluate, cfg: &PipelineConfig) -> Result<()> {
    match what {
        Evaluate::Coherence {
            clusters,
            embeddings,
            dataset,
            out,
        } => {
            let clusters = ClusterSet::read(&clusters)?;
            let table = EmbeddingTable::load(&embeddings)?;
            emit(
                out.as_deref(),
                &coherence_report(&clusters, &table, &dataset).to_json(),
            )?;
        }
        Evaluate::Tsap { results, judgments } => {
            let judgments = Judgments::load(&judgments)?;
            let results = parse_results(
                &std::fs::read_to_string(&results)?,
                &results.display().to_string(),
            )?;
            for (query, docs) in results {
                let docs = &docs[..docs.len().min(10)];
                println!("{query}\t{:.6}", tsap_at_10(docs, &judgments, &query)?);
            }
        }
        Evaluate::Compare {
            dynamic,
            fixed,
            out,
        } => {
            let summary = compare(
                &EvaluationReport::load(&dynamic)?,
                &EvaluationReport::load(&fixed)?,
            )?;
            emit(out.as_deref(), &to_pretty_json(&summary))?;
        }
        Evaluate::Bench {
            queries,
            clusters,
            abstracts,
            codec: c,
            judgments,
            report,
            c: width,
            top,
            out,
        } => {
            let cipher = codec(&c, cfg)?;
            let clusters = ClusterSet::read(&clusters)?;
            let abstracts = read_abstracts(&abstracts)?;
            let queries = parse_queries(
                &std::fs::read_to_string(&queries)?,
                &queries.display().to_string(),
            )?;
            let judgments = judgments.as_deref().map(Judgments::load).transpose()?;
            let settings = BenchSettings {
                prune_width: width.unwrap_or(cfg.prune_width),
                cutoff: top.unwrap_or(cfg.cutoff),
                ..Default::default()
            };
            let runs = run_queries(&queries, &cipher, &clusters, &abstracts, settings)?;
            let mut rep = match report {
                Some(p) => EvaluationReport::load(&p)?,
                None => EvaluationReport {
                    corpus_digest: clustcrypt::eval::corpus_digest(&clusters),
                    cluster_count: clusters.k_used(),
                    ..Default::default()
                },
            };
            record_runs(&mut rep, &runs, judgments.as_ref())?;
            emit(out.as_deref(), &rep.to_json())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\t'], " ");
            eprintln!("error\t{}\t{}", e.kind(), msg);
            ExitCode::FAILURE
        }
    }
}
