// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use clustcrypt::eval::{corpus_digest, static_baseline};
use clustcrypt::pipeline::{
    KReport, Manifest, CLUSTERS_FILE, INDEX_FILE, K_REPORT_FILE, MANIFEST_FILE,
};
use clustcrypt::search::{prune, read_abstracts, search, search_index};
use clustcrypt::synth::TopicCorpus;
use clustcrypt::{
    cluster_index, index::format_keyword_line, run_pipeline, ClusterSet, Codec, IdentityCodec,
    KMode, PipelineConfig, PipelineInput, SecretKey, TokenCipher,
};
use sha2::{Digest, Sha256};

fn keyword_file(dir: &std::path::Path) -> std::path::PathBuf {
    let corpus = TopicCorpus {
        tokens: 400,
        docs: 120,
        topics: 6,
        tokens_per_doc: 25,
        ..TopicCorpus::default()
    };
    let text: String = corpus
        .keyword_records()
        .iter()
        .map(|(d, terms)| format_keyword_line(d, terms) + "\n")
        .collect();
    let path = dir.join("keywords.tsv");
    std::fs::write(&path, text).unwrap();
    path
}

fn config(codec: &Codec) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.set("keywords_per_doc", "1000").unwrap();
    cfg.set("codec", codec.name()).unwrap();
    cfg
}

#[test]
fn manifest_describes_written_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let input = PipelineInput::Keywords(keyword_file(tmp.path()));
    let cipher = Codec::keyed(SecretKey::from_bytes([3; 32]));
    let out = tmp.path().join("out");
    let manifest = run_pipeline(&config(&cipher), &input, &HashSet::new(), &cipher, &out).unwrap();

    for (name, digest) in &manifest.artifacts {
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(&hex::encode(Sha256::digest(&bytes)), digest, "{name}");
    }
    let on_disk: Manifest =
        serde_json::from_str(&std::fs::read_to_string(out.join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, manifest);
    let k_report: KReport =
        serde_json::from_str(&std::fs::read_to_string(out.join(K_REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(k_report, manifest.estimate);

    let clusters = ClusterSet::read(&out.join(CLUSTERS_FILE)).unwrap();
    assert_eq!(clusters.k_used(), manifest.k_used);
    assert!(manifest.k_used >= 1 && manifest.k_used <= manifest.estimate.k);
    let index = clustcrypt::index::read_index(&out.join(INDEX_FILE)).unwrap();
    assert_eq!(clusters.token_count(), index.token_count());
}

#[test]
fn identity_and_keyed_runs_cluster_the_same_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let input = PipelineInput::Keywords(keyword_file(tmp.path()));
    let keyed = Codec::keyed(SecretKey::from_bytes([4; 32]));
    let a = run_pipeline(
        &config(&keyed),
        &input,
        &HashSet::new(),
        &keyed,
        &tmp.path().join("k"),
    )
    .unwrap();
    let b = run_pipeline(
        &config(&Codec::Identity),
        &input,
        &HashSet::new(),
        &Codec::Identity,
        &tmp.path().join("i"),
    )
    .unwrap();
    // the matrices do not depend on token bytes, so the estimate is shared
    assert_eq!(a.estimate, b.estimate);
    assert_eq!(a.input_digest, b.input_digest);

    let plain = ClusterSet::read(&tmp.path().join("i").join(CLUSTERS_FILE)).unwrap();
    for cluster in &plain.clusters {
        for token in cluster.tokens.keys() {
            assert!(IdentityCodec::decode(token).unwrap().starts_with('w'));
        }
    }
}

#[test]
fn pruned_search_matches_whole_index_when_every_cluster_is_kept() {
    let tmp = tempfile::tempdir().unwrap();
    let input = PipelineInput::Keywords(keyword_file(tmp.path()));
    let out = tmp.path().join("out");
    let cipher = Codec::Identity;
    run_pipeline(&config(&cipher), &input, &HashSet::new(), &cipher, &out).unwrap();
    let clusters = ClusterSet::read(&out.join(CLUSTERS_FILE)).unwrap();
    let abstracts = read_abstracts(&out.join("abstracts.jsonl")).unwrap();
    let index = clustcrypt::index::read_index(&out.join(INDEX_FILE)).unwrap();
    for q in ["w00001", "w00002 w00010", "w00399 w00007 w00100", "absent"] {
        let tokens = cipher.encrypt_query(q);
        let ids = prune(&tokens, &abstracts, clusters.k_used()).unwrap();
        let hits = search(&tokens, &clusters, &ids, 10).unwrap();
        assert_eq!(hits.ranked, search_index(&tokens, &index, 10), "{q}");
    }
}

#[test]
fn static_baseline_with_estimated_k_is_the_dynamic_clustering() {
    let tmp = tempfile::tempdir().unwrap();
    let path = keyword_file(tmp.path());
    let text = std::fs::read_to_string(&path).unwrap();
    let records = clustcrypt::index::parse_keyword_file(&text, "kw").unwrap();
    let cipher = Codec::Identity;
    let index =
        clustcrypt::ingest(clustcrypt::index::encrypt_records(&cipher, records).unwrap()).unwrap();
    let dynamic = cluster_index(&index, KMode::Auto).unwrap();
    let fixed = static_baseline(&index, dynamic.estimate.k).unwrap();
    assert_eq!(fixed.to_jsonl(), dynamic.clusters.to_jsonl());
    assert_eq!(corpus_digest(&fixed), corpus_digest(&dynamic.clusters));
}
