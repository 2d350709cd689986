//! Sequential vs parallel throughput of the per-message stages.
//!
//! `cargo bench -p secmsg-core --bench throughput`

use std::hint::black_box;
use std::path::Path;

use chrono::{TimeZone, Utc};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use secmsg_core::acquire::{CommitMessage, Forge, SourceBackend};
use secmsg_core::ccs::CcsTypes;
use secmsg_core::clean::{clean, detect_language, CleanConfig, DEFAULT_REVIEW_THRESHOLD};
use secmsg_core::entity::{match_entities, EntityDictionary};
use secmsg_core::pipeline::Classifier;
use secmsg_core::{jsonl, Execution};
use serde::Deserialize;

const COPIES: usize = 40;

#[derive(Deserialize)]
struct Row {
    message: String,
}

/// The annotated corpus repeated, each copy made textually distinct so
/// deduplication keeps it.
fn corpus() -> Vec<CommitMessage> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/annotated/corpus.jsonl");
    let rows: Vec<Row> = jsonl::read(&path).expect("corpus fixture");
    let date = Utc.with_ymd_and_hms(2023, 1, 1, 0, 0, 0).unwrap();
    (0..COPIES)
        .flat_map(|copy| rows.iter().map(move |r| (copy, r)))
        .enumerate()
        .map(|(i, (copy, r))| CommitMessage {
            hash: format!("{i:040x}"),
            message: format!(
                "{}\n\nReviewed in round {copy} of the hardening sprint for the parser module.",
                r.message
            ),
            author: format!("dev{}", i % 17),
            author_date: date,
            origin: "https://github.com/bench/repo".into(),
            forge: Forge::GitHub,
            source_backend: SourceBackend::LocalStore,
            vuln_ids: Vec::new(),
        })
        .collect()
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench(c: &mut Criterion) {
    let messages = corpus();
    let dict = EntityDictionary::bundled();
    let classifier =
        Classifier { dictionary: dict.clone(), ccs_types: CcsTypes::default(), pattern_version: "bench".into() };
    let config = CleanConfig::default();

    let mut group = c.benchmark_group("per_message");
    group.throughput(Throughput::Elements(messages.len() as u64));
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("match_entities", name), &exec, |b, &exec| {
            b.iter(|| exec.map(&messages, |m| match_entities(black_box(&m.message), &dict)))
        });
        group.bench_with_input(BenchmarkId::new("detect_language", name), &exec, |b, &exec| {
            b.iter(|| exec.map(&messages, |m| detect_language(black_box(&m.message), DEFAULT_REVIEW_THRESHOLD)))
        });
        group.bench_with_input(BenchmarkId::new("clean", name), &exec, |b, &exec| {
            b.iter(|| clean(black_box(messages.clone()), &config, exec))
        });
        group.bench_with_input(BenchmarkId::new("classify", name), &exec, |b, &exec| {
            b.iter(|| classifier.classify_all(black_box(&messages), &[], exec))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
