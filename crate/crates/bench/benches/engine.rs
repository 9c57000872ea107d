use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use seqgram_bench::corpus;
use seqgram_core::{evaluate_set, greedy_match, train, CopyMode, Evaluator, TerminalId};

fn training(c: &mut Criterion) {
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for entries in [10_000, 100_000] {
        let seqs = corpus(entries, 7);
        group.throughput(Throughput::Elements(entries as u64));
        group.bench_with_input(BenchmarkId::from_parameter(entries), &seqs, |b, seqs| {
            b.iter(|| train(seqs).unwrap())
        });
    }
    group.finish();
}

fn scoring(c: &mut Criterion) {
    let model = train(&corpus(100_000, 7)).unwrap();
    let questionable = corpus(10_000, 8);
    let entries: usize = questionable.iter().map(Vec::len).sum();

    let mut group = c.benchmark_group("score");
    group.throughput(Throughput::Elements(entries as u64));
    group.bench_function("journal", |b| {
        b.iter(|| evaluate_set(&questionable, &model))
    });
    group.bench_function("full_copy", |b| {
        b.iter(|| {
            let mut ev = Evaluator::with_mode(&model, CopyMode::FullCopy);
            for (i, q) in questionable.iter().enumerate() {
                ev.score(i, q).unwrap();
            }
        })
    });
    group.finish();
}

fn matching(c: &mut Criterion) {
    let seqs = corpus(100_000, 7);
    let model = train(&seqs).unwrap();
    let interner = model.interner();
    let input: Vec<TerminalId> = seqs
        .iter()
        .flatten()
        .take(20_000)
        .map(|t| interner.get(t).unwrap())
        .collect();

    c.bench_function("greedy_match/20k", |b| {
        b.iter(|| {
            let mut pos = 0;
            while pos < input.len() {
                pos += greedy_match(&input, pos, model.grammar()).map_or(1, |m| m.consumed);
            }
        })
    });
}

criterion_group!(benches, training, scoring, matching);
criterion_main!(benches);
