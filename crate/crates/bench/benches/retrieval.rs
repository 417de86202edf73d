use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use semdex::build_index;
use semdex::esa::{build_associations, esa_classify, AssociationParams, Measure};
use semdex::knn::{classify, KnnConfig};
use semdex::synth::scale_corpus;
use semdex::text::preprocess;
use semdex_bench::ranking_fixture;

const SEED: u64 = 42;

fn preprocessing(c: &mut Criterion) {
    let text = "Insulin resistance and impaired glucose tolerance were measured in obese \
                adolescents; fasting plasma concentrations correlated with adiposity. \
                Conclusions: early screening identifies patients at risk of type 2 diabetes.";
    let mut g = c.benchmark_group("preprocess");
    g.throughput(Throughput::Bytes(text.len() as u64));
    g.bench_function("abstract", |b| b.iter(|| preprocess(black_box(text))));
    g.finish();
}

fn indexing(c: &mut Criterion) {
    let docs = scale_corpus(10_000, 40, 20_000, SEED);
    let mut g = c.benchmark_group("index");
    g.sample_size(10);
    g.throughput(Throughput::Elements(docs.len() as u64));
    g.bench_function("build 10k docs", |b| b.iter(|| build_index(black_box(&docs)).unwrap()));
    g.finish();
}

fn querying(c: &mut Criterion) {
    let docs = scale_corpus(20_000, 40, 20_000, SEED);
    let index = build_index(&docs).unwrap();
    let queries = scale_corpus(200, 40, 20_000, SEED + 1);
    let mut g = c.benchmark_group("top-k");
    g.throughput(Throughput::Elements(queries.len() as u64));
    for k in [10, 25, 100] {
        g.bench_function(format!("k={k} over 20k docs"), |b| {
            b.iter(|| {
                for q in &queries {
                    black_box(index.top_k_neighbors(q, k, false).unwrap());
                }
            })
        });
    }
    g.finish();
}

fn ranking(c: &mut Criterion) {
    let f = ranking_fixture(2000, 100, 100, SEED);
    let config = KnnConfig::default();
    let mut g = c.benchmark_group("classify");
    g.throughput(Throughput::Elements(f.queries.len() as u64));
    g.bench_function("rf cutoff, 100 docs", |b| {
        b.iter(|| {
            for q in &f.queries {
                black_box(classify(q, &f.model, &f.index, &f.vocab, &config).unwrap());
            }
        })
    });
    for measure in [Measure::Jaccard, Measure::TfIcf] {
        let params = AssociationParams {
            min_doc_freq: 2,
            ..AssociationParams::new(measure)
        };
        g.bench_function(format!("esa build {measure}"), |b| {
            b.iter_batched(
                || &f.train,
                |t| build_associations(t, params).unwrap(),
                BatchSize::SmallInput,
            )
        });
        let assoc = build_associations(&f.train, params).unwrap();
        g.bench_function(format!("esa {measure}, 100 docs"), |b| {
            b.iter(|| {
                for q in &f.queries {
                    black_box(esa_classify(q, &assoc, 3).unwrap());
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, preprocessing, indexing, querying, ranking);
criterion_main!(benches);
