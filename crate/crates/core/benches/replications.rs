use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use semiplug::mcverify::{run_linearity_experiment, ExperimentSpec};
use semiplug::models::{CoxModel, ErrorLaw, LocationModel, Model};
use semiplug::par::Execution;
use semiplug::pipelines::{build_pipeline, FunctionalSpec, PipelineOptions};

fn replications(c: &mut Criterion) {
    let cases = [
        (
            "location-cdf",
            Model::Location(LocationModel {
                theta0: 0.0,
                law: ErrorLaw::normal(1.0).unwrap(),
            }),
            FunctionalSpec::CdfAt(0.0),
            400,
        ),
        (
            "cox-baseline",
            Model::Cox(CoxModel::new(0.5, 1.0, 10f64.ln()).unwrap()),
            FunctionalSpec::CdfAt(2f64.ln()),
            200,
        ),
    ];
    let mut group = c.benchmark_group("linearity-100-reps");
    group.sample_size(10);
    for (name, model, functional, n) in cases {
        let pipeline = build_pipeline(model, functional, &PipelineOptions::default()).unwrap();
        for exec in [Execution::Serial, Execution::Parallel] {
            let spec = ExperimentSpec {
                name: name.into(),
                n_list: vec![n],
                reps: 100,
                drift_t: 0.0,
                seed: 1,
                exec,
            };
            let label = if exec.is_parallel() {
                "parallel"
            } else {
                "serial"
            };
            group.bench_function(BenchmarkId::new(name, label), |b| {
                b.iter(|| run_linearity_experiment(&pipeline, &spec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
