use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use asced_bench::{gb126, gb46, syndromes};
use asced_core::bp4::{Bp4Config, Bp4Decoder, Schedule};
use asced_core::ensemble::{build_ensemble, EnsembleConfig, EnsembleDecoder, OvercompleteParams};

fn bp4(c: &mut Criterion) {
    let code = gb46();
    let zs = syndromes(&code, 0.06, 64, 1);
    let mut g = c.benchmark_group("bp4_gb46_p0.06");
    for schedule in [Schedule::Flooding, Schedule::Serial] {
        let dec = Bp4Decoder::new(
            code.check_matrix(),
            Bp4Config {
                schedule,
                ..Bp4Config::new(0.06, 25)
            },
        )
        .unwrap();
        let mut ws = dec.workspace();
        g.bench_function(format!("{schedule:?}"), |b| {
            b.iter(|| {
                for z in &zs {
                    black_box(dec.decode_with(z, &mut ws).unwrap());
                }
            })
        });
    }
    g.finish();
}

fn rank(c: &mut Criterion) {
    let h = gb126().check_matrix().clone();
    c.bench_function("rank_gb126", |b| {
        b.iter_batched(|| h.clone(), |m| black_box(m.rank()), BatchSize::SmallInput)
    });
}

fn ensemble(c: &mut Criterion) {
    let code = gb46();
    let zs = syndromes(&code, 0.06, 16, 2);
    let base = Bp4Config::new(0.3, 12);
    let oc = OvercompleteParams {
        m_oc: 800,
        max_row_weight: 10,
        search_budget: 10_000,
        per_component: false,
    };
    let mut g = c.benchmark_group("asced_gb46_p0.06");
    g.sample_size(10);
    for (name, l, oc) in [("bp4_asced16", 4, None), ("obp4_asced64", 16, Some(oc))] {
        let cfg = EnsembleConfig {
            l_batches: l,
            delta: 2,
            splitter_weight: 4,
            overcomplete: oc,
            ..EnsembleConfig::standalone(base, None)
        };
        let ens = build_ensemble(&code, &cfg, 2024).unwrap();
        let dec = EnsembleDecoder::new(&code, &ens, &base).unwrap();
        let mut ws = dec.workspace();
        g.bench_function(name, |b| {
            b.iter(|| {
                for z in &zs {
                    black_box(dec.decode_with(z, &mut ws).unwrap());
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bp4, rank, ensemble);
criterion_main!(benches);
