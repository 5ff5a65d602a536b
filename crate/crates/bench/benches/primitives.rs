use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thag_core::planner::region_grid;
use thag_core::ring::{ring_mul_schoolbook, sample_uniform};
use thag_core::{PlanInputs, RingParams};

fn ring_mul(c: &mut Criterion) {
    let mut g = c.benchmark_group("ring_mul");
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for (n, bits) in [(1024usize, 1usize), (4096, 2), (16384, 3)] {
        let primes = thag_core::ring::modulus::ntt_primes_below(50, n, bits, &[]).unwrap();
        let params = RingParams::new(n, &primes).unwrap();
        let a = sample_uniform(&params, &mut rng);
        let b = sample_uniform(&params, &mut rng);
        g.bench_with_input(BenchmarkId::new("ntt", format!("n{n}_l{bits}")), &(), |bch, _| {
            bch.iter(|| {
                let mut p = a.to_ntt().mul(&b.to_ntt()).unwrap();
                p.intt_in_place();
                black_box(p)
            })
        });
        if n == 1024 {
            g.bench_function("schoolbook/n1024_l1", |bch| {
                bch.iter(|| black_box(ring_mul_schoolbook(&a, &b).unwrap()))
            });
        }
    }
    g.finish();
}

fn planner_grid(c: &mut Criterion) {
    let inputs = PlanInputs::new(8192, 10, 3.2, 32, 0, 0);
    c.bench_function("region_grid/113x113", |b| {
        b.iter(|| black_box(region_grid(&inputs, 8..=120, 8..=120).unwrap()))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = ring_mul, planner_grid
}
criterion_main!(benches);
