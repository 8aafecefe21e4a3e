use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use otbcd::methods::run;
use otbcd::mmot::MmotOracle;
use otbcd::polytope::Plan;
use otbcd::sinkhorn::{sinkhorn_solve, GibbsKernel, SinkhornConfig};
use otbcd::sparsify::{mixture_probabilities, poisson_sample_with, SampleKey, Sampler};
use otbcd::MethodKind;
use otbcd_bench::{block_marginals, fixed_run, random_problem, system_one};

fn sinkhorn(c: &mut Criterion) {
    let mut g = c.benchmark_group("sinkhorn");
    for n in [50, 200, 800] {
        let (cost, a, b) = random_problem(n, n, 1);
        let kernel = GibbsKernel::dense(&cost, 0.05).unwrap();
        let cfg = SinkhornConfig { s_max: 100_000, feas_tol: 1e-8, underflow_floor: 1e-300 };
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| sinkhorn_solve(&kernel.kernel, &a, &b, &cfg, None).unwrap())
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampling");
    for n in [200, 800] {
        let (_, a, b) = random_problem(n, n, 2);
        let dist = mixture_probabilities(&Plan::product(&a, &b), &a, &b, 0.5).unwrap();
        let n_s = ((n * n) as f64).powf(0.75) as usize;
        for sampler in [Sampler::Dense, Sampler::Accelerated] {
            g.bench_with_input(BenchmarkId::new(sampler.to_string(), n), &n, |bch, _| {
                let mut t = 0;
                bch.iter(|| {
                    t += 1;
                    poisson_sample_with(&dist, n_s, SampleKey::new(0, t, 0), sampler).unwrap()
                })
            });
        }
    }
    g.finish();
}

fn methods(c: &mut Criterion) {
    let mut g = c.benchmark_group("klalm_vs_s_klalm");
    g.sample_size(10);
    for k in [90, 180] {
        let sys = system_one(k).unwrap();
        let oracle = MmotOracle::new(&sys);
        let marginals = block_marginals(&oracle, &sys);
        for kind in [MethodKind::Klalm, MethodKind::SKlalm] {
            let cfg = fixed_run(kind, 20);
            g.bench_with_input(BenchmarkId::new(kind.to_string(), k), &k, |bch, _| {
                bch.iter(|| run(&oracle, &marginals, &cfg, None, None).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, sinkhorn, sampling, methods);
criterion_main!(benches);
