//! Importance sampling of kernel entries: mixture probabilities, Poisson
//! (independent Bernoulli) sampling, sparsified kernels and effective costs.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::polytope::{Csr, Marginal, Pattern, Plan, Storage};
use crate::sinkhorn::KernelMatrix;

/// Previous-iterate part of the mixture, normalized to unit mass.
#[derive(Clone, Debug)]
pub enum PrevPart {
    None,
    Dense(Array2<f64>),
    Sparse(Csr),
}

/// p_jk = γ x_jk/Σx + (1−γ) √(a_j b_k)/Σ√(ab), stored as a sparse or dense
/// part plus a rank-one part so it is never materialized.
#[derive(Clone, Debug)]
pub struct SamplingDistribution {
    shape: (usize, usize),
    gamma: f64,
    prev: PrevPart,
    sqrt_a: Array1<f64>,
    sqrt_b: Array1<f64>,
    norm: f64,
}

impl SamplingDistribution {
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn prev(&self) -> &PrevPart {
        &self.prev
    }

    fn rank_one(&self, j: usize, k: usize) -> f64 {
        (1.0 - self.gamma) * self.sqrt_a[j] * self.sqrt_b[k] / self.norm
    }

    pub fn prob(&self, j: usize, k: usize) -> f64 {
        let p = match &self.prev {
            PrevPart::None => 0.0,
            PrevPart::Dense(m) => m[(j, k)],
            PrevPart::Sparse(s) => s.get(j, k),
        };
        self.gamma * p + self.rank_one(j, k)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        Array2::from_shape_fn(self.shape, |(j, k)| self.prob(j, k))
    }

    /// E|I| and Var|I| for a Poisson sample of size parameter n_s.
    pub fn support_moments(&self, n_s: usize) -> (f64, f64) {
        let (m, n) = self.shape;
        let (mut mean, mut var) = (0.0, 0.0);
        for j in 0..m {
            for k in 0..n {
                let q = pstar(self.prob(j, k), n_s);
                mean += q;
                var += q * (1.0 - q);
            }
        }
        (mean, var)
    }
}

/// Builds the mixture distribution from the previous iterate.
pub fn mixture_probabilities(x_prev: &Plan, a: &Marginal, b: &Marginal, gamma: f64) -> Result<SamplingDistribution> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("γ = {gamma} outside [0,1]")));
    }
    let shape = (a.len(), b.len());
    if x_prev.shape() != shape {
        return Err(Error::Shape { expected: shape, got: x_prev.shape() });
    }
    let prev = if gamma > 0.0 {
        let total = x_prev.total();
        if !(total > 0.0) {
            return Err(Error::Domain("previous iterate has zero mass".into()));
        }
        match x_prev.storage() {
            Storage::Dense(m) => PrevPart::Dense(m / total),
            Storage::Sparse(s) => PrevPart::Sparse(s.map(|_, _, x| x / total)),
        }
    } else {
        PrevPart::None
    };
    let sqrt_a = a.masses().mapv(f64::sqrt);
    let sqrt_b = b.masses().mapv(f64::sqrt);
    let norm = sqrt_a.sum() * sqrt_b.sum();
    Ok(SamplingDistribution { shape, gamma, prev, sqrt_a, sqrt_b, norm })
}

/// p* = min{1, n_s p}.
pub fn pstar(p: f64, n_s: usize) -> f64 {
    (n_s as f64 * p).min(1.0)
}

/// Identifies one draw; every entry decision is a pure function of the key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SampleKey {
    pub seed: u64,
    pub t: u64,
    pub block: u64,
    pub attempt: u64,
}

impl SampleKey {
    pub fn new(seed: u64, t: usize, block: usize) -> Self {
        Self { seed, t: t as u64, block: block as u64, attempt: 0 }
    }

    pub fn retry(self) -> Self {
        Self { attempt: self.attempt + 1, ..self }
    }

    fn base(&self) -> u64 {
        mix(mix(mix(mix(self.seed) ^ self.t) ^ self.block) ^ self.attempt)
    }
}

fn mix(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sampled index set with acceptance probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSupport {
    pub pattern: Pattern,
    pub pstar: Vec<f64>,
    pub key: SampleKey,
}

impl SampledSupport {
    pub fn len(&self) -> usize {
        self.pstar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pstar.is_empty()
    }

    /// Full grid with p* = 1.
    pub fn full(m: usize, n: usize, key: SampleKey) -> Self {
        Self { pattern: Pattern::full(m, n), pstar: vec![1.0; m * n], key }
    }

    pub fn write(&self, mut out: impl std::io::Write) -> Result<()> {
        for ((j, k), q) in self.pattern.iter().zip(&self.pstar) {
            writeln!(out, "{j} {k} {}", crate::polytope::io::fmt_g17(*q))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sampler {
    /// Visits all m·n entries.
    #[default]
    Dense,
    /// Exact thinning per row: explicit draws on the previous support plus
    /// geometric skipping over the rank-one part.
    Accelerated,
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Dense => "dense",
            Self::Accelerated => "accelerated",
        })
    }
}

impl std::str::FromStr for Sampler {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dense" => Ok(Self::Dense),
            "accelerated" => Ok(Self::Accelerated),
            o => Err(format!("unknown sampler `{o}` (dense, accelerated)")),
        }
    }
}

/// Includes each (j,k) independently with probability min{1, n_s p_jk}.
pub fn poisson_sample(p: &SamplingDistribution, n_s: usize, key: SampleKey) -> Result<SampledSupport> {
    poisson_sample_with(p, n_s, key, Sampler::Dense)
}

pub fn poisson_sample_with(p: &SamplingDistribution, n_s: usize, key: SampleKey, sampler: Sampler) -> Result<SampledSupport> {
    if n_s == 0 {
        return Err(Error::Domain("n_s must be at least 1".into()));
    }
    match (sampler, &p.prev) {
        (Sampler::Accelerated, PrevPart::None | PrevPart::Sparse(_)) => Ok(sample_thinned(p, n_s, key)),
        _ => Ok(sample_dense(p, n_s, key)),
    }
}

fn sample_dense(p: &SamplingDistribution, n_s: usize, key: SampleKey) -> SampledSupport {
    let (m, n) = p.shape;
    let base = key.base();
    let mut indptr = Vec::with_capacity(m + 1);
    let mut indices = Vec::new();
    let mut ps = Vec::new();
    indptr.push(0);
    for j in 0..m {
        let hr = mix(base ^ j as u64);
        for k in 0..n {
            let q = pstar(p.prob(j, k), n_s);
            if q > 0.0 && (q >= 1.0 || unit(mix(hr ^ (k as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))) < q) {
                indices.push(k);
                ps.push(q);
            }
        }
        indptr.push(indices.len());
    }
    let pattern = Pattern::new(m, n, indptr, indices).expect("sorted by construction");
    SampledSupport { pattern, pstar: ps, key }
}

fn sample_thinned(p: &SamplingDistribution, n_s: usize, key: SampleKey) -> SampledSupport {
    let (m, n) = p.shape;
    let base = key.base();
    let sb_max = p.sqrt_b.iter().cloned().fold(0.0, f64::max);
    let empty: (&[usize], &[f64]) = (&[], &[]);
    let mut indptr = Vec::with_capacity(m + 1);
    let mut indices = Vec::new();
    let mut ps = Vec::new();
    indptr.push(0);
    for j in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(base ^ (j as u64) ^ 0x5EED));
        let (pcols, _) = match &p.prev {
            PrevPart::Sparse(s) => s.row(j),
            _ => empty,
        };
        let mut row: Vec<(usize, f64)> = Vec::new();
        for &k in pcols {
            let q = pstar(p.prob(j, k), n_s);
            if q > 0.0 && (q >= 1.0 || rng.gen::<f64>() < q) {
                row.push((k, q));
            }
        }
        let qmax = pstar((1.0 - p.gamma) * p.sqrt_a[j] * sb_max / p.norm, n_s);
        if qmax > 0.0 {
            let log1m = (1.0 - qmax).ln();
            let mut k = 0usize;
            loop {
                if qmax < 1.0 {
                    let u: f64 = rng.gen::<f64>();
                    let skip = ((1.0 - u).ln() / log1m).floor();
                    if !(skip < (n - k) as f64) {
                        break;
                    }
                    k += skip as usize;
                }
                if k >= n {
                    break;
                }
                if pcols.binary_search(&k).is_err() {
                    let q = pstar(p.rank_one(j, k), n_s);
                    if q >= qmax || rng.gen::<f64>() * qmax < q {
                        row.push((k, q));
                    }
                }
                k += 1;
            }
        }
        row.sort_unstable_by_key(|e| e.0);
        for (k, q) in row {
            indices.push(k);
            ps.push(q);
        }
        indptr.push(indices.len());
    }
    let pattern = Pattern::new(m, n, indptr, indices).expect("sorted by construction");
    SampledSupport { pattern, pstar: ps, key }
}

/// Ψ̂_jk = ψ_jk / p*_jk on the support; `entry` is called once per member.
pub fn sparsify_kernel(mut entry: impl FnMut(usize, usize) -> f64, support: &SampledSupport) -> Result<KernelMatrix> {
    let values = support.pattern.iter().zip(&support.pstar).map(|((j, k), q)| entry(j, k) / q).collect();
    KernelMatrix::sparse(Csr::new(support.pattern.clone(), values)?)
}

/// ĉ_jk = c_jk + λ log p*_jk on the support.
pub fn effective_cost(mut cost: impl FnMut(usize, usize) -> f64, lambda: f64, support: &SampledSupport) -> Result<Csr> {
    if !(lambda > 0.0) {
        return Err(Error::Domain("λ must be positive".into()));
    }
    let values = support.pattern.iter().zip(&support.pstar).map(|((j, k), q)| cost(j, k) + lambda * q.ln()).collect();
    Csr::new(support.pattern.clone(), values)
}
