//! Monte Carlo `L^q` norms with standard errors, the exact `L²` norm of
//! `ℳ` over `Y × T`, exp-Orlicz estimates, and empirical Khinchin /
//! Littlewood–Paley ratios.

mod integrands;
mod sweep;

pub use integrands::{ApproximationIntegrand, DiscrepancyIntegrand, FnIntegrand, Integrand};
pub use sweep::{scaling_sweep, SweepConfig, SweepRow, SweepSummary, SweepTable};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discrepancy::DiscrepancyContext;
use crate::error::{Error, Result};
use crate::walsh::{rho_sum, DyadicRational};

/// Fewer requested samples are raised to this floor.
pub const MIN_SAMPLES: u64 = 1000;
const CHUNK: u64 = 4096;

/// Exponents `q ≥ 1`, sorted and distinct.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QGrid(Vec<f64>);

impl QGrid {
    pub fn new(mut qs: Vec<f64>) -> Result<Self> {
        if qs.is_empty() {
            return Err(Error::InvalidParameter("empty q-grid".into()));
        }
        if let Some(bad) = qs.iter().find(|q| !q.is_finite() || **q < 1.0) {
            return Err(Error::InvalidParameter(format!("q = {bad} must be >= 1")));
        }
        qs.sort_by(f64::total_cmp);
        qs.dedup();
        Ok(Self(qs))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for QGrid {
    fn default() -> Self {
        Self(vec![1.0, 2.0, 4.0, 8.0, 12.0, 16.0])
    }
}

impl std::str::FromStr for QGrid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let qs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad q value `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(qs)
    }
}

/// Sampling configuration. Results depend on `samples`, `seed` and
/// `stratified` only; `workers` changes wall time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub stratified: bool,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            workers: 0,
            stratified: false,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn stratified(mut self, on: bool) -> Self {
        self.stratified = on;
        self
    }
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone)]
struct Moments {
    /// Per q: Σ|f|^q and Σ|f|^{2q}.
    first: Vec<Neumaier>,
    second: Vec<Neumaier>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self {
            first: vec![Neumaier::default(); k],
            second: vec![Neumaier::default(); k],
        }
    }

    fn merge(&mut self, other: &Moments) {
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            a.merge(b);
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            a.merge(b);
        }
    }
}

/// One `‖f‖_q` estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub q: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// `‖f‖_q / (q^{(n+1)/2} s^{(n−1)/2})`, when a net shape is attached.
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub function: String,
    pub estimates: Vec<NormEstimate>,
    pub samples: u64,
    pub seed: u64,
    pub stratified: bool,
}

impl NormReport {
    /// Attach `‖f‖_q / (q^{(n+1)/2} s^{(n−1)/2})`.
    pub fn with_normalization(mut self, n: usize, s: u32) -> Self {
        let (a, b) = ((n as f64 + 1.0) / 2.0, (n as f64 - 1.0) / 2.0);
        for e in &mut self.estimates {
            e.normalized = Some(e.estimate / (e.q.powf(a) * (s as f64).powf(b)));
        }
        self
    }

    pub fn get(&self, q: f64) -> Option<&NormEstimate> {
        self.estimates.iter().find(|e| e.q == q)
    }

    /// Whether estimates are nondecreasing in `q` up to `3·stderr`.
    pub fn is_monotone(&self) -> bool {
        self.estimates.windows(2).all(|w| {
            w[1].estimate + 3.0 * (w[0].stderr + w[1].stderr) >= w[0].estimate
        })
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive an independent seed from a base seed and labels.
pub fn derive_seed(base: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix(base), |acc, &l| splitmix(acc ^ splitmix(l)))
}

/// Bits per coordinate fixed by stratification: each chunk of `2^12`
/// samples cycles through the cells of `Q^d(2^b)`.
fn strata_bits(dim: usize) -> u32 {
    if dim == 0 {
        0
    } else {
        CHUNK.trailing_zeros() / dim as u32
    }
}

fn run_chunk<I: Integrand + ?Sized>(
    f: &I,
    qs: &[f64],
    cfg: &McConfig,
    chunk: u64,
    strata: u32,
) -> Moments {
    let d = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chunk);
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(cfg.samples);
    let mut words = vec![0u64; d];
    let mut m = Moments::new(qs.len());
    let cells_mask = if strata == 0 { 0 } else { (1u64 << (strata * d as u32)) - 1 };
    // A uniform per-chunk offset keeps partial cycles unbiased.
    let offset = rng.next_u64() & cells_mask;
    for i in start..end {
        for w in words.iter_mut() {
            *w = rng.next_u64();
        }
        if strata > 0 {
            // Counter-driven top digits: every cell of Q^d(2^strata) is hit
            // equally often over each full cycle.
            let cell = (i - start + offset) & cells_mask;
            for (j, w) in words.iter_mut().enumerate() {
                let digits = (cell >> (j as u32 * strata)) & ((1u64 << strata) - 1);
                *w = (digits << (64 - strata)) | (*w >> strata);
            }
        }
        let v = f.eval(&words).abs();
        for (k, &q) in qs.iter().enumerate() {
            let p = if q == 1.0 { v } else { v.powf(q) };
            m.first[k].add(p);
            m.second[k].add(p * p);
        }
    }
    m
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return job();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}

/// `(E|f|^q)^{1/q}` for every `q` in the grid, from one set of samples.
///
/// Samples are processed in fixed chunks, each with its own counter-based
/// stream, and reduced in chunk order, so the result is independent of the
/// worker count.
pub fn lq_norm_mc<I: Integrand + ?Sized>(
    f: &I,
    grid: &QGrid,
    cfg: &McConfig,
    label: &str,
) -> Result<NormReport> {
    if cfg.samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let cfg = McConfig {
        samples: cfg.samples.max(MIN_SAMPLES),
        ..*cfg
    };
    let qs = grid.values();
    let chunks = cfg.samples.div_ceil(CHUNK);
    let strata = if cfg.stratified { strata_bits(f.dim()) } else { 0 };
    let parts: Vec<Moments> = with_pool(cfg.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| run_chunk(f, qs, &cfg, c, strata))
            .collect()
    });
    let mut total = Moments::new(qs.len());
    for p in &parts {
        total.merge(p);
    }
    let n = cfg.samples as f64;
    let estimates = qs
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let m = (total.first[k].value() / n).max(0.0);
            let m2 = total.second[k].value() / n;
            let var = ((m2 - m * m) * n / (n - 1.0)).max(0.0);
            let estimate = m.powf(1.0 / q);
            let stderr = if m > 0.0 {
                m.powf(1.0 / q - 1.0) / q * (var / n).sqrt()
            } else {
                0.0
            };
            NormEstimate {
                q,
                estimate,
                stderr,
                normalized: None,
            }
        })
        .collect();
    Ok(NormReport {
        function: label.to_string(),
        estimates,
        samples: cfg.samples,
        seed: cfg.seed,
        stratified: cfg.stratified,
    })
}

/// `‖ℳ[D ⊕ T; Y]‖²_{L²[Y×T]} = 2^{2s} 3^{−n} Σ_{L ∈ θ(D^⊥) ∖ 0} 2^{−2ρ(L)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Exact {
    /// `2^{2s} Σ 2^{−2ρ(L)}` as `num/2^exp`.
    pub dyadic_part: String,
    /// `3^n`.
    pub divisor: u64,
    /// The squared norm.
    pub squared: f64,
    pub norm: f64,
    #[serde(skip)]
    pub exact: DyadicRational,
}

pub fn l2_m_exact(ctx: &DiscrepancyContext) -> Result<L2Exact> {
    let s = ctx.resolution() as i32;
    let mut acc = DyadicRational::zero();
    for (l, _) in ctx.dual_terms()? {
        acc = &acc + &DyadicRational::pow2(-2 * rho_sum(l) as i32);
    }
    let exact = acc.mul_pow2(2 * s);
    let divisor = 3u64.pow(ctx.dim() as u32);
    let squared = exact.to_f64() / divisor as f64;
    Ok(L2Exact {
        dyadic_part: exact.to_string(),
        divisor,
        squared,
        norm: squared.sqrt(),
        exact,
    })
}

/// `max_q q^{−θ} ‖f‖_q` over the report's grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczEstimate {
    pub theta: f64,
    pub value: f64,
    pub argmax_q: f64,
}

/// Lower estimate of the `exp(L^α)` norm with `θ = 1/α`.
pub fn exp_orlicz_estimate(report: &NormReport, theta: f64) -> Result<OrliczEstimate> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::InvalidParameter(format!("theta = {theta} must be positive")));
    }
    report
        .estimates
        .iter()
        .map(|e| (e.estimate * e.q.powf(-theta), e.q))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(value, argmax_q)| OrliczEstimate {
            theta,
            value,
            argmax_q,
        })
        .ok_or_else(|| Error::InvalidParameter("empty norm report".into()))
}

/// Default `θ = (n + 1) / 2`, pairing `exp(L^{2/(n+1)})` with `q^{(n+1)/2}` growth.
pub fn default_theta(n: usize) -> f64 {
    (n as f64 + 1.0) / 2.0
}

/// An estimated ratio with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub q: f64,
    pub ratio: f64,
    pub stderr: f64,
}

/// `‖Σ c_i r_i‖_q / (√q ‖c‖₂)` for each `q` in the grid.
pub fn khinchin_ratio(c: &[f64], grid: &QGrid, cfg: &McConfig) -> Result<Vec<RatioEstimate>> {
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if c.is_empty() || norm == 0.0 {
        return Err(Error::InvalidParameter("coefficient vector is zero".into()));
    }
    let words = c.len().div_ceil(64);
    let total: f64 = c.iter().sum();
    let c = c.to_vec();
    let f = FnIntegrand::new(words, move |w: &[u64]| {
        // Σ c_i (−1)^{η_i} = Σ c_i − 2 Σ_{η_i = 1} c_i
        let mut neg = 0.0;
        for (i, &ci) in c.iter().enumerate() {
            if (w[i / 64] >> (63 - i % 64)) & 1 == 1 {
                neg += ci;
            }
        }
        total - 2.0 * neg
    });
    let report = lq_norm_mc(&f, grid, cfg, "khinchin")?;
    Ok(report
        .estimates
        .iter()
        .map(|e| {
            let scale = e.q.sqrt() * norm;
            RatioEstimate {
                q: e.q,
                ratio: e.estimate / scale,
                stderr: e.stderr / scale,
            }
        })
        .collect())
}

/// `‖Σ_{|I|=k} c_I r_{I+K}‖_q / (q^{(n−1)/2} ‖c‖₂)` on `[0,1)^n`, where
/// `r_{I+K}(X) = Π_j r_{I_j + K_j}(x_j)`.
pub fn hyperbolic_lp_ratio(
    terms: &[(Vec<u32>, f64)],
    offset: &[u32],
    grid: &QGrid,
    cfg: &McConfig,
) -> Result<Vec<RatioEstimate>> {
    let n = offset.len();
    if n < 2 {
        return Err(Error::InvalidParameter("hyperbolic sums need n >= 2".into()));
    }
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidParameter("no terms".into()))?;
    let k: u32 = first.0.iter().sum();
    if k < n as u32 {
        return Err(Error::InvalidParameter(format!("|I| = {k} must be >= n = {n}")));
    }
    for (idx, _) in terms {
        if idx.len() != n
            || idx.iter().sum::<u32>() != k
            || idx.iter().zip(offset).any(|(&i, &o)| i < 1 || i + o > 64)
        {
            return Err(Error::InvalidParameter(format!(
                "index {idx:?} must have {n} entries >= 1 summing to {k}, with I + K <= 64"
            )));
        }
    }
    let norm = terms.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("coefficient vector is zero".into()));
    }
    // Precompute, per term, a mask per coordinate selecting digit I_j + K_j.
    let masks: Vec<(Vec<u64>, f64)> = terms
        .iter()
        .map(|(idx, c)| {
            (
                idx.iter()
                    .zip(offset)
                    .map(|(&i, &o)| 1u64 << (64 - (i + o)))
                    .collect(),
                *c,
            )
        })
        .collect();
    let f = FnIntegrand::new(n, move |w: &[u64]| {
        masks
            .iter()
            .map(|(m, c)| {
                let ones: u32 = m.iter().zip(w).map(|(a, b)| (a & b != 0) as u32).sum();
                if ones & 1 == 0 {
                    *c
                } else {
                    -*c
                }
            })
            .sum()
    });
    let report = lq_norm_mc(&f, grid, cfg, "hyperbolic")?;
    let a = (n as f64 - 1.0) / 2.0;
    Ok(report
        .estimates
        .iter()
        .map(|e| {
            let scale = e.q.powf(a) * norm;
            RatioEstimate {
                q: e.q,
                ratio: e.estimate / scale,
                stderr: e.stderr / scale,
            }
        })
        .collect())
}

/// All `I ∈ ℕ^n` with `I_j ≥ 1` and `|I| = k`.
pub fn hyperbolic_indices(n: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if k >= n as u32 {
        crate::f2::subspace::for_each_composition(n, k - n as u32, k, &mut |r| {
            out.push(r.iter().map(|v| v + 1).collect());
            true
        });
    }
    out
}
