use rayon::prelude::*;
use serde::Serialize;

use super::{derive_seed, lq_norm_mc, with_pool, ApproximationIntegrand, DiscrepancyIntegrand, McConfig, QGrid};
use crate::error::Result;
use crate::nets::ShiftStream;
use crate::GeneratorSet;

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub n: usize,
    pub s_values: Vec<u32>,
    pub shifts: usize,
    pub grid: QGrid,
    pub mc: McConfig,
    /// Also estimate `‖ℳ‖_{L_q[Y×T]}` per `s`.
    pub with_approximation: bool,
}

/// `‖𝒟_N‖_q` for one `(s, shift, q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub s: u32,
    pub shift: usize,
    pub q: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// `‖𝒟_N‖_q / s^{(n−1)/2}`.
    pub ratio: f64,
    /// `‖𝒟_N‖_q / (q^{(n+1)/2} s^{(n−1)/2})`.
    pub normalized: f64,
}

/// Min / median / max of the normalized ratio over shifts for one `(s, q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub s: u32,
    pub q: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// `‖ℳ‖_{L_q[Y×T]}` for one `(s, q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximationRow {
    pub s: u32,
    pub q: f64,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub n: usize,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
    pub approximation: Vec<ApproximationRow>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

impl SweepTable {
    /// `max_s median / min_s median` of the normalized ratio at fixed `q`.
    pub fn spread(&self, q: f64) -> Option<f64> {
        let meds: Vec<f64> = self
            .summary
            .iter()
            .filter(|r| r.q == q)
            .map(|r| r.median)
            .collect();
        let max = meds.iter().copied().fold(f64::NAN, f64::max);
        let min = meds.iter().copied().fold(f64::NAN, f64::min);
        (!meds.is_empty() && min > 0.0).then(|| max / min)
    }

    /// Largest `‖ℳ‖_{q₂} / ‖ℳ‖_{q₁} · (q₁/q₂)^{(n+1)/2}` over consecutive
    /// grid points at fixed `s`; at most 1 means growth no faster than
    /// `q^{(n+1)/2}`.
    pub fn approximation_growth(&self, s: u32) -> Option<f64> {
        let a = (self.n as f64 + 1.0) / 2.0;
        let rows: Vec<&ApproximationRow> = self.approximation.iter().filter(|r| r.s == s).collect();
        rows.windows(2)
            .filter(|w| w[0].estimate > 0.0)
            .map(|w| w[1].estimate / w[0].estimate * (w[0].q / w[1].q).powf(a))
            .reduce(f64::max)
    }
}

/// For each `s`, draw `shifts` digit shifts and estimate `‖𝒟_N‖_q` over `Y`.
pub fn scaling_sweep<F>(cfg: &SweepConfig, build: F) -> Result<SweepTable>
where
    F: Fn(u32) -> Result<GeneratorSet> + Sync,
{
    let n = cfg.n;
    let nets: Vec<GeneratorSet> = cfg.s_values.iter().map(|&s| build(s)).collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for g in &nets {
        let s = g.resolution();
        let mut stream = ShiftStream::new(derive_seed(cfg.mc.seed, &[0x5417, s as u64]));
        for r in 0..cfg.shifts {
            jobs.push((g, r, stream.next_shift(g.dim(), s)));
        }
    }
    let inner = McConfig { workers: 0, ..cfg.mc };
    let b = (n as f64 - 1.0) / 2.0;
    let a = (n as f64 + 1.0) / 2.0;
    let (reports, approx) = with_pool(cfg.mc.workers, || {
        let reports: Vec<Result<Vec<SweepRow>>> = jobs
            .par_iter()
            .map(|(g, r, shift)| {
                let s = g.resolution();
                let mc = McConfig {
                    seed: derive_seed(cfg.mc.seed, &[s as u64, *r as u64]),
                    ..inner
                };
                let f = DiscrepancyIntegrand::new(g, Some(shift));
                let rep = lq_norm_mc(&f, &cfg.grid, &mc, "discrepancy")?;
                let sf = (s as f64).powf(b);
                Ok(rep
                    .estimates
                    .iter()
                    .map(|e| SweepRow {
                        s,
                        shift: *r,
                        q: e.q,
                        estimate: e.estimate,
                        stderr: e.stderr,
                        ratio: e.estimate / sf,
                        normalized: e.estimate / (sf * e.q.powf(a)),
                    })
                    .collect())
            })
            .collect();
        let approx: Vec<Result<Vec<ApproximationRow>>> = if cfg.with_approximation {
            nets.par_iter()
                .map(|g| {
                    let s = g.resolution();
                    let mc = McConfig {
                        seed: derive_seed(cfg.mc.seed, &[0xa9, s as u64]),
                        ..inner
                    };
                    let f = ApproximationIntegrand::new(g, None);
                    let rep = lq_norm_mc(&f, &cfg.grid, &mc, "approximation")?;
                    Ok(rep
                        .estimates
                        .iter()
                        .map(|e| ApproximationRow {
                            s,
                            q: e.q,
                            estimate: e.estimate,
                            stderr: e.stderr,
                        })
                        .collect())
                })
                .collect()
        } else {
            Vec::new()
        };
        (reports, approx)
    });
    let mut rows = Vec::new();
    for r in reports {
        rows.extend(r?);
    }
    let mut approximation = Vec::new();
    for r in approx {
        approximation.extend(r?);
    }
    let mut summary = Vec::new();
    for g in &nets {
        for &q in cfg.grid.values() {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| r.s == g.resolution() && r.q == q)
                .map(|r| r.normalized)
                .collect();
            if v.is_empty() {
                continue;
            }
            let med = median(&mut v);
            summary.push(SweepSummary {
                s: g.resolution(),
                q,
                min: v[0],
                median: med,
                max: v[v.len() - 1],
            });
        }
    }
    Ok(SweepTable {
        n,
        rows,
        summary,
        approximation,
    })
}
