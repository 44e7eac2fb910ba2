//! The discrepancy function of a shifted net, its truncated Walsh
//! approximation `ℳ` (by two independent routes), and the dual-group
//! structure `Λ(ρ̄)`, `Λ₀(ρ̄)`, `δ(ρ̄, Y)`.
//!
//! Exact grid evaluations run in scaled integers: for `Y ∈ Q^n(2^k)`, `k ≥ s`,
//! every quantity here times `2^{nk}` is an integer.

mod grid;

pub use grid::{fine_scaled, GridIter};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{reverse_bits, F2Subspace, DEFAULT_ENUMERATION_CAP_LOG2};
use crate::nets::{DigitShift, GeneratorSet, NetQuality, PointSet};
use crate::walsh::{fine_coefficient, rho_profile, walsh_nd_words, DyadicRational};

/// Which computation produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Direct,
    DualSum,
    PointCount,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(DyadicRational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(v) => v.to_f64(),
            Value::Float(v) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: Value,
    pub route: Route,
}

/// Nonzero elements of `θ(D^⊥)`, stored flat with stride `n`.
#[derive(Debug, Clone)]
struct DualEnumeration {
    indices: Vec<u64>,
    /// `W_L(T)` for the context's shift.
    signs: Vec<i8>,
    groups: BTreeMap<Vec<u32>, Vec<u32>>,
}

/// A net, its shift, and its dual distribution.
#[derive(Debug, Clone)]
pub struct DiscrepancyContext {
    gens: GeneratorSet,
    net: F2Subspace,
    dual: F2Subspace,
    shift: DigitShift,
    quality: NetQuality,
    /// Points of `D ⊕ T`, flat with stride `n`.
    points: Vec<u64>,
    enumeration: Option<DualEnumeration>,
}

impl DiscrepancyContext {
    /// Build with the default enumeration cap.
    pub fn new(gens: GeneratorSet, shift: Option<DigitShift>) -> Result<Self> {
        Self::with_cap(gens, shift, DEFAULT_ENUMERATION_CAP_LOG2)
    }

    /// The dual is enumerated (enabling the dual-sum route) when its
    /// dimension is at most `cap_log2`.
    pub fn with_cap(gens: GeneratorSet, shift: Option<DigitShift>, cap_log2: u32) -> Result<Self> {
        let (n, s) = (gens.dim(), gens.resolution());
        let shift = shift.unwrap_or_else(|| DigitShift::zero(n, s));
        let points: Vec<u64> = gens.values(Some(&shift))?.into_iter().flatten().collect();
        let net = gens.as_subspace();
        let dual = net.dual();
        let quality = gens.certify_deficiency(cap_log2.max(DEFAULT_ENUMERATION_CAP_LOG2));
        let enumeration = if dual.dim() <= cap_log2 as usize {
            Some(enumerate_dual(&dual, shift.point.values(), s)?)
        } else {
            None
        };
        Ok(Self {
            gens,
            net,
            dual,
            shift,
            quality,
            points,
            enumeration,
        })
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.gens.dim()
    }

    pub fn resolution(&self) -> u32 {
        self.gens.resolution()
    }

    pub fn net(&self) -> &F2Subspace {
        &self.net
    }

    pub fn dual(&self) -> &F2Subspace {
        &self.dual
    }

    pub fn shift(&self) -> &DigitShift {
        &self.shift
    }

    pub fn quality(&self) -> NetQuality {
        self.quality
    }

    /// Coordinates of the points of `D ⊕ T`, flat with stride `n`.
    pub fn shifted_values(&self) -> &[u64] {
        &self.points
    }

    pub fn point_set(&self) -> PointSet {
        PointSet::new(self.dim(), self.points.clone(), 1u64 << self.resolution())
            .expect("net values lie in the grid")
    }

    pub fn has_dual_enumeration(&self) -> bool {
        self.enumeration.is_some()
    }

    fn enumeration(&self) -> Result<&DualEnumeration> {
        self.enumeration.as_ref().ok_or_else(|| {
            Error::RouteUnavailable(format!(
                "dual of dimension {} was not enumerated",
                self.dual.dim()
            ))
        })
    }

    /// Nonzero elements `L` of `θ(D^⊥)`, each with `W_L(T)`.
    pub fn dual_terms(&self) -> Result<impl Iterator<Item = (&[u64], i8)> + '_> {
        let e = self.enumeration()?;
        Ok(e.indices.chunks(self.dim()).zip(e.signs.iter().copied()))
    }

    /// Profiles `ρ̄` that occur in `θ(D^⊥) ∖ {0}`, with group sizes.
    pub fn profiles(&self) -> Result<Vec<(Vec<u32>, usize)>> {
        Ok(self
            .enumeration()?
            .groups
            .iter()
            .map(|(k, v)| (k.clone(), v.len()))
            .collect())
    }

    fn check_y(&self, y: &[DyadicRational]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                n: self.dim(),
                s: self.resolution(),
                got_n: y.len(),
                got_s: self.resolution(),
            });
        }
        if let Some(bad) = y.iter().find(|v| !v.in_unit_interval_closed()) {
            return Err(Error::OutOfRange(bad.to_string()));
        }
        Ok(())
    }

    /// Resolution `k ≥ s` on which `y` lies, if the scaled integer path fits.
    fn grid_scale(&self, y: &[DyadicRational]) -> Option<u32> {
        let k = y
            .iter()
            .map(|v| v.exponent())
            .max()
            .unwrap_or(0)
            .max(self.resolution());
        let n = self.dim() as u32;
        (k <= 62 && n * k + (n + 1) * self.resolution() + 2 <= 126).then_some(k)
    }

    fn to_units(y: &[DyadicRational], k: u32) -> Vec<u64> {
        y.iter()
            .map(|v| {
                let scaled = v.mul_pow2(k as i32);
                u64::try_from(scaled.numerator()).expect("value in [0, 1] on the grid")
            })
            .collect()
    }

    fn from_units(v: i128, n: usize, k: u32) -> DyadicRational {
        DyadicRational::new(BigInt::from(v), n as u32 * k)
    }

    /// `𝒟_N[D ⊕ T; Y]` with the half-open box `[0, Y)`.
    pub fn discrepancy(&self, y: &[DyadicRational]) -> Result<DyadicRational> {
        self.check_y(y)?;
        match self.grid_scale(y) {
            Some(k) => Ok(Self::from_units(
                self.discrepancy_units(&Self::to_units(y, k), k),
                self.dim(),
                k,
            )),
            None => discrepancy_exact(&self.point_set(), y),
        }
    }

    /// `ℳ[D ⊕ T; Y] = 2^s Σ_{L ∈ θ(D^⊥) ∖ 0} W_L(T) χ̃_L(Y)`.
    pub fn m_dual_sum(&self, y: &[DyadicRational]) -> Result<DyadicRational> {
        self.check_y(y)?;
        if let Some(k) = self.grid_scale(y) {
            let units = Self::to_units(y, k);
            return Ok(Self::from_units(self.m_dual_sum_units(&units, k)?, self.dim(), k));
        }
        self.m_dual_sum_rational(y)
    }

    /// Dual-sum route in arbitrary-precision arithmetic.
    pub(crate) fn m_dual_sum_rational(&self, y: &[DyadicRational]) -> Result<DyadicRational> {
        let e = self.enumeration()?;
        let n = self.dim();
        let mut acc = DyadicRational::zero();
        for (l, &sign) in e.indices.chunks(n).zip(&e.signs) {
            let mut term = DyadicRational::from_int(sign as i64);
            for (&lj, yj) in l.iter().zip(y) {
                term = &term * &fine_coefficient(lj, yj)?;
                if term.is_zero() {
                    break;
                }
            }
            acc = &acc + &term;
        }
        Ok(acc.mul_pow2(self.resolution() as i32))
    }

    /// `ℳ[D ⊕ T; Y] = Σ_{X ∈ D ⊕ T} χ_s(Y, X) − 2^s Π y_j`, where `χ_s(y, ·)`
    /// is the average of `1_{[0,y)}` over the cell of length `2^{-s}`.
    pub fn m_direct(&self, y: &[DyadicRational]) -> Result<DyadicRational> {
        self.check_y(y)?;
        if let Some(k) = self.grid_scale(y) {
            let units = Self::to_units(y, k);
            return Ok(Self::from_units(self.m_direct_units(&units, k), self.dim(), k));
        }
        Ok(self.m_direct_rational(y))
    }

    /// Direct route in arbitrary-precision arithmetic.
    pub(crate) fn m_direct_rational(&self, y: &[DyadicRational]) -> DyadicRational {
        let s = self.resolution() as i32;
        let one = DyadicRational::one();
        let zero = DyadicRational::zero();
        let mut acc = DyadicRational::zero();
        for x in self.points.chunks(self.dim()) {
            let mut term = DyadicRational::one();
            for (&xj, yj) in x.iter().zip(y) {
                let v = &yj.mul_pow2(s) - &DyadicRational::from_int(xj as i64);
                let v = v.clamp(zero.clone(), one.clone());
                term = &term * &v;
                if term.is_zero() {
                    break;
                }
            }
            acc = &acc + &term;
        }
        let vol: DyadicRational = y.iter().fold(DyadicRational::one(), |a, b| &a * b);
        &acc - &vol.mul_pow2(s)
    }

    pub fn evaluate(&self, route: Route, y: &[DyadicRational]) -> Result<EvalResult> {
        let v = match route {
            Route::Direct => self.m_direct(y)?,
            Route::DualSum => self.m_dual_sum(y)?,
            Route::PointCount => self.discrepancy(y)?,
        };
        Ok(EvalResult {
            value: Value::Exact(v),
            route,
        })
    }

    /// `𝒟_N · 2^{nk}` for `Y = units / 2^k`, `k ≥ s`.
    pub fn discrepancy_units(&self, y: &[u64], k: u32) -> i128 {
        let n = self.dim();
        let up = k - self.resolution();
        let count = self
            .points
            .chunks(n)
            .filter(|x| x.iter().zip(y).all(|(&xj, &yj)| (xj << up) < yj))
            .count() as i128;
        (count << (n as u32 * k)) - self.volume_units(y)
    }

    /// `2^s Π y_j · 2^{nk}`.
    fn volume_units(&self, y: &[u64]) -> i128 {
        y.iter().fold(1i128, |a, &v| a * v as i128) << self.resolution()
    }

    /// `Σ_X Π_j χ_s(y_j, x_j) · 2^{nk}`.
    fn kernel_sum_units(&self, y: &[u64], k: u32) -> i128 {
        let s = self.resolution();
        let up = k - s;
        let cell = 1i128 << up;
        let mut acc = 0i128;
        'points: for x in self.points.chunks(self.dim()) {
            let mut term = 1i128;
            for (&xj, &yj) in x.iter().zip(y) {
                let overlap = (yj as i128 - ((xj as i128) << up)).clamp(0, cell);
                if overlap == 0 {
                    continue 'points;
                }
                term *= overlap << s;
            }
            acc += term;
        }
        acc
    }

    /// `ℳ · 2^{nk}` by the direct route.
    pub fn m_direct_units(&self, y: &[u64], k: u32) -> i128 {
        self.kernel_sum_units(y, k) - self.volume_units(y)
    }

    /// `ℳ · 2^{nk}` by the dual-sum route.
    pub fn m_dual_sum_units(&self, y: &[u64], k: u32) -> Result<i128> {
        let e = self.enumeration()?;
        let n = self.dim();
        let mut acc = 0i128;
        'terms: for (l, &sign) in e.indices.chunks(n).zip(&e.signs) {
            let mut term = sign as i128;
            for (&lj, &yj) in l.iter().zip(y) {
                let c = fine_scaled(lj, yj, k);
                if c == 0 {
                    continue 'terms;
                }
                term *= c as i128;
            }
            acc += term;
        }
        Ok(acc << self.resolution())
    }

    /// `|𝒟_N − ℳ| · 2^{nk}`; the volume terms cancel.
    pub fn gap_units(&self, y: &[u64], k: u32) -> i128 {
        let n = self.dim();
        let up = k - self.resolution();
        let count = self
            .points
            .chunks(n)
            .filter(|x| x.iter().zip(y).all(|(&xj, &yj)| (xj << up) < yj))
            .count() as i128;
        ((count << (n as u32 * k)) - self.kernel_sum_units(y, k)).abs()
    }

    /// Members of `Λ(ρ̄)`, the representative `L_ρ̄`, and `Λ₀(ρ̄)`.
    ///
    /// `Λ₀(ρ̄)` is the set of `L ∈ θ(D^⊥)` whose coordinates lie strictly below
    /// the top digit of `ρ̄`: `ℓ_i < 2^{ρ_i − 1}`, and `ℓ_i = 0` where
    /// `ρ_i = 0`. It is a subspace, and `Λ(ρ̄) = L_ρ̄ ⊕ Λ₀(ρ̄)` when `Λ(ρ̄)` is
    /// nonempty.
    pub fn lambda_group(&self, profile: &[u32]) -> Result<LambdaGroup> {
        let (n, s) = (self.dim(), self.resolution());
        if profile.len() != n || profile.iter().any(|&r| r > s) {
            return Err(Error::InvalidParameter(format!(
                "profile {profile:?} outside {{0..={s}}}^{n}"
            )));
        }
        let e = self.enumeration()?;
        let members: Vec<Vec<u64>> = e
            .groups
            .get(profile)
            .map(|ix| {
                ix.iter()
                    .map(|&i| e.indices[i as usize * n..(i as usize + 1) * n].to_vec())
                    .collect()
            })
            .unwrap_or_default();
        let representative = members.iter().min().cloned();
        let below = |l: &[u64]| {
            l.iter()
                .zip(profile)
                .all(|(&lj, &r)| if r == 0 { lj == 0 } else { lj < 1u64 << (r - 1) })
        };
        let mut lambda0: Vec<Vec<u64>> = vec![vec![0; n]];
        lambda0.extend(e.indices.chunks(n).filter(|l| below(l)).map(|l| l.to_vec()));
        lambda0.sort();
        let weight: u32 = profile.iter().sum();
        let bound_log2 = weight as i64 - s as i64 + self.quality.deficiency as i64;
        Ok(LambdaGroup {
            profile: profile.to_vec(),
            members,
            representative,
            lambda0_dim: self.lambda0_dim(profile),
            lambda0,
            bound_log2,
        })
    }

    /// `dim Λ₀(ρ̄)` by rank, without enumeration.
    fn lambda0_dim(&self, profile: &[u32]) -> usize {
        let top: Vec<u32> = profile.iter().map(|&r| r.saturating_sub(1)).collect();
        let amb = self.dual.ambient();
        let s = amb.s as usize;
        let mut inside = 0u128;
        for (j, &r) in top.iter().enumerate() {
            if r > 0 {
                inside |= ((1u128 << r) - 1) << (j * s);
            }
        }
        let restricted = F2Subspace::span_packed(amb, self.dual.basis_packed().iter().map(|b| b & !inside));
        self.dual.dim() - restricted.dim()
    }

    /// `δ(ρ̄, Y) = Σ_{L ∈ Λ₀(ρ̄)} W_L(Y)` for `Y` truncated to `s` digits,
    /// checked against `♯Λ₀(ρ̄) · [Y ⊥ Λ₀(ρ̄)]` and against
    /// `Σ_{L ∈ Λ(ρ̄)} W_L(Y) = W_{L_ρ̄}(Y) δ(ρ̄, Y)`.
    pub fn delta_indicator(&self, group: &LambdaGroup, y: &[DyadicRational]) -> Result<i64> {
        self.check_y(y)?;
        let s = self.resolution();
        let words: Vec<u64> = y
            .iter()
            .map(|v| {
                let w = v.digit_word();
                if s == 0 {
                    0
                } else {
                    w >> (64 - s) << (64 - s)
                }
            })
            .collect();
        self.delta_indicator_words(group, &words)
    }

    /// As [`Self::delta_indicator`], for `Y` given as digit words.
    pub fn delta_indicator_words(&self, group: &LambdaGroup, words: &[u64]) -> Result<i64> {
        let rep = group
            .representative
            .as_ref()
            .ok_or_else(|| Error::EmptyGroup(group.profile.clone()))?;
        let delta: i64 = group
            .lambda0
            .iter()
            .map(|l| walsh_nd_words(l, words) as i64)
            .sum();
        let orthogonal = group.lambda0.iter().all(|l| walsh_nd_words(l, words) == 1);
        let expect = if orthogonal { group.lambda0.len() as i64 } else { 0 };
        if delta != expect {
            return Err(Error::IdentityViolation(format!(
                "δ(ρ̄,Y) = {delta} but ♯Λ₀·[Y ⊥ Λ₀] = {expect} for ρ̄ = {:?}",
                group.profile
            )));
        }
        let group_sum: i64 = group
            .members
            .iter()
            .map(|l| walsh_nd_words(l, words) as i64)
            .sum();
        let rhs = walsh_nd_words(rep, words) as i64 * delta;
        if group_sum != rhs {
            return Err(Error::IdentityViolation(format!(
                "Σ_Λ W_L(Y) = {group_sum} but W_Lρ(Y)·δ = {rhs} for ρ̄ = {:?}",
                group.profile
            )));
        }
        Ok(delta)
    }
}

fn enumerate_dual(dual: &F2Subspace, shift: &[u64], s: u32) -> Result<DualEnumeration> {
    let amb = dual.ambient();
    let n = amb.n;
    let t_rev: Vec<u64> = shift.iter().map(|&t| reverse_bits(t, s)).collect();
    let size = (1usize << dual.dim()) - 1;
    let mut indices = Vec::with_capacity(size * n);
    let mut signs = Vec::with_capacity(size);
    let mut groups: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    for (i, packed) in dual.enumerate_packed(u32::MAX)?.skip(1).enumerate() {
        let l = amb.unpack_values(packed);
        let ones: u32 = l.iter().zip(&t_rev).map(|(a, b)| (a & b).count_ones()).sum();
        signs.push(if ones & 1 == 0 { 1 } else { -1 });
        groups.entry(rho_profile(&l)).or_default().push(i as u32);
        indices.extend_from_slice(&l);
    }
    Ok(DualEnumeration {
        indices,
        signs,
        groups,
    })
}

/// `Λ(ρ̄)` with its representative and `Λ₀(ρ̄)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaGroup {
    pub profile: Vec<u32>,
    pub members: Vec<Vec<u64>>,
    /// Lexicographically smallest member.
    pub representative: Option<Vec<u64>>,
    /// All of `Λ₀(ρ̄)`, including `0`.
    pub lambda0: Vec<Vec<u64>>,
    /// `dim Λ₀(ρ̄)` computed by rank; `2^{lambda0_dim} = ♯Λ₀(ρ̄)`.
    pub lambda0_dim: usize,
    /// `|ρ̄| − s + δ`.
    pub bound_log2: i64,
}

impl LambdaGroup {
    pub fn lambda0_count(&self) -> usize {
        self.lambda0.len()
    }

    /// `♯Λ₀(ρ̄) ≤ 2^{|ρ̄| − s + δ}`.
    pub fn within_bound(&self) -> bool {
        self.bound_log2 >= 0 && (self.lambda0.len() as u128) <= 1u128 << self.bound_log2.min(127)
    }
}

/// `♯(P ∩ [0, Y)) − N Π y_j`, exact.
pub fn discrepancy_exact(points: &PointSet, y: &[DyadicRational]) -> Result<DyadicRational> {
    if y.len() != points.dim() {
        return Err(Error::DimensionMismatch {
            n: points.dim(),
            s: 0,
            got_n: y.len(),
            got_s: 0,
        });
    }
    if let Some(bad) = y.iter().find(|v| !v.in_unit_interval_closed()) {
        return Err(Error::OutOfRange(bad.to_string()));
    }
    let den = BigInt::from(points.denominator());
    // x/den < a/2^e  ⇔  x·2^e < a·den
    let bounds: Vec<(BigInt, u32)> = y
        .iter()
        .map(|v| (v.numerator() * &den, v.exponent()))
        .collect();
    let count = points
        .iter()
        .filter(|x| {
            x.iter()
                .zip(&bounds)
                .all(|(&xj, (rhs, e))| (BigInt::from(xj) << *e) < *rhs)
        })
        .count();
    let vol = y.iter().fold(DyadicRational::one(), |a, b| &a * b);
    Ok(&DyadicRational::from_int(count as i64) - &(&vol * &DyadicRational::from_int(points.len() as i64)))
}

/// Floating-point `𝒟_N` for any point set; `[0, Y)` half-open.
pub fn discrepancy_f64(points: &PointSet, y: &[f64]) -> f64 {
    let den = points.denominator() as f64;
    let count = points
        .iter()
        .filter(|x| x.iter().zip(y).all(|(&xj, &yj)| (xj as f64) < yj * den))
        .count();
    count as f64 - points.len() as f64 * y.iter().product::<f64>()
}

/// Largest `|𝒟_N − ℳ|` over a sample of grid points, with its location.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub max_gap: f64,
    /// Exact maximum as `num/2^exp`.
    pub max_gap_exact: String,
    pub argmax: Vec<f64>,
    /// `n · 2^δ`.
    pub bound: u64,
    pub evaluated: usize,
}

impl GapReport {
    pub fn within_bound(&self) -> bool {
        self.max_gap <= self.bound as f64
    }
}

/// Max of `|𝒟_N − ℳ|` over `Y` in `samples`, each `Y` on the grid `Q^n(2^k)`, `k ≥ s`.
pub fn approximation_gap<I>(ctx: &DiscrepancyContext, k: u32, samples: I) -> Result<GapReport>
where
    I: IntoIterator<Item = Vec<u64>>,
{
    let (n, s) = (ctx.dim(), ctx.resolution());
    if k < s || n as u32 * k + s + 2 > 126 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution {k} must satisfy s <= k and fit the scaled path"
        )));
    }
    let mut best = (-1i128, Vec::new());
    let mut evaluated = 0;
    for y in samples {
        if y.len() != n || y.iter().any(|&v| v > 1u64 << k) {
            return Err(Error::OutOfRange(format!("{y:?} on Q^{n}(2^{k})")));
        }
        let g = ctx.gap_units(&y, k);
        evaluated += 1;
        if g > best.0 {
            best = (g, y);
        }
    }
    let exact = DiscrepancyContext::from_units(best.0.max(0), n, k);
    let scale = (k as f64).exp2();
    Ok(GapReport {
        max_gap: exact.to_f64(),
        max_gap_exact: exact.to_string(),
        argmax: best.1.iter().map(|&v| v as f64 / scale).collect(),
        bound: n as u64 * (1u64 << ctx.quality().deficiency),
        evaluated,
    })
}

/// Exhaustive gap over `Q^n(2^k)`.
pub fn approximation_gap_grid(ctx: &DiscrepancyContext, k: u32) -> Result<GapReport> {
    approximation_gap(ctx, k, GridIter::new(ctx.dim(), k))
}

/// A failed Poisson-summation check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoissonWitness {
    pub index: Vec<u64>,
    pub sum: i64,
    pub expected: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoissonReport {
    pub checked: usize,
    pub witness: Option<PoissonWitness>,
}

impl PoissonReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

fn words_of(values: &[u64], s: u32) -> Vec<u64> {
    values
        .iter()
        .map(|&v| if s == 0 { 0 } else { v << (64 - s) })
        .collect()
}

/// `Σ_{X ∈ D} W_L(X) = ♯D · [L ∈ θ(claimed_dual)]` for every `L ∈ N₀^n(2^s)`.
pub fn poisson_summation_check(net: &F2Subspace, claimed_dual: &F2Subspace) -> Result<PoissonReport> {
    let amb = net.ambient();
    let points: Vec<Vec<u64>> = net
        .enumerate(DEFAULT_ENUMERATION_CAP_LOG2)?
        .map(|p| words_of(p.values(), amb.s))
        .collect();
    let size = points.len() as i64;
    let mut checked = 0;
    for l in GridIter::new(amb.n, amb.s) {
        let sum: i64 = points.iter().map(|x| walsh_nd_words(&l, x) as i64).sum();
        let expected = if claimed_dual.contains_packed(amb.pack_values(&l)) {
            size
        } else {
            0
        };
        checked += 1;
        if sum != expected {
            return Ok(PoissonReport {
                checked,
                witness: Some(PoissonWitness { index: l, sum, expected }),
            });
        }
    }
    Ok(PoissonReport { checked, witness: None })
}

/// The dual form: `Σ_{L ∈ θ(D)} W_L(X) = ♯D · [X ∈ D^⊥]` for every `X`.
pub fn dual_poisson_check(net: &F2Subspace) -> Result<PoissonReport> {
    let amb = net.ambient();
    let indices: Vec<Vec<u64>> = net
        .enumerate(DEFAULT_ENUMERATION_CAP_LOG2)?
        .map(|p| p.values().to_vec())
        .collect();
    let dual = net.dual();
    let size = indices.len() as i64;
    let mut checked = 0;
    for x in GridIter::new(amb.n, amb.s) {
        let words = words_of(&x, amb.s);
        let sum: i64 = indices.iter().map(|l| walsh_nd_words(l, &words) as i64).sum();
        let expected = if dual.contains_packed(amb.pack_values(&x)) { size } else { 0 };
        checked += 1;
        if sum != expected {
            return Ok(PoissonReport {
                checked,
                witness: Some(PoissonWitness { index: x, sum, expected }),
            });
        }
    }
    Ok(PoissonReport { checked, witness: None })
}

/// `Σ_Y ℳ(Y) = Σ_Y ℳ(Y ⊕ Z)` over `Q^n(2^k)`, exact.
pub fn decoupling_check(ctx: &DiscrepancyContext, z: &[u64], k: u32) -> bool {
    let mut plain = 0i128;
    let mut moved = 0i128;
    for y in GridIter::new(ctx.dim(), k) {
        plain += ctx.m_direct_units(&y, k);
        let yz: Vec<u64> = y.iter().zip(z).map(|(a, b)| a ^ b).collect();
        moved += ctx.m_direct_units(&yz, k);
    }
    plain == moved
}

#[cfg(test)]
mod tests;
