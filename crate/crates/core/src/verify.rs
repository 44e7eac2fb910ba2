//! The exact identity suite behind `dyadnet verify`.
//!
//! Every check returns an [`IdentityResult`] naming the identity and, on
//! failure, a witness.

use serde::Serialize;

use crate::discrepancy::{
    approximation_gap_grid, dual_poisson_check, poisson_summation_check, DiscrepancyContext, GridIter,
};
use crate::error::Result;
use crate::f2::{F2Subspace, DEFAULT_ENUMERATION_CAP_LOG2};
use crate::nets::{verify_box_counts, DigitShift, GeneratorSet};
use crate::walsh::{fine_coefficient, rho, walsh_nd_words, walsh_word, DyadicRational};

/// Exhaustive grids larger than this many points are skipped.
const GRID_LIMIT_LOG2: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub name: &'static str,
    /// The statement being checked.
    pub anchor: &'static str,
    pub status: Status,
    pub checked: u64,
    pub detail: String,
    pub witness: Option<String>,
}

impl IdentityResult {
    fn new(name: &'static str, anchor: &'static str) -> Self {
        Self {
            name,
            anchor,
            status: Status::Pass,
            checked: 0,
            detail: String::new(),
            witness: None,
        }
    }

    fn fail(mut self, witness: String) -> Self {
        self.status = Status::Fail;
        self.witness = Some(witness);
        self
    }

    fn skip(mut self, why: String) -> Self {
        self.status = Status::Skipped;
        self.detail = why;
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub n: usize,
    pub s: u32,
    pub deficiency: u32,
    pub results: Vec<IdentityResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(IdentityResult::passed)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    /// Replace the dual by a perturbed basis before the Poisson check
    /// (negative control: the check must fail).
    pub corrupt_dual: bool,
    /// Largest `ℓ` (exclusive) and grid resolution for the Fine checks.
    pub fine_max_ell: Option<u64>,
    pub fine_resolution: Option<u32>,
}

/// Flip the lowest digit of the first basis vector.
pub fn corrupt(dual: &F2Subspace) -> F2Subspace {
    let mut basis = dual.basis_packed().to_vec();
    if let Some(b) = basis.first_mut() {
        *b ^= 1;
    } else {
        basis.push(1);
    }
    F2Subspace::span_packed(dual.ambient(), basis)
}

pub fn run_suite(gens: &GeneratorSet, shift: Option<DigitShift>, opts: &SuiteOptions) -> Result<SuiteReport> {
    let (n, s) = (gens.dim(), gens.resolution());
    let ctx = DiscrepancyContext::new(gens.clone(), shift)?;
    let mut results = vec![
        duality_check(ctx.net()),
        poisson_check(&ctx, opts.corrupt_dual)?,
        box_count_check(&ctx),
        route_equivalence_check(&ctx),
        gap_check(&ctx)?,
        delta_check(&ctx),
        character_pairing_check(n, s)?,
    ];
    let ell = opts.fine_max_ell.unwrap_or(64);
    let k = opts.fine_resolution.unwrap_or(8);
    results.push(fine_formula_check(ell, k));
    results.push(fine_square_check(ell));
    Ok(SuiteReport {
        n,
        s,
        deficiency: ctx.quality().deficiency,
        results,
    })
}

pub fn duality_check(net: &F2Subspace) -> IdentityResult {
    let mut r = IdentityResult::new(
        "duality-involution",
        "(D^⊥)^⊥ = D and dim D + dim D^⊥ = n·s",
    );
    let dual = net.dual();
    r.checked = 1;
    if dual.dim() + net.dim() != net.ambient().bits() {
        return r.fail(format!("dim D = {}, dim D^⊥ = {}", net.dim(), dual.dim()));
    }
    if &dual.dual() != net {
        return r.fail("second annihilator differs from D".into());
    }
    r
}

fn poisson_check(ctx: &DiscrepancyContext, corrupt_dual: bool) -> Result<IdentityResult> {
    let r = IdentityResult::new(
        "poisson-summation",
        "Σ_{X∈D} W_L(X) = ♯D·[L ∈ θ(D^⊥)] for all L ∈ N₀^n(2^s), and the dual form",
    );
    let bits = ctx.net().ambient().bits() as u32;
    if bits > GRID_LIMIT_LOG2 {
        return Ok(r.skip(format!("2^{bits} indices exceed the exhaustive limit")));
    }
    let claimed = if corrupt_dual {
        corrupt(ctx.dual())
    } else {
        ctx.dual().clone()
    };
    let primal = poisson_summation_check(ctx.net(), &claimed)?;
    let mut r = IdentityResult { checked: primal.checked as u64, ..r };
    if let Some(w) = primal.witness {
        return Ok(r.fail(format!(
            "L = {:?}: Σ W_L = {}, expected {}",
            w.index, w.sum, w.expected
        )));
    }
    let dual = dual_poisson_check(ctx.net())?;
    r.checked += dual.checked as u64;
    if let Some(w) = dual.witness {
        return Ok(r.fail(format!(
            "X = {:?}: Σ_{{L∈θ(D)}} W_L(X) = {}, expected {}",
            w.index, w.sum, w.expected
        )));
    }
    Ok(r)
}

fn box_count_check(ctx: &DiscrepancyContext) -> IdentityResult {
    let mut r = IdentityResult::new(
        "deficiency-box-counts",
        "every dyadic box of volume 2^{-s+δ} holds exactly 2^δ points, and δ is minimal",
    );
    let q = ctx.quality();
    r.detail = format!(
        "δ = {}, ρ(D^⊥) = {:?}, exhaustive = {}",
        q.deficiency, q.dual_rt_weight, q.exhaustive
    );
    let pts = ctx.point_set();
    r.checked = 1;
    match verify_box_counts(&pts, q.deficiency) {
        Ok(true) => {}
        Ok(false) => return r.fail(format!("some box violates δ = {}", q.deficiency)),
        Err(e) => return r.fail(e.to_string()),
    }
    if q.deficiency > 0 && q.exhaustive {
        r.checked += 1;
        if verify_box_counts(&pts, q.deficiency - 1) == Ok(true) {
            return r.fail(format!("boxes also balanced at δ − 1 = {}", q.deficiency - 1));
        }
    }
    r
}

/// `m_dual_sum = m_direct` on every `Y ∈ Q^n(2^s)`.
pub fn route_equivalence_check(ctx: &DiscrepancyContext) -> IdentityResult {
    route_equivalence_on(ctx, ctx.resolution())
}

pub fn route_equivalence_on(ctx: &DiscrepancyContext, k: u32) -> IdentityResult {
    let r = IdentityResult::new(
        "route-equivalence",
        "Σ_X χ_s(Y,X) − 2^s Πy_j = 2^s Σ_{L∈θ(D^⊥)∖0} W_L(T) χ̃_L(Y) on the grid",
    );
    let bits = ctx.dim() as u32 * k;
    if bits > GRID_LIMIT_LOG2 {
        return r.skip(format!("grid of 2^{bits} points exceeds the exhaustive limit"));
    }
    if !ctx.has_dual_enumeration() {
        return r.skip("dual not enumerated".into());
    }
    let mut r = r;
    for y in GridIter::new(ctx.dim(), k) {
        let direct = ctx.m_direct_units(&y, k);
        let dual = ctx.m_dual_sum_units(&y, k).expect("enumeration present");
        r.checked += 1;
        if direct != dual {
            return r.fail(format!(
                "Y = {y:?}/2^{k}: direct {direct}, dual sum {dual} (units of 2^-{})",
                ctx.dim() as u32 * k
            ));
        }
    }
    r
}

fn gap_check(ctx: &DiscrepancyContext) -> Result<IdentityResult> {
    let r = IdentityResult::new("approximation-gap", "sup_Y |𝒟_N − ℳ| ≤ n·2^δ");
    let k = ctx.resolution() + 2;
    let bits = ctx.dim() as u32 * k;
    if bits > GRID_LIMIT_LOG2 {
        return Ok(r.skip(format!("grid of 2^{bits} points exceeds the exhaustive limit")));
    }
    let gap = approximation_gap_grid(ctx, k)?;
    let mut r = IdentityResult {
        checked: gap.evaluated as u64,
        detail: format!("max gap {} (bound {})", gap.max_gap_exact, gap.bound),
        ..r
    };
    if !gap.within_bound() {
        r = r.fail(format!("Y = {:?}: gap {}", gap.argmax, gap.max_gap_exact));
    }
    Ok(r)
}

/// Values, mean and cardinality bound of `δ(ρ̄, Y)` for every occurring `ρ̄`.
pub fn delta_check(ctx: &DiscrepancyContext) -> IdentityResult {
    let r = IdentityResult::new(
        "delta-identities",
        "δ(ρ̄,Y) ∈ {0, ♯Λ₀(ρ̄)}, mean over Y equals 1, ♯Λ₀(ρ̄) ≤ 2^{|ρ̄|−s+δ}",
    );
    let (n, s) = (ctx.dim(), ctx.resolution());
    let bits = n as u32 * s;
    if bits > GRID_LIMIT_LOG2 {
        return r.skip(format!("grid of 2^{bits} points exceeds the exhaustive limit"));
    }
    let profiles = match ctx.profiles() {
        Ok(p) => p,
        Err(e) => return r.skip(e.to_string()),
    };
    let mut r = r;
    let words_of = |y: &[u64]| -> Vec<u64> { y.iter().map(|&v| if s == 0 { 0 } else { v << (64 - s) }).collect() };
    for (profile, _) in profiles {
        let grp = match ctx.lambda_group(&profile) {
            Ok(g) => g,
            Err(e) => return r.fail(format!("ρ̄ = {profile:?}: {e}")),
        };
        if !grp.within_bound() || grp.lambda0_count() != 1usize << grp.lambda0_dim {
            return r.fail(format!(
                "ρ̄ = {profile:?}: ♯Λ₀ = {} vs bound 2^{} (rank dim {})",
                grp.lambda0_count(),
                grp.bound_log2,
                grp.lambda0_dim
            ));
        }
        let card = grp.lambda0_count() as i64;
        let mut total = 0i64;
        for y in GridIter::new(n, s) {
            let d = match ctx.delta_indicator_words(&grp, &words_of(&y)) {
                Ok(d) => d,
                Err(e) => return r.fail(format!("ρ̄ = {profile:?}, Y = {y:?}: {e}")),
            };
            r.checked += 1;
            if d != 0 && d != card {
                return r.fail(format!("ρ̄ = {profile:?}, Y = {y:?}: δ = {d}"));
            }
            total += d;
        }
        if total != 1i64 << bits {
            return r.fail(format!("ρ̄ = {profile:?}: mean of δ is {total}/2^{bits}"));
        }
    }
    r
}

/// Closed-form `χ̃_ℓ(y)` against running sums of `w_ℓ` over cells of
/// length `2^{-k}`, for all `ℓ < max_ell` and `y ∈ Q(2^k) ∪ {1}`.
pub fn fine_formula_check(max_ell: u64, k: u32) -> IdentityResult {
    let mut r = IdentityResult::new(
        "fine-formula",
        "∫_0^y w_ℓ = 2^{-ρ(ℓ)-1} w_{τ(ℓ)}(y) ω_{ρ(ℓ)}(y)",
    );
    if max_ell > 1u64 << k {
        return r.skip(format!("ℓ < {max_ell} needs cells finer than 2^-{k}"));
    }
    for ell in 0..max_ell {
        let mut running = 0i64;
        for u in 0..=(1u64 << k) {
            let oracle = DyadicRational::from_parts(running, k);
            let y = DyadicRational::from_parts(u as i64, k);
            r.checked += 1;
            match fine_coefficient(ell, &y) {
                Ok(v) if v == oracle => {}
                Ok(v) => return r.fail(format!("ℓ = {ell}, y = {y}: formula {v}, quadrature {oracle}")),
                Err(e) => return r.fail(format!("ℓ = {ell}, y = {y}: {e}")),
            }
            if u < 1u64 << k {
                let word = if k == 0 { 0 } else { u << (64 - k) };
                running += walsh_word(ell, word) as i64;
            }
        }
    }
    r
}

/// `∫_0^1 χ̃_ℓ² = 2^{-2ρ(ℓ)}/3`, by exact quadrature of the piecewise linear
/// `χ̃_ℓ` on cells of length `2^{-k}`, `2^k ≥ max_ell`.
pub fn fine_square_check(max_ell: u64) -> IdentityResult {
    let mut r = IdentityResult::new("fine-square-integral", "∫_0^1 χ̃_ℓ(y)² dy = 2^{-2ρ(ℓ)}/3");
    let k = 64 - max_ell.max(2).saturating_sub(1).leading_zeros();
    for ell in 0..max_ell {
        // 3·∫ = Σ_cells h (a² + ab + b²)
        let mut acc = DyadicRational::zero();
        let mut prev = DyadicRational::zero();
        for u in 1..=(1u64 << k) {
            let next = match fine_coefficient(ell, &DyadicRational::from_parts(u as i64, k)) {
                Ok(v) => v,
                Err(e) => return r.fail(format!("ℓ = {ell}: {e}")),
            };
            let cell = &(&(&prev * &prev) + &(&prev * &next)) + &(&next * &next);
            acc = &acc + &cell.mul_pow2(-(k as i32));
            prev = next;
        }
        r.checked += 1;
        let expect = DyadicRational::pow2(-2 * rho(ell) as i32);
        if acc != expect {
            return r.fail(format!("ℓ = {ell}: 3∫χ̃² = {acc}, expected {expect}"));
        }
    }
    r
}

/// `W_{θ(Y)}(X) = (−1)^{⟨X,Y⟩}` over all pairs in `Q^n(2^s)`.
pub fn character_pairing_check(n: usize, s: u32) -> Result<IdentityResult> {
    let mut r = IdentityResult::new("character-pairing", "W_{θ(Y)}(X) = (−1)^{⟨X,Y⟩}");
    let amb = crate::f2::Ambient::new(n, s)?;
    if 2 * amb.bits() > 24 {
        return Ok(r.skip("too many pairs".into()));
    }
    for x in GridIter::new(n, s) {
        let words: Vec<u64> = x.iter().map(|&v| if s == 0 { 0 } else { v << (64 - s) }).collect();
        let px = amb.pack_values(&x);
        for y in GridIter::new(n, s) {
            r.checked += 1;
            let w = walsh_nd_words(&y, &words);
            let p = amb.pairing_packed(px, amb.pack_values(&y));
            if (w == 1) != (p == 0) {
                return Ok(r.fail(format!("X = {x:?}, Y = {y:?}")));
            }
        }
    }
    Ok(r)
}

/// Duality involution and dimension formula on random subspaces.
pub fn random_duality_check(count: usize, max_n: usize, max_s: u32, seed: u64) -> Result<IdentityResult> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut r = IdentityResult::new(
        "duality-involution",
        "(D^⊥)^⊥ = D and dim D + dim D^⊥ = n·s on random subspaces",
    );
    for _ in 0..count {
        let n = rng.gen_range(1..=max_n);
        let s = rng.gen_range(1..=max_s);
        let amb = crate::f2::Ambient::new(n, s)?;
        let gens = rng.gen_range(0..=amb.bits());
        let mask = if amb.bits() == 128 { u128::MAX } else { (1u128 << amb.bits()) - 1 };
        let sub = F2Subspace::span_packed(amb, (0..gens).map(|_| rng.gen::<u128>() & mask));
        let single = duality_check(&sub);
        r.checked += 1;
        if single.status == Status::Fail {
            return Ok(r.fail(format!("n = {n}, s = {s}: {}", single.witness.unwrap_or_default())));
        }
    }
    Ok(r)
}

/// Default enumeration cap, re-exported for report headers.
pub const ENUMERATION_CAP_LOG2: u32 = DEFAULT_ENUMERATION_CAP_LOG2;
