use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Ambient, DyadicPoint};
use crate::error::{Error, Result};

/// Default enumeration cap: `2^24` subspace elements.
pub const DEFAULT_ENUMERATION_CAP_LOG2: u32 = 24;

/// Upper bound on RT profiles inspected by the rank search before falling
/// back to random sampling.
const PROFILE_BUDGET: u64 = 1 << 22;
const RANDOM_PROBES: usize = 1 << 16;

#[inline]
fn top_bit(v: u128) -> u32 {
    127 - v.leading_zeros()
}

/// Reduce `vectors` to reduced row-echelon form (pivot = highest set bit),
/// rows sorted by decreasing pivot. The result is canonical for the span.
fn rref<I: IntoIterator<Item = u128>>(vectors: I) -> Vec<u128> {
    let mut rows: Vec<u128> = Vec::new();
    for mut v in vectors {
        for r in &rows {
            if (v >> top_bit(*r)) & 1 == 1 {
                v ^= r;
            }
        }
        if v == 0 {
            continue;
        }
        let p = top_bit(v);
        for r in rows.iter_mut() {
            if (*r >> p) & 1 == 1 {
                *r ^= v;
            }
        }
        rows.push(v);
    }
    rows.sort_unstable_by(|a, b| b.cmp(a));
    rows
}

fn rank<I: IntoIterator<Item = u128>>(vectors: I) -> usize {
    // Plain elimination is enough for a rank.
    let mut pivots: Vec<u128> = Vec::new();
    for mut v in vectors {
        for p in &pivots {
            if (v >> top_bit(*p)) & 1 == 1 {
                v ^= p;
            }
        }
        if v != 0 {
            pivots.push(v);
            pivots.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    pivots.len()
}

/// Solutions `x` of `popcount(row & x) ≡ 0` for every row, over `bits` columns.
fn kernel(rows: &[u128], bits: usize) -> Vec<u128> {
    let reduced = rref(rows.iter().copied());
    let pivots: Vec<u32> = reduced.iter().map(|r| top_bit(*r)).collect();
    let mut out = Vec::new();
    for f in 0..bits as u32 {
        if pivots.contains(&f) {
            continue;
        }
        let mut x = 1u128 << f;
        for (r, &p) in reduced.iter().zip(&pivots) {
            if (r >> f) & 1 == 1 {
                x |= 1u128 << p;
            }
        }
        out.push(x);
    }
    out
}

/// How a subspace RT weight was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMethod {
    Enumeration,
    ProfileSearch,
    RandomSearch,
}

/// Minimum RT weight over the nonzero elements of a subspace.
///
/// When `exhaustive` is false the value is the smallest weight found by
/// random probing, i.e. an upper bound on the true minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RtWeight {
    pub value: u32,
    pub exhaustive: bool,
    pub method: WeightMethod,
}

/// A subspace of `Q^n(2^s)`, stored as a canonical reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct F2Subspace {
    ambient: Ambient,
    basis: Vec<u128>,
}

impl F2Subspace {
    pub fn zero(ambient: Ambient) -> Self {
        Self {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: Ambient) -> Self {
        Self {
            ambient,
            basis: (0..ambient.bits()).rev().map(|b| 1u128 << b).collect(),
        }
    }

    /// Span of arbitrary packed vectors.
    pub fn span_packed<I: IntoIterator<Item = u128>>(ambient: Ambient, vectors: I) -> Self {
        Self {
            ambient,
            basis: rref(vectors),
        }
    }

    pub fn span(ambient: Ambient, points: &[DyadicPoint]) -> Result<Self> {
        let packed = points
            .iter()
            .map(|p| ambient.pack(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::span_packed(ambient, packed))
    }

    /// Subspace with the given basis; the vectors must be linearly independent.
    pub fn from_basis(ambient: Ambient, points: &[DyadicPoint]) -> Result<Self> {
        let sub = Self::span(ambient, points)?;
        if sub.dim() != points.len() {
            return Err(Error::InvalidParameter(format!(
                "basis of {} vectors spans only dimension {}",
                points.len(),
                sub.dim()
            )));
        }
        Ok(sub)
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical basis in packed form.
    pub fn basis_packed(&self) -> &[u128] {
        &self.basis
    }

    pub fn basis(&self) -> Vec<DyadicPoint> {
        self.basis.iter().map(|&b| self.ambient.unpack(b)).collect()
    }

    pub fn contains_packed(&self, x: u128) -> bool {
        let mut v = x;
        for r in &self.basis {
            if (v >> top_bit(*r)) & 1 == 1 {
                v ^= r;
            }
        }
        v == 0
    }

    pub fn contains(&self, x: &DyadicPoint) -> Result<bool> {
        Ok(self.contains_packed(self.ambient.pack(x)?))
    }

    /// Annihilator under the bit-reversed pairing, by null-space extraction.
    pub fn dual(&self) -> F2Subspace {
        let rows: Vec<u128> = self
            .basis
            .iter()
            .map(|&b| self.ambient.reverse_blocks(b))
            .collect();
        let ker = kernel(&rows, self.ambient.bits());
        F2Subspace::span_packed(self.ambient, ker)
    }

    /// All `2^dim` elements in Gray-code order, packed.
    pub fn enumerate_packed(&self, cap_log2: u32) -> Result<impl Iterator<Item = u128> + '_> {
        if self.dim() > cap_log2 as usize {
            return Err(Error::EnumerationCap {
                dim: self.dim(),
                cap_log2,
            });
        }
        let total: u64 = 1u64 << self.dim();
        let mut cur = 0u128;
        Ok((0..total).map(move |i| {
            if i > 0 {
                cur ^= self.basis[i.trailing_zeros() as usize];
            }
            cur
        }))
    }

    pub fn enumerate(&self, cap_log2: u32) -> Result<impl Iterator<Item = DyadicPoint> + '_> {
        let amb = self.ambient;
        Ok(self.enumerate_packed(cap_log2)?.map(move |x| amb.unpack(x)))
    }

    /// `ρ(D)`: minimum RT weight over nonzero elements.
    pub fn rt_weight(&self, cap_log2: u32) -> Result<RtWeight> {
        if self.dim() == 0 {
            return Err(Error::UndefinedWeight);
        }
        if self.dim() <= cap_log2 as usize {
            let amb = self.ambient;
            let value = self
                .enumerate_packed(cap_log2)?
                .skip(1)
                .map(|x| amb.rt_weight_packed(x))
                .min()
                .expect("dim >= 1");
            return Ok(RtWeight {
                value,
                exhaustive: true,
                method: WeightMethod::Enumeration,
            });
        }
        if let Some(value) = self.rt_weight_by_profiles() {
            return Ok(RtWeight {
                value,
                exhaustive: true,
                method: WeightMethod::ProfileSearch,
            });
        }
        Ok(self.rt_weight_random(0x005e_ed0f_d0a1))
    }

    /// Whether some nonzero element has `ρ(x_j) ≤ profile[j]` for every `j`.
    pub fn meets_profile_box(&self, profile: &[u32]) -> bool {
        let s = self.ambient.s as usize;
        let mut inside = 0u128;
        for (j, &r) in profile.iter().enumerate() {
            let r = (r as usize).min(s);
            if r > 0 {
                inside |= ((1u128 << r) - 1) << (j * s);
            }
        }
        let outside = !inside;
        rank(self.basis.iter().map(|b| b & outside)) < self.dim()
    }

    /// Exact minimum weight: the smallest `k` such that some profile with
    /// `|ρ̄| = k` meets the subspace. `None` when the budget runs out.
    fn rt_weight_by_profiles(&self) -> Option<u32> {
        let n = self.ambient.n;
        let s = self.ambient.s;
        let mut inspected = 0u64;
        for k in 1..=(n as u32 * s) {
            let mut found = false;
            let mut budget_hit = false;
            for_each_composition(n, k, s, &mut |profile| {
                inspected += 1;
                if inspected > PROFILE_BUDGET {
                    budget_hit = true;
                    return false;
                }
                if self.meets_profile_box(profile) {
                    found = true;
                    return false;
                }
                true
            });
            if found {
                return Some(k);
            }
            if budget_hit {
                return None;
            }
        }
        None
    }

    fn rt_weight_random(&self, seed: u64) -> RtWeight {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = u32::MAX;
        for _ in 0..RANDOM_PROBES {
            let mut x = 0u128;
            while x == 0 {
                for b in &self.basis {
                    if rng.gen::<bool>() {
                        x ^= b;
                    }
                }
            }
            best = best.min(self.ambient.rt_weight_packed(x));
        }
        RtWeight {
            value: best,
            exhaustive: false,
            method: WeightMethod::RandomSearch,
        }
    }
}

/// Visit every `(r_1, …, r_n)` with `0 ≤ r_j ≤ max` and `Σ r_j = total`.
/// The visitor returns `false` to stop early.
pub(crate) fn for_each_composition<F: FnMut(&[u32]) -> bool>(
    n: usize,
    total: u32,
    max: u32,
    visit: &mut F,
) {
    fn rec<F: FnMut(&[u32]) -> bool>(
        buf: &mut Vec<u32>,
        n: usize,
        left: u32,
        max: u32,
        visit: &mut F,
    ) -> bool {
        if buf.len() + 1 == n {
            if left > max {
                return true;
            }
            buf.push(left);
            let go = visit(buf);
            buf.pop();
            return go;
        }
        let slots_after = (n - buf.len() - 1) as u32;
        let lo = left.saturating_sub(slots_after * max);
        for r in lo..=left.min(max) {
            buf.push(r);
            let go = rec(buf, n, left - r, max, visit);
            buf.pop();
            if !go {
                return false;
            }
        }
        true
    }
    if n == 0 || total > n as u32 * max {
        return;
    }
    let mut buf = Vec::with_capacity(n);
    rec(&mut buf, n, total, max, visit);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn amb(n: usize, s: u32) -> Ambient {
        Ambient::new(n, s).unwrap()
    }

    fn random_subspace(rng: &mut ChaCha8Rng, a: Ambient) -> F2Subspace {
        let k = rng.gen_range(0..=a.bits());
        let mask = if a.bits() == 128 {
            u128::MAX
        } else {
            (1u128 << a.bits()) - 1
        };
        F2Subspace::span_packed(a, (0..k).map(|_| rng.gen::<u128>() & mask))
    }

    #[test]
    fn dual_of_zero_and_full() {
        let a = amb(2, 3);
        assert_eq!(F2Subspace::zero(a).dual(), F2Subspace::full(a));
        assert_eq!(F2Subspace::full(a).dual(), F2Subspace::zero(a));
    }

    #[test]
    fn van_der_corput_dual_brute_force() {
        let a = amb(2, 2);
        let net: Vec<DyadicPoint> = [[0, 0], [1, 2], [2, 1], [3, 3]]
            .iter()
            .map(|c| DyadicPoint::new(c.to_vec(), 2).unwrap())
            .collect();
        let d = F2Subspace::span(a, &net).unwrap();
        assert_eq!(d.dim(), 2);
        // brute force: every ambient vector against every net point
        let mut brute = Vec::new();
        for x1 in 0..4u64 {
            for x2 in 0..4u64 {
                let x = DyadicPoint::new(vec![x1, x2], 2).unwrap();
                if net.iter().all(|y| x.pairing(y).unwrap() == 0) {
                    brute.push(x);
                }
            }
        }
        let dual = d.dual();
        assert_eq!(dual.dim(), 2);
        assert_eq!(brute.len(), 4);
        let listed: HashSet<_> = dual.enumerate(24).unwrap().collect();
        assert_eq!(listed, brute.into_iter().collect());
        assert_eq!(dual.rt_weight(24).unwrap().value, 3);
    }

    #[test]
    fn enumerate_counts_and_cap() {
        let a = amb(2, 3);
        let zero: Vec<_> = F2Subspace::zero(a).enumerate(24).unwrap().collect();
        assert_eq!(zero, vec![DyadicPoint::zero(2, 3)]);
        let full = F2Subspace::full(a);
        let all: HashSet<_> = full.enumerate_packed(24).unwrap().collect();
        assert_eq!(all.len(), 64);
        assert!(matches!(
            full.enumerate_packed(5),
            Err(Error::EnumerationCap { dim: 6, cap_log2: 5 })
        ));
    }

    #[test]
    fn zero_subspace_weight_undefined() {
        assert_eq!(
            F2Subspace::zero(amb(2, 2)).rt_weight(24),
            Err(Error::UndefinedWeight)
        );
    }

    #[test]
    fn from_basis_rejects_dependent() {
        let a = amb(1, 3);
        let p = DyadicPoint::new(vec![3], 3).unwrap();
        assert!(F2Subspace::from_basis(a, &[p.clone(), p]).is_err());
    }

    #[test]
    fn duality_involution_and_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            let s = rng.gen_range(1..=5);
            let a = amb(n, s);
            let d = random_subspace(&mut rng, a);
            let dual = d.dual();
            assert_eq!(d.dim() + dual.dim(), a.bits());
            assert_eq!(dual.dual(), d);
            for x in dual.basis() {
                for y in d.basis() {
                    assert_eq!(x.pairing(&y).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn profile_search_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let a = amb(rng.gen_range(1..=3), rng.gen_range(1..=5));
            let d = random_subspace(&mut rng, a);
            if d.dim() == 0 {
                continue;
            }
            let by_enum = d.rt_weight(24).unwrap();
            assert_eq!(d.rt_weight_by_profiles(), Some(by_enum.value));
            // forcing the non-enumerating path
            let forced = d.rt_weight(0).unwrap();
            assert_eq!(forced.value, by_enum.value);
            assert_eq!(forced.method, WeightMethod::ProfileSearch);
        }
    }

    #[test]
    fn compositions_are_complete() {
        let mut seen = Vec::new();
        for_each_composition(3, 4, 2, &mut |p| {
            seen.push(p.to_vec());
            true
        });
        // entries in 0..=2 summing to 4
        let mut brute = Vec::new();
        for a in 0..=2 {
            for b in 0..=2 {
                for c in 0..=2 {
                    if a + b + c == 4 {
                        brute.push(vec![a, b, c]);
                    }
                }
            }
        }
        seen.sort();
        brute.sort();
        assert_eq!(seen, brute);
    }
}
