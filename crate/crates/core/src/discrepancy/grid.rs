use crate::walsh::{decompose, walsh_word};

/// `χ̃_ℓ(y) · 2^k` for `y = units / 2^k ∈ [0, 1]`, requiring `ρ(ℓ) ≤ k ≤ 62`.
///
/// Integer form of the closed formula: with `f = 2^{ρ−1} y mod 1` the value
/// is `w_τ(y) · min(f, 1 − f) · 2^{1−ρ}`, exact in units of `2^{-k}`.
pub fn fine_scaled(ell: u64, units: u64, k: u32) -> i64 {
    if ell == 0 {
        return units as i64;
    }
    let full = 1u128 << k;
    if units as u128 >= full {
        return 0;
    }
    let d = decompose(ell);
    debug_assert!(d.rho <= k);
    let f = ((units as u128) << (d.rho - 1)) % full;
    let dist = f.min(full - f) >> (d.rho - 1);
    let word = if k == 0 { 0 } else { units << (64 - k) };
    walsh_word(d.trunc, word) as i64 * dist as i64
}

/// All points of `Q^n(2^k)` as coordinate numerators, last coordinate fastest.
#[derive(Debug, Clone)]
pub struct GridIter {
    current: Option<Vec<u64>>,
    limit: u64,
}

impl GridIter {
    pub fn new(n: usize, k: u32) -> Self {
        Self {
            current: Some(vec![0; n]),
            limit: 1u64 << k,
        }
    }
}

impl Iterator for GridIter {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let mut j = cur.len();
        loop {
            if j == 0 {
                self.current = None;
                break;
            }
            j -= 1;
            cur[j] += 1;
            if cur[j] < self.limit {
                break;
            }
            cur[j] = 0;
        }
        Some(out)
    }
}
