//! Walsh and Rademacher functions, index digit combinatorics, and the exact
//! Walsh coefficients `χ̃_ℓ(y) = ∫_0^y w_ℓ` of interval indicators.
//!
//! Points of `[0, 1)` enter either as exact values (`DyadicCoord`,
//! `DyadicRational`) or as a *digit word*: a `u64` holding the first 64 binary
//! digits with `η_1` in the top bit. Every function with a `_word` suffix
//! takes the latter and is what the Monte Carlo paths use.

mod rational;

pub use rational::DyadicRational;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{reverse_bits, DyadicCoord, DyadicPoint};

#[inline]
fn sign(parity: u32) -> i8 {
    if parity & 1 == 0 {
        1
    } else {
        -1
    }
}

/// First 64 binary digits of `x ∈ [0, 1)`.
#[inline]
pub fn digit_word_f64(x: f64) -> u64 {
    // x * 2^64 is exact in binary floating point; the cast truncates.
    (x * 18_446_744_073_709_551_616.0) as u64
}

/// Digit word of a grid coordinate.
#[inline]
pub fn digit_word_coord(x: &DyadicCoord) -> u64 {
    if x.resolution() == 0 {
        0
    } else {
        x.value() << (64 - x.resolution())
    }
}

/// `w_ℓ` evaluated on a digit word. Only the first 64 digits of `x` are seen,
/// which is exact for every `ℓ < 2^64`.
#[inline]
pub fn walsh_word(ell: u64, word: u64) -> i8 {
    sign((ell & word.reverse_bits()).count_ones())
}

/// `w_ℓ(x) = (-1)^{Σ λ_i(ℓ) η_i(x)}` on a grid coordinate.
pub fn walsh_1d(ell: u64, x: &DyadicCoord) -> i8 {
    let s = x.resolution();
    let low = if s >= 64 { ell } else { ell & ((1u64 << s) - 1) };
    sign((low & reverse_bits(x.value(), s)).count_ones())
}

/// `w_ℓ` at an exact point of `[0, 1)`.
pub fn walsh_1d_rational(ell: u64, x: &DyadicRational) -> Result<i8> {
    if !x.in_unit_interval_open() {
        return Err(Error::OutOfRange(x.to_string()));
    }
    Ok(walsh_word(ell, x.digit_word()))
}

/// `w_ℓ` at a floating-point `x ∈ [0, 1)`.
pub fn walsh_1d_f64(ell: u64, x: f64) -> Result<i8> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::OutOfRange(x.to_string()));
    }
    Ok(walsh_word(ell, digit_word_f64(x)))
}

/// `W_L(X) = Π_j w_{ℓ_j}(x_j)`.
pub fn walsh_nd(index: &[u64], x: &DyadicPoint) -> Result<i8> {
    if index.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            n: x.dim(),
            s: x.resolution(),
            got_n: index.len(),
            got_s: x.resolution(),
        });
    }
    Ok((0..x.dim())
        .map(|j| walsh_1d(index[j], &x.coord(j)))
        .product())
}

/// `W_L` on digit words, one per coordinate.
#[inline]
pub fn walsh_nd_words(index: &[u64], words: &[u64]) -> i8 {
    let ones: u32 = index
        .iter()
        .zip(words)
        .map(|(&l, &w)| (l & w.reverse_bits()).count_ones())
        .sum();
    sign(ones)
}

/// Rademacher function `r_i(x) = (-1)^{η_i(x)}` on a digit word, `1 ≤ i ≤ 64`.
#[inline]
pub fn rademacher_word(i: u32, word: u64) -> i8 {
    debug_assert!((1..=64).contains(&i));
    sign(((word >> (64 - i)) & 1) as u32)
}

pub fn rademacher(i: u32, x: &DyadicCoord) -> Result<i8> {
    if i < 1 {
        return Err(Error::InvalidParameter("Rademacher index must be >= 1".into()));
    }
    Ok(sign(x.eta(i) as u32))
}

pub fn rademacher_f64(i: u32, x: f64) -> Result<i8> {
    if !(1..=64).contains(&i) {
        return Err(Error::InvalidParameter(format!(
            "Rademacher index {i} outside 1..=64"
        )));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::OutOfRange(x.to_string()));
    }
    Ok(rademacher_word(i, digit_word_f64(x)))
}

/// `ρ(ℓ)`, `λ(ℓ)` and `τ(ℓ)`: top digit position, top digit, and `ℓ` with
/// the top digit removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexDecomposition {
    pub rho: u32,
    pub lead: u8,
    pub trunc: u64,
}

pub fn decompose(ell: u64) -> IndexDecomposition {
    if ell == 0 {
        return IndexDecomposition {
            rho: 0,
            lead: 0,
            trunc: 0,
        };
    }
    let rho = 64 - ell.leading_zeros();
    IndexDecomposition {
        rho,
        lead: 1,
        trunc: ell ^ (1u64 << (rho - 1)),
    }
}

#[inline]
pub fn rho(ell: u64) -> u32 {
    64 - ell.leading_zeros()
}

/// `ρ̄(L)`.
pub fn rho_profile(index: &[u64]) -> Vec<u32> {
    index.iter().map(|&l| rho(l)).collect()
}

/// `ρ(L) = Σ ρ(ℓ_j)`.
pub fn rho_sum(index: &[u64]) -> u32 {
    index.iter().map(|&l| rho(l)).sum()
}

/// `τ(L)`.
pub fn trunc_vec(index: &[u64]) -> Vec<u64> {
    index.iter().map(|&l| decompose(l).trunc).collect()
}

/// `ω_m(y) = 2^{m+1} ∫_0^y r_m`: the tent of height 2 and period `2^{1-m}`,
/// equal to `4 |||2^{m-1} y|||`.
pub fn omega(m: u32, y: &DyadicRational) -> Result<DyadicRational> {
    if m < 1 {
        return Err(Error::InvalidParameter("omega index must be >= 1".into()));
    }
    if !y.in_unit_interval_closed() {
        return Err(Error::OutOfRange(y.to_string()));
    }
    let f = y.mul_pow2(m as i32 - 1).fract();
    let dist = std::cmp::min(f.clone(), &DyadicRational::one() - &f);
    Ok(dist.mul_pow2(2))
}

pub fn omega_f64(m: u32, y: f64) -> f64 {
    let f = (y * ((m as f64) - 1.0).exp2()).fract();
    4.0 * f.min(1.0 - f)
}

/// Walsh coefficient `χ̃_ℓ(y) = ∫_0^y w_ℓ(x) dx`, exact, via
/// `2^{-ρ-1} w_τ(y) ω_ρ(y)`. Admits `y = 1`.
pub fn fine_coefficient(ell: u64, y: &DyadicRational) -> Result<DyadicRational> {
    if !y.in_unit_interval_closed() {
        return Err(Error::OutOfRange(y.to_string()));
    }
    if ell == 0 {
        return Ok(y.clone());
    }
    if *y == DyadicRational::one() {
        return Ok(DyadicRational::zero());
    }
    let d = decompose(ell);
    let w = walsh_word(d.trunc, y.digit_word());
    let om = omega(d.rho, y)?.mul_pow2(-(d.rho as i32) - 1);
    Ok(if w > 0 { om } else { -om })
}

/// The same coefficient from the Rademacher series
/// `2^{-ρ} · ½ (w_τ(y) − Σ_{i≥1} 2^{-i} w_{ℓ ⊕ 2^{ρ+i-1}}(y))`.
/// For `y` with `e` binary digits every term with `ρ + i > e` equals
/// `w_ℓ(y)`, so the tail is the geometric sum `2^{-(e-ρ)} w_ℓ(y)`.
pub fn fine_coefficient_series(ell: u64, y: &DyadicRational) -> Result<DyadicRational> {
    if !y.in_unit_interval_closed() {
        return Err(Error::OutOfRange(y.to_string()));
    }
    if *y == DyadicRational::one() {
        return Ok(if ell == 0 {
            DyadicRational::one()
        } else {
            DyadicRational::zero()
        });
    }
    let d = decompose(ell);
    let word = y.digit_word();
    let e = y.exponent();
    let mut series = DyadicRational::zero();
    let finite_terms = e.saturating_sub(d.rho);
    for i in 1..=finite_terms {
        let pos = d.rho + i - 1;
        if pos >= 64 {
            return Err(Error::InvalidParameter(
                "series index exceeds 64 digits".into(),
            ));
        }
        let bit = 1u64 << pos;
        let idx = ell ^ bit;
        assert_eq!(idx, ell + bit, "added digit must sit above ρ(ℓ)");
        let w = walsh_word(idx, word) as i64;
        series = &series + &DyadicRational::from_parts(w, i);
    }
    let tail = DyadicRational::from_parts(walsh_word(ell, word) as i64, finite_terms);
    series = &series + &tail;
    let base = DyadicRational::from_int(walsh_word(d.trunc, word) as i64);
    Ok((&base - &series).mul_pow2(-(d.rho as i32) - 1))
}

/// Floating-point `χ̃_ℓ(y)` for `y ∈ [0, 1]`.
#[inline]
pub fn fine_coefficient_f64(ell: u64, y: f64) -> f64 {
    if ell == 0 {
        return y;
    }
    if y >= 1.0 {
        return 0.0;
    }
    let d = decompose(ell);
    let w = walsh_word(d.trunc, digit_word_f64(y)) as f64;
    w * omega_f64(d.rho, y) * (-(d.rho as f64) - 1.0).exp2()
}

/// `χ̃_L(Y) = Π_j χ̃_{ℓ_j}(y_j)`.
pub fn fine_coefficient_nd(index: &[u64], y: &[DyadicRational]) -> Result<DyadicRational> {
    if index.len() != y.len() {
        return Err(Error::DimensionMismatch {
            n: y.len(),
            s: 0,
            got_n: index.len(),
            got_s: 0,
        });
    }
    let mut acc = DyadicRational::one();
    for (&l, yj) in index.iter().zip(y) {
        acc = &acc * &fine_coefficient(l, yj)?;
    }
    Ok(acc)
}

/// A function on `[0, 1)` given by exact averages over the dyadic cells of
/// length `2^{-resolution}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellAverages {
    pub resolution: u32,
    pub values: Vec<DyadicRational>,
}

impl CellAverages {
    pub fn new(resolution: u32, values: Vec<DyadicRational>) -> Result<Self> {
        if resolution > 24 || values.len() != 1usize << resolution {
            return Err(Error::InvalidParameter(format!(
                "expected 2^{resolution} cell values, got {}",
                values.len()
            )));
        }
        Ok(Self { resolution, values })
    }

    /// Cell averages from an exact antiderivative `F`.
    pub fn from_antiderivative<F>(resolution: u32, antiderivative: F) -> Result<Self>
    where
        F: Fn(&DyadicRational) -> DyadicRational,
    {
        let values = (0..1u64 << resolution)
            .map(|c| {
                let lo = DyadicRational::from_parts(c as i64, resolution);
                let hi = DyadicRational::from_parts(c as i64 + 1, resolution);
                (&antiderivative(&hi) - &antiderivative(&lo)).mul_pow2(resolution as i32)
            })
            .collect();
        Self::new(resolution, values)
    }

    pub fn constant(resolution: u32, c: DyadicRational) -> Result<Self> {
        Self::new(resolution, vec![c; 1usize << resolution])
    }
}

/// Conditional expectation onto the dyadic cells of length `2^{-s}`.
pub fn truncated_projection(f: &CellAverages, s: u32) -> Result<CellAverages> {
    if s > f.resolution {
        return Err(Error::InvalidParameter(format!(
            "projection resolution {s} exceeds input resolution {}",
            f.resolution
        )));
    }
    let block = 1usize << (f.resolution - s);
    let shift = -((f.resolution - s) as i32);
    let values = f
        .values
        .chunks(block)
        .map(|c| c.iter().cloned().sum::<DyadicRational>().mul_pow2(shift))
        .collect();
    CellAverages::new(s, values)
}

/// The order-`2^s` Walsh partial sum `Σ_{ℓ<2^s} ⟨f, w_ℓ⟩ w_ℓ`, evaluated on
/// the cells of length `2^{-s}` (where it is constant).
pub fn walsh_partial_sum(f: &CellAverages, s: u32) -> Result<CellAverages> {
    if s > f.resolution {
        return Err(Error::InvalidParameter(format!(
            "partial-sum order 2^{s} exceeds input resolution {}",
            f.resolution
        )));
    }
    let k = f.resolution;
    let coeffs: Vec<DyadicRational> = (0..1u64 << s)
        .map(|ell| {
            f.values
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    let x = DyadicCoord::new(c as u64, k).expect("cell index in range");
                    if walsh_1d(ell, &x) > 0 {
                        v.clone()
                    } else {
                        -v
                    }
                })
                .sum::<DyadicRational>()
                .mul_pow2(-(k as i32))
        })
        .collect();
    let values = (0..1u64 << s)
        .map(|t| {
            let x = DyadicCoord::new(t, s).expect("cell index in range");
            coeffs
                .iter()
                .enumerate()
                .map(|(ell, c)| {
                    if walsh_1d(ell as u64, &x) > 0 {
                        c.clone()
                    } else {
                        -c
                    }
                })
                .sum()
        })
        .collect();
    CellAverages::new(s, values)
}

/// Distance from `x` to the nearest integer.
pub fn nearest_integer_distance(x: &DyadicRational) -> DyadicRational {
    let f = x.fract();
    std::cmp::min(f.clone(), &DyadicRational::one() - &f)
}

/// Check `|||x||| = ¼ ω_1(x) = ½(1 − Σ_{i≥1} 2^{-i} r_1(x) r_i(x))` at a
/// dyadic `x`. The series is summed exactly with its geometric tail.
pub fn sawtooth_identity_check(x: &DyadicRational) -> bool {
    let lhs = nearest_integer_distance(x);
    let f = x.fract();
    let via_omega = match omega(1, &f) {
        Ok(w) => w.mul_pow2(-2),
        Err(_) => return false,
    };
    let word = f.digit_word();
    let e = f.exponent();
    let r1 = rademacher_word(1, word) as i64;
    let mut series = DyadicRational::zero();
    for i in 1..=e.min(64) {
        let ri = rademacher_word(i, word) as i64;
        series = &series + &DyadicRational::from_parts(r1 * ri, i);
    }
    series = &series + &DyadicRational::from_parts(r1, e);
    let via_series = (&DyadicRational::one() - &series).mul_pow2(-1);
    lhs == via_omega && lhs == via_series
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, e: u32) -> DyadicRational {
        DyadicRational::from_parts(n, e)
    }

    fn c(v: u64, s: u32) -> DyadicCoord {
        DyadicCoord::new(v, s).unwrap()
    }

    /// Independent digit-by-digit Walsh evaluation.
    fn walsh_naive(ell: u64, v: u64, s: u32) -> i8 {
        let x = v as f64 / (s as f64).exp2();
        let mut sum = 0u32;
        for i in 1..=s {
            let lambda = (ell >> (i - 1)) & 1;
            let eta = ((x * (i as f64).exp2()).floor() as u64) & 1;
            sum += (lambda * eta) as u32;
        }
        if sum.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Riemann-sum oracle for `∫_0^{v/2^k} w_ℓ`, exact when `w_ℓ` is constant on cells.
    fn fine_oracle(ell: u64, v: u64, k: u32) -> DyadicRational {
        let total: i64 = (0..v).map(|cell| walsh_naive(ell, cell, k) as i64).sum();
        q(total, k)
    }

    #[test]
    fn walsh_examples() {
        for v in 0..16 {
            assert_eq!(walsh_1d(0, &c(v, 4)), 1);
        }
        assert_eq!(walsh_1d(3, &c(1, 2)), -1);
        for s in 1..=6 {
            for v in 0..(1u64 << s) {
                let x = c(v, s);
                assert_eq!(walsh_1d(2, &x), rademacher(2, &x).unwrap());
                for k in 0..s {
                    assert_eq!(walsh_1d(1 << k, &x), rademacher(k + 1, &x).unwrap());
                }
            }
        }
    }

    #[test]
    fn walsh_matches_naive() {
        for s in 1..=6 {
            for ell in 0..(1u64 << s) {
                for v in 0..(1u64 << s) {
                    assert_eq!(walsh_1d(ell, &c(v, s)), walsh_naive(ell, v, s));
                }
            }
        }
    }

    #[test]
    fn walsh_paths_agree() {
        for v in 0..64u64 {
            let x = c(v, 6);
            for ell in 0..200u64 {
                let w = walsh_1d(ell, &x);
                assert_eq!(walsh_1d_rational(ell, &x.to_rational()).unwrap(), w);
                assert_eq!(walsh_1d_f64(ell, x.to_f64()).unwrap(), w);
            }
        }
        assert!(walsh_1d_f64(1, 1.0).is_err());
        assert!(walsh_1d_rational(1, &q(-1, 2)).is_err());
    }

    #[test]
    fn rademacher_examples() {
        assert_eq!(rademacher_f64(1, 0.3).unwrap(), 1);
        assert_eq!(rademacher_f64(1, 0.6).unwrap(), -1);
        assert_eq!(rademacher(2, &c(1, 2)).unwrap(), -1);
        assert!(rademacher(0, &c(1, 2)).is_err());
        assert!(rademacher_f64(1, 1.5).is_err());
    }

    #[test]
    fn rademacher_constant_on_cells() {
        for i in 1..=5u32 {
            for v in 0..256u64 {
                let x = c(v, 8);
                let cell_start = c((v >> (8 - i)) << (8 - i), 8);
                assert_eq!(rademacher(i, &x).unwrap(), rademacher(i, &cell_start).unwrap());
            }
        }
    }

    #[test]
    fn walsh_nd_laws() {
        let x = DyadicPoint::new(vec![3, 5], 3).unwrap();
        assert_eq!(walsh_nd(&[0, 0], &x).unwrap(), 1);
        assert_eq!(walsh_nd(&[6, 7], &DyadicPoint::zero(2, 3)).unwrap(), 1);
        assert!(walsh_nd(&[1], &x).is_err());
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(1), IndexDecomposition { rho: 1, lead: 1, trunc: 0 });
        assert_eq!(decompose(6), IndexDecomposition { rho: 3, lead: 1, trunc: 2 });
        assert_eq!(decompose(0), IndexDecomposition { rho: 0, lead: 0, trunc: 0 });
        for ell in 1..5000u64 {
            let d = decompose(ell);
            assert_eq!(ell, d.trunc + ((d.lead as u64) << (d.rho - 1)));
            assert!(d.trunc < 1 << (d.rho - 1));
        }
        assert_eq!(rho_profile(&[0, 1, 6]), vec![0, 1, 3]);
        assert_eq!(rho_sum(&[0, 1, 6]), 4);
        assert_eq!(trunc_vec(&[0, 1, 6]), vec![0, 0, 2]);
    }

    #[test]
    fn rho_agrees_with_coordinate_weight() {
        for s in 1..=8u32 {
            for v in 0..(1u64 << s) {
                assert_eq!(rho(v), c(v, s).rt_weight());
            }
        }
    }

    #[test]
    fn omega_shape() {
        for m in 1..=6u32 {
            assert!(omega(m, &DyadicRational::zero()).unwrap().is_zero());
            assert_eq!(omega(m, &q(1, m)).unwrap(), q(2, 0));
            assert!(omega(m, &q(1, m - 1)).unwrap().is_zero());
            assert!(omega(m, &DyadicRational::one()).unwrap().is_zero());
        }
        assert!(omega(0, &q(1, 1)).is_err());
        assert!(omega(1, &q(3, 1)).is_err());
    }

    #[test]
    fn omega_is_scaled_antiderivative_of_rademacher() {
        // 2^{m+1} ∫_0^y r_m by Riemann sums on the 2^-8 grid.
        for m in 1..=6u32 {
            let mut acc = 0i64;
            for v in 0..=256u64 {
                let y = q(v as i64, 8);
                assert_eq!(omega(m, &y).unwrap(), q(acc, 8).mul_pow2(m as i32 + 1));
                if v < 256 {
                    acc += rademacher(m, &c(v, 8)).unwrap() as i64;
                }
            }
        }
    }

    #[test]
    fn omega_matches_rademacher_series() {
        // 1 - Σ 2^{-i} r_m r_{m+i}, tail summed in closed form.
        for m in 1..=5u32 {
            for v in 0..256u64 {
                let x = c(v, 8);
                let word = digit_word_coord(&x);
                let rm = rademacher_word(m, word) as i64;
                let mut series = DyadicRational::zero();
                let finite = 8u32.saturating_sub(m);
                for i in 1..=finite {
                    let r = rademacher_word(m + i, word) as i64;
                    series = &series + &q(rm * r, i);
                }
                series = &series + &q(rm, finite);
                let expect = &DyadicRational::one() - &series;
                assert_eq!(omega(m, &x.to_rational()).unwrap(), expect, "m={m} v={v}");
            }
        }
    }

    #[test]
    fn fine_examples() {
        for v in 0..64 {
            let y = q(v, 6);
            assert_eq!(fine_coefficient(0, &y).unwrap(), y);
        }
        for ell in 1..100 {
            assert!(fine_coefficient(ell, &DyadicRational::one()).unwrap().is_zero());
        }
        assert_eq!(
            fine_coefficient(0, &DyadicRational::one()).unwrap(),
            DyadicRational::one()
        );
        assert!(fine_coefficient(1, &q(5, 2)).is_err());
    }

    #[test]
    fn fine_matches_step_summation() {
        for ell in 0..32u64 {
            for v in 0..=64u64 {
                let y = q(v as i64, 6);
                assert_eq!(
                    fine_coefficient(ell, &y).unwrap(),
                    fine_oracle(ell, v, 6),
                    "ell={ell} v={v}"
                );
            }
        }
    }

    #[test]
    fn fine_series_route_agrees() {
        for ell in 0..64u64 {
            for v in 0..=256u64 {
                let y = q(v as i64, 8);
                assert_eq!(
                    fine_coefficient_series(ell, &y).unwrap(),
                    fine_coefficient(ell, &y).unwrap(),
                    "ell={ell} v={v}"
                );
            }
        }
    }

    #[test]
    fn fine_f64_path_matches() {
        for ell in 0..64u64 {
            for v in 0..=256u64 {
                let y = q(v as i64, 8);
                let exact = fine_coefficient(ell, &y).unwrap().to_f64();
                assert_eq!(fine_coefficient_f64(ell, y.to_f64()), exact);
            }
        }
    }

    #[test]
    fn fine_nd_is_product() {
        let y = vec![q(3, 3), q(5, 4)];
        assert_eq!(
            fine_coefficient_nd(&[0, 0], &y).unwrap(),
            &y[0] * &y[1]
        );
        let ones = vec![DyadicRational::one(), DyadicRational::one()];
        assert!(fine_coefficient_nd(&[0, 3], &ones).unwrap().is_zero());
        for l1 in 0..16u64 {
            for l2 in 0..16u64 {
                // the oracle needs cells no coarser than 2^-4 for ℓ < 16
                let expect = &fine_oracle(l1, 6, 4) * &fine_oracle(l2, 5, 4);
                assert_eq!(fine_coefficient_nd(&[l1, l2], &y).unwrap(), expect);
            }
        }
        assert!(fine_coefficient_nd(&[1], &y).is_err());
    }

    #[test]
    fn fine_square_integral() {
        // χ̃_ℓ is linear on cells of length 2^-8 for ℓ < 64:
        // ∫ over a cell = h (a² + ab + b²) / 3, so compare 3∫ with 2^{-2ρ}.
        for ell in 0..64u64 {
            let mut three_int = DyadicRational::zero();
            for v in 0..256u64 {
                let a = fine_oracle(ell, v, 8);
                let b = fine_oracle(ell, v + 1, 8);
                let cell = &(&(&a * &a) + &(&a * &b)) + &(&b * &b);
                three_int = &three_int + &cell.mul_pow2(-8);
            }
            assert_eq!(three_int, DyadicRational::pow2(-2 * rho(ell) as i32), "ell={ell}");
        }
    }

    #[test]
    fn projection_examples() {
        let c3 = CellAverages::constant(4, q(3, 2)).unwrap();
        let p = truncated_projection(&c3, 2).unwrap();
        assert!(p.values.iter().all(|v| *v == q(3, 2)));
        let ident = CellAverages::from_antiderivative(6, |x| (x * x).mul_pow2(-1)).unwrap();
        let p = truncated_projection(&ident, 1).unwrap();
        assert_eq!(p.values, vec![q(1, 2), q(3, 2)]);
        assert!(truncated_projection(&ident, 7).is_err());
    }

    #[test]
    fn projection_equals_walsh_partial_sum() {
        // f(x) = 3x² and an indicator with a break off the coarse grid
        let square = CellAverages::from_antiderivative(6, |x| &(x * x) * x).unwrap();
        let kink = q(21, 6);
        let indicator =
            CellAverages::from_antiderivative(6, |x| std::cmp::min(x.clone(), kink.clone())).unwrap();
        for f in [&square, &indicator] {
            for s in 0..=4u32 {
                assert_eq!(
                    truncated_projection(f, s).unwrap(),
                    walsh_partial_sum(f, s).unwrap(),
                    "s={s}"
                );
            }
        }
    }

    #[test]
    fn sawtooth_identity() {
        assert!(sawtooth_identity_check(&DyadicRational::zero()));
        assert_eq!(nearest_integer_distance(&q(1, 1)), q(1, 1));
        assert_eq!(omega(1, &q(1, 1)).unwrap().mul_pow2(-2), q(1, 1));
        for v in 0..=256i64 {
            assert!(sawtooth_identity_check(&q(v, 8)), "x={v}/256");
        }
    }

    #[test]
    fn character_laws_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let (l, k) = (rng.gen_range(0..1024u64), rng.gen_range(0..1024u64));
            let (x, y) = (rng.gen_range(0..1024u64), rng.gen_range(0..1024u64));
            let (cx, cy) = (c(x, 10), c(y, 10));
            assert_eq!(walsh_1d(l ^ k, &cx), walsh_1d(l, &cx) * walsh_1d(k, &cx));
            assert_eq!(walsh_1d(l, &c(x ^ y, 10)), walsh_1d(l, &cx) * walsh_1d(l, &cy));
        }
    }

    #[test]
    fn orthonormality_on_grid() {
        // n = 2, s = 3: cell-average quadrature over Q^2(2^3) is exact
        let s = 3;
        let pts: Vec<DyadicPoint> = (0..64u64)
            .map(|i| DyadicPoint::new(vec![i & 7, i >> 3], s).unwrap())
            .collect();
        for l in 0..64u64 {
            for k in 0..64u64 {
                let (li, ki) = ([l & 7, l >> 3], [k & 7, k >> 3]);
                let total: i64 = pts
                    .iter()
                    .map(|x| (walsh_nd(&li, x).unwrap() * walsh_nd(&ki, x).unwrap()) as i64)
                    .sum();
                assert_eq!(total, if l == k { 64 } else { 0 });
            }
        }
    }
}
