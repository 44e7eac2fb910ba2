//! The dyadic grid `Q^n(2^s)` as a vector space over F₂.
//!
//! A coordinate `x = Σ η_i 2^{-i}` is stored as the `s`-bit word whose most
//! significant bit is `η_1`. In that word, bit `i - 1` is the digit `ξ_i`, so
//! `ξ`-indexed access is a plain bit test and `η`-indexed access goes through
//! the reversal `η_i = ξ_{s-i+1}`.

pub(crate) mod subspace;

pub use subspace::{F2Subspace, RtWeight, WeightMethod, DEFAULT_ENUMERATION_CAP_LOG2};

use crate::error::{Error, Result};
use crate::walsh::DyadicRational;

/// Largest supported per-coordinate resolution.
pub const MAX_RESOLUTION: u32 = 63;

/// Reverse the low `s` bits of `v`.
#[inline]
pub fn reverse_bits(v: u64, s: u32) -> u64 {
    if s == 0 {
        0
    } else {
        v.reverse_bits() >> (64 - s)
    }
}

#[inline]
fn low_mask(s: u32) -> u64 {
    if s >= 64 {
        u64::MAX
    } else {
        (1u64 << s) - 1
    }
}

/// RT weight of an `s`-digit word: the 1-based position of its top set bit.
#[inline]
pub fn rt_weight_word(v: u64) -> u32 {
    64 - v.leading_zeros()
}

/// One coordinate of `Q(2^s)`: the dyadic rational `value / 2^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCoord {
    value: u64,
    resolution: u32,
}

impl DyadicCoord {
    pub fn new(value: u64, resolution: u32) -> Result<Self> {
        if resolution > MAX_RESOLUTION {
            return Err(Error::InvalidParameter(format!(
                "resolution {resolution} exceeds {MAX_RESOLUTION}"
            )));
        }
        if value > low_mask(resolution) {
            return Err(Error::OutOfRange(format!("{value}/2^{resolution}")));
        }
        Ok(Self { value, resolution })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// `η_i`, the `i`-th binary digit after the point (`i ≥ 1`). Zero past the resolution.
    pub fn eta(&self, i: u32) -> u8 {
        if i == 0 || i > self.resolution {
            0
        } else {
            ((self.value >> (self.resolution - i)) & 1) as u8
        }
    }

    /// `ξ_i = η_{s-i+1}` for `1 ≤ i ≤ s`.
    pub fn xi(&self, i: u32) -> u8 {
        if i == 0 || i > self.resolution {
            0
        } else {
            ((self.value >> (i - 1)) & 1) as u8
        }
    }

    pub fn rt_weight(&self) -> u32 {
        rt_weight_word(self.value)
    }

    pub fn to_f64(&self) -> f64 {
        self.value as f64 / (self.resolution as f64).exp2()
    }

    pub fn to_rational(&self) -> DyadicRational {
        DyadicRational::from_parts(self.value as i64, self.resolution)
    }
}

/// A point of `Q^n(2^s)`. All coordinates share the resolution `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicPoint {
    coords: Vec<u64>,
    resolution: u32,
}

impl DyadicPoint {
    pub fn new(coords: Vec<u64>, resolution: u32) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("a point needs n >= 1 coordinates".into()));
        }
        for &c in &coords {
            DyadicCoord::new(c, resolution)?;
        }
        Ok(Self { coords, resolution })
    }

    pub fn zero(n: usize, resolution: u32) -> Self {
        Self {
            coords: vec![0; n.max(1)],
            resolution,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn values(&self) -> &[u64] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> DyadicCoord {
        DyadicCoord {
            value: self.coords[j],
            resolution: self.resolution,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn rt_weight(&self) -> u32 {
        self.coords.iter().map(|&c| rt_weight_word(c)).sum()
    }

    /// Per-coordinate RT profile `(ρ(x_1), …, ρ(x_n))`.
    pub fn rt_profile(&self) -> Vec<u32> {
        self.coords.iter().map(|&c| rt_weight_word(c)).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let scale = (self.resolution as f64).exp2();
        self.coords.iter().map(|&c| c as f64 / scale).collect()
    }

    /// Keep the first `s` digits of every coordinate (or pad with zero digits).
    pub fn truncate_to(&self, s: u32) -> DyadicPoint {
        let coords = self
            .coords
            .iter()
            .map(|&c| {
                if self.resolution >= s {
                    c >> (self.resolution - s)
                } else {
                    c << (s - self.resolution)
                }
            })
            .collect();
        DyadicPoint {
            coords,
            resolution: s,
        }
    }

    fn check_compatible(&self, other: &DyadicPoint) -> Result<()> {
        if self.dim() != other.dim() || self.resolution != other.resolution {
            return Err(Error::DimensionMismatch {
                n: self.dim(),
                s: self.resolution,
                got_n: other.dim(),
                got_s: other.resolution,
            });
        }
        Ok(())
    }

    pub fn oplus(&self, other: &DyadicPoint) -> Result<DyadicPoint> {
        self.check_compatible(other)?;
        Ok(DyadicPoint {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a ^ b)
                .collect(),
            resolution: self.resolution,
        })
    }

    pub fn pairing(&self, other: &DyadicPoint) -> Result<u8> {
        self.check_compatible(other)?;
        let s = self.resolution;
        let ones: u32 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&x, &y)| (reverse_bits(x, s) & y).count_ones())
            .sum();
        Ok((ones & 1) as u8)
    }
}

/// Digitwise XOR of two points of `Q^n(2^s)`.
pub fn oplus(a: &DyadicPoint, b: &DyadicPoint) -> Result<DyadicPoint> {
    a.oplus(b)
}

/// The bit-reversed F₂ pairing `⟨X, Y⟩ = Σ_j Σ_i ξ_i(x_j) ξ_{s-i+1}(y_j)`.
pub fn pairing(a: &DyadicPoint, b: &DyadicPoint) -> Result<u8> {
    a.pairing(b)
}

/// Shape of the ambient space `Q^n(2^s)` and the packing of its points into
/// a single `u128` (coordinate `j` occupies bits `j*s .. (j+1)*s`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ambient {
    pub n: usize,
    pub s: u32,
}

impl Ambient {
    pub fn new(n: usize, s: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension n must be >= 1".into()));
        }
        if s > MAX_RESOLUTION {
            return Err(Error::InvalidParameter(format!(
                "resolution {s} exceeds {MAX_RESOLUTION}"
            )));
        }
        let bits = n * s as usize;
        if bits > 128 {
            return Err(Error::AmbientTooLarge(bits));
        }
        Ok(Self { n, s })
    }

    /// `n·s`, the F₂-dimension of the ambient space.
    pub fn bits(&self) -> usize {
        self.n * self.s as usize
    }

    pub fn pack(&self, p: &DyadicPoint) -> Result<u128> {
        if p.dim() != self.n || p.resolution() != self.s {
            return Err(Error::DimensionMismatch {
                n: self.n,
                s: self.s,
                got_n: p.dim(),
                got_s: p.resolution(),
            });
        }
        Ok(self.pack_values(p.values()))
    }

    pub fn pack_values(&self, values: &[u64]) -> u128 {
        values
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, &v)| acc | ((v as u128) << (j * self.s as usize)))
    }

    pub fn unpack_values(&self, packed: u128) -> Vec<u64> {
        let mask = low_mask(self.s) as u128;
        (0..self.n)
            .map(|j| ((packed >> (j * self.s as usize)) & mask) as u64)
            .collect()
    }

    pub fn unpack(&self, packed: u128) -> DyadicPoint {
        DyadicPoint {
            coords: self.unpack_values(packed),
            resolution: self.s,
        }
    }

    /// Reverse the digit order inside every coordinate block.
    pub fn reverse_blocks(&self, packed: u128) -> u128 {
        let vals: Vec<u64> = self
            .unpack_values(packed)
            .into_iter()
            .map(|v| reverse_bits(v, self.s))
            .collect();
        self.pack_values(&vals)
    }

    /// Pairing on packed words.
    pub fn pairing_packed(&self, x: u128, y: u128) -> u8 {
        ((x & self.reverse_blocks(y)).count_ones() & 1) as u8
    }

    pub fn rt_weight_packed(&self, x: u128) -> u32 {
        self.unpack_values(x).into_iter().map(rt_weight_word).sum()
    }
}
