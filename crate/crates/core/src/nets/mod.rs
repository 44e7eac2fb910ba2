//! Binary digital nets: generator matrices, digit shifts, deficiency
//! certification, dyadic box counting and rescaling to arbitrary `N`.

mod format;
pub mod sobol;

pub use format::{parse_matrix_file, write_matrix_file};

use std::collections::HashMap;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::subspace::{for_each_composition, WeightMethod};
use crate::f2::{Ambient, DyadicPoint, F2Subspace, DEFAULT_ENUMERATION_CAP_LOG2};
use crate::walsh::DyadicRational;

/// `n` square `s × s` matrices over F₂ mapping `a ∈ F₂^s` to digit vectors.
///
/// `rows[j][i]` is row `i` of `C_{j+1}` with bit `k` holding the entry in
/// column `k + 1`. Row `i` produces digit `η_{i+1}` of coordinate `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    n: usize,
    s: u32,
    rows: Vec<Vec<u64>>,
    /// `columns[j][k]`: the `s`-digit word of column `k` of `C_{j+1}`.
    columns: Vec<Vec<u64>>,
}

impl GeneratorSet {
    /// Validate shapes and injectivity of `a ↦ (C_1 a, …, C_n a)`.
    pub fn new(n: usize, s: u32, rows: Vec<Vec<u64>>) -> Result<Self> {
        let ambient = Ambient::new(n, s)?;
        if rows.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} matrices, got {}",
                rows.len()
            )));
        }
        let width_mask = if s == 0 { 0 } else { u64::MAX >> (64 - s) };
        for (j, m) in rows.iter().enumerate() {
            if m.len() != s as usize {
                return Err(Error::InvalidParameter(format!(
                    "matrix {} has {} rows, expected {s}",
                    j + 1,
                    m.len()
                )));
            }
            if m.iter().any(|r| r & !width_mask != 0) {
                return Err(Error::InvalidParameter(format!(
                    "matrix {} has entries beyond column {s}",
                    j + 1
                )));
            }
        }
        let columns: Vec<Vec<u64>> = rows
            .iter()
            .map(|m| {
                (0..s)
                    .map(|k| {
                        m.iter().enumerate().fold(0u64, |acc, (i, r)| {
                            acc | (((r >> k) & 1) << (s as usize - 1 - i))
                        })
                    })
                    .collect()
            })
            .collect();
        let gens = Self {
            n,
            s,
            rows,
            columns,
        };
        let rank = gens.as_subspace_unchecked(ambient).dim();
        if rank < s as usize {
            return Err(Error::NotInjective { rank, s });
        }
        Ok(gens)
    }

    /// Build from column words (`columns[j][k]` = digits of column `k`, `η_1` on top).
    pub fn from_columns(n: usize, s: u32, columns: Vec<Vec<u64>>) -> Result<Self> {
        let rows = columns
            .iter()
            .map(|cols| {
                (0..s as usize)
                    .map(|i| {
                        cols.iter().enumerate().fold(0u64, |acc, (k, c)| {
                            acc | (((c >> (s as usize - 1 - i)) & 1) << k)
                        })
                    })
                    .collect()
            })
            .collect();
        Self::new(n, s, rows)
    }

    /// The two-dimensional net with `C_1 = I` and `C_2` the anti-diagonal.
    pub fn van_der_corput(s: u32) -> Result<Self> {
        let ident: Vec<u64> = (0..s).map(|i| 1u64 << i).collect();
        let anti: Vec<u64> = (0..s).map(|i| 1u64 << (s - 1 - i)).collect();
        Self::new(2, s, vec![ident, anti])
    }

    /// Sobol′ net in dimensions `1..=10`.
    pub fn sobol(n: usize, s: u32) -> Result<Self> {
        if n == 0 || n > sobol::MAX_SOBOL_DIM {
            return Err(Error::InvalidParameter(format!(
                "Sobol′ builtin supports 1 <= n <= {}, got {n}",
                sobol::MAX_SOBOL_DIM
            )));
        }
        Ambient::new(n, s)?;
        let cols = (1..=n).map(|d| sobol::columns(d, s)).collect();
        Self::from_columns(n, s, cols)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> u32 {
        self.s
    }

    pub fn ambient(&self) -> Ambient {
        Ambient { n: self.n, s: self.s }
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Image of `a` as coordinate words.
    pub fn image(&self, a: u64) -> Vec<u64> {
        self.columns
            .iter()
            .map(|cols| {
                cols.iter()
                    .enumerate()
                    .filter(|(k, _)| (a >> k) & 1 == 1)
                    .fold(0u64, |acc, (_, c)| acc ^ c)
            })
            .collect()
    }

    /// The `2^s` net points (shifted when `shift` is given) as coordinate words.
    pub fn values(&self, shift: Option<&DigitShift>) -> Result<Vec<Vec<u64>>> {
        if let Some(t) = shift {
            self.check_shift(t)?;
        }
        Ok((0..1u64 << self.s)
            .map(|a| {
                let mut v = self.image(a);
                if let Some(t) = shift {
                    for (x, tx) in v.iter_mut().zip(t.point.values()) {
                        *x ^= tx;
                    }
                }
                v
            })
            .collect())
    }

    pub fn dyadic_points(&self, shift: Option<&DigitShift>) -> Result<Vec<DyadicPoint>> {
        Ok(self
            .values(shift)?
            .into_iter()
            .map(|v| DyadicPoint::new(v, self.s).expect("net values fit resolution"))
            .collect())
    }

    fn check_shift(&self, t: &DigitShift) -> Result<()> {
        if t.point.dim() != self.n || t.point.resolution() != self.s {
            return Err(Error::DimensionMismatch {
                n: self.n,
                s: self.s,
                got_n: t.point.dim(),
                got_s: t.point.resolution(),
            });
        }
        Ok(())
    }

    fn as_subspace_unchecked(&self, ambient: Ambient) -> F2Subspace {
        let packed = (0..self.s as usize).map(|k| {
            let col: Vec<u64> = self.columns.iter().map(|c| c[k]).collect();
            ambient.pack_values(&col)
        });
        F2Subspace::span_packed(ambient, packed)
    }

    /// The net as an `s`-dimensional subspace of `Q^n(2^s)`.
    pub fn as_subspace(&self) -> F2Subspace {
        self.as_subspace_unchecked(self.ambient())
    }

    /// The point set `D` or `D ⊕ T` with exact coordinates `v / 2^s`.
    pub fn net_points(&self, shift: Option<&DigitShift>) -> Result<PointSet> {
        let values = self.values(shift)?;
        PointSet::new(self.n, values.into_iter().flatten().collect(), 1u64 << self.s)
    }

    /// Deficiency `δ` from the dual RT weight, `ρ(D^⊥) = s − δ + 1`.
    pub fn certify_deficiency(&self, cap_log2: u32) -> NetQuality {
        let dual = self.as_subspace().dual();
        if dual.dim() == 0 {
            return NetQuality {
                deficiency: 0,
                dual_rt_weight: None,
                exhaustive: true,
                method: None,
            };
        }
        let w = dual
            .rt_weight(cap_log2)
            .expect("nonzero dual has a weight");
        NetQuality {
            deficiency: (self.s + 1).saturating_sub(w.value),
            dual_rt_weight: Some(w.value),
            exhaustive: w.exhaustive,
            method: Some(w.method),
        }
    }

    pub fn certify(&self) -> NetQuality {
        self.certify_deficiency(DEFAULT_ENUMERATION_CAP_LOG2)
    }
}

/// Quality of a net. With `exhaustive == false` the deficiency is a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NetQuality {
    pub deficiency: u32,
    pub dual_rt_weight: Option<u32>,
    pub exhaustive: bool,
    pub method: Option<WeightMethod>,
}

/// A digit shift `T ∈ Q^n(2^s)` and the seed it came from, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitShift {
    pub point: DyadicPoint,
    pub seed: Option<u64>,
}

impl DigitShift {
    pub fn new(point: DyadicPoint) -> Self {
        Self { point, seed: None }
    }

    pub fn zero(n: usize, s: u32) -> Self {
        Self::new(DyadicPoint::zero(n, s))
    }
}

/// A stream of uniform digit shifts; each draw consumes exactly `n·s` bits.
pub struct ShiftStream {
    rng: ChaCha8Rng,
    buffer: u64,
    available: u32,
    seed: u64,
}

impl ShiftStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            buffer: 0,
            available: 0,
            seed,
        }
    }

    fn take_bits(&mut self, mut k: u32) -> u64 {
        let mut out = 0u64;
        let mut filled = 0u32;
        while k > 0 {
            if self.available == 0 {
                self.buffer = self.rng.next_u64();
                self.available = 64;
            }
            let take = k.min(self.available);
            let chunk = if take == 64 {
                self.buffer
            } else {
                self.buffer & ((1u64 << take) - 1)
            };
            out |= chunk << filled;
            self.buffer = if take == 64 { 0 } else { self.buffer >> take };
            self.available -= take;
            filled += take;
            k -= take;
        }
        out
    }

    pub fn next_shift(&mut self, n: usize, s: u32) -> DigitShift {
        let coords = (0..n).map(|_| self.take_bits(s)).collect();
        DigitShift {
            point: DyadicPoint::new(coords, s).expect("s-bit draws"),
            seed: Some(self.seed),
        }
    }
}

/// Uniform digit shift on `Q^n(2^s)`, deterministic in `seed`.
pub fn random_shift(n: usize, s: u32, seed: u64) -> DigitShift {
    ShiftStream::new(seed).next_shift(n, s)
}

/// Points in `[0, 1)^n` with exact coordinates `numerator / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    n: usize,
    numerators: Vec<u64>,
    denominator: u64,
}

impl PointSet {
    pub fn new(n: usize, numerators: Vec<u64>, denominator: u64) -> Result<Self> {
        if n == 0 || denominator == 0 || !numerators.len().is_multiple_of(n) {
            return Err(Error::InvalidParameter(
                "malformed point set dimensions".into(),
            ));
        }
        if let Some(bad) = numerators.iter().find(|&&x| x >= denominator) {
            return Err(Error::OutOfRange(format!("{bad}/{denominator}")));
        }
        Ok(Self {
            n,
            numerators,
            denominator,
        })
    }

    pub fn from_dyadic(points: &[DyadicPoint]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty point list".into()))?;
        let (n, s) = (first.dim(), first.resolution());
        let mut nums = Vec::with_capacity(n * points.len());
        for p in points {
            if p.dim() != n || p.resolution() != s {
                return Err(Error::DimensionMismatch {
                    n,
                    s,
                    got_n: p.dim(),
                    got_s: p.resolution(),
                });
            }
            nums.extend_from_slice(p.values());
        }
        Self::new(n, nums, 1u64 << s)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.numerators.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn numerators(&self, i: usize) -> &[u64] {
        &self.numerators[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u64]> {
        self.numerators.chunks(self.n)
    }

    pub fn point_f64(&self, i: usize) -> Vec<f64> {
        let d = self.denominator as f64;
        self.numerators(i).iter().map(|&x| x as f64 / d).collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point_f64(i)).collect()
    }

    /// Whether all points are distinct.
    pub fn is_duplicate_free(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.len());
        self.iter().all(|p| seen.insert(p.to_vec()))
    }

    /// CSV rows (no header): decimal doubles, or exact `num/den` strings.
    pub fn to_csv_rows(&self, exact: bool) -> String {
        let mut out = String::new();
        for p in self.iter() {
            let row: Vec<String> = p
                .iter()
                .map(|&x| {
                    if exact {
                        format!("{x}/{}", self.denominator)
                    } else {
                        format!("{}", x as f64 / self.denominator as f64)
                    }
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Whether every dyadic box of volume `2^{-s+δ}` holds exactly `2^δ` points,
/// where `N = 2^s`.
pub fn verify_box_counts(points: &PointSet, deficiency: u32) -> Result<bool> {
    let count = points.len();
    if count == 0 || !count.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { count });
    }
    let s = count.trailing_zeros();
    if deficiency > s {
        return Err(Error::InvalidParameter(format!(
            "deficiency {deficiency} exceeds s = {s}"
        )));
    }
    let total = s - deficiency;
    let expected = 1usize << deficiency;
    let den = points.denominator() as u128;
    let mut ok = true;
    for_each_composition(points.dim(), total, total, &mut |shape| {
        let mut cells: HashMap<u128, usize> = HashMap::with_capacity(1 << total.min(20));
        for p in points.iter() {
            let mut key = 0u128;
            for (&x, &d) in p.iter().zip(shape) {
                let digit = ((x as u128) << d) / den;
                key = (key << d) | digit;
            }
            *cells.entry(key).or_insert(0) += 1;
        }
        if cells.len() != 1usize << total || cells.values().any(|&c| c != expected) {
            ok = false;
            return false;
        }
        true
    });
    Ok(ok)
}

/// Outcome of rescaling a `2^s`-point net down to `N` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub points: PointSet,
    /// Side `a` of the cube `[0, a]^n` the points were taken from.
    pub side: DyadicRational,
    /// Net points inside `[0, a]^n` that tie with the `N`-th point on the
    /// selection order and were left out.
    pub dropped: usize,
}

/// Take `N` points of the (shifted) net inside `[0, a]^n`, `a > 1/2`, and
/// scale them by `1/a`.
///
/// Points are ordered by their largest coordinate (ties: lexicographic).
/// The first `N` are kept and `a` is the midpoint between the `N`-th maximum
/// (or `1/2`, if larger) and the next larger maximum present (or 1), so
/// every kept point lands strictly inside `[0, 1)^n`.
pub fn rescale_to_count(
    gens: &GeneratorSet,
    count: usize,
    shift: Option<&DigitShift>,
) -> Result<Rescaled> {
    let s = gens.resolution();
    let total = 1usize << s;
    let lower = if s == 0 { 1 } else { 1usize << (s - 1) };
    if count == 0 || count < lower || count > total {
        return Err(Error::RescaleFailure {
            count,
            msg: format!("N must lie in [2^(s-1), 2^s] = [{lower}, {total}] for s = {s}"),
        });
    }
    let values = gens.values(shift)?;
    if count == total {
        return Ok(Rescaled {
            points: PointSet::new(gens.dim(), values.into_iter().flatten().collect(), total as u64)?,
            side: DyadicRational::one(),
            dropped: 0,
        });
    }
    let mut order: Vec<(u64, &Vec<u64>)> = values
        .iter()
        .map(|v| (*v.iter().max().expect("n >= 1"), v))
        .collect();
    order.sort();
    let half = 1u64 << (s - 1);
    let low = order[count - 1].0.max(half);
    let high = order
        .iter()
        .map(|(m, _)| *m)
        .find(|&m| m > low)
        .unwrap_or(1u64 << s);
    // a = (low + high) / 2^{s+1}
    let side_units = low + high;
    if side_units <= 2 * half {
        return Err(Error::RescaleFailure {
            count,
            msg: "no side length above 1/2".into(),
        });
    }
    let inside = order.iter().filter(|(m, _)| *m <= low).count();
    let numerators = order[..count]
        .iter()
        .flat_map(|(_, v)| v.iter().map(|&x| 2 * x))
        .collect();
    Ok(Rescaled {
        points: PointSet::new(gens.dim(), numerators, side_units)?,
        side: DyadicRational::from_parts(side_units as i64, s + 1),
        dropped: inside - count,
    })
}

/// Where generator matrices come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetSource {
    VanDerCorput,
    Sobol,
    File(String),
}

impl std::str::FromStr for NetSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "van-der-corput" => Ok(NetSource::VanDerCorput),
            "sobol" => Ok(NetSource::Sobol),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(NetSource::File(path.to_string())),
                _ => Err(Error::UnknownNet(other.to_string())),
            },
        }
    }
}

impl std::fmt::Display for NetSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NetSource::VanDerCorput => write!(f, "van-der-corput"),
            NetSource::Sobol => write!(f, "sobol"),
            NetSource::File(p) => write!(f, "file:{p}"),
        }
    }
}

/// Resolve a net source. Builtins need `s` (and `n` for Sobol′; van der Corput
/// is two-dimensional). Files carry their own `n` and `s`.
pub fn load_generators(source: &NetSource, n: Option<usize>, s: Option<u32>) -> Result<GeneratorSet> {
    match source {
        NetSource::VanDerCorput => {
            if let Some(n) = n {
                if n != 2 {
                    return Err(Error::InvalidParameter(format!(
                        "van-der-corput is two-dimensional, got n = {n}"
                    )));
                }
            }
            let s = s.ok_or_else(|| Error::InvalidParameter("--s is required".into()))?;
            GeneratorSet::van_der_corput(s)
        }
        NetSource::Sobol => {
            let s = s.ok_or_else(|| Error::InvalidParameter("--s is required".into()))?;
            GeneratorSet::sobol(n.unwrap_or(2), s)
        }
        NetSource::File(path) => {
            let text = std::fs::read_to_string(Path::new(path))?;
            parse_matrix_file(&text)
        }
    }
}
