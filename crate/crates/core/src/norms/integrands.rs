use crate::nets::DigitShift;
use crate::GeneratorSet;

const INV_2_64: f64 = 1.0 / 18_446_744_073_709_551_616.0;

/// A bounded function of `dim()` uniform digit words (64 digits each).
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, words: &[u64]) -> f64;
}

/// Wrap a closure as an [`Integrand`].
pub struct FnIntegrand<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[u64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[u64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, words: &[u64]) -> f64 {
        (self.f)(words)
    }
}

#[inline]
fn word_to_f64(w: u64) -> f64 {
    // midpoint of the 2^-64 cell the word stands for
    (w as f64 + 0.5) * INV_2_64
}

/// Net points with either a fixed shift or a shift read from the sample.
#[derive(Debug, Clone)]
struct ShiftedNet {
    n: usize,
    s: u32,
    points: Vec<u64>,
    fixed: Option<Vec<u64>>,
}

impl ShiftedNet {
    fn new(gens: &GeneratorSet, shift: Option<&DigitShift>) -> Self {
        let points = gens
            .values(None)
            .expect("unshifted values")
            .into_iter()
            .flatten()
            .collect();
        Self {
            n: gens.dim(),
            s: gens.resolution(),
            points,
            fixed: shift.map(|t| t.point.values().to_vec()),
        }
    }

    fn dim(&self) -> usize {
        if self.fixed.is_some() {
            self.n
        } else {
            2 * self.n
        }
    }

    fn shift(&self, words: &[u64]) -> Vec<u64> {
        match &self.fixed {
            Some(t) => t.clone(),
            None if self.s == 0 => vec![0; self.n],
            None => words[self.n..2 * self.n]
                .iter()
                .map(|w| w >> (64 - self.s))
                .collect(),
        }
    }

    fn scaled_volume(&self, y: &[u64]) -> f64 {
        y.iter().map(|&w| word_to_f64(w)).product::<f64>() * (self.s as f64).exp2()
    }
}

/// `𝒟_N[D ⊕ T; Y]` as a function of `Y` (fixed `T`) or of `(Y, T)`.
#[derive(Debug, Clone)]
pub struct DiscrepancyIntegrand(ShiftedNet);

impl DiscrepancyIntegrand {
    /// With `shift = None`, `T` is sampled jointly with `Y`.
    pub fn new(gens: &GeneratorSet, shift: Option<&DigitShift>) -> Self {
        Self(ShiftedNet::new(gens, shift))
    }
}

impl Integrand for DiscrepancyIntegrand {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, words: &[u64]) -> f64 {
        let net = &self.0;
        let y = &words[..net.n];
        let t = net.shift(words);
        let up = 64 - net.s;
        let count = net
            .points
            .chunks(net.n)
            .filter(|x| {
                x.iter().zip(&t).zip(y).all(|((&xj, &tj), &yj)| {
                    let v = xj ^ tj;
                    // x < y almost surely when the leading digits agree
                    (if up == 64 { 0 } else { v << up }) <= yj
                })
            })
            .count();
        count as f64 - net.scaled_volume(y)
    }
}

/// `ℳ[D ⊕ T; Y] = Σ_X χ_s(Y, X ⊕ T) − 2^s Π y_j`, fixed or sampled `T`.
#[derive(Debug, Clone)]
pub struct ApproximationIntegrand {
    net: ShiftedNet,
    /// `D^⊥ = {0}`: the dual sum is empty and `ℳ ≡ 0`.
    trivial: bool,
}

impl ApproximationIntegrand {
    pub fn new(gens: &GeneratorSet, shift: Option<&DigitShift>) -> Self {
        Self {
            net: ShiftedNet::new(gens, shift),
            trivial: gens.as_subspace().dual().dim() == 0,
        }
    }
}

impl Integrand for ApproximationIntegrand {
    fn dim(&self) -> usize {
        self.net.dim()
    }

    fn eval(&self, words: &[u64]) -> f64 {
        if self.trivial {
            return 0.0;
        }
        let net = &self.net;
        let y = &words[..net.n];
        let t = net.shift(words);
        let s = net.s;
        // y_j 2^s = cell_j + frac_j
        let cells: Vec<u64> = y
            .iter()
            .map(|&w| if s == 0 { 0 } else { w >> (64 - s) })
            .collect();
        let fracs: Vec<f64> = y.iter().map(|&w| word_to_f64(w.checked_shl(s).unwrap_or(0))).collect();
        let mut acc = 0.0;
        'points: for x in net.points.chunks(net.n) {
            let mut term = 1.0;
            for j in 0..net.n {
                let v = x[j] ^ t[j];
                if v > cells[j] {
                    continue 'points;
                }
                if v == cells[j] {
                    term *= fracs[j];
                }
            }
            acc += term;
        }
        acc - net.scaled_volume(y)
    }
}
