//! Sobol′ generator matrices from Joe–Kuo primitive polynomials and initial
//! direction numbers (dimensions 2..=10; dimension 1 is the identity).

/// `(degree, polynomial coefficients a, initial m_k)` for dimensions 2..=10.
const JOE_KUO: [(u32, u32, &[u64]); 9] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

pub const MAX_SOBOL_DIM: usize = JOE_KUO.len() + 1;

/// Direction integers `m_1..m_s` (odd, `m_k < 2^k`) for dimension `dim` (1-based).
pub fn direction_integers(dim: usize, s: u32) -> Vec<u64> {
    assert!((1..=MAX_SOBOL_DIM).contains(&dim));
    let s = s as usize;
    if dim == 1 {
        return vec![1; s];
    }
    let (deg, a, init) = JOE_KUO[dim - 2];
    let deg = deg as usize;
    let mut m: Vec<u64> = init.iter().copied().take(s).collect();
    for i in deg..s {
        let mut next = m[i - deg] ^ (m[i - deg] << deg);
        for k in 1..deg {
            if (a >> (deg - 1 - k)) & 1 == 1 {
                next ^= m[i - k] << k;
            }
        }
        m.push(next);
    }
    m
}

/// Column images of the generator matrix: column `k` (0-based) is the
/// `s`-digit word `m_{k+1} · 2^{s-k-1}`.
pub fn columns(dim: usize, s: u32) -> Vec<u64> {
    direction_integers(dim, s)
        .into_iter()
        .enumerate()
        .map(|(k, m)| m << (s as usize - k - 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_integers_are_odd_and_bounded() {
        for dim in 1..=MAX_SOBOL_DIM {
            for (k, m) in direction_integers(dim, 20).into_iter().enumerate() {
                assert_eq!(m & 1, 1);
                assert!(m < 1 << (k + 1));
            }
        }
    }

    #[test]
    fn known_recurrence_values() {
        // x + 1 gives the Pascal matrix columns
        assert_eq!(direction_integers(2, 6), vec![1, 3, 5, 15, 17, 51]);
        // x^2 + x + 1 from m = 1, 3: m_3 = 4·1 ⊕ 1 ⊕ 2·3
        assert_eq!(direction_integers(3, 3), vec![1, 3, 3]);
    }
}
