use crate::error::{Error, Result};

/// Whether `alpha_i = alpha_{p-i}` for every `i`.
pub fn is_symmetric(alpha: &[u64]) -> bool {
    let n = alpha.len();
    (0..n).all(|i| alpha[i] == alpha[n - 1 - i])
}

/// Rank over `F_p` of the `p x p` circulant matrix whose first row is
/// `(alpha_1, …, alpha_{p-1}, 0)` and whose later rows are cyclic right
/// shifts.
pub fn circulant_rank(alpha: &[u64], p: u64) -> Result<usize> {
    if alpha.len() as u64 + 1 != p {
        return Err(Error::InvalidVector(format!(
            "alpha has length {}, expected {}",
            alpha.len(),
            p.saturating_sub(1)
        )));
    }
    let n = p as usize;
    let mut first: Vec<u64> = alpha.iter().map(|x| x % p).collect();
    first.push(0);
    let mut rows: Vec<Vec<u64>> = (0..n)
        .map(|s| (0..n).map(|j| first[(j + n - s) % n]).collect())
        .collect();
    Ok(rank_mod_p(&mut rows, p))
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Gaussian elimination over `F_p` (p prime).
pub(crate) fn rank_mod_p(rows: &mut [Vec<u64>], p: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c] % p != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = pow_mod(rows[rank][c], p - 2, p);
        for x in rows[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let f = rows[r][c];
                for j in 0..cols {
                    rows[r][j] = (rows[r][j] + p * p - f * rows[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}
