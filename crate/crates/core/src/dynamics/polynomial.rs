//! Monomial form of binomial tails.
//!
//! `F_m^k(p) = Σ_{j=m}^{k} (−1)^(j−m) · C(j−1, m−1) · C(k, j) · p^j`, with
//! integer coefficients that fit in `i128` for `k ≤ 60`.

use super::DynamicsError;

/// Largest sample size whose tail coefficients are computed exactly.
pub const MAX_EXACT_DEGREE: u32 = 60;

fn pascal(n: u32) -> Vec<Vec<i128>> {
    let mut rows: Vec<Vec<i128>> = vec![vec![1]];
    for i in 1..=n as usize {
        let prev = &rows[i - 1];
        let mut row = vec![1i128; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] + prev[j];
        }
        rows.push(row);
    }
    rows
}

/// Integer coefficients `c_0, …, c_k` of `F_m^k(p) = Σ c_j p^j`.
pub fn tail_coefficients(k: u32, m: u32) -> Result<Vec<i128>, DynamicsError> {
    if k == 0 {
        return Err(DynamicsError::ZeroSampleSize);
    }
    if m > k {
        return Err(DynamicsError::ThresholdOutOfRange { k, m });
    }
    if k > MAX_EXACT_DEGREE {
        return Err(DynamicsError::DegreeTooLarge {
            k,
            max: MAX_EXACT_DEGREE,
        });
    }
    let mut coeffs = vec![0i128; k as usize + 1];
    if m == 0 {
        coeffs[0] = 1;
        return Ok(coeffs);
    }
    let c = pascal(k);
    let (k, m) = (k as usize, m as usize);
    for j in m..=k {
        let magnitude = c[j - 1][m - 1]
            .checked_mul(c[k][j])
            .ok_or(DynamicsError::DegreeTooLarge {
                k: k as u32,
                max: MAX_EXACT_DEGREE,
            })?;
        coeffs[j] = if (j - m) % 2 == 0 { magnitude } else { -magnitude };
    }
    Ok(coeffs)
}
