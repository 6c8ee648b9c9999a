//! Upper binomial tails `F_m^k(p) = Pr(Bin(k, p) ≥ m)` and their
//! derivatives in `p`.

use statrs::function::beta::beta_reg;
use statrs::function::factorial::{binomial, ln_binomial};

use super::DynamicsError;

/// Largest `k` evaluated by direct summation; above it the regularized
/// incomplete beta function is used.
pub const DIRECT_SUM_MAX_K: u32 = 60;

/// `Pr(Bin(k, p) ≥ m)`, validated.
pub fn binomial_tail(k: u32, m: u32, p: f64) -> Result<f64, DynamicsError> {
    if k == 0 {
        return Err(DynamicsError::ZeroSampleSize);
    }
    if m > k {
        return Err(DynamicsError::ThresholdOutOfRange { k, m });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(DynamicsError::ProbabilityOutOfRange(p));
    }
    Ok(tail(k, m, p))
}

/// Unchecked tail for callers that already hold valid `(k, m, p)`.
pub(crate) fn tail(k: u32, m: u32, p: f64) -> f64 {
    if m == 0 || p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if m == k {
        return p.powi(k as i32);
    }
    if m == 1 {
        // 1 − (1−p)^k without cancellation.
        return -(k as f64 * (-p).ln_1p()).exp_m1();
    }
    if k <= DIRECT_SUM_MAX_K {
        direct_tail(k, m, p)
    } else {
        beta_reg(m as f64, (k - m + 1) as f64, p)
    }
}

/// Sums whichever side of the distribution lies below its mean, so the
/// summed side is small and `1 − lower` stays monotone in `p`.
fn direct_tail(k: u32, m: u32, p: f64) -> f64 {
    if (m as f64) - 1.0 < k as f64 * p {
        1.0 - pmf_sum(k, 0, m - 1, p)
    } else {
        pmf_sum(k, m, k, p).min(1.0)
    }
}

/// Compensated (Neumaier) sum of `Pr(Bin(k, p) = l)` for `l` in `lo..=hi`.
/// Every term is positive, so the sum never cancels.
fn pmf_sum(k: u32, lo: u32, hi: u32, p: f64) -> f64 {
    let q = 1.0 - p;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for l in lo..=hi {
        let term = binomial(k as u64, l as u64) * p.powi(l as i32) * q.powi((k - l) as i32);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `d/dp F_m^k(p) = m·C(k, m)·p^(m−1)·(1−p)^(k−m)`.
pub(crate) fn tail_derivative(k: u32, m: u32, p: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let (k64, m64) = (k as u64, m as u64);
    let lead = m as f64;
    // Exact endpoint values avoid 0·ln(0).
    if p <= 0.0 {
        return if m == 1 { k as f64 } else { 0.0 };
    }
    if p >= 1.0 {
        return if m == k { k as f64 } else { 0.0 };
    }
    if k <= DIRECT_SUM_MAX_K {
        lead * binomial(k64, m64) * p.powi(m as i32 - 1) * (1.0 - p).powi((k - m) as i32)
    } else {
        let log = lead.ln() + ln_binomial(k64, m64) + (m - 1) as f64 * p.ln() + (k - m) as f64 * (-p).ln_1p();
        log.exp()
    }
}
