//! Three-term recurrences for the Chebyshev and Legendre families.

/// Returns `(P_n(x), P_{n-1}(x))` by the Bonnet recurrence. For `n == 0` the
/// second entry is zero.
pub(crate) fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Fills `out[k] = P_k(x)` for `k = 0..out.len()`.
pub(crate) fn legendre_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_low_degrees() {
        let x = 0.3_f64;
        let (p3, p2) = legendre_pair(3, x);
        assert!((p2 - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        assert!((p3 - 0.5 * (5.0 * x.powi(3) - 3.0 * x)).abs() < 1e-15);
        let mut all = [0.0; 4];
        legendre_all(x, &mut all);
        assert_eq!(all[3], p3);
    }
}
