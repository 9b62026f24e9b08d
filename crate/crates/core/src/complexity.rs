//! Memory and operation-count arithmetic for the Hessian and for dense
//! versus structured linear solves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BYTES_PER_VALUE: u64 = 8;

/// Baseline processor speed for [`table1_row`]: one teraflop per second.
pub const TERAFLOPS: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexityError {
    #[error("N_x and N_n must be at least 1 (got N_x={nx}, N_n={nn})")]
    InvalidInput { nx: u64, nn: u64 },
    #[error("memory estimate overflows 64-bit arithmetic")]
    Overflow,
}

/// Stored Hamiltonian values `(2 N_x^2 + 2 N_x N_u + N_u^2) N_n`, or `None`
/// on overflow.
pub fn hamiltonian_storage(nx: u64, nu: u64, nn: u64) -> Option<u64> {
    let per_node = 2u64
        .checked_mul(nx.checked_mul(nx)?)?
        .checked_add(2u64.checked_mul(nx.checked_mul(nu)?)?)?
        .checked_add(nu.checked_mul(nu)?)?;
    per_node.checked_mul(nn)
}

/// Bytes needed to store the data-dependent Hessian rows.
pub fn memory_estimate(nx: u64, nu: u64, nn: u64, bytes_per_value: u64) -> Result<u64, ComplexityError> {
    if nx == 0 || nn == 0 {
        return Err(ComplexityError::InvalidInput { nx, nn });
    }
    hamiltonian_storage(nx, nu, nn)
        .and_then(|v| v.checked_mul(bytes_per_value))
        .ok_or(ComplexityError::Overflow)
}

/// One row of the space/time complexity table for `n` variables: storage of
/// a length-`n` vector and an `n x n` matrix in GB, and seconds for
/// `n`, `n ln n`, `n^2`, `n^3` operations at `flops` per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub n: u64,
    pub mem_n_gb: f64,
    pub mem_n2_gb: f64,
    pub t_n: f64,
    pub t_nlogn: f64,
    pub t_n2: f64,
    pub t_n3: f64,
}

impl Table1Row {
    /// Cells in column order.
    pub fn cells(&self) -> [f64; 6] {
        [
            self.mem_n_gb,
            self.mem_n2_gb,
            self.t_n,
            self.t_nlogn,
            self.t_n2,
            self.t_n3,
        ]
    }
}

pub fn table1_row(n: u64, flops: f64, bytes_per_value: u64) -> Table1Row {
    let nf = n as f64;
    let b = bytes_per_value as f64;
    Table1Row {
        n,
        mem_n_gb: b * nf / 1e9,
        mem_n2_gb: b * nf * nf / 1e9,
        t_n: nf / flops,
        // natural log
        t_nlogn: nf * nf.ln() / flops,
        t_n2: nf * nf / flops,
        t_n3: nf * nf * nf / flops,
    }
}

/// Rounds to `digits` significant figures.
pub fn round_significant(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mag = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits as i32 - 1 - mag);
    (x * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aerospace_guidance_memory() {
        assert_eq!(memory_estimate(6, 3, 1_000_000, 8).unwrap(), 936_000_000);
        assert_eq!(hamiltonian_storage(6, 3, 1_000_000), Some(117_000_000));
    }

    #[test]
    fn scalar_problem_memory() {
        for nn in [1u64, 9, 1000] {
            assert_eq!(memory_estimate(1, 1, nn, 8).unwrap(), 40 * nn);
        }
        assert_eq!(memory_estimate(1, 1, 1, 8).unwrap(), 40);
        // no controls degenerates to 2 N_x^2 N_n
        assert_eq!(memory_estimate(2, 0, 10, 8).unwrap(), 8 * 8 * 10);
    }

    #[test]
    fn memory_errors() {
        assert!(matches!(memory_estimate(0, 1, 1, 8), Err(ComplexityError::InvalidInput { .. })));
        assert_eq!(memory_estimate(u64::MAX, 1, 1, 8), Err(ComplexityError::Overflow));
        assert_eq!(memory_estimate(1 << 20, 1 << 20, 1 << 30, 8), Err(ComplexityError::Overflow));
    }

    #[test]
    fn table_row_for_a_thousand() {
        let r = table1_row(1000, TERAFLOPS, 8);
        assert!((r.mem_n2_gb - 0.008).abs() < 1e-15);
        assert!((r.t_n3 - 0.001).abs() < 1e-15);
        assert_eq!(round_significant(r.t_nlogn, 1), 7e-9);
    }

    #[test]
    fn significant_rounding() {
        assert_eq!(round_significant(13.8e-6, 1), 1e-5);
        assert_eq!(round_significant(0.000_008, 1), 8e-6);
        assert_eq!(round_significant(-2.6, 1), -3.0);
        assert_eq!(round_significant(0.0, 1), 0.0);
    }
}
