//! Wall-clock timings of the Birkhoff matvecs and of dense Newton solves.

use std::hint::black_box;
use std::time::Instant;

use birkhoff_core::birkhoff::BirkhoffOperators;
use birkhoff_core::grid::{make_grid, GridFamily, GridSpec};
use birkhoff_core::kkt::assemble;
use birkhoff_core::model::builtin_problem;
use birkhoff_core::solver::initial_guess;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{BenchOp, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub operation: String,
    #[serde(rename = "N")]
    pub n: usize,
    /// Median over the repetitions.
    pub wall_seconds: f64,
    /// Sum of the output vector entries.
    pub checksum: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub family: GridFamily,
    pub problem: String,
    pub ns: Vec<usize>,
    pub reps: usize,
    pub ops: Vec<BenchOp>,
    pub seed: u64,
}

impl BenchOp {
    pub fn name(self) -> &'static str {
        match self {
            BenchOp::DenseMatvec => "dense_matvec",
            BenchOp::FastMatvec => "fast_matvec",
            BenchOp::DenseLu => "dense_lu",
        }
    }
}

pub fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let m = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[m]
    } else {
        0.5 * (samples[m - 1] + samples[m])
    }
}

/// Median wall time of `reps` calls and the checksum of the last output.
fn time_op(reps: usize, mut f: impl FnMut() -> Result<Vec<f64>, CliError>) -> Result<(f64, f64), CliError> {
    let mut times = Vec::with_capacity(reps);
    let mut checksum = 0.0;
    for _ in 0..reps {
        let start = Instant::now();
        let out = black_box(f()?);
        times.push(start.elapsed().as_secs_f64());
        checksum = out.iter().sum();
    }
    Ok((median(&mut times), checksum))
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let ops = BirkhoffOperators::new(make_grid(GridSpec::new(cfg.family, n))?);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ n as u64);
        let v = random_vector(&mut rng, n + 1);
        for &op in &cfg.ops {
            let (wall_seconds, checksum) = match op {
                BenchOp::DenseMatvec => time_op(cfg.reps, || Ok(ops.apply_ba(black_box(&v))))?,
                BenchOp::FastMatvec => time_op(cfg.reps, || {
                    ops.apply_ba_fast(black_box(&v))
                        .map_err(|e| CliError::Validation(e.to_string()))
                })?,
                BenchOp::DenseLu => {
                    let problem = builtin_problem(&cfg.problem)?;
                    let k = assemble(&initial_guess(&problem, ops.grid()), &problem, &ops)?;
                    let a = k.to_dense()?;
                    let b = DVector::from_vec(random_vector(&mut rng, k.dim()));
                    time_op(cfg.reps, || {
                        a.clone()
                            .lu()
                            .solve(&b)
                            .map(|x| x.as_slice().to_vec())
                            .ok_or_else(|| CliError::Numerical(format!("singular Newton matrix at N={n}")))
                    })?
                }
            };
            rows.push(BenchRow {
                operation: op.name().to_string(),
                n,
                wall_seconds,
                checksum,
            });
        }
    }
    Ok(rows)
}
