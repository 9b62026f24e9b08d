use nalgebra::DMatrix;

use crate::kkt::{KktError, KktMatrix};

/// Row-permuted Hessian `P A = [A_0; A_data]`.
///
/// `A_0` holds residual blocks 1, 2 and rows 6, 7, which involve only the
/// grid (`B^a`, `B^b`, weights, ones and signs). `A_data` holds blocks 3, 4, 5
/// and rows 8, 9, 10, where every problem-dependent entry lives.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitKkt {
    pub a0: DMatrix<f64>,
    pub adata: DMatrix<f64>,
    permutation: Vec<usize>,
}

impl SplitKkt {
    /// `permutation()[r]` is the row of `A` that became row `r` of `P A`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Undoes the row permutation, giving back `A`.
    pub fn unpermute(&self) -> DMatrix<f64> {
        let n = self.permutation.len();
        let n0 = self.a0.nrows();
        let mut a = DMatrix::zeros(n, self.a0.ncols());
        for (r, &orig) in self.permutation.iter().enumerate() {
            let src = if r < n0 {
                self.a0.row(r)
            } else {
                self.adata.row(r - n0)
            };
            a.row_mut(orig).copy_from(&src);
        }
        a
    }
}

pub fn permute_split(k: &KktMatrix<'_>) -> Result<SplitKkt, KktError> {
    let l = k.layout();
    let nn = l.n_nodes();
    let n = l.len();
    if n > super::DEFAULT_DENSE_CAP {
        return Err(KktError::DenseCap {
            n,
            cap: super::DEFAULT_DENSE_CAP,
        });
    }
    let top: Vec<usize> = (0..2 * nn).chain([l.scalar(0), l.scalar(1)]).collect();
    let bottom: Vec<usize> = (2 * nn..5 * nn)
        .chain([l.scalar(2), l.scalar(3), l.scalar(4)])
        .collect();

    let mut row_of = vec![(false, 0usize); n];
    for (r, &orig) in top.iter().enumerate() {
        row_of[orig] = (true, r);
    }
    for (r, &orig) in bottom.iter().enumerate() {
        row_of[orig] = (false, r);
    }
    let mut a0 = DMatrix::zeros(top.len(), n);
    let mut adata = DMatrix::zeros(bottom.len(), n);
    k.for_each_entry(|r, c, v| match row_of[r] {
        (true, rr) => a0[(rr, c)] = v,
        (false, rr) => adata[(rr, c)] = v,
    });

    let mut permutation = top;
    permutation.extend(bottom);
    Ok(SplitKkt {
        a0,
        adata,
        permutation,
    })
}
