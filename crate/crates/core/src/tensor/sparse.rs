use rayon::prelude::*;

use super::{Matrix, PAR_MIN_ROWS};
use crate::error::{Error, Result};

/// Compressed sparse row matrix with `f32` values.
///
/// Column indices inside a row keep the order they were inserted in; the
/// graph constructors insert them by ascending edge id, which fixes the
/// summation order of [`spmm`].
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f32>,
}

/// The vertex × edge incidence matrix: nonzero `(v, e)` iff edge `e` ends at `v`.
pub type IncidenceMatrix = CsrMatrix;

impl CsrMatrix {
    pub fn from_parts(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<u32>,
        values: Vec<f32>,
    ) -> Result<Self> {
        if row_ptr.len() != rows + 1 || row_ptr[0] != 0 {
            return Err(Error::shape(
                "CsrMatrix",
                format!("{} row pointers starting at 0", rows + 1),
                row_ptr.len(),
            ));
        }
        if row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(
                "row pointers must be non-decreasing".into(),
            ));
        }
        let nnz = *row_ptr.last().unwrap();
        if col_idx.len() != nnz || values.len() != nnz {
            return Err(Error::shape(
                "CsrMatrix",
                format!("{nnz} nonzeros"),
                format!("{} indices / {} values", col_idx.len(), values.len()),
            ));
        }
        if let Some(&c) = col_idx.iter().find(|&&c| c as usize >= cols) {
            return Err(Error::shape("CsrMatrix", format!("column < {cols}"), c));
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    /// `(column, value)` pairs of row `r` in stored order.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f32)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Dense copy; duplicate entries are summed.
    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                let cur = m.get(r, c);
                m.set(r, c, cur + v);
            }
        }
        m
    }
}

/// FLOPs of a weighted sparse × dense product.
pub fn spmm_flops(nnz: usize, k: usize) -> u64 {
    2 * nnz as u64 * k as u64
}

fn check(op: &'static str, s: &CsrMatrix, d: &Matrix) -> Result<()> {
    if s.cols != d.rows() {
        return Err(Error::shape(
            op,
            format!("dense rows == sparse cols ({})", s.cols),
            d.rows(),
        ));
    }
    Ok(())
}

/// Sparse × dense product: output row `v` is `Σ w · d[c]` over the nonzeros
/// `(v, c, w)`, accumulated in stored order.
pub fn spmm(s: &CsrMatrix, d: &Matrix) -> Result<Matrix> {
    check("spmm", s, d)?;
    let k = d.dim();
    let mut out = Matrix::zeros(s.rows, k);
    if k == 0 {
        return Ok(out);
    }
    let dd = d.as_slice();
    out.as_mut_slice()
        .par_chunks_mut(k)
        .with_min_len(PAR_MIN_ROWS)
        .enumerate()
        .for_each(|(r, orow)| {
            for p in s.row_ptr[r]..s.row_ptr[r + 1] {
                let c = s.col_idx[p] as usize;
                let w = s.values[p];
                let src = &dd[c * k..(c + 1) * k];
                for (o, &x) in orow.iter_mut().zip(src) {
                    *o += w * x;
                }
            }
        });
    Ok(out)
}

/// Max-reduction variant of [`spmm`]: output row `v` is the elementwise max
/// of `w · d[c]` over its nonzeros; empty rows are zero.
pub fn spmm_max(s: &CsrMatrix, d: &Matrix) -> Result<Matrix> {
    check("spmm_max", s, d)?;
    let k = d.dim();
    let mut out = Matrix::zeros(s.rows, k);
    if k == 0 {
        return Ok(out);
    }
    let dd = d.as_slice();
    out.as_mut_slice()
        .par_chunks_mut(k)
        .with_min_len(PAR_MIN_ROWS)
        .enumerate()
        .for_each(|(r, orow)| {
            let span = s.row_ptr[r]..s.row_ptr[r + 1];
            if span.is_empty() {
                return;
            }
            orow.fill(f32::NEG_INFINITY);
            for p in span {
                let c = s.col_idx[p] as usize;
                let w = s.values[p];
                for (o, &x) in orow.iter_mut().zip(&dd[c * k..(c + 1) * k]) {
                    *o = o.max(w * x);
                }
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parts() {
        assert!(CsrMatrix::from_parts(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::from_parts(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(CsrMatrix::from_parts(1, 2, vec![0, 1], vec![1], vec![1.0]).is_ok());
    }

    #[test]
    fn max_with_negative_entries() {
        let s = CsrMatrix::from_parts(2, 2, vec![0, 2, 2], vec![0, 1], vec![1.0, 1.0]).unwrap();
        let d = Matrix::from_rows(&[[-3.0, 1.0], [-2.0, -5.0]]).unwrap();
        let out = spmm_max(&s, &d).unwrap();
        assert_eq!(out.row(0), &[-2.0, 1.0]);
        assert_eq!(out.row(1), &[0.0, 0.0]);
    }
}
