use rayon::prelude::*;

use super::{Matrix, PAR_MIN_ROWS};
use crate::error::{Error, Result};

/// FLOPs of an `m×k · k×n` product.
pub fn gemm_flops(m: usize, k: usize, n: usize) -> u64 {
    2 * (m as u64) * (k as u64) * (n as u64)
}

/// Dense matrix product `a · b`.
pub fn gemm(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    linear(a, b, None)
}

/// `x · w + bias`, the bias broadcast over rows.
///
/// Each output row accumulates over `k` in ascending order, so the result is
/// independent of how rows are split across threads.
pub fn linear(x: &Matrix, w: &Matrix, bias: Option<&[f32]>) -> Result<Matrix> {
    if x.cols() != w.rows() {
        return Err(Error::shape(
            "gemm",
            format!("lhs cols == rhs rows ({})", w.rows()),
            format!("lhs {}x{}", x.rows(), x.cols()),
        ));
    }
    let n = w.cols();
    if let Some(b) = bias {
        if b.len() != n {
            return Err(Error::shape("linear bias", n, b.len()));
        }
    }
    let mut out = Matrix::zeros(x.rows(), n);
    if n == 0 {
        return Ok(out);
    }
    let wdata = w.as_slice();
    let xdata = x.as_slice();
    let k = x.cols();
    out.as_mut_slice()
        .par_chunks_mut(n)
        .with_min_len(PAR_MIN_ROWS)
        .enumerate()
        .for_each(|(i, orow)| {
            if let Some(b) = bias {
                orow.copy_from_slice(b);
            }
            let xrow = &xdata[i * k..(i + 1) * k];
            for (kk, &a) in xrow.iter().enumerate() {
                let wrow = &wdata[kk * n..(kk + 1) * n];
                for (o, &wv) in orow.iter_mut().zip(wrow) {
                    *o += a * wv;
                }
            }
        });
    Ok(out)
}

/// Entrywise nonlinearities used inside cells and MLPs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pointwise {
    Relu,
    Sigmoid,
    Tanh,
}

impl Pointwise {
    #[inline]
    pub fn apply(self, v: f32) -> f32 {
        match self {
            Pointwise::Relu => v.max(0.0),
            Pointwise::Sigmoid => sigmoid(v),
            Pointwise::Tanh => v.tanh(),
        }
    }
}

#[inline]
pub(crate) fn sigmoid(v: f32) -> f32 {
    // Split by sign so exp never overflows.
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Shape-preserving entrywise application of `f`.
pub fn pointwise(x: &Matrix, f: Pointwise) -> Matrix {
    let mut out = x.clone();
    pointwise_in_place(&mut out, f);
    out
}

pub(crate) fn pointwise_in_place(x: &mut Matrix, f: Pointwise) {
    for v in x.as_mut_slice() {
        *v = f.apply(*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0f64;
                for k in 0..a.cols() {
                    s += a.get(i, k) as f64 * b.get(k, j) as f64;
                }
                out.set(i, j, s as f32);
            }
        }
        out
    }

    #[test]
    fn identity_left() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Matrix::random_uniform(3, 4, 1.0, &mut rng);
        assert_eq!(gemm(&Matrix::identity(3), &m).unwrap(), m);
    }

    #[test]
    fn small_product() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let out = gemm(&a, &Matrix::identity(2)).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn random_against_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = Matrix::random_uniform(7, 5, 1.0, &mut rng);
        let b = Matrix::random_uniform(5, 3, 1.0, &mut rng);
        let diff = gemm(&a, &b).unwrap().max_abs_diff(&naive(&a, &b)).unwrap();
        assert!(diff < 1e-6, "{diff}");
        assert_eq!(gemm_flops(7, 5, 3), 210);
    }

    #[test]
    fn identity_associativity_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Matrix::random_uniform(600, 6, 2.0, &mut rng);
        let b = Matrix::random_uniform(6, 9, 2.0, &mut rng);
        let i = Matrix::identity(6);
        let lhs = gemm(&gemm(&a, &i).unwrap(), &b).unwrap();
        let rhs = gemm(&a, &gemm(&i, &b).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mismatch_is_error() {
        let a = Matrix::zeros(2, 3);
        assert!(gemm(&a, &a).is_err());
    }

    #[test]
    fn pointwise_values() {
        let x = Matrix::from_rows(&[[-1.0, 2.0]]).unwrap();
        assert_eq!(pointwise(&x, Pointwise::Relu).as_slice(), &[0.0, 2.0]);
        assert_eq!(Pointwise::Tanh.apply(0.0), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = Matrix::random_uniform(20, 20, 30.0, &mut rng);
        // f32 sigmoid saturates to exactly 1.0 beyond ~17, so the half-open
        // range only holds for moderate inputs.
        let moderate = Matrix::random_uniform(20, 20, 8.0, &mut rng);
        assert!(pointwise(&moderate, Pointwise::Sigmoid)
            .as_slice()
            .iter()
            .all(|&v| v > 0.0 && v < 1.0));
        assert!(pointwise(&r, Pointwise::Sigmoid)
            .as_slice()
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v)));
    }
}
