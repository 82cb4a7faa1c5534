//! Forward-only neural cells: multi-layer perceptron, GRU and LSTM.
//!
//! Every cell is batched over rows. FLOP counts cover the matrix products
//! only (`2·rows·in·out` per product); bias adds and nonlinearities are not
//! counted.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::dense::{pointwise_in_place, sigmoid};
use crate::tensor::{gemm_flops, linear, Matrix, Pointwise};

/// Activation after an MLP layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Activation {
    #[default]
    None,
    Relu,
}

/// One affine layer `x·W + b` followed by its activation.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    /// `in_dim × out_dim`
    pub weight: Matrix,
    /// `1 × out_dim`
    pub bias: Matrix,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weight: Matrix, bias: Matrix, activation: Activation) -> Result<Self> {
        if bias.rows() != 1 || bias.dim() != weight.cols() {
            return Err(Error::shape(
                "DenseLayer bias",
                format!("1x{}", weight.cols()),
                format!("{}x{}", bias.rows(), bias.dim()),
            ));
        }
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    /// Seeded uniform init in `±1/√in_dim`.
    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = init_bound(in_dim);
        Self {
            weight: Matrix::random_uniform(in_dim, out_dim, bound, rng),
            bias: Matrix::random_uniform(1, out_dim, bound, rng),
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }
}

pub(crate) fn init_bound(fan_in: usize) -> f32 {
    1.0 / (fan_in.max(1) as f32).sqrt()
}

/// A chain of dense layers.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    layers: Vec<DenseLayer>,
}

impl MlpParams {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter(
                "MLP needs at least one layer".into(),
            ));
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::shape(
                    "MlpParams",
                    format!("layer {} in_dim {}", i + 1, w[0].out_dim()),
                    w[1].in_dim(),
                ));
            }
        }
        Ok(Self { layers })
    }

    /// Layers of widths `dims[0] → dims[1] → …`; hidden layers use ReLU,
    /// the last one `last_activation`.
    pub fn random<R: Rng + ?Sized>(
        dims: &[usize],
        last_activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidParameter(
                "MLP needs at least two widths".into(),
            ));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n {
                    last_activation
                } else {
                    Activation::Relu
                };
                DenseLayer::random(dims[i], dims[i + 1], act, rng)
            })
            .collect();
        Self::new(layers)
    }

    /// Single layer with the given weights and bias.
    pub fn single(weight: Matrix, bias: Matrix, activation: Activation) -> Result<Self> {
        Self::new(vec![DenseLayer::new(weight, bias, activation)?])
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn flops(&self, rows: usize) -> u64 {
        self.layers
            .iter()
            .map(|l| gemm_flops(rows, l.in_dim(), l.out_dim()))
            .sum()
    }
}

pub fn mlp_forward(x: &Matrix, p: &MlpParams) -> Result<Matrix> {
    if x.dim() != p.in_dim() {
        return Err(Error::shape(
            "mlp_forward",
            format!("input dim {}", p.in_dim()),
            x.dim(),
        ));
    }
    let mut cur = None;
    for layer in &p.layers {
        let input = cur.as_ref().unwrap_or(x);
        let mut y = linear(input, &layer.weight, Some(layer.bias.as_slice()))?;
        if layer.activation == Activation::Relu {
            pointwise_in_place(&mut y, Pointwise::Relu);
        }
        cur = Some(y);
    }
    Ok(cur.unwrap())
}

/// GRU gate parameters. `w_*` map input → hidden, `u_*` hidden → hidden.
#[derive(Clone, Debug, PartialEq)]
pub struct GruParams {
    pub w_z: Matrix,
    pub w_r: Matrix,
    pub w_h: Matrix,
    pub u_z: Matrix,
    pub u_r: Matrix,
    pub u_h: Matrix,
    pub b_z: Matrix,
    pub b_r: Matrix,
    pub b_h: Matrix,
}

impl GruParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let w = || Matrix::zeros(input_dim, hidden_dim);
        let u = || Matrix::zeros(hidden_dim, hidden_dim);
        let b = || Matrix::zeros(1, hidden_dim);
        Self {
            w_z: w(),
            w_r: w(),
            w_h: w(),
            u_z: u(),
            u_r: u(),
            u_h: u(),
            b_z: b(),
            b_r: b(),
            b_h: b(),
        }
    }

    pub fn random<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let (bw, bu) = (init_bound(input_dim), init_bound(hidden_dim));
        let mut w = || Matrix::random_uniform(input_dim, hidden_dim, bw, rng);
        let (w_z, w_r, w_h) = (w(), w(), w());
        let mut u = || Matrix::random_uniform(hidden_dim, hidden_dim, bu, rng);
        let (u_z, u_r, u_h) = (u(), u(), u());
        let mut b = || Matrix::random_uniform(1, hidden_dim, bu, rng);
        let (b_z, b_r, b_h) = (b(), b(), b());
        Self {
            w_z,
            w_r,
            w_h,
            u_z,
            u_r,
            u_h,
            b_z,
            b_r,
            b_h,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_z.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let (i, h) = (self.input_dim(), self.hidden_dim());
        for w in [&self.w_z, &self.w_r, &self.w_h] {
            check_dims("GruParams input weight", w, i, h)?;
        }
        for u in [&self.u_z, &self.u_r, &self.u_h] {
            check_dims("GruParams hidden weight", u, h, h)?;
        }
        for b in [&self.b_z, &self.b_r, &self.b_h] {
            check_dims("GruParams bias", b, 1, h)?;
        }
        Ok(())
    }

    pub fn flops(&self, rows: usize) -> u64 {
        let (i, h) = (self.input_dim(), self.hidden_dim());
        3 * (gemm_flops(rows, i, h) + gemm_flops(rows, h, h))
    }
}

fn check_dims(what: &'static str, m: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if m.rows() != rows || m.cols() != cols {
        return Err(Error::shape(
            what,
            format!("{rows}x{cols}"),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    Ok(())
}

/// `σ(x·W + h·U + b)` style pre-activation, returned before the nonlinearity.
fn gate(x: &Matrix, w: &Matrix, h: &Matrix, u: &Matrix, b: &Matrix) -> Result<Matrix> {
    let mut a = linear(x, w, Some(b.as_slice()))?;
    let hu = linear(h, u, None)?;
    for (o, v) in a.as_mut_slice().iter_mut().zip(hu.as_slice()) {
        *o += v;
    }
    Ok(a)
}

/// One batched GRU update:
/// `z = σ(xW_z + hU_z + b_z)`, `r = σ(xW_r + hU_r + b_r)`,
/// `h̃ = tanh(xW_h + (r⊙h)U_h + b_h)`, `h' = (1−z)⊙h + z⊙h̃`.
pub fn gru_cell(h: &Matrix, x: &Matrix, p: &GruParams) -> Result<Matrix> {
    p.validate()?;
    if h.rows() != x.rows() {
        return Err(Error::shape(
            "gru_cell",
            format!("{} input rows", h.rows()),
            x.rows(),
        ));
    }
    if x.dim() != p.input_dim() || h.dim() != p.hidden_dim() {
        return Err(Error::shape(
            "gru_cell",
            format!("input {} / hidden {}", p.input_dim(), p.hidden_dim()),
            format!("input {} / hidden {}", x.dim(), h.dim()),
        ));
    }
    let mut z = gate(x, &p.w_z, h, &p.u_z, &p.b_z)?;
    let mut r = gate(x, &p.w_r, h, &p.u_r, &p.b_r)?;
    pointwise_in_place(&mut z, Pointwise::Sigmoid);
    pointwise_in_place(&mut r, Pointwise::Sigmoid);
    for (rv, hv) in r.as_mut_slice().iter_mut().zip(h.as_slice()) {
        *rv *= hv;
    }
    let mut cand = gate(x, &p.w_h, &r, &p.u_h, &p.b_h)?;
    pointwise_in_place(&mut cand, Pointwise::Tanh);
    let mut out = cand;
    for ((o, &zv), &hv) in out
        .as_mut_slice()
        .iter_mut()
        .zip(z.as_slice())
        .zip(h.as_slice())
    {
        *o = (1.0 - zv) * hv + zv * *o;
    }
    Ok(out)
}

/// LSTM gate parameters for the input (`i`), forget (`f`), output (`o`)
/// and candidate (`g`) gates.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w_i: Matrix,
    pub w_f: Matrix,
    pub w_o: Matrix,
    pub w_g: Matrix,
    pub u_i: Matrix,
    pub u_f: Matrix,
    pub u_o: Matrix,
    pub u_g: Matrix,
    pub b_i: Matrix,
    pub b_f: Matrix,
    pub b_o: Matrix,
    pub b_g: Matrix,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let w = || Matrix::zeros(input_dim, hidden_dim);
        let u = || Matrix::zeros(hidden_dim, hidden_dim);
        let b = || Matrix::zeros(1, hidden_dim);
        Self {
            w_i: w(),
            w_f: w(),
            w_o: w(),
            w_g: w(),
            u_i: u(),
            u_f: u(),
            u_o: u(),
            u_g: u(),
            b_i: b(),
            b_f: b(),
            b_o: b(),
            b_g: b(),
        }
    }

    pub fn random<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let (bw, bu) = (init_bound(input_dim), init_bound(hidden_dim));
        let mut w = || Matrix::random_uniform(input_dim, hidden_dim, bw, rng);
        let (w_i, w_f, w_o, w_g) = (w(), w(), w(), w());
        let mut u = || Matrix::random_uniform(hidden_dim, hidden_dim, bu, rng);
        let (u_i, u_f, u_o, u_g) = (u(), u(), u(), u());
        let mut b = || Matrix::random_uniform(1, hidden_dim, bu, rng);
        let (b_i, b_f, b_o, b_g) = (b(), b(), b(), b());
        Self {
            w_i,
            w_f,
            w_o,
            w_g,
            u_i,
            u_f,
            u_o,
            u_g,
            b_i,
            b_f,
            b_o,
            b_g,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_i.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_i.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let (i, h) = (self.input_dim(), self.hidden_dim());
        for w in [&self.w_i, &self.w_f, &self.w_o, &self.w_g] {
            check_dims("LstmParams input weight", w, i, h)?;
        }
        for u in [&self.u_i, &self.u_f, &self.u_o, &self.u_g] {
            check_dims("LstmParams hidden weight", u, h, h)?;
        }
        for b in [&self.b_i, &self.b_f, &self.b_o, &self.b_g] {
            check_dims("LstmParams bias", b, 1, h)?;
        }
        Ok(())
    }

    /// FLOPs of one batched step over `rows` sequences.
    pub fn step_flops(&self, rows: usize) -> u64 {
        let (i, h) = (self.input_dim(), self.hidden_dim());
        4 * (gemm_flops(rows, i, h) + gemm_flops(rows, h, h))
    }
}

/// One batched LSTM step; updates `h` and `c` in place.
pub fn lstm_step(h: &mut Matrix, c: &mut Matrix, x: &Matrix, p: &LstmParams) -> Result<()> {
    if x.dim() != p.input_dim() || x.rows() != h.rows() {
        return Err(Error::shape(
            "lstm_step",
            format!("{}x{} input", h.rows(), p.input_dim()),
            format!("{}x{}", x.rows(), x.dim()),
        ));
    }
    let gi = gate(x, &p.w_i, h, &p.u_i, &p.b_i)?;
    let gf = gate(x, &p.w_f, h, &p.u_f, &p.b_f)?;
    let go = gate(x, &p.w_o, h, &p.u_o, &p.b_o)?;
    let gg = gate(x, &p.w_g, h, &p.u_g, &p.b_g)?;
    let hs = h.as_mut_slice();
    let cs = c.as_mut_slice();
    for j in 0..hs.len() {
        let i = sigmoid(gi.as_slice()[j]);
        let f = sigmoid(gf.as_slice()[j]);
        let o = sigmoid(go.as_slice()[j]);
        let g = gg.as_slice()[j].tanh();
        cs[j] = f * cs[j] + i * g;
        hs[j] = o * cs[j].tanh();
    }
    Ok(())
}

/// Runs the recurrence over time-major inputs: `steps[t]` holds the `t`-th
/// element of every sequence in the batch. Starts from zero `(h, c)` and
/// returns the final `h`.
pub fn lstm_fold_steps(steps: &[Matrix], p: &LstmParams) -> Result<Matrix> {
    p.validate()?;
    let first = steps
        .first()
        .ok_or_else(|| Error::InvalidParameter("lstm fold over an empty sequence".into()))?;
    let mut h = Matrix::zeros(first.rows(), p.hidden_dim());
    let mut c = h.clone();
    for x in steps {
        lstm_step(&mut h, &mut c, x, p)?;
    }
    Ok(h)
}

/// Final hidden state of one sequence (rows are time steps).
pub fn lstm_fold(seq: &Matrix, p: &LstmParams) -> Result<Vec<f32>> {
    if seq.rows() == 0 {
        return Err(Error::InvalidParameter(
            "lstm fold over an empty sequence".into(),
        ));
    }
    let steps: Vec<Matrix> = (0..seq.rows())
        .map(|t| Matrix::from_vec(1, seq.dim(), seq.row(t).to_vec()))
        .collect::<Result<_>>()?;
    Ok(lstm_fold_steps(&steps, p)?.into_vec())
}

/// Folds a batch of equal-length sequences at once; row `i` of the result is
/// `lstm_fold(&sequences[i])`.
pub fn lstm_fold_batched(sequences: &[Matrix], p: &LstmParams) -> Result<Matrix> {
    let Some(first) = sequences.first() else {
        return Ok(Matrix::zeros(0, p.hidden_dim()));
    };
    let (len, dim) = (first.rows(), first.dim());
    if let Some((i, s)) = sequences
        .iter()
        .enumerate()
        .find(|(_, s)| s.rows() != len || s.dim() != dim)
    {
        return Err(Error::shape(
            "lstm_fold_batched",
            format!("{len}x{dim} sequences"),
            format!("sequence {i} is {}x{}", s.rows(), s.dim()),
        ));
    }
    let steps: Vec<Matrix> = (0..len)
        .map(|t| {
            let mut m = Matrix::zeros(sequences.len(), dim);
            for (b, s) in sequences.iter().enumerate() {
                m.row_mut(b).copy_from_slice(s.row(t));
            }
            m
        })
        .collect();
    lstm_fold_steps(&steps, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dot_col(x: &[f32], w: &Matrix, j: usize) -> f64 {
        x.iter()
            .enumerate()
            .map(|(k, &v)| v as f64 * w.get(k, j) as f64)
            .sum()
    }

    fn sig(v: f64) -> f64 {
        1.0 / (1.0 + (-v).exp())
    }

    /// Scalar GRU over one row in f64.
    fn gru_oracle(h: &[f32], x: &[f32], p: &GruParams) -> Vec<f64> {
        let n = p.hidden_dim();
        let z: Vec<f64> = (0..n)
            .map(|j| sig(dot_col(x, &p.w_z, j) + dot_col(h, &p.u_z, j) + p.b_z.get(0, j) as f64))
            .collect();
        let r: Vec<f64> = (0..n)
            .map(|j| sig(dot_col(x, &p.w_r, j) + dot_col(h, &p.u_r, j) + p.b_r.get(0, j) as f64))
            .collect();
        let rh: Vec<f32> = (0..n).map(|j| (r[j] * h[j] as f64) as f32).collect();
        (0..n)
            .map(|j| {
                let c = (dot_col(x, &p.w_h, j) + dot_col(&rh, &p.u_h, j) + p.b_h.get(0, j) as f64)
                    .tanh();
                (1.0 - z[j]) * h[j] as f64 + z[j] * c
            })
            .collect()
    }

    /// Scalar LSTM fold in f64.
    fn lstm_oracle(seq: &Matrix, p: &LstmParams) -> Vec<f64> {
        let n = p.hidden_dim();
        let mut h = vec![0.0f64; n];
        let mut c = vec![0.0f64; n];
        for t in 0..seq.rows() {
            let x = seq.row(t);
            let hf: Vec<f32> = h.iter().map(|&v| v as f32).collect();
            let pre = |w: &Matrix, u: &Matrix, b: &Matrix, j: usize| {
                dot_col(x, w, j) + dot_col(&hf, u, j) + b.get(0, j) as f64
            };
            for j in 0..n {
                let i = sig(pre(&p.w_i, &p.u_i, &p.b_i, j));
                let f = sig(pre(&p.w_f, &p.u_f, &p.b_f, j));
                let o = sig(pre(&p.w_o, &p.u_o, &p.b_o, j));
                let g = pre(&p.w_g, &p.u_g, &p.b_g, j).tanh();
                c[j] = f * c[j] + i * g;
                h[j] = o * c[j].tanh();
            }
        }
        h
    }

    #[test]
    fn mlp_identity_and_constant() {
        let x = Matrix::from_rows(&[[1.0, -2.0], [3.0, 4.0]]).unwrap();
        let id =
            MlpParams::single(Matrix::identity(2), Matrix::zeros(1, 2), Activation::None).unwrap();
        assert_eq!(mlp_forward(&x, &id).unwrap(), x);
        let c = MlpParams::single(
            Matrix::zeros(2, 3),
            Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap(),
            Activation::None,
        )
        .unwrap();
        let out = mlp_forward(&x, &c).unwrap();
        assert!((0..2).all(|r| out.row(r) == [1.0, 2.0, 3.0]));
    }

    #[test]
    fn mlp_two_layer_matches_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = MlpParams::random(&[5, 7, 3], Activation::None, &mut rng).unwrap();
        let x = Matrix::random_uniform(6, 5, 1.0, &mut rng);
        let out = mlp_forward(&x, &p).unwrap();
        for r in 0..6 {
            let mut cur: Vec<f32> = x.row(r).to_vec();
            for l in p.layers() {
                let mut next: Vec<f32> = (0..l.out_dim())
                    .map(|j| (dot_col(&cur, &l.weight, j) + l.bias.get(0, j) as f64) as f32)
                    .collect();
                if l.activation == Activation::Relu {
                    next.iter_mut().for_each(|v| *v = v.max(0.0));
                }
                cur = next;
            }
            for (a, b) in out.row(r).iter().zip(&cur) {
                assert!((a - b).abs() < 1e-5);
            }
        }
        assert_eq!(p.flops(6), 2 * 6 * 5 * 7 + 2 * 6 * 7 * 3);
    }

    #[test]
    fn mlp_chain_violation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = DenseLayer::random(2, 3, Activation::Relu, &mut rng);
        let b = DenseLayer::random(4, 1, Activation::None, &mut rng);
        assert!(MlpParams::new(vec![a, b]).is_err());
    }

    #[test]
    fn gru_zero_params_halves_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = Matrix::random_uniform(4, 3, 2.0, &mut rng);
        let x = Matrix::random_uniform(4, 5, 2.0, &mut rng);
        let out = gru_cell(&h, &x, &GruParams::zeros(5, 3)).unwrap();
        for (o, hv) in out.as_slice().iter().zip(h.as_slice()) {
            assert!((o - 0.5 * hv).abs() < 1e-6);
        }
    }

    #[test]
    fn gru_matches_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = GruParams::random(6, 4, &mut rng);
        let h = Matrix::random_uniform(4, 4, 1.0, &mut rng);
        let x = Matrix::random_uniform(4, 6, 1.0, &mut rng);
        let out = gru_cell(&h, &x, &p).unwrap();
        for r in 0..4 {
            let want = gru_oracle(h.row(r), x.row(r), &p);
            for (a, b) in out.row(r).iter().zip(&want) {
                assert!((*a as f64 - b).abs() < 1e-5);
            }
        }
        assert!(gru_cell(&h, &Matrix::zeros(3, 6), &p).is_err());
    }

    #[test]
    fn lstm_zero_params_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seq = Matrix::random_uniform(4, 3, 5.0, &mut rng);
        let h = lstm_fold(&seq, &LstmParams::zeros(3, 2)).unwrap();
        assert_eq!(h, vec![0.0, 0.0]);
    }

    #[test]
    fn lstm_single_step_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = LstmParams::random(3, 4, &mut rng);
        let one = Matrix::random_uniform(1, 3, 1.0, &mut rng);
        let mut h = Matrix::zeros(1, 4);
        let mut c = Matrix::zeros(1, 4);
        lstm_step(&mut h, &mut c, &one, &p).unwrap();
        assert_eq!(lstm_fold(&one, &p).unwrap(), h.into_vec());

        let seq = Matrix::random_uniform(5, 3, 1.0, &mut rng);
        let got = lstm_fold(&seq, &p).unwrap();
        for (a, b) in got.iter().zip(lstm_oracle(&seq, &p)) {
            assert!((*a as f64 - b).abs() < 1e-5);
        }
        assert!(lstm_fold(&Matrix::zeros(0, 3), &p).is_err());
    }

    #[test]
    fn lstm_batched_matches_unbatched() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = LstmParams::random(3, 5, &mut rng);
        let seqs: Vec<Matrix> = (0..8)
            .map(|_| Matrix::random_uniform(3, 3, 1.0, &mut rng))
            .collect();
        let batched = lstm_fold_batched(&seqs, &p).unwrap();
        for (i, s) in seqs.iter().enumerate() {
            let single = lstm_fold(s, &p).unwrap();
            for (a, b) in batched.row(i).iter().zip(&single) {
                assert!((a - b).abs() < 1e-6);
            }
        }
        let twins = lstm_fold_batched(&[seqs[0].clone(), seqs[0].clone()], &p).unwrap();
        assert_eq!(twins.row(0), twins.row(1));
        let ragged = [seqs[0].clone(), Matrix::zeros(2, 3)];
        assert!(lstm_fold_batched(&ragged, &p).is_err());
    }
}
