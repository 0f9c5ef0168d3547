use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;

use crate::error::{Error, Result};

/// Flat view of every weight and bias, layer by layer: the weight matrix
/// in row-major `[fan_in, fan_out]` order followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(n: usize) -> Self {
        ParamVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_scaled(&mut self, other: &ParamVector, scale: f64) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.0.iter_mut().for_each(|x| *x *= s);
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// One affine layer, `y = x W + b` with `W: [fan_in, fan_out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn n_params(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

/// Multilayer perceptron: tanh on every hidden layer, identity on the last.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Dense>,
}

/// Activations recorded by [`DenseNet::forward_tape`].
#[derive(Debug, Clone)]
pub struct Tape {
    input: Array2<f64>,
    /// Post-tanh activations of each hidden layer.
    hidden: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

/// Forward pass carrying a tangent along one input coordinate.
#[derive(Debug, Clone)]
pub struct PenaltyTape {
    input: Array2<f64>,
    coord: usize,
    hidden: Vec<Array2<f64>>,
    /// Tangent of each hidden pre-activation.
    pre_tangent: Vec<Array2<f64>>,
    /// Tangent of each hidden activation.
    tangent: Vec<Array2<f64>>,
    /// `∂ output / ∂ input[coord]` per row.
    pub slope: Array1<f64>,
}

fn tanh_inplace(z: &mut Array2<f64>) {
    z.mapv_inplace(f64::tanh);
}

fn row_matrix(input: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((1, input.len()), input.to_vec()).expect("shape matches")
}

impl DenseNet {
    /// Glorot-uniform weights in `±√(6/(fan_in+fan_out))`, zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let w = Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-limit..limit));
                Dense { w, b: Array1::zeros(fan_out) }
            })
            .collect();
        DenseNet { layers }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|w| Dense { w: Array2::zeros((w[0], w[1])), b: Array1::zeros(w[1]) })
            .collect();
        DenseNet { layers }
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("layer list"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.b.len() != l.w.ncols() {
                return Err(Error::Dimension { expected: l.w.ncols(), got: l.b.len() });
            }
            if let Some(next) = layers.get(i + 1) {
                if next.w.nrows() != l.w.ncols() {
                    return Err(Error::Dimension { expected: l.w.ncols(), got: next.w.nrows() });
                }
            }
        }
        Ok(DenseNet { layers })
    }

    /// Three dense layers: `input → width → width → output`.
    pub fn preset<R: Rng + ?Sized>(input: usize, width: usize, output: usize, rng: &mut R) -> Self {
        Self::new(&[input, width, width, output], rng)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.w.ncols()));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].w.ncols()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    pub fn params(&self) -> ParamVector {
        let mut v = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            v.extend(l.w.iter());
            v.extend(l.b.iter());
        }
        ParamVector(v)
    }

    pub fn set_params(&mut self, p: &ParamVector) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::Dimension { expected: self.n_params(), got: p.len() });
        }
        let mut it = p.0.iter();
        for l in &mut self.layers {
            for (dst, src) in l.w.iter_mut().chain(l.b.iter_mut()).zip(&mut it) {
                *dst = *src;
            }
        }
        Ok(())
    }

    /// Mutable parameter slices in [`ParamVector`] order.
    pub fn param_slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|l| {
            [
                l.w.as_slice_mut().expect("standard layout"),
                l.b.as_slice_mut().expect("standard layout"),
            ]
        })
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::Dimension { expected: self.input_dim(), got: cols });
        }
        Ok(())
    }

    /// Forward pass over a batch (one row per sample).
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_input(x.ncols())?;
        let mut a = x.dot(&self.layers[0].w) + &self.layers[0].b;
        for l in &self.layers[1..] {
            tanh_inplace(&mut a);
            a = a.dot(&l.w) + &l.b;
        }
        Ok(a)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(&row_matrix(input))?.into_raw_vec_and_offset().0)
    }

    /// Forward pass keeping the activations needed by [`DenseNet::backward`].
    pub fn forward_tape(&self, x: Array2<f64>) -> Result<Tape> {
        self.check_input(x.ncols())?;
        let mut hidden = Vec::with_capacity(self.layers.len() - 1);
        let mut a = x.dot(&self.layers[0].w) + &self.layers[0].b;
        for l in &self.layers[1..] {
            tanh_inplace(&mut a);
            let next = a.dot(&l.w) + &l.b;
            hidden.push(a);
            a = next;
        }
        Ok(Tape { input: x, hidden, output: a })
    }

    /// Reverse pass for `Σ_rows ⟨upstream_row, output_row⟩`. Returns the
    /// parameter gradient summed over the batch and the per-row input
    /// gradient.
    pub fn backward(&self, tape: &Tape, upstream: &Array2<f64>) -> Result<(ParamVector, Array2<f64>)> {
        if upstream.dim() != tape.output.dim() {
            return Err(Error::Dimension { expected: tape.output.ncols(), got: upstream.ncols() });
        }
        let mut grads = ParamVector::zeros(self.n_params());
        let mut offsets = self.offsets();
        let mut delta = upstream.clone();
        for k in (0..self.layers.len()).rev() {
            let prev = if k == 0 { &tape.input } else { &tape.hidden[k - 1] };
            let off = offsets.pop().expect("one offset per layer");
            write_layer_grad(&mut grads.0[off..], &prev.t().dot(&delta), delta.sum_axis(Axis(0)).view());
            let back = delta.dot(&self.layers[k].w.t());
            delta = if k == 0 {
                back
            } else {
                let h = &tape.hidden[k - 1];
                back * &h.mapv(|v| 1.0 - v * v)
            };
        }
        Ok((grads, delta))
    }

    /// Exact gradient of `⟨upstream, forward(input)⟩` with respect to all
    /// parameters.
    pub fn param_gradient(&self, input: &[f64], upstream: &[f64]) -> Result<ParamVector> {
        if upstream.len() != self.output_dim() {
            return Err(Error::Dimension { expected: self.output_dim(), got: upstream.len() });
        }
        let tape = self.forward_tape(row_matrix(input))?;
        Ok(self.backward(&tape, &row_matrix(upstream))?.0)
    }

    /// `∂ output / ∂ input` of a scalar-output net, by forward-mode
    /// propagation of one tangent per input coordinate.
    pub fn input_derivative(&self, input: &[f64]) -> Result<Vec<f64>> {
        if self.output_dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: self.output_dim() });
        }
        self.check_input(input.len())?;
        let x = row_matrix(input);
        // tangents: one row per input direction
        let mut tangent = self.layers[0].w.clone();
        let mut a = x.dot(&self.layers[0].w) + &self.layers[0].b;
        for l in &self.layers[1..] {
            tanh_inplace(&mut a);
            let s = a.mapv(|v| 1.0 - v * v);
            tangent = (tangent * s.row(0)).dot(&l.w);
            a = a.dot(&l.w) + &l.b;
        }
        Ok(tangent.column(0).to_vec())
    }

    /// Forward pass plus the tangent along input column `coord`.
    pub fn forward_penalty(&self, x: Array2<f64>, coord: usize) -> Result<PenaltyTape> {
        self.check_input(x.ncols())?;
        if self.output_dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: self.output_dim() });
        }
        if coord >= self.input_dim() {
            return Err(Error::Dimension { expected: self.input_dim(), got: coord });
        }
        let rows = x.nrows();
        let n_hidden = self.layers.len() - 1;
        let mut hidden = Vec::with_capacity(n_hidden);
        let mut pre_tangent = Vec::with_capacity(n_hidden);
        let mut tangent: Vec<Array2<f64>> = Vec::with_capacity(n_hidden);
        let first_row = self.layers[0].w.row(coord);
        let mut a = x.dot(&self.layers[0].w) + &self.layers[0].b;
        let mut tz = first_row.broadcast((rows, first_row.len())).expect("broadcast").to_owned();
        for l in &self.layers[1..] {
            tanh_inplace(&mut a);
            let t = &tz * &a.mapv(|v| 1.0 - v * v);
            let next_a = a.dot(&l.w) + &l.b;
            let next_tz = t.dot(&l.w);
            hidden.push(a);
            pre_tangent.push(tz);
            tangent.push(t);
            a = next_a;
            tz = next_tz;
        }
        let slope = tz.column(0).to_owned();
        Ok(PenaltyTape { input: x, coord, hidden, pre_tangent, tangent, slope })
    }

    /// Penalty `λ Σ_rows (|slope| - 1)²` and `weight ×` its parameter gradient,
    /// obtained by reverse differentiation through the tangent propagation.
    pub fn penalty_backward(&self, tape: &PenaltyTape, lambda: f64, weight: f64) -> (f64, ParamVector) {
        let mut grads = ParamVector::zeros(self.n_params());
        let penalty = self.penalty_backward_into(tape, lambda, weight, &mut grads);
        (penalty, grads)
    }

    /// As [`DenseNet::penalty_backward`], accumulating into `grads`. With
    /// `λ = 0` the buffer is left untouched.
    pub fn penalty_backward_into(&self, tape: &PenaltyTape, lambda: f64, weight: f64, grads: &mut ParamVector) -> f64 {
        assert_eq!(grads.len(), self.n_params(), "gradient buffer size");
        let penalty: f64 = tape.slope.iter().map(|g| lambda * (g.abs() - 1.0).powi(2)).sum();
        if lambda == 0.0 {
            return penalty;
        }
        let rows = tape.slope.len();
        let mut offsets = self.offsets();
        let last = self.layers.len() - 1;
        let slope_bar: Array2<f64> = tape
            .slope
            .mapv(|g| weight * 2.0 * lambda * (g.abs() - 1.0) * g.signum() * f64::from(u8::from(g != 0.0)))
            .insert_axis(Axis(1));
        if last == 0 {
            // slope = W[coord, 0]; the activation path does not enter
            let off = offsets[0];
            grads.0[off + tape.coord * self.layers[0].w.ncols()] += slope_bar.sum();
            return penalty;
        }
        // output layer: slope = t_{last-1} W_last
        let off = offsets.pop().expect("offset");
        let w_last = &self.layers[last].w;
        let gw = tape.tangent[last - 1].t().dot(&slope_bar);
        write_layer_grad(&mut grads.0[off..], &gw, Array1::zeros(w_last.ncols()).view());
        let mut t_bar = slope_bar.dot(&w_last.t());
        let mut a_bar: Option<Array2<f64>> = None;
        for k in (0..last).rev() {
            let a = &tape.hidden[k];
            let s = a.mapv(|v| 1.0 - v * v);
            let tz = &tape.pre_tangent[k];
            let tz_bar = &t_bar * &s;
            // t = s ⊙ tz and s = 1 - a², so a picks up -2 a ⊙ t̄ ⊙ tz
            let mut a_total = &t_bar * tz * &a.mapv(|v| -2.0 * v);
            if let Some(ab) = a_bar.take() {
                a_total += &ab;
            }
            let z_bar = a_total * &s;
            let prev_a = if k == 0 { &tape.input } else { &tape.hidden[k - 1] };
            let off = offsets.pop().expect("offset");
            let mut gw = prev_a.t().dot(&z_bar);
            let w = &self.layers[k].w;
            if k == 0 {
                let col_sums = tz_bar.sum_axis(Axis(0));
                gw.row_mut(tape.coord).scaled_add(1.0, &col_sums);
            } else {
                gw += &tape.tangent[k - 1].t().dot(&tz_bar);
                t_bar = tz_bar.dot(&w.t());
                a_bar = Some(z_bar.dot(&w.t()));
            }
            write_layer_grad(&mut grads.0[off..], &gw, z_bar.sum_axis(Axis(0)).view());
        }
        debug_assert_eq!(rows, tape.input.nrows());
        penalty
    }

    /// `λ(|∂D/∂x_coord| - 1)²` at one input and its parameter gradient.
    pub fn penalty_param_gradient(&self, input: &[f64], coord: usize, lambda: f64) -> Result<(f64, ParamVector)> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda {lambda} must be nonnegative")));
        }
        let tape = self.forward_penalty(row_matrix(input), coord)?;
        Ok(self.penalty_backward(&tape, lambda, 1.0))
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.layers
            .iter()
            .map(|l| {
                let o = acc;
                acc += l.n_params();
                o
            })
            .collect()
    }
}

fn write_layer_grad(dst: &mut [f64], gw: &Array2<f64>, gb: ArrayView1<f64>) {
    let n = gw.len();
    for (d, s) in dst[..n].iter_mut().zip(gw.iter()) {
        *d += s;
    }
    for (d, s) in dst[n..n + gb.len()].iter_mut().zip(gb.iter()) {
        *d += s;
    }
}
