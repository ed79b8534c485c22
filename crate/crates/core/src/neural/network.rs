//! Feed-forward networks over the fixed layer set, with a recorded forward
//! pass and reverse-mode gradients.

use rand_distr::{Distribution, Uniform};

use super::layers::{self, Layer};
use super::NeuralError;
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// Weights uniform in ±sqrt(6 / (fan_in + fan_out)), biases zero.
    GlorotUniform,
}

impl InitScheme {
    pub fn id(self) -> u32 {
        match self {
            InitScheme::GlorotUniform => 1,
        }
    }

    pub fn from_id(id: u32) -> Option<Self> {
        (id == 1).then_some(InitScheme::GlorotUniform)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    input_size: usize,
    layers: Vec<Layer>,
    init: InitScheme,
    /// Input size followed by every layer's output size.
    sizes: Vec<usize>,
}

impl NetworkSpec {
    pub fn new(input_size: usize, layers: Vec<Layer>, init: InitScheme) -> Result<Self, NeuralError> {
        let mut sizes = vec![input_size];
        for (i, l) in layers.iter().enumerate() {
            let next = l
                .output_size(*sizes.last().unwrap())
                .map_err(|m| NeuralError::ShapeMismatch(format!("layer {i}: {m}")))?;
            sizes.push(next);
        }
        Ok(NetworkSpec { input_size, layers, init, sizes })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn init(&self) -> InitScheme {
        self.init
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }
}

/// A network specification with its flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    spec: NetworkSpec,
    offsets: Vec<usize>,
    pub params: Vec<T>,
}

/// Activations of every layer for one batch, batch-major.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    pub batch: usize,
    /// `acts[0]` is the input, `acts[i + 1]` the output of layer `i`.
    pub acts: Vec<Vec<T>>,
}

impl<T> Tape<T> {
    pub fn output(&self) -> &[T] {
        self.acts.last().unwrap()
    }
}

impl<T: Scalar> Network<T> {
    pub fn new(spec: NetworkSpec, rng: &mut Rng) -> Self {
        let mut params = Vec::with_capacity(spec.param_count());
        for l in &spec.layers {
            let (fan_in, fan_out) = l.fans();
            let limit = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite bound");
            params.extend((0..l.weight_count()).map(|_| T::lit(dist.sample(rng))));
            params.extend(std::iter::repeat_n(T::zero(), l.param_count() - l.weight_count()));
        }
        Self::assemble(spec, params)
    }

    pub fn from_params(spec: NetworkSpec, params: Vec<T>) -> Result<Self, NeuralError> {
        if params.len() != spec.param_count() {
            return Err(NeuralError::ShapeMismatch(format!(
                "{} parameters given, network has {}",
                params.len(),
                spec.param_count()
            )));
        }
        Ok(Self::assemble(spec, params))
    }

    fn assemble(spec: NetworkSpec, params: Vec<T>) -> Self {
        let mut offsets = Vec::with_capacity(spec.layers.len() + 1);
        let mut o = 0;
        for l in &spec.layers {
            offsets.push(o);
            o += l.param_count();
        }
        offsets.push(o);
        Network { spec, offsets, params }
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Runs a batch of `batch` inputs laid out back to back.
    pub fn forward(&self, input: &[T], batch: usize) -> Tape<T> {
        self.forward_upto(input, batch, self.spec.layers.len())
    }

    /// Forward pass through the first `upto` layers only.
    pub fn forward_upto(&self, input: &[T], batch: usize, upto: usize) -> Tape<T> {
        let sizes = &self.spec.sizes;
        assert_eq!(input.len(), batch * sizes[0], "input batch has the wrong size");
        let mut acts = Vec::with_capacity(upto + 1);
        acts.push(input.to_vec());
        let mut scratch = Vec::new();
        for (i, layer) in self.spec.layers[..upto].iter().enumerate() {
            let (n_in, n_out) = (sizes[i], sizes[i + 1]);
            let x = &acts[i];
            let mut y = vec![T::zero(); batch * n_out];
            let p = &self.params[self.offsets[i]..self.offsets[i + 1]];
            let (w, b) = p.split_at(layer.weight_count());
            for s in 0..batch {
                let xs = &x[s * n_in..(s + 1) * n_in];
                let ys = &mut y[s * n_out..(s + 1) * n_out];
                match *layer {
                    Layer::Dense { .. } => layers::dense_fwd(w, b, xs, ys),
                    Layer::Conv1d { in_ch, out_ch, kernel, stride } => {
                        layers::conv1d_fwd(xs, in_ch, w, Some(b), out_ch, kernel, stride, ys)
                    }
                    Layer::ConvT1d { in_ch, out_ch, kernel, stride, padding, output_padding } => layers::convt_fwd(
                        xs, in_ch, w, Some(b), out_ch, kernel, stride, padding, output_padding, &mut scratch, ys,
                    ),
                    Layer::Act(a) => layers::act_fwd(a, xs, ys),
                }
            }
            acts.push(y);
        }
        Tape { batch, acts }
    }

    /// Network output only.
    pub fn predict(&self, input: &[T], batch: usize) -> Vec<T> {
        self.forward(input, batch).acts.pop().unwrap()
    }

    /// Back-propagates `upstream`, the loss gradient with respect to the
    /// output of layer `upto - 1` (i.e. `tape.acts[upto]`), down to the
    /// input. Parameter gradients are accumulated into `grads` when given.
    /// Returns the input gradient.
    pub fn backward(&self, tape: &Tape<T>, upto: usize, upstream: &[T], mut grads: Option<&mut [T]>) -> Vec<T> {
        let sizes = &self.spec.sizes;
        let batch = tape.batch;
        assert_eq!(upstream.len(), batch * sizes[upto], "upstream gradient has the wrong size");
        if let Some(g) = grads.as_deref() {
            assert_eq!(g.len(), self.params.len());
        }
        let mut gy = upstream.to_vec();
        let mut scratch = Vec::new();
        for i in (0..upto).rev() {
            let layer = self.spec.layers[i];
            let (n_in, n_out) = (sizes[i], sizes[i + 1]);
            let p = &self.params[self.offsets[i]..self.offsets[i + 1]];
            let w = &p[..layer.weight_count()];
            let mut layer_grads = grads.as_deref_mut().map(|g| g[self.offsets[i]..self.offsets[i + 1]].split_at_mut(layer.weight_count()));
            let mut gx = vec![T::zero(); batch * n_in];
            for s in 0..batch {
                let xs = &tape.acts[i][s * n_in..(s + 1) * n_in];
                let gys = &gy[s * n_out..(s + 1) * n_out];
                let gxs = &mut gx[s * n_in..(s + 1) * n_in];
                let lg = layer_grads.as_mut().map(|(a, b)| (&mut **a, &mut **b));
                match layer {
                    Layer::Dense { .. } => layers::dense_bwd(w, xs, gys, lg, gxs),
                    Layer::Conv1d { in_ch, out_ch, kernel, stride } => {
                        layers::conv1d_bwd(xs, in_ch, w, out_ch, kernel, stride, gys, lg, Some(gxs))
                    }
                    Layer::ConvT1d { in_ch, out_ch, kernel, stride, padding, output_padding } => layers::convt_bwd(
                        xs, in_ch, w, out_ch, kernel, stride, padding, output_padding, gys, &mut scratch, lg, Some(gxs),
                    ),
                    Layer::Act(a) => {
                        let ys = &tape.acts[i + 1][s * n_out..(s + 1) * n_out];
                        layers::act_bwd(a, xs, ys, gys, gxs)
                    }
                }
            }
            gy = gx;
        }
        gy
    }
}
