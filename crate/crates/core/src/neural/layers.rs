//! Layer definitions and the per-sample kernels behind them.
//!
//! Activations are stored channel-major: sample `t` of channel `c` lives at
//! `c * len + t`. Convolutions use the cross-correlation convention (no
//! kernel flip). Conv1d weights are laid out `[out][in][k]`, ConvT1d weights
//! `[in][out][k]`, so a ConvT1d sharing a Conv1d's weight buffer is its
//! adjoint.

use super::NeuralError;
use crate::scalar::{axpy, dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// Negative slope 0.2.
    LeakyRelu,
    Tanh,
    Sigmoid,
}

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Dense { inputs: usize, outputs: usize },
    Conv1d { in_ch: usize, out_ch: usize, kernel: usize, stride: usize },
    /// Transposed convolution. The full-length output `(len-1)*stride +
    /// kernel` is cropped by `padding` on the left and `padding -
    /// output_padding` on the right.
    ConvT1d { in_ch: usize, out_ch: usize, kernel: usize, stride: usize, padding: usize, output_padding: usize },
    Act(Activation),
}

impl Layer {
    pub fn param_count(&self) -> usize {
        match *self {
            Layer::Dense { inputs, outputs } => outputs * inputs + outputs,
            Layer::Conv1d { in_ch, out_ch, kernel, .. } | Layer::ConvT1d { in_ch, out_ch, kernel, .. } => {
                in_ch * out_ch * kernel + out_ch
            }
            Layer::Act(_) => 0,
        }
    }

    /// Output size for an input of `size` values, or a description of the
    /// incompatibility.
    pub fn output_size(&self, size: usize) -> Result<usize, String> {
        match *self {
            Layer::Dense { inputs, outputs } => {
                if size == inputs {
                    Ok(outputs)
                } else {
                    Err(format!("dense layer expects {inputs} inputs, got {size}"))
                }
            }
            Layer::Conv1d { in_ch, out_ch, kernel, stride } => {
                let len = channel_len(size, in_ch)?;
                if stride == 0 || kernel == 0 || len < kernel {
                    return Err(format!("conv1d kernel {kernel} stride {stride} on length {len}"));
                }
                Ok(out_ch * conv_out_len(len, kernel, stride))
            }
            Layer::ConvT1d { in_ch, out_ch, kernel, stride, padding, output_padding } => {
                let len = channel_len(size, in_ch)?;
                if stride == 0 || kernel == 0 || output_padding > padding {
                    return Err("invalid transpose-convolution geometry".into());
                }
                let full = (len - 1) * stride + kernel;
                if full + output_padding <= 2 * padding {
                    return Err(format!("transpose convolution crops everything of length {full}"));
                }
                Ok(out_ch * (full + output_padding - 2 * padding))
            }
            Layer::Act(_) => Ok(size),
        }
    }

    /// Glorot fan-in and fan-out.
    pub fn fans(&self) -> (usize, usize) {
        match *self {
            Layer::Dense { inputs, outputs } => (inputs, outputs),
            Layer::Conv1d { in_ch, out_ch, kernel, .. } | Layer::ConvT1d { in_ch, out_ch, kernel, .. } => {
                (in_ch * kernel, out_ch * kernel)
            }
            Layer::Act(_) => (0, 0),
        }
    }

    pub fn weight_count(&self) -> usize {
        match *self {
            Layer::Dense { inputs, outputs } => inputs * outputs,
            Layer::Conv1d { in_ch, out_ch, kernel, .. } | Layer::ConvT1d { in_ch, out_ch, kernel, .. } => {
                in_ch * out_ch * kernel
            }
            Layer::Act(_) => 0,
        }
    }
}

fn channel_len(size: usize, ch: usize) -> Result<usize, String> {
    if ch == 0 || size % ch != 0 || size == 0 {
        Err(format!("{size} values do not split into {ch} channels"))
    } else {
        Ok(size / ch)
    }
}

pub fn conv_out_len(len: usize, kernel: usize, stride: usize) -> usize {
    (len - kernel) / stride + 1
}

/// Valid 1-D cross-correlation without bias. `input` is `in_ch × len`
/// channel-major, `kernel` is `out_ch × in_ch × k`.
pub fn conv1d<T: Scalar>(
    input: &[T],
    in_ch: usize,
    kernel: &[T],
    out_ch: usize,
    k: usize,
    stride: usize,
) -> Result<Vec<T>, NeuralError> {
    let layer = Layer::Conv1d { in_ch, out_ch, kernel: k, stride };
    let out = layer.output_size(input.len()).map_err(NeuralError::ShapeMismatch)?;
    if kernel.len() != layer.weight_count() {
        return Err(NeuralError::ShapeMismatch(format!("kernel has {} values, expected {}", kernel.len(), layer.weight_count())));
    }
    let mut y = vec![T::zero(); out];
    conv1d_fwd(input, in_ch, kernel, None, out_ch, k, stride, &mut y);
    Ok(y)
}

/// Transposed 1-D convolution without bias or cropping. `kernel` is
/// `in_ch × out_ch × k`.
pub fn conv_transpose1d<T: Scalar>(
    input: &[T],
    in_ch: usize,
    kernel: &[T],
    out_ch: usize,
    k: usize,
    stride: usize,
) -> Result<Vec<T>, NeuralError> {
    let layer = Layer::ConvT1d { in_ch, out_ch, kernel: k, stride, padding: 0, output_padding: 0 };
    let out = layer.output_size(input.len()).map_err(NeuralError::ShapeMismatch)?;
    if kernel.len() != layer.weight_count() {
        return Err(NeuralError::ShapeMismatch(format!("kernel has {} values, expected {}", kernel.len(), layer.weight_count())));
    }
    let mut y = vec![T::zero(); out];
    let mut scratch = Vec::new();
    convt_fwd(input, in_ch, kernel, None, out_ch, k, stride, 0, 0, &mut scratch, &mut y);
    Ok(y)
}

pub(crate) fn dense_fwd<T: Scalar>(w: &[T], b: &[T], x: &[T], y: &mut [T]) {
    let n = x.len();
    for (o, yo) in y.iter_mut().enumerate() {
        *yo = dot(&w[o * n..(o + 1) * n], x) + b[o];
    }
}

/// Accumulates weight/bias gradients (if `gw` is given) and writes the
/// input gradient.
pub(crate) fn dense_bwd<T: Scalar>(w: &[T], x: &[T], gy: &[T], grads: Option<(&mut [T], &mut [T])>, gx: &mut [T]) {
    let n = x.len();
    gx.iter_mut().for_each(|v| *v = T::zero());
    for (o, &g) in gy.iter().enumerate() {
        if g != T::zero() {
            axpy(gx, g, &w[o * n..(o + 1) * n]);
        }
    }
    if let Some((gw, gb)) = grads {
        for (o, &g) in gy.iter().enumerate() {
            gb[o] += g;
            if g != T::zero() {
                axpy(&mut gw[o * n..(o + 1) * n], g, x);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn conv1d_fwd<T: Scalar>(x: &[T], in_ch: usize, w: &[T], b: Option<&[T]>, out_ch: usize, k: usize, stride: usize, y: &mut [T]) {
    let len = x.len() / in_ch;
    let out_len = conv_out_len(len, k, stride);
    for oc in 0..out_ch {
        let bias = b.map_or(T::zero(), |b| b[oc]);
        let yo = &mut y[oc * out_len..(oc + 1) * out_len];
        yo.iter_mut().for_each(|v| *v = bias);
        for ic in 0..in_ch {
            let wk = &w[(oc * in_ch + ic) * k..(oc * in_ch + ic + 1) * k];
            let xi = &x[ic * len..(ic + 1) * len];
            for (t, v) in yo.iter_mut().enumerate() {
                *v += dot(wk, &xi[t * stride..t * stride + k]);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn conv1d_bwd<T: Scalar>(
    x: &[T],
    in_ch: usize,
    w: &[T],
    out_ch: usize,
    k: usize,
    stride: usize,
    gy: &[T],
    mut grads: Option<(&mut [T], &mut [T])>,
    gx: Option<&mut [T]>,
) {
    let len = x.len() / in_ch;
    let out_len = conv_out_len(len, k, stride);
    if let Some((gw, gb)) = grads.as_mut() {
        for oc in 0..out_ch {
            let go = &gy[oc * out_len..(oc + 1) * out_len];
            gb[oc] += go.iter().copied().sum::<T>();
            for ic in 0..in_ch {
                let gwk = &mut gw[(oc * in_ch + ic) * k..(oc * in_ch + ic + 1) * k];
                let xi = &x[ic * len..(ic + 1) * len];
                for (t, &g) in go.iter().enumerate() {
                    axpy(gwk, g, &xi[t * stride..t * stride + k]);
                }
            }
        }
    }
    if let Some(gx) = gx {
        gx.iter_mut().for_each(|v| *v = T::zero());
        for oc in 0..out_ch {
            let go = &gy[oc * out_len..(oc + 1) * out_len];
            for ic in 0..in_ch {
                let wk = &w[(oc * in_ch + ic) * k..(oc * in_ch + ic + 1) * k];
                let gxi = &mut gx[ic * len..(ic + 1) * len];
                for (t, &g) in go.iter().enumerate() {
                    axpy(&mut gxi[t * stride..t * stride + k], g, wk);
                }
            }
        }
    }
}

/// `scratch` holds the uncropped output and is resized as needed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn convt_fwd<T: Scalar>(
    x: &[T],
    in_ch: usize,
    w: &[T],
    b: Option<&[T]>,
    out_ch: usize,
    k: usize,
    stride: usize,
    padding: usize,
    output_padding: usize,
    scratch: &mut Vec<T>,
    y: &mut [T],
) {
    let len = x.len() / in_ch;
    let full = (len - 1) * stride + k + output_padding;
    let out_len = full - 2 * padding;
    scratch.clear();
    scratch.resize(out_ch * full, T::zero());
    for ic in 0..in_ch {
        let xi = &x[ic * len..(ic + 1) * len];
        for oc in 0..out_ch {
            let wk = &w[(ic * out_ch + oc) * k..(ic * out_ch + oc + 1) * k];
            let so = &mut scratch[oc * full..(oc + 1) * full];
            for (t, &v) in xi.iter().enumerate() {
                axpy(&mut so[t * stride..t * stride + k], v, wk);
            }
        }
    }
    for oc in 0..out_ch {
        let bias = b.map_or(T::zero(), |b| b[oc]);
        let src = &scratch[oc * full + padding..oc * full + padding + out_len];
        for (d, &s) in y[oc * out_len..(oc + 1) * out_len].iter_mut().zip(src) {
            *d = s + bias;
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn convt_bwd<T: Scalar>(
    x: &[T],
    in_ch: usize,
    w: &[T],
    out_ch: usize,
    k: usize,
    stride: usize,
    padding: usize,
    output_padding: usize,
    gy: &[T],
    scratch: &mut Vec<T>,
    mut grads: Option<(&mut [T], &mut [T])>,
    gx: Option<&mut [T]>,
) {
    let len = x.len() / in_ch;
    let full = (len - 1) * stride + k + output_padding;
    let out_len = full - 2 * padding;
    // Upstream gradient re-embedded in the uncropped frame.
    scratch.clear();
    scratch.resize(out_ch * full, T::zero());
    for oc in 0..out_ch {
        scratch[oc * full + padding..oc * full + padding + out_len].copy_from_slice(&gy[oc * out_len..(oc + 1) * out_len]);
    }
    if let Some((gw, gb)) = grads.as_mut() {
        for oc in 0..out_ch {
            gb[oc] += gy[oc * out_len..(oc + 1) * out_len].iter().copied().sum::<T>();
        }
        for ic in 0..in_ch {
            let xi = &x[ic * len..(ic + 1) * len];
            for oc in 0..out_ch {
                let gwk = &mut gw[(ic * out_ch + oc) * k..(ic * out_ch + oc + 1) * k];
                let so = &scratch[oc * full..(oc + 1) * full];
                for (t, &v) in xi.iter().enumerate() {
                    axpy(gwk, v, &so[t * stride..t * stride + k]);
                }
            }
        }
    }
    if let Some(gx) = gx {
        for ic in 0..in_ch {
            let gxi = &mut gx[ic * len..(ic + 1) * len];
            gxi.iter_mut().for_each(|v| *v = T::zero());
            for oc in 0..out_ch {
                let wk = &w[(ic * out_ch + oc) * k..(ic * out_ch + oc + 1) * k];
                let so = &scratch[oc * full..(oc + 1) * full];
                for (t, v) in gxi.iter_mut().enumerate() {
                    *v += dot(wk, &so[t * stride..t * stride + k]);
                }
            }
        }
    }
}

pub(crate) fn act_fwd<T: Scalar>(a: Activation, x: &[T], y: &mut [T]) {
    let slope = T::lit(LEAKY_SLOPE);
    for (o, &v) in y.iter_mut().zip(x) {
        *o = match a {
            Activation::Relu => v.max(T::zero()),
            Activation::LeakyRelu => {
                if v > T::zero() {
                    v
                } else {
                    slope * v
                }
            }
            Activation::Tanh => v.tanh(),
            Activation::Sigmoid => sigmoid(v),
        };
    }
}

/// Input gradient of an activation given its input `x` and output `y`.
pub(crate) fn act_bwd<T: Scalar>(a: Activation, x: &[T], y: &[T], gy: &[T], gx: &mut [T]) {
    let slope = T::lit(LEAKY_SLOPE);
    for i in 0..gx.len() {
        gx[i] = gy[i]
            * match a {
                Activation::Relu => {
                    if x[i] > T::zero() {
                        T::one()
                    } else {
                        T::zero()
                    }
                }
                Activation::LeakyRelu => {
                    if x[i] > T::zero() {
                        T::one()
                    } else {
                        slope
                    }
                }
                Activation::Tanh => T::one() - y[i] * y[i],
                Activation::Sigmoid => y[i] * (T::one() - y[i]),
            };
    }
}

/// Logistic function, clamped to the open interval (0, 1) so that extreme
/// logits never produce an exact 0 or 1.
pub fn sigmoid<T: Scalar>(v: T) -> T {
    let p = if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    };
    p.max(T::min_positive_value()).min(T::one() - T::epsilon() / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn naive_conv(x: &[f64], in_ch: usize, w: &[f64], out_ch: usize, k: usize, s: usize) -> Vec<f64> {
        let len = x.len() / in_ch;
        let ol = (len - k) / s + 1;
        let mut y = vec![0.0; out_ch * ol];
        for oc in 0..out_ch {
            for t in 0..ol {
                for ic in 0..in_ch {
                    for j in 0..k {
                        y[oc * ol + t] += w[oc * in_ch * k + ic * k + j] * x[ic * len + t * s + j];
                    }
                }
            }
        }
        y
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::rng(seed);
        (0..n).map(|_| rng::normal(&mut r)).collect()
    }

    #[test]
    fn hand_computed_convolutions() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(conv1d(&x, 1, &[1.0, 0.0, -1.0], 1, 3, 1).unwrap(), vec![-2.0, -2.0]);
        assert_eq!(conv1d(&x, 1, &[0.0, 1.0, 0.0], 1, 3, 1).unwrap(), vec![2.0, 3.0]);
        assert!(matches!(conv1d(&x, 1, &[1.0; 5], 1, 5, 1), Err(NeuralError::ShapeMismatch(_))));
    }

    /// Integer-valued data keeps every partial sum exact, so the comparison
    /// is independent of summation order.
    #[test]
    fn conv_matches_nested_loop_oracle() {
        let ints = |n: usize, seed: u64| -> Vec<f64> { random(n, seed).into_iter().map(|v| (v * 4.0).round()).collect() };
        let x = ints(2 * 17, 1);
        let w = ints(3 * 2 * 4, 2);
        let y = conv1d(&x, 2, &w, 3, 4, 2).unwrap();
        assert_eq!(y, naive_conv(&x, 2, &w, 3, 4, 2));
        assert_eq!(y.len(), 3 * 7);
    }

    #[test]
    fn transpose_output_geometry() {
        let l = Layer::ConvT1d { in_ch: 32, out_ch: 16, kernel: 4, stride: 2, padding: 1, output_padding: 0 };
        assert_eq!(l.output_size(32 * 225), Ok(16 * 450));
        let l = Layer::ConvT1d { in_ch: 32, out_ch: 16, kernel: 9, stride: 2, padding: 4, output_padding: 1 };
        assert_eq!(l.output_size(32 * 30), Ok(16 * 60));
        assert!(Layer::Dense { inputs: 3, outputs: 2 }.output_size(4).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        /// <Conv x, y> = <x, ConvT y> for any geometry.
        #[test]
        fn transpose_is_adjoint(in_ch in 1usize..4, out_ch in 1usize..4, k in 1usize..6, s in 1usize..4, extra in 0usize..12, seed in 0u64..1000) {
            let len = k + s * extra;
            let x = random(in_ch * len, seed);
            let w = random(out_ch * in_ch * k, seed + 1);
            let cx = conv1d(&x, in_ch, &w, out_ch, k, s).unwrap();
            let y = random(cx.len(), seed + 2);
            let ty = conv_transpose1d(&y, out_ch, &w, in_ch, k, s).unwrap();
            prop_assert_eq!(ty.len(), x.len());
            let lhs: f64 = cx.iter().zip(&y).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.iter().zip(&ty).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn sigmoid_is_stable() {
        for v in [-1e300, -800.0, -40.0, 40.0, 800.0, 1e300f64] {
            let p = sigmoid(v);
            assert!(p > 0.0 && p < 1.0, "{v} -> {p}");
        }
        assert!(sigmoid(-1e30f32) > 0.0 && sigmoid(1e30f32) < 1.0);
        assert!((sigmoid(0.0f64) - 0.5).abs() < 1e-15);
    }
}
