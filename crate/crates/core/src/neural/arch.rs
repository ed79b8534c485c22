//! Fixed generator and discriminator architectures per level.

use super::layers::{Activation, Layer};
use super::network::{InitScheme, NetworkSpec};
use super::NeuralError;
use crate::types::Level;

/// Channel count and length of the tensor the generator's dense stack
/// reshapes into before the two stride-2 transpose convolutions.
fn seed_shape(level: Level) -> Result<(usize, usize, usize, usize, usize), NeuralError> {
    // (channels, length, kernel, padding, output_padding)
    match level {
        Level::L1 => Ok((32, 225, 4, 1, 0)),
        Level::L2 => Ok((32, 30, 9, 4, 1)),
        Level::L3 => Ok((32, 42, 4, 1, 0)),
        Level::L4 => Err(NeuralError::UnsupportedLevel(level)),
    }
}

/// Dense(in→128) → Dense(→256) → Dense(→C×L) → ConvT(C→16, s2) → ConvT(16→1, s2),
/// with LeakyReLU between layers and Tanh at the output.
pub fn generator_spec(level: Level, input_dim: usize) -> Result<NetworkSpec, NeuralError> {
    let (ch, len, kernel, padding, output_padding) = seed_shape(level)?;
    let hidden = Layer::Act(Activation::LeakyRelu);
    let layers = vec![
        Layer::Dense { inputs: input_dim, outputs: 128 },
        hidden,
        Layer::Dense { inputs: 128, outputs: 256 },
        hidden,
        Layer::Dense { inputs: 256, outputs: ch * len },
        hidden,
        Layer::ConvT1d { in_ch: ch, out_ch: 16, kernel, stride: 2, padding, output_padding },
        hidden,
        Layer::ConvT1d { in_ch: 16, out_ch: 1, kernel, stride: 2, padding, output_padding },
        Layer::Act(Activation::Tanh),
    ];
    let spec = NetworkSpec::new(input_dim, layers, InitScheme::GlorotUniform)?;
    debug_assert_eq!(spec.output_size(), level.profile_length());
    Ok(spec)
}

/// Conv1d(C→16) → Dense(→128) → Dense(→1), LeakyReLU hidden, Sigmoid out.
/// `in_channels` is 1 plus the number of label and batch-statistic channels.
pub fn discriminator_spec(level: Level, in_channels: usize) -> Result<NetworkSpec, NeuralError> {
    // Windows tile the profile exactly so the last sample is scored too.
    let (kernel, stride) = match level {
        Level::L1 => (25, 5),
        Level::L2 | Level::L3 => (10, 2),
        Level::L4 => return Err(NeuralError::UnsupportedLevel(level)),
    };
    let len = level.profile_length();
    let conv_len = (len - kernel) / stride + 1;
    let leaky = Layer::Act(Activation::LeakyRelu);
    let layers = vec![
        Layer::Conv1d { in_ch: in_channels, out_ch: 16, kernel, stride },
        leaky,
        Layer::Dense { inputs: 16 * conv_len, outputs: 128 },
        leaky,
        Layer::Dense { inputs: 128, outputs: 1 },
        Layer::Act(Activation::Sigmoid),
    ];
    NetworkSpec::new(in_channels * len, layers, InitScheme::GlorotUniform)
}
