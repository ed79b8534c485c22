//! GAN and conditional-GAN training and sampling.
//!
//! Networks work in a unit space: real profiles are mapped affinely so that
//! the dataset's range sits inside [-0.8, 0.8], matching the generator's
//! Tanh output. [`OutputRange`] records the map so generated profiles land
//! back in the data's normalized range.

use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};

use super::adam::{Adam, AdamConfig};
use super::arch::{discriminator_spec, generator_spec};
use super::layers::sigmoid;
use super::network::Network;
use super::NeuralError;
use crate::resample::divide_by_mean;
use crate::rng::{self, Rng};
use crate::scalar::{mean, Scalar};
use crate::types::{Level, LoadClass, LoadProfile, Normalization, Season};
use crate::validate::wasserstein_exact;

/// Width of the conditioning vector: two class bits and four season bits.
pub const CONDITION_DIM: usize = 6;
/// Discriminator updates per generator update.
pub const D_STEPS_PER_G: usize = 2;
const GENERATION_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConditionLabel {
    pub load_class: LoadClass,
    pub season: Season,
}

impl ConditionLabel {
    pub fn new(load_class: LoadClass, season: Season) -> Self {
        ConditionLabel { load_class, season }
    }

    /// The eight class × season combinations.
    pub fn all() -> Vec<ConditionLabel> {
        [LoadClass::MainlyResidential, LoadClass::MainlyIndustrial]
            .into_iter()
            .flat_map(|c| Season::ALL.into_iter().map(move |s| ConditionLabel::new(c, s)))
            .collect()
    }

    /// `[residential, industrial, winter, spring, summer, fall]`
    pub fn one_hot<T: Scalar>(&self) -> [T; CONDITION_DIM] {
        let mut v = [T::zero(); CONDITION_DIM];
        v[self.load_class.index()] = T::one();
        v[2 + self.season.index()] = T::one();
        v
    }
}

impl fmt::Display for ConditionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.load_class.as_str(), self.season.as_str())
    }
}

/// Affine map between data values and the networks' unit space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputRange {
    pub center: f64,
    pub half_width: f64,
}

impl OutputRange {
    /// Floor on the half width, so constant datasets still get a usable map.
    pub const MIN_HALF_WIDTH: f64 = 1e-3;
    /// Dataset extremes map to ±1/MARGIN.
    pub const MARGIN: f64 = 1.25;

    pub fn fit(values: impl IntoIterator<Item = f64>) -> Self {
        let (lo, hi) = values.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        OutputRange { center: 0.5 * (lo + hi), half_width: (Self::MARGIN * 0.5 * (hi - lo)).max(Self::MIN_HALF_WIDTH) }
    }

    fn to_unit<T: Scalar>(&self, x: T) -> T {
        (x - T::lit(self.center)) / T::lit(self.half_width)
    }

    fn from_unit<T: Scalar>(&self, u: T) -> T {
        T::lit(self.center) + T::lit(self.half_width) * u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub noise_dim: usize,
    /// Profiles drawn from each side for the per-epoch Wasserstein trace.
    pub trace_subset: usize,
    /// Trace every this many epochs (the last epoch is always traced);
    /// 0 disables the trace.
    pub trace_every: usize,
    /// Feed the discriminator an extra constant channel holding the batch's
    /// mean across-sample standard deviation, which lets it detect a
    /// generator that ignores its noise input.
    pub batch_spread_channel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 50, batch_size: 32, adam: AdamConfig::default(), noise_dim: 100, trace_subset: 500, trace_every: 1, batch_spread_channel: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean discriminator loss (real + fake BCE) over the epoch's updates.
    pub d_loss: f64,
    /// Mean non-saturating generator loss.
    pub g_loss: f64,
    /// Wasserstein distance between pooled real and generated samples.
    pub wasserstein: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
    pub d_updates: u64,
    pub g_updates: u64,
    /// Step size of the run that produced the weights.
    pub learning_rate: f64,
    /// Seed of the run that produced the weights.
    pub seed: u64,
    /// Whether the first attempt diverged and was retried.
    pub retried: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanModel<T> {
    pub level: Level,
    pub noise_dim: usize,
    /// Majority class of the training data, stamped on generated profiles.
    pub load_class: LoadClass,
    pub range: OutputRange,
    /// Whether the discriminator's last input channel is the batch spread.
    pub batch_spread: bool,
    pub generator: Network<T>,
    pub discriminator: Network<T>,
    pub log: TrainingLog,
}

/// A GAN whose generator and discriminator also see a [`ConditionLabel`].
#[derive(Debug, Clone, PartialEq)]
pub struct CGanModel<T> {
    pub gan: GanModel<T>,
}

pub enum AnyGan<'a, T> {
    Plain(&'a GanModel<T>),
    Conditional(&'a CGanModel<T>),
}

/// Generates `count` profiles; `label` must be given exactly when the model
/// is conditional.
pub fn gan_generate<T: Scalar>(
    model: AnyGan<'_, T>,
    count: usize,
    seed: u64,
    label: Option<ConditionLabel>,
) -> Result<Vec<LoadProfile<T>>, NeuralError> {
    match (model, label) {
        (AnyGan::Plain(m), None) => m.generate(count, seed),
        (AnyGan::Plain(_), Some(_)) => Err(NeuralError::UnexpectedLabel),
        (AnyGan::Conditional(m), Some(l)) => m.generate(count, seed, l),
        (AnyGan::Conditional(_), None) => Err(NeuralError::LabelRequired),
    }
}

impl<T: Scalar> GanModel<T> {
    pub fn is_conditional(&self) -> bool {
        self.generator.spec().input_size() == self.noise_dim + CONDITION_DIM
    }

    /// Profiles in data units, before the level's normalization is
    /// re-imposed. Profile `i` depends only on `(seed, i)`.
    pub fn generate_raw(&self, count: usize, seed: u64) -> Vec<Vec<T>> {
        sample(self, count, seed, None)
    }

    pub fn generate(&self, count: usize, seed: u64) -> Result<Vec<LoadProfile<T>>, NeuralError> {
        self.generate_raw(count, seed).into_iter().map(|s| finish(self, s, self.load_class, None)).collect()
    }

    /// One normalized profile per stream seed; `generate(n, seed)` equals
    /// this with streams `split(seed, 0..n)`.
    pub fn generate_streams(&self, streams: &[u64]) -> Result<Vec<LoadProfile<T>>, NeuralError> {
        let s: Vec<_> = streams.iter().map(|&x| (x, None)).collect();
        sample_streams(self, &s).into_iter().map(|v| finish(self, v, self.load_class, None)).collect()
    }

    /// Discriminator probabilities for unconditional profiles in data units,
    /// judged as one batch.
    pub fn discriminate(&self, profiles: &[Vec<T>]) -> Vec<T> {
        let len = self.level.profile_length();
        let unit: Vec<T> = profiles.iter().flat_map(|p| p.iter().map(|&x| self.range.to_unit(x))).collect();
        let spread = self.batch_spread.then(|| BatchSpread::new(&unit, len));
        let labels = vec![None; profiles.len()];
        let input = disc_input(&unit, len, &labels, spread.as_ref());
        self.discriminator.predict(&input, profiles.len())
    }
}

impl<T: Scalar> CGanModel<T> {
    pub fn level(&self) -> Level {
        self.gan.level
    }

    pub fn generate_raw(&self, count: usize, seed: u64, label: ConditionLabel) -> Vec<Vec<T>> {
        sample(&self.gan, count, seed, Some(label))
    }

    pub fn generate(&self, count: usize, seed: u64, label: ConditionLabel) -> Result<Vec<LoadProfile<T>>, NeuralError> {
        self.generate_raw(count, seed, label)
            .into_iter()
            .map(|s| finish(&self.gan, s, label.load_class, Some(label.season)))
            .collect()
    }

    /// One normalized profile per `(stream seed, label)`.
    pub fn generate_streams(&self, streams: &[(u64, ConditionLabel)]) -> Result<Vec<LoadProfile<T>>, NeuralError> {
        let s: Vec<_> = streams.iter().map(|&(x, l)| (x, Some(l))).collect();
        sample_streams(&self.gan, &s)
            .into_iter()
            .zip(streams)
            .map(|(v, &(_, l))| finish(&self.gan, v, l.load_class, Some(l.season)))
            .collect()
    }
}

fn sample<T: Scalar>(m: &GanModel<T>, count: usize, seed: u64, label: Option<ConditionLabel>) -> Vec<Vec<T>> {
    let streams: Vec<(u64, Option<ConditionLabel>)> = (0..count).map(|i| (rng::split(seed, i as u64), label)).collect();
    sample_streams(m, &streams)
}

/// One profile per `(stream seed, label)`, in data units.
fn sample_streams<T: Scalar>(m: &GanModel<T>, streams: &[(u64, Option<ConditionLabel>)]) -> Vec<Vec<T>> {
    let len = m.level.profile_length();
    let width = m.generator.spec().input_size();
    let mut out = Vec::with_capacity(streams.len());
    for chunk in streams.chunks(GENERATION_CHUNK) {
        let mut input = Vec::with_capacity(chunk.len() * width);
        for &(stream, label) in chunk {
            let hot = label.map(|l| l.one_hot::<T>());
            push_generator_input(&mut input, m.noise_dim, hot.as_ref(), &mut rng::rng(stream));
        }
        let y = m.generator.predict(&input, chunk.len());
        out.extend(y.chunks_exact(len).map(|u| u.iter().map(|&v| m.range.from_unit(v)).collect()));
    }
    out
}

fn push_generator_input<T: Scalar>(buf: &mut Vec<T>, noise_dim: usize, hot: Option<&[T; CONDITION_DIM]>, r: &mut Rng) {
    buf.extend((0..noise_dim).map(|_| rng::normal::<T>(r)));
    if let Some(h) = hot {
        buf.extend_from_slice(h);
    }
}

fn finish<T: Scalar>(m: &GanModel<T>, samples: Vec<T>, class: LoadClass, season: Option<Season>) -> Result<LoadProfile<T>, NeuralError> {
    let norm = m.level.normalization();
    let samples = match norm {
        Normalization::ZeroMeanDetrended => {
            let mu = mean(&samples);
            samples.into_iter().map(|v| v - mu).collect()
        }
        _ => divide_by_mean(&samples)?.0,
    };
    Ok(LoadProfile::new(samples, m.level.sampling_period_s(), class, season, norm)?)
}

fn check_dataset<T: Scalar>(dataset: &[LoadProfile<T>], level: Level, cfg: &TrainConfig) -> Result<(), NeuralError> {
    if level == Level::L4 {
        return Err(NeuralError::UnsupportedLevel(level));
    }
    if cfg.batch_size == 0 || cfg.noise_dim == 0 {
        return Err(NeuralError::InvalidDataset("batch size and noise dimension must be positive".into()));
    }
    let need = 2 * cfg.batch_size;
    if dataset.len() < need {
        return Err(NeuralError::DatasetTooSmall { have: dataset.len(), need });
    }
    for (i, p) in dataset.iter().enumerate() {
        if p.len() != level.profile_length() {
            return Err(NeuralError::InvalidDataset(format!("profile {i} has {} samples, {level} needs {}", p.len(), level.profile_length())));
        }
        if p.normalization != level.normalization() && p.normalization != Normalization::Raw {
            return Err(NeuralError::InvalidDataset(format!("profile {i} is {:?}, {level} expects {:?}", p.normalization, level.normalization())));
        }
    }
    Ok(())
}

fn majority_class<T>(dataset: &[LoadProfile<T>]) -> LoadClass {
    let res = dataset.iter().filter(|p| p.load_class == LoadClass::MainlyResidential).count();
    if 2 * res >= dataset.len() {
        LoadClass::MainlyResidential
    } else {
        LoadClass::MainlyIndustrial
    }
}

/// Unconditional GAN on one level's profiles.
pub fn train_gan<T: Scalar>(dataset: &[LoadProfile<T>], level: Level, cfg: &TrainConfig, seed: u64) -> Result<GanModel<T>, NeuralError> {
    train_gan_observed(dataset, level, cfg, seed, &mut |_| {})
}

/// [`train_gan`] calling `observer` after every epoch.
pub fn train_gan_observed<T: Scalar>(
    dataset: &[LoadProfile<T>],
    level: Level,
    cfg: &TrainConfig,
    seed: u64,
    observer: &mut dyn FnMut(&EpochStats),
) -> Result<GanModel<T>, NeuralError> {
    check_dataset(dataset, level, cfg)?;
    let data = Prepared::new(dataset, None);
    train_with_retry(&data, level, cfg, seed, majority_class(dataset), observer)
}

/// Conditional GAN; labels are read from each profile's class and season.
pub fn train_cgan<T: Scalar>(dataset: &[LoadProfile<T>], level: Level, cfg: &TrainConfig, seed: u64) -> Result<CGanModel<T>, NeuralError> {
    train_cgan_observed(dataset, level, cfg, seed, &mut |_| {})
}

pub fn train_cgan_observed<T: Scalar>(
    dataset: &[LoadProfile<T>],
    level: Level,
    cfg: &TrainConfig,
    seed: u64,
    observer: &mut dyn FnMut(&EpochStats),
) -> Result<CGanModel<T>, NeuralError> {
    check_dataset(dataset, level, cfg)?;
    let mut labels = Vec::with_capacity(dataset.len());
    for (i, p) in dataset.iter().enumerate() {
        let season = p.season.ok_or_else(|| NeuralError::InvalidDataset(format!("profile {i} has no season label")))?;
        labels.push(ConditionLabel::new(p.load_class, season));
    }
    let missing: Vec<ConditionLabel> = ConditionLabel::all()
        .into_iter()
        .filter(|l| labels.iter().filter(|x| *x == l).count() < cfg.batch_size)
        .collect();
    if !missing.is_empty() {
        return Err(NeuralError::MissingLabelCoverage(missing));
    }
    let data = Prepared::new(dataset, Some(&labels));
    let gan = train_with_retry(&data, level, cfg, seed, majority_class(dataset), observer)?;
    Ok(CGanModel { gan })
}

/// Training data in unit space, with one-hot labels for conditional runs.
struct Prepared<T> {
    range: OutputRange,
    unit: Vec<T>,
    labels: Option<Vec<[T; CONDITION_DIM]>>,
    n: usize,
    len: usize,
}

impl<T: Scalar> Prepared<T> {
    fn new(dataset: &[LoadProfile<T>], labels: Option<&[ConditionLabel]>) -> Self {
        let range = OutputRange::fit(dataset.iter().flat_map(|p| p.samples.iter().map(|v| v.as_f64())));
        let unit = dataset.iter().flat_map(|p| p.samples.iter().map(|&v| range.to_unit(v))).collect();
        Prepared {
            range,
            unit,
            labels: labels.map(|ls| ls.iter().map(|l| l.one_hot()).collect()),
            n: dataset.len(),
            len: dataset[0].len(),
        }
    }

    fn cond_dim(&self) -> usize {
        if self.labels.is_some() {
            CONDITION_DIM
        } else {
            0
        }
    }

    fn profile(&self, i: usize) -> &[T] {
        &self.unit[i * self.len..(i + 1) * self.len]
    }

    fn label(&self, i: usize) -> Option<&[T; CONDITION_DIM]> {
        self.labels.as_ref().map(|l| &l[i])
    }

    fn labels_of<'a>(&'a self, idx: &[usize]) -> Vec<Option<&'a [T; CONDITION_DIM]>> {
        idx.iter().map(|&i| self.label(i)).collect()
    }
}

/// Mean over time of the across-batch standard deviation, with what its
/// gradient needs.
struct BatchSpread<T> {
    mean: Vec<T>,
    std: Vec<T>,
    value: T,
}

impl<T: Scalar> BatchSpread<T> {
    fn new(profiles: &[T], len: usize) -> Self {
        let b = T::from_usize_lossy(profiles.len() / len);
        let mut mean = vec![T::zero(); len];
        for p in profiles.chunks_exact(len) {
            for (m, &x) in mean.iter_mut().zip(p) {
                *m += x / b;
            }
        }
        let mut var = vec![T::zero(); len];
        for p in profiles.chunks_exact(len) {
            for t in 0..len {
                let d = p[t] - mean[t];
                var[t] += d * d / b;
            }
        }
        let std: Vec<T> = var.into_iter().map(|v| (v + T::lit(1e-8)).sqrt()).collect();
        let value = std.iter().copied().sum::<T>() / T::from_usize_lossy(len);
        BatchSpread { mean, std, value }
    }

    /// Adds `g · d(value)/d(profiles)` to `grad`.
    fn backprop(&self, profiles: &[T], g: T, grad: &mut [T]) {
        let len = self.mean.len();
        let scale = g / (T::from_usize_lossy(profiles.len() / len) * T::from_usize_lossy(len));
        for (p, gp) in profiles.chunks_exact(len).zip(grad.chunks_exact_mut(len)) {
            for t in 0..len {
                gp[t] += scale * (p[t] - self.mean[t]) / self.std[t];
            }
        }
    }
}

/// Discriminator rows: the profile, one constant channel per label entry,
/// then the optional batch-spread channel.
fn disc_input<T: Scalar>(profiles: &[T], len: usize, labels: &[Option<&[T; CONDITION_DIM]>], spread: Option<&BatchSpread<T>>) -> Vec<T> {
    let mut buf = Vec::new();
    for (p, label) in profiles.chunks_exact(len).zip(labels) {
        buf.extend_from_slice(p);
        if let Some(h) = label {
            for &v in h.iter() {
                buf.extend(std::iter::repeat_n(v, len));
            }
        }
        if let Some(s) = spread {
            buf.extend(std::iter::repeat_n(s.value, len));
        }
    }
    buf
}

/// Loss gradient with respect to the profiles, given the gradient with
/// respect to the full discriminator input.
fn profile_grad<T: Scalar>(input_grad: &[T], len: usize, profiles: &[T], spread: Option<&BatchSpread<T>>) -> Vec<T> {
    let width = input_grad.len() / (profiles.len() / len);
    let mut grad: Vec<T> = input_grad.chunks_exact(width).flat_map(|row| row[..len].iter().copied()).collect();
    if let Some(s) = spread {
        let g: T = input_grad.chunks_exact(width).flat_map(|row| row[width - len..].iter().copied()).sum();
        s.backprop(profiles, g, &mut grad);
    }
    grad
}

fn train_with_retry<T: Scalar>(
    data: &Prepared<T>,
    level: Level,
    cfg: &TrainConfig,
    seed: u64,
    load_class: LoadClass,
    observer: &mut dyn FnMut(&EpochStats),
) -> Result<GanModel<T>, NeuralError> {
    match train_once(data, level, cfg, cfg.adam.learning_rate, seed, load_class, observer) {
        Err(NeuralError::DivergenceDetected { .. }) => {
            let lr = cfg.adam.learning_rate / 2.0;
            let retry_seed = rng::split(seed, 1);
            match train_once(data, level, cfg, lr, retry_seed, load_class, observer) {
                Ok(mut m) => {
                    m.log.retried = true;
                    Ok(m)
                }
                Err(NeuralError::DivergenceDetected { epoch, .. }) => Err(NeuralError::DivergenceDetected { epoch, retried: true }),
                Err(e) => Err(e),
            }
        }
        other => other,
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Binary cross-entropy on logits against a constant target; returns the
/// summed loss and writes d(mean loss)/d(logit).
fn bce_logits<T: Scalar>(logits: &[T], target_real: bool, grad: &mut Vec<T>) -> f64 {
    let b = T::from_usize_lossy(logits.len());
    grad.clear();
    let mut loss = 0.0;
    for &z in logits {
        let p = sigmoid(z);
        if target_real {
            loss += softplus(-z.as_f64());
            grad.push((p - T::one()) / b);
        } else {
            loss += softplus(z.as_f64());
            grad.push(p / b);
        }
    }
    loss
}

#[allow(clippy::too_many_arguments)]
fn train_once<T: Scalar>(
    data: &Prepared<T>,
    level: Level,
    cfg: &TrainConfig,
    learning_rate: f64,
    seed: u64,
    load_class: LoadClass,
    observer: &mut dyn FnMut(&EpochStats),
) -> Result<GanModel<T>, NeuralError> {
    let cond = data.cond_dim();
    let spread_ch = usize::from(cfg.batch_spread_channel);
    let mut g = Network::<T>::new(generator_spec(level, cfg.noise_dim + cond)?, &mut rng::rng(rng::split_tag(seed, "generator")));
    let mut d = Network::<T>::new(
        discriminator_spec(level, 1 + cond + spread_ch)?,
        &mut rng::rng(rng::split_tag(seed, "discriminator")),
    );
    let adam_cfg = AdamConfig { learning_rate, ..cfg.adam };
    let mut adam_g = Adam::new(adam_cfg, g.param_count());
    let mut adam_d = Adam::new(adam_cfg, d.param_count());
    let mut r = rng::rng(rng::split_tag(seed, "train"));
    let mut trace_rng = rng::rng(rng::split_tag(seed, "trace"));

    let b = cfg.batch_size;
    let len = data.len;
    let g_width = cfg.noise_dim + cond;
    // The discriminator's last layer is its Sigmoid: losses work on logits.
    let logit_layer = d.spec().layers().len() - 1;
    let g_layers = g.spec().layers().len();
    let rounds = data.n / (D_STEPS_PER_G * b);
    let mut order: Vec<usize> = (0..data.n).collect();
    let mut grads_d = vec![T::zero(); d.param_count()];
    let mut grads_g = vec![T::zero(); g.param_count()];
    let mut upstream = Vec::with_capacity(b);
    let mut log = TrainingLog { learning_rate, seed, ..Default::default() };
    let spread_of = |x: &[T]| cfg.batch_spread_channel.then(|| BatchSpread::new(x, len));

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut r);
        let (mut d_sum, mut g_sum) = (0.0, 0.0);
        for round in 0..rounds {
            for step in 0..D_STEPS_PER_G {
                let idx = &order[(round * D_STEPS_PER_G + step) * b..][..b];
                let labels = data.labels_of(idx);
                let real_profiles: Vec<T> = idx.iter().flat_map(|&i| data.profile(i).iter().copied()).collect();
                let mut g_in = Vec::with_capacity(b * g_width);
                for &i in idx {
                    push_generator_input(&mut g_in, cfg.noise_dim, data.label(i), &mut r);
                }
                let fake_profiles = g.predict(&g_in, b);
                let real = disc_input(&real_profiles, len, &labels, spread_of(&real_profiles).as_ref());
                let fake = disc_input(&fake_profiles, len, &labels, spread_of(&fake_profiles).as_ref());
                grads_d.iter_mut().for_each(|v| *v = T::zero());
                let tape = d.forward_upto(&real, b, logit_layer);
                let lr_real = bce_logits(tape.output(), true, &mut upstream);
                d.backward(&tape, logit_layer, &upstream, Some(&mut grads_d));
                let tape = d.forward_upto(&fake, b, logit_layer);
                let lr_fake = bce_logits(tape.output(), false, &mut upstream);
                d.backward(&tape, logit_layer, &upstream, Some(&mut grads_d));
                adam_d.step(&mut d.params, &grads_d);
                log.d_updates += 1;
                d_sum += (lr_real + lr_fake) / b as f64;
            }

            // Generator step on labels drawn from the data.
            let mut g_in = Vec::with_capacity(b * g_width);
            let picks: Vec<usize> = (0..b).map(|_| *order.choose(&mut r).expect("non-empty")).collect();
            for &i in &picks {
                push_generator_input(&mut g_in, cfg.noise_dim, data.label(i), &mut r);
            }
            let g_tape = g.forward(&g_in, b);
            let fake_profiles = g_tape.output();
            let spread = spread_of(fake_profiles);
            let fake = disc_input(fake_profiles, len, &data.labels_of(&picks), spread.as_ref());
            let d_tape = d.forward_upto(&fake, b, logit_layer);
            let g_loss = bce_logits(d_tape.output(), true, &mut upstream);
            let d_input_grad = d.backward(&d_tape, logit_layer, &upstream, None);
            let g_out_grad = profile_grad(&d_input_grad, len, fake_profiles, spread.as_ref());
            grads_g.iter_mut().for_each(|v| *v = T::zero());
            g.backward(&g_tape, g_layers, &g_out_grad, Some(&mut grads_g));
            adam_g.step(&mut g.params, &grads_g);
            log.g_updates += 1;
            g_sum += g_loss / b as f64;

            if !(d_sum.is_finite() && g_sum.is_finite()) {
                return Err(NeuralError::DivergenceDetected { epoch, retried: false });
            }
        }
        if !(g.params.iter().chain(&d.params).all(|v| v.is_finite())) {
            return Err(NeuralError::DivergenceDetected { epoch, retried: false });
        }
        let trace_now = cfg.trace_every > 0 && ((epoch + 1) % cfg.trace_every == 0 || epoch + 1 == cfg.epochs);
        let wasserstein = trace_now.then(|| trace_distance(&g, data, cfg, &mut trace_rng));
        let stats = EpochStats {
            epoch,
            d_loss: d_sum / (rounds * D_STEPS_PER_G).max(1) as f64,
            g_loss: g_sum / rounds.max(1) as f64,
            wasserstein,
        };
        observer(&stats);
        log.epochs.push(stats);
    }
    Ok(GanModel {
        level,
        noise_dim: cfg.noise_dim,
        load_class,
        range: data.range,
        batch_spread: cfg.batch_spread_channel,
        generator: g,
        discriminator: d,
        log,
    })
}

/// Distance between the pooled values of a random real subset and as many
/// generated profiles carrying the same labels, in data units.
fn trace_distance<T: Scalar>(g: &Network<T>, data: &Prepared<T>, cfg: &TrainConfig, r: &mut Rng) -> f64 {
    let m = cfg.trace_subset.min(data.n).max(1);
    let idx: Vec<usize> = rand::seq::index::sample(r, data.n, m).into_vec();
    let mut real = Vec::with_capacity(m * data.len);
    let mut fake = Vec::with_capacity(m * data.len);
    for chunk in idx.chunks(GENERATION_CHUNK) {
        let mut g_in = Vec::new();
        for &i in chunk {
            real.extend(data.profile(i).iter().map(|&u| data.range.from_unit(u).as_f64()));
            push_generator_input(&mut g_in, cfg.noise_dim, data.label(i), r);
        }
        fake.extend(g.predict(&g_in, chunk.len()).into_iter().map(|u| data.range.from_unit(u).as_f64()));
    }
    wasserstein_exact(&real, &fake)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_profiles(level: Level, value: f64, n: usize, label: Option<ConditionLabel>) -> Vec<LoadProfile<f64>> {
        (0..n)
            .map(|_| LoadProfile {
                samples: vec![value; level.profile_length()],
                sampling_period_s: level.sampling_period_s(),
                load_class: label.map_or(LoadClass::MainlyResidential, |l| l.load_class),
                season: label.map(|l| l.season),
                normalization: Normalization::Raw,
            })
            .collect()
    }

    fn quick(epochs: usize, batch: usize) -> TrainConfig {
        TrainConfig { epochs, batch_size: batch, trace_subset: 50, ..Default::default() }
    }

    #[test]
    fn one_hot_encoding() {
        let v = ConditionLabel::new(LoadClass::MainlyIndustrial, Season::Summer).one_hot::<f64>();
        assert_eq!(v, [0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(v.iter().sum::<f64>(), 2.0);
        assert_eq!(ConditionLabel::all().len(), 8);
    }

    #[test]
    fn output_range_covers_data_with_margin() {
        let r = OutputRange::fit([0.5, 1.5]);
        assert_eq!(r.center, 1.0);
        assert!((r.to_unit(1.5f64) - 0.8).abs() < 1e-12);
        assert!((r.from_unit(r.to_unit(0.7f64)) - 0.7).abs() < 1e-12);
        assert_eq!(OutputRange::fit([2.0, 2.0]).half_width, OutputRange::MIN_HALF_WIDTH);
    }

    #[test]
    fn rejects_small_or_mismatched_datasets() {
        let cfg = quick(1, 8);
        let data = constant_profiles(Level::L2, 0.0, 15, None);
        assert_eq!(train_gan(&data, Level::L2, &cfg, 1).unwrap_err(), NeuralError::DatasetTooSmall { have: 15, need: 16 });
        let data = constant_profiles(Level::L1, 1.0, 20, None);
        assert!(matches!(train_gan(&data, Level::L2, &cfg, 1), Err(NeuralError::InvalidDataset(_))));
        assert!(matches!(train_gan(&data, Level::L4, &cfg, 1), Err(NeuralError::UnsupportedLevel(Level::L4))));
    }

    #[test]
    fn discriminator_updates_twice_per_generator_update() {
        let data = constant_profiles(Level::L2, 0.0, 40, None);
        let m = train_gan(&data, Level::L2, &quick(3, 8), 5).unwrap();
        assert_eq!(m.log.g_updates, 3 * 2);
        assert_eq!(m.log.d_updates, 2 * m.log.g_updates);
        assert_eq!(m.log.epochs.len(), 3);
        assert!(m.log.epochs.iter().all(|e| e.wasserstein.is_some()));
    }

    #[test]
    fn training_is_deterministic() {
        let mut data = constant_profiles(Level::L2, 0.0, 32, None);
        for (i, p) in data.iter_mut().enumerate() {
            p.samples[i % 120] = 0.01 * i as f64;
        }
        let a = train_gan(&data, Level::L2, &quick(2, 8), 9).unwrap();
        let b = train_gan(&data, Level::L2, &quick(2, 8), 9).unwrap();
        assert_eq!(a.generator.params, b.generator.params);
        assert_eq!(a.discriminator.params, b.discriminator.params);
        assert_eq!(a.log, b.log);
        let c = train_gan(&data, Level::L2, &quick(2, 8), 10).unwrap();
        assert_ne!(a.generator.params, c.generator.params);
    }

    #[test]
    fn generation_contracts() {
        let data = constant_profiles(Level::L2, 0.0, 16, None);
        let m = train_gan(&data, Level::L2, &quick(1, 8), 2).unwrap();
        assert!(m.generate(0, 1).unwrap().is_empty());
        let a = m.generate(5, 77).unwrap();
        assert_eq!(a, m.generate(5, 77).unwrap());
        assert!(a.iter().all(|p| p.len() == 120 && p.mean().abs() < 1e-12));
        // Profile i only depends on (seed, i).
        assert_eq!(m.generate(2, 77).unwrap()[..], a[..2]);
        assert_eq!(gan_generate(AnyGan::Plain(&m), 1, 0, Some(ConditionLabel::all()[0])).unwrap_err(), NeuralError::UnexpectedLabel);
        let p = m.discriminate(&[vec![0.0; 120], vec![1e6; 120]]);
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn conditional_requires_full_label_coverage() {
        let cfg = quick(1, 4);
        let mut data = Vec::new();
        for l in ConditionLabel::all().into_iter().skip(1) {
            data.extend(constant_profiles(Level::L3, 1.0, 4, Some(l)));
        }
        match train_cgan(&data, Level::L3, &cfg, 1) {
            Err(NeuralError::MissingLabelCoverage(m)) => assert_eq!(m, vec![ConditionLabel::all()[0]]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conditional_generation_needs_label_and_normalizes() {
        let mut data = Vec::new();
        for l in ConditionLabel::all() {
            data.extend(constant_profiles(Level::L3, 1.0, 4, Some(l)));
        }
        let m = train_cgan(&data, Level::L3, &quick(1, 4), 3).unwrap();
        assert_eq!(gan_generate(AnyGan::Conditional(&m), 1, 0, None).unwrap_err(), NeuralError::LabelRequired);
        let label = ConditionLabel::new(LoadClass::MainlyResidential, Season::Summer);
        let out = m.generate(5, 4, label).unwrap();
        assert_eq!(out.len(), 5);
        for p in &out {
            assert_eq!(p.len(), 168);
            assert!((p.mean() - 1.0).abs() < 1e-9);
            assert_eq!(p.season, Some(Season::Summer));
        }
    }
}
