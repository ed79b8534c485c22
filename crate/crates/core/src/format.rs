//! Binary container for a trained model set.
//!
//! Layout (all integers little-endian, floats IEEE-754 binary64 LE):
//!
//! ```text
//! magic     8 bytes  "LSYNMODL"
//! version   u32      FORMAT_VERSION
//! count     u32      number of sections
//! section*  tag [u8; 4], length u64, payload (length bytes)
//! digest    32 bytes SHA-256 of every preceding byte
//! ```
//!
//! Sections `META`, `GAN1`, `GAN2`, `CGN3`, `SVDR`, `SVDI` and `SEAM` must
//! each appear exactly once, in that order. Payload encodings are listed in
//! `docs/FORMATS.md`. The encoding holds no timestamps, so identical models
//! and provenance always produce identical bytes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compose::{Models, SeamFilter};
use crate::linalg::Matrix;
use crate::neural::{
    Activation, CGanModel, EpochStats, GanModel, InitScheme, Layer, Network, NetworkSpec, OutputRange, TrainingLog,
};
use crate::svdgen::{CoefficientDistribution, SvdModel, SvdWarning};
use crate::types::{Level, LoadClass};

pub const MAGIC: &[u8; 8] = b"LSYNMODL";
pub const FORMAT_VERSION: u32 = 1;

const SECTIONS: [&[u8; 4]; 7] = [b"META", b"GAN1", b"GAN2", b"CGN3", b"SVDR", b"SVDI", b"SEAM"];
const DIGEST_LEN: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("not a model bundle (bad magic bytes)")]
    BadMagic,
    #[error("unsupported bundle format version {found} (this build reads {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("bundle is missing section {0}")]
    MissingSection(String),
    #[error("unexpected section {found} where {expected} was required")]
    UnexpectedSection { found: String, expected: String },
    #[error("bundle is truncated")]
    Truncated,
    #[error("bundle checksum mismatch")]
    Checksum,
    #[error("trailing bytes after the last section")]
    TrailingBytes,
    #[error("invalid bundle content: {0}")]
    Invalid(String),
}

/// Where a bundle came from. Stored as JSON in the `META` section.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Name and version of the producing tool.
    pub producer: String,
    /// Training seed per artifact, e.g. `("level 1", 7)`.
    pub seeds: Vec<(String, u64)>,
    /// SHA-256 (hex) of each training dataset.
    pub datasets: Vec<(String, String)>,
}

pub fn encode_bundle(models: &Models<f64>, provenance: &Provenance) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(SECTIONS.len() as u32).to_le_bytes());
    let meta = serde_json::to_vec(provenance).expect("provenance serializes");
    let payloads = [
        meta,
        gan_bytes(&models.l1),
        gan_bytes(&models.l2),
        gan_bytes(&models.l3.gan),
        svd_bytes(&models.l4_residential),
        svd_bytes(&models.l4_industrial),
        seam_bytes(&models.seam),
    ];
    for (tag, payload) in SECTIONS.iter().zip(payloads) {
        out.extend_from_slice(*tag);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

pub fn decode_bundle(bytes: &[u8]) -> Result<(Models<f64>, Provenance), FormatError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let mut head = Reader::new(&bytes[MAGIC.len()..]);
    let version = head.u32()?;
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion { found: version, expected: FORMAT_VERSION });
    }
    if bytes.len() < MAGIC.len() + 8 + DIGEST_LEN {
        return Err(FormatError::Truncated);
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(FormatError::Checksum);
    }
    let mut r = Reader::new(&body[MAGIC.len() + 4..]);
    let count = r.u32()? as usize;
    let mut payloads = Vec::with_capacity(SECTIONS.len());
    for (i, expected) in SECTIONS.iter().enumerate() {
        if i >= count {
            return Err(FormatError::MissingSection(tag_name(*expected)));
        }
        let tag = r.take(4)?;
        if tag != *expected {
            return Err(FormatError::UnexpectedSection { found: tag_name(tag), expected: tag_name(*expected) });
        }
        let len = usize::try_from(r.u64()?).map_err(|_| FormatError::Truncated)?;
        payloads.push(r.take(len)?);
    }
    if count != SECTIONS.len() || !r.is_empty() {
        return Err(FormatError::TrailingBytes);
    }
    let provenance: Provenance =
        serde_json::from_slice(payloads[0]).map_err(|e| FormatError::Invalid(format!("META: {e}")))?;
    let models = Models {
        l1: read_section(payloads[1], read_gan)?,
        l2: read_section(payloads[2], read_gan)?,
        l3: CGanModel { gan: read_section(payloads[3], read_gan)? },
        l4_residential: read_section(payloads[4], read_svd)?,
        l4_industrial: read_section(payloads[5], read_svd)?,
        seam: read_section(payloads[6], read_seam)?,
    };
    Ok((models, provenance))
}

fn tag_name(tag: &[u8]) -> String {
    String::from_utf8_lossy(tag).into_owned()
}

fn read_section<V>(payload: &[u8], f: impl FnOnce(&mut Reader) -> Result<V, FormatError>) -> Result<V, FormatError> {
    let mut r = Reader::new(payload);
    let v = f(&mut r)?;
    if !r.is_empty() {
        return Err(FormatError::Invalid("section has trailing bytes".into()));
    }
    Ok(v)
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&u32::try_from(v).expect("count fits in u32").to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.f64(x));
    }
    fn matrix(&mut self, m: &Matrix<f64>) {
        self.u32(m.rows);
        self.u32(m.cols);
        m.data.iter().for_each(|&x| self.f64(x));
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }
    fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.buf.len() < n {
            return Err(FormatError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.array::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn usize(&mut self) -> Result<usize, FormatError> {
        Ok(self.u32()? as usize)
    }
    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn f64s(&mut self) -> Result<Vec<f64>, FormatError> {
        let n = usize::try_from(self.u64()?).map_err(|_| FormatError::Truncated)?;
        if n > self.buf.len() / 8 {
            return Err(FormatError::Truncated);
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn matrix(&mut self) -> Result<Matrix<f64>, FormatError> {
        let (rows, cols) = (self.usize()?, self.usize()?);
        let n = rows.checked_mul(cols).filter(|&n| n <= self.buf.len() / 8).ok_or(FormatError::Truncated)?;
        let data = (0..n).map(|_| self.f64()).collect::<Result<_, _>>()?;
        Ok(Matrix { rows, cols, data })
    }
    fn bool(&mut self) -> Result<bool, FormatError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(FormatError::Invalid(format!("bad boolean byte {b}"))),
        }
    }
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

fn class_code(c: LoadClass) -> u8 {
    c.index() as u8
}

fn class_from(code: u8) -> Result<LoadClass, FormatError> {
    LoadClass::ALL.get(code as usize).copied().ok_or_else(|| invalid(format!("bad load class {code}")))
}

fn activation_code(a: Activation) -> u8 {
    match a {
        Activation::Relu => 0,
        Activation::LeakyRelu => 1,
        Activation::Tanh => 2,
        Activation::Sigmoid => 3,
    }
}

fn activation_from(code: u8) -> Result<Activation, FormatError> {
    Ok(match code {
        0 => Activation::Relu,
        1 => Activation::LeakyRelu,
        2 => Activation::Tanh,
        3 => Activation::Sigmoid,
        _ => return Err(invalid(format!("bad activation {code}"))),
    })
}

fn write_network(w: &mut Writer, n: &Network<f64>) {
    let spec = n.spec();
    w.u32(spec.input_size());
    w.u32(spec.init().id() as usize);
    w.u32(spec.layers().len());
    for layer in spec.layers() {
        match *layer {
            Layer::Dense { inputs, outputs } => {
                w.u8(0);
                [inputs, outputs].into_iter().for_each(|v| w.u32(v));
            }
            Layer::Conv1d { in_ch, out_ch, kernel, stride } => {
                w.u8(1);
                [in_ch, out_ch, kernel, stride].into_iter().for_each(|v| w.u32(v));
            }
            Layer::ConvT1d { in_ch, out_ch, kernel, stride, padding, output_padding } => {
                w.u8(2);
                [in_ch, out_ch, kernel, stride, padding, output_padding].into_iter().for_each(|v| w.u32(v));
            }
            Layer::Act(a) => {
                w.u8(3);
                w.u8(activation_code(a));
            }
        }
    }
    w.f64s(&n.params);
}

fn read_network(r: &mut Reader) -> Result<Network<f64>, FormatError> {
    let input = r.usize()?;
    let init = InitScheme::from_id(r.u32()?).ok_or_else(|| invalid("unknown init scheme"))?;
    let n_layers = r.usize()?;
    let mut layers = Vec::with_capacity(n_layers.min(64));
    for _ in 0..n_layers {
        let layer = match r.u8()? {
            0 => Layer::Dense { inputs: r.usize()?, outputs: r.usize()? },
            1 => Layer::Conv1d { in_ch: r.usize()?, out_ch: r.usize()?, kernel: r.usize()?, stride: r.usize()? },
            2 => Layer::ConvT1d {
                in_ch: r.usize()?,
                out_ch: r.usize()?,
                kernel: r.usize()?,
                stride: r.usize()?,
                padding: r.usize()?,
                output_padding: r.usize()?,
            },
            3 => Layer::Act(activation_from(r.u8()?)?),
            k => return Err(invalid(format!("bad layer kind {k}"))),
        };
        layers.push(layer);
    }
    let spec = NetworkSpec::new(input, layers, init).map_err(|e| invalid(e.to_string()))?;
    Network::from_params(spec, r.f64s()?).map_err(|e| invalid(e.to_string()))
}

fn gan_bytes(m: &GanModel<f64>) -> Vec<u8> {
    let mut w = Writer::default();
    w.u8(m.level.number());
    w.u32(m.noise_dim);
    w.u8(class_code(m.load_class));
    w.f64(m.range.center);
    w.f64(m.range.half_width);
    w.u8(m.batch_spread as u8);
    write_network(&mut w, &m.generator);
    write_network(&mut w, &m.discriminator);
    let log = &m.log;
    w.u32(log.epochs.len());
    for e in &log.epochs {
        w.u32(e.epoch);
        w.f64(e.d_loss);
        w.f64(e.g_loss);
        w.u8(e.wasserstein.is_some() as u8);
        w.f64(e.wasserstein.unwrap_or(0.0));
    }
    w.u64(log.d_updates);
    w.u64(log.g_updates);
    w.f64(log.learning_rate);
    w.u64(log.seed);
    w.u8(log.retried as u8);
    w.0
}

fn read_gan(r: &mut Reader) -> Result<GanModel<f64>, FormatError> {
    let level = Level::from_number(r.u8()?).ok_or_else(|| invalid("bad level"))?;
    let noise_dim = r.usize()?;
    let load_class = class_from(r.u8()?)?;
    let range = OutputRange { center: r.f64()?, half_width: r.f64()? };
    let batch_spread = r.bool()?;
    let generator = read_network(r)?;
    let discriminator = read_network(r)?;
    let n = r.usize()?;
    let mut epochs = Vec::with_capacity(n.min(r.buf.len()));
    for _ in 0..n {
        let epoch = r.usize()?;
        let (d_loss, g_loss) = (r.f64()?, r.f64()?);
        let has = r.bool()?;
        let value = r.f64()?;
        epochs.push(EpochStats { epoch, d_loss, g_loss, wasserstein: has.then_some(value) });
    }
    let log = TrainingLog {
        epochs,
        d_updates: r.u64()?,
        g_updates: r.u64()?,
        learning_rate: r.f64()?,
        seed: r.u64()?,
        retried: r.bool()?,
    };
    if generator.spec().output_size() != level.profile_length() {
        return Err(invalid(format!("generator output does not match {level}")));
    }
    Ok(GanModel { level, noise_dim, load_class, range, batch_spread, generator, discriminator, log })
}

fn svd_bytes(m: &SvdModel<f64>) -> Vec<u8> {
    let mut w = Writer::default();
    w.u8(class_code(m.load_class));
    w.matrix(&m.u);
    w.f64s(&m.singular_values);
    w.matrix(&m.vt);
    w.u32(m.coefficients.len());
    for c in &m.coefficients {
        w.f64(c.mean);
        w.f64(c.std);
    }
    w.u32(m.rank);
    w.u32(m.warnings.len());
    for warning in &m.warnings {
        let SvdWarning::RankDeficient { index, value, largest } = *warning;
        w.u32(index);
        w.f64(value);
        w.f64(largest);
    }
    w.0
}

fn read_svd(r: &mut Reader) -> Result<SvdModel<f64>, FormatError> {
    let load_class = class_from(r.u8()?)?;
    let u = r.matrix()?;
    let singular_values = r.f64s()?;
    let vt = r.matrix()?;
    let n = r.usize()?;
    let coefficients = (0..n)
        .map(|_| Ok(CoefficientDistribution { mean: r.f64()?, std: r.f64()? }))
        .collect::<Result<Vec<_>, FormatError>>()?;
    let rank = r.usize()?;
    let n = r.usize()?;
    let warnings = (0..n)
        .map(|_| Ok(SvdWarning::RankDeficient { index: r.usize()?, value: r.f64()?, largest: r.f64()? }))
        .collect::<Result<Vec<_>, FormatError>>()?;
    let k = singular_values.len();
    if u.cols != k || vt.rows != k || vt.cols != Level::L4.profile_length() || coefficients.len() != k || rank == 0 || rank > k {
        return Err(invalid("inconsistent SVD model dimensions"));
    }
    Ok(SvdModel { load_class, u, singular_values, vt, coefficients, rank, warnings })
}

fn seam_bytes(f: &SeamFilter<f64>) -> Vec<u8> {
    let mut w = Writer::default();
    f.beta().iter().for_each(|&b| w.f64(b));
    w.0
}

fn read_seam(r: &mut Reader) -> Result<SeamFilter<f64>, FormatError> {
    let mut beta = [0.0; 5];
    for b in &mut beta {
        *b = r.f64()?;
    }
    SeamFilter::new(beta).map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seam_section_layout() {
        let f = SeamFilter::new([0.125, 0.125, 0.5, 0.125, 0.125]).unwrap();
        let b = seam_bytes(&f);
        assert_eq!(b.len(), 40);
        assert_eq!(&b[..8], &[0, 0, 0, 0, 0, 0, 0xC0, 0x3F]);
        assert_eq!(&b[16..24], &[0, 0, 0, 0, 0, 0, 0xE0, 0x3F]);
        assert_eq!(read_section(&b, read_seam).unwrap(), f);
        assert_eq!(read_section(&b[..39], read_seam), Err(FormatError::Truncated));
    }

    #[test]
    fn reader_rejects_oversized_counts() {
        let mut w = Writer::default();
        w.u64(u64::MAX);
        assert_eq!(Reader::new(&w.0).f64s(), Err(FormatError::Truncated));
    }
}
