//! Small trained model set shared by integration tests.

use std::sync::OnceLock;

use loadsynth::compose::{learn_seam_filter, Models};
use loadsynth::neural::{train_cgan, train_gan, ConditionLabel, TrainConfig};
use loadsynth::rng;
use loadsynth::svdgen::fit_svd_model;
use loadsynth::{Level, LoadClass, LoadProfile, Normalization, Season};
use rand::Rng;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn mean_one(len: usize, period: f64, class: LoadClass, season: Option<Season>, f: impl Fn(usize) -> f64) -> LoadProfile<f64> {
    let raw: Vec<f64> = (0..len).map(f).collect();
    let m = mean(&raw);
    LoadProfile::new(raw.iter().map(|v| v / m).collect(), period, class, season, Normalization::MeanOne).unwrap()
}

/// Models trained for one epoch on small synthetic datasets; enough to
/// exercise every code path of the pipeline.
pub fn models() -> &'static Models<f64> {
    static MODELS: OnceLock<Models<f64>> = OnceLock::new();
    MODELS.get_or_init(|| {
        let mut r = rng::rng(5);
        let cfg = TrainConfig { epochs: 1, batch_size: 4, noise_dim: 8, trace_every: 0, ..TrainConfig::default() };
        let res = LoadClass::MainlyResidential;
        let l1: Vec<_> = (0..16)
            .map(|_| {
                let noise: Vec<f64> = (0..900).map(|_| 0.01 * r.random::<f64>()).collect();
                mean_one(900, 1.0 / 30.0, res, None, |i| 1.0 + noise[i])
            })
            .collect();
        let l2: Vec<_> = (0..16)
            .map(|_| {
                let x: Vec<f64> = (0..120).map(|_| 0.02 * (r.random::<f64>() - 0.5)).collect();
                let m = mean(&x);
                LoadProfile::new(x.iter().map(|v| v - m).collect(), 30.0, res, None, Normalization::ZeroMeanDetrended).unwrap()
            })
            .collect();
        let mut l3 = Vec::new();
        for label in ConditionLabel::all() {
            for k in 0..4 {
                let phase = k as f64 * 0.1 + label.season.index() as f64;
                l3.push(mean_one(168, 3600.0, label.load_class, Some(label.season), |h| {
                    1.0 + 0.3 * ((h as f64 / 24.0) * std::f64::consts::TAU + phase).sin()
                }));
            }
        }
        let years = |class: LoadClass| -> Vec<LoadProfile<f64>> {
            (0..3)
                .map(|k| {
                    mean_one(52, 604_800.0, class, None, |w| 1.0 + 0.1 * (w as f64 / 52.0 * std::f64::consts::TAU + k as f64).cos())
                })
                .collect()
        };
        Models {
            l1: train_gan(&l1, Level::L1, &cfg, 1).unwrap(),
            l2: train_gan(&l2, Level::L2, &cfg, 2).unwrap(),
            l3: train_cgan(&l3, Level::L3, &cfg, 3).unwrap(),
            l4_residential: fit_svd_model(&years(LoadClass::MainlyResidential), LoadClass::MainlyResidential, None).unwrap(),
            l4_industrial: fit_svd_model(&years(LoadClass::MainlyIndustrial), LoadClass::MainlyIndustrial, None).unwrap(),
            seam: learn_seam_filter(&l3).unwrap(),
        }
    })
}

