mod common;

use common::mean;
use loadsynth::ingest::{compute_bus_load, extract_level_datasets, read_level_dir, read_phasor_csv, write_level_dir};
use loadsynth::neural::{train_gan, TrainConfig};
use loadsynth::svdgen::{fit_svd_model, MIN_GENERATED_VALUE};
use loadsynth::toydata::{simulate_ground_truth, ToyLoadConfig};
use loadsynth::validate::{wasserstein_exact, wasserstein_histogram};
use loadsynth::{Level, LoadClass, Normalization};

fn six_hours() -> Vec<f64> {
    simulate_ground_truth(&ToyLoadConfig::industrial(80.0, 3), 6.0 * 3600.0).unwrap()
}

#[test]
fn ground_truth_splits_into_levels() {
    let x = six_hours();
    assert_eq!(x.len(), 6 * 3600 * 30);
    let ds = extract_level_datasets(&x, 0.0, LoadClass::MainlyIndustrial).unwrap();
    assert_eq!(ds.l1.len(), 720);
    // A detrended hour needs two full hours on either side.
    assert_eq!(ds.l2.len(), 2);
    assert!(ds.l3.is_empty() && ds.l4.is_empty());
    assert!(ds.is_short(Level::L3) && ds.is_short(Level::L4) && !ds.is_short(Level::L1));
    for (k, p) in ds.l1.iter().enumerate() {
        assert_eq!(p.profile.normalization, Normalization::MeanOne);
        assert!((mean(&p.profile.samples) - 1.0).abs() < 1e-12);
        let raw = mean(&x[k * 900..(k + 1) * 900]);
        assert!((p.scale - raw).abs() < 1e-9 * raw);
        assert_eq!(p.start_s, k as f64 * 30.0);
    }
    for p in &ds.l2 {
        assert!(mean(&p.profile.samples).abs() < 1e-12);
        assert!(p.trend.is_some());
    }
    assert_eq!(ds.l2[0].start_s, 2.0 * 3600.0);
}

#[test]
fn level_directory_round_trips_exactly() {
    let ds = extract_level_datasets(&six_hours(), 0.0, LoadClass::MainlyIndustrial).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_level_dir(dir.path(), &ds).unwrap();
    let back = read_level_dir::<f64>(dir.path()).unwrap();
    assert_eq!(back.l1, ds.l1);
    assert_eq!(back.l2, ds.l2);
    std::fs::remove_file(dir.path().join("level3.csv")).unwrap();
    let err = read_level_dir::<f64>(dir.path()).unwrap_err();
    assert!(err.to_string().contains("level 3"), "{err}");
}

#[test]
fn phasor_file_to_bus_load() {
    let text = "timestamp,line_id,v_mag,v_ang,i_mag,i_ang\n\
                0,a,10,0,2,0\n\
                0,b,10,0.5,1,0.5\n\
                0.0333333,a,10,0,2,3.141592653589793\n\
                0.0333333,b,10,0.5,1,0.5\n";
    let records = read_phasor_csv(text.as_bytes()).unwrap();
    assert_eq!(records.len(), 2);
    let p = compute_bus_load(&records).unwrap();
    assert!((p[0] - 30.0).abs() < 1e-12);
    assert!((p[1] + 10.0).abs() < 1e-12);
    let gap = "timestamp,line_id,v_mag,v_ang,i_mag,i_ang\n0,a,1,0,1,0\n0.1,a,1,0,1,0\n";
    assert!(compute_bus_load(&read_phasor_csv(gap.as_bytes()).unwrap()).is_err());
    let missing = "timestamp,line_id,v_mag,v_ang,i_mag,i_ang\n0,a,1,0,1,0\n0,b,1,0,,\n";
    assert!(compute_bus_load(&read_phasor_csv(missing.as_bytes()).unwrap()).is_err());
}

#[test]
fn gan_training_is_reproducible() {
    let m = common::models();
    let cfg = TrainConfig { epochs: 1, batch_size: 4, noise_dim: 8, trace_every: 1, trace_subset: 8, ..TrainConfig::default() };
    let data: Vec<_> = (0..16)
        .map(|k| common::mean_one(168, 3600.0, LoadClass::MainlyResidential, None, |h| 2.0 + ((h + k) as f64 / 24.0).sin()))
        .collect();
    let a = train_gan(&data, Level::L3, &cfg, 9).unwrap();
    let b = train_gan(&data, Level::L3, &cfg, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.log.epochs[0].wasserstein.is_some());
    let out = m.l1.generate(3, 4).unwrap();
    assert_eq!(out, m.l1.generate(3, 4).unwrap());
    for p in &out {
        assert_eq!(p.len(), 900);
        assert!((mean(&p.samples) - 1.0).abs() < 1e-9);
    }
    let l2 = m.l2.generate(2, 1).unwrap();
    assert!(l2.iter().all(|p| p.len() == 120 && mean(&p.samples).abs() < 1e-12));
}

#[test]
fn svd_generation_is_floored_and_mean_one() {
    let years: Vec<_> = (0..6)
        .map(|k| common::mean_one(52, 604_800.0, LoadClass::MainlyIndustrial, None, |w| 1.0 + 0.3 * ((w * (k + 1)) as f64 / 52.0 * 6.3).cos()))
        .collect();
    let model = fit_svd_model(&years, LoadClass::MainlyIndustrial, Some(3)).unwrap();
    let out = model.generate(50, 2);
    assert_eq!(out, model.generate(50, 2));
    for p in &out {
        assert_eq!(p.len(), 52);
        assert!((mean(&p.samples) - 1.0).abs() < 1e-12);
        assert!(p.samples.iter().all(|&v| v > 0.0 && v >= MIN_GENERATED_VALUE * 0.5));
    }
}

#[test]
fn wasserstein_methods_agree() {
    let m = common::models();
    let a: Vec<f64> = m.l1.generate(4, 1).unwrap().into_iter().flat_map(|p| p.samples).collect();
    let b: Vec<f64> = m.l1.generate(4, 2).unwrap().into_iter().flat_map(|p| p.samples).collect();
    let exact = wasserstein_exact(&a, &b);
    let hist = wasserstein_histogram(&a, &b, 4096).unwrap();
    assert!((exact - hist).abs() < 0.05 * exact.max(1e-6), "{exact} vs {hist}");
    assert_eq!(wasserstein_exact(&a, &a), 0.0);
}
