use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use loadsynth::toydata::ToyFleetConfig;
use loadsynth_cli::output::read_csv;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_loadsynth"));
    c.env_remove("LOADSYNTH_BUNDLE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A four-load fleet small enough to simulate and train in seconds.
fn small_fleet() -> ToyFleetConfig {
    let mut f = ToyFleetConfig::desk_default(3);
    f.loads = vec![f.loads[0].clone(), f.loads[1].clone(), f.loads[6].clone(), f.loads[7].clone()];
    f.l1_windows_per_load = 12;
    f.l1_windows_per_span = 6;
    f.l2_profiles_per_load = 16;
    f
}

const TRAIN_FLAGS: [&str; 10] =
    ["--epochs-l1", "1", "--epochs-l2", "1", "--epochs-l3", "1", "--batch-size", "4", "--noise-dim", "8"];

fn train(data: &Path, bundle: &Path) -> Output {
    let mut args = vec!["train", "--quiet", "--data", data.to_str().unwrap(), "--output", bundle.to_str().unwrap()];
    args.extend(TRAIN_FLAGS);
    run(&args)
}

struct Fixture {
    dir: PathBuf,
    data: PathBuf,
    bundle: PathBuf,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-fixture");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let fleet = dir.join("fleet.toml");
        std::fs::write(&fleet, small_fleet().to_toml()).unwrap();
        let data = dir.join("data");
        let o = run(&["simulate", "--fleet", fleet.to_str().unwrap(), "--output", data.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let bundle = dir.join("models.bundle");
        let o = train(&data, &bundle);
        assert!(o.status.success(), "{}", stderr(&o));
        Fixture { dir, data, bundle }
    })
}

fn generate(extra: &[&str], out: &Path) -> Output {
    let f = fixture();
    let mut args = vec!["generate", "--bundle", f.bundle.to_str().unwrap(), "--output", out.to_str().unwrap()];
    args.extend(extra);
    run(&args)
}

fn tmp(name: &str) -> PathBuf {
    fixture().dir.join(name)
}

#[test]
fn ten_minute_day_has_144_rows_and_accurate_estimate() {
    let out = tmp("day.csv");
    let o = generate(&["--residential", "1", "--industrial", "0", "--resolution", "1/10min", "--length", "1d", "--season", "winter"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let (stamps, cols) = read_csv(&text).unwrap();
    assert_eq!(text.lines().next(), Some("timestamp,load_1"));
    assert_eq!(stamps.len(), 144);
    assert_eq!(cols.len(), 1);
    assert!(stamps[1].ends_with(":10:00"), "{}", stamps[1]);
    let estimate: f64 = stderr(&o)
        .split("estimated file size: ")
        .nth(1)
        .and_then(|s| s.split(' ').next())
        .and_then(|s| s.parse().ok())
        .unwrap();
    let actual = text.len() as f64;
    assert!((estimate - actual).abs() <= 0.15 * actual, "estimate {estimate} vs {actual}");
}

#[test]
fn full_year_overrides_season_with_warning() {
    let out = tmp("year.csv");
    let o = generate(&["--resolution", "1/wk", "--length", "1yr", "--season", "summer", "--industrial", "2"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("overridden"));
    let (stamps, cols) = read_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((stamps.len(), cols.len()), (52, 3));
    assert_eq!(stamps[0], "2021-01-01T00:00:00");
}

#[test]
fn long_explicit_season_is_rejected() {
    let o = generate(&["--length", "20wk", "--season", "fall"], &tmp("never.csv"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn too_fine_resolution_exits_2() {
    let o = generate(&["--resolution", "60/s", "--length", "1h"], &tmp("never.csv"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("too fine"), "{}", stderr(&o));
}

#[test]
fn bad_bundle_exits_3() {
    let out = tmp("never.csv");
    let o = run(&["generate", "--bundle", "/nonexistent/x.bundle", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let junk = tmp("junk.bundle");
    std::fs::write(&junk, b"LSYNMODL\x63\x00\x00\x00").unwrap();
    let o = run(&["generate", "--bundle", junk.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("version"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_exits_2() {
    assert_eq!(run(&["generate", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn csv_round_trips_at_printed_precision() {
    let out = tmp("rt.csv");
    let o = generate(&["--resolution", "1/h", "--length", "2d", "--industrial", "1", "--base-mw", "250", "--seed", "4"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, cols) = read_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(cols.len(), 2);
    assert_eq!(cols[0].len(), 48);
    // Values are positive and carry six significant digits.
    for v in cols.iter().flatten() {
        assert!(*v > 0.0);
        let digits = format!("{}", v).chars().filter(|c| c.is_ascii_digit()).count();
        assert!(digits <= 7, "{v}");
    }
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let cfg = tmp("gen.toml");
    let f = fixture();
    std::fs::write(
        &cfg,
        format!("bundle = {:?}\nresolution = \"1/h\"\nlength = \"1d\"\nindustrial = 2\nseed = 9\n", f.bundle.to_str().unwrap()),
    )
    .unwrap();
    let out = tmp("cfg.csv");
    let o = run(&["generate", "--config", cfg.to_str().unwrap(), "--length", "2d", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (stamps, cols) = read_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((stamps.len(), cols.len()), (48, 3));
    std::fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    let o = run(&["generate", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bundle_path_from_environment() {
    let out = tmp("env.csv");
    let o = bin()
        .env("LOADSYNTH_BUNDLE", &fixture().bundle)
        .args(["generate", "--length", "1d", "--output", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn estimate_only_prints_bytes() {
    let o = run(&["generate", "--estimate-only", "--resolution", "1/10min", "--length", "1d"]);
    assert!(o.status.success());
    let n: u64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert_eq!(n, 17 + 144 * 28);
}

#[test]
fn generation_is_deterministic() {
    let (a, b) = (tmp("det_a.csv"), tmp("det_b.csv"));
    let flags = ["--resolution", "1/min", "--length", "3h", "--residential", "2", "--seed", "11"];
    assert!(generate(&flags, &a).status.success());
    assert!(generate(&flags, &b).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn retraining_reproduces_the_bundle() {
    let f = fixture();
    let again = tmp("again.bundle");
    let o = train(&f.data, &again);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(&f.bundle).unwrap());
    let log = std::fs::read_to_string(tmp("again.bundle.train.csv")).unwrap();
    assert!(log.starts_with("level,epoch,d_loss,g_loss,wasserstein\n1,1,"));
}

#[test]
fn training_without_level_3_exits_3() {
    let f = fixture();
    let partial = tmp("partial");
    std::fs::create_dir_all(&partial).unwrap();
    for n in [1, 2, 4] {
        std::fs::copy(f.data.join(format!("level{n}.csv")), partial.join(format!("level{n}.csv"))).unwrap();
    }
    let o = train(&partial, &tmp("partial.bundle"));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("level 3"), "{}", stderr(&o));
}

#[test]
fn validate_writes_reports() {
    let f = fixture();
    let out = tmp("report");
    let o = run(&[
        "validate",
        "--data",
        f.data.to_str().unwrap(),
        "--bundle",
        f.bundle.to_str().unwrap(),
        "--reference",
        f.data.to_str().unwrap(),
        "--samples",
        "20",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    for needle in ["wasserstein,level1,", "log_psd_gap_db,level1,", "seam_mean_pct,level2 real,", "forecast_mape_pct,train generated test real,"] {
        assert!(csv.contains(needle), "missing {needle} in\n{csv}");
    }
    assert!(out.join("psd_level1_real.csv").exists());
}

#[test]
fn ingest_phasor_csv() {
    // Two minutes of a single line drawing 100 MW at unity power factor.
    let mut text = String::from("timestamp,line_id,v_mag,v_ang,i_mag,i_ang\n");
    for k in 0..3600 {
        let t = k as f64 / 30.0;
        let i = 0.5 * (1.0 + 0.01 * ((k % 7) as f64 - 3.0));
        text.push_str(&format!("{t},a,100,0,{i},0\n{t},b,100,0.1,{i},0.1\n"));
    }
    let input = tmp("phasor.csv");
    std::fs::write(&input, text).unwrap();
    let out = tmp("ingested");
    let _ = std::fs::remove_dir_all(&out);
    let o = run(&["ingest", "--input", input.to_str().unwrap(), "--class", "industrial", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ds: loadsynth::LevelDatasets = loadsynth::ingest::read_level_dir(&out).unwrap();
    assert_eq!(ds.l1.len(), 4);
    assert!((ds.l1[0].scale - 100.0).abs() < 1.0);
    assert!(ds.l2.is_empty());
    assert!(stderr(&o).contains("warning"));
}
