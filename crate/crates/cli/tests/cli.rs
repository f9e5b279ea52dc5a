use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn chiral(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chiral"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CHIRAL_OUT_DIR")
        .output()
        .unwrap()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run_ok(cmd: &str, config: Option<&Path>, extra: &[&str], out: &Path) {
    let mut args = vec![cmd];
    let c;
    if let Some(p) = config {
        c = p.to_str().unwrap().to_string();
        args.push(&c);
    }
    args.extend_from_slice(extra);
    let o = chiral(&args, out);
    assert!(
        o.status.success(),
        "{cmd}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: PathBuf) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn toy_map_spans_half_to_one() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    run_ok("map", None, &[], &out);
    let s = json(out.join("map_summary.json"));
    assert_eq!(s["f_dir_max"], 1.0);
    assert_eq!(s["f_dir_min"], 0.5);
    assert_eq!(s["preferred_at_optimum"], "right");
    let rows = csv_rows(out.join("directionality_map.csv"));
    assert_eq!(rows.len(), 64);
    assert!(out.join("map_config.toml").exists());
}

#[test]
fn sigma_minus_mirrors_the_map() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "m.toml", "dipole = \"sigma_minus\"\n");
    let (plus, minus) = (tmp.path().join("p"), tmp.path().join("m"));
    run_ok("map", None, &[], &plus);
    run_ok("map", Some(&cfg), &[], &minus);
    let (p, m) = (
        json(plus.join("map_summary.json")),
        json(minus.join("map_summary.json")),
    );
    assert_eq!(m["preferred_at_optimum"], "left");
    assert_eq!(p["f_dir_mean"], m["f_dir_mean"]);
    let (rp, rm) = (
        p["right_preferred_points"].as_u64().unwrap(),
        m["right_preferred_points"].as_u64().unwrap(),
    );
    // nodes where the field is linear tie and count as right in both
    let ties = csv_rows(plus.join("directionality_map.csv"))
        .iter()
        .filter(|r| r[2] == 0.5)
        .count() as u64;
    assert_eq!(rp + rm, 64 + ties);
}

#[test]
fn design_point_reaches_098() {
    let tmp = TempDir::new().unwrap();
    // F_dir peaks at (1 + sin φ)/2 on the toy field
    let cfg = write_config(&tmp, "d.toml", &format!("toy_phase = {}\n", 0.96f64.asin()));
    let out = tmp.path().join("out");
    run_ok("map", Some(&cfg), &[], &out);
    let s = json(out.join("map_summary.json"));
    assert!((s["beta_dir_max"].as_f64().unwrap() - 0.98).abs() < 1e-12, "{s}");
}

#[test]
fn field_file_is_ingested() {
    let tmp = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let field = tmp.path().join("field.txt");
    fs::write(
        &field,
        format!("a=1\nfreq=0.26\nnx=2\nny=1\n0 0 {h} 0 0 {h}\n0.5 0 1 0 0 0\n"),
    )
    .unwrap();
    let cfg = write_config(
        &tmp,
        "f.toml",
        &format!("field_file = {:?}\n", field.to_str().unwrap()),
    );
    let out = tmp.path().join("out");
    run_ok("map", Some(&cfg), &[], &out);
    let rows = csv_rows(out.join("directionality_map.csv"));
    assert_eq!(rows, vec![vec![0.0, 0.0, 1.0, 1.0], vec![0.5, 0.0, 0.5, 0.5]]);
}

#[test]
fn malformed_field_file_exits_2_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let field = tmp.path().join("bad.txt");
    fs::write(&field, "a=1\nfreq=0.26\nnx=2\nny=1\n0 0 1 0 0 0\n").unwrap();
    let cfg = write_config(
        &tmp,
        "f.toml",
        &format!("field_file = {:?}\n", field.to_str().unwrap()),
    );
    let out = tmp.path().join("out");
    let o = chiral(&["map", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists() || files(&out).is_empty());
}

#[test]
fn config_errors_exit_3() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let unknown = write_config(&tmp, "u.toml", "beta = 0.9\n");
    let range = write_config(&tmp, "r.toml", "beta_dir = 0.4\n");
    let nested = write_config(&tmp, "n.toml", "[gate]\nbeta_dir = 0.9\n");
    for cfg in [&unknown, &range, &nested] {
        let o = chiral(&["gate", cfg.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let missing = tmp.path().join("nope.toml");
    assert_eq!(
        chiral(&["spectra", missing.to_str().unwrap()], &out)
            .status
            .code(),
        Some(3)
    );
    assert_eq!(chiral(&["frobnicate"], &out).status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn gate_sweep_column() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "g.toml", "sweep_betas = [1.0, 0.98]\n");
    let out = tmp.path().join("out");
    run_ok("gate", Some(&cfg), &[], &out);
    let rows = csv_rows(out.join("gate_sweep.csv"));
    assert!((rows[0][1] - 1.0).abs() < 1e-12);
    assert!((rows[1][1] - 0.9604).abs() < 1e-6);
    let r = json(out.join("gate_result.json"));
    assert_eq!(r["loss_weight"], 0.0);
    assert_eq!(r["branches"].as_array().unwrap().len(), 2);
    assert!(!r["transcript"].as_array().unwrap().is_empty());
    let resolved = fs::read_to_string(out.join("gate_config.toml")).unwrap();
    assert!(resolved.contains("sweep_betas = [1.0, 0.98]") && resolved.contains("eraser = \"enumerate\""));
}

#[test]
fn gate_flips_target_of_10() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "g.toml", "input_re = [0.0, 0.0, 1.0, 0.0]\n");
    let out = tmp.path().join("out");
    run_ok("gate", Some(&cfg), &[], &out);
    let r = json(out.join("gate_result.json"));
    for b in r["branches"].as_array().unwrap() {
        let p = &b["photons"][3];
        let weight = p[0].as_f64().unwrap().powi(2) + p[1].as_f64().unwrap().powi(2);
        assert!((weight - 1.0).abs() < 1e-12, "{b}");
    }
}

#[test]
fn gate_worst_input_at_098() {
    let tmp = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cfg = write_config(
        &tmp,
        "g.toml",
        &format!("beta_dir = 0.98\ninput_re = [{h}, -{h}, 0.0, 0.0]\n"),
    );
    let out = tmp.path().join("out");
    run_ok("gate", Some(&cfg), &[], &out);
    let r = json(out.join("gate_result.json"));
    assert!((r["fidelity_unheralded"].as_f64().unwrap() - 0.9216).abs() < 1e-12);
    assert!((r["closed_form_min"].as_f64().unwrap() - 0.9216).abs() < 1e-12);
}

#[test]
fn spectra_plateau_recovers_truth() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    run_ok("spectra", None, &[], &out);
    let s = json(out.join("spectra_summary.json"));
    assert!(
        (s["plateau_mean"].as_f64().unwrap() - 0.9).abs() < 0.02,
        "{}",
        s["plateau_mean"]
    );
    assert!((s["f_dir_low_field"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    let spectrum = fs::read_to_string(out.join("spectrum_004_left.csv")).unwrap();
    assert!(spectrum.starts_with("wavelength,counts\n"));
    let curve = fs::read_to_string(out.join("directionality_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 22);
}

#[test]
fn g2_single_emitter_is_flagged() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "g.toml", "pulses = 200000\nwrite_timestamps = true\n");
    let out = tmp.path().join("out");
    run_ok("g2", Some(&cfg), &[], &out);
    let r = json(out.join("g2_report.json"));
    assert_eq!(r["verdict"], "single-photon");
    assert!(r["g2_zero"].as_f64().unwrap() < 0.1);
    assert!((r["lifetime"]["rate"].as_f64().unwrap() - 0.8).abs() < 0.02);

    // the written timestamps give the same histogram when read back
    let (a, b) = (out.join("timestamps_a.txt"), out.join("timestamps_b.txt"));
    let files_cfg = write_config(
        &tmp,
        "f.toml",
        &format!(
            "source = \"files\"\ntimestamps_a = {:?}\ntimestamps_b = {:?}\n",
            a.to_str().unwrap(),
            b.to_str().unwrap()
        ),
    );
    let back = tmp.path().join("back");
    run_ok("g2", Some(&files_cfg), &[], &back);
    assert_eq!(
        fs::read(out.join("g2_histogram.csv")).unwrap(),
        fs::read(back.join("g2_histogram.csv")).unwrap()
    );
}

#[test]
fn g2_pair_is_uncorrelated() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "g.toml", "source = \"pair\"\npulses = 200000\n");
    let out = tmp.path().join("out");
    run_ok("g2", Some(&cfg), &[], &out);
    let r = json(out.join("g2_report.json"));
    assert!((r["g2_zero"].as_f64().unwrap() - 1.0).abs() < 0.1, "{r}");
    assert_eq!(r["verdict"], "not single-photon");
}

#[test]
fn bad_timestamps_exit_2() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.txt");
    fs::write(&a, "1.0\nnot-a-number\n").unwrap();
    let cfg = write_config(
        &tmp,
        "f.toml",
        &format!(
            "source = \"files\"\ntimestamps_a = {0:?}\ntimestamps_b = {0:?}\n",
            a.to_str().unwrap()
        ),
    );
    let out = tmp.path().join("out");
    assert_eq!(
        chiral(&["g2", cfg.to_str().unwrap()], &out).status.code(),
        Some(2)
    );
    assert!(!out.exists());
}

#[test]
fn half_coupled_emitter_blocks_on_resonance() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "s.toml", "beta_dir = 0.5\n");
    let out = tmp.path().join("out");
    run_ok("scatter", Some(&cfg), &[], &out);
    let text = fs::read_to_string(out.join("scatter.csv")).unwrap();
    assert!(text.starts_with("delta,re_t,im_t,re_r,im_r,loss\n"));
    let rows = csv_rows(out.join("scatter.csv"));
    let zero = rows.iter().find(|r| r[0] == 0.0).unwrap();
    assert_eq!((zero[1], zero[2]), (0.0, 0.0));
    for r in &rows {
        assert!((r[1] * r[1] + r[2] * r[2] + r[3] * r[3] + r[4] * r[4] + r[5] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn scatter_oracle_agrees() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "s.toml", "points = 21\noracle = true\n");
    let out = tmp.path().join("out");
    run_ok("scatter", Some(&cfg), &[], &out);
    let closed = csv_rows(out.join("scatter.csv"));
    let lattice = csv_rows(out.join("scatter_oracle.csv"));
    for (c, l) in closed.iter().zip(&lattice) {
        assert!((c[1] - l[1]).hypot(c[2] - l[2]) < 1e-3);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let spectra = write_config(&tmp, "s.toml", "b_points = 6\nb_max = 2.5\n");
    let g2 = write_config(&tmp, "g.toml", "pulses = 50000\n");
    let gate = write_config(
        &tmp,
        "q.toml",
        "beta_dir = 0.95\neraser = \"sample\"\nsweep_betas = [0.9, 0.95, 1.0]\n",
    );
    for (cmd, cfg) in [
        ("spectra", &spectra),
        ("g2", &g2),
        ("gate", &gate),
        ("map", &gate),
    ] {
        let cfg = if cmd == "map" { None } else { Some(cfg.as_path()) };
        let (a, b) = (
            tmp.path().join(format!("{cmd}_a")),
            tmp.path().join(format!("{cmd}_b")),
        );
        run_ok(cmd, cfg, &["--seed", "9", "--threads", "1"], &a);
        run_ok(cmd, cfg, &["--seed", "9", "--threads", "4"], &b);
        assert_eq!(files(&a), files(&b), "{cmd}");
    }
}

#[test]
fn seed_changes_noise_and_is_recorded() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "s.toml",
        "b_points = 3\nb_max = 2.0\nwrite_spectra = false\n",
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok("spectra", Some(&cfg), &["--seed", "1"], &a);
    run_ok("spectra", Some(&cfg), &["--seed", "2"], &b);
    assert_ne!(
        fs::read(a.join("directionality_curve.csv")).unwrap(),
        fs::read(b.join("directionality_curve.csv")).unwrap()
    );
    assert!(fs::read_to_string(b.join("spectra_config.toml"))
        .unwrap()
        .contains("seed = 2"));
}

#[test]
fn out_dir_defaults_to_env() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_chiral"))
        .arg("scatter")
        .env("CHIRAL_OUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("scatter.csv").exists());
}
