use piezobrill::config::{load_config, CONFIG_DIR_ENV};
use piezobrill::format::spectrum_from_csv;
use piezobrill_core::couplings::{cooperativities, Rates};
use piezobrill_core::materials::MaterialRegistry;
use piezobrill_core::spectrum::SpectrumKind;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_piezobrill"));
    c.env_remove(CONFIG_DIR_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn couple_matches_library_output() {
    let v = json(&run(&["couple", "--config", "quartz_experiment", "--json"]));
    let cfg = load_config(Some("quartz_experiment"), false).unwrap();
    let params = cfg.document.system_params(&MaterialRegistry::builtin()).unwrap();
    let (g_om, g_em, g_eo) = cfg.document.overrides();
    let rates = Rates::compute(&params).unwrap().with_overrides(g_om, g_em, g_eo);
    let c = cooperativities(&params, &rates).unwrap();
    assert_eq!(v["c_om"].as_f64().unwrap(), c.c_om);
    assert_eq!(v["c_em"].as_f64().unwrap(), c.c_em);
    assert_eq!(v["c_eo"].as_f64().unwrap(), c.c_eo);
    assert!(rel(c.c_om, 1.48) < 0.03 && rel(c.c_em, 5.6e-8) < 0.03);
}

#[test]
fn shipped_config_values() {
    let q = load_config(Some("quartz_experiment"), false).unwrap().document;
    assert_eq!((q.optical.kappa_hz, q.microwave.kappa_hz, q.acoustic.linewidth_hz), (2.2e6, 17.1e6, 500e3));
    let c = load_config(Some("caf2_experiment"), false).unwrap().document;
    assert_eq!(c.acoustic.frequency_hz, 13.354e9);
    assert_eq!(c.acoustic.linewidth_hz, 535e3);
    assert_eq!((c.microwave.kappa_hz, c.microwave.kappa_c_hz), (22.4e6, 10.9e6));
}

#[test]
fn spectrum_csv_shape() {
    let o = run(&["spectrum", "moc", "--config", "quartz_experiment", "--grid", "11.30e9:11.45e9:4001"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "freq_hz,re,im,power");
    assert_eq!(data.len(), 4002);
    let s = spectrum_from_csv(&text, None).unwrap();
    assert_eq!(s.kind, SpectrumKind::Moc);
    assert_eq!(s.freq_hz()[4000], 11.45e9);
}

#[test]
fn db_column_and_json_output() {
    let o = run(&["spectrum", "om", "--grid", "11.36e9:11.37e9:11", "--db"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "freq_hz,re,im,power,power_db"));
    let v = json(&run(&["spectrum", "om", "--grid", "11.36e9:11.37e9:11", "--db", "--json"]));
    assert_eq!(v["power_db"].as_array().unwrap().len(), 11);
    assert_eq!(v["kind"], "om");
}

#[test]
fn outputs_are_byte_identical_and_metadata_is_separate() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["spectrum", "omit", "--config", "quartz_experiment", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(side["config"], "quartz_experiment");
    assert_eq!(side["provenance"]["optical.kappa_hz"], "given");
    assert_eq!(side["provenance"]["geometry.acoustic_area_m2"], "defaulted");
}

fn write_spectrum(dir: &Path, name: &str, config: &str) -> String {
    let p = dir.join(name);
    let o = run(&["spectrum", "omit", "--config", config, "--out", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p.to_str().unwrap().to_string()
}

#[test]
fn fit_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_spectrum(dir.path(), "omit.csv", "quartz_experiment");
    let v = json(&run(&[
        "fit", "omit", "--config", "quartz_experiment", "--data", &data, "--free", "g_om,Gamma", "--init",
        "g_om=550e3,Gamma=600e3",
    ]));
    assert_eq!(v["converged"], true);
    let params = v["params"].as_array().unwrap();
    assert_eq!(params[0]["name"], "g_om");
    assert_eq!(params[0]["unit"], "Hz");
    assert!(rel(params[0]["value"].as_f64().unwrap(), 643e3) < 1e-6, "{}", params[0]);
    assert!(rel(params[1]["value"].as_f64().unwrap(), 500e3) < 1e-6, "{}", params[1]);
}

#[test]
fn fit_power_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, scale) in [0.5f64, 1.0, 2.0].iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.toml"));
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/quartz_experiment.toml"))
            .unwrap()
            .replace("g_om_hz = 643e3", &format!("g_om_hz = {}", 643e3 * scale.sqrt()));
        std::fs::write(&cfg, text).unwrap();
        files.push(write_spectrum(dir.path(), &format!("s{i}.csv"), cfg.to_str().unwrap()));
    }
    let mut args = vec!["fit", "omit", "--config", "quartz_experiment", "--free", "g_om,Gamma", "--pump-w", "0.0119,0.0238,0.0476"];
    for f in &files {
        args.extend(["--data", f.as_str()]);
    }
    let v = json(&run(&args));
    assert!(v["r_squared"].as_f64().unwrap() > 0.999);
    assert!(rel(v["slope_per_w"].as_f64().unwrap(), 1.5034509090909092 / 0.0238) < 1e-4);
}

#[test]
fn exit_codes() {
    let o = run(&["bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["spectrum", "moc", "--grid", "2:1:5"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lossless.toml");
    std::fs::write(&cfg, "[acoustic]\nlinewidth_hz = 0.0\n").unwrap();
    assert_eq!(run(&["couple", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn strict_and_lax_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, "[acoustic]\nlinewdith_hz = 4e5\n").unwrap();
    let o = run(&["couple", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("acoustic.linewdith_hz"));
    let o = run(&["couple", "--config", cfg.to_str().unwrap(), "--lax"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn config_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("quartz_experiment.toml"), "[acoustic]\nlinewidth_hz = 1e6\n").unwrap();
    let o = bin().env(CONFIG_DIR_ENV, dir.path()).args(["couple", "--config", "quartz_experiment", "--json"]).output().unwrap();
    let v = json(&o);
    let base = json(&run(&["couple", "--json"]));
    assert!(rel(v["c_om"].as_f64().unwrap(), base["c_om"].as_f64().unwrap() / 2.0) < 1e-12);
}

#[test]
fn materials_file_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.dat");
    std::fs::write(&m, "[sapphire]\nn = 1.75\nrho = 3980\nc33 = 497e9\nd33 = 0\np13 = 0.2\nr13 = 0\neps_r = 9.4\n").unwrap();
    let v = json(&run(&["materials", "--materials", m.to_str().unwrap(), "--json"]));
    assert_eq!(v["sapphire.refractive_index"], 1.75);
    assert_eq!(v["quartz_xcut.refractive_index"], 1.528);
}

#[test]
fn design_full_selection() {
    let all = "coupling_efficiencies,linbo3,acoustic_geometry,reentrant_cavity,superconducting_cavity,planoconvex_hbar";
    let v = json(&run(&["design", "project", "--select", all, "--json"]));
    assert!(rel(v["g_em_hz"].as_f64().unwrap(), 68e3) < 0.05);
    assert!(rel(v["c_em"].as_f64().unwrap(), 224.0) < 0.05);
    let o = run(&["design", "project", "--select", "linbo3,nonsense"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sense_and_fsr_reports() {
    let v = json(&run(&["sense", "--config", "caf2_experiment", "--nm", "1.2", "--pmu-dbm", "20", "--json"]));
    assert_eq!(v["convention"], "rms_pair");
    assert!(rel(v["thermal_effective_occupancy"].as_f64().unwrap(), 9.42) < 0.03);
    let narrow = json(&run(&["sense", "--config", "caf2_experiment", "--bandwidth-hz", "100", "--json"]));
    let ratio = narrow["floor_d33_bulk_m_per_v"].as_f64().unwrap() / v["floor_d33_bulk_m_per_v"].as_f64().unwrap();
    assert!(rel(ratio, 0.1f64.sqrt()) < 1e-9);
    let o = run(&["fsr"]);
    let text = stdout(&o);
    assert!(text.starts_with("wavelength_nm,spacing_ghz\n"));
    assert!(text.lines().count() > 10);
}
