use muskat_core::timestep::run;
use muskat_io::{load_config, load_snapshot, read_timeseries, save_snapshot, write_timeseries, Format, SnapshotMeta};

const CONFIG: &str = r#"
# short smooth run
n = 32
sigma = 0.5
g_rho = 2.0
dt = 0.02
t_end = 0.1
report_every = 1
n_alpha = 256
initial = "0.05*sin(x) + 0.01*cos(2x)"
"#;

#[test]
fn config_run_series_and_snapshot_survive_the_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, CONFIG).unwrap();
    let loaded = load_config(&cfg_path).unwrap();
    assert!(loaded.warnings.is_empty(), "{:?}", loaded.warnings);
    let cfg = loaded.config;
    assert_eq!(cfg.sim.grid.n_points(), 32);
    assert_eq!(cfg.sim.params.g_rho, 2.0);

    let f0 = cfg.initial.sample(&cfg.sim.grid, cfg.sim.seed).unwrap();
    let traj = run(&cfg.sim, &f0).unwrap();
    assert_eq!(traj.reports.len(), 6);

    for format in [Format::Csv, Format::Json] {
        let path = dir.path().join(format!("series.{}", format.extension()));
        write_timeseries(&traj, &path, format).unwrap();
        let back = read_timeseries(&path).unwrap();
        assert_eq!(back.len(), traj.reports.len());
        for (rec, rep) in back.iter().zip(&traj.reports) {
            assert_eq!(rec.time, rep.time);
            assert_eq!(rec.h32, rep.h32);
            assert_eq!(rec.smallness, rep.smallness, "{format}");
        }
    }

    let meta = SnapshotMeta { time: *traj.times.last().unwrap(), params: cfg.sim.params };
    let snap = dir.path().join("final.bin");
    save_snapshot(&traj.final_field, &meta, &snap).unwrap();
    let (f, m) = load_snapshot(&snap).unwrap();
    assert_eq!(m, meta);
    assert_eq!(f.values(), traj.final_field.values());
}

#[test]
fn missing_and_truncated_files_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_config(dir.path().join("absent.toml")).is_err());
    assert!(read_timeseries(dir.path().join("absent.csv")).is_err());

    let snap = dir.path().join("cut.bin");
    std::fs::write(&snap, b"MUSK").unwrap();
    assert!(load_snapshot(&snap).is_err());

    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, "n = 32\ndt = 0.1\nt_end = 1\nsigmaa = 1\n").unwrap();
    let loaded = load_config(&cfg).unwrap();
    assert!(loaded.warnings.iter().any(|w| w.contains("sigmaa")));

    std::fs::write(&cfg, "n = 32\ndt = 0.1\n").unwrap();
    match load_config(&cfg) {
        Err(e) => assert!(e.to_string().contains("t_end"), "{e}"),
        Ok(_) => panic!("t_end is required"),
    }
}
