use dd_isac::sweep::{
    read_records_file, run_sweep, run_sweep_to_dir, Axis, SweepConfig, SweepGridSpec, MANIFEST_JSON, SWEEP_CSV,
};
use dd_isac::{Error, GridSpec};
use std::fs;

fn small_config() -> SweepConfig {
    SweepConfig {
        grid: SweepGridSpec {
            gamma: Axis::log(0.5, 2.0, 3),
            alpha_c: Axis::linear(0.0, 10.0, 2),
            beta_c: Axis::linear(-2.0, 2.0, 2),
            snr_db: vec![0.0, 10.0],
        },
        comm_grid: GridSpec::new(4, 4, 1.12e-3, 28e3).unwrap(),
        sensing_grid: GridSpec::new(16, 16, 1.12e-3, 28e3).unwrap(),
        realizations: 4,
        ..Default::default()
    }
}

#[test]
fn directory_run_matches_in_memory_run() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();
    let run = run_sweep_to_dir(&cfg, dir.path()).unwrap();
    assert_eq!(run.manifest.records, 24);
    assert_eq!(run.manifest.failed_records, 0);
    assert!(dir.path().join(MANIFEST_JSON).exists());

    let on_disk = read_records_file(&dir.path().join(SWEEP_CSV)).unwrap();
    let direct = run_sweep(&cfg).unwrap();
    assert_eq!(on_disk.len(), direct.len());
    for (a, b) in on_disk.iter().zip(&direct) {
        assert_eq!(a.params(), b.params());
        assert_eq!(a.snr_db, b.snr_db);
        assert!((a.capacity_mean - b.capacity_mean).abs() <= 1e-12 * b.capacity_mean.abs());
        assert!((a.crlb_tau_s2 - b.crlb_tau_s2).abs() <= 1e-12 * b.crlb_tau_s2);
    }
}

#[test]
fn shards_are_reused_and_guarded() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();
    let first = run_sweep_to_dir(&cfg, dir.path()).unwrap();
    fs::remove_file(dir.path().join("shards").join("gamma_002.csv")).unwrap();
    let again = run_sweep_to_dir(&cfg, dir.path()).unwrap();
    assert_eq!(again.manifest.shards_reused, 2);
    assert_eq!(fs::read(dir.path().join(SWEEP_CSV)).unwrap(), {
        let other = tempfile::tempdir().unwrap();
        run_sweep_to_dir(&cfg, other.path()).unwrap();
        fs::read(other.path().join(SWEEP_CSV)).unwrap()
    });
    assert_eq!(first.records.len(), again.records.len());

    let changed = SweepConfig { seed: cfg.seed + 1, ..cfg };
    assert!(matches!(run_sweep_to_dir(&changed, dir.path()), Err(Error::Config(_))));
}

#[test]
fn corrupt_shard_header_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "gamma,alpha\n1,2\n").unwrap();
    assert!(read_records_file(&path).is_err());
}
