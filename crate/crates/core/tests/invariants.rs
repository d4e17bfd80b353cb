use wavegrid::codec::Codec;
use wavegrid::pipeline::{run, RunOptions, SimConfig, Simulation};
use wavegrid::solver::{fv_step, GodunovSwe};
use wavegrid::threshold::{ThresholdMode, ThresholdSpec};
use wavegrid::Field;

fn plain(mut cfg: SimConfig) -> SimConfig {
    cfg.compression.enabled = false;
    cfg.threads = Some(2);
    cfg
}

fn lossy(mut cfg: SimConfig, levels: u32, c: f64, codec: Codec) -> SimConfig {
    cfg.compression.enabled = true;
    cfg.compression.levels = levels;
    cfg.compression.threshold = ThresholdSpec::new(ThresholdMode::Capped, c).unwrap();
    cfg.compression.codec = codec;
    cfg.threads = Some(2);
    cfg
}

#[test]
fn transport_conserves_without_compression() {
    let mut cfg = plain(SimConfig::transport());
    cfg.nx = 65;
    let mut sim = Simulation::new(cfg).unwrap();
    let m0 = sim.global_masses()[0];
    while !sim.is_finished() {
        sim.advance().unwrap();
        let m = sim.global_masses()[0];
        assert!((m - m0).abs() <= 1e-11 * m0.abs(), "{m} vs {m0}");
    }
}

#[test]
fn swe_conserves_every_component_without_compression() {
    let mut cfg = plain(SimConfig::swe());
    cfg.nx = 65;
    cfg.t_end = 0.3;
    let mut sim = Simulation::new(cfg).unwrap();
    let m0 = sim.global_masses();
    let scale = m0[0].abs();
    while !sim.is_finished() {
        let row = sim.advance().unwrap();
        assert!(row.min > 0.0, "depth {} at t={}", row.min, row.time);
    }
    for (a, b) in sim.global_masses().iter().zip(&m0) {
        assert!((a - b).abs() <= 1e-11 * scale, "{a} vs {b}");
    }
}

#[test]
fn transport_error_halves_under_refinement() {
    let error = |nx| {
        let mut cfg = plain(SimConfig::transport());
        cfg.nx = nx;
        let r = run(&cfg, &RunOptions::default()).unwrap();
        r.metrics.final_l2_error().unwrap()
    };
    let (coarse, fine) = (error(65), error(129));
    assert!(coarse / fine >= 1.7, "{coarse} / {fine} = {}", coarse / fine);
}

#[test]
fn upwind_transport_stays_in_initial_range() {
    let mut cfg = plain(SimConfig::transport());
    cfg.nx = 65;
    let mut sim = Simulation::new(cfg).unwrap();
    let f = &sim.fields().unwrap()[0];
    let lo = f.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    while !sim.is_finished() {
        let row = sim.advance().unwrap();
        assert!(row.min >= lo - 1e-12 && row.max <= hi + 1e-12, "[{}, {}] at t={}", row.min, row.max, row.time);
    }
}

#[test]
fn lake_at_rest_is_a_fixed_point() {
    let dims = [7, 9];
    let mut w = vec![Field::filled(&dims, 1.3).unwrap(), Field::zeros(&dims).unwrap(), Field::zeros(&dims).unwrap()];
    for _ in 0..10 {
        fv_step(&mut w, &GodunovSwe::default(), 0.01, 0.1).unwrap();
    }
    for v in w[0].data() {
        assert!((v - 1.3).abs() <= 1e-12);
    }
    for f in &w[1..] {
        assert!(f.data().iter().all(|v| v.abs() <= 1e-12));
    }
}

#[test]
fn zero_threshold_tracks_the_uncompressed_run_to_roundoff() {
    for codec in [Codec::Csr, Codec::Lz { chunk_size: 4096 }] {
        let mut base = SimConfig::swe();
        base.nx = 33;
        base.t_end = 0.05;
        let a = run(&plain(base.clone()), &RunOptions::default()).unwrap();
        let b = run(&lossy(base, 3, 0.0, codec), &RunOptions::default()).unwrap();
        for (x, y) in a.final_fields.iter().zip(&b.final_fields) {
            for (u, v) in x.data().iter().zip(y.data()) {
                assert!((u - v).abs() <= 1e-13 * (1.0 + u.abs()), "{codec:?}: {u} vs {v}");
            }
        }
    }
}

#[test]
fn lossy_cycles_conserve_mass() {
    for c in [0.0025, 0.04, 1e3] {
        let mut base = SimConfig::transport();
        base.nx = 65;
        base.t_end = 0.1;
        let mut sim = Simulation::new(lossy(base, 4, c, Codec::Csr)).unwrap();
        while !sim.is_finished() {
            let row = sim.advance().unwrap();
            assert!(row.cycle_mass_drift <= 1e-12, "c={c}: {}", row.cycle_mass_drift);
        }
    }
}

#[test]
fn larger_threshold_never_grows_csr_output() {
    let mut base = SimConfig::transport();
    base.nx = 65;
    base.t_end = 0.05;
    let mut last = usize::MAX;
    for c in [0.0, 0.0025, 0.005, 0.01, 0.02, 0.04] {
        let mut sim = Simulation::new(lossy(base.clone(), 4, c, Codec::Csr)).unwrap();
        let row = sim.advance().unwrap();
        assert!(row.compressed_bytes <= last, "c={c}: {} > {last}", row.compressed_bytes);
        last = row.compressed_bytes;
    }
}

#[test]
fn identical_configs_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = SimConfig::transport();
    base.nx = 33;
    base.t_end = 0.1;
    base.snapshot_times = vec![0.05];
    let cfg = lossy(base, 3, 0.01, Codec::Lz { chunk_size: 1024 });
    let mut outs = Vec::new();
    for name in ["a", "b"] {
        let opts = RunOptions {
            metrics_path: Some(dir.path().join(format!("{name}.csv"))),
            snapshot_dir: Some(dir.path().join(name)),
            snapshot_prefix: "s".into(),
            csv_snapshots: false,
        };
        let r = run(&cfg, &opts).unwrap();
        let csv = std::fs::read_to_string(opts.metrics_path.unwrap()).unwrap();
        let snap = std::fs::read(&r.snapshots[0]).unwrap();
        outs.push((csv, snap));
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn phase_times_fit_inside_the_wall_time() {
    let mut base = SimConfig::transport();
    base.nx = 65;
    base.t_end = 0.1;
    let r = run(&lossy(base, 4, 0.01, Codec::Csr), &RunOptions::default()).unwrap();
    assert!(r.metrics.phases.phase_sum() <= r.wall);
    assert!(r.metrics.phases.overhead().is_finite());
}
