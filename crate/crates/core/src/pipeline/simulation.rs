use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::codec::{is_stored_zero, CompressedPatch, Payload};
use crate::field::Field;
use crate::patchgrid::{decompose, write_csv_grid, write_wgrd_file, PatchGrid};
use crate::solver::{cell_centre, cfl_dt, dam_break_initial, exact_transport, fv_step, l2_error, transport_initial};
use crate::solver::{Flux, GodunovSwe, Upwind};
use crate::threshold::apply_threshold;
use crate::wavelet::{forward_in_place, inverse_in_place, CoefficientSet, WaveletPlan};

use super::config::{Scheme, SimConfig};
use super::metrics::{PhaseTimes, RunMetrics, StepMetrics};
use super::PipelineError;

const STRICT_TOLERANCE: f64 = 1e-12;

/// A running experiment: the patch grid, its flux and the compression
/// cycle applied after every step.
pub struct Simulation {
    config: SimConfig,
    grid: PatchGrid,
    flux: Box<dyn Flux + Send>,
    plan: Option<WaveletPlan>,
    pool: rayon::ThreadPool,
    time: f64,
    step: usize,
    phases: PhaseTimes,
    keep_coefficients: bool,
    last_coefficients: Vec<Vec<CoefficientSet>>,
}

struct PatchCycle {
    coeffs: Vec<CoefficientSet>,
    zeroed: usize,
    nnz: usize,
    dense_bytes: usize,
    compressed_bytes: usize,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let dims = vec![config.nx; 2];
        let mut grid = decompose(&dims, &config.splits, config.scheme.components(), true)?;
        let plan = if config.compression.enabled {
            let plan = WaveletPlan::new(grid.patch_logical_dims(), config.compression.levels)?;
            if config.strict && !plan.is_mass_conserving() {
                return Err(PipelineError::Config(format!(
                    "{} levels leave fewer than 3 samples per patch axis, which does not conserve mass",
                    config.compression.levels
                )));
            }
            Some(plan)
        } else {
            None
        };
        let cells = config.cells();
        let centre = |g: &[usize]| (cell_centre(g[0] % cells, cells), cell_centre(g[1] % cells, cells));
        let flux: Box<dyn Flux + Send> = match config.scheme {
            Scheme::Transport => {
                grid.fill(0, |g| {
                    let (x, y) = centre(g);
                    transport_initial(x, y)
                })?;
                Box::new(Upwind {
                    alpha: config.alpha,
                    beta: config.beta,
                })
            }
            Scheme::Swe => {
                for k in 0..3 {
                    grid.fill(k, |g| {
                        let (x, y) = centre(g);
                        dam_break_initial(x, y)[k]
                    })?;
                }
                Box::new(GodunovSwe { g: config.g })
            }
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads.unwrap_or(0))
            .build()
            .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
        Ok(Self {
            config,
            grid,
            flux,
            plan,
            pool,
            time: 0.0,
            step: 0,
            phases: PhaseTimes::default(),
            keep_coefficients: false,
            last_coefficients: Vec::new(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn grid(&self) -> &PatchGrid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn phases(&self) -> &PhaseTimes {
        &self.phases
    }

    pub fn is_finished(&self) -> bool {
        self.time >= self.config.t_end
    }

    /// Assembled global fields, one per component.
    pub fn fields(&self) -> Result<Vec<Field>, PipelineError> {
        (0..self.grid.components())
            .map(|c| self.grid.assemble(c).map_err(Into::into))
            .collect()
    }

    /// Keeps the thresholded coefficients of the latest cycle for
    /// inspection through [`Simulation::last_coefficients`].
    pub fn keep_coefficients(&mut self, on: bool) {
        self.keep_coefficients = on;
        if !on {
            self.last_coefficients.clear();
        }
    }

    /// Per patch, per component coefficients encoded in the latest cycle.
    pub fn last_coefficients(&self) -> &[Vec<CoefficientSet>] {
        &self.last_coefficients
    }

    pub fn global_masses(&self) -> Vec<f64> {
        (0..self.grid.components()).map(|c| self.grid.global_mass(c)).collect()
    }

    fn stable_dt(&self) -> Result<f64, PipelineError> {
        let mut dt = f64::INFINITY;
        for p in self.grid.patches() {
            let logical: Vec<Field> = (0..p.components())
                .map(|c| Field::from_vec(p.logical_dims(), p.logical_values(c)))
                .collect::<Result<_, _>>()?;
            let refs: Vec<&Field> = logical.iter().collect();
            dt = dt.min(cfl_dt(&refs, self.flux.as_ref(), self.config.cfl, self.config.dx())?);
        }
        Ok(dt)
    }

    /// Advances by one step, stopping exactly at `t_end` and at any
    /// pending snapshot time.
    pub fn advance(&mut self) -> Result<StepMetrics, PipelineError> {
        if self.is_finished() {
            return Err(PipelineError::Config("simulation already reached t_end".into()));
        }
        let started = Instant::now();
        let mut dt = self.stable_dt()?;
        let mut target = self.config.t_end;
        for &t in &self.config.snapshot_times {
            if t > self.time && t < target {
                target = t;
            }
        }
        let landing = self.time + dt >= target;
        if landing {
            dt = target - self.time;
        }

        let phase = Instant::now();
        self.grid.sync_ghosts();
        let dx = self.config.dx();
        let flux = self.flux.as_ref();
        let grid = &mut self.grid;
        self.pool.install(|| {
            grid.patches_mut()
                .par_iter_mut()
                .try_for_each(|p| fv_step(p.fields_mut(), flux, dt, dx))
        })?;
        self.phases.step += phase.elapsed();
        self.time = if landing { target } else { self.time + dt };
        self.step += 1;

        let diag = Instant::now();
        let shared_discrepancy = self.grid.shared_discrepancy();
        let pre = self.global_masses();
        let scale: Vec<f64> = (0..pre.len()).map(|c| self.grid.global_abs_mass(c)).collect();
        let mut diag_time = diag.elapsed();
        let (dense_bytes, compressed_bytes, nnz, zeroed) = match self.plan.clone() {
            Some(plan) => self.compression_cycle(&plan)?,
            None => self.uncompressed_sizes(),
        };
        let diag = Instant::now();
        let post = self.global_masses();
        let cycle_mass_drift = pre
            .iter()
            .zip(&post)
            .zip(&scale)
            .map(|((a, b), s)| (a - b).abs() / s.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);

        let (min, max) = self.extremes(0);
        let l2 = match self.config.scheme {
            Scheme::Transport => Some(self.transport_error()?),
            Scheme::Swe => None,
        };
        let metrics = StepMetrics {
            step: self.step,
            time: self.time,
            dense_bytes,
            compressed_bytes,
            ratio: dense_bytes as f64 / compressed_bytes as f64,
            nnz,
            zeroed,
            global_mass: post[0],
            l2_error: l2,
            masses: post,
            min,
            max,
            cycle_mass_drift,
            shared_discrepancy,
        };
        diag_time += diag.elapsed();
        self.phases.metrics += diag_time;
        self.phases.total += started.elapsed();
        if self.config.strict {
            self.check_strict(&metrics)?;
        }
        Ok(metrics)
    }

    fn check_strict(&self, m: &StepMetrics) -> Result<(), PipelineError> {
        if m.cycle_mass_drift > STRICT_TOLERANCE {
            return Err(PipelineError::Numerical(format!(
                "step {}: compression changed the global mass by {:e} (relative)",
                m.step, m.cycle_mass_drift
            )));
        }
        if m.shared_discrepancy > STRICT_TOLERANCE {
            return Err(PipelineError::Numerical(format!(
                "step {}: shared cells disagree by {:e} after the finite-volume step",
                m.step, m.shared_discrepancy
            )));
        }
        if self.config.scheme == Scheme::Swe && !(m.min > 0.0) {
            return Err(PipelineError::Numerical(format!(
                "step {}: water depth reached {} at t = {}",
                m.step, m.min, m.time
            )));
        }
        if m.masses.iter().any(|v| !v.is_finite()) {
            return Err(PipelineError::Numerical(format!("step {}: non-finite mass", m.step)));
        }
        Ok(())
    }

    fn extremes(&self, component: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in self.grid.patches() {
            for v in p.logical_values(component) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    fn transport_error(&self) -> Result<f64, PipelineError> {
        let cells = self.config.cells();
        let sim = self.grid.assemble(0)?.crop(&[cells, cells])?;
        let exact = exact_transport(&[cells, cells], &[cells, cells], self.time, self.config.alpha, self.config.beta);
        Ok(l2_error(&sim, &exact, &[1.0, 1.0])?)
    }

    fn uncompressed_sizes(&self) -> (usize, usize, usize, usize) {
        let mut dense = 0;
        let mut nnz = 0;
        for p in self.grid.patches() {
            for c in 0..p.components() {
                let v = p.logical_values(c);
                dense += 8 * v.len();
                nnz += v.iter().filter(|x| !is_stored_zero(**x)).count();
            }
        }
        (dense, dense, nnz, 0)
    }

    /// Transform, threshold, encode, decode and invert every patch, then
    /// reconcile the copies of shared cells.
    fn compression_cycle(&mut self, plan: &WaveletPlan) -> Result<(usize, usize, usize, usize), PipelineError> {
        let spec = self.config.compression.threshold;
        let codec = self.config.compression.codec;
        let strict = self.config.strict;
        let grid = &mut self.grid;
        let pool = &self.pool;

        let t = Instant::now();
        let mut work: Vec<PatchCycle> = pool.install(|| {
            grid.patches()
                .par_iter()
                .map(|p| {
                    let coeffs = (0..p.components())
                        .map(|c| {
                            let mut v = p.logical_values(c);
                            forward_in_place(&mut v, plan);
                            CoefficientSet::from_parts(plan.clone(), v)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(PatchCycle {
                        coeffs,
                        zeroed: 0,
                        nnz: 0,
                        dense_bytes: 0,
                        compressed_bytes: 0,
                    })
                })
                .collect::<Result<_, PipelineError>>()
        })?;
        let mut dwt = t.elapsed();

        let t = Instant::now();
        pool.install(|| {
            work.par_iter_mut().for_each(|w| {
                w.zeroed = w.coeffs.iter_mut().map(|c| apply_threshold(c, &spec)).sum();
            })
        });
        self.phases.threshold += t.elapsed();

        let t = Instant::now();
        let decoded: Vec<Vec<Vec<f64>>> = pool.install(|| {
            work.par_iter_mut()
                .map(|w| {
                    let slices: Vec<&[f64]> = w.coeffs.iter().map(|c| c.values()).collect();
                    let packed = CompressedPatch::encode(codec, plan.dims(), plan.levels(), &slices)?;
                    w.dense_bytes = packed.dense_bytes();
                    w.compressed_bytes = packed.compressed_bytes();
                    w.nnz = match packed.payload() {
                        Payload::Csr(_) => packed.nnz().unwrap_or(0),
                        Payload::Lz(_) => slices
                            .iter()
                            .map(|s| s.iter().filter(|v| !is_stored_zero(**v)).count())
                            .sum(),
                    };
                    let out = packed.decode()?;
                    if strict && out.iter().zip(&slices).any(|(a, b)| !bit_equal(a, b)) {
                        return Err(PipelineError::Numerical("codec round trip was not exact".into()));
                    }
                    Ok(out)
                })
                .collect::<Result<_, PipelineError>>()
        })?;
        self.phases.codec += t.elapsed();

        let t = Instant::now();
        pool.install(|| {
            grid.patches_mut()
                .par_iter_mut()
                .zip(decoded)
                .try_for_each(|(p, comps)| {
                    for (c, mut v) in comps.into_iter().enumerate() {
                        inverse_in_place(&mut v, plan);
                        p.set_logical_values(c, &v)?;
                    }
                    Ok::<_, PipelineError>(())
                })
        })?;
        dwt += t.elapsed();
        self.phases.dwt += dwt;

        grid.reconcile_shared();

        let sum = |f: fn(&PatchCycle) -> usize| work.iter().map(f).sum::<usize>();
        let totals = (
            sum(|w| w.dense_bytes),
            sum(|w| w.compressed_bytes),
            sum(|w| w.nnz),
            sum(|w| w.zeroed),
        );
        if self.keep_coefficients {
            self.last_coefficients = work.into_iter().map(|w| w.coeffs).collect();
        }
        Ok(totals)
    }
}

fn bit_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub metrics_path: Option<PathBuf>,
    /// Directory for snapshots; defaults to the metrics file's directory.
    pub snapshot_dir: Option<PathBuf>,
    pub snapshot_prefix: String,
    pub csv_snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub metrics: RunMetrics,
    pub snapshots: Vec<PathBuf>,
    pub final_fields: Vec<Field>,
    pub initial_masses: Vec<f64>,
    pub wall: Duration,
}

fn snapshot_dir(opts: &RunOptions) -> PathBuf {
    opts.snapshot_dir
        .clone()
        .or_else(|| {
            opts.metrics_path
                .as_ref()
                .and_then(|p| p.parent().map(Path::to_path_buf))
        })
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_snapshot(sim: &Simulation, opts: &RunOptions, out: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    let dir = snapshot_dir(opts);
    std::fs::create_dir_all(&dir)?;
    let prefix = if opts.snapshot_prefix.is_empty() {
        "snapshot"
    } else {
        opts.snapshot_prefix.as_str()
    };
    let fields = sim.fields()?;
    let path = dir.join(format!("{prefix}_t{}.wgrd", sim.time()));
    write_wgrd_file(&path, &fields)?;
    out.push(path);
    if opts.csv_snapshots {
        for (c, f) in fields.iter().enumerate() {
            let path = dir.join(format!("{prefix}_t{}_c{c}.csv", sim.time()));
            write_csv_grid(BufWriter::new(File::create(&path)?), f)?;
            out.push(path);
        }
    }
    Ok(())
}

/// Runs `config` to `t_end`, writing the metrics CSV and snapshots.
pub fn run(config: &SimConfig, opts: &RunOptions) -> Result<RunReport, PipelineError> {
    let started = Instant::now();
    let mut sim = Simulation::new(config.clone())?;
    let initial_masses = sim.global_masses();
    let mut pending: Vec<f64> = config.snapshot_times.iter().copied().filter(|t| *t <= config.t_end).collect();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    let mut snapshots = Vec::new();
    if pending.first() == Some(&0.0) {
        write_snapshot(&sim, opts, &mut snapshots)?;
        pending.remove(0);
    }
    let mut metrics = RunMetrics::default();
    while !sim.is_finished() {
        let row = sim.advance()?;
        while pending.first().is_some_and(|t| *t <= sim.time()) {
            write_snapshot(&sim, opts, &mut snapshots)?;
            pending.remove(0);
        }
        metrics.steps.push(row);
    }
    metrics.phases = sim.phases().clone();
    if let Some(path) = &opts.metrics_path {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        metrics.write_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(RunReport {
        metrics,
        snapshots,
        final_fields: sim.fields()?,
        initial_masses,
        wall: started.elapsed(),
    })
}
