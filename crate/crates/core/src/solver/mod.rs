//! Two-dimensional finite-volume solvers on the unit square.
//!
//! Cells are updated as
//! `W_new = W - dt/dx * sum_k Q(W, W_k, N^k)` over the four neighbours.
//! Each face flux is evaluated once and reused, negated, by the cell on the
//! other side, so fluxes telescope exactly in floating point.

mod flux;
mod riemann;

use thiserror::Error;

use crate::field::Field;

pub use flux::{flux_godunov_swe, flux_upwind, Flux, GodunovSwe, Upwind, DIRECTIONS, GRAVITY, MAX_COMPONENTS};
pub use riemann::{depth_function, sample_at_interface, star_state, MIN_DEPTH, NEWTON_MAX_ITERATIONS, NEWTON_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("non-positive water depth {0}")]
    NonPositiveDepth(f64),
    #[error("Riemann problem (hl={hl}, ul={ul}, hr={hr}, ur={ur}) would create a dry region")]
    DryState { hl: f64, ul: f64, hr: f64, ur: f64 },
    #[error(
        "Newton iteration for the star depth did not converge after {iterations} iterations \
         (hl={hl}, ul={ul}, hr={hr}, ur={ur}, last step {last_step:e})"
    )]
    NonConvergence {
        hl: f64,
        ul: f64,
        hr: f64,
        ur: f64,
        iterations: usize,
        last_step: f64,
    },
    #[error("invalid solver input: {0}")]
    Invalid(String),
}

/// Gaussian bump `1 + exp(-30 r^2)` centred on the unit square, with the
/// displacement wrapped to the nearest periodic image.
pub fn transport_initial(x: f64, y: f64) -> f64 {
    let dx = wrap(x - 0.5);
    let dy = wrap(y - 0.5);
    1.0 + (-30.0 * (dx * dx + dy * dy)).exp()
}

fn wrap(d: f64) -> f64 {
    d - d.round()
}

/// Exact transport solution `f_init(x - alpha t, y - beta t)`.
pub fn transport_exact(x: f64, y: f64, t: f64, alpha: f64, beta: f64) -> f64 {
    transport_initial(x - alpha * t, y - beta * t)
}

/// Dam break: depth 2 inside the centred square of side 0.5, 1 outside,
/// fluid at rest. Returns `(h, hu, hv)`.
pub fn dam_break_initial(x: f64, y: f64) -> [f64; 3] {
    let inside = |c: f64| (0.25..=0.75).contains(&c);
    let h = if inside(x) && inside(y) { 2.0 } else { 1.0 };
    [h, 0.0, 0.0]
}

/// Centre of cell `i` on a unit axis of `cells` cells.
pub fn cell_centre(i: usize, cells: usize) -> f64 {
    (i as f64 + 0.5) / cells as f64
}

/// Exact transport field over `dims` nodes, sampled at the centres of a
/// `cells`-cell unit grid (node `cells` wraps to node 0).
pub fn exact_transport(dims: &[usize], cells: &[usize], t: f64, alpha: f64, beta: f64) -> Field {
    Field::from_fn(dims, |i| {
        transport_exact(cell_centre(i[0], cells[0]), cell_centre(i[1], cells[1]), t, alpha, beta)
    })
    .expect("nonempty dims")
}

/// `prod(extent) / prod(N) * sum (sim - exact)^2`, without a square root.
pub fn l2_error(sim: &Field, exact: &Field, extent: &[f64]) -> Result<f64, SolverError> {
    if sim.dims() != exact.dims() || extent.len() != sim.ndim() {
        return Err(SolverError::Invalid(format!(
            "l2_error shapes {:?} vs {:?} with extent {:?}",
            sim.dims(),
            exact.dims(),
            extent
        )));
    }
    let volume: f64 = extent.iter().product::<f64>() / sim.len() as f64;
    let sum: f64 = sim.data().iter().zip(exact.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(volume * sum)
}

/// `CFL * dx / v_max` with `v_max` the largest signal speed over `fields`
/// (component arrays of equal shape).
pub fn cfl_dt<F: Flux + ?Sized>(fields: &[&Field], flux: &F, cfl: f64, dx: f64) -> Result<f64, SolverError> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(SolverError::Invalid(format!("CFL must lie in (0, 1], got {cfl}")));
    }
    let m = flux.components();
    if fields.len() != m {
        return Err(SolverError::Invalid(format!("{} components for a {m}-component flux", fields.len())));
    }
    let mut w = [0.0; MAX_COMPONENTS];
    let mut vmax = 0.0_f64;
    for cell in 0..fields[0].len() {
        for (k, f) in fields.iter().enumerate() {
            w[k] = f.data()[cell];
        }
        let [sx, sy] = flux.wave_speeds(&w[..m]);
        vmax = vmax.max(sx).max(sy);
    }
    if !(vmax > 0.0 && vmax.is_finite()) {
        return Err(SolverError::Invalid(format!("maximum wave speed {vmax} gives no finite time step")));
    }
    Ok(cfl * dx / vmax)
}

/// One explicit step on a 2-D patch of component arrays over the true
/// dims. Every cell except the outer ghost ring is updated from the old
/// values.
pub fn fv_step<F: Flux + ?Sized>(fields: &mut [Field], flux: &F, dt: f64, dx: f64) -> Result<(), SolverError> {
    let m = flux.components();
    if fields.len() != m || m > MAX_COMPONENTS {
        return Err(SolverError::Invalid(format!("{} components for a {m}-component flux", fields.len())));
    }
    let dims = fields[0].dims().to_vec();
    if dims.len() != 2 || dims[0] < 3 || dims[1] < 3 || fields.iter().any(|f| f.dims() != dims.as_slice()) {
        return Err(SolverError::Invalid(format!("fv_step needs equal 2-D arrays of at least 3x3, got {dims:?}")));
    }
    let (nx, ny) = (dims[0], dims[1]);
    let load = |i: usize, j: usize, w: &mut [f64; MAX_COMPONENTS]| {
        for (k, f) in fields.iter().enumerate() {
            w[k] = f.data()[i * ny + j];
        }
    };
    let (mut wl, mut wr) = ([0.0; MAX_COMPONENTS], [0.0; MAX_COMPONENTS]);
    let mut q = [0.0; MAX_COMPONENTS];

    // x faces between (i, j) and (i + 1, j), for i in 0..nx-1 and interior j
    let mut fx = vec![0.0; m * (nx - 1) * ny];
    for i in 0..nx - 1 {
        for j in 1..ny - 1 {
            load(i, j, &mut wl);
            load(i + 1, j, &mut wr);
            flux.numerical(&wl[..m], &wr[..m], DIRECTIONS[0], &mut q[..m])?;
            let at = (i * ny + j) * m;
            fx[at..at + m].copy_from_slice(&q[..m]);
        }
    }
    // y faces between (i, j) and (i, j + 1), for interior i and j in 0..ny-1
    let mut fy = vec![0.0; m * nx * (ny - 1)];
    for i in 1..nx - 1 {
        for j in 0..ny - 1 {
            load(i, j, &mut wl);
            load(i, j + 1, &mut wr);
            flux.numerical(&wl[..m], &wr[..m], DIRECTIONS[2], &mut q[..m])?;
            let at = (i * (ny - 1) + j) * m;
            fy[at..at + m].copy_from_slice(&q[..m]);
        }
    }
    let ratio = dt / dx;
    for (k, f) in fields.iter_mut().enumerate() {
        let data = f.data_mut();
        for i in 1..nx - 1 {
            for j in 1..ny - 1 {
                let east = fx[(i * ny + j) * m + k];
                let west = fx[((i - 1) * ny + j) * m + k];
                let north = fy[(i * (ny - 1) + j) * m + k];
                let south = fy[(i * (ny - 1) + j - 1) * m + k];
                let total = ((east - west) + north) - south;
                data[i * ny + j] -= ratio * total;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_conditions() {
        assert_eq!(transport_initial(0.5, 0.5), 2.0);
        assert_eq!(transport_initial(0.0, 0.0), 1.0 + (-15.0f64).exp());
        assert_eq!(transport_initial(1.0, 1.0), transport_initial(0.0, 0.0));
        assert_eq!(dam_break_initial(0.5, 0.5), [2.0, 0.0, 0.0]);
        assert_eq!(dam_break_initial(0.2, 0.5), [1.0, 0.0, 0.0]);
        assert_eq!(dam_break_initial(0.25, 0.75), [2.0, 0.0, 0.0]);
    }

    #[test]
    fn exact_transport_translates() {
        let a = transport_exact(0.7, 0.3, 0.25, 0.8, -0.4);
        assert!((a - transport_initial(0.5, 0.4)).abs() < 1e-15);
        let f = exact_transport(&[9, 9], &[8, 8], 0.0, 0.9, 0.9);
        assert_eq!(f.get(&[8, 3]), f.get(&[0, 3]));
    }

    #[test]
    fn l2_formula() {
        let a = Field::filled(&[4, 4], 1.0).unwrap();
        let b = Field::filled(&[4, 4], 2.0).unwrap();
        assert_eq!(l2_error(&a, &a, &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(l2_error(&b, &a, &[1.0, 1.0]).unwrap(), 1.0);
        let mut c = a.clone();
        c.set(&[1, 2], 1.5);
        assert_eq!(l2_error(&c, &a, &[1.0, 1.0]).unwrap(), 0.25 / 16.0);
        assert!(l2_error(&a, &Field::zeros(&[4, 5]).unwrap(), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn transport_dt() {
        let f = Field::filled(&[3, 3], 1.0).unwrap();
        let up = Upwind { alpha: 0.9, beta: 0.9 };
        assert_eq!(cfl_dt(&[&f], &up, 0.45, 1.0 / 128.0).unwrap(), 0.00390625);
        assert!(cfl_dt(&[&f], &up, 0.0, 1.0 / 128.0).is_err());
        assert!(cfl_dt(&[&f], &Upwind { alpha: 0.0, beta: 0.0 }, 0.5, 0.1).is_err());
    }

    #[test]
    fn lake_at_rest_dt() {
        let h = Field::filled(&[3, 3], 1.0).unwrap();
        let z = Field::zeros(&[3, 3]).unwrap();
        let dt = cfl_dt(&[&h, &z, &z], &GodunovSwe::default(), 0.45, 0.01).unwrap();
        assert!((dt - 0.45 * 0.01 / GRAVITY.sqrt()).abs() < 1e-18);
    }

    #[test]
    fn impulse_moves_one_cell() {
        let mut f = Field::zeros(&[5, 5]).unwrap();
        f.set(&[2, 2], 1.0);
        let mut fields = [f];
        fv_step(&mut fields, &Upwind { alpha: 1.0, beta: 0.0 }, 1.0, 1.0).unwrap();
        let mut expected = Field::zeros(&[5, 5]).unwrap();
        expected.set(&[3, 2], 1.0);
        assert_eq!(fields[0], expected);
    }

    #[test]
    fn constant_state_is_fixed() {
        let mut fields = [Field::filled(&[6, 7], 3.25).unwrap()];
        fv_step(&mut fields, &Upwind { alpha: 0.9, beta: -0.4 }, 0.01, 0.1).unwrap();
        assert!(fields[0].data().iter().all(|v| *v == 3.25));
        let mut swe = [
            Field::filled(&[6, 6], 1.5).unwrap(),
            Field::zeros(&[6, 6]).unwrap(),
            Field::zeros(&[6, 6]).unwrap(),
        ];
        let before = swe.clone();
        fv_step(&mut swe, &GodunovSwe::default(), 0.001, 0.01).unwrap();
        assert_eq!(swe, before);
    }
}
