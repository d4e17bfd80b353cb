//! Numerical fluxes `Q(W_L, W_R, N)` across a face with unit normal `N`.

use super::riemann::sample_at_interface;
use super::SolverError;

/// The four face normals `N^0..N^3`: `+x`, `-x`, `+y`, `-y`.
pub const DIRECTIONS: [[f64; 2]; 4] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];

pub const GRAVITY: f64 = 9.81;

/// Largest component count among the built-in systems.
pub const MAX_COMPONENTS: usize = 3;

pub trait Flux: Sync {
    fn components(&self) -> usize;

    /// Numerical flux from the cell holding `wl` toward its neighbour `wr`.
    /// Implementations must satisfy `Q(W', W, -N) = -Q(W, W', N)`.
    fn numerical(&self, wl: &[f64], wr: &[f64], n: [f64; 2], out: &mut [f64]) -> Result<(), SolverError>;

    /// Physical flux `N_x Q^x(W) + N_y Q^y(W)`.
    fn physical(&self, w: &[f64], n: [f64; 2], out: &mut [f64]);

    /// Largest signal speed along x and y in state `w`.
    fn wave_speeds(&self, w: &[f64]) -> [f64; 2];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Upwind {
    pub alpha: f64,
    pub beta: f64,
}

/// `W_L max(a, 0) + W_R min(a, 0)` with `a = alpha N_x + beta N_y`.
pub fn flux_upwind(wl: f64, wr: f64, n: [f64; 2], alpha: f64, beta: f64) -> f64 {
    let a = alpha * n[0] + beta * n[1];
    wl * a.max(0.0) + wr * a.min(0.0)
}

impl Flux for Upwind {
    fn components(&self) -> usize {
        1
    }

    fn numerical(&self, wl: &[f64], wr: &[f64], n: [f64; 2], out: &mut [f64]) -> Result<(), SolverError> {
        out[0] = flux_upwind(wl[0], wr[0], n, self.alpha, self.beta);
        Ok(())
    }

    fn physical(&self, w: &[f64], n: [f64; 2], out: &mut [f64]) {
        out[0] = w[0] * (self.alpha * n[0] + self.beta * n[1]);
    }

    fn wave_speeds(&self, _w: &[f64]) -> [f64; 2] {
        [self.alpha.abs(), self.beta.abs()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GodunovSwe {
    pub g: f64,
}

impl Default for GodunovSwe {
    fn default() -> Self {
        Self { g: GRAVITY }
    }
}

fn swe_normal_flux(h: f64, un: f64, ut: f64, n: [f64; 2], g: f64) -> [f64; 3] {
    let fm = h * un;
    let fn_ = h * un * un + 0.5 * g * h * h;
    let ft = h * un * ut;
    [fm, fn_ * n[0] - ft * n[1], fn_ * n[1] + ft * n[0]]
}

/// Godunov flux for `W = (h, hu, hv)`: the physical flux at the exact
/// Riemann solution sampled on the face, in the frame of `N`.
pub fn flux_godunov_swe(wl: [f64; 3], wr: [f64; 3], n: [f64; 2], g: f64) -> Result<[f64; 3], SolverError> {
    let (hl, hr) = (wl[0], wr[0]);
    if !(hl > 0.0) {
        return Err(SolverError::NonPositiveDepth(hl));
    }
    if !(hr > 0.0) {
        return Err(SolverError::NonPositiveDepth(hr));
    }
    let (ul, vl) = (wl[1] / hl, wl[2] / hl);
    let (ur, vr) = (wr[1] / hr, wr[2] / hr);
    let unl = ul * n[0] + vl * n[1];
    let utl = -ul * n[1] + vl * n[0];
    let unr = ur * n[0] + vr * n[1];
    let utr = -ur * n[1] + vr * n[0];
    let (h, un, from_left) = sample_at_interface(hl, unl, hr, unr, g)?;
    let ut = if from_left { utl } else { utr };
    Ok(swe_normal_flux(h, un, ut, n, g))
}

impl Flux for GodunovSwe {
    fn components(&self) -> usize {
        3
    }

    fn numerical(&self, wl: &[f64], wr: &[f64], n: [f64; 2], out: &mut [f64]) -> Result<(), SolverError> {
        let q = flux_godunov_swe([wl[0], wl[1], wl[2]], [wr[0], wr[1], wr[2]], n, self.g)?;
        out[..3].copy_from_slice(&q);
        Ok(())
    }

    fn physical(&self, w: &[f64], n: [f64; 2], out: &mut [f64]) {
        let (u, v) = (w[1] / w[0], w[2] / w[0]);
        let q = swe_normal_flux(w[0], u * n[0] + v * n[1], -u * n[1] + v * n[0], n, self.g);
        out[..3].copy_from_slice(&q);
    }

    fn wave_speeds(&self, w: &[f64]) -> [f64; 2] {
        let c = (self.g * w[0]).sqrt();
        [(w[1] / w[0]).abs() + c, (w[2] / w[0]).abs() + c]
    }
}
