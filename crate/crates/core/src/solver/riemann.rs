//! Exact Riemann solver for the 1-D shallow-water equations over a flat
//! bottom, without dry states.

use super::SolverError;

pub const NEWTON_TOLERANCE: f64 = 1e-10;
pub const NEWTON_MAX_ITERATIONS: usize = 100;
pub const MIN_DEPTH: f64 = 1e-12;

/// Depth function of one side: shock branch for `h > hk`, rarefaction
/// branch otherwise. Returns `(f, df/dh)`.
pub fn depth_function(h: f64, hk: f64, g: f64) -> (f64, f64) {
    if h > hk {
        let s = (0.5 * g * (h + hk) / (h * hk)).sqrt();
        (((h - hk) * s), s - (h - hk) * g / (4.0 * s * h * h))
    } else {
        let f = 2.0 * ((g * h).sqrt() - (g * hk).sqrt());
        (f, (g / h).sqrt())
    }
}

/// Star-region depth and normal velocity.
pub fn star_state(hl: f64, ul: f64, hr: f64, ur: f64, g: f64) -> Result<(f64, f64), SolverError> {
    for h in [hl, hr] {
        if !(h > MIN_DEPTH) || !h.is_finite() {
            return Err(SolverError::NonPositiveDepth(h));
        }
    }
    let (cl, cr) = ((g * hl).sqrt(), (g * hr).sqrt());
    if ur - ul >= 2.0 * (cl + cr) {
        return Err(SolverError::DryState { hl, ul, hr, ur });
    }
    let guess = 0.5 * (cl + cr) - 0.25 * (ur - ul);
    let mut h = guess * guess / g;
    let mut last_step = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let (fl, dfl) = depth_function(h, hl, g);
        let (fr, dfr) = depth_function(h, hr, g);
        let phi = fl + fr + ur - ul;
        let step = phi / (dfl + dfr);
        let mut next = h - step;
        if !(next > 0.0) {
            next = 0.5 * h;
        }
        last_step = (next - h).abs();
        h = next;
        if last_step < NEWTON_TOLERANCE {
            let (fl, _) = depth_function(h, hl, g);
            let (fr, _) = depth_function(h, hr, g);
            let u = 0.5 * (ul + ur) + 0.5 * (fr - fl);
            return Ok((h, u));
        }
    }
    Err(SolverError::NonConvergence {
        hl,
        ul,
        hr,
        ur,
        iterations: NEWTON_MAX_ITERATIONS,
        last_step,
    })
}

/// State `(h, u_normal, from_left)` of the self-similar solution at
/// `x/t = 0`. `from_left` tells which side of the contact was sampled.
pub fn sample_at_interface(hl: f64, ul: f64, hr: f64, ur: f64, g: f64) -> Result<(f64, f64, bool), SolverError> {
    let (hs, us) = star_state(hl, ul, hr, ur, g)?;
    let cs = (g * hs).sqrt();
    if us >= 0.0 {
        let cl = (g * hl).sqrt();
        if hs > hl {
            let speed = ul - cl * (0.5 * hs * (hs + hl) / (hl * hl)).sqrt();
            Ok(if speed >= 0.0 { (hl, ul, true) } else { (hs, us, true) })
        } else if ul - cl >= 0.0 {
            Ok((hl, ul, true))
        } else if us - cs <= 0.0 {
            Ok((hs, us, true))
        } else {
            let c = (ul + 2.0 * cl) / 3.0;
            Ok((c * c / g, c, true))
        }
    } else {
        let cr = (g * hr).sqrt();
        if hs > hr {
            let speed = ur + cr * (0.5 * hs * (hs + hr) / (hr * hr)).sqrt();
            Ok(if speed <= 0.0 { (hr, ur, false) } else { (hs, us, false) })
        } else if ur + cr <= 0.0 {
            Ok((hr, ur, false))
        } else if us + cs >= 0.0 {
            Ok((hs, us, false))
        } else {
            let c = (-ur + 2.0 * cr) / 3.0;
            Ok((c * c / g, -c, false))
        }
    }
}
