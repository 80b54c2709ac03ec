//! Constraint-surface geometry: evaluation, normals, velocity split, and the
//! drift projection used after constrained steps.

use crate::error::{Error, Result};
use crate::frames::Vec3;

use super::SurfaceParams;

/// Constraint value C(r) = rᵀWr - 1. Negative inside the surface, zero on
/// it, positive outside.
pub fn constraint_value(r_t: &Vec3, surface: &SurfaceParams) -> f64 {
    let s = Vec3::new(r_t.x / surface.a(), r_t.y / surface.b(), r_t.z / surface.b());
    s.norm_squared() - 1.0
}

/// Outward unit normal of the surface at `r_t` (tank frame): W·r normalized.
/// Undefined at the tank centre.
pub fn surface_normal(r_t: &Vec3, surface: &SurfaceParams) -> Result<Vec3> {
    let g = surface.w() * r_t;
    let n = g.norm();
    if n < 1e-12 {
        return Err(Error::numerical(
            "surface normal undefined: particle at the tank centre",
        ));
    }
    Ok(g / n)
}

/// Split a velocity into its scalar normal component and tangential part:
/// `v = v_perp * e_n + v_par`. Works in any frame as long as `v` and `e_n`
/// share it; `e_n` must be unit.
pub fn split_velocity(v: &Vec3, e_n: &Vec3) -> (f64, Vec3) {
    let v_perp = e_n.dot(v);
    (v_perp, v - e_n * v_perp)
}

/// Pull a slightly drifted position back onto the surface by moving along the
/// gradient direction d = W·r: C(r + s·d) is quadratic in s, and the root of
/// smaller magnitude is the nearest-on-ray surface point. Used after every
/// constrained step; for the drifts RK4 leaves (|C| ≪ 1e-10) the correction
/// is essentially first-order and well conditioned.
pub fn project_to_surface(r_t: &Vec3, surface: &SurfaceParams) -> Result<Vec3> {
    let w = surface.w();
    let d = w * r_t;
    let qa = (w * d).dot(&d);
    let qb = 2.0 * d.dot(&(w * r_t));
    let qc = constraint_value(r_t, surface);
    if qa <= 0.0 {
        return Err(Error::numerical(
            "surface projection undefined: particle at the tank centre",
        ));
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        // qc < 0 makes disc > qb² ≥ 0, so this needs a point far outside the
        // surface on a near-degenerate ray; nothing the stepper produces.
        return Err(Error::numerical("surface projection failed: no real root"));
    }
    let sq = disc.sqrt();
    // Stable quadratic roots: compute the large-magnitude one first.
    let q = -0.5 * (qb + qb.signum() * sq);
    let (s1, s2) = (q / qa, if q != 0.0 { qc / q } else { 0.0 });
    let s = if s1.abs() < s2.abs() { s1 } else { s2 };
    Ok(r_t + d * s)
}
