//! Normalized multi-channel RMS error between two traces.
//!
//! The reference is linearly interpolated onto the model grid over the time
//! overlap; each channel error is normalized by the reference RMS of that
//! channel (floored at 1.0 for all-zero references, where the error is then
//! read in absolute units), and channels combine as a weighted RMS.

use crate::error::{Error, Result};
use crate::sim::{Channel, Trace};

fn check_monotonic(t: &[f64], what: &str) -> Result<()> {
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(format!(
            "{what} trace time must be strictly increasing"
        )));
    }
    Ok(())
}

/// Linear interpolation of (ts, ys) at x; x must lie within [ts[0], ts[n-1]].
fn lerp(ts: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = match ts.binary_search_by(|t| t.partial_cmp(&x).unwrap()) {
        Ok(i) => return ys[i],
        Err(i) => i,
    };
    // In-range by construction, so i ∈ [1, n-1].
    let (t0, t1) = (ts[i - 1], ts[i]);
    let a = (x - t0) / (t1 - t0);
    ys[i - 1] + a * (ys[i] - ys[i - 1])
}

fn rms(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for x in xs {
        sum += x * x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Weighted normalized RMS error of `model` against `reference` over the
/// listed `(channel, weight)` pairs.
pub fn trace_rmse(reference: &Trace, model: &Trace, channels: &[(Channel, f64)]) -> Result<f64> {
    if channels.is_empty() {
        return Err(Error::validation("no channels to compare"));
    }
    if reference.len() < 2 {
        return Err(Error::validation("reference trace needs at least two samples"));
    }
    if model.is_empty() {
        return Err(Error::validation("model trace is empty"));
    }
    let rt = reference.time();
    let mt = model.time();
    check_monotonic(rt, "reference")?;
    check_monotonic(mt, "model")?;

    let t_lo = rt[0].max(mt[0]);
    let t_hi = rt[rt.len() - 1].min(mt[mt.len() - 1]);
    if t_hi <= t_lo {
        return Err(Error::validation(format!(
            "traces do not overlap in time ([{:.3}, {:.3}] vs [{:.3}, {:.3}])",
            rt[0],
            rt[rt.len() - 1],
            mt[0],
            mt[mt.len() - 1]
        )));
    }
    // Model samples inside the overlap window.
    let lo = mt.partition_point(|&t| t < t_lo);
    let hi = mt.partition_point(|&t| t <= t_hi);
    if hi - lo < 2 {
        return Err(Error::validation("overlap window contains fewer than two samples"));
    }

    let mut num = 0.0;
    let mut den = 0.0;
    for (c, w) in channels {
        if !(*w >= 0.0 && w.is_finite()) {
            return Err(Error::validation("channel weights must be non-negative"));
        }
        let rc = reference
            .channel(*c)
            .ok_or_else(|| Error::validation(format!("reference lacks channel {}", c.csv_name())))?;
        let mc = model
            .channel(*c)
            .ok_or_else(|| Error::validation(format!("model lacks channel {}", c.csv_name())))?;
        let err = rms((lo..hi).map(|i| mc[i] - lerp(rt, rc, mt[i])));
        // All-zero reference channels fall back to absolute error.
        let scale = rms((lo..hi).map(|i| lerp(rt, rc, mt[i])));
        let scale = if scale < 1e-300 { 1.0 } else { scale };
        let e = err / scale;
        num += w * e * e;
        den += w;
    }
    if den == 0.0 {
        return Err(Error::validation("channel weights sum to zero"));
    }
    Ok((num / den).sqrt())
}
