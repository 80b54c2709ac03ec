//! Self-contained SVG line plots for report output.
//!
//! No raster dependencies: each figure is a single SVG document with axes,
//! 1-2-5 tick spacing, a legend, and one polyline per series. Long series
//! are decimated per horizontal bucket keeping the min/max pair, which
//! preserves envelopes (spikes survive) while bounding file size.

use std::fmt::Write as _;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
/// Series longer than this are bucket-decimated before drawing.
const MAX_DRAWN_POINTS: usize = 2000;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

/// Tick positions with 1-2-5 spacing covering `[min, max]`.
fn ticks(min: f64, max: f64, target: usize) -> Vec<f64> {
    let span = max - min;
    if !(span > 0.0) || !span.is_finite() {
        return vec![min];
    }
    let raw_step = span / target as f64;
    let mag = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let mut t = (min / step).ceil() * step;
    // Snap values that are 0 up to rounding (e.g. 1.2e-17) back to 0.
    let mut out = Vec::new();
    while t <= max + 0.5 * step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

/// Short label for a tick value.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        // Trim trailing zeros from a fixed formatting.
        let s = format!("{v:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:e}")
    }
}

fn data_bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &x in s.x {
            xr = (xr.0.min(x), xr.1.max(x));
        }
        for &y in s.y {
            yr = (yr.0.min(y), yr.1.max(y));
        }
    }
    if !xr.0.is_finite() || xr.0 >= xr.1 {
        let c = if xr.0.is_finite() { xr.0 } else { 0.0 };
        xr = (c - 1.0, c + 1.0);
    }
    if !yr.0.is_finite() || yr.0 >= yr.1 {
        let c = if yr.0.is_finite() { yr.0 } else { 0.0 };
        let pad = if c == 0.0 { 1.0 } else { c.abs() * 0.1 };
        yr = (c - pad, c + pad);
    } else {
        // Headroom so curves don't touch the frame.
        let pad = (yr.1 - yr.0) * 0.05;
        yr = (yr.0 - pad, yr.1 + pad);
    }
    (xr, yr)
}

/// Min/max decimation: one bucket per retained slot, keep the bucket's
/// extreme pair in x-order so envelopes of oscillatory signals survive.
fn decimate(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    if n <= MAX_DRAWN_POINTS {
        return (x.to_vec(), y.to_vec());
    }
    let buckets = MAX_DRAWN_POINTS / 2;
    let mut xs = Vec::with_capacity(2 * buckets);
    let mut ys = Vec::with_capacity(2 * buckets);
    for b in 0..buckets {
        let lo = b * n / buckets;
        let hi = ((b + 1) * n / buckets).max(lo + 1);
        let mut i_min = lo;
        let mut i_max = lo;
        for i in lo..hi {
            if y[i] < y[i_min] {
                i_min = i;
            }
            if y[i] > y[i_max] {
                i_max = i;
            }
        }
        let (first, second) = if i_min <= i_max { (i_min, i_max) } else { (i_max, i_min) };
        xs.push(x[first]);
        ys.push(y[first]);
        if second != first {
            xs.push(x[second]);
            ys.push(y[second]);
        }
    }
    (xs, ys)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render a line plot as an SVG document.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let ((x0, x1), (y0, y1)) = data_bounds(series);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let to_px = |x: f64, y: f64| {
        (
            MARGIN_L + (x - x0) / (x1 - x0) * plot_w,
            MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * plot_h,
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        xml_escape(title)
    );

    // Grid and tick labels.
    for tx in ticks(x0, x1, 8) {
        let (px, _) = to_px(tx, y0);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.1}" y1="{MARGIN_T}" x2="{px:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            MARGIN_T + plot_h
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            MARGIN_T + plot_h + 16.0,
            tick_label(tx)
        );
    }
    for ty in ticks(y0, y1, 6) {
        let (_, py) = to_px(x0, ty);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_L}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd"/>"##,
            MARGIN_L + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            py + 4.0,
            tick_label(ty)
        );
    }

    // Frame and axis labels.
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        xml_escape(y_label)
    );

    // Series polylines.
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let (xs, ys) = decimate(s.x, s.y);
        let mut pts = String::with_capacity(xs.len() * 12);
        for (x, y) in xs.iter().zip(&ys) {
            let (px, py) = to_px(*x, *y);
            let _ = write!(pts, "{px:.1},{py:.1} ");
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.3"/>"#,
            pts.trim_end()
        );
        // Legend entry.
        let lx = MARGIN_L + 12.0 + 110.0 * k as f64;
        let ly = MARGIN_T - 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
            lx + 23.0,
            ly + 4.0,
            xml_escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
