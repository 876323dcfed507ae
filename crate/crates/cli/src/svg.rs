//! Minimal SVG rendering for grids and traces.

use std::fmt::Write;

use bayesel::sampler::Trace;

const BANDS: usize = 8;
/// Log-posterior drop covered by the colour bands.
const DEPTH: f64 = 16.0;

fn band_colour(band: usize) -> String {
    let t = band as f64 / (BANDS - 1) as f64;
    let r = (255.0 * t) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    format!("#{r:02x}40{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Filled bands of the log posterior below its maximum; cells with zero
/// density are left blank. `values` is row-major over `xs` then `ys`.
pub fn heatmap(xs: &[f64], ys: &[f64], values: &[f64], xlabel: &str, ylabel: &str) -> String {
    let (w, h, pad) = (500.0, 500.0, 50.0);
    let max = values.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let cw = w / xs.len() as f64;
    let ch = h / ys.len() as f64;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">"#, w + 2.0 * pad, h + 2.0 * pad);
    let _ = writeln!(s, r#"<rect x="{pad}" y="{pad}" width="{w}" height="{h}" fill="white" stroke="black"/>"#);
    for (i, _) in xs.iter().enumerate() {
        for (j, _) in ys.iter().enumerate() {
            let v = values[i * ys.len() + j];
            if !v.is_finite() {
                continue;
            }
            let drop = ((max - v) / DEPTH * BANDS as f64).floor() as usize;
            if drop >= BANDS {
                continue;
            }
            let x = pad + i as f64 * cw;
            let y = pad + h - (j + 1) as f64 * ch;
            let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#, cw + 0.1, ch + 0.1, band_colour(BANDS - 1 - drop));
        }
    }
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let (y0, y1) = (ys[0], ys[ys.len() - 1]);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, pad + w / 2.0, h + 2.0 * pad - 10.0, escape(xlabel));
    let _ = writeln!(s, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{}</text>"#, pad + h / 2.0, pad + h / 2.0, escape(ylabel));
    let _ = writeln!(s, r#"<text x="{pad}" y="{}" font-size="11">{x0:.4}</text>"#, pad + h + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{x1:.4}</text>"#, pad + w, pad + h + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y0:.4}</text>"#, pad - 4.0, pad + h);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y1:.4}</text>"#, pad - 4.0, pad + 10.0);
    s.push_str("</svg>\n");
    s
}

/// One panel per column (at most 12), thinned to at most 2000 points.
pub fn traces(trace: &Trace) -> String {
    let names = trace.column_names();
    let shown = names.len().min(12);
    let (w, ph, pad) = (800.0, 100.0, 20.0);
    let step = trace.len().div_ceil(2000).max(1);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">"#, w + 2.0 * pad, shown as f64 * (ph + pad) + pad);
    for (panel, name) in names.iter().take(shown).enumerate() {
        let col = trace.column(panel);
        let top = pad + panel as f64 * (ph + pad);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let _ = writeln!(s, r#"<rect x="{pad}" y="{top}" width="{w}" height="{ph}" fill="none" stroke="gray"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, pad + 4.0, top + 12.0, escape(name));
        s.push_str(r#"<polyline fill="none" stroke="steelblue" stroke-width="0.7" points=""#);
        let denom = (col.len().max(2) - 1) as f64;
        for t in (0..col.len()).step_by(step) {
            let x = pad + w * t as f64 / denom;
            let y = top + ph - ph * (col[t] - lo) / span;
            let _ = write!(s, "{x:.1},{y:.1} ");
        }
        s.push_str("\"/>\n");
    }
    s.push_str("</svg>\n");
    s
}
