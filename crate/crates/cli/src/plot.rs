//! Minimal hand-written SVG plots. Numbers are printed with fixed precision so the
//! output bytes depend only on the inputs.

use ciarlet::{CellKind, CiarletElement, FunctionSet};
use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const LINE_SAMPLES: usize = 201;
const GRID: usize = 40;

pub fn render(el: &CiarletElement, dof: usize, component: usize, lattice: Option<usize>) -> Result<String, String> {
    match el.cell().kind() {
        CellKind::Interval => line_plot(el, dof, component, lattice.unwrap_or(LINE_SAMPLES)),
        CellKind::Triangle => grid_plot(el, dof, component, lattice.unwrap_or(GRID)),
        other => Err(format!("plots are available on interval and triangle cells, not {other}")),
    }
}

fn sample(el: &CiarletElement, points: &[Vec<f64>], dof: usize, component: usize) -> Result<Vec<f64>, String> {
    let t = el.tabulate(points).map_err(|e| e.to_string())?;
    Ok((0..points.len()).map(|p| t.get(p, dof, component)).collect())
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
}

fn axes(out: &mut String, right: f64, xlabel: &str, ylabel: &str, xr: (f64, f64), yr: (f64, f64)) {
    let (l, r, t, b) = (MARGIN, right, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<path d="M{l:.2} {t:.2} L{l:.2} {b:.2} L{r:.2} {b:.2}" fill="none" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#, (l + r) / 2.0, b + 40.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{ylabel}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0
    );
    for (v, x) in [(xr.0, l), (xr.1, r)] {
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.3}</text>"#, b + 18.0);
    }
    for (v, y) in [(yr.0, b), (yr.1, t)] {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, l - 6.0, y + 4.0);
    }
}

fn line_plot(el: &CiarletElement, dof: usize, component: usize, n: usize) -> Result<String, String> {
    let n = n.max(2);
    let verts = el.cell().vertices();
    let (x0, x1) = (verts[0][0], verts[1][0]);
    let xs: Vec<Vec<f64>> = (0..n).map(|i| vec![x0 + (x1 - x0) * i as f64 / (n - 1) as f64]).collect();
    let ys = sample(el, &xs, dof, component)?;
    // The window always shows [-1, 2] so overshoot past the [0, 1] guides is visible.
    let lo = ys.iter().copied().fold(-1.0, f64::min);
    let hi = ys.iter().copied().fold(2.0, f64::max);
    let (xmin, xmax) = (x0.min(x1), x0.max(x1));
    let px = |x: f64| MARGIN + (x - xmin) / (xmax - xmin) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, &format!("{} basis function {dof}", el.spec_string()));
    axes(&mut out, WIDTH - MARGIN, "x", &format!("phi_{dof}"), (xmin, xmax), (lo, hi));
    for guide in [0.0, 1.0] {
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999999" stroke-dasharray="4 4"/>"##,
            px(xmin),
            px(xmax),
            y = py(guide)
        );
    }
    let path: Vec<String> = xs
        .iter()
        .zip(&ys)
        .enumerate()
        .map(|(i, (x, y))| format!("{}{:.2} {:.2}", if i == 0 { "M" } else { "L" }, px(x[0]), py(*y)))
        .collect();
    let _ = writeln!(out, r##"<path d="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##, path.join(" "));
    out.push_str("</svg>\n");
    Ok(out)
}

/// Blue for negative, white for zero, red for positive values, scaled by `scale`.
fn colour(v: f64, scale: f64) -> String {
    let s = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |s: f64| (255.0 * (1.0 - s.abs())).round() as u8;
    let (r, g, b) = if s >= 0.0 { (255, fade(s), fade(s)) } else { (fade(s), fade(s), 255) };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn grid_plot(el: &CiarletElement, dof: usize, component: usize, n: usize) -> Result<String, String> {
    let n = n.max(2);
    let map = el.cell().reference_map();
    // Cell centres in reference coordinates, kept when inside the triangle.
    let mut centres = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (u, v) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
            if u + v <= 1.0 {
                centres.push((i, j, vec![u, v]));
            }
        }
    }
    let physical: Vec<Vec<f64>> = centres.iter().map(|c| map.apply(&c.2)).collect();
    let vals = sample(el, &physical, dof, component)?;
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let side = (HEIGHT - 2.0 * MARGIN) / n as f64;
    let mut out = String::new();
    header(&mut out, &format!("{} basis function {dof}", el.spec_string()));
    axes(&mut out, HEIGHT - MARGIN, "reference x", "reference y", (0.0, 1.0), (0.0, 1.0));
    for ((i, j, _), v) in centres.iter().zip(&vals) {
        let x = MARGIN + *i as f64 * side;
        let y = HEIGHT - MARGIN - (*j as f64 + 1.0) * side;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{side:.2}" height="{side:.2}" fill="{}"/>"#,
            colour(*v, scale)
        );
    }
    let legend_x = WIDTH - MARGIN - 120.0;
    let _ = writeln!(out, r#"<text x="{legend_x:.2}" y="{:.2}">min {lo:.4}</text>"#, MARGIN + 20.0);
    let _ = writeln!(out, r#"<text x="{legend_x:.2}" y="{:.2}">max {hi:.4}</text>"#, MARGIN + 40.0);
    out.push_str("</svg>\n");
    Ok(out)
}
