//! Static SVG output: diverging heatmaps with iso-lines, and line charts.

use std::fmt::Write as _;

/// A segment between two points in grid coordinates, where cell `(r, c)`
/// has its center at `(c + 0.5, r + 0.5)`.
pub type Segment = ((f64, f64), (f64, f64));

/// Iso-line of `level` over values sampled at cell centers, by marching
/// squares with linear interpolation along square edges. A single row or
/// column is stretched to the full cell so that 1-D grids still get lines.
pub fn contour_segments(values: &[Vec<f64>], level: f64) -> Vec<Segment> {
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    // Sample positions along each axis; a length-1 axis spans its cell.
    let axis = |len: usize| -> Vec<(f64, usize)> {
        if len == 1 {
            vec![(0.0, 0), (1.0, 0)]
        } else {
            (0..len).map(|k| (k as f64 + 0.5, k)).collect()
        }
    };
    let (ys, xs) = (axis(rows), axis(cols));
    let v = |r: usize, c: usize| values[ys[r].1][xs[c].1];
    let mut out = Vec::new();
    for r in 0..ys.len() - 1 {
        for c in 0..xs.len() - 1 {
            // Corners counter-clockwise from top-left: (r,c), (r,c+1), (r+1,c+1), (r+1,c).
            let corners = [
                (xs[c].0, ys[r].0, v(r, c)),
                (xs[c + 1].0, ys[r].0, v(r, c + 1)),
                (xs[c + 1].0, ys[r + 1].0, v(r + 1, c + 1)),
                (xs[c].0, ys[r + 1].0, v(r + 1, c)),
            ];
            if corners.iter().any(|p| !p.2.is_finite()) {
                continue;
            }
            let crossing = |a: (f64, f64, f64), b: (f64, f64, f64)| {
                let t = (level - a.2) / (b.2 - a.2);
                (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
            };
            let mut points = Vec::with_capacity(4);
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                if (a.2 >= level) != (b.2 >= level) {
                    points.push((k, crossing(a, b)));
                }
            }
            match points.len() {
                2 => out.push((points[0].1, points[1].1)),
                4 => {
                    // Saddle: pair edges according to the center value.
                    let center = corners.iter().map(|p| p.2).sum::<f64>() / 4.0;
                    let first_above = corners[0].2 >= level;
                    if (center >= level) == first_above {
                        out.push((points[0].1, points[3].1));
                        out.push((points[1].1, points[2].1));
                    } else {
                        out.push((points[0].1, points[1].1));
                        out.push((points[2].1, points[3].1));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Diverging palette: blue for negative, white at zero, red for positive,
/// saturating at `|v| = scale`.
pub fn diverging_color(v: f64, scale: f64) -> String {
    if !v.is_finite() || scale <= 0.0 {
        return "#dddddd".into();
    }
    let t = (v / scale).clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (1.0, 1.0 - 0.8 * t, 1.0 - 0.85 * t)
    } else {
        (1.0 + 0.85 * t, 1.0 + 0.6 * t, 1.0)
    };
    format!(
        "#{:02x}{:02x}{:02x}",
        (r * 255.0).round() as u8,
        (g * 255.0).round() as u8,
        (b * 255.0).round() as u8
    )
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Everything needed to draw one heatmap.
#[derive(Debug, Clone)]
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_ticks: Vec<String>,
    pub y_ticks: Vec<String>,
    /// `values[row][col]`; `None` cells are drawn gray.
    pub values: Vec<Vec<Option<f64>>>,
    /// Field whose iso-lines are overlaid, same shape as `values`.
    pub contour_field: Option<Vec<Vec<f64>>>,
    pub contour_levels: Vec<f64>,
    /// Legend text for the positive and negative ends.
    pub positive: &'a str,
    pub negative: &'a str,
}

const CELL: f64 = 48.0;
const LEFT: f64 = 90.0;
const TOP: f64 = 50.0;

impl Heatmap<'_> {
    pub fn to_svg(&self) -> String {
        let rows = self.values.len();
        let cols = self.values.first().map_or(0, Vec::len);
        // Roughly 8 px per title character at 14 px.
        let width = (LEFT + cols as f64 * CELL + 140.0).max(10.0 + 8.0 * self.title.chars().count() as f64);
        let height = TOP + rows as f64 * CELL + 70.0;
        let scale = self
            .values
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-12);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            s,
            r#"<text x="10" y="20" font-size="14">{}</text>"#,
            esc(self.title)
        );
        // Row 0 is drawn at the bottom so the y axis increases upwards.
        let y_of = |gy: f64| TOP + (rows as f64 - gy) * CELL;
        for (r, row) in self.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let fill = diverging_color(v.unwrap_or(f64::NAN), scale);
                let _ = writeln!(
                    s,
                    r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#ffffff"><title>{}</title></rect>"##,
                    LEFT + c as f64 * CELL,
                    y_of(r as f64 + 1.0),
                    v.map_or("n/a".into(), |x| format!("{x:.4}"))
                );
            }
        }
        if let Some(field) = &self.contour_field {
            for &level in &self.contour_levels {
                let segs = contour_segments(field, level);
                if segs.is_empty() {
                    continue;
                }
                let mut d = String::new();
                for ((x0, y0), (x1, y1)) in &segs {
                    let _ = write!(
                        d,
                        "M{:.2},{:.2}L{:.2},{:.2}",
                        LEFT + x0 * CELL,
                        y_of(*y0),
                        LEFT + x1 * CELL,
                        y_of(*y1)
                    );
                }
                let _ = writeln!(
                    s,
                    r##"<path d="{d}" stroke="#666666" stroke-width="1.5" fill="none"><title>R0 = {level}</title></path>"##
                );
                let ((lx, ly), _) = segs[0];
                let _ = writeln!(
                    s,
                    r##"<text x="{:.2}" y="{:.2}" fill="#444444" font-size="9">{level}</text>"##,
                    LEFT + lx * CELL + 2.0,
                    y_of(ly) - 2.0
                );
            }
        }
        for (c, t) in self.x_ticks.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                LEFT + (c as f64 + 0.5) * CELL,
                TOP + rows as f64 * CELL + 16.0,
                esc(t)
            );
        }
        for (r, t) in self.y_ticks.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                y_of(r as f64 + 0.5) + 4.0,
                esc(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + cols as f64 * CELL / 2.0,
            TOP + rows as f64 * CELL + 36.0,
            esc(self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            TOP + rows as f64 * CELL / 2.0,
            TOP + rows as f64 * CELL / 2.0,
            esc(self.y_label)
        );
        // Color legend.
        let lx = LEFT + cols as f64 * CELL + 20.0;
        for k in 0..=10 {
            let v = scale * (1.0 - k as f64 / 5.0);
            let _ = writeln!(
                s,
                r#"<rect x="{lx}" y="{}" width="16" height="10" fill="{}"/>"#,
                TOP + k as f64 * 10.0,
                diverging_color(v, scale)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">+{scale:.3} {}</text>"#,
            lx + 20.0,
            TOP + 9.0,
            esc(self.positive)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">-{scale:.3} {}</text>"#,
            lx + 20.0,
            TOP + 109.0,
            esc(self.negative)
        );
        s.push_str("</svg>\n");
        s
    }
}

/// One named series of a line chart, with an optional band.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub band: Vec<(f64, f64, f64)>,
}

const PALETTE: [&str; 4] = ["#1f6fb4", "#c8331f", "#2b9348", "#7b3fa0"];

/// Line chart with a log10 x axis.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (520.0, 340.0);
    let (l, r, t, b) = (60.0, 130.0, 40.0, 50.0);
    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0.log10()))
        .collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| {
            s.points
                .iter()
                .map(|p| p.1)
                .chain(s.band.iter().flat_map(|q| [q.1, q.2]))
        })
        .filter(|v| v.is_finite())
        .collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| l + (x.log10() - x0) / (x1 - x0) * (w - l - r);
    let py = |y: f64| h - b - (y - y0) / (y1 - y0) * (h - t - b);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        (l + w - r) / 2.0,
        esc(title)
    );
    let _ = writeln!(
        s,
        r##"<path d="M{l},{t}L{l},{}L{},{}" stroke="#000000" fill="none"/>"##,
        h - b,
        w - r,
        h - b
    );
    for k in 0..=4 {
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.3}</text>"#,
            l - 4.0,
            py(y) + 4.0
        );
    }
    let mut ticks: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{x}</text>"#,
            px(x),
            h - b + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (l + w - r) / 2.0,
        h - 12.0,
        esc(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        esc(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if !ser.band.is_empty() {
            let mut d = String::new();
            for (i, (x, lo, _)) in ser.band.iter().enumerate() {
                let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, px(*x), py(*lo));
            }
            for (x, _, hi) in ser.band.iter().rev() {
                let _ = write!(d, "L{:.2},{:.2}", px(*x), py(*hi));
            }
            let _ = writeln!(s, r#"<path d="{d}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#);
        }
        let mut d = String::new();
        for (i, (x, y)) in ser.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, px(*x), py(*y));
        }
        let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" stroke-width="2" fill="none"/>"#);
        for (x, y) in &ser.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(*x),
                py(*y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - r + 10.0,
            t + 16.0 * k as f64 + 10.0,
            esc(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
