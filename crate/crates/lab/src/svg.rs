//! Static log-log SVG plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#000000", "#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// Keeps only points that can be placed on log axes.
    pub fn new(name: impl Into<String>, dashed: bool, xs: &[f64], ys: impl IntoIterator<Item = Option<f64>>) -> Self {
        let points = xs
            .iter()
            .zip(ys)
            .filter_map(|(&x, y)| y.filter(|&y| x > 0.0 && y > 0.0 && y.is_finite()).map(|y| (x, y)))
            .collect();
        Self { name: name.into(), dashed, points }
    }
}

/// Decade-aligned log bounds of the data, in log10 units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl LogBox {
    pub fn fit(series: &[Series]) -> Option<Self> {
        let pts = series.iter().flat_map(|s| &s.points);
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x.log10());
            x1 = x1.max(x.log10());
            y0 = y0.min(y.log10());
            y1 = y1.max(y.log10());
        }
        if !x0.is_finite() {
            return None;
        }
        let (x0, mut x1, y0, mut y1) = (x0.floor(), x1.ceil(), y0.floor(), y1.ceil());
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        Some(Self { x0, x1, y0, y1 })
    }

    pub fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN + (x.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - (y.log10() - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN);
        (px, py)
    }

    pub fn from_px(&self, px: f64, py: f64) -> (f64, f64) {
        let lx = self.x0 + (px - MARGIN) / (WIDTH - 2.0 * MARGIN) * (self.x1 - self.x0);
        let ly = self.y0 + (HEIGHT - MARGIN - py) / (HEIGHT - 2.0 * MARGIN) * (self.y1 - self.y0);
        (10f64.powf(lx), 10f64.powf(ly))
    }
}

pub fn render(title: &str, x_label: &str, series: &[Series]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let Some(b) = LogBox::fit(series) else {
        out.push_str("</svg>\n");
        return out;
    };
    let _ = writeln!(
        out,
        r#"<g class="axes" data-xscale="log" data-yscale="log" data-box="{} {} {} {}" stroke="black" fill="none">"#,
        b.x0, b.x1, b.y0, b.y1
    );
    let (l, r, t, bt) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}"/>"#, r - l, bt - t);
    for k in (b.x0 as i32)..=(b.x1 as i32) {
        let (px, _) = b.to_px(10f64.powi(k), 10f64.powf(b.y0));
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{bt}" x2="{px:.2}" y2="{}"/>"#, bt - 6.0);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{}" text-anchor="middle" stroke="none" fill="black">1e{k}</text>"#, bt + 18.0);
    }
    for k in (b.y0 as i32)..=(b.y1 as i32) {
        let (_, py) = b.to_px(10f64.powf(b.x0), 10f64.powi(k));
        let _ = writeln!(out, r#"<line x1="{l}" y1="{py:.2}" x2="{}" y2="{py:.2}"/>"#, l + 6.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end" stroke="none" fill="black">1e{k}</text>"#, l - 6.0, py + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" stroke="none" fill="black">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(x_label));
    out.push_str("</g>\n");
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (j, &(x, y)) in s.points.iter().enumerate() {
            let (px, py) = b.to_px(x, y);
            let _ = write!(d, "{}{px:.3},{py:.3}", if j == 0 { "M" } else { " L" });
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<path class="series" data-name="{}" d="{d}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
            escape(&s.name),
            COLORS[i % COLORS.len()]
        );
    }
    let mut y = MARGIN + 16.0;
    for (i, s) in series.iter().enumerate() {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" fill="{}">{}</text>"#, WIDTH - MARGIN - 150.0, COLORS[i % COLORS.len()], escape(&s.name));
        y += 16.0;
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Series paths of a rendered plot as `(name, pixel points)`, plus the
/// axis box; enough to compare plots by geometry rather than pixels.
pub fn parse_paths(svg: &str) -> (Option<LogBox>, Vec<(String, Vec<(f64, f64)>)>) {
    let attr = |tag: &str, key: &str| -> Option<String> {
        let start = tag.find(&format!(r#"{key}=""#))? + key.len() + 2;
        let end = start + tag[start..].find('"')?;
        Some(tag[start..end].to_string())
    };
    let mut b = None;
    let mut paths = Vec::new();
    for tag in svg.split('<').skip(1) {
        if tag.starts_with("g class=\"axes\"") {
            if let Some(v) = attr(tag, "data-box") {
                let n: Vec<f64> = v.split(' ').filter_map(|x| x.parse().ok()).collect();
                if n.len() == 4 {
                    b = Some(LogBox { x0: n[0], x1: n[1], y0: n[2], y1: n[3] });
                }
            }
        } else if tag.starts_with("path class=\"series\"") {
            let name = attr(tag, "data-name").unwrap_or_default();
            let d = attr(tag, "d").unwrap_or_default();
            let pts = d
                .split(['M', 'L'])
                .filter_map(|p| {
                    let (x, y) = p.trim().split_once(',')?;
                    Some((x.parse().ok()?, y.parse().ok()?))
                })
                .collect();
            paths.push((name, pts));
        }
    }
    (b, paths)
}
