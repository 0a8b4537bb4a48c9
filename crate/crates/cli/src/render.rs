//! SVG line art of the real trace of an arrangement.

use anyhow::{bail, Result};
use arrangelab_core::arrangement::parallel_classes;
use arrangelab_core::fiber::BallSpec;
use arrangelab_core::{intersections, Arrangement, Line};

/// Imaginary parts above this make a line non-real for drawing purposes.
pub const REAL_TOL: f64 = 1e-9;

const PALETTE: [&str; 8] = ["#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const BALL_COLOR: &str = "#1f5fbf";

#[derive(Clone, Debug, PartialEq)]
pub struct StrokeStyle {
    pub color: String,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    /// `(xmin, xmax, ymin, ymax)`.
    pub viewport: (f64, f64, f64, f64),
    pub width: u32,
    pub height: u32,
    pub show_ball: Option<BallSpec>,
    /// Styles cycled over the parallel classes.
    pub strokes: Vec<StrokeStyle>,
}

impl RenderSpec {
    pub fn new(viewport: (f64, f64, f64, f64), width: u32, height: u32, show_ball: Option<BallSpec>) -> Result<RenderSpec> {
        let (x0, x1, y0, y1) = viewport;
        if ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            bail!("viewport bounds must be finite");
        }
        if !(x0 < x1 && y0 < y1) {
            bail!("empty viewport: need xmin < xmax and ymin < ymax, got ({x0}, {x1}, {y0}, {y1})");
        }
        if width == 0 || height == 0 {
            bail!("image size must be positive");
        }
        let strokes = PALETTE.iter().map(|c| StrokeStyle { color: c.to_string(), width: 2.0 }).collect();
        Ok(RenderSpec { viewport, width, height, show_ball, strokes })
    }

    /// Viewport around the real parts of the intersection points and the
    /// ball, padded on every side.
    pub fn fit(arr: &Arrangement, show_ball: Option<BallSpec>, width: u32, height: u32) -> Result<RenderSpec> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for p in intersections(arr, arrangelab_core::arrangement::TOL_POINT)? {
            xs.push(p.location[0].re);
            ys.push(p.location[1].re);
        }
        if let Some(ball) = &show_ball {
            for s in [-1.0, 1.0] {
                xs.push(ball.center[0].re + s * ball.radius);
                ys.push(ball.center[1].re + s * ball.radius);
            }
        }
        if xs.is_empty() {
            xs.extend([-1.0, 1.0]);
            ys.extend([-1.0, 1.0]);
        }
        let bounds = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = 0.2 * (hi - lo) + 1.0;
            (lo - pad, hi + pad)
        };
        let (x0, x1) = bounds(&xs);
        let (y0, y1) = bounds(&ys);
        RenderSpec::new((x0, x1, y0, y1), width, height, show_ball)
    }

    fn to_pixels(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1, y0, y1) = self.viewport;
        ((x - x0) / (x1 - x0) * self.width as f64, (y1 - y) / (y1 - y0) * self.height as f64)
    }
}

pub struct Rendered {
    pub svg: String,
    pub warnings: Vec<String>,
}

fn is_real(line: &Line) -> bool {
    line.coefficients().iter().all(|z| z.im.abs() <= REAL_TOL)
}

/// Part of the real line `a x + b y + c = 0` inside the viewport.
fn clip(a: f64, b: f64, c: f64, (x0, x1, y0, y1): (f64, f64, f64, f64)) -> Option<[(f64, f64); 2]> {
    let n2 = a * a + b * b;
    let base = (-c * a / n2, -c * b / n2);
    let dir = (-b, a);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (p, d, min, max) in [(base.0, dir.0, x0, x1), (base.1, dir.1, y0, y1)] {
        if d.abs() < 1e-300 {
            if p < min || p > max {
                return None;
            }
            continue;
        }
        let (s0, s1) = ((min - p) / d, (max - p) / d);
        lo = lo.max(s0.min(s1));
        hi = hi.min(s0.max(s1));
    }
    (lo < hi).then_some([(base.0 + lo * dir.0, base.1 + lo * dir.1), (base.0 + hi * dir.0, base.1 + hi * dir.1)])
}

pub fn render_svg(arr: &Arrangement, spec: &RenderSpec) -> Rendered {
    let mut warnings = Vec::new();
    let mut class_of = vec![0; arr.degree()];
    for (k, class) in parallel_classes(arr).iter().enumerate() {
        for &i in class {
            class_of[i] = k;
        }
    }
    let (w, h) = (spec.width, spec.height);
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!("  <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"));
    if let Some(ball) = &spec.show_ball {
        let (cx, cy) = spec.to_pixels(ball.center[0].re, ball.center[1].re);
        let (x0, x1, y0, y1) = spec.viewport;
        let rx = ball.radius / (x1 - x0) * w as f64;
        let ry = ball.radius / (y1 - y0) * h as f64;
        let style = format!("fill=\"{BALL_COLOR}\" fill-opacity=\"0.12\" stroke=\"{BALL_COLOR}\" stroke-width=\"1.5\"");
        if (rx - ry).abs() <= 1e-9 * rx {
            svg.push_str(&format!("  <circle class=\"ball\" cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{rx:.3}\" {style}/>\n"));
        } else {
            svg.push_str(&format!(
                "  <ellipse class=\"ball\" cx=\"{cx:.3}\" cy=\"{cy:.3}\" rx=\"{rx:.3}\" ry=\"{ry:.3}\" {style}/>\n"
            ));
        }
        if ball.center.iter().any(|z| z.im.abs() > REAL_TOL) {
            warnings.push("ball center is not real; drawing its real part".into());
        }
    }
    for (i, line) in arr.lines().iter().enumerate() {
        let real = is_real(line);
        if !real {
            warnings.push(format!("line {i} is not real; drawing the real parts of its coefficients dashed"));
        }
        let Some([p, q]) = clip(line.a.re, line.b.re, line.c.re, spec.viewport) else {
            warnings.push(format!("line {i} misses the viewport"));
            continue;
        };
        let (px, py) = spec.to_pixels(p.0, p.1);
        let (qx, qy) = spec.to_pixels(q.0, q.1);
        let k = class_of[i];
        let stroke = &spec.strokes[k % spec.strokes.len()];
        let dash = if real { String::new() } else { " stroke-dasharray=\"8 5\"".to_string() };
        svg.push_str(&format!(
            "  <path class=\"class-{k}\" d=\"M {px:.3} {py:.3} L {qx:.3} {qy:.3}\" stroke=\"{}\" stroke-width=\"{}\" fill=\"none\"{dash}/>\n",
            stroke.color, stroke.width
        ));
    }
    svg.push_str("</svg>\n");
    Rendered { svg, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_axes() {
        let vp = (-2.0, 2.0, -1.0, 1.0);
        let [p, q] = clip(1.0, 0.0, 0.0, vp).unwrap();
        assert_eq!((p.0, q.0), (0.0, 0.0));
        assert_eq!((p.1.min(q.1), p.1.max(q.1)), (-1.0, 1.0));
        assert!(clip(1.0, 0.0, -3.0, vp).is_none());
        let [p, q] = clip(1.0, -1.0, 0.0, vp).unwrap();
        assert!((p.0.abs() - 1.0).abs() < 1e-15 && (q.0.abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_viewport() {
        assert!(RenderSpec::new((1.0, 1.0, 0.0, 1.0), 10, 10, None).is_err());
        assert!(RenderSpec::new((0.0, 1.0, 2.0, -2.0), 10, 10, None).is_err());
        assert!(RenderSpec::new((0.0, 1.0, 0.0, 1.0), 0, 10, None).is_err());
    }
}
