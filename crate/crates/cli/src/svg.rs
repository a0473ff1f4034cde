use std::fmt::Write as _;

pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

/// Fixed-precision coordinate formatting keeps output byte-stable.
pub fn f(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub struct Document {
    width: f64,
    height: f64,
    body: String,
}

impl Document {
    pub fn new(width: f64, height: f64) -> Self {
        Document {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn raw(&mut self, element: &str) {
        self.body.push_str(element);
        self.body.push('\n');
    }

    pub fn text(&mut self, x: f64, y: f64, text: &str, size: f64, anchor: &str) {
        self.raw(&format!(
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="{anchor}" font-family="sans-serif">{}</text>"#,
            f(x),
            f(y),
            size,
            escape(text)
        ));
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Round tick positions covering `[lo, hi]`.
pub fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// A rectangular plotting region with data-to-pixel mapping.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Panel {
    pub fn new(left: f64, top: f64, width: f64, height: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        Panel {
            left,
            top,
            width,
            height,
            x_range: widen(x_range),
            y_range: widen(y_range),
        }
    }

    pub fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * self.width
    }

    pub fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * self.height
    }

    /// Frame, ticks, title and axis labels.
    pub fn frame(&self, doc: &mut Document, title: &str, xlabel: &str, ylabel: &str) {
        doc.raw(&format!(
            r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" data-x-min="{}" data-x-max="{}"/>"#,
            f(self.left),
            f(self.top),
            f(self.width),
            f(self.height),
            self.x_range.0,
            self.x_range.1
        ));
        let bottom = self.top + self.height;
        for x in ticks(self.x_range.0, self.x_range.1, 6) {
            let px = self.px(x);
            doc.raw(&format!(
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>"#,
                f(px),
                f(bottom),
                f(bottom + 4.0)
            ));
            doc.text(px, bottom + 16.0, &tick_label(x), 10.0, "middle");
        }
        for y in ticks(self.y_range.0, self.y_range.1, 5) {
            let py = self.py(y);
            doc.raw(&format!(
                r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>"#,
                f(self.left - 4.0),
                f(py),
                f(self.left)
            ));
            doc.text(self.left - 6.0, py + 3.5, &tick_label(y), 10.0, "end");
        }
        doc.text(self.left + self.width / 2.0, self.top - 8.0, title, 13.0, "middle");
        doc.text(self.left + self.width / 2.0, bottom + 34.0, xlabel, 11.0, "middle");
        let (lx, ly) = (self.left - 42.0, self.top + self.height / 2.0);
        doc.raw(&format!(
            r#"<text x="{0}" y="{1}" font-size="11" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 {0} {1})">{2}</text>"#,
            f(lx),
            f(ly),
            escape(ylabel)
        ));
    }

    fn path_data(&self, xs: &[f64], ys: &[f64]) -> String {
        let mut d = String::new();
        let mut pen_down = false;
        for (&x, &y) in xs.iter().zip(ys) {
            if !x.is_finite() || !y.is_finite() {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            write!(d, "{cmd}{},{} ", f(self.px(x)), f(self.py(y))).unwrap();
            pen_down = true;
        }
        d.trim_end().to_string()
    }

    pub fn line(&self, doc: &mut Document, xs: &[f64], ys: &[f64], stroke: &str, width: f64, dash: Option<&str>) {
        let d = self.path_data(xs, ys);
        if d.is_empty() {
            return;
        }
        let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        doc.raw(&format!(
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"{dash}/>"#
        ));
    }

    /// Shaded region between two curves.
    pub fn band(&self, doc: &mut Document, xs: &[f64], lo: &[f64], hi: &[f64], fill: &str) {
        let mut d = String::new();
        for (k, (&x, &y)) in xs.iter().zip(hi).enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            write!(d, "{cmd}{},{} ", f(self.px(x)), f(self.py(y))).unwrap();
        }
        for (&x, &y) in xs.iter().zip(lo).rev() {
            write!(d, "L{},{} ", f(self.px(x)), f(self.py(y))).unwrap();
        }
        d.push('Z');
        doc.raw(&format!(r#"<path d="{d}" fill="{fill}" fill-opacity="0.3" stroke="none"/>"#));
    }

    pub fn markers(&self, doc: &mut Document, xs: &[f64], ys: &[f64], fill: &str, radius: f64) {
        for (&x, &y) in xs.iter().zip(ys) {
            doc.raw(&format!(
                r#"<circle cx="{}" cy="{}" r="{radius}" fill="{fill}"/>"#,
                f(self.px(x)),
                f(self.py(y))
            ));
        }
    }

    /// Vertical dashed line marking the scale mode at `x`.
    pub fn mode_line(&self, doc: &mut Document, x: f64) {
        let px = self.px(x);
        doc.raw(&format!(
            r#"<line class="c-mode" data-log-c="{x}" x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black" stroke-dasharray="6,4"/>"#,
            f(px),
            f(self.top),
            f(self.top + self.height)
        ));
    }

    pub fn hline(&self, doc: &mut Document, y: f64, stroke: &str) {
        let py = self.py(y);
        doc.raw(&format!(
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{stroke}" stroke-width="0.5"/>"#,
            f(self.left),
            f(py),
            f(self.left + self.width)
        ));
    }
}

/// `(min, max)` over finite values, padded by `pad` of the span.
pub fn data_range<'a>(values: impl IntoIterator<Item = &'a f64>, pad: f64) -> (f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = (hi - lo).max(1e-9);
    (lo - pad * span, hi + pad * span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_inside() {
        let t = ticks(-3.2, 0.7, 6);
        assert!(t.iter().all(|v| *v >= -3.2 && *v <= 0.7));
        assert!(t.contains(&0.0));
        assert!(t.len() >= 3);
    }

    #[test]
    fn mapping_is_affine() {
        let p = Panel::new(10.0, 20.0, 100.0, 50.0, (0.0, 1.0), (-1.0, 1.0));
        assert_eq!(p.px(0.0), 10.0);
        assert_eq!(p.px(1.0), 110.0);
        assert_eq!(p.py(-1.0), 70.0);
        assert_eq!(p.py(1.0), 20.0);
    }

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(f(-0.0001), "0.00");
    }
}
