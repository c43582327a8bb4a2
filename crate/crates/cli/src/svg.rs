//! Minimal static SVG log-log plot: ladder points, the fitted line and an
//! optional predicted-slope guide.

use spiraldim::neighborhood::EpsAreaSample;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

pub struct LogLogPlot<'a> {
    pub ladder: &'a [EpsAreaSample],
    pub fitted_dim: f64,
    pub predicted_dim: Option<f64>,
    pub title: String,
    pub config_hash: &'a str,
}

impl LogLogPlot<'_> {
    pub fn render(&self) -> String {
        let xs: Vec<f64> = self.ladder.iter().map(|s| s.eps.log10()).collect();
        let ys: Vec<f64> = self.ladder.iter().map(|s| s.area.log10()).collect();
        let (x0, x1) = bounds(&xs);
        let (y0, y1) = bounds(&ys);
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
             viewBox=\"0 0 {W} {H}\">\n"
        ));
        out.push_str(&format!("<!-- config_hash={} -->\n", self.config_hash));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"14\">{}</text>\n",
            W / 2.0,
            xml_escape(&self.title)
        ));

        // axes
        out.push_str(&format!(
            "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
             <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
            m = MARGIN,
            b = H - MARGIN,
            r = W - MARGIN,
            t = MARGIN
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"12\">log10 eps</text>\n",
            W / 2.0,
            H - 16.0
        ));
        out.push_str(&format!(
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"12\" transform=\"rotate(-90 16 {})\">log10 area</text>\n",
            H / 2.0,
            H / 2.0
        ));
        for (x, y) in [(x0, y0), (x1, y1)] {
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
                 font-size=\"10\">{:.2}</text>\n",
                px(x),
                H - MARGIN + 16.0,
                x
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" \
                 font-size=\"10\">{:.2}</text>\n",
                MARGIN - 6.0,
                py(y) + 3.0,
                y
            ));
        }

        // fitted line through the weighted centroid with slope 2 - dim
        let slope = 2.0 - self.fitted_dim;
        let cx = xs.iter().sum::<f64>() / xs.len() as f64;
        let cy = ys.iter().sum::<f64>() / ys.len() as f64;
        let line = |s: f64, color: &str, dash: &str, label: &str, dy: f64| {
            let ya = cy + s * (x0 - cx);
            let yb = cy + s * (x1 - cx);
            format!(
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{color}\" \
                 stroke-width=\"1.5\"{dash}/>\n\
                 <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
                 fill=\"{color}\">{label}</text>\n",
                px(x0),
                py(ya),
                px(x1),
                py(yb),
                W - MARGIN - 180.0,
                MARGIN + dy
            )
        };
        out.push_str(&line(
            slope,
            "#c0392b",
            "",
            &format!("fit: dim = {:.4}", self.fitted_dim),
            14.0,
        ));
        if let Some(pred) = self.predicted_dim {
            out.push_str(&line(
                2.0 - pred,
                "#2471a3",
                " stroke-dasharray=\"6 4\"",
                &format!("predicted dim = {pred:.4}"),
                30.0,
            ));
        }

        for (x, y) in xs.iter().zip(&ys) {
            out.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"black\"/>\n",
                px(*x),
                py(*y)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
