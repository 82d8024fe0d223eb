//! Static SVG renderings of report plot data.
//!
//! Everything drawn comes from the report sections, so a plot can always be
//! traced back to a field of `report.json`.

use std::fmt::Write as _;

use caseflow_core::report::{KMeansSection, SomSection};
use caseflow_core::{SensitivityHistogram, SessionReport};

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            w.max(0.0),
            h.max(0.0)
        );
    }

    fn outline(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" stroke="#888"/>"##
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"{dash}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size}" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#,
            esc(s)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Horizontal silhouette bars grouped by cluster, widest first.
pub fn silhouette(km: &KMeansSection) -> Option<String> {
    let summary = km.silhouette.as_ref()?;
    let mut cases: Vec<(usize, f64, &str)> = km
        .assignments
        .iter()
        .map(|a| (a.cluster, a.silhouette.unwrap_or(0.0), a.case_id.as_str()))
        .collect();
    cases.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));

    let bar = 12.0;
    let gap_between = 18.0;
    let (left, plot_w, top) = (150.0, 420.0, 40.0);
    let height = top + cases.len() as f64 * bar + km.k as f64 * gap_between + 50.0;
    let mut svg = Svg::new(left + plot_w + 40.0, height);
    svg.text(left + plot_w / 2.0, 20.0, 14.0, "middle", "Silhouette widths");
    let x = |s: f64| left + (s + 1.0) / 2.0 * plot_w;

    let mut y = top;
    for c in 0..km.k {
        let members: Vec<&(usize, f64, &str)> = cases.iter().filter(|m| m.0 == c).collect();
        let mean = summary.cluster_means.get(c).copied().unwrap_or(0.0);
        svg.text(
            left - 8.0,
            y + bar,
            11.0,
            "end",
            &format!("cluster {c} (n={}) avg {mean:.3}", members.len()),
        );
        for (_, s, _) in members {
            let (x0, x1) = if *s >= 0.0 { (x(0.0), x(*s)) } else { (x(*s), x(0.0)) };
            svg.rect(x0, y, x1 - x0, bar - 2.0, color(c));
            y += bar;
        }
        y += gap_between;
    }
    svg.line(x(0.0), top - 5.0, x(0.0), y, "#333", false);
    svg.line(x(summary.overall), top - 5.0, x(summary.overall), y, "#c00", true);
    svg.text(
        x(summary.overall),
        y + 14.0,
        11.0,
        "middle",
        &format!("overall average {:.3}", summary.overall),
    );
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        svg.text(x(t), y + 32.0, 10.0, "middle", &format!("{t}"));
    }
    Some(svg.finish())
}

fn legend(svg: &mut Svg, names: &[String], y: f64) {
    let mut x = 10.0;
    for (j, n) in names.iter().enumerate() {
        svg.rect(x, y - 9.0, 10.0, 10.0, color(j));
        svg.text(x + 14.0, y, 11.0, "start", n);
        x += 24.0 + 7.0 * n.chars().count() as f64;
    }
}

/// Neuron profiles as bars centered on the global mean, one cell per neuron.
pub fn barplot(som: &SomSection) -> String {
    let (rows, cols) = (som.parameters.grid_rows, som.parameters.grid_cols);
    let (cw, ch, top) = (150.0, 110.0, 30.0);
    let mut svg = Svg::new(cols as f64 * cw + 20.0, rows as f64 * ch + top + 40.0);
    svg.text(10.0, 18.0, 13.0, "start", "Quadrant profiles (deviation from global mean)");
    let scale = som
        .quadrant_profiles
        .iter()
        .flat_map(|q| q.deviation.iter())
        .fold(0.0f64, |m, d| m.max(d.abs()));
    let m = som.feature_names.len().max(1);
    for q in &som.quadrant_profiles {
        let (x0, y0) = (10.0 + q.col as f64 * cw, top + q.row as f64 * ch);
        let fill = if q.empty { "#e5e5e5" } else { "#fafafa" };
        svg.outline(x0, y0, cw - 6.0, ch - 6.0, fill);
        svg.text(x0 + 4.0, y0 + 12.0, 10.0, "start", &format!("{} (n={})", q.neuron, q.case_count));
        if q.empty {
            svg.text(x0 + (cw - 6.0) / 2.0, y0 + ch / 2.0, 10.0, "middle", "empty");
            continue;
        }
        let base = y0 + 16.0 + (ch - 26.0) / 2.0;
        let half = (ch - 26.0) / 2.0 - 2.0;
        svg.line(x0 + 4.0, base, x0 + cw - 10.0, base, "#555", false);
        let bw = (cw - 20.0) / m as f64;
        for (j, d) in q.deviation.iter().enumerate() {
            let h = if scale > 0.0 { d / scale * half } else { 0.0 };
            let (y, hh) = if h >= 0.0 { (base - h, h) } else { (base, -h) };
            svg.rect(x0 + 8.0 + j as f64 * bw, y, bw * 0.8, hh, color(j));
        }
    }
    legend(&mut svg, &som.feature_names, rows as f64 * ch + top + 20.0);
    svg.finish()
}

/// Tukey box plots per neuron; each feature is drawn on its own range.
pub fn boxplot(som: &SomSection) -> Option<String> {
    if som.boxplot.is_empty() {
        return None;
    }
    let (rows, cols) = (som.parameters.grid_rows, som.parameters.grid_cols);
    let (cw, ch, top) = (150.0, 110.0, 30.0);
    let mut svg = Svg::new(cols as f64 * cw + 20.0, rows as f64 * ch + top + 40.0);
    svg.text(10.0, 18.0, 13.0, "start", "Feature distributions by quadrant (each feature on its own range)");
    let m = som.feature_names.len().max(1);
    let ranges: Vec<(f64, f64)> = som
        .feature_names
        .iter()
        .map(|f| {
            som.boxplot
                .iter()
                .filter(|b| &b.feature == f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| (lo.min(b.min), hi.max(b.max)))
        })
        .collect();
    for q in &som.quadrant_profiles {
        let (x0, y0) = (10.0 + q.col as f64 * cw, top + q.row as f64 * ch);
        svg.outline(x0, y0, cw - 6.0, ch - 6.0, if q.empty { "#e5e5e5" } else { "#fafafa" });
        svg.text(x0 + 4.0, y0 + 12.0, 10.0, "start", &q.neuron.to_string());
    }
    for b in &som.boxplot {
        let Some(j) = som.feature_names.iter().position(|f| f == &b.feature) else {
            continue;
        };
        let Some(q) = som.quadrant_profiles.get(b.neuron) else {
            continue;
        };
        let (x0, y0) = (10.0 + q.col as f64 * cw, top + q.row as f64 * ch);
        let (lo, hi) = ranges[j];
        let span = if hi > lo { hi - lo } else { 1.0 };
        let plot_top = y0 + 18.0;
        let plot_h = ch - 30.0;
        let y = |v: f64| plot_top + plot_h - (v - lo) / span * plot_h;
        let bw = (cw - 20.0) / m as f64;
        let cx = x0 + 8.0 + j as f64 * bw + bw * 0.4;
        svg.line(cx, y(b.lower_whisker), cx, y(b.upper_whisker), "#333", false);
        svg.rect(cx - bw * 0.3, y(b.upper_hinge), bw * 0.6, y(b.lower_hinge) - y(b.upper_hinge), color(j));
        svg.line(cx - bw * 0.3, y(b.median), cx + bw * 0.3, y(b.median), "#000", false);
        for o in &b.outliers {
            let _ = writeln!(svg.body, r##"<circle cx="{cx:.2}" cy="{:.2}" r="2" fill="none" stroke="#333"/>"##, y(*o));
        }
    }
    legend(&mut svg, &som.feature_names, rows as f64 * ch + top + 20.0);
    Some(svg.finish())
}

/// BMU frequency histogram of one sensitivity run.
pub fn sensitivity(hist: &SensitivityHistogram, n_neurons: usize) -> String {
    let (left, top, plot_w, plot_h) = (50.0, 40.0, 480.0, 200.0);
    let mut svg = Svg::new(left + plot_w + 30.0, top + plot_h + 50.0);
    svg.text(
        left + plot_w / 2.0,
        20.0,
        13.0,
        "middle",
        &format!("Sensitivity, cluster {} ({} samples, seed {})", hist.cluster, hist.n_samples, hist.seed),
    );
    let max = hist.counts.values().copied().max().unwrap_or(1).max(1) as f64;
    let n = n_neurons.max(hist.counts.keys().map(|k| k + 1).max().unwrap_or(1));
    let bw = plot_w / n as f64;
    for i in 0..n {
        let c = hist.counts.get(&i).copied().unwrap_or(0) as f64;
        let h = c / max * plot_h;
        svg.rect(left + i as f64 * bw + 1.0, top + plot_h - h, bw - 2.0, h, color(0));
        svg.text(left + (i as f64 + 0.5) * bw, top + plot_h + 14.0, 10.0, "middle", &i.to_string());
        if c > 0.0 {
            svg.text(left + (i as f64 + 0.5) * bw, top + plot_h - h - 3.0, 10.0, "middle", &format!("{c}"));
        }
    }
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#333", false);
    svg.text(left + plot_w / 2.0, top + plot_h + 34.0, 11.0, "middle", "neuron");
    svg.finish()
}

/// Every plot the report supports, as `(file name, svg)`.
pub fn render_all(report: &SessionReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if let Some(km) = &report.kmeans {
        if let Some(s) = silhouette(km) {
            out.push(("silhouette.svg".to_string(), s));
        }
    }
    if let Some(som) = &report.som {
        out.push(("som_barplot.svg".to_string(), barplot(som)));
        if let Some(b) = boxplot(som) {
            out.push(("som_boxplot.svg".to_string(), b));
        }
    }
    if let Some(sc) = &report.scenario {
        let n = report
            .som
            .as_ref()
            .map(|s| s.parameters.grid_rows * s.parameters.grid_cols)
            .unwrap_or(0);
        for (i, h) in sc.sensitivity.iter().enumerate() {
            out.push((format!("sensitivity_{i}.svg"), sensitivity(h, n)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_is_escaped() {
        assert_eq!(esc("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
