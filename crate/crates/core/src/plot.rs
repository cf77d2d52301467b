//! Self-contained SVG renderings of ranking results.
//!
//! Every function returns a complete `<svg>` document as a string, built
//! with fixed-precision coordinates so the same input always yields the
//! same bytes. No fonts or styles are referenced beyond generic families.

const FONT: &str = "font-family=\"sans-serif\"";

fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.0} {height:.0}\" \
         width=\"{width:.0}\" height=\"{height:.0}\">\n\
         <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>\n"
    )
}

/// Horizontal bar chart, one bar per (label, value); values must be
/// non-negative. Bars scale to the maximum value.
pub fn bar_chart(title: &str, entries: &[(String, f64)]) -> String {
    let label_w = 170.0;
    let bar_w = 380.0;
    let row_h = 24.0;
    let top = 40.0;
    let width = label_w + bar_w + 90.0;
    let height = top + entries.len() as f64 * row_h + 16.0;
    let max = entries.iter().map(|e| e.1).fold(0.0f64, f64::max);

    let mut svg = svg_open(width, height);
    svg.push_str(&format!(
        "<text x=\"16\" y=\"24\" {FONT} font-size=\"16\">{}</text>\n",
        esc(title)
    ));
    for (i, (label, value)) in entries.iter().enumerate() {
        let y = top + i as f64 * row_h;
        let w = if max > 0.0 { value / max * bar_w } else { 0.0 };
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            label_w - 8.0,
            y + 15.0,
            esc(label)
        ));
        svg.push_str(&format!(
            "<rect x=\"{label_w:.1}\" y=\"{:.1}\" width=\"{w:.2}\" height=\"{:.1}\" fill=\"#4878a8\"/>\n",
            y + 3.0,
            row_h - 8.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} font-size=\"12\">{}</text>\n",
            label_w + w + 6.0,
            y + 15.0,
            format_value(*value)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Human-facing number: whole values lose the fraction, others keep four
/// decimals.
pub fn format_value(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{:.0}", v.round())
    } else {
        format!("{v:.4}")
    }
}

/// Triangle of three scores in [0, 1] on axes 120° apart, drawn inside
/// the unit triangle they are measured against.
pub fn score_triangle(title: &str, axes: &[(String, f64); 3]) -> String {
    let size = 420.0;
    let cx = size / 2.0;
    let cy = size / 2.0 + 16.0;
    let r = 150.0;
    // axis directions: up, lower-left, lower-right
    let dirs = [(0.0f64, -1.0f64), (-0.8660254, 0.5), (0.8660254, 0.5)];
    let point = |scale: f64, dir: (f64, f64)| {
        (cx + r * scale * dir.0, cy + r * scale * dir.1)
    };

    let mut svg = svg_open(size, size + 40.0);
    svg.push_str(&format!(
        "<text x=\"16\" y=\"24\" {FONT} font-size=\"16\">{}</text>\n",
        esc(title)
    ));
    let tri = |scale: f64| -> String {
        dirs.iter()
            .map(|&d| {
                let (x, y) = point(scale, d);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    svg.push_str(&format!(
        "<polygon points=\"{}\" fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n",
        tri(1.0)
    ));
    for &d in &dirs {
        let (x, y) = point(1.0, d);
        svg.push_str(&format!(
            "<line x1=\"{cx:.2}\" y1=\"{cy:.2}\" x2=\"{x:.2}\" y2=\"{y:.2}\" stroke=\"#cccccc\"/>\n"
        ));
    }
    let inner: Vec<String> = axes
        .iter()
        .zip(&dirs)
        .map(|((_, score), &d)| {
            let (x, y) = point(*score, d);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    svg.push_str(&format!(
        "<polygon points=\"{}\" fill=\"#4878a8\" fill-opacity=\"0.45\" stroke=\"#2a5788\"/>\n",
        inner.join(" ")
    ));
    for ((name, score), &d) in axes.iter().zip(&dirs) {
        let (x, y) = point(1.18, d);
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" {FONT} font-size=\"12\" text-anchor=\"middle\">{} = {}</text>\n",
            esc(name),
            format_value(*score)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Scatter plot with linear axes sized to the data; each point may carry
/// a label drawn beside it.
pub fn scatter(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64, String)],
) -> String {
    let width = 560.0;
    let height = 420.0;
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let min_max = |sel: fn(&(f64, f64, String)) -> f64| -> (f64, f64) {
        let lo = points.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        if points.is_empty() || lo == hi {
            (lo.min(0.0), hi.max(1.0))
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = min_max(|p| p.0);
    let (y0, y1) = min_max(|p| p.1);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| top + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = svg_open(width, height);
    svg.push_str(&format!(
        "<text x=\"16\" y=\"24\" {FONT} font-size=\"16\">{}</text>\n",
        esc(title)
    ));
    svg.push_str(&format!(
        "<line x1=\"{left:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{left:.1}\" y1=\"{top:.1}\" x2=\"{left:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        top + plot_h
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        left + plot_w / 2.0,
        height - 12.0,
        esc(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" {FONT} font-size=\"12\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">{}</text>\n",
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        esc(y_label)
    ));
    for (tick, value) in [(x0, x0), (x1, x1)] {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            px(tick),
            top + plot_h + 16.0,
            format_value(value)
        ));
    }
    for (tick, value) in [(y0, y0), (y1, y1)] {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            left - 6.0,
            py(tick) + 4.0,
            format_value(value)
        ));
    }
    for (x, y, label) in points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#4878a8\"/>\n",
            px(*x),
            py(*y)
        ));
        if !label.is_empty() {
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" {FONT} font-size=\"10\">{}</text>\n",
                px(*x) + 6.0,
                py(*y) - 5.0,
                esc(label)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bar_chart_is_deterministic_and_scaled() {
        let entries = vec![("a.i".to_string(), 2.0), ("b & c".to_string(), 1.0)];
        let one = bar_chart("scores", &entries);
        let two = bar_chart("scores", &entries);
        assert_eq!(one, two);
        assert!(one.starts_with("<svg "));
        assert!(one.trim_end().ends_with("</svg>"));
        // full-width bar for the max, half for the rest
        assert!(one.contains("width=\"380.00\""), "{one}");
        assert!(one.contains("width=\"190.00\""));
        assert!(one.contains("b &amp; c"));
    }

    #[test]
    fn triangle_marks_axes_and_scores() {
        let svg = score_triangle(
            "balance",
            &[
                ("schema".into(), 1.0),
                ("partitioning".into(), 0.5),
                ("storage".into(), 0.0),
            ],
        );
        assert!(svg.contains("schema = 1"));
        assert!(svg.contains("partitioning = 0.5000"));
        assert!(svg.contains("storage = 0"));
        // outer reference triangle present
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg, score_triangle("balance", &[
            ("schema".into(), 1.0),
            ("partitioning".into(), 0.5),
            ("storage".into(), 0.0),
        ]));
    }

    #[test]
    fn scatter_plots_points_with_labels() {
        let svg = scatter(
            "fronts",
            "mean runtime",
            "score",
            &[
                (1.0, 1.0, "a".to_string()),
                (2.0, 0.5, String::new()),
            ],
        );
        assert!(svg.contains("<circle"));
        assert!(svg.contains(">a</text>"));
        assert!(svg.contains("mean runtime"));
        // degenerate ranges still render
        let flat = scatter("t", "x", "y", &[(1.0, 1.0, String::new())]);
        assert!(flat.contains("<circle"));
        assert!(!flat.contains("NaN"));
        let empty = scatter("t", "x", "y", &[]);
        assert!(empty.contains("</svg>"));
        assert!(!empty.contains("NaN"));
    }
}
