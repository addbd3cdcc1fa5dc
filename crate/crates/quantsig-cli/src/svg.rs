//! Hand-written SVG line charts — no plotting dependency, bit-reproducible.
//!
//! Coordinates print with two decimals so the output is stable across
//! runs; the documents are single-root XML with no external references,
//! so they open in any browser or embed in any page as-is.

use std::fmt::Write as _;

const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22",
];

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Evenly spaced tick values from `lo` to `hi` inclusive.
fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn polyline_points(xs: &[f64], ys: &[f64]) -> String {
    let mut out = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let _ = write!(out, "{x:.2},{y:.2} ");
    }
    out.trim_end().to_string()
}

/// Predicted-vs-actual closing price over the test split: solid blue
/// predicted line, dashed green actual line, date labels at the ends and
/// midpoint of the x axis.
pub fn price_chart(dates: &[String], actual: &[f64], predicted: &[f64]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 450.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 20.0;
    const B: f64 = 50.0;
    let n = actual.len();
    let plot_w = W - L - R;
    let plot_h = H - T - B;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in actual.iter().chain(predicted) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() || lo == hi {
        // degenerate input still renders: pad a flat band around the value
        let center = if lo.is_finite() { lo } else { 0.0 };
        lo = center - 1.0;
        hi = center + 1.0;
    }
    let pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;

    let x_at = |i: usize| L + plot_w * i as f64 / (n.max(2) - 1) as f64;
    let y_at = |v: f64| T + plot_h * (1.0 - (v - lo) / (hi - lo));

    let xs: Vec<f64> = (0..n).map(x_at).collect();
    let actual_ys: Vec<f64> = actual.iter().map(|&v| y_at(v)).collect();
    let predicted_ys: Vec<f64> = predicted.iter().map(|&v| y_at(v)).collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>");

    // horizontal grid + y labels
    for v in ticks(lo + pad, hi - pad, 5) {
        let y = y_at(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{L}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>",
            W - R
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.2}</text>",
            L - 6.0,
            y + 4.0
        );
    }

    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{L}\" y1=\"{T}\" x2=\"{L}\" y2=\"{:.2}\" stroke=\"#333333\"/>",
        H - B
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{L}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#333333\"/>",
        H - B,
        W - R,
        H - B
    );

    // x labels: first, middle, last date
    if n > 0 {
        for (i, anchor) in [(0usize, "start"), (n / 2, "middle"), (n - 1, "end")] {
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"{anchor}\">{}</text>",
                x_at(i),
                H - B + 18.0,
                xml_escape(&dates[i])
            );
        }
    }

    // the two series
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
        polyline_points(&xs, &actual_ys)
    );
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
        polyline_points(&xs, &predicted_ys)
    );

    // legend
    let lx = L + 12.0;
    let _ = writeln!(
        svg,
        "<line x1=\"{lx}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
        T + 14.0,
        lx + 28.0,
        T + 14.0
    );
    let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\">predicted</text>", lx + 34.0, T + 18.0);
    let _ = writeln!(
        svg,
        "<line x1=\"{lx}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#2ca02c\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
        T + 32.0,
        lx + 28.0,
        T + 32.0
    );
    let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\">actual</text>", lx + 34.0, T + 36.0);

    // axis titles
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">test day</text>",
        L + plot_w / 2.0,
        H - 8.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">close</text>",
        T + plot_h / 2.0,
        T + plot_h / 2.0
    );

    svg.push_str("</svg>\n");
    svg
}

/// One ROC trace per family plus the chance diagonal; AUC values in the
/// legend. `curves` holds (label, (fpr, tpr) points, auc).
pub fn roc_chart(curves: &[(String, Vec<(f64, f64)>, f64)]) -> String {
    const W: f64 = 680.0;
    const H: f64 = 480.0;
    const L: f64 = 60.0;
    const T: f64 = 20.0;
    const SIDE: f64 = 400.0; // square plot area

    let x_at = |fpr: f64| L + SIDE * fpr;
    let y_at = |tpr: f64| T + SIDE * (1.0 - tpr);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>");

    // frame and gridlines at 0.25 steps
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let x = x_at(frac);
        let y = y_at(frac);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{T}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            T + SIDE
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{L}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>",
            L + SIDE
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{frac:.2}</text>",
            T + SIDE + 16.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{frac:.2}</text>",
            L - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<rect x=\"{L}\" y=\"{T}\" width=\"{SIDE}\" height=\"{SIDE}\" fill=\"none\" stroke=\"#333333\"/>"
    );

    // chance diagonal
    let _ = writeln!(
        svg,
        "<line x1=\"{L}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{T}\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>",
        T + SIDE,
        L + SIDE
    );

    for (i, (label, points, auc)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let xs: Vec<f64> = points.iter().map(|&(fpr, _)| x_at(fpr)).collect();
        let ys: Vec<f64> = points.iter().map(|&(_, tpr)| y_at(tpr)).collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            polyline_points(&xs, &ys)
        );
        let ly = T + 14.0 + 20.0 * i as f64;
        let lx = L + SIDE + 20.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            lx + 24.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\">{} AUC={auc:.3}</text>",
            lx + 30.0,
            ly + 4.0,
            xml_escape(label)
        );
    }

    // axis titles
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">false positive rate</text>",
        L + SIDE / 2.0,
        H - 8.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">true positive rate</text>",
        T + SIDE / 2.0,
        T + SIDE / 2.0
    );

    svg.push_str("</svg>\n");
    svg
}
