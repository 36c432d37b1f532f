//! Human-readable renderings: aligned classification-report tables in the
//! usual per-class precision/recall/F1/support layout, and a vector-graphics
//! heat grid for the correlation matrix.

use pyrocast_core::dataset::Matrix;
use pyrocast_core::metrics::ClassificationReport;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Render a report in the familiar table layout:
/// class rows, then accuracy and the macro/weighted averages.
pub fn render_report_table(
    family: &str,
    report: &ClassificationReport,
    class_names: &[String],
    threshold: Option<f64>,
    auc: Option<f64>,
) -> String {
    let mut out = String::new();
    let title = match threshold {
        Some(t) => format!("{family} (threshold = {t})"),
        None => family.to_string(),
    };
    out.push_str(&format!("== {title} ==\n"));
    let name_width = class_names
        .iter()
        .map(|n| n.len())
        .max()
        .unwrap_or(5)
        .max("weighted avg".len());
    out.push_str(&format!(
        "{:<name_width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        "", "precision", "recall", "f1-score", "support"
    ));
    for (name, m) in class_names.iter().zip(&report.per_class) {
        out.push_str(&format!(
            "{name:<name_width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
            fmt(m.precision),
            fmt(m.recall),
            fmt(m.f1),
            m.support
        ));
    }
    let total: usize = report.per_class.iter().map(|m| m.support).sum();
    out.push('\n');
    out.push_str(&format!(
        "{:<name_width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        "accuracy",
        "",
        "",
        fmt(report.accuracy),
        total
    ));
    out.push_str(&format!(
        "{:<name_width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        "macro avg",
        fmt(report.macro_precision),
        fmt(report.macro_recall),
        fmt(report.macro_f1),
        total
    ));
    out.push_str(&format!(
        "{:<name_width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        "weighted avg",
        fmt(report.weighted_precision),
        fmt(report.weighted_recall),
        fmt(report.weighted_f1),
        total
    ));
    if let Some(auc) = auc {
        out.push_str(&format!("\nROC-AUC: {auc:.4}\n"));
    }
    if !report.zero_division_classes.is_empty() {
        let names: Vec<&str> = report
            .zero_division_classes
            .iter()
            .map(|&c| class_names[c].as_str())
            .collect();
        out.push_str(&format!(
            "\nnote: zero-division metrics reported as 0 for: {}\n",
            names.join(", ")
        ));
    }
    out.push('\n');
    out.push_str("row-normalized confusion (percent):\n");
    out.push_str(&format!("{:<name_width$}", "true\\pred"));
    for name in class_names {
        out.push_str(&format!("  {name:>9}"));
    }
    out.push('\n');
    for (name, row) in class_names.iter().zip(&report.confusion_pct) {
        out.push_str(&format!("{name:<name_width$}"));
        for v in row {
            out.push_str(&format!("  {:>8.2}%", v));
        }
        out.push('\n');
    }
    out
}

fn heat_color(r: f64) -> String {
    // -1 -> blue, 0 -> white, +1 -> red
    let r = r.clamp(-1.0, 1.0);
    let (red, green, blue) = if r >= 0.0 {
        (255, (255.0 * (1.0 - r)) as u8, (255.0 * (1.0 - r)) as u8)
    } else {
        ((255.0 * (1.0 + r)) as u8, (255.0 * (1.0 + r)) as u8, 255)
    };
    format!("rgb({red},{green},{blue})")
}

/// Correlation matrix as a labelled SVG heat grid.
pub fn correlation_svg(names: &[String], matrix: &Matrix) -> String {
    let n = names.len();
    let cell = 42;
    let margin = 130;
    let size = margin + n * cell + 10;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         font-family=\"monospace\" font-size=\"10\">\n"
    );
    for i in 0..n {
        for j in 0..n {
            let v = matrix.get(i, j);
            let x = margin + j * cell;
            let y = margin + i * cell;
            svg.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"{}\" stroke=\"#888\"/>\n",
                heat_color(v)
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{v:.2}</text>\n",
                x + cell / 2,
                y + cell / 2 + 4
            ));
        }
    }
    for (i, name) in names.iter().enumerate() {
        let y = margin + i * cell + cell / 2 + 4;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\">{name}</text>\n",
            margin - 6
        ));
        let x = margin + i * cell + cell / 2;
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"start\" \
             transform=\"rotate(-60 {x} {})\">{name}</text>\n",
            margin - 6,
            margin - 6
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
