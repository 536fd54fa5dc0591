//! Static SVG 1.1 figures. Coordinates are printed with two decimals so the
//! bytes depend only on the input data.

use std::fmt::Write;

use crate::hcluster::Dendrogram;
use crate::metrics::ConfusionMatrix;
use crate::shapley::FeatureImportance;

const PALETTE: [&str; 8] = [
    "#6a3d9a", "#33a02c", "#e31a1c", "#1f78b4", "#ff7f00", "#b15928", "#a6cee3", "#fb9a99",
];

pub fn cluster_color(label: usize) -> &'static str {
    PALETTE[label % PALETTE.len()]
}

fn open(width: f64, height: f64, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    s
}

fn close(mut s: String) -> String {
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn text(s: &mut String, x: f64, y: f64, size: f64, anchor: &str, body: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{x:.2}" y="{y:.2}" font-size="{size:.0}" text-anchor="{anchor}">{}</text>"#,
        escape(body)
    );
}

/// Linear map from `[lo, hi]` onto `[a, b]`; a degenerate range maps to the midpoint.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

fn axes(s: &mut String, left: f64, top: f64, right: f64, bottom: f64, x_range: (f64, f64), y_range: (f64, f64)) {
    let _ = writeln!(
        s,
        r#"<path d="M{left:.2},{top:.2} V{bottom:.2} H{right:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let y = bottom + f * (top - bottom);
        let x = left + f * (right - left);
        let yv = y_range.0 + f * (y_range.1 - y_range.0);
        let xv = x_range.0 + f * (x_range.1 - x_range.0);
        let _ = writeln!(s, r#"<path d="M{:.2},{y:.2} H{left:.2}" stroke="black"/>"#, left - 4.0);
        text(s, left - 6.0, y + 4.0, 10.0, "end", &format!("{yv:.2}"));
        let _ = writeln!(
            s,
            r#"<path d="M{x:.2},{bottom:.2} V{:.2}" stroke="black"/>"#,
            bottom + 4.0
        );
        text(s, x, bottom + 16.0, 10.0, "middle", &format!("{xv:.2}"));
    }
}

/// Dendrogram with leaves in recursive left-right order and one `junction`
/// path per merge. Leaves are coloured by `leaf_labels` when given.
pub fn dendrogram(d: &Dendrogram<f64>, leaf_labels: Option<&[usize]>) -> String {
    let n = d.n_leaves();
    let (width, height) = (1000.0, 500.0);
    let (left, right, top, bottom) = (60.0, 980.0, 40.0, 440.0);
    let max_h = d.merges().iter().map(|m| m.height).fold(0.0, f64::max);
    let mut s = open(width, height, "Ward dendrogram");
    text(
        &mut s,
        width / 2.0,
        24.0,
        14.0,
        "middle",
        &format!("Ward dendrogram ({n} runs)"),
    );
    axes(&mut s, left - 10.0, top, right, bottom, (0.0, 0.0), (0.0, max_h));

    let mut x = vec![0.0; n + d.merges().len()];
    let mut y = vec![bottom; n + d.merges().len()];
    for (rank, leaf) in d.leaf_order().into_iter().enumerate() {
        x[leaf] = scale(rank as f64, 0.0, (n.max(2) - 1) as f64, left, right);
    }
    for (k, m) in d.merges().iter().enumerate() {
        let id = n + k;
        x[id] = 0.5 * (x[m.left] + x[m.right]);
        y[id] = scale(m.height, 0.0, max_h, bottom, top);
        let _ = writeln!(
            s,
            r##"<path class="junction" d="M{:.2},{:.2} V{:.2} H{:.2} V{:.2}" fill="none" stroke="#333" stroke-width="1"/>"##,
            x[m.left], y[m.left], y[id], x[m.right], y[m.right]
        );
    }
    if let Some(labels) = leaf_labels {
        for (leaf, &l) in labels.iter().enumerate().take(n) {
            let _ = writeln!(
                s,
                r#"<circle class="leaf" cx="{:.2}" cy="{:.2}" r="2" fill="{}"/>"#,
                x[leaf],
                bottom + 6.0,
                cluster_color(l)
            );
        }
    }
    close(s)
}

/// Heatmap with one annotated cell per (true, predicted) pair.
pub fn confusion(cm: &ConfusionMatrix, class_names: &[String], title: &str) -> String {
    let k = cm.k();
    let cell = 80.0;
    let (left, top) = (120.0, 70.0);
    let width = left + cell * k as f64 + 40.0;
    let height = top + cell * k as f64 + 60.0;
    let max = cm.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let mut s = open(width, height, title);
    text(&mut s, width / 2.0, 24.0, 14.0, "middle", title);
    text(
        &mut s,
        left + cell * k as f64 / 2.0,
        top - 24.0,
        12.0,
        "middle",
        "predicted",
    );
    text(&mut s, 20.0, top + cell * k as f64 / 2.0, 12.0, "start", "true");
    for (i, row) in cm.counts.iter().enumerate() {
        let yc = top + cell * i as f64;
        text(&mut s, left - 8.0, yc + cell / 2.0 + 4.0, 11.0, "end", &class_names[i]);
        for (j, &c) in row.iter().enumerate() {
            let xc = left + cell * j as f64;
            if i == 0 {
                text(&mut s, xc + cell / 2.0, top - 8.0, 11.0, "middle", &class_names[j]);
            }
            let t = c as f64 / max;
            let shade = |full: f64| (255.0 - t * (255.0 - full)).round() as u8;
            let _ = writeln!(
                s,
                r##"<rect class="cell" x="{xc:.2}" y="{yc:.2}" width="{cell:.2}" height="{cell:.2}" fill="#{:02x}{:02x}{:02x}" stroke="white"/>"##,
                shade(8.0),
                shade(48.0),
                shade(107.0)
            );
            let _ = writeln!(
                s,
                r#"<text class="count" x="{:.2}" y="{:.2}" font-size="16" text-anchor="middle" fill="{}">{c}</text>"#,
                xc + cell / 2.0,
                yc + cell / 2.0 + 6.0,
                if t > 0.5 { "white" } else { "black" }
            );
        }
    }
    close(s)
}

/// Horizontal bars of mean |φ|, in the given (descending) order.
pub fn shap_bar(features: &[FeatureImportance<f64>]) -> String {
    let bar = 24.0;
    let (left, top, plot_w) = (200.0, 50.0, 520.0);
    let width = left + plot_w + 80.0;
    let height = top + bar * features.len() as f64 + 40.0;
    let max = features.iter().map(|f| f.mean_abs_shap).fold(0.0, f64::max);
    let mut s = open(width, height, "Mean absolute Shapley value");
    text(&mut s, width / 2.0, 24.0, 14.0, "middle", "Mean |SHAP value|");
    for (i, f) in features.iter().enumerate() {
        let y = top + bar * i as f64;
        let w = scale(f.mean_abs_shap, 0.0, max, 0.0, plot_w);
        text(&mut s, left - 8.0, y + bar * 0.65, 12.0, "end", &f.name);
        let _ = writeln!(
            s,
            r##"<rect class="bar" x="{left:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="#1f78b4"/>"##,
            y + 3.0,
            bar - 6.0
        );
        text(
            &mut s,
            left + w + 6.0,
            y + bar * 0.65,
            11.0,
            "start",
            &format!("{:.4}", f.mean_abs_shap),
        );
    }
    close(s)
}

/// Three scatter panels of the first three principal component scores
/// (1-2, 1-3, 2-3), points coloured by cluster.
pub fn pca_panels(scores: &[[f64; 3]], labels: &[usize], explained_ratio: &[f64; 3]) -> String {
    let panel = 300.0;
    let (margin, top) = (60.0, 50.0);
    let width = 3.0 * (panel + margin) + margin;
    let height = top + panel + 60.0;
    let mut s = open(width, height, "PCA projection of outputs");
    text(
        &mut s,
        width / 2.0,
        24.0,
        14.0,
        "middle",
        "Outputs projected on the first three principal components",
    );
    for (p, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let left = margin + p as f64 * (panel + margin);
        let (right, bottom) = (left + panel, top + panel);
        let range = |c: usize| {
            scores
                .iter()
                .map(|r| r[c])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (xr, yr) = if scores.is_empty() {
            ((0.0, 1.0), (0.0, 1.0))
        } else {
            (range(a), range(b))
        };
        axes(&mut s, left, top, right, bottom, xr, yr);
        text(
            &mut s,
            (left + right) / 2.0,
            bottom + 34.0,
            11.0,
            "middle",
            &format!(
                "PC{} ({:.1}%) vs PC{} ({:.1}%)",
                a + 1,
                100.0 * explained_ratio[a],
                b + 1,
                100.0 * explained_ratio[b]
            ),
        );
        let _ = writeln!(s, r#"<g class="panel">"#);
        for (r, &l) in scores.iter().zip(labels) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.7"/>"#,
                scale(r[a], xr.0, xr.1, left + 5.0, right - 5.0),
                scale(r[b], yr.0, yr.1, bottom - 5.0, top + 5.0),
                cluster_color(l)
            );
        }
        s.push_str("</g>\n");
    }
    close(s)
}

/// Predicted against actual values with the identity line.
pub fn pred_vs_actual(train: (&[f64], &[f64]), test: (&[f64], &[f64])) -> String {
    let (left, top, size) = (70.0, 50.0, 420.0);
    let (right, bottom) = (left + size, top + size);
    let all = train.0.iter().chain(train.1).chain(test.0).chain(test.1);
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let mut s = open(right + 150.0, bottom + 50.0, "Predicted vs actual");
    text(
        &mut s,
        (left + right) / 2.0,
        24.0,
        14.0,
        "middle",
        "Predicted vs actual",
    );
    axes(&mut s, left, top, right, bottom, (lo, hi), (lo, hi));
    let _ = writeln!(
        s,
        r##"<path d="M{left:.2},{bottom:.2} L{right:.2},{top:.2}" stroke="#999" stroke-dasharray="4 4"/>"##
    );
    for (name, (actual, predicted), color) in [("train", train, "#1f78b4"), ("test", test, "#e31a1c")] {
        let _ = writeln!(s, r#"<g class="{name}">"#);
        for (a, p) in actual.iter().zip(predicted) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}" fill-opacity="0.6"/>"#,
                scale(*a, lo, hi, left, right),
                scale(*p, lo, hi, bottom, top)
            );
        }
        s.push_str("</g>\n");
    }
    text(&mut s, right + 20.0, top + 20.0, 12.0, "start", "train");
    text(&mut s, right + 20.0, top + 40.0, 12.0, "start", "test");
    let _ = writeln!(
        s,
        r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#1f78b4"/>"##,
        right + 10.0,
        top + 16.0
    );
    let _ = writeln!(
        s,
        r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#e31a1c"/>"##,
        right + 10.0,
        top + 36.0
    );
    text(&mut s, (left + right) / 2.0, bottom + 36.0, 11.0, "middle", "actual");
    close(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hcluster::ward_linkage;
    use ndarray::array;

    #[test]
    fn three_leaf_dendrogram_has_two_junctions() {
        let d = ward_linkage(array![[0.0], [1.0], [5.0]].view()).unwrap();
        let svg = dendrogram(&d, None);
        assert_eq!(svg.matches(r#"class="junction""#).count(), 2);
        // the first merge sits below the second: larger y in SVG coordinates
        let ys: Vec<f64> = svg
            .lines()
            .filter(|l| l.contains("junction"))
            .map(|l| {
                let d = l.split(" d=\"").nth(1).unwrap();
                d.split(" V")
                    .nth(1)
                    .unwrap()
                    .split(' ')
                    .next()
                    .unwrap()
                    .parse()
                    .unwrap()
            })
            .collect();
        assert!(ys[0] > ys[1]);
        assert_eq!(svg, dendrogram(&d, None));
    }

    #[test]
    fn two_by_two_confusion_has_four_annotated_cells() {
        let cm = ConfusionMatrix {
            counts: vec![vec![2, 1], vec![1, 2]],
        };
        let names = vec!["0".to_string(), "1".to_string()];
        let svg = confusion(&cm, &names, "test");
        assert_eq!(svg.matches(r#"class="cell""#).count(), 4);
        assert_eq!(svg.matches(r#"class="count""#).count(), 4);
        assert!(svg.contains(">2</text>") && svg.contains(">1</text>"));
        assert_eq!(svg, confusion(&cm, &names, "test"));
    }

    #[test]
    fn bars_follow_given_order_and_escape_names() {
        let f = vec![
            FeatureImportance {
                name: "a<b".into(),
                mean_abs_shap: 2.0,
            },
            FeatureImportance {
                name: "c".into(),
                mean_abs_shap: 1.0,
            },
        ];
        let svg = shap_bar(&f);
        assert_eq!(svg.matches(r#"class="bar""#).count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.find("a&lt;b").unwrap() < svg.find(">c<").unwrap());
    }

    #[test]
    fn documents_are_closed() {
        let svg = pca_panels(&[[0.0, 1.0, 2.0], [1.0, 0.0, -1.0]], &[0, 1], &[0.5, 0.3, 0.2]);
        assert!(svg.starts_with("<?xml") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches(r#"class="panel""#).count(), 3);
        let svg = pred_vs_actual((&[1.0, 2.0], &[1.1, 1.9]), (&[3.0], &[2.5]));
        assert!(svg.ends_with("</svg>\n"));
    }
}
