//! Minimal hand-rolled SVG plots: per-class distribution bars and ROC
//! curves. Static files only; reports are consumed, not steered.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

const PALETTE: [&str; 6] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2",
];

/// Grouped bar chart of per-class record counts, one group per class and one
/// bar per set.
pub fn class_distribution_svg(class_names: &[&str], sets: &[(String, Vec<usize>)]) -> String {
    let mut out = header();
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">Class distribution</text>\n",
        WIDTH / 2.0
    ));
    let max_count = sets
        .iter()
        .flat_map(|(_, counts)| counts.iter())
        .copied()
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let group_w = plot_w / class_names.len() as f64;
    let bar_w = (group_w * 0.8) / sets.len() as f64;

    // axes
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    ));
    for (ci, name) in class_names.iter().enumerate() {
        let gx = MARGIN + ci as f64 * group_w;
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{name}</text>\n",
            gx + group_w / 2.0,
            HEIGHT - MARGIN + 18.0
        ));
        for (si, (_, counts)) in sets.iter().enumerate() {
            let h = plot_h * counts[ci] as f64 / max_count;
            let x = gx + group_w * 0.1 + si as f64 * bar_w;
            let y = HEIGHT - MARGIN - h;
            out.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"{h:.1}\" fill=\"{}\"/>\n",
                PALETTE[si % PALETTE.len()]
            ));
        }
    }
    for (si, (name, _)) in sets.iter().enumerate() {
        let y = MARGIN + 16.0 * si as f64;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n<text x=\"{}\" y=\"{}\" font-size=\"12\">{name}</text>\n",
            WIDTH - MARGIN - 110.0,
            y,
            PALETTE[si % PALETTE.len()],
            WIDTH - MARGIN - 94.0,
            y + 10.0
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// ROC curves, one polyline per labeled curve of (fpr, tpr) points.
pub fn roc_svg(title: &str, curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = header();
    let plot = |fpr: f64, tpr: f64| -> (f64, f64) {
        (
            MARGIN + fpr * (WIDTH - 2.0 * MARGIN),
            HEIGHT - MARGIN - tpr * (HEIGHT - 2.0 * MARGIN),
        )
    };
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    ));
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    ));
    // chance diagonal
    let (x0, y0) = plot(0.0, 0.0);
    let (x1, y1) = plot(1.0, 1.0);
    out.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y1:.1}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">FPR</text>\n",
        WIDTH / 2.0,
        HEIGHT - 12.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 16 {})\">TPR</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));
    for (i, (label, points)) in curves.iter().enumerate() {
        let path: Vec<String> = points
            .iter()
            .map(|&(f, t)| {
                let (x, y) = plot(f, t);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            PALETTE[i % PALETTE.len()],
            path.join(" ")
        ));
        let y = MARGIN + 16.0 * i as f64;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n<text x=\"{}\" y=\"{}\" font-size=\"12\">{label}</text>\n",
            WIDTH - MARGIN - 110.0,
            y,
            PALETTE[i % PALETTE.len()],
            WIDTH - MARGIN - 94.0,
            y + 10.0
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bars_render_valid_svg() {
        let svg = class_distribution_svg(
            &["NORM", "CD", "STTC", "MI", "HYP"],
            &[
                ("Set A".into(), vec![40, 30, 20, 25, 35]),
                ("Set B".into(), vec![41, 29, 20, 24, 36]),
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<rect").count(), 1 + 10 + 2); // bg + bars + legend
    }

    #[test]
    fn roc_renders_one_polyline_per_curve() {
        let svg = roc_svg(
            "Test ROC",
            &[
                ("NORM".into(), vec![(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)]),
                ("CD".into(), vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]),
            ],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("Test ROC"));
    }
}
