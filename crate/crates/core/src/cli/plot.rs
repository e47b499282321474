//! Minimal SVG line chart (one polyline over a fixed viewBox).

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;
/// Values below this are clamped on a log axis.
const LOG_FLOOR: f64 = 1e-8;

/// Renders `ys` against `xs`; with `log_y` the vertical axis is `log10`.
pub fn line_chart_svg(xs: &[f64], ys: &[f64], title: &str, x_label: &str, y_label: &str, log_y: bool) -> String {
    let tf = |y: f64| if log_y { y.max(LOG_FLOOR).log10() } else { y };
    let finite = |v: &f64| v.is_finite();
    let (x_min, x_max) = bounds(xs.iter().copied().filter(finite));
    let (mut y_min, mut y_max) = bounds(ys.iter().copied().filter(finite).map(tf));
    if log_y {
        y_min = y_min.floor();
        y_max = y_max.ceil();
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min).max(f64::MIN_POSITIVE) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (tf(y) - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    // y ticks: decades on a log axis, 5 even ticks otherwise
    let ticks: Vec<f64> = if log_y {
        (y_min as i32..=y_max as i32).map(f64::from).collect()
    } else {
        (0..=4).map(|k| y_min + (y_max - y_min) * f64::from(k) / 4.0).collect()
    };
    for t in ticks {
        let py = MARGIN_TOP + (1.0 - (t - y_min) / (y_max - y_min)) * plot_h;
        let label = if log_y { format!("1e{t}") } else { format!("{t:.3}") };
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            py + 4.0
        );
    }
    for k in 0..=4 {
        let x = x_min + (x_max - x_min) * f64::from(k) / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x:.3}</text>"#,
            sx(x),
            MARGIN_TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    );

    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ =
        writeln!(svg, r##"<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>"##, points.join(" "));
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polyline() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 0.1, 0.0];
        let svg = line_chart_svg(&xs, &ys, "e_tot <a>", "t", "e", true);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("e_tot &lt;a&gt;"));
        assert!(svg.matches(',').count() >= 3);
        let linear = line_chart_svg(&xs, &ys, "t", "x", "y", false);
        assert!(linear.contains("<polyline"));
        // degenerate input still renders
        assert!(line_chart_svg(&[], &[], "", "", "", true).ends_with("</svg>\n"));
    }
}
