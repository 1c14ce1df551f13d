//! Standalone SVG bar charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"];

pub struct Series {
    pub name: String,
    /// One value per category; `None` leaves a gap.
    pub values: Vec<Option<f64>>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grouped bar chart with a y axis from 0 to `y_max`.
pub fn bar_chart(title: &str, categories: &[String], series: &[Series], y_max: f64) -> String {
    let mut s = String::new();
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let base = HEIGHT - MARGIN;
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let y = base - plot_h * i as f64 / 4.0;
        writeln!(s, r##"<line x1="{MARGIN}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, WIDTH - MARGIN).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#, MARGIN - 4.0, y + 4.0).unwrap();
    }
    let groups = categories.len().max(1) as f64;
    let group_w = plot_w / groups;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (g, label) in categories.iter().enumerate() {
        let gx = MARGIN + group_w * g as f64 + group_w * 0.1;
        for (k, ser) in series.iter().enumerate() {
            if let Some(Some(v)) = ser.values.get(g) {
                let h = (v / y_max).clamp(0.0, 1.0) * plot_h;
                writeln!(
                    s,
                    r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="{}"><title>{}: {v:.2}</title></rect>"#,
                    gx + bar_w * k as f64,
                    base - h,
                    bar_w,
                    COLORS[k % COLORS.len()],
                    escape(&ser.name)
                )
                .unwrap();
            }
        }
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            gx + group_w * 0.4,
            base + 16.0,
            escape(label)
        )
        .unwrap();
    }
    writeln!(s, r#"<line x1="{MARGIN}" y1="{base}" x2="{:.1}" y2="{base}" stroke="black"/>"#, WIDTH - MARGIN).unwrap();
    for (k, ser) in series.iter().enumerate() {
        let y = 40.0 + 14.0 * k as f64;
        writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - MARGIN - 110.0,
            y - 9.0,
            COLORS[k % COLORS.len()],
            WIDTH - MARGIN - 96.0,
            y,
            escape(&ser.name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
