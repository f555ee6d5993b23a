//! SVG figures: topic scatter, per-topic word bars and the K sweep.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::topic_eval::SweepRow;
use crate::topic_rep::Topic;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];
const NOISE_COLOR: &str = "#c8c8c8";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn color(label: i64) -> &'static str {
    if label < 0 {
        NOISE_COLOR
    } else {
        PALETTE[label as usize % PALETTE.len()]
    }
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn extent(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// 2-D points colored by label; noise drawn first, in gray.
pub fn scatter_svg(points: &[[f64; 2]], labels: &[i64], title: &str) -> Result<String> {
    if points.len() != labels.len() {
        return Err(Error::invalid("scatter needs one label per point"));
    }
    let (w, h, m) = (640.0, 520.0, 40.0);
    let (x0, x1) = extent(points.iter().map(|p| p[0]));
    let (y0, y1) = extent(points.iter().map(|p| p[1]));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = header(w, h);
    let _ = writeln!(s, "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>", w / 2.0, escape(title));
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (labels[i] >= 0, labels[i], i));
    for i in order {
        let _ = writeln!(
            s,
            "<circle class=\"point\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.8\" data-topic=\"{}\"/>",
            sx(points[i][0]),
            sy(points[i][1]),
            color(labels[i]),
            labels[i]
        );
    }
    let mut seen: Vec<i64> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    for (row, l) in seen.iter().enumerate() {
        let y = 40.0 + 14.0 * row as f64;
        let name = if *l < 0 { "noise".to_string() } else { format!("topic {l}") };
        let _ = writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>", w - 90.0, y - 4.0, color(*l));
        let _ = writeln!(s, "<text x=\"{}\" y=\"{y}\">{name}</text>", w - 80.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// One horizontal bar chart per topic, bars sorted as in the topic's word list.
pub fn bars_svg(topics: &[Topic], top_n: usize) -> Result<String> {
    let topics: Vec<&Topic> = topics.iter().filter(|t| t.id >= 0).collect();
    if topics.is_empty() {
        return Err(Error::invalid("no non-noise topics to plot"));
    }
    let cols = topics.len().min(4);
    let rows = topics.len().div_ceil(cols);
    let (pw, ph) = (260.0, 40.0 + 18.0 * top_n as f64);
    let (w, h) = (pw * cols as f64, ph * rows as f64);
    let mut s = header(w, h);
    for (k, t) in topics.iter().enumerate() {
        let ox = pw * (k % cols) as f64;
        let oy = ph * (k / cols) as f64;
        let _ = writeln!(s, "<g class=\"topic\" data-topic=\"{}\">", t.id);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"13\">Topic {}</text>", ox + 10.0, oy + 20.0, t.id);
        let words: Vec<_> = t.words.iter().take(top_n).collect();
        let max = words.iter().map(|w| w.weight.abs()).fold(0.0f64, f64::max).max(1e-12);
        for (i, wd) in words.iter().enumerate() {
            let y = oy + 32.0 + 18.0 * i as f64;
            let len = 130.0 * wd.weight.abs() / max;
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                ox + 110.0,
                y + 11.0,
                escape(&wd.term)
            );
            let _ = writeln!(
                s,
                "<rect class=\"bar\" x=\"{}\" y=\"{y}\" width=\"{len:.2}\" height=\"13\" fill=\"{}\"><title>{:.4}</title></rect>",
                ox + 115.0,
                color(t.id),
                wd.weight
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Topic diversity and C_v against K on a shared [0, 1] axis.
pub fn sweep_svg(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("sweep has no rows"));
    }
    let (w, h, m) = (640.0, 400.0, 50.0);
    let (k0, k1) = extent(rows.iter().map(|r| r.k as f64));
    let (v0, v1) = extent(
        rows.iter()
            .flat_map(|r| [r.topic_diversity, r.coherence_cv])
            .chain([0.0, 1.0]),
    );
    let sx = |k: f64| m + (k - k0) / (k1 - k0) * (w - 2.0 * m);
    let sy = |v: f64| h - m - (v - v0) / (v1 - v0) * (h - 2.0 * m);
    let mut s = header(w, h);
    let _ = writeln!(
        s,
        "<line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{}\" stroke=\"black\"/>",
        h - m,
        w - m,
        h - m,
        h - m
    );
    for r in rows {
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>", sx(r.k as f64), h - m + 16.0, r.k);
    }
    for v in [v0, (v0 + v1) / 2.0, v1] {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{v:.2}</text>", m - 6.0, sy(v) + 4.0);
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">K</text>", w / 2.0, h - 12.0);
    let series: [(&str, &str, fn(&SweepRow) -> f64); 2] = [
        ("topic diversity", "#e377c2", |r| r.topic_diversity),
        ("coherence C_v", "#8b0000", |r| r.coherence_cv),
    ];
    for (i, (name, col, f)) in series.iter().enumerate() {
        let pts: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", sx(r.k as f64), sy(f(r)))).collect();
        let _ = writeln!(
            s,
            "<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"{col}\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
        let y = 20.0 + 14.0 * i as f64;
        let _ = writeln!(s, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{col}\" stroke-width=\"2\"/>", w - 170.0, y - 4.0, w - 150.0, y - 4.0);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{y}\">{name}</text>", w - 145.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topic_rep::TopicWord;

    #[test]
    fn one_topic_has_top_n_bars() {
        let t = Topic {
            id: 0,
            size: 3,
            words: (0..15)
                .map(|i| TopicWord {
                    term: format!("w{i}"),
                    weight: 1.0 / (i + 1) as f64,
                })
                .collect(),
            representative_docs: vec![],
        };
        let svg = bars_svg(&[t], 15).unwrap();
        assert_eq!(svg.matches("class=\"bar\"").count(), 15);
    }

    #[test]
    fn scatter_colors_noise_gray() {
        let svg = scatter_svg(&[[0.0, 0.0], [1.0, 1.0]], &[-1, 0], "t").unwrap();
        assert_eq!(svg.matches("class=\"point\"").count(), 2);
        assert!(svg.contains(NOISE_COLOR));
    }

    #[test]
    fn sweep_has_two_series() {
        let rows = vec![
            SweepRow { k: 2, topic_diversity: 0.9, coherence_cv: 0.5 },
            SweepRow { k: 3, topic_diversity: 0.8, coherence_cv: 0.6 },
        ];
        assert_eq!(sweep_svg(&rows).unwrap().matches("class=\"series\"").count(), 2);
        assert!(sweep_svg(&[]).is_err());
    }

    #[test]
    fn text_is_escaped() {
        assert_eq!(escape("a<b>&\""), "a&lt;b&gt;&amp;&quot;");
    }
}
