//! CSV logs, per-episode summaries and a minimal SVG line plotter.

use std::io::Write;

use crate::error::{Error, Result};
use crate::log::TrainLog;

/// Bit-exact header of per-run CSVs.
pub const LOG_HEADER: [&str; 7] = ["seed", "episode", "reward", "steps", "epsilon", "alpha", "w1_diag"];
pub const SUMMARY_HEADER: [&str; 4] = ["episode", "n_seeds", "mean", "std"];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes rows ordered by `(seed, episode)`; an absent diagnostic is an
/// empty field. Floats use the shortest round-trip representation.
pub fn write_log_csv<W: Write>(logs: &[&TrainLog], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(LOG_HEADER).map_err(csv_err)?;
    let mut sorted: Vec<&TrainLog> = logs.to_vec();
    sorted.sort_by_key(|l| l.seed);
    for log in sorted {
        for r in &log.rows {
            out.write_record([
                r.seed.to_string(),
                r.episode.to_string(),
                r.reward.to_string(),
                r.steps.to_string(),
                r.epsilon.to_string(),
                r.alpha.to_string(),
                r.w1_diag.map(|w| w.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Mean and sample standard deviation of per-episode reward across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub episode: usize,
    pub n_seeds: usize,
    pub mean: f64,
    /// `n - 1` denominator; 0 when only one seed reached this episode.
    pub std: f64,
}

/// Mean and sample std of `xs`; std is 0 for fewer than two values.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn summarize(logs: &[&TrainLog]) -> Vec<SummaryRow> {
    let longest = logs.iter().map(|l| l.rows.len()).max().unwrap_or(0);
    (0..longest)
        .map(|e| {
            let xs: Vec<f64> = logs.iter().filter_map(|l| l.rows.get(e)).map(|r| r.reward).collect();
            let (mean, std) = mean_std(&xs);
            SummaryRow { episode: e, n_seeds: xs.len(), mean, std }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in rows {
        out.write_record([r.episode.to_string(), r.n_seeds.to_string(), r.mean.to_string(), r.std.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// One curve with an optional ±band.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub band: Option<Vec<f64>>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Renders series on shared axes as a standalone SVG document.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, left, right, top, bottom) = (720.0, 420.0, 70.0, 20.0, 40.0, 50.0);
    let finite = |v: f64| v.is_finite();
    let mut xs = vec![];
    let mut ys = vec![];
    for s in series {
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let b = s.band.as_ref().map_or(0.0, |b| b[i]);
            if finite(x) && finite(y) && finite(b) {
                xs.push(x);
                ys.push(y - b);
                ys.push(y + b);
            }
        }
    }
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (true, true) => (lo, hi),
            (true, false) => (lo - 1.0, lo + 1.0),
            _ => (0.0, 1.0),
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        w / 2.0,
        escape(title)
    );
    svg += &format!(
        "<line x1=\"{left}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{b}\" stroke=\"black\"/>\n",
        b = h - bottom,
        r = w - right
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        svg += &format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n", px(fx), h - bottom + 16.0, tick(fx));
        svg += &format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n", left - 6.0, py(fy) + 4.0, tick(fy));
    }
    svg += &format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n", w / 2.0, h - 10.0, escape(x_label));
    svg += &format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(usize, f64, f64)> =
            s.points.iter().enumerate().filter(|(_, p)| finite(p.0) && finite(p.1)).map(|(i, p)| (i, p.0, p.1)).collect();
        if let Some(band) = &s.band {
            let upper = pts.iter().map(|&(i, x, y)| format!("{:.2},{:.2}", px(x), py(y + band[i])));
            let lower = pts.iter().rev().map(|&(i, x, y)| format!("{:.2},{:.2}", px(x), py(y - band[i])));
            let poly: Vec<String> = upper.chain(lower).collect();
            svg += &format!("<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n", poly.join(" "));
        }
        let line: Vec<String> = pts.iter().map(|&(_, x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        svg += &format!("<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n", line.join(" "));
        svg += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
            left + 10.0,
            top + 14.0 * (k as f64 + 1.0),
            escape(&s.label)
        );
    }
    svg += "</svg>\n";
    svg
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::EpisodeRecord;

    fn log(seed: u64, rewards: &[f64]) -> TrainLog {
        let mut l = TrainLog::new(seed);
        for (episode, &reward) in rewards.iter().enumerate() {
            l.rows.push(EpisodeRecord {
                seed,
                episode,
                reward,
                steps: 1,
                epsilon: 0.5,
                alpha: 0.1,
                w1_diag: (episode == 1).then_some(2.5),
                truncated: false,
            });
        }
        l
    }

    #[test]
    fn csv_header_and_rows() {
        let (a, b) = (log(1, &[1.0, 2.0]), log(0, &[-0.5]));
        let mut buf = Vec::new();
        write_log_csv(&[&a, &b], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "seed,episode,reward,steps,epsilon,alpha,w1_diag\n0,0,-0.5,1,0.5,0.1,\n1,0,1,1,0.5,0.1,\n1,1,2,1,0.5,0.1,2.5\n"
        );
    }

    #[test]
    fn summary_uses_sample_std() {
        let (a, b) = (log(0, &[1.0, 5.0]), log(1, &[3.0]));
        let s = summarize(&[&a, &b]);
        assert_eq!(s[0], SummaryRow { episode: 0, n_seeds: 2, mean: 2.0, std: 2f64.sqrt() });
        assert_eq!(s[1], SummaryRow { episode: 1, n_seeds: 1, mean: 5.0, std: 0.0 });
    }

    #[test]
    fn svg_is_well_formed() {
        let s = Series { label: "a<b".into(), points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)], band: Some(vec![0.5; 3]) };
        let svg = line_plot_svg("t", "x", "y", &[s]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a&lt;b") && !svg.contains("NaN"));
    }
}
