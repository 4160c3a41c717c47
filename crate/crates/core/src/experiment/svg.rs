//! Minimal static SVG charts for the four figure panels. Every panel is
//! drawn from the CSV files of a run directory and nothing else.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::config::Panel;
use super::table::read_table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Line,
    Dots,
    LineDots,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub mark: Mark,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Horizontal reference lines `(y, colour)`.
    pub hlines: Vec<(f64, &'static str)>,
    /// Vertical markers `(x, label, colour)`.
    pub vlines: Vec<(f64, String, &'static str)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

impl Chart {
    fn y_value(&self, y: f64) -> Option<f64> {
        if !y.is_finite() {
            return None;
        }
        if self.log_y {
            (y > 0.0).then(|| y.log10())
        } else {
            Some(y)
        }
    }

    pub fn render(&self) -> String {
        let xs: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(self.vlines.iter().map(|v| v.0))
            .filter(|x| x.is_finite())
            .collect();
        let ys: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().filter_map(|p| self.y_value(p.1)))
            .collect();
        let (mut x0, mut x1) = bounds(&xs);
        let (mut y0, mut y1) = bounds(&ys);
        if self.log_y {
            y0 = y0.floor();
            y1 = y1.ceil();
        }
        if x1 <= x0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 <= y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        // x ticks
        let step = nice_step(x1 - x0).max(1.0);
        let mut t = (x0 / step).ceil() * step;
        while t <= x1 + 1e-9 {
            let px = sx(t);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#ccc"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                TOP,
                TOP + ph,
                TOP + ph + 16.0,
                t
            );
            t += step;
        }
        // y ticks
        let ystep = if self.log_y {
            ((y1 - y0) / 8.0).ceil().max(1.0)
        } else {
            nice_step(y1 - y0)
        };
        let mut t = (y0 / ystep).ceil() * ystep;
        while t <= y1 + 1e-9 {
            let py = sy(t);
            let label = if self.log_y { format!("1e{}", t as i64) } else { format!("{t}") };
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ccc"/><text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                py + 4.0
            );
            t += ystep;
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for &(y, color) in &self.hlines {
            if let Some(v) = self.y_value(y).filter(|v| *v >= y0 && *v <= y1) {
                let py = sy(v);
                let _ = writeln!(
                    s,
                    r#"<line x1="{LEFT}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="{color}" stroke-dasharray="2,3"/>"#,
                    LEFT + pw
                );
            }
        }
        for (x, label, color) in &self.vlines {
            let px = sx(*x);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.1}" y1="{TOP}" x2="{px:.1}" y2="{:.1}" stroke="{color}" stroke-dasharray="6,4"/><text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
                TOP + ph,
                px + 3.0,
                TOP + 14.0,
                escape(label)
            );
        }

        for (i, series) in self.series.iter().enumerate() {
            let pts: Vec<Option<(f64, f64)>> = series
                .points
                .iter()
                .map(|&(x, y)| self.y_value(y).filter(|_| x.is_finite()).map(|v| (sx(x), sy(v))))
                .collect();
            if matches!(series.mark, Mark::Line | Mark::LineDots) {
                // Gaps in the data split the polyline.
                for run in pts.split(|p| p.is_none()).filter(|r| r.len() > 1) {
                    let coords: Vec<String> = run.iter().flatten().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                        coords.join(" "),
                        series.color
                    );
                }
            }
            if matches!(series.mark, Mark::Dots | Mark::LineDots) {
                for (x, y) in pts.iter().flatten() {
                    let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="2.5" fill="{}"/>"#, series.color);
                }
            }
            let ly = TOP + 12.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 18.0,
                series.color,
                lx + 24.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 1.0);
    }
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn zip(x: Vec<f64>, y: Vec<f64>) -> Vec<(f64, f64)> {
    x.into_iter().zip(y).collect()
}

/// Chart for one panel, built from the CSVs in `dir`.
pub fn panel_chart(panel: Panel, dir: &Path) -> Result<Chart> {
    let analysis = || read_table(&dir.join("analysis.csv"));
    let chart = match panel {
        Panel::A => {
            let t = analysis()?;
            let k = t.column_f64("k")?;
            Chart {
                title: "(a) gamma_k and sigma_(k+1)".into(),
                x_label: "k".into(),
                y_label: "value".into(),
                log_y: true,
                series: vec![
                    Series {
                        label: "gamma_k".into(),
                        color: "#d62728",
                        mark: Mark::LineDots,
                        points: zip(k.clone(), t.column_f64("gamma")?),
                    },
                    Series {
                        label: "sigma_(k+1)".into(),
                        color: "#1f77b4",
                        mark: Mark::Line,
                        points: zip(k, t.column_f64("sigma_k1")?),
                    },
                ],
                ..Chart::default()
            }
        }
        Panel::B => {
            let ritz = read_table(&dir.join("ritz.csv"))?;
            let picard = read_table(&dir.join("picard.csv"))?;
            let k = ritz.column_f64("k")?;
            let kmax = k.iter().cloned().fold(0.0, f64::max) as usize;
            let sigma = picard.column_f64("sigma_i")?;
            Chart {
                title: "(b) Ritz values and singular values".into(),
                x_label: "k".into(),
                y_label: "value".into(),
                log_y: true,
                series: vec![
                    Series {
                        label: "theta_i^(k)".into(),
                        color: "#d62728",
                        mark: Mark::Dots,
                        points: zip(k, ritz.column_f64("theta")?),
                    },
                    Series {
                        label: "sigma_i".into(),
                        color: "#1f77b4",
                        mark: Mark::Dots,
                        points: sigma.iter().take(kmax + 1).map(|&s| (0.0, s)).collect(),
                    },
                ],
                hlines: sigma.iter().take(kmax + 1).map(|&s| (s, "#1f77b4")).collect(),
                ..Chart::default()
            }
        }
        Panel::C => {
            let t = read_table(&dir.join("decay.csv"))?;
            let k = t.column_f64("k")?;
            Chart {
                title: "(c) gamma_k and alpha_(k+1) + beta_(k+2)".into(),
                x_label: "k".into(),
                y_label: "value".into(),
                log_y: true,
                series: vec![
                    Series {
                        label: "gamma_k".into(),
                        color: "#d62728",
                        mark: Mark::LineDots,
                        points: zip(k.clone(), t.column_f64("gamma")?),
                    },
                    Series {
                        label: "alpha+beta".into(),
                        color: "#2ca02c",
                        mark: Mark::LineDots,
                        points: zip(k, t.column_f64("alpha_beta_sum")?),
                    },
                ],
                ..Chart::default()
            }
        }
        Panel::D => {
            let lsqr = read_table(&dir.join("lsqr.csv"))?;
            let tsvd = read_table(&dir.join("tsvd.csv"))?;
            let summary = read_table(&dir.join("summary.csv"))?;
            let kmax: usize = summary.lookup("kmax")?.parse().unwrap_or(usize::MAX);
            let index = |key: &str| -> Result<f64> {
                Ok(summary.lookup(key)?.parse::<f64>().unwrap_or(f64::NAN))
            };
            let tsvd_points: Vec<(f64, f64)> = zip(tsvd.column_f64("k")?, tsvd.column_f64("rel_error")?)
                .into_iter()
                .filter(|p| p.0 <= kmax as f64)
                .collect();
            Chart {
                title: "(d) relative errors of LSQR and TSVD".into(),
                x_label: "k".into(),
                y_label: "relative error".into(),
                log_y: true,
                series: vec![
                    Series {
                        label: "LSQR".into(),
                        color: "#d62728",
                        mark: Mark::LineDots,
                        points: zip(lsqr.column_f64("k")?, lsqr.column_f64("rel_error")?),
                    },
                    Series {
                        label: "TSVD".into(),
                        color: "#1f77b4",
                        mark: Mark::LineDots,
                        points: tsvd_points,
                    },
                ],
                vlines: vec![
                    (index("kstar")?, "k*".into(), "#d62728"),
                    (index("k0")?, "k0".into(), "#1f77b4"),
                ]
                .into_iter()
                .filter(|v| v.0.is_finite() && v.0 <= kmax as f64)
                .collect(),
                ..Chart::default()
            }
        }
    };
    Ok(chart)
}

/// Writes `panel_<letter>.svg` into `dir`.
pub fn render_panel(panel: Panel, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(format!("panel_{}.svg", panel.letter()));
    fs::write(&path, panel_chart(panel, dir)?.render())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_chart_skips_non_positive() {
        let chart = Chart {
            title: "t <1>".into(),
            log_y: true,
            series: vec![Series {
                label: "s".into(),
                color: "red",
                mark: Mark::LineDots,
                points: vec![(1.0, 1.0), (2.0, 0.0), (3.0, 1e-2), (4.0, 1e-3), (5.0, f64::NAN)],
            }],
            ..Chart::default()
        };
        let svg = chart.render();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("t &lt;1&gt;"));
        assert!(svg.contains(">1e-3<"));
    }
}
