//! Minimal SVG line plots and histograms for campaign results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{item_verdict, CampaignReport};
use crate::displacement::{GrowthRow, RotationRow};
use crate::error::{Error, Result};
use crate::fields::rotation_sup_displacement;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: [f64; 4] = [60.0, 20.0, 30.0, 50.0]; // left, right, top, bottom

struct Canvas {
    svg: String,
    x: (f64, f64),
    y: (f64, f64),
    log_x: bool,
}

impl Canvas {
    fn new(title: &str, x: (f64, f64), y: (f64, f64), log_x: bool) -> Self {
        let mut svg = String::new();
        let _ = write!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = write!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = write!(
            svg,
            r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let mut c = Self { svg, x, y, log_x };
        c.axes();
        c
    }

    fn tx(&self, v: f64) -> f64 {
        let (lo, hi, v) = if self.log_x {
            (self.x.0.ln(), self.x.1.ln(), v.ln())
        } else {
            (self.x.0, self.x.1, v)
        };
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        MARGIN[0] + t * (W - MARGIN[0] - MARGIN[1])
    }

    fn ty(&self, v: f64) -> f64 {
        let (lo, hi) = self.y;
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        H - MARGIN[3] - t * (H - MARGIN[2] - MARGIN[3])
    }

    fn axes(&mut self) {
        let (x0, x1, y0, y1) = (MARGIN[0], W - MARGIN[1], H - MARGIN[3], MARGIN[2]);
        let _ = write!(
            self.svg,
            r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = if self.log_x {
                (self.x.0.ln() + t * (self.x.1.ln() - self.x.0.ln())).exp()
            } else {
                self.x.0 + t * (self.x.1 - self.x.0)
            };
            let yv = self.y.0 + t * (self.y.1 - self.y.0);
            let (px, py) = (self.tx(xv), self.ty(yv));
            let _ = write!(
                self.svg,
                r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                y0 + 16.0,
                tick(xv)
            );
            let _ = write!(
                self.svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                py + 4.0,
                tick(yv)
            );
        }
    }

    fn labels(&mut self, xlabel: &str, ylabel: &str) {
        let _ = write!(
            self.svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 12.0,
            escape(xlabel)
        );
        let _ = write!(
            self.svg,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, dash: bool) {
        if pts.is_empty() {
            return;
        }
        let d: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.tx(x), self.ty(y)))
            .collect();
        let dash = if dash { r#" stroke-dasharray="5,4""# } else { "" };
        let _ = write!(
            self.svg,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"{dash}/>"#,
            d.join(" ")
        );
    }

    fn markers(&mut self, pts: &[(f64, f64)], fill: &str) {
        for &(x, y) in pts {
            let _ = write!(
                self.svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}"/>"#,
                self.tx(x),
                self.ty(y)
            );
        }
    }

    fn crossing(&mut self, x: f64, y: f64) {
        let _ = write!(
            self.svg,
            r##"<circle class="crossing" data-x="{x:.6}" cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="#d62728" stroke-width="2"/>"##,
            self.tx(x),
            self.ty(y)
        );
    }

    fn vline(&mut self, x: f64, stroke: &str) {
        let (top, bottom) = (self.ty(self.y.1), self.ty(self.y.0));
        let px = self.tx(x);
        let _ = write!(
            self.svg,
            r#"<line x1="{px:.2}" y1="{top:.2}" x2="{px:.2}" y2="{bottom:.2}" stroke="{stroke}" stroke-dasharray="3,3"/>"#
        );
    }

    fn rect(&mut self, x0: f64, x1: f64, y: f64, fill: &str) {
        let (px0, px1) = (self.tx(x0), self.tx(x1));
        let (py, base) = (self.ty(y), self.ty(self.y.0));
        let _ = write!(
            self.svg,
            r#"<rect x="{px0:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="white"/>"#,
            (px1 - px0).max(0.0),
            (base - py).max(0.0)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (label, colour)) in entries.iter().enumerate() {
            let y = MARGIN[2] + 14.0 + 16.0 * i as f64;
            let x = W - MARGIN[1] - 170.0;
            let _ = write!(
                self.svg,
                r#"<rect x="{x}" y="{}" width="10" height="10" fill="{colour}"/><text x="{}" y="{}">{}</text>"#,
                y - 9.0,
                x + 14.0,
                y,
                escape(label)
            );
        }
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let pad = ((hi - lo) * 0.05).max(1e-9);
    (lo - pad, hi + pad)
}

/// Rotation curve: estimated and closed-form displacement against
/// `γ = 1 + inf‖f‖`, with the crossings at `±π/3` marked.
pub fn rotation_svg(rows: &[RotationRow]) -> Result<String> {
    use std::f64::consts::PI;
    if rows.is_empty() {
        return Err(Error::Input("rotation plot needs at least one row".into()));
    }
    let ymax = rows
        .iter()
        .flat_map(|r| [r.d_estimate, r.d_closed_form, r.gamma])
        .fold(2.0_f64, f64::max);
    let mut c = Canvas::new("sup displacement of planar rotations", (-PI, PI), padded(0.0, ymax), false);
    c.labels("rotation angle alpha", "displacement");
    let dense: Vec<(f64, f64)> = (0..=400)
        .map(|k| {
            let a = -PI + 2.0 * PI * k as f64 / 400.0;
            (a, rotation_sup_displacement(a).unwrap_or(f64::NAN))
        })
        .collect();
    c.polyline(&dense, "#1f77b4", false);
    c.polyline(&rows.iter().map(|r| (r.alpha, r.gamma)).collect::<Vec<_>>(), "#d62728", true);
    c.markers(&rows.iter().map(|r| (r.alpha, r.d_estimate)).collect::<Vec<_>>(), "#2ca02c");
    c.vline(-PI / 3.0, "#777");
    c.vline(PI / 3.0, "#777");
    for a in [-PI / 3.0, PI / 3.0] {
        c.crossing(a, 1.0);
    }
    c.legend(&[
        ("2 sin(|alpha|/2)", "#1f77b4"),
        ("estimate", "#2ca02c"),
        ("1 + inf |f|", "#d62728"),
    ]);
    Ok(c.finish())
}

/// `r ↦ sup_{‖y‖≤r} ‖φ(y) − ψ(y)‖`; log radius axis when the radii span
/// more than a factor of 20.
pub fn growth_svg(rows: &[GrowthRow], title: &str) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Input("growth plot needs at least one row".into()));
    }
    let (rmin, rmax) = (rows[0].r, rows[rows.len() - 1].r);
    let log_x = rmin > 0.0 && rmax / rmin > 20.0;
    let x = if log_x { (rmin, rmax) } else { padded(rmin.min(0.0), rmax) };
    let ymax = rows.iter().map(|r| r.sup).fold(0.0, f64::max);
    let mut c = Canvas::new(title, x, padded(0.0, ymax.max(1e-9)), log_x);
    c.labels(if log_x { "radius r (log scale)" } else { "radius r" }, "sup |phi - psi|");
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.r, r.sup)).collect();
    c.polyline(&pts, "#1f77b4", false);
    c.markers(&pts, "#1f77b4");
    Ok(c.finish())
}

/// Histogram of bound slacks `d̂ − rhs`.
pub fn slack_histogram_svg(slacks: &[f64]) -> Result<String> {
    let finite: Vec<f64> = slacks.iter().copied().filter(|s| s.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Input("slack histogram needs at least one finite slack".into()));
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(lo + 1e-6);
    let bins = ((finite.len() as f64).sqrt().ceil() as usize).clamp(5, 40);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for s in &finite {
        let b = (((s - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let cmax = *counts.iter().max().unwrap_or(&1) as f64;
    let mut c = Canvas::new(
        &format!("bound slack over {} checks", finite.len()),
        (lo, hi),
        (0.0, cmax * 1.05),
        false,
    );
    c.labels("slack = estimate - bound", "count");
    for (i, &k) in counts.iter().enumerate() {
        let x0 = lo + width * i as f64;
        c.rect(x0, x0 + width, k as f64, if x0 + width <= 0.0 { "#d62728" } else { "#1f77b4" });
    }
    c.vline(0.0, "#000");
    Ok(c.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    RotationSweep,
    GrowthProfile,
    SlackHistogram,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotation_sweep" => Ok(Self::RotationSweep),
            "growth_profile" => Ok(Self::GrowthProfile),
            "slack_histogram" => Ok(Self::SlackHistogram),
            other => Err(Error::Input(format!(
                "unknown plot kind {other:?} (expected rotation_sweep, growth_profile or slack_histogram)"
            ))),
        }
    }
}

/// One plot from a report. `item` selects among several sweeps or profiles;
/// by default the first matching item is used.
pub fn render_plot(report: &CampaignReport, kind: PlotKind, item: Option<&str>) -> Result<String> {
    let select = |check: &str| {
        report
            .items
            .iter()
            .filter(|i| i.check == check && item.is_none_or(|id| i.id == id))
            .find_map(|i| Some((i.id.as_str(), i.result.as_ref()?.get("rows")?.clone())))
            .ok_or_else(|| Error::Input(format!("report {:?} has no {check} rows", report.campaign)))
    };
    match kind {
        PlotKind::RotationSweep => {
            let (_, rows) = select("rotation_sweep")?;
            rotation_svg(&serde_json::from_value::<Vec<RotationRow>>(rows)?)
        }
        PlotKind::GrowthProfile => {
            let (id, rows) = select("growth_profile")?;
            growth_svg(&serde_json::from_value::<Vec<GrowthRow>>(rows)?, &format!("growth profile {id}"))
        }
        PlotKind::SlackHistogram => slack_histogram_svg(&bound_slacks(report)),
    }
}

fn bound_slacks(report: &CampaignReport) -> Vec<f64> {
    report
        .items
        .iter()
        .filter(|i| i.check == "bound" || i.check == "eigen")
        .filter(|i| item_verdict(i).is_some())
        .filter_map(|i| i.result.as_ref()?.get("slack")?.as_f64())
        .collect()
}

/// Render every plottable item of a report into `out_dir`.
pub fn plot_report(report: &CampaignReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for item in &report.items {
        let kind = match item.check.as_str() {
            "rotation_sweep" => PlotKind::RotationSweep,
            "growth_profile" => PlotKind::GrowthProfile,
            _ => continue,
        };
        if item.result.is_none() {
            continue;
        }
        let suffix = if kind == PlotKind::RotationSweep { "rotation" } else { "growth" };
        let path = out_dir.join(format!("{}-{suffix}.svg", item.id));
        std::fs::write(&path, render_plot(report, kind, Some(&item.id))?)?;
        written.push(path);
    }
    let slacks = bound_slacks(report);
    if !slacks.is_empty() {
        let path = out_dir.join(format!("{}-slack.svg", report.campaign));
        std::fs::write(&path, slack_histogram_svg(&slacks)?)?;
        written.push(path);
    }
    if written.is_empty() {
        return Err(Error::Input(format!(
            "report {:?} has no rotation sweeps, growth profiles or bound checks to plot",
            report.campaign
        )));
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svgs_are_well_formed() {
        let rows = vec![
            RotationRow {
                alpha: 0.0,
                d_estimate: 0.0,
                d_closed_form: 0.0,
                gamma: 1.0,
                slack: -1.0,
            },
            RotationRow {
                alpha: 1.0,
                d_estimate: 0.96,
                d_closed_form: 0.9589,
                gamma: 1.0,
                slack: -0.04,
            },
        ];
        let s = rotation_svg(&rows).unwrap();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches(r#"class="crossing""#).count(), 2);
        assert!(s.contains(r#"data-x="1.047198""#) && s.contains(r#"data-x="-1.047198""#));
        let g = growth_svg(
            &[
                GrowthRow { r: 1.0, sup: 1.0, witness: vec![] },
                GrowthRow { r: 50.0, sup: 1.0, witness: vec![] },
            ],
            "g",
        )
        .unwrap();
        assert!(g.contains("log scale"));
        assert!(slack_histogram_svg(&[0.1, 0.2, -0.0]).unwrap().contains("<rect"));
        assert!(rotation_svg(&[]).is_err());
        assert!(slack_histogram_svg(&[f64::NAN]).is_err());
    }
}
