//! CSV tables and hand-rolled SVG charts.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use trailaug::infotheory::SweepRow;
use trailaug::seedexp::ExpansionTrace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub iteration: u32,
    /// Test AUC minus the empty-seed baseline, in percentage points.
    pub auc_lift_pct: f64,
    pub n_activities_lift_pct: f64,
    pub relevant_users_per_converted_cluster: f64,
    pub accepted: bool,
}

/// Lift of `auc` over `baseline` in AUC percentage points.
pub fn auc_lift_pct(auc: f64, baseline: f64) -> f64 {
    (auc - baseline) * 100.0
}

/// Relative growth of the seed list over its initial size, in percent.
pub fn size_lift_pct(n: usize, n_initial: usize) -> f64 {
    if n_initial == 0 {
        0.0
    } else {
        (n as f64 - n_initial as f64) / n_initial as f64 * 100.0
    }
}

const TABLE1_HEADER: [&str; 5] =
    ["iteration", "auc_lift_pct", "n_activities_lift_pct", "relevant_users_per_converted_cluster", "accepted"];

pub fn write_table1<W: Write>(rows: &[Table1Row], w: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(TABLE1_HEADER)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_table1<R: Read>(r: R) -> csv::Result<Vec<Table1Row>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

#[derive(Serialize)]
struct TraceRow<'a> {
    iteration: u32,
    n_activities: usize,
    n_new: usize,
    auc: Option<f64>,
    accepted: bool,
    stop_reason: &'a str,
}

/// One row per iteration; `stop_reason` is set on the last row only.
pub fn write_trace<W: Write>(trace: &ExpansionTrace, w: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(["iteration", "n_activities", "n_new", "auc", "accepted", "stop_reason"])?;
    let last = trace.records.len().saturating_sub(1);
    for (i, r) in trace.records.iter().enumerate() {
        out.serialize(TraceRow {
            iteration: r.iteration,
            n_activities: r.n_activities,
            n_new: r.n_new(),
            auc: r.auc,
            accepted: r.accepted,
            stop_reason: if i == last { trace.stop.as_str() } else { "" },
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], w: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(["s", "before_bits", "after_bits"])?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, x_label: &str, y_label: &str, y_min: f64, y_max: f64) {
    let (x0, y0, x1, y1) = (MARGIN, H - MARGIN, W - MARGIN / 2.0, MARGIN);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for i in 0..=4 {
        let v = y_min + (y_max - y_min) * f64::from(i) / 4.0;
        let y = y0 - (y0 - y1) * f64::from(i) / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#, x0 - 6.0, y + 4.0);
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#ddd"/>"##);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 14.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn y_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        (lo, lo + 1.0)
    } else {
        (lo, hi)
    }
}

/// Bar chart of AUC lift per expansion iteration.
pub fn fig4_svg(rows: &[Table1Row]) -> String {
    let mut s = svg_open("AUC lift over the empty seed list");
    let (lo, hi) = y_range(rows.iter().map(|r| r.auc_lift_pct));
    axes(&mut s, "seed-list expansion iteration", "AUC lift (points)", lo, hi);
    let span = W - 1.5 * MARGIN;
    let slot = span / rows.len().max(1) as f64;
    let scale = (H - 2.0 * MARGIN) / (hi - lo);
    let zero = H - MARGIN - (0.0 - lo) * scale;
    for (i, r) in rows.iter().enumerate() {
        let x = MARGIN + slot * (i as f64 + 0.15);
        let top = H - MARGIN - (r.auc_lift_pct - lo) * scale;
        let (y, h) = if top < zero { (top, zero - top) } else { (zero, top - zero) };
        let fill = if r.accepted { "#4a7ab8" } else { "#b8b8b8" };
        let _ = writeln!(s, r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{h:.1}" fill="{fill}"/>"#, slot * 0.7);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x + slot * 0.35,
            H - MARGIN + 16.0,
            r.iteration
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#, x + slot * 0.35, y - 4.0, r.auc_lift_pct);
    }
    s.push_str("</svg>\n");
    s
}

/// Before/after conditional-entropy curves over organization size.
pub fn fig3_svg(rows: &[SweepRow]) -> String {
    let mut s = svg_open("H(C|R) before and after augmentation");
    let (lo, hi) = y_range(rows.iter().flat_map(|r| [r.before_bits, r.after_bits]));
    axes(&mut s, "organization size s", "bits", lo, hi);
    let (s_min, s_max) = rows.iter().fold((u32::MAX, 0), |(a, b), r| (a.min(r.s), b.max(r.s)));
    let x_of = |v: u32| {
        let t = if s_max > s_min { f64::from(v - s_min) / f64::from(s_max - s_min) } else { 0.5 };
        MARGIN + t * (W - 1.5 * MARGIN)
    };
    let y_of = |v: f64| H - MARGIN - (v - lo) / (hi - lo) * (H - 2.0 * MARGIN);
    for (label, color, pick) in [
        ("before", "#c0392b", (|r: &SweepRow| r.before_bits) as fn(&SweepRow) -> f64),
        ("after", "#2471a3", |r: &SweepRow| r.after_bits),
    ] {
        let pts: Vec<String> = rows.iter().map(|r| format!("{:.1},{:.1}", x_of(r.s), y_of(pick(r)))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let ly = if label == "before" { 44.0 } else { 60.0 };
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{label}</text>"#, W - 2.0 * MARGIN);
    }
    if !rows.is_empty() {
        for v in [s_min, s_max] {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{v}</text>"#, x_of(v), H - MARGIN + 16.0);
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_table1(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), TABLE1_HEADER.join(",") + "\n");
    }

    #[test]
    fn baseline_lift_is_zero() {
        assert_eq!(auc_lift_pct(0.734, 0.734), 0.0);
        assert_eq!(size_lift_pct(12, 12), 0.0);
        assert_eq!(size_lift_pct(15, 10), 50.0);
    }

    #[test]
    fn table_round_trip() {
        let rows = vec![
            Table1Row { iteration: 0, auc_lift_pct: 3.125, n_activities_lift_pct: 0.0, relevant_users_per_converted_cluster: 1.5, accepted: true },
            Table1Row { iteration: 1, auc_lift_pct: 1.0 / 3.0, n_activities_lift_pct: 240.0, relevant_users_per_converted_cluster: 1.75, accepted: false },
        ];
        let mut buf = Vec::new();
        write_table1(&rows, &mut buf).unwrap();
        assert_eq!(read_table1(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn charts_are_well_formed() {
        let svg = fig4_svg(&[]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        let rows = [SweepRow { s: 3, before_bits: 0.3, after_bits: 0.1 }, SweepRow { s: 4, before_bits: 0.25, after_bits: 0.09 }];
        let svg = fig3_svg(&rows);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
