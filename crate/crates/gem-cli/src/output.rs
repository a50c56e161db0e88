//! CSV and manifest writers.
//!
//! Floats are written with 17 significant digits so that every value parses
//! back to the same `f64`. Lines end in `\n` on every platform.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use gem_core::analysis::{CurveEntry, ErrorCurve, ErrorKind};
use serde::Serialize;

pub const CURVE_HEADER: &str = "kind,p,h,error,stderr,n_paths";

/// `x` with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus one row per entry of each curve.
pub fn curves_csv(curves: &[&ErrorCurve]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for c in curves {
        for e in c.entries() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.kind().label(),
                real(c.p()),
                real(e.h),
                real(e.error),
                real(e.stderr),
                e.n_paths
            );
        }
    }
    out
}

pub fn emit_curve_csv(curve: &ErrorCurve, path: &Path) -> io::Result<()> {
    fs::write(path, curves_csv(&[curve]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub kind: ErrorKind,
    pub p: f64,
    pub entry: CurveEntry,
}

/// Parses curve CSV produced by [`curves_csv`].
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err("missing or wrong header".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| format!("row {}: bad {what}", i + 1);
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad("field count"));
            }
            let num = |j: usize, what: &str| f[j].parse::<f64>().map_err(|_| bad(what));
            Ok(CurveRow {
                kind: ErrorKind::from_label(f[0]).ok_or_else(|| bad("kind"))?,
                p: num(1, "p")?,
                entry: CurveEntry {
                    h: num(2, "h")?,
                    error: num(3, "error")?,
                    stderr: num(4, "stderr")?,
                    n_paths: f[5].parse().map_err(|_| bad("n_paths"))?,
                },
            })
        })
        .collect()
}

/// One acceptance band evaluated on a measured value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, lo: Some(lo), hi: Some(hi), pass: value >= lo && value <= hi }
    }

    pub fn at_most(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Check { name: name.into(), value, lo: None, hi: Some(hi), pass: value <= hi }
    }

    pub fn at_least(name: impl Into<String>, value: f64, lo: f64) -> Self {
        Check { name: name.into(), value, lo: Some(lo), hi: None, pass: value >= lo }
    }

    /// A boolean outcome recorded as `1` (pass) or `0`.
    pub fn holds(name: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), value: if pass { 1.0 } else { 0.0 }, lo: Some(1.0), hi: None, pass }
    }
}

/// Run record written next to the results. Field order is fixed.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub wall_time_seconds: f64,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest is serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(levels: usize) -> ErrorCurve {
        let entries = (0..levels)
            .map(|i| {
                let h = 2f64.powi(-(4 + i as i32));
                CurveEntry { h, error: 0.1 * h.sqrt() + 1e-17, stderr: h / 3.0, n_paths: 512 }
            })
            .collect();
        ErrorCurve::new(ErrorKind::StrongVsReference, 2.0, entries).unwrap()
    }

    #[test]
    fn six_levels_give_seven_lf_lines() {
        let text = curves_csv(&[&curve(6)]);
        assert_eq!(text.lines().count(), 7);
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn empty_curve_is_header_only() {
        assert_eq!(curves_csv(&[&curve(0)]), format!("{CURVE_HEADER}\n"));
    }

    #[test]
    fn round_trip_is_exact() {
        let c = curve(6);
        let rows = parse_curve_csv(&curves_csv(&[&c])).unwrap();
        for (row, e) in rows.iter().zip(c.entries()) {
            assert_eq!(row.kind, c.kind());
            assert_eq!(row.p, c.p());
            assert_eq!(&row.entry, e);
        }
        assert_eq!(real(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn check_bands() {
        assert!(Check::within("s", 0.5, 0.4, 0.62).pass);
        assert!(!Check::within("s", 1.0, 0.4, 0.62).pass);
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
        assert!(Check::at_least("r2", 0.99, 0.98).pass);
    }

    #[test]
    fn manifest_keys_keep_declared_order() {
        let m = RunManifest {
            experiment: "selftest".into(),
            version: "0".into(),
            config: BTreeMap::new(),
            wall_time_seconds: 0.0,
            checks: vec![Check::holds("ok", true)],
            outputs: vec![],
        };
        let json = m.to_json();
        let pos = |k: &str| json.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("experiment") < pos("version"));
        assert!(pos("version") < pos("config"));
        assert!(pos("config") < pos("wall_time_seconds"));
        assert!(pos("wall_time_seconds") < pos("checks"));
        assert!(pos("checks") < pos("outputs"));
    }
}
