use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{FitReport, Verdict};
use crate::error::Result;

/// Process exit code for a verdict: 0 pass, 2 inconclusive, 1 fail.
pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => 0,
        Verdict::Inconclusive => 2,
        Verdict::Fail => 1,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6e}")).unwrap_or_default()
}

pub fn render_text(r: &FitReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario {} [{}]", r.name, r.tag);
    let _ = writeln!(s, "branch: {}", r.branch);
    let _ = writeln!(s, "verdict: {:?}{}", r.verdict, if r.degenerate { " (degenerate)" } else { "" });
    let _ = writeln!(s, "converged: {:.0}%", 100.0 * r.converged_fraction);
    if let (Some(f), Some(p)) = (r.fit, r.predicted_slope) {
        let _ = writeln!(
            s,
            "slope: {:.4} ± {:.4} (95% ± {:.4}), predicted {p:.4}",
            f.slope,
            f.stderr,
            f.confidence_half_width(0.95)
        );
    }
    if let Some(c) = r.predicted_level {
        let _ = writeln!(s, "log level: {} predicted {c:.4}", opt(r.log_level));
        if let Some(f) = r.fit {
            let _ = writeln!(
                s,
                "log fit: N ≈ {:.3} + {:.4}·|ln|E|| (slope ± {:.4})",
                f.intercept, f.slope, f.stderr
            );
        }
    }
    if let Some(p) = &r.csv_path {
        let _ = writeln!(s, "curve: {p}");
    }
    if let Some(v) = r.variation {
        let _ = writeln!(s, "count variation: {v}");
    }
    for c in &r.checks {
        let _ = writeln!(s, "  [{:?}] {}: {}", c.status, c.name, c.detail);
    }
    if !r.ratio_curve.is_empty() {
        let _ = writeln!(s, "ratio curve:");
        for (e, q) in &r.ratio_curve {
            let _ = writeln!(s, "  {e:>12.4e}  {q:.4}");
        }
    }
    for note in &r.notes {
        let _ = writeln!(s, "note: {note}");
    }
    if let Some(f) = &r.sign_flip {
        let _ = writeln!(s, "--- with −W ---");
        s.push_str(&render_text(f));
    }
    s
}

fn write_curve(path: &Path, r: &FitReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "E", "count", "predictor", "count_dirichlet", "count_neumann", "R", "h", "converged", "perturbed", "ncl_eta_w",
    ])?;
    for row in &r.rows {
        w.write_record([
            format!("{:.6e}", row.energy),
            row.count.to_string(),
            opt(row.predictor),
            row.dirichlet.to_string(),
            row.neumann.to_string(),
            format!("{}", row.half_width),
            format!("{}", row.spacing),
            row.converged.to_string(),
            row.perturbed.to_string(),
            opt(row.ncl_eta_w),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `curve.csv`, `report.txt` and `report.json` into `dir`.
pub fn write_outputs(dir: &Path, r: &mut FitReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let csv = dir.join("curve.csv");
    write_curve(&csv, r)?;
    r.csv_path = Some(csv.display().to_string());
    fs::write(dir.join("report.txt"), render_text(r))?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(r)?)?;
    Ok(())
}
