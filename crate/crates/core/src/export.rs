//! Deterministic text artifacts: CSV dumps of fields, traces, and
//! certificates, plus line-oriented summaries of eigenpairs and audit
//! reports.
//!
//! The byte-stability contract every function here honors: fixed column
//! order, every float printed by [`format_float`] (17 significant digits,
//! plain scientific notation), `'\n'` line endings on every platform, and
//! node iteration in the grid's fixed row-major order. Exporting the same
//! artifact twice yields byte-identical text.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::eigensolver::EigenPair;
use crate::error::{Error, Result};
use crate::evolution::EvolutionTrace;
use crate::field::{PExponent, ScalarField};
use crate::grid::NodeKind;
use crate::operators::lp_norm;
use crate::verification::{AuditReport, ComparisonCertificate};

/// Print one float with 17 significant digits — enough to reconstruct any
/// `f64` exactly — in scientific notation independent of magnitude.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV dump of a field: header `x,value` (1D) or `x,y,value` (2D), then one
/// row per non-exterior node in row-major order.
pub fn field_csv(f: &ScalarField) -> String {
    let d = f.domain();
    let two_d = d.dim() == 2;
    let mut out = String::from(if two_d { "x,y,value\n" } else { "x,value\n" });
    for idx in 0..d.len() {
        if d.kind(idx) == NodeKind::Exterior {
            continue;
        }
        let c = d.coords(idx);
        if two_d {
            let _ = writeln!(
                out,
                "{},{},{}",
                format_float(c[0]),
                format_float(c[1]),
                format_float(f.values()[idx])
            );
        } else {
            let _ = writeln!(out, "{},{}", format_float(c[0]), format_float(f.values()[idx]));
        }
    }
    out
}

/// CSV of a comparison certificate: `t,I` per snapshot.
pub fn certificate_csv(cert: &ComparisonCertificate) -> String {
    let mut out = String::from("t,I\n");
    for (t, i) in cert.times.iter().zip(&cert.values) {
        let _ = writeln!(out, "{},{}", format_float(*t), format_float(*i));
    }
    out
}

/// One-line summary record of an eigenpair.
pub fn eigen_summary(pair: &EigenPair, p: PExponent) -> String {
    format!(
        "p={} h={} lambda={} residual={} iterations={}\n",
        format_float(p.get()),
        format_float(pair.u.domain().h()),
        format_float(pair.lambda),
        format_float(pair.residual),
        pair.iterations
    )
}

/// One-line summary of an audit report under the given check name.
pub fn report_text(name: &str, report: &AuditReport) -> String {
    format!(
        "check={name} passed={} worst_margin={} tolerance={} checked_points={} violations={}\n",
        report.passed,
        format_float(report.worst_margin),
        format_float(report.tolerance),
        report.checked_points,
        report.violations.len()
    )
}

/// Write text to a file, mapping filesystem failures into [`Error::Io`].
pub fn write_artifact(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write a trace as a directory of snapshot CSVs plus an index file
/// `<stem>_index.csv` with one row `time,filename,lp_norm,min,max` per
/// snapshot. Returns the snapshot filenames in index order.
pub fn write_trace_csv(trace: &EvolutionTrace, dir: &Path, stem: &str) -> Result<Vec<String>> {
    let d = trace.domain();
    let p = trace.p();
    let mut index = String::from("time,filename,lp_norm,min,max\n");
    let mut names = Vec::with_capacity(trace.len());
    for k in 0..trace.len() {
        let name = format!("{stem}_{k:04}.csv");
        let f = trace.field(k);
        write_artifact(&dir.join(&name), &field_csv(f))?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for idx in 0..d.len() {
            if d.kind(idx) != NodeKind::Exterior {
                lo = lo.min(f.values()[idx]);
                hi = hi.max(f.values()[idx]);
            }
        }
        let _ = writeln!(
            index,
            "{},{},{},{},{}",
            format_float(trace.times()[k]),
            name,
            format_float(lp_norm(f, p)),
            format_float(lo),
            format_float(hi)
        );
        names.push(name);
    }
    write_artifact(&dir.join(format!("{stem}_index.csv")), &index)?;
    Ok(names)
}
