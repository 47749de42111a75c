use std::io::Write;

use crate::bayes::MartingaleStat;
use crate::error::{Error, Result};
use crate::experiment::identify::IdentifiabilityReport;
use crate::experiment::runs::ExperimentRecord;
use crate::export::fmt_float;

fn opt_float(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), fmt_float)
}

fn dim_of(records: &[ExperimentRecord]) -> Result<usize> {
    let m = records.first().map_or(0, |r| r.theta.dim());
    if records.iter().any(|r| r.theta.dim() != m) {
        return Err(Error::InvalidArgument("records mix parameter dimensions".into()));
    }
    Ok(m)
}

fn indexed(prefix: &str, m: usize) -> impl Iterator<Item = String> + '_ {
    (0..m).map(move |k| format!("{prefix}_{k}"))
}

/// `replication,n,theta_*,theta_hat_*,err_*,sup_discrepancy,posterior_entropy,wall_ms`.
/// Degenerate posteriors leave `NaN` in the estimator columns.
pub fn write_consistency_csv<W: Write>(records: &[ExperimentRecord], w: W) -> Result<()> {
    let m = dim_of(records)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["replication".to_string(), "n".to_string()];
    header.extend(indexed("theta", m));
    header.extend(indexed("theta_hat", m));
    header.extend(indexed("err", m));
    header.extend(["sup_discrepancy", "posterior_entropy", "wall_ms"].map(String::from));
    out.write_record(&header)?;

    for r in records {
        let mut row = vec![r.replication.to_string(), r.n.to_string()];
        row.extend(r.theta.coords().iter().map(|x| fmt_float(*x)));
        match (&r.theta_hat, r.error()) {
            (Some(h), Some(e)) => {
                row.extend(h.coords().iter().map(|x| fmt_float(*x)));
                row.extend(e.iter().map(|x| fmt_float(*x)));
            }
            _ => row.extend(std::iter::repeat_n("NaN".to_string(), 2 * m)),
        }
        row.push(fmt_float(r.sup_discrepancy));
        row.push(opt_float(r.posterior_entropy));
        row.push(fmt_float(r.wall_ms));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `replication,n,theta_*,sup_discrepancy,wall_ms`.
pub fn write_lln_csv<W: Write>(records: &[ExperimentRecord], w: W) -> Result<()> {
    let m = dim_of(records)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["replication".to_string(), "n".to_string()];
    header.extend(indexed("theta", m));
    header.extend(["sup_discrepancy", "wall_ms"].map(String::from));
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![r.replication.to_string(), r.n.to_string()];
        row.extend(r.theta.coords().iter().map(|x| fmt_float(*x)));
        row.push(fmt_float(r.sup_discrepancy));
        row.push(fmt_float(r.wall_ms));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `t,tv`.
pub fn write_ergodicity_csv<W: Write>(series: &[(usize, f64)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "tv"])?;
    for (t, tv) in series {
        out.write_record([t.to_string(), fmt_float(*tv)])?;
    }
    out.flush()?;
    Ok(())
}

/// One summary row:
/// `grid_size,resolution_*,min_matrix_gap,min_df_gap,violations,non_ergodic,complete`.
/// Missing minima (fewer than two comparable points) are written as empty.
pub fn write_identifiability_csv<W: Write>(report: &IdentifiabilityReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["grid_size".to_string()];
    header.extend(indexed("resolution", report.resolution.len()));
    header.extend(["min_matrix_gap", "min_df_gap", "violations", "non_ergodic", "complete"].map(String::from));
    out.write_record(&header)?;
    let mut row = vec![report.grid_size.to_string()];
    row.extend(report.resolution.iter().map(|x| fmt_float(*x)));
    row.push(report.min_matrix_gap.map(fmt_float).unwrap_or_default());
    row.push(report.min_df_gap.map(fmt_float).unwrap_or_default());
    row.push(report.violations.len().to_string());
    row.push(report.non_ergodic.len().to_string());
    row.push(report.complete().to_string());
    out.write_record(&row)?;
    out.flush()?;
    Ok(())
}

/// `coordinate,mean,std_error,replications,skipped`.
pub fn write_martingale_csv<W: Write>(stat: &MartingaleStat, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["coordinate", "mean", "std_error", "replications", "skipped"])?;
    for (k, (m, se)) in stat.mean.iter().zip(&stat.std_error).enumerate() {
        out.write_record([
            k.to_string(),
            fmt_float(*m),
            fmt_float(*se),
            stat.replications.to_string(),
            stat.skipped.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
