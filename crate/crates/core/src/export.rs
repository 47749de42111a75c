//! CSV serialization for distributions, distribution functions and
//! posteriors.
//!
//! Floats are written with 17 significant digits in scientific notation
//! (`{:.16e}`), which round-trips every `f64` and is locale independent.

use std::io::Write;

use crate::bayes::{PosteriorState, PriorSpec};
use crate::chain_model::StateSpace;
use crate::empirical::PairDF;
use crate::error::{Error, Result};
use crate::stationary::Dist;

/// Fixed 17-significant-digit formatting.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `state,weight` rows.
pub fn write_dist_csv<W: Write>(dist: &Dist, states: &StateSpace, w: W) -> Result<()> {
    if dist.len() != states.size() {
        return Err(Error::MismatchedStateSpace);
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["state", "weight"])?;
    for (label, p) in states.labels().iter().zip(dist.weights()) {
        out.write_record([fmt_float(*label), fmt_float(*p)])?;
    }
    out.flush()?;
    Ok(())
}

/// Row-major grid `F(x_i, x'_j)`. The header is `x` followed by the state
/// labels of the second argument; each row starts with the label of the
/// first argument.
pub fn write_pair_df_csv<W: Write>(df: &PairDF, w: W) -> Result<()> {
    let labels = df.state_space().labels();
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["x".to_string()];
    header.extend(labels.iter().map(|l| fmt_float(*l)));
    out.write_record(&header)?;
    for (i, li) in labels.iter().enumerate() {
        let mut row = vec![fmt_float(*li)];
        row.extend((0..labels.len()).map(|j| fmt_float(df.at(i, j))));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `theta_0..theta_{m-1},weight,log_weight` per grid point.
pub fn write_posterior_csv<W: Write>(post: &PosteriorState, prior: &PriorSpec, w: W) -> Result<()> {
    if post.weights().len() != prior.len() {
        return Err(Error::InvalidArgument("posterior and prior grids differ in size".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..prior.dim()).map(|k| format!("theta_{k}")).collect();
    header.push("weight".into());
    header.push("log_weight".into());
    out.write_record(&header)?;
    for ((th, wt), lw) in prior.grid().iter().zip(post.weights()).zip(post.log_weights()) {
        let mut row: Vec<String> = th.coords().iter().map(|x| fmt_float(*x)).collect();
        row.push(fmt_float(*wt));
        row.push(fmt_float(*lw));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
