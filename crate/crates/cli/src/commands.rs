use std::fmt::Write as _;
use std::path::PathBuf;

use gaussot::{
    barycenter_functional, barycenter_n, coupling_covariance, sample_coupling, shared_correlation_frame,
    v_closed_form, w2_squared, BarycenterProblem, CommonFrame, Error, FrameConfig, GaussianLaw, SharedCorrelationFrame,
};
use serde_json::json;

use crate::args::{Cli, Pair};
use crate::document::{self, canonical, load_law, write_output, LoadedLaw, ResultDocument};
use crate::error::CliError;

/// Weights must sum to one within this before they are renormalized.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

pub struct LoadedPair {
    pub mu: LoadedLaw,
    pub nu: LoadedLaw,
}

impl LoadedPair {
    pub fn labels(&self) -> Vec<String> {
        vec![self.mu.label.clone(), self.nu.label.clone()]
    }
}

pub fn load_pair(pair: &Pair) -> Result<LoadedPair, CliError> {
    let (mu, nu) = (load_law(&pair.mu)?, load_law(&pair.nu)?);
    if mu.law.dim() != nu.law.dim() {
        return Err(CliError::Input(format!(
            "dimension mismatch: {} is {}-dimensional, {} is {}-dimensional",
            mu.label,
            mu.law.dim(),
            nu.label,
            nu.law.dim()
        )));
    }
    Ok(LoadedPair { mu, nu })
}

pub fn emit(cli: &Cli, doc: &ResultDocument) -> Result<(), CliError> {
    write_output(cli.out.as_ref(), &canonical(&doc.to_value()))
}

fn set_frame(doc: &mut ResultDocument, f: &SharedCorrelationFrame) {
    doc.set("O", document::matrix(&f.o));
    doc.set("C", document::matrix(f.c.matrix()));
    doc.set("d_mu", document::vector(&f.d_mu));
    doc.set("d_nu", document::vector(&f.d_nu));
    doc.set("branch", json!(f.branch.as_str()));
    doc.set("eps_used", json!(f.eps_used));
    doc.set("residual_mu", json!(f.residual_mu));
    doc.set("residual_nu", json!(f.residual_nu));
}

pub fn distance(cli: &Cli, pair: &Pair) -> Result<(), CliError> {
    let p = load_pair(pair)?;
    let (mu, nu) = (&p.mu.law, &p.nu.law);
    let w2_sq = w2_squared(mu, nu)?;
    let mean_sq = (mu.mean() - nu.mean()).norm_squared();
    let mut doc = ResultDocument::new("distance", p.labels());
    doc.set("w2_squared", json!(w2_sq));
    doc.set("w2", json!(w2_sq.sqrt()));
    doc.set("bw_squared", json!(w2_sq - mean_sq));
    doc.set("V", json!(v_closed_form(mu.cov(), nu.cov())?));
    emit(cli, &doc)
}

pub fn coupling(cli: &Cli, pair: &Pair) -> Result<(), CliError> {
    let p = load_pair(pair)?;
    let (mu, nu) = (&p.mu.law, &p.nu.law);
    let mut doc = ResultDocument::new("coupling", p.labels());
    let frame = match shared_correlation_frame(mu.cov(), nu.cov(), &cli.tol.frame_config()) {
        Ok(f) => f,
        Err(Error::ContinuationDiverged { steps, best }) => {
            set_frame(&mut doc, &best);
            doc.set("status", json!("diverged"));
            doc.set("steps", json!(steps));
            emit(cli, &doc)?;
            return Err(CliError::Numerical(format!(
                "epsilon continuation did not stabilize after {steps} steps; best candidate written"
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let c = coupling_covariance(&frame, mu, nu)?;
    set_frame(&mut doc, &frame);
    doc.set("status", json!("ok"));
    doc.set("theta", document::matrix(&c.theta));
    doc.set("gamma", document::matrix(c.gamma.matrix()));
    doc.set("V", json!(c.theta.trace()));
    doc.set("w2_squared", json!(c.w2_squared));
    doc.set("bw_squared", json!(c.bw_squared));
    emit(cli, &doc)
}

pub fn sample(cli: &Cli, pair: &Pair, n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    let p = load_pair(pair)?;
    let (mu, nu) = (&p.mu.law, &p.nu.law);
    let frame = shared_correlation_frame(mu.cov(), nu.cov(), &cli.tol.frame_config())?;
    let c = coupling_covariance(&frame, mu, nu)?;
    let mut text = String::new();
    for (x, y) in sample_coupling(&c, mu, nu, n, cli.seed)? {
        let row: Vec<String> = x.iter().chain(y.iter()).map(|v| v.to_string()).collect();
        writeln!(text, "{}", row.join(",")).expect("writing to a String cannot fail");
    }
    write_output(cli.out.as_ref(), &text)
}

fn resolve_weights(n: usize, weights: Option<&[f64]>, alpha: Option<f64>) -> Result<Vec<f64>, CliError> {
    let raw = match (weights, alpha) {
        (Some(w), _) => w.to_vec(),
        (None, Some(a)) if n == 2 => vec![a, 1.0 - a],
        (None, Some(_)) => return Err(CliError::Input("--alpha needs exactly two laws".into())),
        (None, None) => vec![1.0 / n as f64; n],
    };
    if raw.len() != n {
        return Err(CliError::Input(format!("{} weights for {n} laws", raw.len())));
    }
    if raw.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(CliError::Input("weights must be nonnegative and finite".into()));
    }
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(CliError::Input(format!("weights sum to {sum}, not 1")));
    }
    Ok(raw.iter().map(|w| w / sum).collect())
}

/// The identity frame, then the frame of every pair (a law paired with
/// itself included, for the single-law case); the first one valid for all
/// laws wins.
fn find_frame(laws: &[GaussianLaw], weights: &[f64], cfg: &FrameConfig) -> Result<BarycenterProblem, CliError> {
    let d = laws[0].dim();
    let mut candidates = vec![CommonFrame::identity(d)];
    let mut last_err = None;
    for i in 0..laws.len() {
        for j in i..laws.len() {
            match shared_correlation_frame(laws[i].cov(), laws[j].cov(), cfg) {
                Ok(f) => candidates.push(CommonFrame::from(&f)),
                Err(e) => last_err = Some(e),
            }
        }
    }
    for frame in candidates {
        match BarycenterProblem::new(laws.to_vec(), weights.to_vec(), frame, cfg.frame_tol) {
            Ok(p) => return Ok(p),
            Err(e @ Error::InvalidFrame { .. }) => last_err = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(CliError::Numerical(format!(
        "no shared correlation frame fits all {} laws{}",
        laws.len(),
        last_err.map(|e| format!(" (last: {e})")).unwrap_or_default()
    )))
}

pub fn barycenter(cli: &Cli, files: &[PathBuf], weights: Option<&[f64]>, alpha: Option<f64>) -> Result<(), CliError> {
    let loaded = files.iter().map(|f| load_law(f)).collect::<Result<Vec<_>, _>>()?;
    let d = loaded[0].law.dim();
    if let Some(bad) = loaded.iter().find(|l| l.law.dim() != d) {
        return Err(CliError::Input(format!("{} is {}-dimensional, expected {d}", bad.label, bad.law.dim())));
    }
    let weights = resolve_weights(loaded.len(), weights, alpha)?;
    let laws: Vec<GaussianLaw> = loaded.iter().map(|l| l.law.clone()).collect();
    let cfg = cli.tol.frame_config();
    cfg.validate()?;
    let problem = if laws.len() == 2 {
        // The pair's own frame is always valid for both laws.
        let f = shared_correlation_frame(laws[0].cov(), laws[1].cov(), &cfg)?;
        BarycenterProblem::new(laws.clone(), weights.clone(), CommonFrame::from(&f), cfg.frame_tol)?
    } else {
        find_frame(&laws, &weights, &cfg)?
    };
    let eta = barycenter_n(&problem)?;
    let functional = barycenter_functional(&eta, &problem)?;

    let mut doc = ResultDocument::new("barycenter", loaded.iter().map(|l| l.label.clone()).collect());
    doc.set("barycenter", document::law(&eta));
    doc.set("functional", json!(functional));
    doc.set("weights", json!(weights));
    doc.set("O", document::matrix(&problem.frame().o));
    doc.set("C", document::matrix(problem.frame().c.matrix()));
    doc.set("residuals", json!(problem.residuals()));
    if laws.len() == 2 {
        let alpha = weights[0];
        let target = alpha * (1.0 - alpha) * w2_squared(&laws[0], &laws[1])?;
        doc.set("identity_residual", json!((functional - target).abs()));
    }
    emit(cli, &doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_checked_and_normalized() {
        assert_eq!(resolve_weights(2, None, Some(0.25)).unwrap(), vec![0.25, 0.75]);
        assert_eq!(resolve_weights(4, None, None).unwrap(), vec![0.25; 4]);
        let w = resolve_weights(2, Some(&[0.5 + 4e-10, 0.5]), None).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(resolve_weights(2, Some(&[0.5, 0.6]), None).is_err());
        assert!(resolve_weights(2, Some(&[1.5, -0.5]), None).is_err());
        assert!(resolve_weights(3, Some(&[0.5, 0.5]), None).is_err());
        assert!(resolve_weights(3, None, Some(0.5)).is_err());
    }
}
