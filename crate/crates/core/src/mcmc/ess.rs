use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ess {
    pub value: f64,
    /// Set when the trace has zero variance; `value` is then the trace length.
    pub degenerate: bool,
}

/// Effective sample size by Geyer's initial positive sequence estimator.
///
/// Autocorrelations are summed in consecutive pairs `ρ_{2m} + ρ_{2m+1}` until
/// the first non-positive pair; the result is clamped to `(0, n]`.
pub fn effective_sample_size(trace: &[f64]) -> Result<Ess> {
    let n = trace.len();
    if n < 10 {
        return Err(Error::InvalidParameter(format!(
            "trace of length {n} is too short; need at least 10"
        )));
    }
    let nf = n as f64;
    let mean = trace.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = trace.iter().map(|x| x - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / nf
    };
    let var = autocov(0);
    if !(var > 0.0) {
        return Ok(Ess {
            value: nf,
            degenerate: true,
        });
    }
    let mut tau = -1.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = (autocov(2 * m) + autocov(2 * m + 1)) / var;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        m += 1;
    }
    let value = (nf / tau.max(1e-12)).min(nf);
    Ok(Ess {
        value,
        degenerate: false,
    })
}
