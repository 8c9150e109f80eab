//! Secrecy-capacity upper bounds with `ell` eavesdropped nodes.
//!
//! Only bounds are computed here; the secrecy capacity itself is not known in
//! closed form even for homogeneous systems.

use crate::capacity::symmetric_sum;
use crate::error::{Error, Result};
use crate::model::rational::Rational;
use crate::model::{system_averages, DssConfig};

/// Number of compromised nodes, `0 <= ell <= k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecrecyParams {
    ell: usize,
}

impl SecrecyParams {
    pub fn new(ell: usize, k: usize) -> Result<Self> {
        if ell > k {
            return Err(Error::ParamViolation(format!("ell = {ell} exceeds k = {k}")));
        }
        Ok(Self { ell })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }
}

/// `sum_{i=ell+1}^{k} min(alpha, (d-i+1) gamma / d)` for a symmetric-repair system.
pub fn homogeneous_secrecy_bound(
    alpha: &Rational,
    gamma: &Rational,
    k: usize,
    d: usize,
    ell: usize,
) -> Result<Rational> {
    if k == 0 || k > d {
        return Err(Error::ParamViolation(format!(
            "need 1 <= k <= d, got k = {k}, d = {d}"
        )));
    }
    let ell = SecrecyParams::new(ell, k)?.ell();
    Ok(symmetric_sum(alpha, gamma, k, d, ell))
}

/// The same bound evaluated at the system's average storage and repair bandwidth.
pub fn secrecy_upper_bound(config: &DssConfig, ell: usize) -> Result<Rational> {
    let ell = SecrecyParams::new(ell, config.k())?.ell();
    let (alpha_bar, gamma_bar) = system_averages(config);
    Ok(symmetric_sum(&alpha_bar, &gamma_bar, config.k(), config.d(), ell))
}
