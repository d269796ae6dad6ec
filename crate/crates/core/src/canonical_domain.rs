//! Vectors of the canonical domain: finite combinations of `|k⟩ − |l⟩`,
//! equivalently finite-support vectors whose coefficients sum to zero.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{check_pair, StateVector, ONE, ZERO};

/// `|k⟩ − |l⟩`, unnormalized.
pub fn pair_vector(k: usize, l: usize, m: usize) -> Result<StateVector> {
    check_pair(k, l, m)?;
    let mut v = StateVector::zeros(m);
    v.coeffs_mut()[k] = ONE;
    v.coeffs_mut()[l] = -ONE;
    Ok(v)
}

/// `φ_{k,l} = 2^{-1/2}(|k⟩ − |l⟩)`
pub fn normalized_pair_vector(k: usize, l: usize, m: usize) -> Result<StateVector> {
    Ok(pair_vector(k, l, m)?.scale(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalVector {
    pairs: BTreeMap<(usize, usize), Complex64>,
    state: StateVector,
}

impl CanonicalVector {
    pub fn pairs(&self) -> &BTreeMap<(usize, usize), Complex64> {
        &self.pairs
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn into_state(self) -> StateVector {
        self.state
    }

    /// Number of leading levels that carry the support.
    pub fn support(&self) -> usize {
        self.pairs.keys().map(|&(k, _)| k + 1).max().unwrap_or(0)
    }
}

/// `φ = Σ a_{kl} (|k⟩ − |l⟩)` over the given `(k, l) → a_{kl}` map, `k > l`.
pub fn assemble(pairs: BTreeMap<(usize, usize), Complex64>, m: usize) -> Result<CanonicalVector> {
    let mut state = StateVector::zeros(m);
    for (&(k, l), &a) in &pairs {
        if k <= l {
            return Err(Error::Index(format!("pair ({k},{l}) must have k > l")));
        }
        check_pair(k, l, m)?;
        let coeffs = state.coeffs_mut();
        coeffs[k] += a;
        coeffs[l] -= a;
    }
    Ok(CanonicalVector { pairs, state })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub in_domain: bool,
    /// `Σ φ_s` after dividing out the phase of the first nonzero coefficient.
    pub coefficient_sum: Complex64,
    /// Index of the last nonzero coefficient plus one.
    pub support: usize,
}

/// Tests `|Σ φ_s| ≤ tol`, up to a global phase.
pub fn membership_test(phi: &StateVector, tol: f64) -> Membership {
    let coeffs = phi.coeffs();
    let support = coeffs.iter().rposition(|c| *c != ZERO).map_or(0, |i| i + 1);
    let phase = coeffs
        .iter()
        .find(|c| **c != ZERO)
        .map_or(ONE, |c| Complex64::from_polar(1.0, -c.arg()));
    let coefficient_sum = phi.coefficient_sum() * phase;
    Membership {
        in_domain: coefficient_sum.norm() <= tol && support <= phi.dim(),
        coefficient_sum,
        support,
    }
}
