//! Time evolution in the energy eigenbasis, the Heisenberg-evolved time
//! operator, and the pair-state expectation/variance formulas checked
//! against a brute-force matrix oracle.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::canonical_domain::normalized_pair_vector;
use crate::error::{Error, Result};
use crate::operators::{self, build_time_operator, check_dims, fmt_f64, OperatorMatrix, StateVector};
use crate::spectrum::Spectrum;
use crate::time_invariant::invariant_set;

/// `U_t φ`: coefficients `φ_s·e^{−iE_s t/ħ}`.
pub fn evolve_state(spectrum: &Spectrum, phi: &StateVector, t: f64) -> Result<StateVector> {
    spectrum.check_truncation(phi.dim())?;
    let coeffs = phi
        .coeffs()
        .iter()
        .enumerate()
        .map(|(s, c)| c * Complex64::from_polar(1.0, -spectrum.level_frequency(s) * t))
        .collect();
    Ok(StateVector::new(coeffs))
}

/// `T_t = U_t† T U_t`: entries `T_{s,s'}·e^{iω_{s,s'}t}`.
pub fn heisenberg_t(t_op: &OperatorMatrix, spectrum: &Spectrum, t: f64) -> Result<OperatorMatrix> {
    check_dims(t_op.dim(), t_op.dim().min(spectrum.len()))?;
    Ok(t_op.map_entries(|r, c, x| {
        if r == c {
            x
        } else {
            x * Complex64::from_polar(1.0, spectrum.transition_frequency(r, c) * t)
        }
    }))
}

fn pair_frequency(spectrum: &Spectrum, k: usize, l: usize) -> Result<f64> {
    spectrum.check_index(k)?;
    spectrum.check_index(l)?;
    if k <= l {
        return Err(Error::Index(format!("expected k > l, got ({k},{l})")));
    }
    Ok(spectrum.transition_frequency(k, l))
}

/// `⟨φ_{k,l}|T_{t(τ)}|φ_{k,l}⟩ = sin(ω_{kl}τ)/ω_{kl}`
pub fn expectation_t_closed(k: usize, l: usize, tau: f64, spectrum: &Spectrum) -> Result<f64> {
    let w = pair_frequency(spectrum, k, l)?;
    Ok((w * tau).sin() / w)
}

/// `ΔT²(t(τ)) = cos²(ω_{kl}τ)/ω_{kl}² + ½ Σ_{s≠k,l} (1/ω_{sk}² + 1/ω_{sl}² − 2cos(ω_{kl}τ)/(ω_{sk}ω_{sl}))`
/// with the sum truncated at `s < m`.
pub fn variance_t_closed(k: usize, l: usize, tau: f64, spectrum: &Spectrum, m: usize) -> Result<f64> {
    let w = pair_frequency(spectrum, k, l)?;
    spectrum.check_truncation(m)?;
    if k >= m {
        return Err(Error::Index(format!("pair ({k},{l}) outside truncation {m}")));
    }
    let cos = (w * tau).cos();
    let tail: f64 = (0..m)
        .filter(|&s| s != k && s != l)
        .map(|s| {
            let wsk = spectrum.transition_frequency(s, k);
            let wsl = spectrum.transition_frequency(s, l);
            1.0 / (wsk * wsk) + 1.0 / (wsl * wsl) - 2.0 * cos / (wsk * wsl)
        })
        .sum();
    Ok(cos * cos / (w * w) + 0.5 * tail)
}

/// `ΔT²_{k,l} = 1/ω_{kl}² + ½ω_{kl}² Σ_{s≠k,l} 1/(ω_{sk}²ω_{sl}²)`, the
/// static form of [`variance_t_closed`].
pub fn static_variance_closed(k: usize, l: usize, spectrum: &Spectrum, m: usize) -> Result<f64> {
    let w = pair_frequency(spectrum, k, l)?;
    spectrum.check_truncation(m)?;
    let tail: f64 = (0..m)
        .filter(|&s| s != k && s != l)
        .map(|s| {
            let wsk = spectrum.transition_frequency(s, k);
            let wsl = spectrum.transition_frequency(s, l);
            1.0 / (wsk * wsk * wsl * wsl)
        })
        .sum();
    Ok(1.0 / (w * w) + 0.5 * w * w * tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    MatrixOracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::MatrixOracle => "matrix_oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolvedObservableReport {
    pub tau: f64,
    pub n: i64,
    pub t: f64,
    pub expectation: f64,
    pub variance: f64,
    pub method: Method,
    pub truncation: usize,
    /// `⟨T_t⟩` only involves the `(k, l)` block and does not depend on `M`.
    pub expectation_truncation_independent: bool,
}

pub const SWEEP_HEADER: &str = "tau,n,expectation,variance,method,M";

impl EvolvedObservableReport {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_f64(self.tau),
            self.n,
            fmt_f64(self.expectation),
            fmt_f64(self.variance),
            self.method.as_str(),
            self.truncation
        )
    }
}

/// Brute-force evaluation: holds `T` at truncation `M`, evolves `φ_{k,l}`
/// to `t = τ + n·2π/ω_{kl}` and takes `⟨T⟩` and `‖Tψ‖² − ⟨T⟩²` directly.
#[derive(Debug, Clone)]
pub struct MatrixOracle<'a> {
    spectrum: &'a Spectrum,
    t_op: OperatorMatrix,
    k: usize,
    l: usize,
    phi: StateVector,
}

impl<'a> MatrixOracle<'a> {
    pub fn new(spectrum: &'a Spectrum, k: usize, l: usize, m: usize) -> Result<MatrixOracle<'a>> {
        Self::with_operator(spectrum, build_time_operator(spectrum, m)?, k, l)
    }

    /// Uses a caller-supplied `T` (for fault injection).
    pub fn with_operator(spectrum: &'a Spectrum, t_op: OperatorMatrix, k: usize, l: usize) -> Result<MatrixOracle<'a>> {
        pair_frequency(spectrum, k, l)?;
        let phi = normalized_pair_vector(k, l, t_op.dim())?;
        Ok(MatrixOracle {
            spectrum,
            t_op,
            k,
            l,
            phi,
        })
    }

    pub fn pair_period(&self) -> f64 {
        TAU / self.spectrum.transition_frequency(self.k, self.l)
    }

    pub fn report(&self, tau: f64, n: i64) -> Result<EvolvedObservableReport> {
        let t = tau + n as f64 * self.pair_period();
        let psi = evolve_state(self.spectrum, &self.phi, t)?;
        Ok(EvolvedObservableReport {
            tau,
            n,
            t,
            expectation: operators::expectation(&self.t_op, &psi)?,
            variance: operators::variance(&self.t_op, &psi)?,
            method: Method::MatrixOracle,
            truncation: self.t_op.dim(),
            expectation_truncation_independent: true,
        })
    }
}

pub fn oracle_report(
    k: usize,
    l: usize,
    tau: f64,
    n: i64,
    spectrum: &Spectrum,
    m: usize,
) -> Result<EvolvedObservableReport> {
    MatrixOracle::new(spectrum, k, l, m)?.report(tau, n)
}

pub fn closed_form_report(
    k: usize,
    l: usize,
    tau: f64,
    n: i64,
    spectrum: &Spectrum,
    m: usize,
) -> Result<EvolvedObservableReport> {
    let w = pair_frequency(spectrum, k, l)?;
    Ok(EvolvedObservableReport {
        tau,
        n,
        t: tau + n as f64 * TAU / w,
        expectation: expectation_t_closed(k, l, tau, spectrum)?,
        variance: variance_t_closed(k, l, tau, spectrum, m)?,
        method: Method::ClosedForm,
        truncation: m,
        expectation_truncation_independent: true,
    })
}

/// Uniform grid of `steps` points on `[0, tau_max)`.
pub fn tau_grid(tau_max: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| tau_max * i as f64 / steps as f64).collect()
}

pub const DEFAULT_GRID_POINTS: usize = 200;

/// Both methods at every grid point, ordered by `τ` then method. Points are
/// evaluated in parallel and merged in grid order.
pub fn sweep(
    spectrum: &Spectrum,
    k: usize,
    l: usize,
    n: i64,
    m: usize,
    taus: &[f64],
) -> Result<Vec<EvolvedObservableReport>> {
    let oracle = MatrixOracle::new(spectrum, k, l, m)?;
    let rows: Vec<Result<[EvolvedObservableReport; 2]>> = taus
        .par_iter()
        .map(|&tau| Ok([closed_form_report(k, l, tau, n, spectrum, m)?, oracle.report(tau, n)?]))
        .collect();
    let mut out = Vec::with_capacity(taus.len() * 2);
    for pair in rows {
        out.extend(pair?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub truncations: Vec<usize>,
    pub values: Vec<f64>,
    /// Convergence order estimated from the last three truncations.
    pub order: f64,
    pub value: f64,
    pub error_bar: f64,
}

/// Richardson extrapolation of the static variance over doubling
/// truncations, e.g. `[64, 128, 256]`.
pub fn extrapolate_static_variance(
    spectrum: &Spectrum,
    k: usize,
    l: usize,
    truncations: &[usize],
) -> Result<Extrapolation> {
    if truncations.len() < 3 {
        return Err(Error::InvalidInput("need at least three truncations".into()));
    }
    if truncations.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidInput("truncations must double".into()));
    }
    let values = truncations
        .iter()
        .map(|&m| static_variance_closed(k, l, spectrum, m))
        .collect::<Result<Vec<_>>>()?;
    let n = values.len();
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let d1 = b - a;
    let d2 = c - b;
    if d2 == 0.0 || d1 == 0.0 {
        return Ok(Extrapolation {
            truncations: truncations.to_vec(),
            values,
            order: f64::INFINITY,
            value: c,
            error_bar: d2.abs(),
        });
    }
    let ratio = d1 / d2;
    let order = ratio.abs().log2();
    // Geometric closure of the remaining increments; the spread against the
    // closure at the nearest integer order serves as the error bar.
    let value = c + d2 / (ratio - 1.0);
    let integer_order = order.round().max(1.0);
    let at_integer_order = c + d2 / (2f64.powf(integer_order) - 1.0);
    let error_bar = (value - at_integer_order).abs().max(f64::EPSILON * value.abs());
    Ok(Extrapolation {
        truncations: truncations.to_vec(),
        values,
        order,
        value,
        error_bar,
    })
}

/// `‖U_tφ − (I − itH/ħ)φ‖`
pub fn short_time_defect(spectrum: &Spectrum, phi: &StateVector, t: f64) -> Result<f64> {
    let evolved = evolve_state(spectrum, phi, t)?;
    let linear: Vec<Complex64> = phi
        .coeffs()
        .iter()
        .enumerate()
        .map(|(s, c)| c * Complex64::new(1.0, -spectrum.level_frequency(s) * t))
        .collect();
    Ok(evolved.sub(&StateVector::new(linear))?.norm())
}

/// `‖(T_{t(τ)} − T − τ)φ_{k,l}‖` with `t(τ) = τ + n·P`, where `P` is the
/// base period of the invariant set over the first `m` levels.
pub fn covariance_defect(spectrum: &Spectrum, k: usize, l: usize, tau: f64, n: i64, m: usize) -> Result<f64> {
    let t_op = build_time_operator(spectrum, m)?;
    covariance_defect_with(spectrum, &t_op, k, l, tau, n)
}

pub fn covariance_defect_with(
    spectrum: &Spectrum,
    t_op: &OperatorMatrix,
    k: usize,
    l: usize,
    tau: f64,
    n: i64,
) -> Result<f64> {
    pair_frequency(spectrum, k, l)?;
    let m = t_op.dim();
    let phi = normalized_pair_vector(k, l, m)?;
    let shift = if n == 0 {
        0.0
    } else {
        let set = invariant_set(spectrum, m)?;
        let p = set
            .base_period()
            .ok_or_else(|| Error::InvalidInput("time-invariant set is {0}; only n = 0 is available".into()))?;
        n as f64 * p
    };
    let evolved_t = heisenberg_t(t_op, spectrum, tau + shift)?;
    let lhs = evolved_t.apply(&phi)?;
    let rhs = t_op.apply(&phi)?.add(&phi.scale(Complex64::new(tau, 0.0)))?;
    Ok(lhs.sub(&rhs)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::expectation;

    #[test]
    fn evolution_basics() {
        let s = Spectrum::harmonic(1.0, 5).unwrap();
        let phi = StateVector::from_real(&[0.3, -0.1, 0.5, 0.2, 0.0]).normalized();
        assert_eq!(evolve_state(&s, &phi, 0.0).unwrap(), phi);
        let later = evolve_state(&s, &phi, 3.7).unwrap();
        assert!((later.norm() - 1.0).abs() < 1e-12);
        assert!(matches!(
            evolve_state(&s, &StateVector::zeros(6), 1.0),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn heisenberg_identities() {
        let s = Spectrum::harmonic(1.0, 6).unwrap();
        let t = build_time_operator(&s, 6).unwrap();
        assert_eq!(heisenberg_t(&t, &s, 0.0).unwrap(), t);
        let at_period = heisenberg_t(&t, &s, TAU).unwrap();
        assert!(at_period.max_abs_diff(&t).unwrap() < 1e-14);

        let two = Spectrum::larmor(1.7, 1.0).unwrap();
        let t2 = build_time_operator(&two, 2).unwrap();
        let tt = heisenberg_t(&t2, &two, 0.4).unwrap();
        let w = two.transition_frequency(1, 0);
        let want = Complex64::new(0.0, 1.0 / w) * Complex64::from_polar(1.0, w * 0.4);
        assert!((tt.get(1, 0) - want).norm() < 1e-15);
        assert!(tt.is_hermitian(0.0));
    }

    #[test]
    fn closed_forms() {
        let s = Spectrum::harmonic(1.0, 8).unwrap();
        assert_eq!(expectation_t_closed(1, 0, 0.0, &s).unwrap(), 0.0);
        assert!((expectation_t_closed(1, 0, 0.01, &s).unwrap() - 0.009_999_833_334_166_665).abs() < 1e-17);
        assert!(matches!(expectation_t_closed(0, 1, 0.1, &s), Err(Error::Index(_))));

        let two = Spectrum::harmonic(1.0, 2).unwrap();
        let tau = 0.3;
        assert!((variance_t_closed(1, 0, tau, &two, 2).unwrap() - tau.cos().powi(2)).abs() < 1e-15);

        for (k, l) in [(1, 0), (5, 2), (7, 3)] {
            let a = variance_t_closed(k, l, 0.0, &s, 8).unwrap();
            let b = static_variance_closed(k, l, &s, 8).unwrap();
            assert!((a - b).abs() < 1e-12, "({k},{l}): {a} vs {b}");
        }
        assert!(matches!(variance_t_closed(5, 2, 0.0, &s, 4), Err(Error::Index(_))));
    }

    #[test]
    fn oracle_static_values() {
        let s = Spectrum::harmonic(1.0, 16).unwrap();
        let r = oracle_report(3, 1, 0.0, 0, &s, 16).unwrap();
        assert!(r.expectation.abs() < 1e-14);
        let closed = variance_t_closed(3, 1, 0.0, &s, 16).unwrap();
        assert!((r.variance - closed).abs() < 1e-12);
        assert_eq!(r.method, Method::MatrixOracle);
    }

    #[test]
    fn sweep_rows_are_ordered() {
        let s = Spectrum::harmonic(1.0, 12).unwrap();
        let taus = tau_grid(TAU, 10);
        let rows = sweep(&s, 1, 0, 0, 12, &taus).unwrap();
        assert_eq!(rows.len(), 20);
        for (i, pair) in rows.chunks(2).enumerate() {
            assert_eq!(pair[0].tau, taus[i]);
            assert_eq!(pair[0].method, Method::ClosedForm);
            assert_eq!(pair[1].method, Method::MatrixOracle);
        }
        assert_eq!(rows[0].to_csv_line().split(',').count(), 6);
    }

    #[test]
    fn schrodinger_heisenberg_agree() {
        let s = Spectrum::particle_in_box(0.3, 10).unwrap();
        let t = build_time_operator(&s, 10).unwrap();
        let phi = StateVector::from_real(&[0.1, 0.4, -0.2, 0.0, 0.3, -0.6, 0.1, 0.2, 0.0, -0.3]).normalized();
        let time = 1.37;
        let a = expectation(&heisenberg_t(&t, &s, time).unwrap(), &phi).unwrap();
        let b = expectation(&t, &evolve_state(&s, &phi, time).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn short_time_defect_basics() {
        let s = Spectrum::harmonic(1.0, 4).unwrap();
        let phi = normalized_pair_vector(1, 0, 4).unwrap();
        assert_eq!(short_time_defect(&s, &phi, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn covariance_defect_needs_lattice_for_cycles() {
        use crate::spectrum::{Commensurability, Level};
        let s = Spectrum::custom(
            1.0,
            1.0,
            vec![
                Level::Exact(crate::rational::integer(1)),
                Level::Exact(crate::rational::integer(2)),
                Level::Irrational { approx: 3.3 },
            ],
            Commensurability::Commensurable,
        )
        .unwrap();
        assert!(covariance_defect(&s, 1, 0, 0.0, 0, 3).unwrap() < 1e-15);
        assert!(matches!(
            covariance_defect(&s, 1, 0, 0.0, 1, 3),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn extrapolation_validates_input() {
        let s = Spectrum::harmonic(1.0, 64).unwrap();
        assert!(extrapolate_static_variance(&s, 1, 0, &[16, 32]).is_err());
        assert!(extrapolate_static_variance(&s, 1, 0, &[16, 30, 60]).is_err());
        let e = extrapolate_static_variance(&s, 1, 0, &[16, 32, 64]).unwrap();
        assert!(e.order > 2.5 && e.order < 3.5, "order {}", e.order);
    }
}
