//! End-to-end invariant suite backing the `verify` subcommand.
//!
//! Every check builds its time operator through [`VerifyConfig::time_operator`],
//! so a single flipped entry (see [`VerifyConfig::fault`]) propagates into
//! every check that touches it.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::canonical_domain::{assemble, normalized_pair_vector, pair_vector};
use crate::clock::ProjectedClock;
use crate::dynamics::{self, MatrixOracle};
use crate::error::Result;
use crate::operators::{build_hamiltonian, build_time_operator, ccr_residual, OperatorMatrix};
use crate::rational::{self, integer};
use crate::spectrum::{Commensurability, Level, Spectrum};
use crate::time_invariant::{invariant_set, TimeInvariantSet};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub omega: f64,
    pub levels: usize,
    pub seed: u64,
    /// Flip the sign of `T[row][col]` after construction.
    pub fault: Option<(usize, usize)>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            omega: 1.0,
            levels: 64,
            seed: 42,
            fault: None,
        }
    }
}

impl VerifyConfig {
    pub fn time_operator(&self, spectrum: &Spectrum, m: usize) -> Result<OperatorMatrix> {
        let mut t = build_time_operator(spectrum, m)?;
        if let Some((r, c)) = self.fault {
            if r < m && c < m {
                t.set(r, c, -t.get(r, c));
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "[{}] {:>2} {:<28} {:>9.1} ms  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.name,
                c.elapsed_ms,
                c.detail
            );
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

type Outcome = Result<(bool, String)>;
type Check = (u8, &'static str, fn(&VerifyConfig) -> Outcome);

pub fn run_suite(config: &VerifyConfig) -> SuiteReport {
    let checks: [Check; 8] = [
        (1, "ccr_exactness", check_ccr),
        (2, "time_invariant_taxonomy", check_taxonomy),
        (3, "closed_form_vs_oracle", check_oracle),
        (4, "clock_readout", check_readout),
        (5, "covariance_near_ticks", check_covariance),
        (6, "short_time_approximation", check_short_time),
        (7, "larmor_protocol", check_larmor),
        (8, "resolution_report", check_resolution),
    ];
    let checks: Vec<CheckResult> = checks
        .iter()
        .map(|&(id, name, f)| {
            let start = Instant::now();
            let (passed, detail) = match f(config) {
                Ok(outcome) => outcome,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                id,
                name,
                passed,
                detail,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect();
    SuiteReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Unit-norm canonical vector from 1..=8 random pairs with complex weights.
pub fn random_canonical_vector(rng: &mut impl Rng, m: usize) -> Result<crate::operators::StateVector> {
    let mut pairs = BTreeMap::new();
    for _ in 0..rng.random_range(1..=8) {
        let k = rng.random_range(1..m);
        let l = rng.random_range(0..k);
        let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        *pairs.entry((k, l)).or_insert(Complex64::new(0.0, 0.0)) += a;
    }
    Ok(assemble(pairs, m)?.into_state().normalized())
}

fn check_ccr(cfg: &VerifyConfig) -> Outcome {
    let m = cfg.levels;
    let s = Spectrum::harmonic(cfg.omega, m)?;
    let t = cfg.time_operator(&s, m)?;
    let h = build_hamiltonian(&s, m)?;
    let hermitian = t.hermiticity_defect();
    let mut worst: f64 = 0.0;
    for k in 1..=8.min(m - 1) {
        for l in 0..k {
            worst = worst.max(ccr_residual(&t, &h, &pair_vector(k, l, m)?, s.hbar())?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..100 {
        let phi = random_canonical_vector(&mut rng, m)?;
        worst = worst.max(ccr_residual(&t, &h, &phi, s.hbar())?);
    }
    Ok((
        worst <= 1e-12 && hermitian == 0.0,
        format!("max residual {worst:.2e}, hermiticity defect {hermitian:.2e} at M = {m}"),
    ))
}

fn check_taxonomy(cfg: &VerifyConfig) -> Outcome {
    let h = Spectrum::harmonic(cfg.omega, cfg.levels)?;
    let hs = invariant_set(&h, cfg.levels)?;
    let harmonic_ok = hs.exact_base() == Some(&integer(1)) && hs.base_period() == Some(TAU / cfg.omega);
    let b = Spectrum::particle_in_box(1.0, 16)?;
    let bs = invariant_set(&b, 16)?;
    let box_ok = crate::time_invariant::difference_gcd(&b, 16)? == integer(1) && bs.base_period() == Some(TAU);
    let irr = Spectrum::custom(
        cfg.omega,
        1.0,
        vec![
            Level::Exact(integer(1)),
            Level::Exact(integer(2)),
            Level::Irrational {
                approx: 1.0 + std::f64::consts::SQRT_2,
            },
        ],
        Commensurability::Commensurable,
    )?;
    let irr_ok = invariant_set(&irr, 3)? == TimeInvariantSet::ZeroOnly;
    Ok((
        harmonic_ok && box_ok && irr_ok,
        format!("harmonic {hs}; box(1,16) {bs}; irrational {}", invariant_set(&irr, 3)?),
    ))
}

fn check_oracle(cfg: &VerifyConfig) -> Outcome {
    let m = 128;
    let s = Spectrum::harmonic(cfg.omega, 256)?;
    let oracle = MatrixOracle::with_operator(&s, cfg.time_operator(&s, m)?, 1, 0)?;
    let taus = dynamics::tau_grid(oracle.pair_period(), dynamics::DEFAULT_GRID_POINTS);
    let mut worst: f64 = 0.0;
    for &tau in &taus {
        let brute = oracle.report(tau, 0)?;
        let e = dynamics::expectation_t_closed(1, 0, tau, &s)?;
        let v = dynamics::variance_t_closed(1, 0, tau, &s, m)?;
        worst = worst.max((brute.expectation - e).abs()).max((brute.variance - v).abs());
    }
    let ext = dynamics::extrapolate_static_variance(&s, 1, 0, &[64, 128, 256])?;
    let target = (1.0 + 0.5 * (PI * PI / 3.0 - 3.0)) / (cfg.omega * cfg.omega);
    let ext_err = (ext.value - target).abs();
    Ok((
        worst <= 1e-10 && ext_err <= 1e-4,
        format!(
            "max |closed − oracle| {worst:.2e} over {} points; extrapolated ΔT² {:.10} ± {:.1e} (off by {ext_err:.1e})",
            taus.len(),
            ext.value,
            ext.error_bar
        ),
    ))
}

fn harmonic_clock(cfg: &VerifyConfig, omega: f64) -> Result<ProjectedClock> {
    let m = cfg.levels.max(2);
    let s = Spectrum::harmonic(omega, m)?;
    ProjectedClock::from_operators(&s, &cfg.time_operator(&s, m)?, &build_hamiltonian(&s, m)?, 1, 0)
}

fn check_readout(cfg: &VerifyConfig) -> Outcome {
    let clock = harmonic_clock(cfg, 1.0)?;
    let half = clock.hbar() / 2.0;
    let mut worst_tau: f64 = 0.0;
    let mut worst_product: f64 = 0.0;
    for tau in [0.001, 0.01, 0.05] {
        let reading = clock.read_time(&clock.clock_state(tau), 0, 0, 0)?;
        worst_tau = worst_tau.max((reading.tau_arcsin - tau).abs());
        worst_product = worst_product.max((reading.uncertainty_product - half * tau.cos().abs()).abs());
    }
    let at_zero = (clock.uncertainty_product(0.0)? - half).abs();
    Ok((
        worst_tau <= 1e-12 && worst_product <= 1e-12 && at_zero <= 1e-12,
        format!(
            "max |τ_arcsin − τ| {worst_tau:.1e}, max product error {worst_product:.1e}, |ΔTΔH(0) − ħ/2| {at_zero:.1e}"
        ),
    ))
}

fn check_covariance(cfg: &VerifyConfig) -> Outcome {
    let m = cfg.levels;
    let s = Spectrum::harmonic(cfg.omega, m)?;
    let t = cfg.time_operator(&s, m)?;
    let taus = [1e-2, 5e-3, 2.5e-3].map(|x| x / cfg.omega);
    let defects = taus
        .iter()
        .map(|&tau| dynamics::covariance_defect_with(&s, &t, 1, 0, tau, 0))
        .collect::<Result<Vec<_>>>()?;
    let ratios = [defects[0] / defects[1], defects[1] / defects[2]];
    let ratios_ok = ratios.iter().all(|r| (3.8..=4.2).contains(r));
    let mut worst_tick: f64 = 0.0;
    for j in -2..=2 {
        worst_tick = worst_tick.max(dynamics::covariance_defect_with(&s, &t, 1, 0, 0.0, j)?);
    }
    Ok((
        ratios_ok && worst_tick <= 1e-12,
        format!(
            "halving ratios {:.4}, {:.4}; max defect on ticks {worst_tick:.1e}",
            ratios[0], ratios[1]
        ),
    ))
}

/// `√(((ω_0²/2)² + (ω_1²/2)²)/2)` for `φ_{1,0}` of the harmonic spectrum.
fn short_time_constant(omega: f64) -> f64 {
    let (w0, w1) = (0.5 * omega, 1.5 * omega);
    (((w0 * w0 / 2.0).powi(2) + (w1 * w1 / 2.0).powi(2)) / 2.0).sqrt()
}

fn check_short_time(cfg: &VerifyConfig) -> Outcome {
    let s = Spectrum::harmonic(cfg.omega, cfg.levels)?;
    let phi = normalized_pair_vector(1, 0, cfg.levels)?;
    let t = 1e-3 / cfg.omega;
    let measured = dynamics::short_time_defect(&s, &phi, t)? / (t * t);
    let expected = short_time_constant(cfg.omega);
    let rel = (measured / expected - 1.0).abs();
    Ok((
        rel <= 0.01,
        format!("defect/t² = {measured:.6} vs {expected:.6} (rel {rel:.1e})"),
    ))
}

fn check_larmor(cfg: &VerifyConfig) -> Outcome {
    let s = Spectrum::larmor(cfg.omega, 1.0)?;
    let clock = ProjectedClock::from_operators(&s, &cfg.time_operator(&s, 2)?, &build_hamiltonian(&s, 2)?, 1, 0)?;
    let tau = 0.01 / cfg.omega;
    let state = clock.clock_state(tau);
    let big = clock.read_time(&state, 1_000_000, cfg.seed, 0)?;
    let sigma = big.std_error.unwrap_or(f64::INFINITY);
    let big_ok = (big.tau_arcsin - tau).abs() <= 3.0 * sigma;
    let covered = (0..100u64)
        .map(|i| clock.read_time(&state, 10_000, cfg.seed.wrapping_add(i), 0))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .filter(|r| (r.tau_arcsin - tau).abs() <= 3.0 * r.std_error.unwrap_or(0.0))
        .count();
    let transition = clock.eigenstate_transition_time()?;
    let transition_ok = (transition.time - PI / cfg.omega).abs() <= 1e-6;
    Ok((
        big_ok && covered >= 95 && transition_ok,
        format!(
            "τ = {:.6} ± {sigma:.1e} (true {tau}); 3σ coverage {covered}/100; transition {:.9} vs π/ω, eigenvalue gap {:.6}",
            big.tau_arcsin, transition.time, transition.eigenvalue_difference
        ),
    ))
}

fn check_resolution(cfg: &VerifyConfig) -> Outcome {
    let custom = Spectrum::custom(
        cfg.omega,
        1.0,
        ["1/2", "3/4", "2"]
            .iter()
            .map(|t| rational::parse_rational(t).map(Level::Exact))
            .collect::<Result<_>>()?,
        Commensurability::Commensurable,
    )?;
    let spectra = [
        Spectrum::harmonic(cfg.omega, 4)?,
        Spectrum::particle_in_box(cfg.omega, 4)?,
        custom,
    ];
    let mut ok = true;
    let mut count = 0;
    for s in &spectra {
        let t = cfg.time_operator(s, s.len())?;
        let h = build_hamiltonian(s, s.len())?;
        for k in 1..s.len() {
            for l in 0..k {
                let r = ProjectedClock::from_operators(s, &t, &h, k, l)?.resolution_report();
                let gap = s.energy(k) - s.energy(l);
                ok &= r.delta_t == 2.0 * PI * s.hbar() / gap && r.delta_time_operator == s.hbar() / gap;
                count += 1;
            }
        }
    }
    Ok((ok, format!("{count} pairs over harmonic, box, custom")))
}
