//! The two-level clock obtained by compressing `T` and `H` onto
//! `span{|k⟩, |l⟩}`.
//!
//! In basis order `(k, l)` the compressed time operator is
//! `T_kl = ħ/(E_l − E_k)·σ_y`, so measuring `S_y = (ħ/2)σ_y` reads the clock.
//! Clock states `Λ(τ) = 2^{-1/2}(e^{−iω_kτ}|k⟩ − e^{−iω_lτ}|l⟩)` satisfy
//! `U_t Λ(τ) = Λ(τ + t)`; near the ticks `t ∈ 2πℤ/ω_kl` the readout gives
//! `τ` and `ΔT_kl·ΔH_kl` saturates at `ħ/2`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{
    build_hamiltonian, build_time_operator, fmt_f64, project_pair, variance, OperatorMatrix, StateVector,
};
use crate::spectrum::Spectrum;
use crate::time_invariant::{pair_set, TimeInvariantSet};

/// Phase window `|ω_kl·τ|` inside which a reading counts as near a tick.
pub const NEAR_TICK_PHASE: f64 = 0.1;

/// Shots per independently seeded sampling chunk.
pub const SHOTS_PER_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct ProjectedClock {
    k: usize,
    l: usize,
    t_kl: OperatorMatrix,
    h_kl: OperatorMatrix,
    lattice: TimeInvariantSet,
    omega_kl: f64,
    energies: [f64; 2],
    hbar: f64,
}

impl ProjectedClock {
    pub fn new(spectrum: &Spectrum, k: usize, l: usize) -> Result<ProjectedClock> {
        check_order(spectrum, k, l)?;
        let t = build_time_operator(spectrum, k + 1)?;
        let h = build_hamiltonian(spectrum, k + 1)?;
        ProjectedClock::from_operators(spectrum, &t, &h, k, l)
    }

    /// Compresses caller-supplied `T` and `H`.
    pub fn from_operators(
        spectrum: &Spectrum,
        t: &OperatorMatrix,
        h: &OperatorMatrix,
        k: usize,
        l: usize,
    ) -> Result<ProjectedClock> {
        check_order(spectrum, k, l)?;
        Ok(ProjectedClock {
            k,
            l,
            t_kl: project_pair(t, k, l)?,
            h_kl: project_pair(h, k, l)?,
            lattice: pair_set(spectrum, k, l)?,
            omega_kl: spectrum.transition_frequency(k, l),
            energies: [spectrum.energy(k), spectrum.energy(l)],
            hbar: spectrum.hbar(),
        })
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.k, self.l)
    }

    pub fn t_kl(&self) -> &OperatorMatrix {
        &self.t_kl
    }

    pub fn h_kl(&self) -> &OperatorMatrix {
        &self.h_kl
    }

    pub fn lattice(&self) -> &TimeInvariantSet {
        &self.lattice
    }

    pub fn omega_kl(&self) -> f64 {
        self.omega_kl
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `2π/ω_kl`
    pub fn period(&self) -> f64 {
        TAU / self.omega_kl
    }

    /// `c` in `T_kl = c·σ_y`, i.e. `ħ/(E_l − E_k)`.
    pub fn sigma_y_coefficient(&self) -> f64 {
        self.hbar / (self.energies[1] - self.energies[0])
    }

    /// `S_y = (ħ/2)σ_y` in the clock basis.
    pub fn s_y(&self) -> OperatorMatrix {
        crate::operators::sigma_y().scale(Complex64::new(self.hbar / 2.0, 0.0))
    }

    /// `Λ(τ)` in basis order `(k, l)`.
    pub fn clock_state(&self, tau: f64) -> StateVector {
        let [ek, el] = self.energies;
        StateVector::new(vec![
            Complex64::from_polar(FRAC_1_SQRT_2, -ek / self.hbar * tau),
            -Complex64::from_polar(FRAC_1_SQRT_2, -el / self.hbar * tau),
        ])
    }

    /// `U_t` restricted to the block.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        check_block(state)?;
        let c = state.coeffs();
        Ok(StateVector::new(vec![
            c[0] * Complex64::from_polar(1.0, -self.energies[0] / self.hbar * t),
            c[1] * Complex64::from_polar(1.0, -self.energies[1] / self.hbar * t),
        ]))
    }

    /// Places a block state into the full eigenbasis of dimension `m`.
    pub fn embed(&self, state: &StateVector, m: usize) -> Result<StateVector> {
        check_block(state)?;
        if self.k >= m {
            return Err(Error::Index(format!(
                "pair ({},{}) outside dimension {m}",
                self.k, self.l
            )));
        }
        let mut full = StateVector::zeros(m);
        full.coeffs_mut()[self.k] = state.coeffs()[0];
        full.coeffs_mut()[self.l] = state.coeffs()[1];
        Ok(full)
    }

    /// Extracts the `(k, l)` block of a full eigenbasis state, which must
    /// carry weight at least `1 − 1e-12` there.
    pub fn project_state(&self, full: &StateVector) -> Result<StateVector> {
        if self.k >= full.dim() {
            return Err(Error::Index(format!(
                "pair ({},{}) outside dimension {}",
                self.k,
                self.l,
                full.dim()
            )));
        }
        let block = StateVector::new(vec![full.coeffs()[self.k], full.coeffs()[self.l]]);
        let total = full.norm_sqr();
        let outside = if total > 0.0 {
            1.0 - block.norm_sqr() / total
        } else {
            1.0
        };
        if outside > 1e-12 {
            return Err(Error::Projection {
                k: self.k,
                l: self.l,
                weight: outside,
            });
        }
        Ok(block)
    }

    /// `ΔT_kl·ΔH_kl` on `Λ(τ)`, from the variances.
    pub fn uncertainty_product(&self, tau: f64) -> Result<f64> {
        self.uncertainty_product_of(&self.clock_state(tau))
    }

    pub fn uncertainty_product_of(&self, state: &StateVector) -> Result<f64> {
        Ok((variance(&self.t_kl, state)? * variance(&self.h_kl, state)?).sqrt())
    }

    /// Probability of `S_y = +ħ/2` for a block state.
    pub fn prob_sy_plus(&self, state: &StateVector) -> Result<f64> {
        check_block(state)?;
        let c = state.coeffs();
        // ⟨+y| = (1, −i)/√2
        let amp = (c[0] - Complex64::i() * c[1]) * FRAC_1_SQRT_2;
        Ok(amp.norm_sqr().clamp(0.0, 1.0))
    }

    /// Reads the clock from a block state. `shots = 0` uses the exact
    /// expectation `⟨T_kl⟩`; otherwise `⟨S_y⟩` is estimated from Born-rule
    /// samples drawn with `seed`. `cycles` is the caller's count of completed
    /// periods.
    pub fn read_time(&self, state: &StateVector, shots: u64, seed: u64, cycles: i64) -> Result<ClockReading> {
        check_block(state)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::ContractViolation(format!(
                "clock state is not normalized (norm {norm})"
            )));
        }
        let (mean_t, ensemble) = if shots == 0 {
            (crate::operators::expectation(&self.t_kl, state)?, None)
        } else {
            let ensemble = MeasurementEnsemble::sample(self.prob_sy_plus(state)?, shots, seed);
            let mean_sy = ensemble.mean_sy(self.hbar);
            (2.0 * self.sigma_y_coefficient() / self.hbar * mean_sy, Some(ensemble))
        };
        let w = self.omega_kl;
        let phase = w * mean_t;
        let clamped = phase.abs() > 1.0;
        let tau_arcsin = phase.clamp(-1.0, 1.0).asin() / w;
        Ok(ClockReading {
            tau_linear: mean_t,
            tau_arcsin,
            n: cycles,
            t: tau_arcsin + cycles as f64 * self.period(),
            uncertainty_product: self.uncertainty_product_of(state)?,
            shots,
            seed,
            clamped,
            std_error: (shots > 0).then(|| 1.0 / (w.abs() * (shots as f64).sqrt())),
            near_tick: (w * tau_arcsin).abs() <= NEAR_TICK_PHASE,
            ensemble,
        })
    }

    /// Evolves `Λ(0)` for `t = τ + n·P` and reads the clock.
    pub fn run_protocol(&self, tau: f64, cycles: i64, shots: u64, seed: u64) -> Result<ProtocolRow> {
        let t = tau + cycles as f64 * self.period();
        let state = self.evolve(&self.clock_state(0.0), t)?;
        let reading = self.read_time(&state, shots, seed, cycles)?;
        Ok(ProtocolRow {
            t,
            tau_true: tau,
            reading,
        })
    }

    /// Time for `|S_{y,+}⟩` to first reach `|S_{y,−}⟩`, located as the first
    /// maximum of the transition probability on a `10⁴`-point grid per period
    /// refined by bisection on the sign of its derivative.
    pub fn eigenstate_transition_time(&self) -> Result<TransitionReport> {
        const GRID: usize = 10_000;
        const OVERLAP_TOL: f64 = 1e-9;
        let period = self.period().abs();
        let step = period / GRID as f64;
        let plus = StateVector::new(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        ]);
        let minus = StateVector::new(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, -FRAC_1_SQRT_2),
        ]);
        let freqs = [self.energies[0] / self.hbar, self.energies[1] / self.hbar];
        // p(t) = |⟨−|U_t|+⟩|², p'(t) = 2 Re(conj(A)·A').
        let amp = |t: f64| -> (Complex64, Complex64) {
            let mut a = Complex64::new(0.0, 0.0);
            let mut da = Complex64::new(0.0, 0.0);
            for ((m, p), w) in minus.coeffs().iter().zip(plus.coeffs()).zip(freqs) {
                let term = m.conj() * Complex64::from_polar(1.0, -w * t) * p;
                a += term;
                da += term * Complex64::new(0.0, -w);
            }
            (a, da)
        };
        let prob = |t: f64| amp(t).0.norm_sqr();
        let slope = |t: f64| {
            let (a, da) = amp(t);
            2.0 * (a.conj() * da).re
        };
        for i in 1..=(2 * GRID) {
            let (lo, hi) = ((i - 1) as f64 * step, i as f64 * step);
            if !(slope(lo) > 0.0 && slope(hi) <= 0.0) {
                continue;
            }
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if slope(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let time = 0.5 * (a + b);
            let probability = prob(time);
            if probability >= 1.0 - OVERLAP_TOL {
                return Ok(TransitionReport {
                    time,
                    probability,
                    eigenvalue_difference: 2.0 * self.sigma_y_coefficient().abs(),
                });
            }
        }
        Err(Error::ContractViolation(
            "no complete S_y transition within two periods".into(),
        ))
    }

    /// `δt = 2πħ/(E_k − E_l)` and `ΔT = ħ/(E_k − E_l)`.
    pub fn resolution_report(&self) -> Resolution {
        let gap = self.energies[0] - self.energies[1];
        Resolution {
            delta_t: TAU * self.hbar / gap,
            delta_time_operator: self.hbar / gap,
        }
    }
}

fn check_order(spectrum: &Spectrum, k: usize, l: usize) -> Result<()> {
    spectrum.check_index(k)?;
    spectrum.check_index(l)?;
    if k <= l {
        return Err(Error::Index(format!("clock pair needs k > l, got ({k},{l})")));
    }
    Ok(())
}

fn check_block(state: &StateVector) -> Result<()> {
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: state.dim(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockReading {
    /// `⟨T_kl⟩`, the small-angle readout.
    pub tau_linear: f64,
    /// `arcsin(ω_kl⟨T_kl⟩)/ω_kl` on the principal branch.
    pub tau_arcsin: f64,
    /// Cycle count supplied by the caller.
    pub n: i64,
    /// `τ_arcsin + n·P`
    pub t: f64,
    pub uncertainty_product: f64,
    pub shots: u64,
    pub seed: u64,
    /// `|ω_kl⟨T_kl⟩|` exceeded 1 through sampling noise and was clamped.
    pub clamped: bool,
    /// `1/(|ω_kl|√shots)`, the standard error of `τ_arcsin` under sampling.
    pub std_error: Option<f64>,
    pub near_tick: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<MeasurementEnsemble>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRow {
    pub t: f64,
    pub tau_true: f64,
    pub reading: ClockReading,
}

pub const PROTOCOL_HEADER: &str = "t,tau_true,n,tau_linear,tau_arcsin,shots,uncertainty_product,seed";

impl ProtocolRow {
    pub fn to_csv_line(&self) -> String {
        let r = &self.reading;
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt_f64(self.t),
            fmt_f64(self.tau_true),
            r.n,
            fmt_f64(r.tau_linear),
            fmt_f64(r.tau_arcsin),
            r.shots,
            fmt_f64(r.uncertainty_product),
            r.seed
        )
    }
}

/// Counts of `S_y` outcomes `+ħ/2` and `−ħ/2`.
///
/// Shots are split into chunks of [`SHOTS_PER_CHUNK`]; chunk `c` draws from
/// ChaCha8 seeded with `seed` on stream `c`, one uniform `f64` per shot, and
/// a shot is `+ħ/2` when the draw is below `p(+)`. Chunks are independent,
/// so they run in parallel and merge by adding counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeasurementEnsemble {
    pub shots: u64,
    pub seed: u64,
    pub plus: u64,
    pub minus: u64,
}

impl MeasurementEnsemble {
    pub fn sample(p_plus: f64, shots: u64, seed: u64) -> MeasurementEnsemble {
        let chunks = shots.div_ceil(SHOTS_PER_CHUNK);
        let plus: u64 = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c);
                let len = SHOTS_PER_CHUNK.min(shots - c * SHOTS_PER_CHUNK);
                (0..len).filter(|_| rng.random::<f64>() < p_plus).count() as u64
            })
            .sum();
        MeasurementEnsemble {
            shots,
            seed,
            plus,
            minus: shots - plus,
        }
    }

    /// Sample mean of `S_y`.
    pub fn mean_sy(&self, hbar: f64) -> f64 {
        0.5 * hbar * (self.plus as f64 - self.minus as f64) / self.shots as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionReport {
    pub time: f64,
    pub probability: f64,
    /// Spacing of the two eigenvalues of `T_kl`.
    pub eigenvalue_difference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolution {
    /// Lattice spacing `2πħ/(E_k − E_l)`.
    pub delta_t: f64,
    /// Readout uncertainty `ħ/(E_k − E_l)` near a tick.
    pub delta_time_operator: f64,
}
