//! Discrete, non-degenerate, semibounded energy spectra `E_s = ħ·ω·f(s)`.
//!
//! A [`Spectrum`] is the only input the rest of the crate needs: the time
//! operator, the Hamiltonian, and the time-invariant set are all built from
//! it. Stored spectra are finite truncations; downstream results are always
//! "at truncation M".

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// One dimensionless level value `f(s)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Level {
    Exact(Rational),
    /// An irrational value known only by declaration; `approx` is used for
    /// floating-point work and ordering checks.
    Irrational {
        approx: f64,
    },
}

impl Level {
    pub fn to_f64(&self) -> f64 {
        match self {
            Level::Exact(r) => rational::to_f64(r),
            Level::Irrational { approx } => *approx,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Level::Exact(r) => Some(r),
            Level::Irrational { .. } => None,
        }
    }

    /// Parses `p/q` (exact) or `irr:<float>`.
    pub fn parse(text: &str) -> Result<Level> {
        let text = text.trim();
        match text.strip_prefix("irr:") {
            Some(value) => {
                let approx: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("`{text}` is not irr:<float>")))?;
                Ok(Level::Irrational { approx })
            }
            None => rational::parse_rational(text).map(Level::Exact),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Exact(r) => write!(f, "{}", rational::format_rational(r)),
            Level::Irrational { approx } => write!(f, "irr:{approx}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Commensurability {
    Commensurable,
    Incommensurate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Harmonic,
    Box,
    Larmor,
    Custom,
}

/// Closed form for `f(s)` beyond the stored levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtensionRule {
    /// `f(s) = s + 1/2`
    Harmonic,
    /// `f(s) = (s + 1)^2`
    Box,
    /// `f(s) = c` for every `s`
    Constant(f64),
    /// `f(s) = (s + offset)^power`
    Power { offset: f64, power: f64 },
}

impl ExtensionRule {
    pub fn eval(&self, s: usize) -> f64 {
        let s = s as f64;
        match *self {
            ExtensionRule::Harmonic => s + 0.5,
            ExtensionRule::Box => (s + 1.0) * (s + 1.0),
            ExtensionRule::Constant(c) => c,
            ExtensionRule::Power { offset, power } => (s + offset).powf(power),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    omega: f64,
    hbar: f64,
    levels: Vec<Level>,
    tag: Commensurability,
    kind: SpectrumKind,
    label: String,
}

fn check_scale(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpectrum(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

fn check_levels(n_levels: usize) -> Result<()> {
    if n_levels < 2 {
        return Err(Error::InvalidSpectrum(format!(
            "need at least 2 levels, got {n_levels}"
        )));
    }
    Ok(())
}

impl Spectrum {
    /// `f(s) = s + 1/2`, exact.
    pub fn harmonic(omega: f64, n_levels: usize) -> Result<Spectrum> {
        check_levels(n_levels)?;
        let levels = (0..n_levels as i64)
            .map(|s| Level::Exact(rational::rational(2 * s + 1, 2)))
            .collect();
        Spectrum::build(
            omega,
            1.0,
            levels,
            Commensurability::Commensurable,
            SpectrumKind::Harmonic,
            "harmonic",
        )
    }

    /// `f(s) = (s + 1)^2`, exact.
    pub fn particle_in_box(scale: f64, n_levels: usize) -> Result<Spectrum> {
        check_levels(n_levels)?;
        let levels = (1..=n_levels as i64)
            .map(|n| Level::Exact(rational::integer(n * n)))
            .collect();
        Spectrum::build(
            scale,
            1.0,
            levels,
            Commensurability::Commensurable,
            SpectrumKind::Box,
            "box",
        )
    }

    /// Spin-1/2 in a static field, `H = ω·S_z`: levels `f = (-1/2, +1/2)`.
    pub fn larmor(omega: f64, hbar: f64) -> Result<Spectrum> {
        let levels = vec![
            Level::Exact(rational::rational(-1, 2)),
            Level::Exact(rational::rational(1, 2)),
        ];
        Spectrum::build(
            omega,
            hbar,
            levels,
            Commensurability::Commensurable,
            SpectrumKind::Larmor,
            "larmor",
        )
    }

    /// Arbitrary levels. Any irrational level forces the incommensurate tag.
    pub fn custom(omega: f64, hbar: f64, levels: Vec<Level>, tag: Commensurability) -> Result<Spectrum> {
        let tag = if levels.iter().any(|l| matches!(l, Level::Irrational { .. })) {
            Commensurability::Incommensurate
        } else {
            tag
        };
        Spectrum::build(omega, hbar, levels, tag, SpectrumKind::Custom, "custom")
    }

    fn build(
        omega: f64,
        hbar: f64,
        levels: Vec<Level>,
        tag: Commensurability,
        kind: SpectrumKind,
        label: &str,
    ) -> Result<Spectrum> {
        check_scale("omega", omega)?;
        check_scale("hbar", hbar)?;
        if levels.is_empty() {
            return Err(Error::InvalidSpectrum("no levels".into()));
        }
        for (s, level) in levels.iter().enumerate() {
            let zero = match level {
                Level::Exact(r) => r.is_zero(),
                Level::Irrational { approx } => {
                    if !approx.is_finite() {
                        return Err(Error::InvalidSpectrum(format!("level {s} is not finite")));
                    }
                    *approx == 0.0
                }
            };
            if zero {
                return Err(Error::InvalidSpectrum(format!("level {s} is zero")));
            }
        }
        for (s, pair) in levels.windows(2).enumerate() {
            let increasing = match (&pair[0], &pair[1]) {
                (Level::Exact(a), Level::Exact(b)) => a < b,
                (a, b) => a.to_f64() < b.to_f64(),
            };
            if !increasing {
                return Err(Error::InvalidSpectrum(format!(
                    "levels {s} and {} are not strictly increasing ({} then {})",
                    s + 1,
                    pair[0],
                    pair[1]
                )));
            }
        }
        Ok(Spectrum {
            omega,
            hbar,
            levels,
            tag,
            kind,
            label: label.to_string(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Spectrum {
        self.label = label.into();
        self
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn tag(&self) -> Commensurability {
        self.tag
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn f(&self, s: usize) -> f64 {
        self.levels[s].to_f64()
    }

    /// `E_s = ħ·ω·f(s)`
    pub fn energy(&self, s: usize) -> f64 {
        self.hbar * self.omega * self.f(s)
    }

    pub fn energies(&self, m: usize) -> Result<Vec<f64>> {
        self.check_truncation(m)?;
        Ok((0..m).map(|s| self.energy(s)).collect())
    }

    /// Angular frequency `ω_s = E_s/ħ`.
    pub fn level_frequency(&self, s: usize) -> f64 {
        self.omega * self.f(s)
    }

    /// Transition frequency `ω_{s,s'} = (E_s − E_{s'})/ħ`.
    ///
    /// For exact levels the difference is taken before rounding.
    pub fn transition_frequency(&self, s: usize, s_prime: usize) -> f64 {
        self.omega * self.delta_f64(s, s_prime)
    }

    /// `f(s) − f(s')` as a float.
    pub fn delta_f64(&self, s: usize, s_prime: usize) -> f64 {
        match (&self.levels[s], &self.levels[s_prime]) {
            (Level::Exact(a), Level::Exact(b)) => rational::to_f64(&(a - b)),
            (a, b) => a.to_f64() - b.to_f64(),
        }
    }

    /// `Δ_{k,l} = f(k) − f(l)` when both levels are exact.
    pub fn delta_exact(&self, k: usize, l: usize) -> Option<Rational> {
        Some(self.levels[k].exact()? - self.levels[l].exact()?)
    }

    pub fn check_truncation(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.levels.len() {
            return Err(Error::Truncation {
                requested: m,
                available: self.levels.len(),
            });
        }
        Ok(())
    }

    pub fn check_index(&self, s: usize) -> Result<()> {
        if s >= self.levels.len() {
            return Err(Error::Index(format!(
                "level {s} out of range for {} stored levels",
                self.levels.len()
            )));
        }
        Ok(())
    }

    /// The closed form this spectrum was generated from, if any.
    pub fn natural_extension(&self) -> Option<ExtensionRule> {
        match self.kind {
            SpectrumKind::Harmonic => Some(ExtensionRule::Harmonic),
            SpectrumKind::Box => Some(ExtensionRule::Box),
            _ => None,
        }
    }

    /// Partial sums of `Σ E_s⁻²` over the stored levels, plus a tail estimate
    /// when `extension` gives `f(s)` beyond them.
    pub fn growth_condition_report(&self, extension: Option<ExtensionRule>) -> GrowthReport {
        let mut acc = 0.0;
        let partial_sums: Vec<f64> = (0..self.len())
            .map(|s| {
                let e = self.energy(s);
                acc += 1.0 / (e * e);
                acc
            })
            .collect();
        let tail = extension.map(|rule| self.tail_estimate(rule));
        let plausible = tail.as_ref().map(|t| t.convergent);
        GrowthReport {
            truncation: self.len(),
            partial_sums,
            tail_estimate: tail.as_ref().map(|t| t.value),
            block_ratios: tail.map(|t| t.block_ratios).unwrap_or_default(),
            condition_plausible: plausible,
        }
    }

    /// Sums `E_s⁻²` under the rule over dyadic blocks `[N·2^j, N·2^{j+1})`.
    /// Block sums shrinking geometrically mark the series as Cauchy; the
    /// remainder after the last block is closed off as a geometric series.
    fn tail_estimate(&self, rule: ExtensionRule) -> TailEstimate {
        const BLOCKS: u32 = 16;
        const RATIO_LIMIT: f64 = 0.9;
        let scale = self.hbar * self.omega;
        let start = self.len();
        let mut blocks = Vec::with_capacity(BLOCKS as usize);
        let mut lo = start;
        for _ in 0..BLOCKS {
            let hi = lo * 2;
            let sum: f64 = (lo..hi)
                .map(|s| {
                    let e = scale * rule.eval(s);
                    1.0 / (e * e)
                })
                .sum();
            blocks.push(sum);
            lo = hi;
        }
        let block_ratios: Vec<f64> = blocks.windows(2).map(|w| w[1] / w[0]).collect();
        let convergent = block_ratios.iter().rev().take(3).all(|r| *r < RATIO_LIMIT);
        let summed: f64 = blocks.iter().sum();
        let value = if convergent {
            let r = *block_ratios.last().unwrap_or(&0.0);
            summed + blocks.last().copied().unwrap_or(0.0) * r / (1.0 - r)
        } else {
            f64::INFINITY
        };
        TailEstimate {
            value,
            block_ratios,
            convergent,
        }
    }
}

struct TailEstimate {
    value: f64,
    block_ratios: Vec<f64>,
    convergent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub truncation: usize,
    /// `partial_sums[i] = Σ_{s ≤ i} E_s⁻²`
    pub partial_sums: Vec<f64>,
    /// Estimated `Σ_{s ≥ truncation} E_s⁻²`; infinite when the rule diverges.
    pub tail_estimate: Option<f64>,
    pub block_ratios: Vec<f64>,
    /// `None` when no extension rule was supplied.
    pub condition_plausible: Option<bool>,
}

impl GrowthReport {
    pub fn stored_sum(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    pub fn total_estimate(&self) -> Option<f64> {
        self.tail_estimate.map(|t| self.stored_sum() + t)
    }
}
