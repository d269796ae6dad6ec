//! Time-invariant sets: the times at which evolution maps the canonical
//! domain back into itself.
//!
//! For a single pair the set is the lattice `2πn/|ω_{k,l}|`. For the whole
//! truncated spectrum it is `2πj/(ω·gcd(Δ))`, where `Δ` holds every positive
//! difference `f(k) − f(l)`; the gcd is computed exactly over rationals. Any
//! incommensurate spectrum collapses the set to `{0}`.

use std::f64::consts::TAU;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, gcd_pair, Rational};
use crate::spectrum::{Commensurability, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub enum TimeInvariantSet {
    ZeroOnly,
    /// `{ j·P : j ∈ ℤ }`
    Lattice {
        /// `P` in time units.
        base_period: f64,
        /// `P / (2π/ω)`, when the generating differences are exact.
        exact_base: Option<Rational>,
        /// Number of leading levels the set was computed over.
        truncation: usize,
    },
}

impl TimeInvariantSet {
    pub fn base_period(&self) -> Option<f64> {
        match self {
            TimeInvariantSet::ZeroOnly => None,
            TimeInvariantSet::Lattice { base_period, .. } => Some(*base_period),
        }
    }

    pub fn exact_base(&self) -> Option<&Rational> {
        match self {
            TimeInvariantSet::Lattice { exact_base, .. } => exact_base.as_ref(),
            TimeInvariantSet::ZeroOnly => None,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, TimeInvariantSet::Lattice { .. })
    }

    /// The `j`-th element `j·P`; `None` for `j ≠ 0` on the zero-only set.
    pub fn element(&self, j: i64) -> Option<f64> {
        match self {
            TimeInvariantSet::ZeroOnly => (j == 0).then_some(0.0),
            TimeInvariantSet::Lattice { base_period, .. } => Some(j as f64 * base_period),
        }
    }

    /// Exact check that `j·P·ω_{k,l} ∈ 2πℤ`, i.e. `j·Δ_{k,l}·exact_base ∈ ℤ`.
    pub fn element_returns_pair(&self, spectrum: &Spectrum, j: i64, k: usize, l: usize) -> Option<bool> {
        let base = self.exact_base()?;
        let delta = spectrum.delta_exact(k, l)?;
        Some((Rational::from_integer(j.into()) * delta * base).is_integer())
    }

    /// Renders `T = { j * P }, P = <decimal> = 2*pi/(omega*<p/q>)`, or `T = {0}`.
    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TimeInvariantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeInvariantSet::ZeroOnly => write!(f, "T = {{0}}"),
            TimeInvariantSet::Lattice {
                base_period,
                exact_base,
                ..
            } => {
                write!(f, "T = {{ j * P }}, P = {base_period:.15}")?;
                if let Some(base) = exact_base {
                    write!(f, " = 2*pi/(omega*{})", rational::format_rational(&base.recip()))?;
                }
                Ok(())
            }
        }
    }
}

/// `𝒯_{k,l} = { t : t·ω_{k,l} = 2πn }`
pub fn pair_set(spectrum: &Spectrum, k: usize, l: usize) -> Result<TimeInvariantSet> {
    spectrum.check_index(k)?;
    spectrum.check_index(l)?;
    if k == l {
        return Err(Error::Index(format!("pair indices must differ, got ({k},{l})")));
    }
    let w = spectrum.transition_frequency(k, l).abs();
    let exact_base = spectrum.delta_exact(k, l).map(|d| {
        let d = if d < Rational::zero() { -d } else { d };
        d.recip()
    });
    Ok(TimeInvariantSet::Lattice {
        base_period: TAU / w,
        exact_base,
        truncation: k.max(l) + 1,
    })
}

/// gcd of all `Δ_{k,l} = f(k) − f(l)`, `k > l`, over the first `n_levels`.
pub fn difference_gcd(spectrum: &Spectrum, n_levels: usize) -> Result<Rational> {
    let mut table = gcd_table(spectrum, n_levels, n_levels)?;
    Ok(table.pop().expect("one row").1)
}

/// Running gcd of the difference set at each truncation `n_min..=n_max`.
fn gcd_table(spectrum: &Spectrum, n_min: usize, n_max: usize) -> Result<Vec<(usize, Rational)>> {
    if n_min < 2 || n_min > n_max || n_max > spectrum.len() {
        return Err(Error::InvalidInput(format!(
            "need 2 ≤ n_min ≤ n_max ≤ {}, got n_min = {n_min}, n_max = {n_max}",
            spectrum.len()
        )));
    }
    let exact: Vec<&Rational> = spectrum.levels()[..n_max]
        .iter()
        .enumerate()
        .map(|(s, level)| {
            level
                .exact()
                .ok_or_else(|| Error::InvalidInput(format!("level {s} is irrational; no exact gcd exists")))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(n_max - n_min + 1);
    let mut acc: Option<Rational> = None;
    for k in 1..n_max {
        for l in 0..k {
            let delta = exact[k] - exact[l];
            acc = Some(match acc {
                None => delta,
                Some(g) => gcd_pair(&g, &delta),
            });
        }
        let n = k + 1;
        if n >= n_min {
            rows.push((n, acc.clone().expect("at least one difference")));
        }
    }
    Ok(rows)
}

/// `𝒯` over the first `n_levels` levels.
pub fn invariant_set(spectrum: &Spectrum, n_levels: usize) -> Result<TimeInvariantSet> {
    if n_levels < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 levels, got {n_levels}")));
    }
    if n_levels > spectrum.len() {
        return Err(Error::Truncation {
            requested: n_levels,
            available: spectrum.len(),
        });
    }
    let has_irrational = spectrum.levels()[..n_levels].iter().any(|l| l.exact().is_none());
    if spectrum.tag() == Commensurability::Incommensurate || has_irrational {
        return Ok(TimeInvariantSet::ZeroOnly);
    }
    let gcd = difference_gcd(spectrum, n_levels)?;
    let base_period = TAU / (spectrum.omega() * rational::to_f64(&gcd));
    Ok(TimeInvariantSet::Lattice {
        base_period,
        exact_base: Some(gcd.recip()),
        truncation: n_levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationRow {
    pub n: usize,
    #[serde(skip)]
    pub gcd: Rational,
    /// The gcd here and at the two previous truncations agree.
    pub stable: bool,
}

impl StabilizationRow {
    pub fn to_csv_line(&self) -> String {
        format!("{},{},{},{}", self.n, self.gcd.numer(), self.gcd.denom(), self.stable)
    }
}

pub const STABILIZATION_HEADER: &str = "n,gcd_p,gcd_q,stable";

pub fn gcd_stabilization(spectrum: &Spectrum, n_min: usize, n_max: usize) -> Result<Vec<StabilizationRow>> {
    let table = gcd_table(spectrum, n_min, n_max)?;
    Ok(table
        .iter()
        .enumerate()
        .map(|(i, (n, g))| StabilizationRow {
            n: *n,
            gcd: g.clone(),
            stable: i >= 2 && table[i - 1].1 == *g && table[i - 2].1 == *g,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeDecomposition {
    /// Cycle index.
    pub n: i64,
    /// Offset within the cycle, `0 ≤ τ < P`.
    pub tau: f64,
    /// Signed distance from `t` to the nearest lattice point.
    pub nearest_offset: f64,
    /// False when the set is `{0}` and `τ` is just `t`.
    pub has_lattice: bool,
}

/// Splits `t = n·P + τ` with `0 ≤ τ < P`.
pub fn decompose_time(t: f64, set: &TimeInvariantSet) -> TimeDecomposition {
    let Some(p) = set.base_period() else {
        return TimeDecomposition {
            n: 0,
            tau: t,
            nearest_offset: t,
            has_lattice: false,
        };
    };
    let mut n = (t / p).floor();
    let mut tau = t - n * p;
    if tau >= p {
        tau -= p;
        n += 1.0;
    } else if tau < 0.0 {
        tau += p;
        n -= 1.0;
    }
    let nearest_offset = t - (t / p).round() * p;
    TimeDecomposition {
        n: n as i64,
        tau,
        nearest_offset,
        has_lattice: true,
    }
}

/// Whether `t` lies within `tol` of a lattice point (or of 0 for `{0}`).
pub fn near_lattice(t: f64, set: &TimeInvariantSet, tol: f64) -> bool {
    decompose_time(t, set).nearest_offset.abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{integer, rational};
    use crate::spectrum::Level;
    use std::f64::consts::PI;

    #[test]
    fn pair_sets() {
        let h = Spectrum::harmonic(1.0, 6).unwrap();
        assert!((pair_set(&h, 1, 0).unwrap().base_period().unwrap() - TAU).abs() < 1e-15);
        assert!((pair_set(&h, 3, 1).unwrap().base_period().unwrap() - PI).abs() < 1e-15);
        assert_eq!(pair_set(&h, 3, 1).unwrap().exact_base(), Some(&rational(1, 2)));
        assert!(matches!(pair_set(&h, 2, 2), Err(Error::Index(_))));
        assert!(matches!(pair_set(&h, 9, 2), Err(Error::Index(_))));

        let hbar = 0.5;
        let two = Spectrum::larmor(3.0, hbar).unwrap();
        let gap = two.energy(1) - two.energy(0);
        let p = pair_set(&two, 1, 0).unwrap().base_period().unwrap();
        assert!((p - TAU * hbar / gap).abs() < 1e-14);
    }

    #[test]
    fn invariant_set_cases() {
        let h = Spectrum::harmonic(2.0, 10).unwrap();
        let set = invariant_set(&h, 10).unwrap();
        assert_eq!(set.exact_base(), Some(&integer(1)));
        assert!((set.base_period().unwrap() - PI).abs() < 1e-15);

        let b = Spectrum::particle_in_box(1.0, 8).unwrap();
        assert_eq!(invariant_set(&b, 8).unwrap().exact_base(), Some(&integer(1)));

        let irr = Spectrum::custom(
            1.0,
            1.0,
            vec![
                Level::Exact(integer(1)),
                Level::Exact(integer(2)),
                Level::Irrational { approx: 2.41421356 },
            ],
            Commensurability::Commensurable,
        )
        .unwrap();
        assert_eq!(invariant_set(&irr, 3).unwrap(), TimeInvariantSet::ZeroOnly);

        assert!(matches!(invariant_set(&h, 1), Err(Error::InvalidInput(_))));
        assert!(matches!(invariant_set(&h, 11), Err(Error::Truncation { .. })));
    }

    #[test]
    fn declared_incommensurate_is_zero_only() {
        let s = Spectrum::custom(
            1.0,
            1.0,
            vec![Level::Exact(integer(1)), Level::Exact(integer(3))],
            Commensurability::Incommensurate,
        )
        .unwrap();
        assert_eq!(invariant_set(&s, 2).unwrap(), TimeInvariantSet::ZeroOnly);
    }

    #[test]
    fn stabilization_tables() {
        let h = Spectrum::harmonic(1.0, 8).unwrap();
        let rows = gcd_stabilization(&h, 2, 8).unwrap();
        assert!(rows.iter().all(|r| r.gcd == integer(1)));
        assert!(!rows[1].stable && rows[2].stable);

        let b = Spectrum::particle_in_box(1.0, 6).unwrap();
        let rows = gcd_stabilization(&b, 2, 6).unwrap();
        assert_eq!(rows[0].gcd, integer(3));
        assert!(rows[1..].iter().all(|r| r.gcd == integer(1)));
        assert_eq!(rows[0].to_csv_line(), "2,3,1,false");

        let c = Spectrum::custom(
            1.0,
            1.0,
            vec![
                Level::Exact(rational(1, 2)),
                Level::Exact(rational(5, 2)),
                Level::Exact(rational(9, 2)),
            ],
            Commensurability::Commensurable,
        )
        .unwrap();
        let rows = gcd_stabilization(&c, 2, 3).unwrap();
        assert!(rows.iter().all(|r| r.gcd == integer(2)));
        let set = invariant_set(&c, 3).unwrap();
        assert_eq!(set.exact_base(), Some(&rational(1, 2)));
        assert!((set.base_period().unwrap() - PI).abs() < 1e-15);
        assert!(set.describe().ends_with("= 2*pi/(omega*2/1)"));

        assert!(gcd_stabilization(&h, 1, 4).is_err());
        assert!(gcd_stabilization(&h, 5, 4).is_err());
        assert!(gcd_stabilization(&h, 2, 9).is_err());
    }

    #[test]
    fn decomposition() {
        let set = TimeInvariantSet::Lattice {
            base_period: TAU,
            exact_base: Some(integer(1)),
            truncation: 2,
        };
        let d = decompose_time(TAU + 0.01, &set);
        assert_eq!(d.n, 1);
        assert!((d.tau - 0.01).abs() < 1e-14);

        let d = decompose_time(0.0, &set);
        assert_eq!((d.n, d.tau), (0, 0.0));

        let d = decompose_time(-0.01, &set);
        assert_eq!(d.n, -1);
        assert!((d.tau - (TAU - 0.01)).abs() < 1e-14);
        assert!((d.nearest_offset + 0.01).abs() < 1e-15);

        let z = decompose_time(0.3, &TimeInvariantSet::ZeroOnly);
        assert_eq!((z.n, z.tau, z.has_lattice), (0, 0.3, false));
    }

    #[test]
    fn display_format() {
        let h = Spectrum::harmonic(1.0, 4).unwrap();
        let text = invariant_set(&h, 4).unwrap().to_string();
        assert_eq!(text, "T = { j * P }, P = 6.283185307179586 = 2*pi/(omega*1/1)");
        assert_eq!(TimeInvariantSet::ZeroOnly.to_string(), "T = {0}");
    }
}
