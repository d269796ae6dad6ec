//! Dense linear algebra in the energy eigenbasis.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default cap on the truncation used for dense matrices.
pub const MAX_TRUNCATION: usize = 1024;

/// Numerical tolerance policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for identities that hold exactly in the truncation.
    pub abs: f64,
    /// Relative tolerance for series-truncated quantities.
    pub rel: f64,
    /// Bound on `|Σ φ_s|` for canonical-domain membership.
    pub membership: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs: 1e-12,
            rel: 1e-9,
            membership: 1e-10,
        }
    }
}

/// Coefficients `φ_s` in the energy eigenbasis, `s = 0..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    coeffs: Vec<Complex64>,
}

impl StateVector {
    pub fn new(coeffs: Vec<Complex64>) -> StateVector {
        StateVector { coeffs }
    }

    pub fn zeros(dim: usize) -> StateVector {
        StateVector {
            coeffs: vec![ZERO; dim],
        }
    }

    pub fn basis(dim: usize, s: usize) -> Result<StateVector> {
        if s >= dim {
            return Err(Error::Index(format!(
                "basis index {s} out of range for dimension {dim}"
            )));
        }
        let mut v = StateVector::zeros(dim);
        v.coeffs[s] = ONE;
        Ok(v)
    }

    pub fn from_real(values: &[f64]) -> StateVector {
        StateVector {
            coeffs: values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm copy. The zero vector is returned unchanged.
    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scale(Complex64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        StateVector {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        check_dims(self.dim(), other.dim())?;
        Ok(StateVector {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        check_dims(self.dim(), other.dim())?;
        Ok(StateVector {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn coefficient_sum(&self) -> Complex64 {
        self.coeffs.iter().sum()
    }

    /// Zero-padded (or truncated) copy in dimension `dim`.
    pub fn resized(&self, dim: usize) -> StateVector {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(dim, ZERO);
        StateVector { coeffs }
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// CSV dump with header `row,col,re,im`; `col` is always 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for (row, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{row},0,{},{}", fmt_f64(c.re), fmt_f64(c.im));
        }
        out
    }
}

/// Dense complex `M×M` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> OperatorMatrix {
        OperatorMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> OperatorMatrix {
        OperatorMatrix::from_fn(dim, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> OperatorMatrix {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        OperatorMatrix { dim, data }
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<OperatorMatrix> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dims(dim, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(OperatorMatrix { dim, data })
    }

    pub fn diagonal(values: &[f64]) -> OperatorMatrix {
        let dim = values.len();
        OperatorMatrix::from_fn(dim, |r, c| if r == c { Complex64::new(values[r], 0.0) } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> OperatorMatrix {
        OperatorMatrix::from_fn(self.dim, |r, c| f(r, c, self.get(r, c)))
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, factor: Complex64) -> OperatorMatrix {
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        check_dims(self.dim, other.dim)?;
        Ok(OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        check_dims(self.dim, other.dim)?;
        Ok(OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        check_dims(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let row_out = &mut out[r * n..(r + 1) * n];
                for (o, b) in row_out.iter_mut().zip(&other.data[k * n..(k + 1) * n]) {
                    *o += a * b;
                }
            }
        }
        Ok(OperatorMatrix { dim: n, data: out })
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_dims(self.dim, v.dim())?;
        let n = self.dim;
        let coeffs = (0..n)
            .map(|r| {
                self.data[r * n..(r + 1) * n]
                    .iter()
                    .zip(v.coeffs())
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect();
        Ok(StateVector::new(coeffs))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        check_dims(self.dim, other.dim)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |A_{r,c} − conj(A_{c,r})|`
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// CSV dump with header `row,col,re,im`, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for r in 0..self.dim {
            for c in 0..self.dim {
                let x = self.get(r, c);
                let _ = writeln!(out, "{r},{c},{},{}", fmt_f64(x.re), fmt_f64(x.im));
            }
        }
        out
    }
}

/// 17 significant digits, round-trippable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

fn check_operator_truncation(spectrum: &Spectrum, m: usize) -> Result<()> {
    spectrum.check_truncation(m)?;
    if m > MAX_TRUNCATION {
        return Err(Error::Truncation {
            requested: m,
            available: MAX_TRUNCATION,
        });
    }
    Ok(())
}

/// The characteristic time operator `T_{s,s'} = i/ω_{s,s'}` for `s ≠ s'`,
/// truncated to the first `m` levels.
pub fn build_time_operator(spectrum: &Spectrum, m: usize) -> Result<OperatorMatrix> {
    check_operator_truncation(spectrum, m)?;
    let mut t = OperatorMatrix::zeros(m);
    for r in 0..m {
        for c in (r + 1)..m {
            let entry = Complex64::new(0.0, 1.0 / spectrum.transition_frequency(r, c));
            t.set(r, c, entry);
            // i/ω_{c,r} = −i/ω_{r,c} = conj(i/ω_{r,c})
            t.set(c, r, entry.conj());
        }
    }
    Ok(t)
}

/// `H = diag(E_0, …, E_{m−1})`
pub fn build_hamiltonian(spectrum: &Spectrum, m: usize) -> Result<OperatorMatrix> {
    check_operator_truncation(spectrum, m)?;
    Ok(OperatorMatrix::diagonal(&spectrum.energies(m)?))
}

/// `AB − BA`
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// The 2×2 compression `P_kl A P_kl` in basis order `(k, l)` as called.
pub fn project_pair(a: &OperatorMatrix, k: usize, l: usize) -> Result<OperatorMatrix> {
    check_pair(k, l, a.dim())?;
    let idx = [k, l];
    Ok(OperatorMatrix::from_fn(2, |r, c| a.get(idx[r], idx[c])))
}

pub(crate) fn check_pair(k: usize, l: usize, dim: usize) -> Result<()> {
    if k == l {
        return Err(Error::Index(format!("pair indices must differ, got ({k},{l})")));
    }
    if k >= dim || l >= dim {
        return Err(Error::Index(format!("pair ({k},{l}) out of range for dimension {dim}")));
    }
    Ok(())
}

/// `‖(TH − HT)φ − iħφ‖`, evaluated as `T(Hφ) − H(Tφ)`.
pub fn ccr_residual(t: &OperatorMatrix, h: &OperatorMatrix, phi: &StateVector, hbar: f64) -> Result<f64> {
    check_dims(t.dim(), h.dim())?;
    check_dims(t.dim(), phi.dim())?;
    let th = t.apply(&h.apply(phi)?)?;
    let ht = h.apply(&t.apply(phi)?)?;
    let target = phi.scale(Complex64::new(0.0, hbar));
    Ok(th.sub(&ht)?.sub(&target)?.norm())
}

fn check_observable(a: &OperatorMatrix, phi: &StateVector, tol: &Tolerances) -> Result<()> {
    check_dims(a.dim(), phi.dim())?;
    let defect = a.hermiticity_defect();
    if defect > tol.abs * a.max_abs().max(1.0) {
        return Err(Error::ContractViolation(format!(
            "operator is not Hermitian (defect {defect:.3e})"
        )));
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::ContractViolation(format!(
            "state is not normalized (norm {norm})"
        )));
    }
    Ok(())
}

/// `⟨φ|A|φ⟩` for Hermitian `A` and normalized `φ`.
pub fn expectation(a: &OperatorMatrix, phi: &StateVector) -> Result<f64> {
    expectation_with(a, phi, &Tolerances::default())
}

pub fn expectation_with(a: &OperatorMatrix, phi: &StateVector, tol: &Tolerances) -> Result<f64> {
    check_observable(a, phi, tol)?;
    let value = phi.inner(&a.apply(phi)?)?;
    check_real(value, a.max_abs(), tol)?;
    Ok(value.re)
}

fn check_real(value: Complex64, scale: f64, tol: &Tolerances) -> Result<()> {
    if value.im.abs() > tol.abs * scale.max(1.0) {
        return Err(Error::ContractViolation(format!(
            "expectation has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(())
}

/// `⟨A²⟩ − ⟨A⟩²`, with `⟨A²⟩ = ‖Aφ‖²`. Round-off negatives above `−abs`
/// are clamped to zero.
pub fn variance(a: &OperatorMatrix, phi: &StateVector) -> Result<f64> {
    variance_with(a, phi, &Tolerances::default())
}

pub fn variance_with(a: &OperatorMatrix, phi: &StateVector, tol: &Tolerances) -> Result<f64> {
    check_observable(a, phi, tol)?;
    let a_phi = a.apply(phi)?;
    let mean = phi.inner(&a_phi)?;
    check_real(mean, a.max_abs(), tol)?;
    let second = a_phi.norm_sqr();
    let var = second - mean.re * mean.re;
    if var < -tol.abs * second.max(1.0) {
        return Err(Error::ContractViolation(format!("negative variance {var:.3e}")));
    }
    Ok(var.max(0.0))
}

/// Pauli matrices in the basis order used by [`project_pair`].
pub fn sigma_x() -> OperatorMatrix {
    OperatorMatrix::from_fn(2, |r, c| if r != c { ONE } else { ZERO })
}

pub fn sigma_y() -> OperatorMatrix {
    OperatorMatrix::from_fn(2, |r, c| match (r, c) {
        (0, 1) => Complex64::new(0.0, -1.0),
        (1, 0) => I,
        _ => ZERO,
    })
}

pub fn sigma_z() -> OperatorMatrix {
    OperatorMatrix::diagonal(&[1.0, -1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rational;
    use crate::spectrum::{Commensurability, Level};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_level_harmonic_time_operator() {
        let s = Spectrum::harmonic(1.0, 2).unwrap();
        let t = build_time_operator(&s, 2).unwrap();
        // ω_{0,1} = −1, so T_{0,1} = i/ω_{0,1} = −i in the natural order.
        let want = OperatorMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]).unwrap();
        assert_eq!(t, want);
        // In the (1, 0) order the familiar [[0, i], [−i, 0]] appears.
        let flipped = OperatorMatrix::from_rows(&[&[ZERO, I], &[-I, ZERO]]).unwrap();
        assert_eq!(project_pair(&t, 1, 0).unwrap(), flipped);
    }

    #[test]
    fn time_operator_structure() {
        let s = Spectrum::particle_in_box(1.0, 12).unwrap();
        let t = build_time_operator(&s, 12).unwrap();
        for r in 0..12 {
            assert_eq!(t.get(r, r), ZERO);
            for col in 0..12 {
                assert_eq!(t.get(r, col).re, 0.0);
                assert_eq!(t.get(r, col), -t.get(col, r));
            }
        }
        assert_eq!(t.hermiticity_defect(), 0.0);
    }

    #[test]
    fn two_level_entry_matches_hbar_over_gap() {
        let hbar = 0.7;
        let s = Spectrum::custom(
            3.0,
            hbar,
            vec![Level::Exact(rational(1, 3)), Level::Exact(rational(2, 1))],
            Commensurability::Commensurable,
        )
        .unwrap();
        let t = build_time_operator(&s, 2).unwrap();
        let gap = s.energy(1) - s.energy(0);
        let want = hbar / gap;
        assert!((t.get(0, 1).im + want).abs() < 1e-15);
        // The (k=1, l=0) compression puts i·ħ/(E₁−E₀) in the upper right.
        let t10 = project_pair(&t, 1, 0).unwrap();
        assert!((t10.get(0, 1) - c(0.0, want)).norm() < 1e-15);
    }

    #[test]
    fn truncation_errors() {
        let s = Spectrum::harmonic(1.0, 4).unwrap();
        assert!(matches!(build_time_operator(&s, 5), Err(Error::Truncation { .. })));
        assert!(matches!(build_hamiltonian(&s, 0), Err(Error::Truncation { .. })));
    }

    #[test]
    fn hamiltonian_examples() {
        let h = build_hamiltonian(&Spectrum::harmonic(1.0, 2).unwrap(), 2).unwrap();
        assert_eq!(h, OperatorMatrix::diagonal(&[0.5, 1.5]));
        let h = build_hamiltonian(&Spectrum::particle_in_box(1.0, 3).unwrap(), 3).unwrap();
        assert_eq!(h, OperatorMatrix::diagonal(&[1.0, 4.0, 9.0]));
    }

    #[test]
    fn commutator_cases() {
        let h = build_hamiltonian(&Spectrum::harmonic(1.0, 5).unwrap(), 5).unwrap();
        assert_eq!(commutator(&h, &h).unwrap().max_abs(), 0.0);

        let comm = commutator(&sigma_y(), &sigma_z()).unwrap();
        let want = sigma_x().scale(c(0.0, 2.0));
        assert_eq!(comm.max_abs_diff(&want).unwrap(), 0.0);

        let small = OperatorMatrix::zeros(3);
        assert!(matches!(commutator(&h, &small), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn projections() {
        let s = Spectrum::harmonic(1.0, 6).unwrap();
        let t = build_time_operator(&s, 6).unwrap();
        let h = build_hamiltonian(&s, 6).unwrap();
        let (k, l) = (4, 1);
        let w = s.transition_frequency(k, l);
        let tkl = project_pair(&t, k, l).unwrap();
        let want = OperatorMatrix::from_rows(&[&[ZERO, c(0.0, 1.0 / w)], &[c(0.0, -1.0 / w), ZERO]]).unwrap();
        assert!(tkl.max_abs_diff(&want).unwrap() < 1e-15);
        let hkl = project_pair(&h, k, l).unwrap();
        assert_eq!(hkl, OperatorMatrix::diagonal(&[s.energy(k), s.energy(l)]));

        assert!(matches!(project_pair(&t, 2, 2), Err(Error::Index(_))));
        assert!(matches!(project_pair(&t, 6, 0), Err(Error::Index(_))));
    }

    #[test]
    fn larmor_projected_hamiltonian() {
        let s = Spectrum::larmor(1.3, 1.0).unwrap();
        let h = build_hamiltonian(&s, 2).unwrap();
        let h10 = project_pair(&h, 1, 0).unwrap();
        assert_eq!(h10, OperatorMatrix::diagonal(&[s.energy(1), s.energy(0)]));
        assert!((s.energy(1) - s.energy(0) - 1.3).abs() < 1e-15);
    }

    #[test]
    fn ccr_residual_cases() {
        let s = Spectrum::harmonic(1.0, 10).unwrap();
        let t = build_time_operator(&s, 10).unwrap();
        let h = build_hamiltonian(&s, 10).unwrap();
        let mut pair = StateVector::zeros(10);
        pair.coeffs_mut()[3] = ONE;
        pair.coeffs_mut()[7] = -ONE;
        assert!(ccr_residual(&t, &h, &pair, 1.0).unwrap() <= 1e-12);

        // (TH − HT)|k⟩ = −iħ Σ_{s≠k} |s⟩, so the residual is ħ·√M.
        let k = StateVector::basis(10, 2).unwrap();
        let r = ccr_residual(&t, &h, &k, 1.0).unwrap();
        assert!(r > 0.5);
        assert!((r - 10f64.sqrt()).abs() < 1e-12);

        assert_eq!(ccr_residual(&t, &h, &StateVector::zeros(10), 1.0).unwrap(), 0.0);
        assert!(ccr_residual(&t, &h, &StateVector::zeros(3), 1.0).is_err());
    }

    #[test]
    fn expectation_and_variance() {
        let s = Spectrum::harmonic(1.0, 8).unwrap();
        let t = build_time_operator(&s, 8).unwrap();
        let h = build_hamiltonian(&s, 8).unwrap();
        let mut phi = StateVector::zeros(8);
        phi.coeffs_mut()[1] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        phi.coeffs_mut()[0] = c(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!(expectation(&t, &phi).unwrap().abs() < 1e-15);

        let h10 = project_pair(&h, 1, 0).unwrap();
        let phi10 = StateVector::from_real(&[1.0, -1.0]).normalized();
        let gap = s.energy(1) - s.energy(0);
        assert!((variance(&h10, &phi10).unwrap() - gap * gap / 4.0).abs() < 1e-15);

        for level in 0..8 {
            let e = expectation(&h, &StateVector::basis(8, level).unwrap()).unwrap();
            assert_eq!(e, s.energy(level));
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut t = build_time_operator(&Spectrum::harmonic(1.0, 3).unwrap(), 3).unwrap();
        t.set(0, 2, -t.get(0, 2));
        let phi = StateVector::basis(3, 0).unwrap();
        assert!(matches!(expectation(&t, &phi), Err(Error::ContractViolation(_))));
        assert!(matches!(variance(&t, &phi), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn csv_dump_format() {
        let csv = sigma_y().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "row,col,re,im");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "0,1,0.0000000000000000e0,-1.0000000000000000e0");
        let v = StateVector::from_real(&[0.1]).to_csv();
        assert_eq!(
            v.lines().nth(1).unwrap(),
            "0,0,1.0000000000000001e-1,0.0000000000000000e0"
        );
    }
}
