//! The commutation relation [T, H]φ = iħφ holds exactly on zero-sum vectors
//! and fails on basis states.

use std::collections::BTreeMap;

use num_complex::Complex64;
use tclock::{
    assemble, build_hamiltonian, build_time_operator, ccr_residual, membership_test, pair_vector, Spectrum,
    StateVector, Tolerances,
};

pub fn main() -> tclock::Result<()> {
    let m = 32;
    let spectrum = Spectrum::harmonic(1.0, m)?;
    let t = build_time_operator(&spectrum, m)?;
    let h = build_hamiltonian(&spectrum, m)?;
    let tol = Tolerances::default();

    println!("T hermiticity defect: {:.1e}", t.hermiticity_defect());

    let phi = pair_vector(5, 2, m)?;
    println!(
        "|5> - |2>      residual {:.2e}",
        ccr_residual(&t, &h, &phi, spectrum.hbar())?
    );

    let mut pairs = BTreeMap::new();
    pairs.insert((3, 0), Complex64::new(0.5, 0.25));
    pairs.insert((9, 4), Complex64::new(-1.0, 0.0));
    pairs.insert((20, 7), Complex64::new(0.0, 2.0));
    let combo = assemble(pairs, m)?;
    let membership = membership_test(combo.state(), tol.membership);
    println!(
        "3-pair combo   residual {:.2e}  in domain {}  support {}",
        ccr_residual(&t, &h, combo.state(), spectrum.hbar())?,
        membership.in_domain,
        membership.support
    );

    let ground = StateVector::basis(m, 0)?;
    println!(
        "|0>            residual {:.2e}  in domain {}",
        ccr_residual(&t, &h, &ground, spectrum.hbar())?,
        membership_test(&ground, tol.membership).in_domain
    );
    Ok(())
}
