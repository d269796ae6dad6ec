//! How T_t deviates from T + t near the lattice, and how U_t deviates from
//! its linearization at small t.

use tclock::dynamics::covariance_defect;
use tclock::{normalized_pair_vector, short_time_defect, Spectrum};

pub fn main() -> tclock::Result<()> {
    let m = 64;
    let spectrum = Spectrum::harmonic(1.0, m)?;

    println!("covariance defect ‖(T_t − T − τ)φ‖ for φ = (|1> − |0>)/√2:");
    let mut previous = None;
    for tau in [1e-2, 5e-3, 2.5e-3] {
        let d = covariance_defect(&spectrum, 1, 0, tau, 0, m)?;
        let ratio = previous.map(|p: f64| p / d);
        println!(
            "  tau = {tau:<7} defect = {d:.3e}  halving ratio = {}",
            ratio.map_or("-".into(), |r| format!("{r:.3}"))
        );
        previous = Some(d);
    }
    for j in -2..=2 {
        println!(
            "  tick j = {j:>2}: defect {:.1e}",
            covariance_defect(&spectrum, 1, 0, 0.0, j, m)?
        );
    }

    let phi = normalized_pair_vector(1, 0, m)?;
    println!("short-time defect ‖U_tφ − (1 − itH)φ‖ / t²:");
    for t in [1e-1, 1e-2, 1e-3] {
        println!("  t = {t:<6} {:.6}", short_time_defect(&spectrum, &phi, t)? / (t * t));
    }
    Ok(())
}
