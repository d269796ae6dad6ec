//! Time-invariant sets for three spectra: harmonic, particle in a box, and a
//! spectrum with an irrational level.

use tclock::rational::format_rational;
use tclock::{gcd_stabilization, invariant_set, pair_set, Commensurability, Level, Spectrum};

pub fn main() -> tclock::Result<()> {
    let harmonic = Spectrum::harmonic(1.0, 16)?;
    let boxed = Spectrum::particle_in_box(1.0, 16)?;
    let irrational = Spectrum::custom(
        1.0,
        1.0,
        vec![
            Level::parse("1")?,
            Level::parse("irr:1.4142135623730951")?,
            Level::parse("3")?,
        ],
        Commensurability::Commensurable,
    )?;

    for s in [&harmonic, &boxed, &irrational] {
        println!("{:<24} {}", s.label(), invariant_set(s, s.len())?);
    }

    // A single pair returns at multiples of its own period, which is coarser
    // than or equal to the full lattice.
    let pair = pair_set(&boxed, 2, 1)?;
    println!("box pair (2,1): {pair}");

    println!("gcd of box differences as levels are added:");
    for row in gcd_stabilization(&boxed, 2, 8)? {
        println!(
            "  n = {}  gcd = {}  stable = {}",
            row.n,
            format_rational(&row.gcd),
            row.stable
        );
    }
    Ok(())
}
