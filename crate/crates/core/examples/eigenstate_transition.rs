//! Resolution of pair clocks and the transition time between T eigenstates.

use tclock::{Level, ProjectedClock, Spectrum};

pub fn main() -> tclock::Result<()> {
    let larmor = ProjectedClock::new(&Spectrum::larmor(1.0, 1.0)?, 1, 0)?;
    let tr = larmor.eigenstate_transition_time()?;
    println!(
        "larmor: |+y> → |-y> after t = {:.9} (p = {:.6}); eigenvalue spacing {:.6}",
        tr.time, tr.probability, tr.eigenvalue_difference
    );

    let custom = Spectrum::custom(
        1.0,
        1.0,
        ["1/2", "3/4", "2"]
            .iter()
            .map(|t| Level::parse(t))
            .collect::<tclock::Result<_>>()?,
        tclock::Commensurability::Commensurable,
    )?;
    for (name, s) in [
        ("harmonic", Spectrum::harmonic(1.0, 4)?),
        ("box", Spectrum::particle_in_box(1.0, 4)?),
        ("custom", custom),
    ] {
        for (k, l) in [(1, 0), (2, 0), (2, 1)] {
            let r = ProjectedClock::new(&s, k, l)?.resolution_report();
            println!(
                "{name:<9} ({k},{l})  δt = {:.6}  ΔT = {:.6}",
                r.delta_t, r.delta_time_operator
            );
        }
    }
    Ok(())
}
