//! Spin-1/2 Larmor clock: prepare |Λ(τ)⟩, measure S_y, and read τ back.

use tclock::{ProjectedClock, Spectrum};

pub fn main() -> tclock::Result<()> {
    let spectrum = Spectrum::larmor(1.0, 1.0)?;
    let clock = ProjectedClock::new(&spectrum, 1, 0)?;
    let t = clock.t_kl();
    println!(
        "T_kl = [[{}, {}], [{}, {}]]",
        t.get(0, 0),
        t.get(0, 1),
        t.get(1, 0),
        t.get(1, 1)
    );

    let tau = 0.01;
    let state = clock.clock_state(tau);
    let exact = clock.read_time(&state, 0, 0, 0)?;
    println!(
        "exact readout   tau = {:.12}  ΔTΔH = {:.12}",
        exact.tau_arcsin, exact.uncertainty_product
    );

    for shots in [10_000u64, 1_000_000] {
        let r = clock.read_time(&state, shots, 42, 0)?;
        println!(
            "{shots:>9} shots  tau = {:.6} ± {:.1e}  (+{} / -{})",
            r.tau_arcsin,
            r.std_error.unwrap_or(f64::NAN),
            r.ensemble.map_or(0, |e| e.plus),
            r.ensemble.map_or(0, |e| e.minus)
        );
    }

    // Two full cycles later the same offset reads the same τ.
    let row = clock.run_protocol(tau, 2, 0, 0)?;
    println!("after 2 cycles  t = {:.9}  tau = {:.12}", row.t, row.reading.tau_arcsin);
    Ok(())
}
