//! ⟨T⟩ and ΔT² for the harmonic pair (1,0) over one period, closed form
//! against the dense matrix oracle, then the infinite-M static variance.

use tclock::dynamics::{extrapolate_static_variance, sweep, tau_grid, Method};
use tclock::Spectrum;

pub fn main() -> tclock::Result<()> {
    let m = 128;
    let spectrum = Spectrum::harmonic(1.0, m)?;
    let taus = tau_grid(std::f64::consts::TAU, 9);
    let rows = sweep(&spectrum, 1, 0, 0, m, &taus)?;

    println!("{:>8} {:>12} {:>12} {:>10}", "tau", "<T>", "var T", "|diff|");
    for pair in rows.chunks(2) {
        let (closed, oracle) = (&pair[0], &pair[1]);
        assert_eq!(closed.method, Method::ClosedForm);
        let diff = (closed.expectation - oracle.expectation)
            .abs()
            .max((closed.variance - oracle.variance).abs());
        println!(
            "{:>8.4} {:>12.8} {:>12.8} {:>10.1e}",
            closed.tau, closed.expectation, closed.variance, diff
        );
    }

    let big = Spectrum::harmonic(1.0, 256)?;
    let ex = extrapolate_static_variance(&big, 1, 0, &[64, 128, 256])?;
    println!("static variance at M = {:?}: {:?}", ex.truncations, ex.values);
    println!(
        "extrapolated {:.10} ± {:.1e} (order {:.2})",
        ex.value, ex.error_bar, ex.order
    );
    Ok(())
}
