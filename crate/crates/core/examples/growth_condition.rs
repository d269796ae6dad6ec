//! Whether Σ E_s⁻² converges: partial sums plus an extrapolated tail.

use tclock::{ExtensionRule, Spectrum};

pub fn main() -> tclock::Result<()> {
    let boxed = Spectrum::particle_in_box(1.0, 32)?;
    let report = boxed.growth_condition_report(boxed.natural_extension());
    println!(
        "box, 32 levels: stored {:.8}  total ≈ {:.8}  plausible {:?}",
        report.stored_sum(),
        report.total_estimate().unwrap_or(f64::NAN),
        report.condition_plausible
    );
    println!("  exact limit π⁴/90 = {:.8}", std::f64::consts::PI.powi(4) / 90.0);

    let harmonic = Spectrum::harmonic(1.0, 32)?;
    let report = harmonic.growth_condition_report(harmonic.natural_extension());
    println!(
        "harmonic, 32 levels: total ≈ {:.8}  plausible {:?}",
        report.total_estimate().unwrap_or(f64::NAN),
        report.condition_plausible
    );

    // A flat extension never converges.
    let flat = harmonic.growth_condition_report(Some(ExtensionRule::Constant(32.0)));
    println!(
        "flat tail block ratios {:?}  plausible {:?}",
        &flat.block_ratios[..3],
        flat.condition_plausible
    );
    Ok(())
}
