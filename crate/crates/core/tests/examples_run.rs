//! Every example under `examples/` runs to completion.

#[path = "../examples/harmonic_invariant_set.rs"]
mod harmonic_invariant_set;

#[path = "../examples/ccr_canonical_domain.rs"]
mod ccr_canonical_domain;

#[path = "../examples/expectation_variance_sweep.rs"]
mod expectation_variance_sweep;

#[path = "../examples/larmor_clock.rs"]
mod larmor_clock;

#[path = "../examples/short_time_covariance.rs"]
mod short_time_covariance;

#[path = "../examples/growth_condition.rs"]
mod growth_condition;

#[path = "../examples/eigenstate_transition.rs"]
mod eigenstate_transition;

#[test]
fn harmonic_invariant_set_runs() {
    harmonic_invariant_set::main().unwrap();
}

#[test]
fn ccr_canonical_domain_runs() {
    ccr_canonical_domain::main().unwrap();
}

#[test]
fn expectation_variance_sweep_runs() {
    expectation_variance_sweep::main().unwrap();
}

#[test]
fn larmor_clock_runs() {
    larmor_clock::main().unwrap();
}

#[test]
fn short_time_covariance_runs() {
    short_time_covariance::main().unwrap();
}

#[test]
fn growth_condition_runs() {
    growth_condition::main().unwrap();
}

#[test]
fn eigenstate_transition_runs() {
    eigenstate_transition::main().unwrap();
}
