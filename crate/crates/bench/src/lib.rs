//! Shared fixtures for the criterion benches.

use xxzq_core::TwoSiteState;

/// Deterministic spread of valid two-site states across the allowed region.
pub fn state_fixture(n: usize) -> Vec<TwoSiteState> {
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            let dz = -1.0 + 2.0 * t;
            let dx = (1.0 - dz) / 2.0 * (2.0 * (t * 7.0).fract() - 1.0);
            TwoSiteState::new(dx, dz).expect("fixture state is valid")
        })
        .collect()
}
