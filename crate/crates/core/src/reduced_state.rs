//! Nearest-neighbour two-qubit state of the thermal chain.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_bond_correlator_blocks, ChainSpec, OperatorBlock};
use crate::thermal::{diagonalize, thermal_average, thermal_weights, Canonical, SpectrumSet};

/// Slack allowed on the positivity and bound constraints.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Bond correlators `dx = ⟨σx σx⟩`, `dz = ⟨σz σz⟩` fixing the reduced state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSiteState {
    dx: f64,
    dz: f64,
}

impl TwoSiteState {
    pub fn new(dx: f64, dz: f64) -> Result<Self> {
        let fail = |reason: &str| Error::State {
            dx,
            dz,
            reason: reason.to_string(),
        };
        if !dx.is_finite() || !dz.is_finite() {
            return Err(fail("correlators must be finite"));
        }
        if dx.abs() > 1.0 + STATE_TOLERANCE || dz.abs() > 1.0 + STATE_TOLERANCE {
            return Err(fail("correlators must lie in [-1, 1]"));
        }
        if 1.0 + dz < -STATE_TOLERANCE || (1.0 - dz) - 2.0 * dx.abs() < -STATE_TOLERANCE {
            return Err(fail("reduced density matrix is not positive semidefinite"));
        }
        Ok(TwoSiteState { dx, dz })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    /// Eigenvalues `(1+dz)/4` (twice) and `(1-dz)/4 ± dx/2`.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let a = (1.0 + self.dz) / 4.0;
        let b = (1.0 - self.dz) / 4.0;
        [a, a, b + self.dx / 2.0, b - self.dx / 2.0]
    }

    pub(crate) fn from_canonical(c: &Canonical) -> Result<Self> {
        TwoSiteState::new(c.xx, c.zz)
    }
}

/// Thermal bond-(1,2) correlators of the chain at temperature `t`.
pub fn nn_correlators(spec: &ChainSpec, t: f64) -> Result<TwoSiteState> {
    let spectrum = diagonalize(spec)?;
    let state = correlators_from_spectrum(&spectrum, t)?;
    #[cfg(debug_assertions)]
    if spec.boundary() == crate::model::Boundary::Periodic && (3..=6).contains(&spec.sites()) {
        let other = bond_correlators(&spectrum, t, 2)?;
        debug_assert!(
            (other.dx - state.dx).abs() <= 1e-10 && (other.dz - state.dz).abs() <= 1e-10,
            "bond (2,3) disagrees with bond (1,2): {other:?} vs {state:?}"
        );
    }
    Ok(state)
}

pub fn correlators_from_spectrum(spectrum: &SpectrumSet, t: f64) -> Result<TwoSiteState> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::param("T", format!("temperature must be >= 0, got {t}")));
    }
    TwoSiteState::from_canonical(&spectrum.correlator_ensemble()?.canonical(t))
}

/// Correlators on the bond `(site, site+1)`, evaluated with full block averages.
pub fn bond_correlators(spectrum: &SpectrumSet, t: f64, site: usize) -> Result<TwoSiteState> {
    let spec = spectrum.spec();
    let weights = thermal_weights(spectrum, t)?;
    let (zz, xx): (Vec<OperatorBlock>, Vec<OperatorBlock>) = spectrum
        .sectors()
        .iter()
        .map(|s| build_bond_correlator_blocks(spec, s.basis(), site))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    TwoSiteState::new(
        thermal_average(spectrum, &weights, &xx)?,
        thermal_average(spectrum, &weights, &zz)?,
    )
}

/// The X-shaped reduced density matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn two_site_density_matrix(s: &TwoSiteState) -> Result<Matrix4<f64>> {
    let s = TwoSiteState::new(s.dx, s.dz)?;
    let a = (1.0 + s.dz) / 4.0;
    let b = (1.0 - s.dz) / 4.0;
    let c = s.dx / 2.0;
    #[rustfmt::skip]
    let m = Matrix4::new(
        a,   0.0, 0.0, 0.0,
        0.0, b,   c,   0.0,
        0.0, c,   b,   0.0,
        0.0, 0.0, 0.0, a,
    );
    Ok(m)
}

/// Residuals of the free-energy derivative identities for the bond correlators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub residual_z: f64,
    pub residual_x: f64,
}

/// Checks `dz = ∂_Δ f / J` and `dx = (u - Δ ∂_Δ f) / 2J` with a central
/// difference in `Δ` of step `h`.
///
/// `f` and `u` are taken per bond, which is per site on a ring; on an open
/// chain this is the normalization that makes the identities exact.
pub fn verify_correlator_identities(spec: &ChainSpec, t: f64, h: f64) -> Result<IdentityResiduals> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::param("T", format!("identity check needs T > 0, got {t}")));
    }
    if h.is_nan() || h <= 0.0 {
        return Err(Error::param("h", format!("step must be positive, got {h}")));
    }
    let bonds = spec.bond_count() as f64;
    let per_bond_f = |delta: f64| -> Result<f64> {
        let spectrum = diagonalize(&spec.with_delta(delta)?)?;
        let c = spectrum.ensemble().canonical(t);
        Ok((c.e_min - t * c.ln_z_shifted) / bonds)
    };
    let d = spec.delta();
    let df = (per_bond_f(d + h)? - per_bond_f(d - h)?) / (2.0 * h);

    let spectrum = diagonalize(spec)?;
    let canonical = spectrum.correlator_ensemble()?.canonical(t);
    let state = TwoSiteState::from_canonical(&canonical)?;
    let u = canonical.mean_energy / bonds;
    let j = spec.coupling();
    Ok(IdentityResiduals {
        residual_z: (state.dz - df / j).abs(),
        residual_x: (state.dx - (u - d * df) / (2.0 * j)).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn state_validation() {
        assert!(TwoSiteState::new(0.0, 0.0).is_ok());
        assert!(TwoSiteState::new(-1.0, -1.0).is_ok());
        assert!(TwoSiteState::new(0.0, 1.0).is_ok());
        assert!(TwoSiteState::new(0.6, 0.0).is_err());
        assert!(TwoSiteState::new(0.0, -1.1).is_err());
        assert!(TwoSiteState::new(f64::NAN, 0.0).is_err());
        assert!(TwoSiteState::new(0.5 + 1e-13, 0.0).is_ok());
    }

    #[test]
    fn density_matrix_layout() {
        let m = two_site_density_matrix(&TwoSiteState::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(m, Matrix4::identity() / 4.0);

        let singlet = two_site_density_matrix(&TwoSiteState::new(-1.0, -1.0).unwrap()).unwrap();
        let psi = nalgebra::Vector4::new(0.0, 1.0, -1.0, 0.0) / 2f64.sqrt();
        assert_abs_diff_eq!((singlet - psi * psi.transpose()).amax(), 0.0, epsilon = 1e-15);

        let ferro = two_site_density_matrix(&TwoSiteState::new(0.0, 1.0).unwrap()).unwrap();
        let mut expect = Matrix4::zeros();
        expect[(0, 0)] = 0.5;
        expect[(3, 3)] = 0.5;
        assert_eq!(ferro, expect);
    }

    #[test]
    fn density_matrix_trace_and_spectrum() {
        let s = TwoSiteState::new(0.3, -0.2).unwrap();
        let m = two_site_density_matrix(&s).unwrap();
        assert_abs_diff_eq!(m.trace(), 1.0, epsilon = 1e-15);
        let mut got: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        let mut want = s.eigenvalues().to_vec();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn correlator_limits() {
        let s = nn_correlators(&ChainSpec::periodic(6, 1.0, 0.4).unwrap(), 1e6).unwrap();
        assert!(s.dx().abs() < 1e-5 && s.dz().abs() < 1e-5);

        let singlet = nn_correlators(&ChainSpec::open(2, 1.0, 1.0).unwrap(), 0.0).unwrap();
        assert_abs_diff_eq!(singlet.dx(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(singlet.dz(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn isotropic_point_equal_correlators() {
        for l in [3, 4, 5, 6, 8] {
            for t in [0.05, 0.5, 3.0] {
                let s = nn_correlators(&ChainSpec::periodic(l, 1.0, 1.0).unwrap(), t).unwrap();
                assert!((s.dx() - s.dz()).abs() <= 1e-10, "L={l} T={t}: {s:?}");
            }
        }
    }

    #[test]
    fn translation_invariance_small_rings() {
        let spec = ChainSpec::periodic(5, 0.9, -0.3).unwrap();
        let spectrum = diagonalize(&spec).unwrap();
        let a = bond_correlators(&spectrum, 0.4, 1).unwrap();
        for site in 2..=5 {
            let b = bond_correlators(&spectrum, 0.4, site).unwrap();
            assert_abs_diff_eq!(a.dx(), b.dx(), epsilon = 1e-10);
            assert_abs_diff_eq!(a.dz(), b.dz(), epsilon = 1e-10);
        }
        let fast = correlators_from_spectrum(&spectrum, 0.4).unwrap();
        assert_abs_diff_eq!(a.dx(), fast.dx(), epsilon = 1e-12);
    }

    #[test]
    fn identities() {
        let r = verify_correlator_identities(&ChainSpec::periodic(8, 1.0, 0.5).unwrap(), 0.5, 1e-4).unwrap();
        assert!(r.residual_z < 1e-6 && r.residual_x < 1e-6, "{r:?}");
        let r = verify_correlator_identities(&ChainSpec::open(2, 1.0, 1.0).unwrap(), 1.0, 1e-4).unwrap();
        assert!(r.residual_z < 1e-8 && r.residual_x < 1e-8, "{r:?}");
        let r = verify_correlator_identities(&ChainSpec::periodic(4, 1.0, -0.5).unwrap(), 0.3, 1e-4).unwrap();
        assert!(r.residual_z < 1e-6 && r.residual_x < 1e-6, "{r:?}");
        assert!(verify_correlator_identities(&ChainSpec::periodic(4, 1.0, -0.5).unwrap(), 0.0, 1e-4).is_err());
    }
}
