//! Bulk thermodynamics of the finite chain, per site.
//!
//! Entropy is in nats (k = 1). The susceptibility is the zero-field
//! fluctuation `β(⟨M²⟩ - ⟨M⟩²)/L` with `M = Σ σz`; in `S^z = σz/2` units
//! divide by 4.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermal::{Canonical, Ensemble, SpectrumSet, ZERO_TEMPERATURE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoRecord {
    pub f: f64,
    pub u: f64,
    pub s: f64,
    pub c: f64,
    pub chi: f64,
    pub m: f64,
}

impl ThermoRecord {
    pub(crate) fn from_canonical(c: &Canonical) -> ThermoRecord {
        let l = c.sites as f64;
        let t = c.temperature;
        let f = c.free_energy().per_site;
        let u = c.internal_energy();
        ThermoRecord {
            f,
            u,
            s: (u - f) / t,
            c: c.energy_variance / (t * t * l),
            chi: c.magnetization_variance / (t * l),
            m: c.mean_magnetization / l,
        }
    }
}

fn positive_temperature(t: f64) -> Result<()> {
    if !t.is_finite() || t < ZERO_TEMPERATURE {
        return Err(Error::param(
            "T",
            format!("thermodynamics needs finite T >= {ZERO_TEMPERATURE:e}, got {t}"),
        ));
    }
    Ok(())
}

pub fn thermo_record(spectrum: &SpectrumSet, t: f64) -> Result<ThermoRecord> {
    thermo_from_ensemble(&spectrum.ensemble(), t)
}

pub fn thermo_from_ensemble(ensemble: &Ensemble, t: f64) -> Result<ThermoRecord> {
    positive_temperature(t)?;
    Ok(ThermoRecord::from_canonical(&ensemble.canonical(t)))
}

/// Finite-difference checks `c = ∂u/∂T` and `s = -∂f/∂T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoResiduals {
    pub specific_heat: f64,
    pub entropy: f64,
}

/// `h` is the relative temperature step (default `1e-3`); derivatives use
/// the five-point central stencil.
pub fn thermo_consistency(spectrum: &SpectrumSet, t: f64, h: f64) -> Result<ThermoResiduals> {
    positive_temperature(t)?;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::param("h", format!("relative step must be in (0, 1), got {h}")));
    }
    let ens = spectrum.ensemble();
    let dt = h * t;
    let at = |t: f64| ThermoRecord::from_canonical(&ens.canonical(t));
    let (m2, m1, mid, p1, p2) = (at(t - 2.0 * dt), at(t - dt), at(t), at(t + dt), at(t + 2.0 * dt));
    // fourth-order central stencil
    let d = |g: fn(&ThermoRecord) -> f64| {
        (g(&m2) - 8.0 * g(&m1) + 8.0 * g(&p1) - g(&p2)) / (12.0 * dt)
    };
    let du = d(|r| r.u);
    let df = d(|r| r.f);
    Ok(ThermoResiduals {
        specific_heat: (mid.c - du).abs(),
        entropy: (mid.s + df).abs(),
    })
}
