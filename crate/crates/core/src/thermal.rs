//! Sector diagonalization and canonical-ensemble averages (k = 1).

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    all_sectors, build_correlator_blocks, build_hamiltonian_block, Boundary, ChainSpec,
    OperatorBlock, SectorBasis,
};

/// Temperatures below this are evaluated as `T = 0`.
pub const ZERO_TEMPERATURE: f64 = 1e-8;

/// Relative width of the ground manifold at `T = 0`.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

fn ground_tolerance(e_min: f64) -> f64 {
    DEGENERACY_TOLERANCE * e_min.abs().max(1.0)
}

fn check_temperature(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::param("T", format!("temperature must be >= 0, got {t}")));
    }
    Ok(())
}

/// Eigenpairs of one sector block, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    basis: SectorBasis,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SectorSpectrum {
    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `⟨v_i| op |v_i⟩` for every eigenvector.
    pub fn project_diagonal(&self, op: &OperatorBlock) -> Vec<f64> {
        let v = &self.eigenvectors;
        let ov = op.matrix() * v;
        (0..v.ncols()).map(|i| v.column(i).dot(&ov.column(i))).collect()
    }
}

fn solve_sector(spec: &ChainSpec, basis: SectorBasis) -> Result<SectorSpectrum> {
    let dim = basis.dim();
    let h = build_hamiltonian_block(spec, &basis)?.into_matrix();
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 1000.max(30 * dim)).ok_or(
        Error::Eigensolver {
            n_up: basis.n_up(),
            dim,
        },
    )?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SectorSpectrum {
        basis,
        eigenvalues,
        eigenvectors,
    })
}

/// Full spectrum of a chain, one entry per magnetization sector.
#[derive(Debug, Clone)]
pub struct SpectrumSet {
    spec: ChainSpec,
    sectors: Vec<SectorSpectrum>,
    e_min: f64,
}

pub fn diagonalize(spec: &ChainSpec) -> Result<SpectrumSet> {
    let sectors = all_sectors(spec.sites())?
        .into_par_iter()
        .map(|basis| solve_sector(spec, basis))
        .collect::<Result<Vec<_>>>()?;
    let e_min = sectors
        .iter()
        .map(|s| s.eigenvalues[0])
        .fold(f64::INFINITY, f64::min);
    Ok(SpectrumSet {
        spec: *spec,
        sectors,
        e_min,
    })
}

impl SpectrumSet {
    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn sectors(&self) -> &[SectorSpectrum] {
        &self.sectors
    }

    pub fn ground_energy(&self) -> f64 {
        self.e_min
    }

    pub fn level_count(&self) -> usize {
        self.sectors.iter().map(|s| s.eigenvalues.len()).sum()
    }

    /// All eigenvalues, sorted ascending.
    pub fn sorted_energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .sectors
            .iter()
            .flat_map(|s| s.eigenvalues.iter().copied())
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn check_conforming(&self, op: &[OperatorBlock]) -> Result<()> {
        if op.len() != self.sectors.len() {
            return Err(Error::param(
                "op",
                format!("{} operator blocks for {} sectors", op.len(), self.sectors.len()),
            ));
        }
        for (s, o) in self.sectors.iter().zip(op) {
            if s.basis.n_up() != o.n_up() || s.basis.dim() != o.dim() {
                return Err(Error::param(
                    "op",
                    format!(
                        "block for n_up={} (dim {}) does not match sector n_up={} (dim {})",
                        o.n_up(),
                        o.dim(),
                        s.basis.n_up(),
                        s.basis.dim()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Level table carrying energies and magnetizations only.
    pub fn ensemble(&self) -> Ensemble {
        let mut energies = Vec::with_capacity(self.level_count());
        let mut magnetization = Vec::with_capacity(self.level_count());
        for s in &self.sectors {
            energies.extend_from_slice(&s.eigenvalues);
            magnetization.extend(std::iter::repeat_n(
                s.basis.magnetization() as f64,
                s.eigenvalues.len(),
            ));
        }
        Ensemble {
            sites: self.spec.sites(),
            bonds: self.spec.bond_count(),
            energies,
            magnetization,
            zz: Vec::new(),
            xx: Vec::new(),
        }
    }

    /// Level table that also carries the bond-(1,2) correlators of every eigenstate.
    pub fn correlator_ensemble(&self) -> Result<Ensemble> {
        let mut ens = self.ensemble();
        let per_sector: Vec<(Vec<f64>, Vec<f64>)> = self
            .sectors
            .par_iter()
            .map(|s| {
                let (zz, xx) = build_correlator_blocks(&self.spec, &s.basis)?;
                Ok((s.project_diagonal(&zz), s.project_diagonal(&xx)))
            })
            .collect::<Result<_>>()?;
        for (zz, xx) in per_sector {
            ens.zz.extend(zz);
            ens.xx.extend(xx);
        }
        Ok(ens)
    }
}

/// Normalized Boltzmann weights, laid out like the sectors of a [`SpectrumSet`].
#[derive(Debug, Clone)]
pub struct ThermalWeights {
    temperature: f64,
    per_sector: Vec<Vec<f64>>,
}

impl ThermalWeights {
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn sector(&self, index: usize) -> &[f64] {
        &self.per_sector[index]
    }

    pub fn per_sector(&self) -> &[Vec<f64>] {
        &self.per_sector
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_sector.iter().flatten().copied()
    }
}

/// Unnormalized shifted weight `exp(-(E - e_min)/T)`, or the ground-manifold
/// indicator at `T = 0`.
#[inline]
fn shifted_weight(e: f64, e_min: f64, t: f64) -> f64 {
    if t < ZERO_TEMPERATURE {
        if e - e_min <= ground_tolerance(e_min) {
            1.0
        } else {
            0.0
        }
    } else {
        (-(e - e_min) / t).exp()
    }
}

pub fn thermal_weights(spectrum: &SpectrumSet, t: f64) -> Result<ThermalWeights> {
    check_temperature(t)?;
    let e_min = spectrum.e_min;
    let mut per_sector: Vec<Vec<f64>> = spectrum
        .sectors
        .iter()
        .map(|s| s.eigenvalues.iter().map(|&e| shifted_weight(e, e_min, t)).collect())
        .collect();
    let z: f64 = per_sector.iter().flatten().sum();
    per_sector.iter_mut().flatten().for_each(|w| *w /= z);
    Ok(ThermalWeights {
        temperature: t,
        per_sector,
    })
}

/// `Tr(ρ op)` for an operator given as one block per sector.
pub fn thermal_average(
    spectrum: &SpectrumSet,
    weights: &ThermalWeights,
    op: &[OperatorBlock],
) -> Result<f64> {
    spectrum.check_conforming(op)?;
    if weights.per_sector.len() != spectrum.sectors.len()
        || weights
            .per_sector
            .iter()
            .zip(&spectrum.sectors)
            .any(|(w, s)| w.len() != s.eigenvalues.len())
    {
        return Err(Error::param("weights", "weights do not match the spectrum layout"));
    }
    Ok(spectrum
        .sectors
        .iter()
        .zip(op)
        .zip(&weights.per_sector)
        .map(|((s, o), w)| {
            s.project_diagonal(o)
                .iter()
                .zip(w)
                .map(|(x, w)| x * w)
                .sum::<f64>()
        })
        .sum())
}

/// Free energy per site; at `T = 0` this is the ground energy per site and
/// `zero_temperature_limit` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy {
    pub per_site: f64,
    pub zero_temperature_limit: bool,
}

pub fn free_energy_per_site(spectrum: &SpectrumSet, t: f64) -> Result<FreeEnergy> {
    check_temperature(t)?;
    Ok(spectrum.ensemble().canonical(t).free_energy())
}

pub fn internal_energy_per_site(spectrum: &SpectrumSet, t: f64) -> Result<f64> {
    check_temperature(t)?;
    Ok(spectrum.ensemble().canonical(t).internal_energy())
}

/// Flat table of eigenlevels with the diagonal observables needed for
/// thermal sweeps. Cheap to rescale in `J`, unlike the eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    sites: usize,
    bonds: usize,
    energies: Vec<f64>,
    magnetization: Vec<f64>,
    zz: Vec<f64>,
    xx: Vec<f64>,
}

impl Ensemble {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn bond_count(&self) -> usize {
        self.bonds
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn has_correlators(&self) -> bool {
        self.zz.len() == self.energies.len()
    }

    /// Energies multiplied by `factor` (the spectrum is linear in `J`).
    pub fn scaled(&self, factor: f64) -> Ensemble {
        Ensemble {
            energies: self.energies.iter().map(|e| e * factor).collect(),
            ..self.clone()
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// All canonical averages at temperature `t` in one pass.
    ///
    /// `t` is clamped to be non-negative; callers validate it.
    pub fn canonical(&self, t: f64) -> Canonical {
        let t = t.max(0.0);
        let e_min = self.ground_energy();
        let w: Vec<f64> = self
            .energies
            .iter()
            .map(|&e| shifted_weight(e, e_min, t))
            .collect();
        let z: f64 = w.iter().sum();
        let avg = |xs: &[f64]| -> f64 {
            xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / z
        };
        let mean_e = avg(&self.energies);
        let var_e = self
            .energies
            .iter()
            .zip(&w)
            .map(|(e, w)| w * (e - mean_e).powi(2))
            .sum::<f64>()
            / z;
        let mean_m = avg(&self.magnetization);
        let var_m = self
            .magnetization
            .iter()
            .zip(&w)
            .map(|(m, w)| w * (m - mean_m).powi(2))
            .sum::<f64>()
            / z;
        let (zz, xx) = if self.has_correlators() {
            (avg(&self.zz), avg(&self.xx))
        } else {
            (f64::NAN, f64::NAN)
        };
        Canonical {
            temperature: t,
            sites: self.sites,
            e_min,
            ln_z_shifted: z.ln(),
            mean_energy: mean_e,
            energy_variance: var_e,
            mean_magnetization: mean_m,
            magnetization_variance: var_m,
            zz,
            xx,
        }
    }
}

/// Canonical averages of one [`Ensemble`] at one temperature. Totals, not
/// per-site values, unless the accessor says otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canonical {
    pub temperature: f64,
    pub sites: usize,
    pub e_min: f64,
    /// `ln Σ exp(-(E_i - e_min)/T)`; the ground degeneracy at `T = 0`.
    pub ln_z_shifted: f64,
    pub mean_energy: f64,
    pub energy_variance: f64,
    pub mean_magnetization: f64,
    pub magnetization_variance: f64,
    /// Bond-(1,2) `⟨σz σz⟩`; NaN when the ensemble has no correlators.
    pub zz: f64,
    /// Bond-(1,2) `⟨σx σx⟩`; NaN when the ensemble has no correlators.
    pub xx: f64,
}

impl Canonical {
    pub fn is_zero_temperature(&self) -> bool {
        self.temperature < ZERO_TEMPERATURE
    }

    pub fn free_energy(&self) -> FreeEnergy {
        let l = self.sites as f64;
        if self.is_zero_temperature() {
            FreeEnergy {
                per_site: self.e_min / l,
                zero_temperature_limit: true,
            }
        } else {
            FreeEnergy {
                per_site: self.e_min / l - self.temperature * self.ln_z_shifted / l,
                zero_temperature_limit: false,
            }
        }
    }

    pub fn internal_energy(&self) -> f64 {
        self.mean_energy / self.sites as f64
    }
}

type CacheKey = (usize, u64, Boundary);

/// Write-once cache of `J = 1` level tables keyed by `(L, Δ, bc)`.
///
/// Lookups rescale the energies by `J`, which also covers `J < 0` (negated
/// spectrum) and the trivial `J = 0` point of a coupling sweep.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    entries: RwLock<HashMap<CacheKey, Arc<Ensemble>>>,
}

impl SpectrumCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unit-coupling table for `(L, Δ, bc)`, diagonalizing on first use.
    pub fn unit(&self, sites: usize, delta: f64, boundary: Boundary) -> Result<Arc<Ensemble>> {
        let key = (sites, delta.to_bits(), boundary);
        if let Some(hit) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let spec = ChainSpec::new(sites, 1.0, delta, boundary)?;
        let table = Arc::new(diagonalize(&spec)?.correlator_ensemble()?);
        let mut entries = self.entries.write().expect("cache lock");
        Ok(Arc::clone(entries.entry(key).or_insert(table)))
    }

    /// Level table at coupling `j` (any finite value, including 0).
    pub fn ensemble(
        &self,
        sites: usize,
        coupling: f64,
        delta: f64,
        boundary: Boundary,
    ) -> Result<Ensemble> {
        if !coupling.is_finite() {
            return Err(Error::param("J", format!("coupling must be finite, got {coupling}")));
        }
        Ok(self.unit(sites, delta, boundary)?.scaled(coupling))
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_spin(j: f64, delta: f64) -> SpectrumSet {
        diagonalize(&ChainSpec::open(2, j, delta).unwrap()).unwrap()
    }

    #[test]
    fn two_spin_spectra() {
        let e = two_spin(1.0, 1.0).sorted_energies();
        for (a, b) in e.iter().zip([-3.0, 1.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let e = two_spin(1.0, 0.0).sorted_energies();
        for (a, b) in e.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigenpairs_residual_and_orthonormality() {
        let spec = ChainSpec::periodic(8, 1.0, 0.7).unwrap();
        let spectrum = diagonalize(&spec).unwrap();
        for s in spectrum.sectors() {
            let h = build_hamiltonian_block(&spec, s.basis()).unwrap().into_matrix();
            let dim = s.basis().dim();
            let scale = h.amax().max(1.0) * dim as f64;
            assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
            let v = s.eigenvectors();
            let residual = &h * v - v * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(s.eigenvalues()));
            assert!(residual.amax() <= 1e-10 * scale, "residual {}", residual.amax());
            let gram = v.transpose() * v;
            assert!((gram - DMatrix::identity(dim, dim)).amax() <= 1e-10);
        }
    }

    #[test]
    fn weights_normalized_and_limits() {
        let spectrum = diagonalize(&ChainSpec::periodic(6, 1.0, 0.3).unwrap()).unwrap();
        for t in [0.0, 0.05, 1.0, 30.0] {
            let w = thermal_weights(&spectrum, t).unwrap();
            assert!(w.iter().all(|x| x >= 0.0));
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        let w = thermal_weights(&spectrum, 1e6).unwrap();
        assert!(w.iter().all(|x| (x - 1.0 / 64.0).abs() < 1e-5));
        assert!(thermal_weights(&spectrum, -1.0).is_err());
    }

    #[test]
    fn zero_temperature_singlet() {
        let spectrum = two_spin(1.0, 1.0);
        let w = thermal_weights(&spectrum, 0.0).unwrap();
        // singlet lives in n_up = 1, lowest eigenvalue
        assert_eq!(w.sector(1)[0], 1.0);
        assert_eq!(w.iter().filter(|&x| x > 0.0).count(), 1);
        // below the threshold counts as zero temperature
        let w = thermal_weights(&spectrum, 1e-9).unwrap();
        assert_eq!(w.sector(1)[0], 1.0);
    }

    #[test]
    fn zero_temperature_ferromagnetic_doublet() {
        let spectrum = diagonalize(&ChainSpec::periodic(4, 1.0, -2.0).unwrap()).unwrap();
        let w = thermal_weights(&spectrum, 0.0).unwrap();
        assert_abs_diff_eq!(w.sector(0)[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.sector(4)[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn averages_identity_energy_and_two_spin_zz() {
        let spec = ChainSpec::open(2, 1.0, 0.6).unwrap();
        let spectrum = diagonalize(&spec).unwrap();
        let t = 0.8;
        let w = thermal_weights(&spectrum, t).unwrap();
        let bases: Vec<_> = spectrum.sectors().iter().map(|s| s.basis().clone()).collect();

        let id: Vec<_> = bases.iter().map(OperatorBlock::identity).collect();
        assert_abs_diff_eq!(thermal_average(&spectrum, &w, &id).unwrap(), 1.0, epsilon = 1e-12);

        let h: Vec<_> = bases.iter().map(|b| build_hamiltonian_block(&spec, b).unwrap()).collect();
        let u = internal_energy_per_site(&spectrum, t).unwrap();
        assert_abs_diff_eq!(thermal_average(&spectrum, &w, &h).unwrap(), 2.0 * u, epsilon = 1e-12);

        let zz: Vec<_> = bases.iter().map(|b| build_correlator_blocks(&spec, b).unwrap().0).collect();
        let (j, d, beta) = (1.0, 0.6, 1.0 / t);
        let z = 2.0 * f64::exp(-beta * j * d) + f64::exp(-beta * (2.0 - d) * j) + f64::exp(beta * (2.0 + d) * j);
        let expect = (2.0 * f64::exp(-beta * j * d) - f64::exp(-beta * (2.0 - d) * j) - f64::exp(beta * (2.0 + d) * j)) / z;
        assert_abs_diff_eq!(thermal_average(&spectrum, &w, &zz).unwrap(), expect, epsilon = 1e-12);

        assert!(thermal_average(&spectrum, &w, &zz[..2]).is_err());
    }

    #[test]
    fn free_energy_limits_and_scaling() {
        let spectrum = diagonalize(&ChainSpec::periodic(6, 1.0, 0.5).unwrap()).unwrap();
        let f = free_energy_per_site(&spectrum, 100.0).unwrap().per_site;
        let lead = -100.0 * std::f64::consts::LN_2;
        assert!(((f - lead) / lead).abs() < 0.01);

        let f0 = free_energy_per_site(&spectrum, 0.0).unwrap();
        assert!(f0.zero_temperature_limit);
        assert_abs_diff_eq!(f0.per_site, spectrum.ground_energy() / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            internal_energy_per_site(&spectrum, 0.0).unwrap(),
            spectrum.ground_energy() / 6.0,
            epsilon = 1e-12
        );

        let doubled = diagonalize(&ChainSpec::periodic(6, 2.0, 0.5).unwrap()).unwrap();
        let a = free_energy_per_site(&doubled, 2.0).unwrap().per_site / 2.0;
        let b = free_energy_per_site(&spectrum, 1.0).unwrap().per_site;
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn internal_energy_is_beta_derivative() {
        let spectrum = diagonalize(&ChainSpec::periodic(6, 1.0, -0.4).unwrap()).unwrap();
        let ens = spectrum.ensemble();
        let beta_f = |beta: f64| beta * ens.canonical(1.0 / beta).free_energy().per_site;
        for beta in [0.3, 1.0, 4.0] {
            let h = 1e-4 * beta;
            let fd = (beta_f(beta + h) - beta_f(beta - h)) / (2.0 * h);
            let u = ens.canonical(1.0 / beta).internal_energy();
            assert!((fd - u).abs() < 1e-6, "beta={beta}: {fd} vs {u}");
        }
    }

    #[test]
    fn cache_rescales_and_negates() {
        let cache = SpectrumCache::new();
        let direct = diagonalize(&ChainSpec::periodic(6, -1.5, 0.5).unwrap()).unwrap();
        let cached = cache.ensemble(6, -1.5, 0.5, Boundary::Periodic).unwrap();
        let mut a = direct.sorted_energies();
        let mut b = cached.energies().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        cache.ensemble(6, 2.0, 0.5, Boundary::Periodic).unwrap();
        assert_eq!(cache.len(), 1);
        let zero = cache.ensemble(6, 0.0, 0.5, Boundary::Periodic).unwrap();
        assert!(zero.energies().iter().all(|&e| e == 0.0));
    }
}
