//! Spin basis and dense sector blocks for the periodic/open XXZ chain
//!
//! `H = J Σ_j (σx_j σx_{j+1} + σy_j σy_{j+1} + Δ σz_j σz_{j+1})`
//!
//! The Hamiltonian commutes with the total `Σ σz`, so every operator used
//! here is stored as one dense block per magnetization sector (fixed number
//! of up spins). Sites are 1-based in the docs; site `j` lives at bit `j-1`
//! of a configuration, and a set bit means spin up.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain handled by the dense sector solver.
pub const MAX_SITES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            other => Err(Error::param("bc", format!("unknown boundary `{other}`"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        })
    }
}

/// Physical definition of a chain: size, coupling, anisotropy, boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    sites: usize,
    coupling: f64,
    delta: f64,
    boundary: Boundary,
}

impl ChainSpec {
    pub fn new(sites: usize, coupling: f64, delta: f64, boundary: Boundary) -> Result<Self> {
        if !(2..=MAX_SITES).contains(&sites) {
            return Err(Error::param(
                "L",
                format!("chain length must be in 2..={MAX_SITES}, got {sites}"),
            ));
        }
        if sites == 2 && boundary == Boundary::Periodic {
            return Err(Error::param(
                "L",
                "L=2 with periodic boundary counts the single bond twice; use bc=open",
            ));
        }
        if !coupling.is_finite() || coupling == 0.0 {
            return Err(Error::param("J", format!("coupling must be finite and non-zero, got {coupling}")));
        }
        if !delta.is_finite() {
            return Err(Error::param("delta", format!("anisotropy must be finite, got {delta}")));
        }
        Ok(ChainSpec {
            sites,
            coupling,
            delta,
            boundary,
        })
    }

    pub fn periodic(sites: usize, coupling: f64, delta: f64) -> Result<Self> {
        Self::new(sites, coupling, delta, Boundary::Periodic)
    }

    pub fn open(sites: usize, coupling: f64, delta: f64) -> Result<Self> {
        Self::new(sites, coupling, delta, Boundary::Open)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Same chain with a different coupling.
    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.sites, coupling, self.delta, self.boundary)
    }

    /// Same chain with a different anisotropy.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.sites, self.coupling, delta, self.boundary)
    }

    /// Bonds as 0-based site pairs.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let open = (0..self.sites - 1).map(|j| (j, j + 1));
        match self.boundary {
            Boundary::Open => open.collect(),
            Boundary::Periodic => open.chain(std::iter::once((self.sites - 1, 0))).collect(),
        }
    }

    pub fn bond_count(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.sites - 1,
            Boundary::Periodic => self.sites,
        }
    }
}

/// All configurations with a fixed number of up spins, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    sites: usize,
    n_up: usize,
    states: Vec<u32>,
}

impl SectorBasis {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Eigenvalue of `Σ σz` on this sector.
    pub fn magnetization(&self) -> i32 {
        2 * self.n_up as i32 - self.sites as i32
    }

    pub fn index_of(&self, state: u32) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

pub fn enumerate_sector_basis(sites: usize, n_up: usize) -> Result<SectorBasis> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::param(
            "L",
            format!("chain length must be in 1..={MAX_SITES}, got {sites}"),
        ));
    }
    if n_up > sites {
        return Err(Error::param(
            "n_up",
            format!("n_up={n_up} exceeds chain length {sites}"),
        ));
    }
    let limit = 1u32 << sites;
    let mut states = Vec::with_capacity(binomial(sites, n_up));
    if n_up == 0 {
        states.push(0);
    } else {
        // Gosper's hack: next larger integer with the same popcount.
        let mut c: u32 = (1 << n_up) - 1;
        while c < limit {
            states.push(c);
            let lowest = c & c.wrapping_neg();
            let ripple = c + lowest;
            c = (((ripple ^ c) >> 2) / lowest) | ripple;
        }
    }
    Ok(SectorBasis {
        sites,
        n_up,
        states,
    })
}

/// Bases for every sector `n_up = 0..=L`.
pub fn all_sectors(sites: usize) -> Result<Vec<SectorBasis>> {
    (0..=sites).map(|n| enumerate_sector_basis(sites, n)).collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dense real symmetric operator restricted to one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlock {
    n_up: usize,
    matrix: DMatrix<f64>,
}

impl OperatorBlock {
    pub fn new(n_up: usize, matrix: DMatrix<f64>) -> Self {
        debug_assert!(matrix.is_square());
        OperatorBlock { n_up, matrix }
    }

    pub fn identity(basis: &SectorBasis) -> Self {
        OperatorBlock::new(basis.n_up, DMatrix::identity(basis.dim(), basis.dim()))
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

#[inline]
fn spin(state: u32, site: usize) -> f64 {
    if state >> site & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn check_basis(spec: &ChainSpec, basis: &SectorBasis) -> Result<()> {
    if spec.sites() != basis.sites() {
        return Err(Error::param(
            "basis",
            format!(
                "basis built for L={} used with a chain of L={}",
                basis.sites(),
                spec.sites()
            ),
        ));
    }
    Ok(())
}

pub fn build_hamiltonian_block(spec: &ChainSpec, basis: &SectorBasis) -> Result<OperatorBlock> {
    check_basis(spec, basis)?;
    let j = spec.coupling();
    let zz = j * spec.delta();
    let bonds = spec.bonds();
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for (a, &s) in basis.states().iter().enumerate() {
        let mut diag = 0.0;
        for &(p, q) in &bonds {
            let (sp, sq) = (spin(s, p), spin(s, q));
            diag += sp * sq;
            if sp != sq {
                // σxσx + σyσy = 2(σ+σ- + σ-σ+): flip-flop with amplitude 2
                let t = s ^ (1 << p) ^ (1 << q);
                let b = basis.index_of(t).expect("flip-flop stays in sector");
                m[(b, a)] += 2.0 * j;
            }
        }
        m[(a, a)] = zz * diag;
    }
    Ok(OperatorBlock::new(basis.n_up(), m))
}

/// `σz σz` and the flip-flop part of `σx σx` on the bond `(site, site+1)`,
/// with `site` 1-based and wrapping for periodic chains.
pub fn build_bond_correlator_blocks(
    spec: &ChainSpec,
    basis: &SectorBasis,
    site: usize,
) -> Result<(OperatorBlock, OperatorBlock)> {
    check_basis(spec, basis)?;
    let l = spec.sites();
    if site == 0 || site > spec.bond_count() {
        return Err(Error::param(
            "bond",
            format!("bond index {site} out of range for {} bonds", spec.bond_count()),
        ));
    }
    let p = site - 1;
    let q = site % l;
    let dim = basis.dim();
    let mut zz = DMatrix::zeros(dim, dim);
    let mut xx = DMatrix::zeros(dim, dim);
    for (a, &s) in basis.states().iter().enumerate() {
        let (sp, sq) = (spin(s, p), spin(s, q));
        zz[(a, a)] = sp * sq;
        if sp != sq {
            let b = basis
                .index_of(s ^ (1 << p) ^ (1 << q))
                .expect("flip-flop stays in sector");
            xx[(b, a)] = 1.0;
        }
    }
    Ok((
        OperatorBlock::new(basis.n_up(), zz),
        OperatorBlock::new(basis.n_up(), xx),
    ))
}

/// Correlator blocks `(zz, xx)` on the bond (1,2).
///
/// The `σ+σ+ + σ-σ-` part of `σx σx` changes the sector and is dropped: the
/// thermal state is block diagonal in `Σ σz`, so its trace vanishes.
pub fn build_correlator_blocks(
    spec: &ChainSpec,
    basis: &SectorBasis,
) -> Result<(OperatorBlock, OperatorBlock)> {
    build_bond_correlator_blocks(spec, basis, 1)
}
