//! Parameter sweeps and critical-point scoring.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Boundary, ChainSpec, MAX_SITES};
use crate::qcorr::{qcorr_record, DBranch};
use crate::reduced_state::TwoSiteState;
use crate::thermal::{Ensemble, SpectrumCache, ZERO_TEMPERATURE};
use crate::thermo::ThermoRecord;

/// Denominator floor for scores.
pub const SCORE_EPSILON: f64 = 1e-12;

/// Default cusp threshold.
pub const DEFAULT_KAPPA: f64 = 10.0;

/// Relative spacing tolerance when checking that a grid is uniform.
const UNIFORM_TOLERANCE: f64 = 1e-9;

pub const FINITE_SIZE_CAVEAT: &str = "finite chain: a high score marks a sharp change of slope on this grid; \
     at finite L this is a steep crossover and is not by itself proof of a phase transition";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "J")]
    J,
    #[serde(rename = "T")]
    T,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::J => "J",
            SweepParam::T => "T",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(SweepParam::Delta),
            "J" => Ok(SweepParam::J),
            "T" => Ok(SweepParam::T),
            other => Err(Error::param("param", format!("expected delta, J or T, got `{other}`"))),
        }
    }
}

/// Uniform one-parameter grid; the swept field of `fixed` is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    sites: usize,
    coupling: f64,
    delta: f64,
    temperature: f64,
    boundary: Boundary,
}

impl SweepGrid {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        param: SweepParam,
        from: f64,
        to: f64,
        steps: usize,
        sites: usize,
        coupling: f64,
        delta: f64,
        temperature: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        if steps < 3 {
            return Err(Error::param("steps", format!("a sweep needs at least 3 points, got {steps}")));
        }
        if !from.is_finite() || !to.is_finite() || from >= to {
            return Err(Error::param("from", format!("need finite bounds with from < to, got [{from}, {to}]")));
        }
        if !(2..=MAX_SITES).contains(&sites) {
            return Err(Error::param("L", format!("chain length must be in 2..={MAX_SITES}, got {sites}")));
        }
        if sites == 2 && boundary == Boundary::Periodic {
            return Err(Error::param("L", "L=2 with periodic boundary counts the single bond twice; use bc=open"));
        }
        match param {
            SweepParam::J => {}
            _ if !coupling.is_finite() || coupling == 0.0 => {
                return Err(Error::param("J", format!("coupling must be finite and non-zero, got {coupling}")));
            }
            _ => {}
        }
        if param != SweepParam::Delta && !delta.is_finite() {
            return Err(Error::param("delta", format!("anisotropy must be finite, got {delta}")));
        }
        match param {
            SweepParam::T if from < ZERO_TEMPERATURE => {
                return Err(Error::param("from", format!("temperature sweep must start above 0, got {from}")));
            }
            SweepParam::T => {}
            _ if !temperature.is_finite() || temperature < ZERO_TEMPERATURE => {
                return Err(Error::param("T", format!("temperature must be finite and > 0, got {temperature}")));
            }
            _ => {}
        }
        Ok(SweepGrid {
            param,
            from,
            to,
            steps,
            sites,
            coupling,
            delta,
            temperature,
            boundary,
        })
    }

    /// Δ sweep on a periodic ring.
    pub fn delta_sweep(sites: usize, coupling: f64, temperature: f64, from: f64, to: f64, steps: usize) -> Result<Self> {
        Self::new(SweepParam::Delta, from, to, steps, sites, coupling, 0.0, temperature, Boundary::Periodic)
    }

    /// J sweep on a periodic ring.
    pub fn coupling_sweep(sites: usize, delta: f64, temperature: f64, from: f64, to: f64, steps: usize) -> Result<Self> {
        Self::new(SweepParam::J, from, to, steps, sites, 1.0, delta, temperature, Boundary::Periodic)
    }

    /// T sweep on a periodic ring.
    pub fn temperature_sweep(sites: usize, coupling: f64, delta: f64, from: f64, to: f64, steps: usize) -> Result<Self> {
        Self::new(SweepParam::T, from, to, steps, sites, coupling, delta, 1.0, Boundary::Periodic)
    }

    pub fn param(&self) -> SweepParam {
        self.param
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        (self.to - self.from) / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.steps).map(|i| self.from + i as f64 * h).collect()
    }

    /// `(J, Δ, T)` at a grid value.
    fn point(&self, value: f64) -> (f64, f64, f64) {
        match self.param {
            SweepParam::Delta => (self.coupling, value, self.temperature),
            SweepParam::J => (value, self.delta, self.temperature),
            SweepParam::T => (self.coupling, self.delta, value),
        }
    }
}

/// One grid point: correlators, quantum correlations and thermodynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// Swept parameter; `None` for a single point evaluation.
    pub param: Option<SweepParam>,
    pub value: f64,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "J")]
    pub coupling: f64,
    pub delta: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub dx: f64,
    pub dz: f64,
    pub concurrence: f64,
    pub eof: f64,
    pub qd: f64,
    pub d_branch: DBranch,
    pub f: f64,
    pub u: f64,
    pub s: f64,
    pub c: f64,
    pub chi: f64,
    pub m: f64,
}

impl SweepRecord {
    pub fn state(&self) -> Result<TwoSiteState> {
        TwoSiteState::new(self.dx, self.dz)
    }
}

/// Evaluates every observable from a level table carrying correlators.
pub fn evaluate_ensemble(
    ensemble: &Ensemble,
    coupling: f64,
    delta: f64,
    temperature: f64,
) -> Result<SweepRecord> {
    if !temperature.is_finite() || temperature < ZERO_TEMPERATURE {
        return Err(Error::param("T", format!("records need finite T > 0, got {temperature}")));
    }
    if !ensemble.has_correlators() {
        return Err(Error::param("ensemble", "level table carries no bond correlators"));
    }
    let canonical = ensemble.canonical(temperature);
    let state = TwoSiteState::from_canonical(&canonical)?;
    let q = qcorr_record(&state);
    #[cfg(debug_assertions)]
    if ensemble.sites() <= 6 {
        let rho = crate::reduced_state::two_site_density_matrix(&state)?;
        let spectral = crate::qcorr::spectral_concurrence(&rho);
        debug_assert!(
            (spectral - q.concurrence).abs() < 1e-6,
            "concurrence {} disagrees with Wootters {spectral}",
            q.concurrence
        );
    }
    let th = ThermoRecord::from_canonical(&canonical);
    Ok(SweepRecord {
        param: None,
        value: f64::NAN,
        sites: ensemble.sites(),
        coupling,
        delta,
        temperature,
        dx: state.dx(),
        dz: state.dz(),
        concurrence: q.concurrence,
        eof: q.eof,
        qd: q.qd,
        d_branch: q.d_branch,
        f: th.f,
        u: th.u,
        s: th.s,
        c: th.c,
        chi: th.chi,
        m: th.m,
    })
}

/// Full record for a single chain at temperature `t > 0`.
pub fn point_record(spec: &ChainSpec, t: f64, cache: &SpectrumCache) -> Result<SweepRecord> {
    let ens = cache.ensemble(spec.sites(), spec.coupling(), spec.delta(), spec.boundary())?;
    evaluate_ensemble(&ens, spec.coupling(), spec.delta(), t)
}

/// Evaluates the grid in parallel; output is in grid order and independent
/// of scheduling.
pub fn run_sweep(grid: &SweepGrid, cache: &SpectrumCache) -> Result<Vec<SweepRecord>> {
    let values = grid.values();
    let results: Vec<Result<SweepRecord>> = values
        .par_iter()
        .map(|&v| {
            let (j, d, t) = grid.point(v);
            let ens = cache.ensemble(grid.sites, j, d, grid.boundary)?;
            let mut rec = evaluate_ensemble(&ens, j, d, t)?;
            rec.param = Some(grid.param);
            rec.value = v;
            Ok(rec)
        })
        .collect();
    values
        .iter()
        .zip(results)
        .map(|(&v, r)| {
            r.map_err(|e| Error::SweepPoint {
                param: grid.param.as_str(),
                value: v,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Scalar columns of a [`SweepRecord`] that can be differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Dx,
    Dz,
    Concurrence,
    Eof,
    Qd,
    F,
    U,
    S,
    C,
    Chi,
    M,
}

impl Field {
    pub const ALL: [Field; 11] = [
        Field::Dx,
        Field::Dz,
        Field::Concurrence,
        Field::Eof,
        Field::Qd,
        Field::F,
        Field::U,
        Field::S,
        Field::C,
        Field::Chi,
        Field::M,
    ];

    pub fn get(&self, r: &SweepRecord) -> f64 {
        match self {
            Field::Dx => r.dx,
            Field::Dz => r.dz,
            Field::Concurrence => r.concurrence,
            Field::Eof => r.eof,
            Field::Qd => r.qd,
            Field::F => r.f,
            Field::U => r.u,
            Field::S => r.s,
            Field::C => r.c,
            Field::Chi => r.chi,
            Field::M => r.m,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Field::Dx => "dx",
            Field::Dz => "dz",
            Field::Concurrence => "concurrence",
            Field::Eof => "eof",
            Field::Qd => "qd",
            Field::F => "f",
            Field::U => "u",
            Field::S => "s",
            Field::C => "c",
            Field::Chi => "chi",
            Field::M => "m",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::param("field", format!("unknown field `{s}`")))
    }
}

/// Grid spacing, or an error if the abscissas are not strictly increasing
/// and uniformly spaced.
pub fn uniform_spacing(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::param("records", "need at least two grid points"));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::param("records", "grid values must be strictly increasing"));
    }
    for (i, w) in xs.windows(2).enumerate() {
        let step = w[1] - w[0];
        if step.is_nan() || step <= 0.0 {
            return Err(Error::param(
                "records",
                format!("grid order violated between points {i} and {} ({} -> {})", i + 1, w[0], w[1]),
            ));
        }
        if (step - h).abs() > UNIFORM_TOLERANCE * h.abs().max(xs[i].abs()) {
            return Err(Error::param(
                "records",
                format!("non-uniform grid between points {i} and {} (step {step}, expected {h})", i + 1),
            ));
        }
    }
    Ok(h)
}

/// Central differences inside, one-sided at the ends.
pub fn derivative_series(xs: &[f64], ys: &[f64]) -> Result<Vec<(f64, f64)>> {
    if xs.len() != ys.len() {
        return Err(Error::param("records", "abscissa and ordinate lengths differ"));
    }
    if xs.len() < 3 {
        return Err(Error::param("records", format!("need at least 3 points, got {}", xs.len())));
    }
    let h = uniform_spacing(xs)?;
    let n = xs.len();
    Ok((0..n)
        .map(|i| {
            let slope = if i == 0 {
                (ys[1] - ys[0]) / h
            } else if i == n - 1 {
                (ys[n - 1] - ys[n - 2]) / h
            } else {
                (ys[i + 1] - ys[i - 1]) / (2.0 * h)
            };
            (xs[i], slope)
        })
        .collect())
}

fn columns(records: &[SweepRecord], field: Field) -> (Vec<f64>, Vec<f64>) {
    records.iter().map(|r| (r.value, field.get(r))).unzip()
}

pub fn estimate_derivative(records: &[SweepRecord], field: Field) -> Result<Vec<(f64, f64)>> {
    let (xs, ys) = columns(records, field);
    derivative_series(&xs, &ys)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Cusp,
    BranchSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub location: f64,
    pub jump: f64,
    pub score: f64,
    pub kind: CandidateKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspReport {
    pub field: String,
    pub kappa: f64,
    pub candidates: Vec<Candidate>,
    pub caveat: String,
}

impl CuspReport {
    fn new(field: &str, kappa: f64, mut candidates: Vec<Candidate>) -> Self {
        sort_candidates(&mut candidates);
        CuspReport {
            field: field.to_string(),
            kappa,
            candidates,
            caveat: FINITE_SIZE_CAVEAT.to_string(),
        }
    }

    /// Candidates of both reports under this report's field and kappa.
    pub fn merged(mut self, other: CuspReport) -> CuspReport {
        self.candidates.extend(other.candidates);
        sort_candidates(&mut self.candidates);
        self
    }

    pub fn of_kind(&self, kind: CandidateKind) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(move |c| c.kind == kind)
    }

    /// Whether some candidate of `kind` lies within `tol` of `x`.
    pub fn has_near(&self, kind: CandidateKind, x: f64, tol: f64) -> bool {
        self.of_kind(kind).any(|c| (c.location - x).abs() <= tol)
    }
}

fn sort_candidates(c: &mut [Candidate]) {
    c.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.location.total_cmp(&b.location)));
}

/// What the slope jump is divided by when scoring a cusp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Median `|forward slope - backward slope|` over the interior: the
    /// finite-difference curvature floor of a smooth curve.
    #[default]
    MedianSlopeJump,
    /// Median `|slope|` over the sweep.
    MedianSlope,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slope-jump" => Ok(Normalization::MedianSlopeJump),
            "slope" => Ok(Normalization::MedianSlope),
            other => Err(Error::param("normalization", format!("expected slope-jump or slope, got `{other}`"))),
        }
    }
}

/// Per interior point: `(x, jump, score)`.
pub fn cusp_scores(xs: &[f64], ys: &[f64], norm: Normalization) -> Result<Vec<(f64, f64, f64)>> {
    if xs.len() < 5 {
        return Err(Error::param("records", format!("cusp detection needs at least 5 points, got {}", xs.len())));
    }
    let slopes = derivative_series(xs, ys)?;
    let h = uniform_spacing(xs)?;
    let jumps: Vec<f64> = (1..xs.len() - 1)
        .map(|i| {
            let fw = (ys[i + 1] - ys[i]) / h;
            let bw = (ys[i] - ys[i - 1]) / h;
            (fw - bw).abs()
        })
        .collect();
    let scale = match norm {
        Normalization::MedianSlopeJump => median(jumps.clone()),
        Normalization::MedianSlope => median(slopes.iter().map(|s| s.1.abs()).collect()),
    }
    .max(SCORE_EPSILON);
    Ok(jumps
        .iter()
        .enumerate()
        .map(|(k, &j)| (xs[k + 1], j, j / scale))
        .collect())
}

/// Cusp candidates on a raw series; each run of consecutive points with
/// `score >= kappa` yields its highest-scoring point.
pub fn detect_cusps_series(
    xs: &[f64],
    ys: &[f64],
    kappa: f64,
    norm: Normalization,
) -> Result<Vec<Candidate>> {
    let scores = cusp_scores(xs, ys, norm)?;
    let mut out = Vec::new();
    let mut best: Option<(f64, f64, f64)> = None;
    for &(x, jump, score) in &scores {
        if score >= kappa {
            if best.is_none_or(|b| score > b.2) {
                best = Some((x, jump, score));
            }
        } else if let Some((location, jump, score)) = best.take() {
            out.push(Candidate { location, jump, score, kind: CandidateKind::Cusp });
        }
    }
    if let Some((location, jump, score)) = best {
        out.push(Candidate { location, jump, score, kind: CandidateKind::Cusp });
    }
    Ok(out)
}

pub fn detect_cusps(records: &[SweepRecord], field: Field, kappa: f64) -> Result<CuspReport> {
    detect_cusps_with(records, field, kappa, Normalization::default())
}

pub fn detect_cusps_with(
    records: &[SweepRecord],
    field: Field,
    kappa: f64,
    norm: Normalization,
) -> Result<CuspReport> {
    if kappa.is_nan() || kappa < 0.0 {
        return Err(Error::param("kappa", format!("threshold must be >= 0, got {kappa}")));
    }
    let (xs, ys) = columns(records, field);
    Ok(CuspReport::new(field.as_str(), kappa, detect_cusps_series(&xs, &ys, kappa, norm)?))
}

fn branch_sign(b: DBranch) -> i8 {
    match b {
        DBranch::X => 1,
        DBranch::Z => -1,
        DBranch::Tie => 0,
    }
}

/// Points where the correlator attaining `D = max(|dx|, |dz|)` changes.
///
/// Tied points (`|dx| = |dz|`) are skipped, so a sweep along the isotropic
/// line reports nothing. The crossing is placed by linear interpolation of
/// `|dx| - |dz|` between the bracketing untied points.
pub fn detect_branch_switch(records: &[SweepRecord]) -> Result<CuspReport> {
    let xs: Vec<f64> = records.iter().map(|r| r.value).collect();
    let gap: Vec<f64> = records.iter().map(|r| r.dx.abs() - r.dz.abs()).collect();
    let slopes = derivative_series(&xs, &gap)?;
    let scale = median(slopes.iter().map(|s| s.1.abs()).collect()).max(SCORE_EPSILON);
    let mut candidates = Vec::new();
    let mut last: Option<usize> = None;
    for (i, r) in records.iter().enumerate() {
        let sign = branch_sign(r.d_branch);
        if sign == 0 {
            continue;
        }
        if let Some(a) = last {
            if branch_sign(records[a].d_branch) != sign {
                let (ga, gb) = (gap[a], gap[i]);
                let t = if ga != gb { ga / (ga - gb) } else { 0.5 };
                let location = xs[a] + t.clamp(0.0, 1.0) * (xs[i] - xs[a]);
                let jump = ((gb - ga) / (xs[i] - xs[a])).abs();
                candidates.push(Candidate {
                    location,
                    jump,
                    score: jump / scale,
                    kind: CandidateKind::BranchSwitch,
                });
            }
        }
        last = Some(i);
    }
    Ok(CuspReport::new("d_branch", 0.0, candidates))
}

/// Parameter value at which `field` is largest (first one on ties).
pub fn argmax(records: &[SweepRecord], field: Field) -> Option<f64> {
    records
        .iter()
        .fold(None::<&SweepRecord>, |best, r| match best {
            Some(b) if field.get(b) >= field.get(r) => Some(b),
            _ => Some(r),
        })
        .map(|r| r.value)
}
