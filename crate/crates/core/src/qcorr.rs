//! Concurrence, entanglement of formation and quantum discord of the
//! nearest-neighbour X state. All entropic quantities are in bits.

use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::reduced_state::TwoSiteState;

pub mod oracle;

pub use oracle::{discord_bruteforce, discord_bruteforce_detailed, BruteForceDiscord};

/// `|dx|` and `|dz|` closer than this are reported as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Which correlator sets `D = max(|dx|, |dz|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DBranch {
    #[serde(rename = "X")]
    X,
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "TIE")]
    Tie,
}

impl DBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            DBranch::X => "X",
            DBranch::Z => "Z",
            DBranch::Tie => "TIE",
        }
    }
}

impl std::fmt::Display for DBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DBranch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "X" => Ok(DBranch::X),
            "Z" => Ok(DBranch::Z),
            "TIE" => Ok(DBranch::Tie),
            other => Err(format!("unknown d_branch `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QCorrRecord {
    pub concurrence: f64,
    pub eof: f64,
    pub qd: f64,
    pub d_branch: DBranch,
}

/// `x log2 x` with the continuous extension `g(0) = 0`.
pub fn g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `g(1 + x)`, accurate for small `x`.
fn g1(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else {
        (1.0 + x) * x.ln_1p() / std::f64::consts::LN_2
    }
}

pub fn concurrence(s: &TwoSiteState) -> f64 {
    (s.dx().abs() - (1.0 + s.dz()).abs() / 2.0).clamp(0.0, 1.0)
}

/// Entanglement of formation from the concurrence.
pub fn eof_from_concurrence(c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let p = (1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0;
    (-g(p) - g(1.0 - p)).clamp(0.0, 1.0)
}

pub fn eof(s: &TwoSiteState) -> f64 {
    eof_from_concurrence(concurrence(s))
}

pub fn d_branch(s: &TwoSiteState) -> DBranch {
    let (ax, az) = (s.dx().abs(), s.dz().abs());
    if (ax - az).abs() <= TIE_TOLERANCE {
        DBranch::Tie
    } else if ax > az {
        DBranch::X
    } else {
        DBranch::Z
    }
}

/// Closed-form discord of the X state and the branch attaining `D`.
pub fn discord_closed(s: &TwoSiteState) -> (f64, DBranch) {
    let (dx, dz) = (s.dx(), s.dz());
    let d = dx.abs().max(dz.abs());
    let mutual = (g1(-2.0 * dx - dz) + 2.0 * g1(dz) + g1(2.0 * dx - dz)) / 4.0;
    let classical = (g1(d) + g1(-d)) / 2.0;
    ((mutual - classical).clamp(0.0, 1.0), d_branch(s))
}

pub fn qcorr_record(s: &TwoSiteState) -> QCorrRecord {
    let c = concurrence(s);
    let (qd, d_branch) = discord_closed(s);
    QCorrRecord {
        concurrence: c,
        eof: eof_from_concurrence(c),
        qd,
        d_branch,
    }
}

/// Wootters concurrence of a real symmetric two-qubit density matrix:
/// `max(0, λ1 - λ2 - λ3 - λ4)` with `λ` the eigenvalues of
/// `sqrt(sqrt(ρ) ρ̃ sqrt(ρ))`, `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn spectral_concurrence(rho: &Matrix4<f64>) -> f64 {
    #[rustfmt::skip]
    let yy = Matrix4::new(
        0.0, 0.0, 0.0, -1.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
    );
    let tilde = yy * rho * yy;
    let eig = SymmetricEigen::new(*rho);
    let root = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&root) * eig.eigenvectors.transpose();
    let m = sqrt_rho * tilde * sqrt_rho;
    let m = (m + m.transpose()) / 2.0;
    let mut lambda: Vec<f64> = m
        .symmetric_eigenvalues()
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0)
}
