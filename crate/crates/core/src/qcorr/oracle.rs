//! Brute-force discord: mutual information minus the best classical
//! correlation over projective measurements on the second qubit.
//!
//! Works on the full 4×4 density matrix with explicit partial traces and
//! a numeric eigensolve, so it shares no algebra with the closed form.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Complex, Matrix2, Matrix4};

use crate::reduced_state::{two_site_density_matrix, TwoSiteState};

type C64 = Complex<f64>;

/// Result of the measurement optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceDiscord {
    pub qd: f64,
    pub mutual_information: f64,
    pub classical_correlation: f64,
    /// Polar angle of the optimal measurement axis (0 = z axis).
    pub theta: f64,
    /// Azimuthal angle of the optimal measurement axis.
    pub phi: f64,
}

fn entropy_bits<I: IntoIterator<Item = f64>>(spectrum: I) -> f64 {
    spectrum
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

fn hermitian2_eigenvalues(m: &Matrix2<C64>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = (a + d) / 2.0;
    let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    [mean + r, mean - r]
}

/// Index of `|a b⟩` in the 4-dimensional product basis.
#[inline]
fn ix(a: usize, b: usize) -> usize {
    2 * a + b
}

fn partial_trace_b(rho: &Matrix4<f64>) -> Matrix2<C64> {
    Matrix2::from_fn(|a, a2| {
        C64::new((0..2).map(|b| rho[(ix(a, b), ix(a2, b))]).sum(), 0.0)
    })
}

fn partial_trace_a(rho: &Matrix4<f64>) -> Matrix2<C64> {
    Matrix2::from_fn(|b, b2| {
        C64::new((0..2).map(|a| rho[(ix(a, b), ix(a, b2))]).sum(), 0.0)
    })
}

/// Projector `(I + s n·σ)/2` onto the outcome `s = ±1` along `n(θ, φ)`.
fn projector(theta: f64, phi: f64, sign: f64) -> Matrix2<C64> {
    let (nx, ny, nz) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
    let half = 0.5 * sign;
    Matrix2::new(
        C64::new(0.5 + half * nz, 0.0),
        C64::new(half * nx, -half * ny),
        C64::new(half * nx, half * ny),
        C64::new(0.5 - half * nz, 0.0),
    )
}

/// `Σ_k p_k S(ρ_A | k)` for a measurement of qubit B along `n(θ, φ)`.
fn conditional_entropy(rho: &Matrix4<f64>, theta: f64, phi: f64) -> f64 {
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let proj = projector(theta, phi, sign);
        // Tr_B[(I⊗Π) ρ (I⊗Π)] = Tr_B[ρ (I⊗Π)]
        let post = Matrix2::from_fn(|a, a2| {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..2 {
                for b2 in 0..2 {
                    acc += proj[(b2, b)] * rho[(ix(a, b), ix(a2, b2))];
                }
            }
            acc
        });
        let p = post[(0, 0)].re + post[(1, 1)].re;
        if p <= 1e-15 {
            continue;
        }
        let lam = hermitian2_eigenvalues(&post);
        total += p * entropy_bits(lam.iter().map(|l| l / p));
    }
    total
}

/// Brute-force discord with a `grid × grid` scan of the measurement axis
/// over `[0, π/2]²` followed by `refine_iters` window-halving passes.
pub fn discord_bruteforce_detailed(
    s: &TwoSiteState,
    grid: usize,
    refine_iters: usize,
) -> BruteForceDiscord {
    let rho = two_site_density_matrix(s).expect("TwoSiteState is valid by construction");
    let s_a = entropy_bits(hermitian2_eigenvalues(&partial_trace_b(&rho)));
    let s_b = entropy_bits(hermitian2_eigenvalues(&partial_trace_a(&rho)));
    let s_ab = entropy_bits(rho.symmetric_eigenvalues().iter().copied());
    let mutual = s_a + s_b - s_ab;

    let grid = grid.max(2);
    let step = FRAC_PI_2 / (grid - 1) as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..grid {
        for k in 0..grid {
            let (theta, phi) = (i as f64 * step, k as f64 * step);
            let h = conditional_entropy(&rho, theta, phi);
            if h < best.0 {
                best = (h, theta, phi);
            }
        }
    }
    let mut width = step;
    for _ in 0..refine_iters {
        let (_, t0, p0) = best;
        for a in [-1.0, 0.0, 1.0] {
            for b in [-1.0, 0.0, 1.0] {
                let theta = (t0 + a * width).clamp(0.0, FRAC_PI_2);
                let phi = (p0 + b * width).clamp(0.0, FRAC_PI_2);
                let h = conditional_entropy(&rho, theta, phi);
                if h < best.0 {
                    best = (h, theta, phi);
                }
            }
        }
        width /= 2.0;
    }
    let classical = s_a - best.0;
    BruteForceDiscord {
        qd: (mutual - classical).max(0.0),
        mutual_information: mutual,
        classical_correlation: classical,
        theta: best.1,
        phi: best.2,
    }
}

pub fn discord_bruteforce(s: &TwoSiteState, grid: usize, refine_iters: usize) -> f64 {
    discord_bruteforce_detailed(s, grid, refine_iters).qd
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcorr::discord_closed;
    use proptest::prelude::*;

    fn st(dx: f64, dz: f64) -> TwoSiteState {
        TwoSiteState::new(dx, dz).unwrap()
    }

    #[test]
    fn anchors() {
        assert!(discord_bruteforce(&st(0.0, 0.0), 64, 40).abs() < 1e-9);
        assert!((discord_bruteforce(&st(-1.0, -1.0), 64, 40) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn marginals_maximally_mixed() {
        let d = discord_bruteforce_detailed(&st(0.2, 0.3), 16, 5);
        let rho = two_site_density_matrix(&st(0.2, 0.3)).unwrap();
        assert!((entropy_bits(hermitian2_eigenvalues(&partial_trace_b(&rho))) - 1.0).abs() < 1e-14);
        assert!(d.mutual_information > 0.0);
    }

    #[test]
    fn projectors_complete() {
        let sum = projector(0.7, 1.1, 1.0) + projector(0.7, 1.1, -1.0);
        assert!((sum - Matrix2::identity()).norm() < 1e-15);
        let p = projector(0.7, 1.1, 1.0);
        assert!((p * p - p).norm() < 1e-15);
    }

    #[test]
    fn uniform_sample_agrees_with_closed_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let dz: f64 = rng.random_range(-1.0..=1.0);
            let dx = rng.random_range(-1.0..=1.0) * (1.0 - dz) / 2.0;
            let s = st(dx, dz);
            let closed = discord_closed(&s).0;
            let brute = discord_bruteforce(&s, 64, 40);
            assert!((closed - brute).abs() < 1e-5, "({dx}, {dz}): {closed} vs {brute}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn optimal_axis_follows_d_branch(dz in -1.0f64..=1.0, u in -1.0f64..=1.0) {
            let dx = u * (1.0 - dz) / 2.0;
            let gap = dx.abs() - dz.abs();
            prop_assume!(gap.abs() > 1e-3);
            let d = discord_bruteforce_detailed(&st(dx, dz), 64, 40);
            let resolution = FRAC_PI_2 / 63.0;
            if gap > 0.0 {
                prop_assert!((d.theta - FRAC_PI_2).abs() <= resolution, "theta {}", d.theta);
            } else {
                prop_assert!(d.theta <= resolution, "theta {}", d.theta);
            }
        }
    }
}
