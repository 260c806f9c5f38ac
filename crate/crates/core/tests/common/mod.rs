//! Independent no-symmetry reference: the full 2^L Hamiltonian built from
//! Pauli strings and diagonalized with a cyclic Jacobi solver.

#![allow(dead_code)]

use xxzq_core::Boundary;

/// Row-major dense square matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }
}

#[derive(Clone, Copy)]
enum Pauli {
    X,
    Y,
    Z,
}

/// `σ^p_i σ^p_k` applied to the basis state `s`: returns (image, amplitude).
/// Bit value 1 is spin up, `σz|up⟩ = |up⟩`, `σy|up⟩ = i|down⟩`.
fn pauli_pair(s: usize, i: usize, k: usize, p: Pauli) -> (usize, f64) {
    let bit = |q: usize| (s >> q) & 1;
    match p {
        Pauli::Z => {
            let sign = |q| if bit(q) == 1 { 1.0 } else { -1.0 };
            (s, sign(i) * sign(k))
        }
        Pauli::X => (s ^ (1 << i) ^ (1 << k), 1.0),
        Pauli::Y => {
            // phase i for up->down, -i for down->up; product of two is real
            let phase = |q| if bit(q) == 1 { (0.0, 1.0) } else { (0.0, -1.0) };
            let (a, b): ((f64, f64), (f64, f64)) = (phase(i), phase(k));
            let re = a.0 * b.0 - a.1 * b.1;
            (s ^ (1 << i) ^ (1 << k), re)
        }
    }
}

fn pair_operator(l: usize, i: usize, k: usize, p: Pauli) -> Dense {
    let n = 1 << l;
    let mut m = Dense::zeros(n);
    for s in 0..n {
        let (t, amp) = pauli_pair(s, i, k, p);
        m.add(t, s, amp);
    }
    m
}

pub fn bonds(l: usize, bc: Boundary) -> Vec<(usize, usize)> {
    let mut b: Vec<_> = (0..l - 1).map(|j| (j, j + 1)).collect();
    if bc == Boundary::Periodic {
        b.push((l - 1, 0));
    }
    b
}

pub fn full_hamiltonian(l: usize, j: f64, delta: f64, bc: Boundary) -> Dense {
    let n = 1 << l;
    let mut h = Dense::zeros(n);
    for (p, q) in bonds(l, bc) {
        for (op, w) in [(Pauli::X, j), (Pauli::Y, j), (Pauli::Z, j * delta)] {
            let m = pair_operator(l, p, q, op);
            for (x, y) in h.a.iter_mut().zip(&m.a) {
                *x += w * y;
            }
        }
    }
    h
}

/// Full `σx_1 σx_2` (including the sector-changing part) and `σz_1 σz_2`.
pub fn full_bond_correlators(l: usize) -> (Dense, Dense) {
    (pair_operator(l, 0, 1, Pauli::X), pair_operator(l, 0, 1, Pauli::Z))
}

/// Cyclic Jacobi eigensolver; returns (eigenvalues, eigenvectors as columns,
/// row-major).
pub fn jacobi_eigen(m: &Dense) -> (Vec<f64>, Dense) {
    let n = m.n;
    let mut a = m.clone();
    let mut v = Dense::zeros(n);
    for i in 0..n {
        v.a[i * n + i] = 1.0;
    }
    let scale: f64 = a.a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.at(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a.a[k * n + p] = c * akp - s * akq;
                    a.a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a.a[p * n + k] = c * apk - s * aqk;
                    a.a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.a[k * n + p] = c * vkp - s * vkq;
                    v.a[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a.at(i, i)).collect(), v)
}

/// Thermal expectation values of `ops` with the full-space eigenbasis.
pub fn full_thermal_averages(h: &Dense, t: f64, ops: &[&Dense]) -> Vec<f64> {
    let (e, v) = jacobi_eigen(h);
    let n = h.n;
    let e_min = e.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = e.iter().map(|&x| (-(x - e_min) / t).exp()).collect();
    let z: f64 = w.iter().sum();
    ops.iter()
        .map(|op| {
            let mut acc = 0.0;
            for (col, &wc) in w.iter().enumerate() {
                if wc / z < 1e-300 {
                    continue;
                }
                let mut expect = 0.0;
                for r in 0..n {
                    let vr = v.at(r, col);
                    if vr == 0.0 {
                        continue;
                    }
                    let mut row = 0.0;
                    for c in 0..n {
                        row += op.at(r, c) * v.at(c, col);
                    }
                    expect += vr * row;
                }
                acc += wc * expect;
            }
            acc / z
        })
        .collect()
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}
