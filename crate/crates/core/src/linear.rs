//! The complex side of the class-J family.
//!
//! With `p = e^{ix}`, `τ = e^{it}` the torus equation becomes the Riccati
//! equation
//!
//! ```text
//! dp/dτ = τ⁻² ( ν(1 − p²)·iτ/2 + (aτ + is(1 − τ²)/2)·p )
//! ```
//!
//! which is the projectivization `p = z₂/z₁` of the linear system
//! `dz/dτ = A(τ)/τ² · z` with
//!
//! ```text
//! A(τ) = [[0, iντ/2], [iντ/2, is(1 − τ²)/2 + aτ]].
//! ```
//!
//! The monodromy of the linear system around τ = 0 acts on the unit circle
//! `|p| = 1` as the period map of the torus flow.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::Result;
use crate::ode::{integrate_path, IntegratorConfig, Path};
use crate::torus::Params;

pub type Mat2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity() -> Mat2 {
    [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]
}

pub fn det(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Max-row-sum norm of `x − y`.
pub fn inf_norm_diff(x: &Mat2, y: &Mat2) -> f64 {
    (0..2)
        .map(|i| (x[i][0] - y[i][0]).norm() + (x[i][1] - y[i][1]).norm())
        .fold(0.0, f64::max)
}

/// The linear system `dz/dτ = A(τ)/τ² · z` for one parameter triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem {
    pub params: Params,
}

impl LinearSystem {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    /// `A(τ)`, holomorphic in τ.
    pub fn numerator(&self, tau: Complex64) -> Mat2 {
        let Params { nu, a, s } = self.params;
        let off = I * nu * tau / 2.0;
        let diag = I * s / 2.0 * (c(1.0) - tau * tau) + a * tau;
        [[c(0.0), off], [off, diag]]
    }

    /// `A(τ)/τ²`; τ must be nonzero.
    pub fn coefficient(&self, tau: Complex64) -> Mat2 {
        let inv = (tau * tau).inv();
        let m = self.numerator(tau);
        [
            [m[0][0] * inv, m[0][1] * inv],
            [m[1][0] * inv, m[1][1] * inv],
        ]
    }

    /// `is/(2τ²) − is/2 + a/τ`, the closed form of `tr(A(τ)/τ²)`.
    pub fn trace_closed_form(&self, tau: Complex64) -> Complex64 {
        let Params { a, s, .. } = self.params;
        I * s / (2.0 * tau * tau) - I * s / 2.0 + a / tau
    }

    /// Writes `dz/dτ` for a stack of column vectors stored as
    /// `[z₁⁽¹⁾, z₂⁽¹⁾, z₁⁽²⁾, z₂⁽²⁾, …]`.
    pub fn apply(&self, tau: Complex64, z: &[Complex64], dz: &mut [Complex64]) {
        let inv = (tau * tau).inv();
        let m = self.numerator(tau);
        for (col, out) in z.chunks_exact(2).zip(dz.chunks_exact_mut(2)) {
            out[0] = (m[0][0] * col[0] + m[0][1] * col[1]) * inv;
            out[1] = (m[1][0] * col[0] + m[1][1] * col[1]) * inv;
        }
    }
}

/// Right-hand side of the Riccati equation at `(τ, p)`, τ ≠ 0.
pub fn riccati_rhs(params: &Params, tau: Complex64, p: Complex64) -> Complex64 {
    let Params { nu, a, s } = *params;
    (nu * (c(1.0) - p * p) * I * tau / 2.0 + (a * tau + I * s * (c(1.0) - tau * tau) / 2.0) * p)
        / (tau * tau)
}

/// Monodromy of the linear system once counterclockwise around τ = 0, based at τ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    pub matrix: Mat2,
    pub base_point: Complex64,
    pub integration_error: f64,
    /// `max(|m₁₂|, |m₂₁|, |M₁₁/M₂₂ − 1|)` with `m = M / max(|M₁₁|, |M₂₂|)`;
    /// zero exactly when `M` is a scalar matrix.
    pub projective_deviation: f64,
}

impl Monodromy {
    pub fn det(&self) -> Complex64 {
        det(&self.matrix)
    }

    /// `|det M − e^{2πia}|` (Liouville's formula).
    pub fn det_deviation(&self, a: f64) -> f64 {
        (self.det() - Complex64::from_polar(1.0, TAU * a)).norm()
    }

    pub fn distance_to_identity(&self) -> f64 {
        inf_norm_diff(&self.matrix, &identity())
    }

    /// Trace of `M/√det M`; real for real parameters. The period map is
    /// elliptic (no fixed points) iff its modulus is below 2.
    pub fn normalized_trace(&self) -> Complex64 {
        let m = &self.matrix;
        (m[0][0] + m[1][1]) / self.det().sqrt()
    }
}

pub fn projective_deviation(m: &Mat2) -> f64 {
    let scale = m[0][0].norm().max(m[1][1].norm());
    if scale == 0.0 {
        return f64::INFINITY;
    }
    let off = (m[0][1].norm() / scale).max(m[1][0].norm() / scale);
    let ratio = if m[1][1].norm() == 0.0 {
        f64::INFINITY
    } else {
        (m[0][0] / m[1][1] - 1.0).norm()
    };
    off.max(ratio)
}

/// Integrates the fundamental matrix from the identity at τ = 1 around `|τ| = 1`.
pub fn monodromy(params: &Params, cfg: &IntegratorConfig) -> Result<Monodromy> {
    let sys = LinearSystem::new(*params)?;
    let f = |tau: Complex64, z: &[Complex64], dz: &mut [Complex64]| sys.apply(tau, z, dz);
    // columns (1, 0) and (0, 1)
    let z0 = [c(1.0), c(0.0), c(0.0), c(1.0)];
    let sol = integrate_path(&f, Path::loop_around_origin(1.0), &z0, cfg)?;
    let z = &sol.state;
    let matrix = [[z[0], z[2]], [z[1], z[3]]];
    Ok(Monodromy {
        matrix,
        base_point: c(1.0),
        integration_error: sol.error_estimate,
        projective_deviation: projective_deviation(&matrix),
    })
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProjPoint {
    Finite(Complex64),
    Infinity,
}

impl ProjPoint {
    pub fn from_homogeneous(z1: Complex64, z2: Complex64) -> Self {
        if z1 == c(0.0) {
            ProjPoint::Infinity
        } else {
            ProjPoint::Finite(z2 / z1)
        }
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            ProjPoint::Finite(p) => Some(p),
            ProjPoint::Infinity => None,
        }
    }

    /// Chordal distance on the Riemann sphere (bounded by 1).
    pub fn chordal_distance(self, other: ProjPoint) -> f64 {
        match (self, other) {
            (ProjPoint::Infinity, ProjPoint::Infinity) => 0.0,
            (ProjPoint::Finite(p), ProjPoint::Infinity)
            | (ProjPoint::Infinity, ProjPoint::Finite(p)) => 1.0 / (1.0 + p.norm_sqr()).sqrt(),
            (ProjPoint::Finite(p), ProjPoint::Finite(q)) => {
                (p - q).norm() / ((1.0 + p.norm_sqr()) * (1.0 + q.norm_sqr())).sqrt()
            }
        }
    }
}

/// Action of `M` on `p = z₂/z₁`: `p ↦ (M₂₁ + M₂₂p)/(M₁₁ + M₁₂p)`.
pub fn mobius_apply(m: &Mat2, p: ProjPoint) -> ProjPoint {
    let (z1, z2) = match p {
        ProjPoint::Finite(p) => (m[0][0] + m[0][1] * p, m[1][0] + m[1][1] * p),
        ProjPoint::Infinity => (m[0][1], m[1][1]),
    };
    ProjPoint::from_homogeneous(z1, z2)
}
