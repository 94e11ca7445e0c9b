//! Plane geometry: Möbius maps, the half-plane chart, polar grids and the
//! Becker disk.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Tolerance for exact algebraic identities (composition, inversion).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for geometric checks such as cross-ratio preservation.
pub const GEOMETRIC_TOL: f64 = 1e-9;

const POLE_EPS: f64 = 1e-300;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl Point {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Point::Infinity)
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Finite(z)
    }
}

/// `z ↦ (az + b)/(cz + d)` with `ad − bc ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Mobius {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm() * d.norm() + b.norm() * c.norm();
        if !(det.norm() > f64::EPSILON * scale) || !det.norm().is_finite() {
            return Err(Error::DegenerateMobius);
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mobius { a: one, b: zero, c: zero, d: one }
    }

    /// The disk automorphism `w ↦ (w − a)/(1 − āw)`.
    pub fn disk_automorphism(a: Complex64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::OutOfDisk { z: a });
        }
        Mobius::new(Complex64::new(1.0, 0.0), -a, -a.conj(), Complex64::new(1.0, 0.0))
    }

    /// The Cayley map `w ↦ (1 + w)/(1 − w)` from the disk onto the right half-plane.
    pub fn cayley() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Mobius { a: one, b: one, c: -one, d: one }
    }

    /// Coefficients `(a, b, c, d)`.
    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn eval(&self, p: Point) -> Point {
        match p {
            Point::Infinity => {
                if self.c.norm() < POLE_EPS {
                    Point::Infinity
                } else {
                    Point::Finite(self.a / self.c)
                }
            }
            Point::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() < POLE_EPS {
                    Point::Infinity
                } else {
                    Point::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Evaluate at a finite point that is known not to be the pole.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Mobius) -> Mobius {
        Mobius {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// The unique map sending `z[i]` to `w[i]`.
    pub fn from_three_points(z: [Complex64; 3], w: [Complex64; 3]) -> Result<Mobius> {
        let to_standard = |p: [Complex64; 3]| {
            // p0 ↦ 0, p1 ↦ 1, p2 ↦ ∞
            Mobius::new(p[1] - p[2], -p[0] * (p[1] - p[2]), p[1] - p[0], -p[2] * (p[1] - p[0]))
        };
        let a = to_standard(z)?;
        let b = to_standard(w)?;
        Ok(b.inverse().compose(&a))
    }

    /// `[f', f'', f''']` at `z`.
    pub fn derivatives(&self, z: Complex64) -> [Complex64; 3] {
        let det = self.determinant();
        let den = self.c * z + self.d;
        let d2 = den * den;
        let f1 = det / d2;
        let f2 = -2.0 * self.c * det / (d2 * den);
        let f3 = 6.0 * self.c * self.c * det / (d2 * d2);
        [f1, f2, f3]
    }
}

/// Cross-ratio `(z1 − z3)(z2 − z4) / ((z2 − z3)(z1 − z4))`.
pub fn cross_ratio(z1: Complex64, z2: Complex64, z3: Complex64, z4: Complex64) -> Point {
    let num = (z1 - z3) * (z2 - z4);
    let den = (z2 - z3) * (z1 - z4);
    if den.norm() < POLE_EPS {
        Point::Infinity
    } else {
        Point::Finite(num / den)
    }
}

/// The chart `H(z) = Re a · (1 + z)/(1 − z) + i Im a` taking the disk onto the
/// right half-plane with `H(0) = a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlaneChart {
    center: Complex64,
}

impl HalfPlaneChart {
    pub fn new(center: Complex64) -> Result<Self> {
        if !(center.re > 0.0) || !center.im.is_finite() {
            return Err(Error::ChartDegenerate { re: center.re });
        }
        Ok(HalfPlaneChart { center })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn forward(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        (one + z) / (one - z) * self.center.re + Complex64::new(0.0, self.center.im)
    }

    pub fn inverse(&self, w: Complex64) -> Complex64 {
        let u = (w - Complex64::new(0.0, self.center.im)) / self.center.re;
        (u - 1.0) / (u + 1.0)
    }

    pub fn forward_derivative(&self, z: Complex64) -> Complex64 {
        let one_minus = Complex64::new(1.0, 0.0) - z;
        Complex64::new(2.0 * self.center.re, 0.0) / (one_minus * one_minus)
    }

    pub fn inverse_derivative(&self, w: Complex64) -> Complex64 {
        let u = (w - Complex64::new(0.0, self.center.im)) / self.center.re;
        let up = u + 1.0;
        Complex64::new(2.0 / self.center.re, 0.0) / (up * up)
    }
}

/// Radii `ρ_0 < … < ρ_{m−1}` times `N` equispaced angles `θ_j = 2πj/N`.
/// Values on the grid are stored row-major, radius first.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PolarGrid {
    radii: Vec<f64>,
    angular_count: usize,
}

impl PolarGrid {
    pub fn new(radii: Vec<f64>, angular_count: usize) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidGrid("no radii"));
        }
        if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidGrid("radii must be finite and non-negative"));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("radii must be strictly increasing"));
        }
        if angular_count == 0 || !angular_count.is_power_of_two() {
            return Err(Error::InvalidGrid("angular count must be a power of two"));
        }
        Ok(PolarGrid { radii, angular_count })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.angular_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, j: usize) -> f64 {
        angle(j, self.angular_count)
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.radii[i], self.angle(j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.angular_count + j
    }

    /// All points in storage order.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.radii.len() {
            for j in 0..self.angular_count {
                out.push(self.point(i, j));
            }
        }
        out
    }
}

/// `2πj/n`.
pub fn angle(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// The closed disk `U(k) = {w : |w − 1| ≤ k|w + 1|}` in the right half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeckerDisk {
    k: f64,
}

impl BeckerDisk {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::InvalidParameter("k must lie in [0, 1)"));
        }
        Ok(BeckerDisk { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn contains(&self, w: Complex64) -> bool {
        (w - 1.0).norm() <= self.k * (w + 1.0).norm()
    }

    /// `|w − 1|/|w + 1| − k`; non-positive exactly on the disk.
    pub fn margin(&self, w: Complex64) -> f64 {
        (w - 1.0).norm() / (w + 1.0).norm() - self.k
    }

    /// Hyperbolic radius about 1: `½ log((1 + k)/(1 − k))`.
    pub fn hyperbolic_radius(&self) -> f64 {
        self.k.atanh()
    }

    /// Euclidean center and radius of the disk.
    pub fn euclidean(&self) -> (f64, f64) {
        let k2 = self.k * self.k;
        ((1.0 + k2) / (1.0 - k2), 2.0 * self.k / (1.0 - k2))
    }
}

/// Hyperbolic distance in the right half-plane, normalised so that the
/// distance from 1 to `w` is `artanh |(w − 1)/(w + 1)|`.
pub fn hyperbolic_distance_halfplane(w1: Complex64, w2: Complex64) -> Result<f64> {
    for w in [w1, w2] {
        if !(w.re > 0.0) {
            return Err(Error::OutOfHalfPlane { z: w });
        }
    }
    let ratio = (w1 - w2).norm() / (w1 + w2.conj()).norm();
    Ok(ratio.min(1.0).atanh())
}
