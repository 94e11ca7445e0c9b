use num_complex::Complex64;

use crate::geometry::Mobius;
use crate::{Error, Result};

/// A holomorphic function on the unit disk.
pub trait Holomorphic {
    fn value(&self, z: Complex64) -> Result<Complex64>;

    /// `[f', f'', f''']` when known in closed form.
    fn derivatives(&self, _z: Complex64) -> Option<[Complex64; 3]> {
        None
    }
}

impl<T: Holomorphic + ?Sized> Holomorphic for &T {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        (**self).value(z)
    }

    fn derivatives(&self, z: Complex64) -> Option<[Complex64; 3]> {
        (**self).derivatives(z)
    }
}

impl Holomorphic for Mobius {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.apply(z))
    }

    fn derivatives(&self, z: Complex64) -> Option<[Complex64; 3]> {
        Some(Mobius::derivatives(self, z))
    }
}

/// Wraps a closure; derivatives come from differences.
pub struct FnMap<F>(pub F);

impl<F: Fn(Complex64) -> Result<Complex64>> Holomorphic for FnMap<F> {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        (self.0)(z)
    }
}

/// `[f', f'', f''']` from six-point central differences along the real
/// direction; `h` shrinks near the unit circle.
fn difference_derivatives<F: Holomorphic + ?Sized>(f: &F, z: Complex64, h: f64) -> Result<[Complex64; 3]> {
    let h = h.min((1.0 - z.norm()) / 4.0);
    if !(h > 0.0) {
        return Err(Error::OutOfDisk { z });
    }
    let at = |m: f64| f.value(z + m * h);
    let (m3, m2, m1, p1, p2, p3) = (at(-3.0)?, at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?, at(3.0)?);
    let f0 = at(0.0)?;
    let d1 = ((p1 - m1) * 45.0 - (p2 - m2) * 9.0 + (p3 - m3)) / (60.0 * h);
    let d2 = ((p3 + m3) * 2.0 - (p2 + m2) * 27.0 + (p1 + m1) * 270.0 - f0 * 490.0) / (180.0 * h * h);
    let d3 = (-(p3 - m3) + (p2 - m2) * 8.0 - (p1 - m1) * 13.0) / (8.0 * h * h * h);
    Ok([d1, d2, d3])
}

/// `S_f = f'''/f' − (3/2)(f''/f')²` at `z`. `h` is the difference step used
/// when `f` has no closed-form derivatives.
pub fn schwarzian<F: Holomorphic + ?Sized>(f: &F, z: Complex64, h: f64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutOfDisk { z });
    }
    let [d1, d2, d3] = match f.derivatives(z) {
        Some(d) => d,
        None => difference_derivatives(f, z, h)?,
    };
    if d1.norm() < 1e-12 {
        return Err(Error::DerivativeDegenerate { z });
    }
    let r = d2 / d1;
    Ok(d3 / d1 - 1.5 * r * r)
}

/// `sup (1 − |z|²)² |S_f(z)|` over the points, with the maximising point.
pub fn schwarzian_norm<F: Holomorphic + ?Sized>(f: &F, points: &[Complex64], h: f64) -> Result<(f64, Complex64)> {
    let mut best = (0.0, Complex64::new(0.0, 0.0));
    for &z in points {
        let w = 1.0 - z.norm_sqr();
        let v = w * w * schwarzian(f, z, h)?.norm();
        if v > best.0 {
            best = (v, z);
        }
    }
    Ok(best)
}

/// The Schwarzian norm against the bounds for `k`-quasiconformally
/// extendible maps.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchwarzianReport {
    pub norm: f64,
    pub argmax: Complex64,
    pub k: f64,
    /// `6k`: every `k`-q.c. extendible map has norm at most this.
    pub necessary_bound: f64,
    pub necessary_ok: bool,
    /// Smallest `k'` with `norm ≤ 2k'`.
    pub k_prime: f64,
    /// `norm ≤ 2k'` with `k' < 1` guarantees a `k'`-q.c. extension.
    pub sufficient: bool,
}

pub fn schwarzian_report<F: Holomorphic + ?Sized>(f: &F, points: &[Complex64], k: f64, h: f64) -> Result<SchwarzianReport> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidParameter("k must lie in [0, 1)"));
    }
    let (norm, argmax) = schwarzian_norm(f, points, h)?;
    let necessary_bound = 6.0 * k;
    let k_prime = norm / 2.0;
    Ok(SchwarzianReport {
        norm,
        argmax,
        k,
        necessary_bound,
        necessary_ok: norm <= necessary_bound * (1.0 + 1e-9),
        k_prime,
        sufficient: k_prime < 1.0,
    })
}
