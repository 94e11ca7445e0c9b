use num_complex::Complex64;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use super::schwarzian::Holomorphic;
use super::PlanarMap;
use crate::herglotz::HerglotzSpec;
use crate::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Closed-form univalent maps with explicit quasiconformal extensions.
///
/// * `Power { k, n }`: `f_n(z) = z/(1 − kzⁿ)^{2/n}`, extended by
///   `F(ρζ) = ρ f_n(ζ)`; `n = 1` and `n = 2` are `f1` and `f2`.
/// * `Sigma { sigma }`: `f_σ = σ⁻¹ H⁻¹(H(z)^σ)` with `H(z) = (1 + z)/(1 − z)`,
///   extended through the strip map `W = σ Re w + i(2 − σ) Im w`,
///   `w = log(−H(z))`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "kebab-case"))]
pub enum ClosedFormMap {
    Power { k: f64, n: u32 },
    Sigma { sigma: f64 },
}

impl ClosedFormMap {
    /// Looks up `f1`, `f2`, `fn` or `fsigma`. `param` is `k` (or `σ`); `n`
    /// is only read for `fn`.
    pub fn oracle(name: &str, param: f64, n: u32) -> Result<Self> {
        match name {
            "f1" => Self::power(param, 1),
            "f2" => Self::power(param, 2),
            "fn" => Self::power(param, n),
            "fsigma" => Self::sigma(param),
            _ => Err(Error::InvalidParameter("unknown catalog map")),
        }
    }

    pub fn power(k: f64, n: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::InvalidParameter("k must lie in [0, 1)"));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be a positive integer"));
        }
        Ok(ClosedFormMap::Power { k, n })
    }

    pub fn sigma(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 2.0) {
            return Err(Error::InvalidParameter("sigma must lie in (0, 2)"));
        }
        Ok(ClosedFormMap::Sigma { sigma })
    }

    /// The map on the closed unit disk.
    pub fn interior(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedFormMap::Power { k, n } => {
                let u = ONE - k * z.powi(n as i32);
                if n == 1 {
                    z / (u * u)
                } else {
                    z / (u.ln() * (2.0 / n as f64)).exp()
                }
            }
            ClosedFormMap::Sigma { sigma } => {
                if (z - ONE).norm() < 1e-300 {
                    return Complex64::new(1.0 / sigma, 0.0);
                }
                if (z + ONE).norm() < 1e-300 {
                    return Complex64::new(-1.0 / sigma, 0.0);
                }
                let h = (ONE + z) / (ONE - z);
                // H⁻¹(h^σ) = (1 − h^{−σ})/(1 + h^{−σ}); use whichever power is small.
                if h.norm() <= 1.0 {
                    let g = h.powf(sigma);
                    (g - ONE) / (g + ONE) / sigma
                } else {
                    let g = h.inv().powf(sigma);
                    (ONE - g) / (ONE + g) / sigma
                }
            }
        }
    }

    /// The extension on `|z| ≥ 1`.
    pub fn exterior(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedFormMap::Power { .. } => {
                let r = z.norm();
                self.interior(z / r) * r
            }
            ClosedFormMap::Sigma { sigma } => {
                if (z - ONE).norm() < 1e-300 {
                    return Complex64::new(1.0 / sigma, 0.0);
                }
                if (z + ONE).norm() < 1e-300 {
                    return Complex64::new(-1.0 / sigma, 0.0);
                }
                // log(−H(z)) = −log((z − 1)/(z + 1)); the argument has Re ≥ 0 for |z| ≥ 1.
                let w = -((z - ONE) / (z + ONE)).ln();
                let big_w = Complex64::new(sigma * w.re, (2.0 - sigma) * w.im);
                // H⁻¹(−e^W) = (e^W + 1)/(e^W − 1).
                if big_w.re > 0.0 {
                    let e = (-big_w).exp();
                    (ONE + e) / (ONE - e) / sigma
                } else {
                    let e = big_w.exp();
                    (e + ONE) / (e - ONE) / sigma
                }
            }
        }
    }

    /// Closed-form Beltrami coefficient of the extension at `|z| > 1`.
    pub fn mu(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedFormMap::Power { k, n } => {
                let zeta = z / z.norm();
                -k * zeta.powi(n as i32 + 2)
            }
            ClosedFormMap::Sigma { sigma } => {
                let zc = z.conj();
                (z * z - ONE) / (zc * zc - ONE) * (sigma - 1.0)
            }
        }
    }

    /// Upper bound of `|μ|`.
    pub fn dilatation_bound(&self) -> f64 {
        match *self {
            ClosedFormMap::Power { k, .. } => k,
            ClosedFormMap::Sigma { sigma } => (sigma - 1.0).abs(),
        }
    }

    /// `f_t(z) = e^t f(z)` when the map is the initial element of a known radial chain.
    pub fn chain(&self, t: f64, z: Complex64) -> Option<Complex64> {
        match self {
            ClosedFormMap::Power { .. } => Some(self.interior(z) * t.exp()),
            ClosedFormMap::Sigma { .. } => None,
        }
    }

    /// The Herglotz function of [`ClosedFormMap::chain`].
    pub fn herglotz(&self) -> Option<HerglotzSpec> {
        match *self {
            ClosedFormMap::Power { k, n } => HerglotzSpec::power(k, n).ok(),
            ClosedFormMap::Sigma { .. } => None,
        }
    }
}

impl PlanarMap for ClosedFormMap {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(if z.norm() < 1.0 { self.interior(z) } else { self.exterior(z) })
    }
}

impl Holomorphic for ClosedFormMap {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::OutOfDisk { z });
        }
        Ok(self.interior(z))
    }

    fn derivatives(&self, z: Complex64) -> Option<[Complex64; 3]> {
        match *self {
            ClosedFormMap::Power { k, n: 1 } => {
                let u = ONE - k * z;
                let u3 = u * u * u;
                Some([
                    (ONE + k * z) / u3,
                    k * (4.0 + 2.0 * k * z) / (u3 * u),
                    k * k * (18.0 + 6.0 * k * z) / (u3 * u * u),
                ])
            }
            _ => None,
        }
    }
}
