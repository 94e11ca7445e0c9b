//! Wirtinger derivatives, Beltrami coefficients, the closed-form map catalog
//! and Schwarzian diagnostics.

mod catalog;
mod sampler;
mod schwarzian;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::geometry::angle;
use crate::{Error, Result};

pub use catalog::ClosedFormMap;
pub use sampler::{GridSampler, PolarInterpolant};
pub use schwarzian::{schwarzian, schwarzian_norm, schwarzian_report, FnMap, Holomorphic, SchwarzianReport};

/// A map of the plane sampled pointwise.
pub trait PlanarMap {
    fn eval(&self, z: Complex64) -> Result<Complex64>;

    /// Circle across which the map may fail to be smooth. Difference
    /// stencils never straddle it.
    fn seam_radius(&self) -> Option<f64> {
        Some(1.0)
    }

    /// `(F_x, F_y)` when the sampler knows them exactly; otherwise
    /// difference stencils are used.
    fn partials(&self, _z: Complex64) -> Option<Result<(Complex64, Complex64)>> {
        None
    }

    /// Error bound on `μ` inherited from the sampler itself.
    fn mu_error_estimate(&self) -> f64 {
        0.0
    }
}

impl<T: PlanarMap + ?Sized> PlanarMap for &T {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        (**self).eval(z)
    }

    fn seam_radius(&self) -> Option<f64> {
        (**self).seam_radius()
    }

    fn partials(&self, z: Complex64) -> Option<Result<(Complex64, Complex64)>> {
        (**self).partials(z)
    }

    fn mu_error_estimate(&self) -> f64 {
        (**self).mu_error_estimate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StencilOrder {
    Second,
    Fourth,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WirtingerSettings {
    pub h: f64,
    pub order: StencilOrder,
}

impl Default for WirtingerSettings {
    fn default() -> Self {
        WirtingerSettings { h: 1e-5, order: StencilOrder::Fourth }
    }
}

fn partial<F: PlanarMap + ?Sized>(f: &F, z: Complex64, dir: Complex64, settings: &WirtingerSettings) -> Result<Complex64> {
    let h = settings.h;
    let side = |w: Complex64| f.seam_radius().map(|r| w.norm() >= r);
    let here = side(z);
    let same = |offsets: &[f64]| offsets.iter().all(|m| side(z + dir * (m * h)) == here);
    let at = |m: f64| f.eval(z + dir * (m * h));
    match settings.order {
        StencilOrder::Fourth => {
            if same(&[-2.0, -1.0, 1.0, 2.0]) {
                return Ok((at(-2.0)? - at(2.0)? + 8.0 * (at(1.0)? - at(-1.0)?)) / (12.0 * h));
            }
            for sign in [1.0, -1.0] {
                if same(&[sign, 2.0 * sign, 3.0 * sign, 4.0 * sign]) {
                    let v = -25.0 * at(0.0)? + 48.0 * at(sign)? - 36.0 * at(2.0 * sign)? + 16.0 * at(3.0 * sign)?
                        - 3.0 * at(4.0 * sign)?;
                    return Ok(v / (12.0 * h * sign));
                }
            }
        }
        StencilOrder::Second => {
            if same(&[-1.0, 1.0]) {
                return Ok((at(1.0)? - at(-1.0)?) / (2.0 * h));
            }
            for sign in [1.0, -1.0] {
                if same(&[sign, 2.0 * sign]) {
                    return Ok((-3.0 * at(0.0)? + 4.0 * at(sign)? - at(2.0 * sign)?) / (2.0 * h * sign));
                }
            }
        }
    }
    Err(Error::InvalidParameter("difference stencil cannot avoid the seam"))
}

/// `(∂F, ∂̄F)` at `z` by finite differences.
pub fn wirtinger<F: PlanarMap + ?Sized>(f: &F, z: Complex64, settings: &WirtingerSettings) -> Result<(Complex64, Complex64)> {
    let (fx, fy) = match f.partials(z) {
        Some(p) => p?,
        None => (
            partial(f, z, Complex64::new(1.0, 0.0), settings)?,
            partial(f, z, Complex64::new(0.0, 1.0), settings)?,
        ),
    };
    let i = Complex64::i();
    Ok(((fx - i * fy) * 0.5, (fx + i * fy) * 0.5))
}

/// `μ = ∂̄F/∂F` at `z`; fails where `|∂F| ≤ |∂̄F|`.
pub fn beltrami_at<F: PlanarMap + ?Sized>(f: &F, z: Complex64, settings: &WirtingerSettings) -> Result<Complex64> {
    let (d, db) = wirtinger(f, z, settings)?;
    if !(d.norm() > db.norm()) {
        return Err(Error::DegenerateJacobian { z });
    }
    Ok(db / d)
}

/// Where a Beltrami field came from; sets the default classifier tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum MuSource {
    /// Values from an exact formula.
    ClosedForm,
    /// Values from differences or interpolation, with an error estimate.
    Numerical { error_estimate: f64 },
}

/// `μ` on one circle `|z| = ρ` at the angles `2πj/N`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BeltramiCircle {
    pub rho: f64,
    pub trace: Vec<Complex64>,
}

/// Traces of `μ` on concentric circles.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BeltramiField {
    circles: Vec<BeltramiCircle>,
    angular_count: usize,
    max_dilatation: f64,
    source: MuSource,
}

impl BeltramiField {
    /// Validates the traces: equal power-of-two lengths, distinct positive
    /// radii, and `|μ| < 1` everywhere.
    pub fn from_circles(mut circles: Vec<BeltramiCircle>, source: MuSource) -> Result<Self> {
        if circles.is_empty() {
            return Err(Error::InvalidGrid("no circles"));
        }
        let n = circles[0].trace.len();
        if n == 0 || !n.is_power_of_two() || circles.iter().any(|c| c.trace.len() != n) {
            return Err(Error::InvalidGrid("traces must share a power-of-two length"));
        }
        if circles.iter().any(|c| !(c.rho > 0.0) || !c.rho.is_finite()) {
            return Err(Error::InvalidGrid("circle radii must be positive"));
        }
        circles.sort_by(|a, b| a.rho.total_cmp(&b.rho));
        if circles.windows(2).any(|w| w[0].rho == w[1].rho) {
            return Err(Error::InvalidGrid("circle radii must be distinct"));
        }
        let mut max_dilatation: f64 = 0.0;
        for c in &circles {
            let m = c.trace.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if !(m < 1.0) {
                return Err(Error::NotQuasiconformal { rho: c.rho, modulus: m });
            }
            max_dilatation = max_dilatation.max(m);
        }
        Ok(BeltramiField { circles, angular_count: n, max_dilatation, source })
    }

    pub fn circles(&self) -> &[BeltramiCircle] {
        &self.circles
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    /// `sup |μ|` over the samples.
    pub fn max_dilatation(&self) -> f64 {
        self.max_dilatation
    }

    /// Every sample had `|∂F| > |∂̄F|`; guaranteed by construction.
    pub fn jacobian_sign_ok(&self) -> bool {
        self.max_dilatation < 1.0
    }

    pub fn source(&self) -> MuSource {
        self.source
    }
}

/// `μ` of `f` on one circle.
pub fn beltrami_circle<F: PlanarMap + ?Sized>(
    f: &F,
    rho: f64,
    angular_count: usize,
    settings: &WirtingerSettings,
) -> Result<BeltramiCircle> {
    let trace = (0..angular_count)
        .map(|j| beltrami_at(f, Complex64::from_polar(rho, angle(j, angular_count)), settings))
        .collect::<Result<Vec<_>>>()?;
    Ok(BeltramiCircle { rho, trace })
}

/// `μ` of `f` on the circles `|z| = ρ` at `N` angles each.
///
/// The error estimate attached to the result is the difference between the
/// fourth- and second-order stencils (plus any estimate the sampler reports).
pub fn beltrami_field<F: PlanarMap + ?Sized>(
    f: &F,
    radii: &[f64],
    angular_count: usize,
    settings: &WirtingerSettings,
) -> Result<BeltramiField> {
    if angular_count == 0 || !angular_count.is_power_of_two() {
        return Err(Error::InvalidGrid("angular count must be a power of two"));
    }
    let circles = radii
        .iter()
        .map(|r| beltrami_circle(f, *r, angular_count, settings))
        .collect::<Result<Vec<_>>>()?;
    let coarse = WirtingerSettings { order: StencilOrder::Second, ..*settings };
    let mut estimate = f.mu_error_estimate();
    for c in &circles {
        for j in (0..angular_count).step_by((angular_count / 16).max(1)) {
            let z = Complex64::from_polar(c.rho, angle(j, angular_count));
            let other = beltrami_at(f, z, &coarse)?;
            estimate = estimate.max((other - c.trace[j]).norm());
        }
    }
    BeltramiField::from_circles(circles, MuSource::Numerical { error_estimate: estimate })
}

/// `μ` from a closed formula on the circles.
pub fn beltrami_from_formula<M>(mu: M, radii: &[f64], angular_count: usize) -> Result<BeltramiField>
where
    M: Fn(Complex64) -> Complex64,
{
    let circles = radii
        .iter()
        .map(|&rho| BeltramiCircle {
            rho,
            trace: (0..angular_count).map(|j| mu(Complex64::from_polar(rho, angle(j, angular_count)))).collect(),
        })
        .collect();
    BeltramiField::from_circles(circles, MuSource::ClosedForm)
}
