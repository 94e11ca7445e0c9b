use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use super::PlanarMap;
use crate::becker::QCExtensionGrid;
use crate::{Error, Result};

/// Slopes of the samples at every node, in `(u, θ)` with `u = log ρ`.
#[derive(Clone, Debug)]
struct Slopes {
    du: Vec<Complex64>,
    dt: Vec<Complex64>,
    dut: Vec<Complex64>,
}

/// Bicubic Hermite interpolation of samples on `ρ_i e^{2πij/N}` in the
/// coordinates `(log ρ, θ)`, periodic in `θ`.
///
/// Node slopes come from 5-point Lagrange differences in `log ρ` and
/// 4th-order periodic differences in `θ`.
#[derive(Clone, Debug)]
pub struct PolarInterpolant {
    u: Vec<f64>,
    radii: Vec<f64>,
    n: usize,
    values: Vec<Complex64>,
    slopes: Slopes,
    value_error: f64,
    mu_error: f64,
}

impl PolarInterpolant {
    pub fn new(radii: Vec<f64>, angular_count: usize, values: Vec<Complex64>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::InvalidGrid("interpolation needs at least two radii"));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) || radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("radii must be positive and strictly increasing"));
        }
        if angular_count < 16 {
            return Err(Error::InvalidGrid("interpolation needs at least 16 angles"));
        }
        if values.len() != radii.len() * angular_count {
            return Err(Error::InvalidGrid("value count does not match the grid"));
        }
        let mut out = Self::build(radii, angular_count, values);
        out.estimate_errors();
        Ok(out)
    }

    fn build(radii: Vec<f64>, n: usize, values: Vec<Complex64>) -> Self {
        let u: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let slopes = slopes(&u, n, &values, 5);
        PolarInterpolant { u, radii, n, values, slopes, value_error: 0.0, mu_error: 0.0 }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        r >= self.radii[0] * (1.0 - 1e-12) && r <= self.radii[self.radii.len() - 1] * (1.0 + 1e-12)
    }

    /// Estimated interpolation error of the values.
    pub fn value_error_estimate(&self) -> f64 {
        self.value_error
    }

    /// Estimated error of `μ = ∂̄F/∂F` computed from the interpolant.
    pub fn mu_error_estimate(&self) -> f64 {
        self.mu_error
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.patch(z, &self.slopes)?.0)
    }

    /// `(F, ∂F, ∂̄F)` of the interpolant at `z`.
    pub fn wirtinger(&self, z: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let (f, fu, ft) = self.patch(z, &self.slopes)?;
        Ok((f, d_holo(z, fu, ft), d_anti(z, fu, ft)))
    }

    /// Each direction is estimated by dropping every other node in it and
    /// comparing at the dropped nodes; the patch error is cubic in the
    /// spacing, so the gap is about 7 times the error of the full
    /// interpolant. With fewer than five radii the radial term compares
    /// against 3-point slopes instead.
    fn estimate_errors(&mut self) {
        let n = self.n;
        let m = self.radii.len();
        let mut value_error: f64 = 0.0;
        let mut mu_error: f64 = 0.0;

        let coarse_theta = Self::build(
            self.radii.clone(),
            n / 2,
            (0..m).flat_map(|i| (0..n).step_by(2).map(move |j| (i, j))).map(|(i, j)| self.values[i * n + j]).collect(),
        );
        let (v, e) = self.gap(&coarse_theta, (0..m).flat_map(|i| (1..n).step_by(2).map(move |j| (i, j))));
        value_error += v / 7.0;
        mu_error += e / 7.0;

        if m >= 5 {
            let keep: Vec<usize> = (0..m).filter(|i| i % 2 == 0 || *i == m - 1).collect();
            let coarse_u = Self::build(
                keep.iter().map(|i| self.radii[*i]).collect(),
                n,
                keep.iter().flat_map(|i| self.values[i * n..(i + 1) * n].iter().copied()).collect(),
            );
            let dropped: Vec<usize> = (0..m).filter(|i| !keep.contains(i)).collect();
            let (v, e) = self.gap(&coarse_u, dropped.iter().flat_map(|i| (0..n).map(move |j| (*i, j))));
            value_error += v / 7.0;
            mu_error += e / 7.0;
        } else {
            let low = Self { slopes: slopes(&self.u, n, &self.values, 3), ..self.clone() };
            let centres = (0..m - 1).flat_map(|i| (0..n).map(move |j| (i, j)));
            let (v, e) = self.gap_at_centres(&low, centres);
            value_error += v;
            mu_error += e;
        }
        self.value_error = value_error;
        self.mu_error = mu_error;
    }

    /// Largest value and `μ` differences against `other` at nodes `(i, j)`.
    fn gap(&self, other: &PolarInterpolant, nodes: impl Iterator<Item = (usize, usize)>) -> (f64, f64) {
        let points = nodes.map(|(i, j)| Complex64::from_polar(self.radii[i], 2.0 * PI * j as f64 / self.n as f64));
        self.gap_at(other, points)
    }

    /// Same at the cell centres right of `(i, j)`.
    fn gap_at_centres(&self, other: &PolarInterpolant, cells: impl Iterator<Item = (usize, usize)>) -> (f64, f64) {
        let points = cells.map(|(i, j)| {
            let r = ((self.u[i] + self.u[i + 1]) * 0.5).exp();
            Complex64::from_polar(r, PI * (2 * j + 1) as f64 / self.n as f64)
        });
        self.gap_at(other, points)
    }

    fn gap_at(&self, other: &PolarInterpolant, points: impl Iterator<Item = Complex64>) -> (f64, f64) {
        let mut value_gap: f64 = 0.0;
        let mut mu_gap: f64 = 0.0;
        for z in points {
            let (Ok(a), Ok(b)) = (self.patch(z, &self.slopes), other.patch(z, &other.slopes)) else { continue };
            value_gap = value_gap.max((a.0 - b.0).norm());
            let (da, dba) = (d_holo(z, a.1, a.2), d_anti(z, a.1, a.2));
            let (db, dbb) = (d_holo(z, b.1, b.2), d_anti(z, b.1, b.2));
            if da.norm() > 1e-300 && db.norm() > 1e-300 {
                mu_gap = mu_gap.max((dba / da - dbb / db).norm());
            }
        }
        (value_gap, mu_gap)
    }

    /// Value and `(u, θ)` partials of the Hermite patch containing `z`.
    fn patch(&self, z: Complex64, s: &Slopes) -> Result<(Complex64, Complex64, Complex64)> {
        if !self.contains(z) {
            return Err(Error::OutsideSamples { z });
        }
        let u = z.norm().ln().clamp(self.u[0], self.u[self.u.len() - 1]);
        let i = match self.u.iter().position(|x| *x > u) {
            Some(0) => 0,
            Some(p) => p - 1,
            None => self.u.len() - 2,
        };
        let hu = self.u[i + 1] - self.u[i];
        let a = ((u - self.u[i]) / hu).clamp(0.0, 1.0);

        let n = self.n;
        let ht = 2.0 * PI / n as f64;
        let mut theta = z.im.atan2(z.re);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        let jf = (theta / ht).floor();
        let b = (theta / ht - jf).clamp(0.0, 1.0);
        let j = (jf as usize) % n;

        let (pa, qa) = hermite(a);
        let (pb, qb) = hermite(b);
        let mut f = Complex64::new(0.0, 0.0);
        let mut fu = f;
        let mut ft = f;
        for (ci, row) in [i, i + 1].into_iter().enumerate() {
            for (cj, col) in [j, (j + 1) % n].into_iter().enumerate() {
                let k = row * n + col;
                // Basis functions and their derivatives at this corner.
                let (h0a, h1a) = (pa[ci].0, pa[ci].1 * hu);
                let (h0a_d, h1a_d) = (qa[ci].0 / hu, qa[ci].1);
                let (h0b, h1b) = (pb[cj].0, pb[cj].1 * ht);
                let (h0b_d, h1b_d) = (qb[cj].0 / ht, qb[cj].1);
                let terms = [
                    (self.values[k], h0a, h0b, h0a_d, h0b_d),
                    (s.du[k], h1a, h0b, h1a_d, h0b_d),
                    (s.dt[k], h0a, h1b, h0a_d, h1b_d),
                    (s.dut[k], h1a, h1b, h1a_d, h1b_d),
                ];
                for (c, wa, wb, wa_d, wb_d) in terms {
                    f += c * (wa * wb);
                    fu += c * (wa_d * wb);
                    ft += c * (wa * wb_d);
                }
            }
        }
        Ok((f, fu, ft))
    }
}

type Basis = [(f64, f64); 2];

/// Cubic Hermite basis at `s ∈ [0, 1]`: per corner the value and slope
/// functions, then their derivatives in `s`.
fn hermite(s: f64) -> (Basis, Basis) {
    let s2 = s * s;
    let s3 = s2 * s;
    let values = [(2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s), (-2.0 * s3 + 3.0 * s2, s3 - s2)];
    let derivs = [(6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0), (-6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s)];
    (values, derivs)
}

fn d_holo(z: Complex64, fu: Complex64, ft: Complex64) -> Complex64 {
    (fu - Complex64::i() * ft) / (2.0 * z)
}

fn d_anti(z: Complex64, fu: Complex64, ft: Complex64) -> Complex64 {
    (fu + Complex64::i() * ft) / (2.0 * z.conj())
}

fn slopes(u: &[f64], n: usize, values: &[Complex64], points: usize) -> Slopes {
    let m = u.len();
    let du_of = |col: &dyn Fn(usize) -> Complex64, i: usize| {
        let (start, w) = lagrange_slope_weights(u, i, points);
        w.iter().enumerate().map(|(q, wq)| col(start + q) * *wq).sum::<Complex64>()
    };
    let dt_of = |row: &dyn Fn(usize) -> Complex64, j: usize| {
        let h = 2.0 * PI / n as f64;
        let at = |o: isize| row(((j as isize + o).rem_euclid(n as isize)) as usize);
        (at(-2) - at(2) + (at(1) - at(-1)) * 8.0) / (12.0 * h)
    };
    let mut du = vec![Complex64::new(0.0, 0.0); m * n];
    let mut dt = du.clone();
    let mut dut = du.clone();
    for j in 0..n {
        for i in 0..m {
            du[i * n + j] = du_of(&|r| values[r * n + j], i);
        }
    }
    for i in 0..m {
        for j in 0..n {
            dt[i * n + j] = dt_of(&|c| values[i * n + c], j);
            dut[i * n + j] = dt_of(&|c| du[i * n + c], j);
        }
    }
    Slopes { du, dt, dut }
}

/// Weights `L_q'(u_i)` of the Lagrange polynomial through up to `points`
/// nodes around `i`, and the index of the first node.
fn lagrange_slope_weights(u: &[f64], i: usize, points: usize) -> (usize, Vec<f64>) {
    let m = u.len();
    let p = points.min(m);
    let start = i.saturating_sub(p / 2).min(m - p);
    let xs = &u[start..start + p];
    let xi = u[i];
    let local = i - start;
    let mut w = vec![0.0; p];
    for q in 0..p {
        if q == local {
            w[q] = (0..p).filter(|&k| k != local).map(|k| 1.0 / (xi - xs[k])).sum();
        } else {
            let num: f64 = (0..p).filter(|&k| k != local && k != q).map(|k| xi - xs[k]).product();
            let den: f64 = (0..p).filter(|&k| k != q).map(|k| xs[q] - xs[k]).product();
            w[q] = num / den;
        }
    }
    (start, w)
}

/// Interpolating sampler over a [`QCExtensionGrid`].
///
/// The disk and the exterior annulus are interpolated separately, each
/// including its own trace on `|z| = 1`, so no patch crosses the seam.
#[derive(Clone, Debug)]
pub struct GridSampler {
    interior: Option<PolarInterpolant>,
    exterior: PolarInterpolant,
}

impl GridSampler {
    pub fn new(grid: &QCExtensionGrid) -> Result<Self> {
        let n = grid.grid().angular_count();
        let (ri, vi) = grid.interior_rows();
        let interior = if ri.len() >= 2 && ri[0] > 0.0 { Some(PolarInterpolant::new(ri, n, vi)?) } else { None };
        let (re, ve) = grid.exterior_rows();
        let exterior = PolarInterpolant::new(re, n, ve)?;
        Ok(GridSampler { interior, exterior })
    }

    pub fn exterior(&self) -> &PolarInterpolant {
        &self.exterior
    }

    pub fn interior(&self) -> Option<&PolarInterpolant> {
        self.interior.as_ref()
    }

    fn side(&self, z: Complex64) -> Result<&PolarInterpolant> {
        if z.norm() >= 1.0 {
            Ok(&self.exterior)
        } else {
            self.interior.as_ref().ok_or(Error::OutsideSamples { z })
        }
    }
}

impl PlanarMap for GridSampler {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.side(z)?.eval(z)
    }

    fn partials(&self, z: Complex64) -> Option<Result<(Complex64, Complex64)>> {
        Some(self.side(z).and_then(|s| s.wirtinger(z)).map(|(_, d, db)| (d + db, Complex64::i() * (d - db))))
    }

    fn mu_error_estimate(&self) -> f64 {
        let inner = self.interior.as_ref().map_or(0.0, |s| s.mu_error_estimate());
        inner.max(self.exterior.mu_error_estimate())
    }
}
