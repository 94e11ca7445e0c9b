//! Becker's extension `F(ρe^{iθ}) = f_{log ρ}(e^{iθ})`, the Fourier
//! classifier of Becker-type Beltrami fields, and recovery of the Herglotz
//! function from such a field.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use crate::analysis::{BeltramiField, MuSource};
use crate::chains::{ChainEvaluator, Normalization};
use crate::fft;
use crate::geometry::{angle, PolarGrid};
use crate::herglotz::{check_becker_condition, BeckerSeries, ConditionReport, ConditionSampling, HerglotzSpec, StepTable};
use crate::{Error, Result};

/// Radial extrapolation to the unit circle.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundarySettings {
    /// Radii `1 − δ·2^{−j}`, `j = 0..=levels`.
    pub delta: f64,
    pub levels: usize,
    /// Largest accepted extrapolation residual.
    pub tolerance: f64,
    /// Declared Becker constant; when set, the Herglotz function is
    /// checked against it before any chain is evaluated.
    pub k: Option<f64>,
}

impl Default for BoundarySettings {
    fn default() -> Self {
        BoundarySettings { delta: 0.02, levels: 4, tolerance: 5e-4, k: None }
    }
}

impl BoundarySettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter("boundary delta must lie in (0, 1)"));
        }
        if self.levels == 0 || self.levels > 30 {
            return Err(Error::InvalidParameter("boundary levels must lie in 1..=30"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("boundary tolerance must be positive"));
        }
        if let Some(k) = self.k {
            if !(0.0..1.0).contains(&k) {
                return Err(Error::InvalidParameter("k must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.levels).map(move |j| self.delta * 0.5.powi(j as i32))
    }
}

/// Neville's scheme for the value at `x = 0` of the interpolating
/// polynomial. The residual is the change made by the last node.
pub fn richardson_to_zero(xs: &[f64], ys: &[Complex64]) -> (Complex64, f64) {
    let n = xs.len();
    debug_assert!(n == ys.len() && n > 0);
    let mut table = ys.to_vec();
    let mut previous = table[n - 1];
    for level in 1..n {
        // After this pass table[i] interpolates nodes i-level..=i.
        for i in (level..n).rev() {
            let (xa, xb) = (xs[i - level], xs[i]);
            table[i] = (table[i] * xa - table[i - 1] * xb) / (xa - xb);
        }
        if level == n - 1 {
            previous = table[n - 2];
        }
    }
    let best = table[n - 1];
    let residual = if n > 1 { (best - previous).norm() } else { 0.0 };
    (best, residual)
}

/// `f_s(e^{iθ})` by extrapolating `f_s(r_j e^{iθ})` to `r = 1`; returns the
/// value and the extrapolation residual.
pub fn boundary_value(chain: &ChainEvaluator, s: f64, theta: f64, settings: &BoundarySettings) -> Result<(Complex64, f64)> {
    let zeta = Complex64::from_polar(1.0, theta);
    let xs: Vec<f64> = settings.offsets().collect();
    let ys = xs.iter().map(|d| chain.eval(s, zeta * (1.0 - d))).collect::<Result<Vec<_>>>()?;
    Ok(richardson_to_zero(&xs, &ys))
}

/// `F(ρe^{iθ})` with its error estimate: `f_0` inside the disk, the
/// boundary value of `f_{log ρ}` outside.
pub fn extension_point(chain: &ChainEvaluator, rho: f64, theta: f64, settings: &BoundarySettings) -> Result<(Complex64, f64)> {
    if rho < 1.0 {
        Ok((chain.eval(0.0, Complex64::from_polar(rho, theta))?, 0.0))
    } else {
        boundary_value(chain, rho.ln(), theta, settings)
    }
}

/// The two traces on `|z| = 1` at `θ`: the radial limit of `f_0` and the
/// limit of `F(ρe^{iθ})` as `ρ → 1⁺`, with the larger residual.
pub fn seam_point(chain: &ChainEvaluator, theta: f64, settings: &BoundarySettings) -> Result<(Complex64, Complex64, f64)> {
    let (inner, r0) = boundary_value(chain, 0.0, theta, settings)?;
    let xs: Vec<f64> = settings.offsets().collect();
    let mut worst = r0;
    let mut ys = Vec::with_capacity(xs.len());
    for d in &xs {
        let (v, r) = boundary_value(chain, (1.0 + d).ln(), theta, settings)?;
        worst = worst.max(r);
        ys.push(v);
    }
    let (outer, r1) = richardson_to_zero(&xs, &ys);
    Ok((inner, outer, worst.max(r1)))
}

/// Sampled traces of `F` on both sides of `|z| = 1`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SeamTrace {
    pub interior: Vec<Complex64>,
    pub exterior: Vec<Complex64>,
    pub discrepancy: f64,
}

/// `F` sampled on a polar grid spanning the unit circle.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct QCExtensionGrid {
    grid: PolarGrid,
    values: Vec<Complex64>,
    residuals: Vec<f64>,
    seam: SeamTrace,
    max_residual: f64,
    max_radial_jump: f64,
}

impl QCExtensionGrid {
    /// Assembles a grid from sampled values (row-major, radius first), their
    /// residuals and the seam traces.
    pub fn from_parts(
        grid: PolarGrid,
        values: Vec<Complex64>,
        residuals: Vec<f64>,
        seam_interior: Vec<Complex64>,
        seam_exterior: Vec<Complex64>,
    ) -> Result<Self> {
        let n = grid.angular_count();
        if values.len() != grid.len() || residuals.len() != grid.len() {
            return Err(Error::InvalidGrid("value count does not match the grid"));
        }
        if seam_interior.len() != n || seam_exterior.len() != n {
            return Err(Error::InvalidGrid("seam traces must have one value per angle"));
        }
        if values.iter().chain(&seam_interior).chain(&seam_exterior).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidGrid("grid values must be finite"));
        }
        let discrepancy = seam_interior.iter().zip(&seam_exterior).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let radii = grid.radii();
        let mut max_radial_jump: f64 = 0.0;
        for i in 1..radii.len() {
            if radii[i - 1] >= 1.0 {
                for j in 0..n {
                    let d = values[grid.index(i, j)] - values[grid.index(i - 1, j)];
                    max_radial_jump = max_radial_jump.max(d.norm());
                }
            }
        }
        Ok(QCExtensionGrid {
            grid,
            values,
            residuals,
            seam: SeamTrace { interior: seam_interior, exterior: seam_exterior, discrepancy },
            max_residual,
            max_radial_jump,
        })
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn seam(&self) -> &SeamTrace {
        &self.seam
    }

    /// Largest boundary-extrapolation residual over the grid and the seam.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Largest change between adjacent exterior radii at fixed `θ`.
    pub fn max_radial_jump(&self) -> f64 {
        self.max_radial_jump
    }

    /// Rows with `0 < ρ < 1` followed by the interior seam trace at `ρ = 1`.
    pub fn interior_rows(&self) -> (Vec<f64>, Vec<Complex64>) {
        let n = self.grid.angular_count();
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (i, r) in self.grid.radii().iter().enumerate() {
            if *r > 0.0 && *r < 1.0 {
                radii.push(*r);
                values.extend_from_slice(&self.values[i * n..(i + 1) * n]);
            }
        }
        radii.push(1.0);
        values.extend_from_slice(&self.seam.interior);
        (radii, values)
    }

    /// The exterior seam trace at `ρ = 1` followed by the rows with `ρ > 1`.
    pub fn exterior_rows(&self) -> (Vec<f64>, Vec<Complex64>) {
        let n = self.grid.angular_count();
        let mut radii = vec![1.0];
        let mut values = self.seam.exterior.clone();
        for (i, r) in self.grid.radii().iter().enumerate() {
            if *r > 1.0 {
                radii.push(*r);
                values.extend_from_slice(&self.values[i * n..(i + 1) * n]);
            }
        }
        (radii, values)
    }

    /// Largest `|F − G|` over the exterior rows (`ρ ≥ 1`) of two grids on
    /// the same points.
    pub fn exterior_difference(&self, other: &QCExtensionGrid) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("grids differ"));
        }
        let n = self.grid.angular_count();
        let mut worst: f64 = 0.0;
        for (i, r) in self.grid.radii().iter().enumerate() {
            if *r >= 1.0 {
                for j in 0..n {
                    worst = worst.max((self.value(i, j) - other.value(i, j)).norm());
                }
            }
        }
        Ok(worst)
    }
}

/// Validates the inputs of [`becker_extend`], including the Becker
/// condition when `settings.k` is set.
pub fn extension_precheck(chain: &ChainEvaluator, grid: &PolarGrid, settings: &BoundarySettings) -> Result<()> {
    settings.validate()?;
    if chain.mode() != Normalization::Radial {
        return Err(Error::InvalidParameter("the extension needs a radial chain"));
    }
    let radii = grid.radii();
    if !(radii[0] < 1.0 && radii[radii.len() - 1] > 1.0) {
        return Err(Error::InvalidGrid("grid radii must straddle the unit circle"));
    }
    if let Some(k) = settings.k {
        let sampling = ConditionSampling::for_horizon(radii[radii.len() - 1].ln() + 1.0);
        let report = check_becker_condition(chain.trajectory().field().herglotz(), k, &sampling)?;
        if !report.satisfied {
            return Err(Error::BeckerConditionViolated { margin: report.worst_margin });
        }
    }
    Ok(())
}

/// Builds the grid from per-point results in storage order and per-angle
/// seam results; fails if any residual exceeds the tolerance.
pub fn assemble_extension(
    grid: PolarGrid,
    points: Vec<(Complex64, f64)>,
    seam: Vec<(Complex64, Complex64, f64)>,
    settings: &BoundarySettings,
) -> Result<QCExtensionGrid> {
    let n = grid.angular_count();
    let mut worst = (0.0, 0.0);
    for (idx, (_, r)) in points.iter().enumerate() {
        if *r > worst.1 || r.is_nan() {
            worst = (angle(idx % n, n), *r);
        }
    }
    for (j, (_, _, r)) in seam.iter().enumerate() {
        if *r > worst.1 || r.is_nan() {
            worst = (angle(j, n), *r);
        }
    }
    if !(worst.1 <= settings.tolerance) {
        return Err(Error::BoundaryResolution { theta: worst.0, residual: worst.1 });
    }
    let (values, residuals) = points.into_iter().unzip();
    let (mut inner, mut outer) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut seam_residual: f64 = 0.0;
    for (a, b, r) in seam {
        inner.push(a);
        outer.push(b);
        seam_residual = seam_residual.max(r);
    }
    let mut out = QCExtensionGrid::from_parts(grid, values, residuals, inner, outer)?;
    out.max_residual = out.max_residual.max(seam_residual);
    Ok(out)
}

/// Samples `F(ρe^{iθ})`: `f_0` for `ρ < 1` and `f_{log ρ}(e^{iθ})` for
/// `ρ ≥ 1`, plus both seam traces.
pub fn becker_extend(chain: &ChainEvaluator, grid: &PolarGrid, settings: &BoundarySettings) -> Result<QCExtensionGrid> {
    extension_precheck(chain, grid, settings)?;
    let n = grid.angular_count();
    let mut points = Vec::with_capacity(grid.len());
    for r in grid.radii() {
        for j in 0..n {
            points.push(extension_point(chain, *r, angle(j, n), settings)?);
        }
    }
    let seam = (0..n).map(|j| seam_point(chain, angle(j, n), settings)).collect::<Result<Vec<_>>>()?;
    assemble_extension(grid.clone(), points, seam, settings)
}

/// `a_n(ρ)`, `n ∈ [−N/2, N/2)`, of one trace.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CircleCoefficients {
    pub rho: f64,
    /// Coefficients in order `n = −N/2, …, N/2 − 1`.
    pub coefficients: Vec<Complex64>,
}

impl CircleCoefficients {
    pub fn get(&self, n: i64) -> Option<Complex64> {
        let half = (self.coefficients.len() / 2) as i64;
        if n < -half || n >= half {
            return None;
        }
        Some(self.coefficients[(n + half) as usize])
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let half = (self.coefficients.len() / 2) as i64;
        -half..half
    }
}

/// Trapezoid approximation of `(1/2π)∫ e^{−inθ} μ(ρe^{iθ}) dθ` from `N`
/// equispaced samples.
pub fn circle_fourier(trace: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = trace.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid("trace length must be a power of two"));
    }
    let spectrum = fft::forward(trace);
    let scale = 1.0 / n as f64;
    Ok((0..n).map(|i| spectrum[(i + n / 2) % n] * scale).collect())
}

/// The largest `|a_n(ρ)|` with `n ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Offender {
    pub n: i64,
    pub rho: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BeckerReport {
    pub is_becker: bool,
    pub tolerance: f64,
    pub max_violation: f64,
    pub worst: Offender,
    pub circles: Vec<CircleCoefficients>,
    pub assumption: &'static str,
}

const ASSUMPTION: &str = "the sampled field is assumed to come from a quasiconformal extension fixing infinity; \
global homeomorphy is not verified";

/// Classifier tolerance: `1e−9` for exact fields, `max(1e−3, 10·estimate)`
/// for numerical ones.
pub fn default_tolerance(source: MuSource) -> f64 {
    match source {
        MuSource::ClosedForm => 1e-9,
        MuSource::Numerical { error_estimate } => (10.0 * error_estimate).max(1e-3),
    }
}

/// Becker type means `a_n(ρ) = 0` for every sampled `ρ > 1` and every `n ≤ 1`.
pub fn classify_becker(field: &BeltramiField, tolerance: Option<f64>) -> Result<BeckerReport> {
    let circles = field.circles();
    if circles.len() < 3 {
        return Err(Error::InvalidGrid("classification needs at least three radii"));
    }
    if field.angular_count() < 64 {
        return Err(Error::InvalidGrid("classification needs at least 64 angles"));
    }
    if circles.iter().any(|c| !(c.rho > 1.0)) {
        return Err(Error::InvalidGrid("classification uses circles with radius above 1"));
    }
    let tolerance = tolerance.unwrap_or_else(|| default_tolerance(field.source()));
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    let mut worst = Offender { n: 0, rho: circles[0].rho, modulus: -1.0 };
    let mut table = Vec::with_capacity(circles.len());
    for c in circles {
        let coeffs = CircleCoefficients { rho: c.rho, coefficients: circle_fourier(&c.trace)? };
        for n in coeffs.indices().take_while(|n| *n <= 1) {
            let m = coeffs.get(n).unwrap_or_default().norm();
            if m > worst.modulus {
                worst = Offender { n, rho: c.rho, modulus: m };
            }
        }
        table.push(coeffs);
    }
    Ok(BeckerReport {
        is_becker: worst.modulus <= tolerance,
        tolerance,
        max_violation: worst.modulus,
        worst,
        circles: table,
        assumption: ASSUMPTION,
    })
}

/// A Herglotz function reconstructed from a Becker-type field.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RecoveredHerglotz {
    /// Piecewise constant in `t`: the piece of circle `ρ_i` is centred at
    /// `log ρ_i`, the first starts at 0 and the last is open-ended.
    pub spec: HerglotzSpec,
    /// `sup |φ_ρ|` over the circles.
    pub k_observed: f64,
    pub classification: BeckerReport,
    pub condition: ConditionReport,
}

/// `p(z, log ρ) = (1 + φ_ρ(z)/z²)/(1 − φ_ρ(z)/z²)` with
/// `φ_ρ(ζ) = Σ_{n≥2} a_n(ρ) ζⁿ`.
pub fn recover_herglotz_from_mu(field: &BeltramiField, tolerance: Option<f64>) -> Result<RecoveredHerglotz> {
    let classification = classify_becker(field, tolerance)?;
    if !classification.is_becker {
        return Err(Error::NotBecker);
    }
    let noise = match field.source() {
        MuSource::ClosedForm => 1e-14,
        MuSource::Numerical { error_estimate } => error_estimate.max(1e-14),
    };
    let n = field.angular_count();
    let half = n / 2;
    let mut pieces = Vec::with_capacity(classification.circles.len());
    let mut times = Vec::with_capacity(classification.circles.len());
    let mut k_observed: f64 = 0.0;
    for coeffs in &classification.circles {
        let mut series: Vec<Complex64> = (2..half as i64).map(|m| coeffs.get(m).unwrap_or_default()).collect();
        let head = series.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let tail = series[series.len() * 3 / 4..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if tail > (1e-2 * head).max(10.0 * noise) {
            return Err(Error::ReconstructionUnstable("Fourier tail of the trace does not decay"));
        }
        while series.last().is_some_and(|c| c.norm() <= noise) {
            series.pop();
        }
        let s = BeckerSeries::new(series)?;
        // sup of |φ| on the circle, sampled four times finer than the trace.
        let fine = 4 * n;
        let sup = (0..fine).map(|j| s.eval(Complex64::from_polar(1.0, angle(j, fine))).0.norm()).fold(0.0, f64::max);
        k_observed = k_observed.max(sup);
        times.push(coeffs.rho.ln());
        pieces.push(HerglotzSpec::Series(s));
    }
    if !(k_observed < 1.0) {
        return Err(Error::ReconstructionUnstable("recovered series reaches the unit circle"));
    }
    let mut starts = vec![0.0];
    starts.extend(times.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let spec = HerglotzSpec::Table(StepTable::new(starts.clone(), pieces, None)?);

    let mut sampling_times = starts;
    sampling_times.extend_from_slice(&times);
    let sampling = ConditionSampling { times: sampling_times, ..ConditionSampling::default() };
    let k = (k_observed * (1.0 + 1e-9) + 1e-12).min(1.0 - f64::EPSILON);
    let condition = check_becker_condition(&spec, k, &sampling)?;
    if !condition.satisfied {
        return Err(Error::ReconstructionUnstable("recovered function violates the Becker condition"));
    }
    Ok(RecoveredHerglotz { spec, k_observed, classification, condition })
}
