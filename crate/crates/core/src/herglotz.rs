//! Herglotz functions `p(z,t)`, driving functions `τ(t)`, the Becker and
//! weaker conditions, and the λ-family `p_λ = H_t ∘ ((λ/k) H_t⁻¹ ∘ p)`.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use crate::geometry::{hyperbolic_distance_halfplane, HalfPlaneChart};
use crate::quadrature::{gauss_legendre, gauss_legendre_composite};
use crate::{Error, Result};

/// Lower bound on `Re p` accepted during validation.
pub const VALIDATION_EPS: f64 = 1e-10;
/// Tolerance of the circle-mean holomorphy probe.
pub const HOLOMORPHY_EPS: f64 = 1e-8;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A piecewise-constant-in-time table. Piece `i` covers
/// `[starts[i], starts[i+1])`; the last piece runs to `end` (or forever).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepTable<T> {
    starts: Vec<f64>,
    values: Vec<T>,
    end: Option<f64>,
}

impl<T> StepTable<T> {
    pub fn new(starts: Vec<f64>, values: Vec<T>, end: Option<f64>) -> Result<Self> {
        if starts.is_empty() || starts.len() != values.len() {
            return Err(Error::InvalidParameter("table needs one start time per piece"));
        }
        if starts[0] != 0.0 {
            return Err(Error::InvalidParameter("table must start at t = 0"));
        }
        if starts.iter().any(|t| !t.is_finite()) || starts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("table start times must increase"));
        }
        if let Some(e) = end {
            if !(e > *starts.last().unwrap()) {
                return Err(Error::InvalidParameter("table end must follow the last start"));
            }
        }
        Ok(StepTable { starts, values, end })
    }

    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn end(&self) -> Option<f64> {
        self.end
    }

    pub fn locate(&self, t: f64) -> Result<&T> {
        if !(t >= 0.0) || self.end.is_some_and(|e| t > e) {
            return Err(Error::Extrapolation { t });
        }
        let idx = self.starts.partition_point(|s| *s <= t);
        Ok(&self.values[idx.saturating_sub(1)])
    }

    fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.starts.iter().skip(1).copied()
    }
}

/// Radial profiles `ρ(t)` for the essential example: `ρ(0) = 0`, `0 ≤ ρ < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "profile", rename_all = "kebab-case"))]
pub enum RadialProfile {
    /// `ρ = tanh √t`.
    TanhSqrt,
    /// `ρ = √t/(1 + √t)`.
    SqrtRatio,
    /// `ρ = t^α/(1 + t^α)`.
    PowerRatio { alpha: f64 },
}

impl RadialProfile {
    pub fn rho(&self, t: f64) -> f64 {
        match *self {
            RadialProfile::TanhSqrt => t.sqrt().tanh(),
            RadialProfile::SqrtRatio => {
                let u = t.sqrt();
                u / (1.0 + u)
            }
            RadialProfile::PowerRatio { alpha } => {
                let u = t.powf(alpha);
                u / (1.0 + u)
            }
        }
    }

    /// `1 − ρ²`, computed without cancellation.
    pub fn one_minus_rho_sq(&self, t: f64) -> f64 {
        match *self {
            RadialProfile::TanhSqrt => {
                let c = t.sqrt().cosh();
                1.0 / (c * c)
            }
            RadialProfile::SqrtRatio => {
                let u = t.sqrt();
                (1.0 + 2.0 * u) / ((1.0 + u) * (1.0 + u))
            }
            RadialProfile::PowerRatio { alpha } => {
                let u = t.powf(alpha);
                (1.0 + 2.0 * u) / ((1.0 + u) * (1.0 + u))
            }
        }
    }

    pub fn rho_prime(&self, t: f64) -> f64 {
        match *self {
            RadialProfile::TanhSqrt => {
                let u = t.sqrt();
                let c = u.cosh();
                1.0 / (2.0 * u * c * c)
            }
            RadialProfile::SqrtRatio => {
                let u = t.sqrt();
                1.0 / (2.0 * u * (1.0 + u) * (1.0 + u))
            }
            RadialProfile::PowerRatio { alpha } => {
                let u = t.powf(alpha);
                alpha * u / (t * (1.0 + u) * (1.0 + u))
            }
        }
    }

    /// Exponent `α` with `ρ(t) ~ c t^α` as `t → 0`.
    pub fn small_time_exponent(&self) -> f64 {
        match *self {
            RadialProfile::TanhSqrt | RadialProfile::SqrtRatio => 0.5,
            RadialProfile::PowerRatio { alpha } => alpha,
        }
    }

    /// Checks `ρ(0) = 0`, `0 ≤ ρ < 1` on samples and that `∫₀¹ dt/ρ` converges.
    ///
    /// Divergence is detected numerically: the contributions of successive
    /// three-decade windows towards `t = 0` must shrink.
    pub fn validate(&self) -> Result<()> {
        if let RadialProfile::PowerRatio { alpha } = *self {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(Error::InvalidProfile("exponent must be positive"));
            }
        }
        if self.rho(0.0) != 0.0 {
            return Err(Error::InvalidProfile("rho(0) must vanish"));
        }
        for i in 1..=64 {
            let t = 1e-6 * 10f64.powf(i as f64 / 8.0);
            let r = self.rho(t);
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidProfile("rho must lie in [0, 1)"));
            }
        }
        let window = |lo: f64, hi: f64| {
            gauss_legendre_composite(
                |x| {
                    let t = x.exp();
                    t / self.rho(t)
                },
                lo.ln(),
                hi.ln(),
                24,
            )
        };
        let d1 = window(1e-9, 1e-6);
        let d2 = window(1e-12, 1e-9);
        if !d1.is_finite() || !d2.is_finite() || d2 > 0.9 * d1 {
            return Err(Error::InvalidProfile("integral of dt/rho diverges at 0"));
        }
        Ok(())
    }
}

/// Driving function of the essential example:
/// `τ(t) = i e^{iθ(t)} (1 − iρ)²/(1 + ρ²)` with
/// `θ(t) = ∫₀ᵗ (1 − ρ²)²/(1 + ρ²) ds/ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct EssentialDriving {
    profile: RadialProfile,
    exponent: f64,
    du: f64,
    cumulative: Vec<f64>,
}

impl EssentialDriving {
    const DU: f64 = 0.05;
    const T_TABLE: f64 = 1000.0;

    pub fn new(profile: RadialProfile) -> Result<Self> {
        profile.validate()?;
        let alpha = profile.small_time_exponent();
        if !(alpha < 1.0) {
            return Err(Error::InvalidProfile("integral of dt/rho diverges at 0"));
        }
        let exponent = 1.0 / (1.0 - alpha);
        let mut out = EssentialDriving { profile, exponent, du: Self::DU, cumulative: Vec::new() };
        let cells = (Self::T_TABLE.powf(1.0 / exponent) / Self::DU).ceil() as usize;
        let mut acc = 0.0;
        out.cumulative.push(0.0);
        for i in 0..cells {
            let lo = i as f64 * Self::DU;
            acc += gauss_legendre(|u| out.integrand(u), lo, lo + Self::DU);
            out.cumulative.push(acc);
        }
        Ok(out)
    }

    pub fn profile(&self) -> RadialProfile {
        self.profile
    }

    // dθ/du after the substitution t = u^m, which removes the singularity at 0.
    fn integrand(&self, u: f64) -> f64 {
        let m = self.exponent;
        let t = u.powf(m);
        let rho = self.profile.rho(t);
        let omr = self.profile.one_minus_rho_sq(t);
        m * u.powf(m - 1.0) * omr * omr / ((1.0 + rho * rho) * rho)
    }

    pub fn theta(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let u = t.powf(1.0 / self.exponent);
        let cell = (u / self.du).floor() as usize;
        let last = self.cumulative.len() - 1;
        let (base, lo) = if cell <= last {
            (self.cumulative[cell], cell as f64 * self.du)
        } else {
            let mut acc = self.cumulative[last];
            for i in last..cell {
                let lo = i as f64 * self.du;
                acc += gauss_legendre(|v| self.integrand(v), lo, lo + self.du);
            }
            (acc, cell as f64 * self.du)
        };
        if u > lo {
            base + gauss_legendre(|v| self.integrand(v), lo, u)
        } else {
            base
        }
    }

    pub fn tau(&self, t: f64) -> Complex64 {
        let rho = self.profile.rho(t);
        let w = Complex64::new(1.0, -rho);
        Complex64::i() * Complex64::from_polar(1.0, self.theta(t)) * w * w / (1.0 + rho * rho)
    }

    /// The closed-form center `ρ(t) e^{iθ(t)}`.
    pub fn center(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.profile.rho(t), self.theta(t))
    }
}

/// `τ(t)`, a map into the closed unit disk.
#[derive(Clone, Debug, PartialEq)]
pub enum DrivingSpec {
    Constant(Complex64),
    Steps(StepTable<Complex64>),
    Essential(Box<EssentialDriving>),
}

impl DrivingSpec {
    pub fn constant(tau: Complex64) -> Result<Self> {
        if !(tau.norm() <= 1.0) {
            return Err(Error::InvalidParameter("driving value must lie in the closed unit disk"));
        }
        Ok(DrivingSpec::Constant(tau))
    }

    pub fn steps(table: StepTable<Complex64>) -> Result<Self> {
        if table.values().iter().any(|v| !(v.norm() <= 1.0)) {
            return Err(Error::InvalidParameter("driving value must lie in the closed unit disk"));
        }
        Ok(DrivingSpec::Steps(table))
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        match self {
            DrivingSpec::Constant(c) => Ok(*c),
            DrivingSpec::Steps(table) => table.locate(t).copied(),
            DrivingSpec::Essential(e) => Ok(e.tau(t)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, DrivingSpec::Constant(c) if *c == Complex64::new(0.0, 0.0))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            DrivingSpec::Steps(table) => table.breakpoints().collect(),
            _ => Vec::new(),
        }
    }

    pub fn horizon(&self) -> Option<f64> {
        match self {
            DrivingSpec::Steps(table) => table.end(),
            _ => None,
        }
    }
}

/// Closed-form Herglotz functions.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "kebab-case"))]
pub enum CatalogHerglotz {
    /// `(1 − k zⁿ)/(1 + k zⁿ)`; `n = 1` is the Koebe-type field.
    Power { k: f64, n: u32 },
    /// `(1 + z)/(1 − z)`.
    Cayley,
    /// `1 − i ρ'(1 + ρ²)/(1 − ρ²)²`, constant in `z`.
    Essential(RadialProfile),
}

/// `p = (1 + s)/(1 − s)` for a polynomial `s(z) = Σ c_m z^m`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BeckerSeries {
    coefficients: Vec<Complex64>,
}

impl BeckerSeries {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("series coefficients must be finite"));
        }
        Ok(BeckerSeries { coefficients })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `(s(z), s'(z))` by Horner.
    pub fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for c in self.coefficients.iter().rev() {
            ds = ds * z + s;
            s = s * z + c;
        }
        (s, ds)
    }

    /// Upper bound `Σ|c_m|` for `sup_𝔻 |s|`.
    pub fn coefficient_mass(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).sum()
    }
}

/// A polynomial ratio `N(z)/D(z)`, constant in time.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RationalHerglotz {
    numerator: Vec<Complex64>,
    denominator: Vec<Complex64>,
}

impl RationalHerglotz {
    pub fn new(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        if numerator.is_empty() || denominator.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::InvalidParameter("rational spec needs a non-zero denominator"));
        }
        Ok(RationalHerglotz { numerator, denominator })
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.denominator
    }

    fn poly(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            d = d * z + v;
            v = v * z + a;
        }
        (v, d)
    }

    fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let (n, dn) = Self::poly(&self.numerator, z);
        let (d, dd) = Self::poly(&self.denominator, z);
        (n / d, (dn * d - n * dd) / (d * d))
    }
}

/// The center `a(t)` of the weaker condition's hyperbolic disks.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CenterTrajectory {
    Constant(Complex64),
    Steps(StepTable<Complex64>),
}

impl CenterTrajectory {
    pub fn constant(a: Complex64) -> Result<Self> {
        if !(a.re >= 0.0) {
            return Err(Error::InvalidParameter("center must satisfy Re a >= 0"));
        }
        Ok(CenterTrajectory::Constant(a))
    }

    pub fn steps(table: StepTable<Complex64>) -> Result<Self> {
        if table.values().iter().any(|a| !(a.re >= 0.0)) {
            return Err(Error::InvalidParameter("center must satisfy Re a >= 0"));
        }
        Ok(CenterTrajectory::Steps(table))
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        match self {
            CenterTrajectory::Constant(a) => Ok(*a),
            CenterTrajectory::Steps(table) => table.locate(t).copied(),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            CenterTrajectory::Steps(table) => table.breakpoints().collect(),
            CenterTrajectory::Constant(_) => Vec::new(),
        }
    }
}

/// `p_λ = H_t ∘ ((λ/k) · H_t⁻¹ ∘ p)` where `H_t` is the half-plane chart
/// centered at `a(t)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaSlice {
    base: HerglotzSpec,
    k: f64,
    center: CenterTrajectory,
    lambda: Complex64,
}

impl LambdaSlice {
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Whether `|λ| ≤ k`, the range in which `p_λ(𝔻,t) ⊂ D_t` is guaranteed.
    pub fn containment_guaranteed(&self) -> bool {
        self.lambda.norm() <= self.k
    }

    fn eval(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        let a = self.center.eval(t)?;
        if self.k == 0.0 {
            return Ok((a, Complex64::new(0.0, 0.0)));
        }
        let (p, dp) = self.base.value_and_derivative(z, t)?;
        if !(a.re > 0.0) {
            return Ok((p, dp));
        }
        let chart = HalfPlaneChart::new(a)?;
        let scale = self.lambda / self.k;
        let phi = scale * chart.inverse(p);
        let value = chart.forward(phi);
        let deriv = chart.forward_derivative(phi) * scale * chart.inverse_derivative(p) * dp;
        Ok((value, deriv))
    }
}

/// A Herglotz function `p(z,t)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum HerglotzSpec {
    Constant(Complex64),
    Catalog(CatalogHerglotz),
    Rational(RationalHerglotz),
    Series(BeckerSeries),
    Table(StepTable<HerglotzSpec>),
    LambdaSlice(Box<LambdaSlice>),
}

impl HerglotzSpec {
    pub fn koebe(k: f64) -> Result<Self> {
        Self::power(k, 1)
    }

    pub fn power(k: f64, n: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::InvalidParameter("k must lie in [0, 1)"));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("power must be positive"));
        }
        Ok(HerglotzSpec::Catalog(CatalogHerglotz::Power { k, n }))
    }

    pub fn essential(profile: RadialProfile) -> Result<Self> {
        profile.validate()?;
        Ok(HerglotzSpec::Catalog(CatalogHerglotz::Essential(profile)))
    }

    /// `p(z,t)`.
    pub fn eval(&self, z: Complex64, t: f64) -> Result<Complex64> {
        self.eval_with_derivative(z, t).map(|(p, _)| p)
    }

    /// `(p, ∂p/∂z)` at `(z,t)` with `|z| < 1`.
    pub fn eval_with_derivative(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        if !(z.norm() < 1.0) {
            return Err(Error::OutOfDisk { z });
        }
        self.value_and_derivative(z, t)
    }

    /// Like [`HerglotzSpec::eval_with_derivative`] without the disk check;
    /// used by the integrator whose trial stages may leave the disk slightly.
    pub fn value_and_derivative(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        if !(t >= 0.0) {
            return Err(Error::Extrapolation { t });
        }
        let zero = Complex64::new(0.0, 0.0);
        match self {
            HerglotzSpec::Constant(c) => Ok((*c, zero)),
            HerglotzSpec::Catalog(CatalogHerglotz::Power { k, n }) => {
                let n = *n as i32;
                let zn1 = z.powi(n - 1);
                let kzn = *k * zn1 * z;
                let den = ONE + kzn;
                Ok(((ONE - kzn) / den, -2.0 * *k * n as f64 * zn1 / (den * den)))
            }
            HerglotzSpec::Catalog(CatalogHerglotz::Cayley) => {
                let den = ONE - z;
                Ok(((ONE + z) / den, 2.0 / (den * den)))
            }
            HerglotzSpec::Catalog(CatalogHerglotz::Essential(profile)) => {
                if t == 0.0 {
                    return Err(Error::TimeSingularity { t });
                }
                let rho = profile.rho(t);
                let omr = profile.one_minus_rho_sq(t);
                let im = profile.rho_prime(t) * (1.0 + rho * rho) / (omr * omr);
                Ok((Complex64::new(1.0, -im), zero))
            }
            HerglotzSpec::Rational(r) => Ok(r.eval(z)),
            HerglotzSpec::Series(s) => {
                let (v, dv) = s.eval(z);
                let den = ONE - v;
                Ok(((ONE + v) / den, 2.0 * dv / (den * den)))
            }
            HerglotzSpec::Table(table) => table.locate(t)?.value_and_derivative(z, t),
            HerglotzSpec::LambdaSlice(slice) => slice.eval(z, t),
        }
    }

    /// Times at which `p` may jump; the integrator lands on each exactly.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            HerglotzSpec::Table(table) => {
                out.extend(table.breakpoints());
                for piece in table.values() {
                    out.extend(piece.breakpoints());
                }
            }
            HerglotzSpec::LambdaSlice(slice) => {
                out.extend(slice.base.breakpoints());
                out.extend(slice.center.breakpoints());
            }
            _ => {}
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out.dedup();
        out
    }

    /// End of the time domain, if finite.
    pub fn horizon(&self) -> Option<f64> {
        match self {
            HerglotzSpec::Table(table) => table.end(),
            HerglotzSpec::LambdaSlice(slice) => {
                let c = match &slice.center {
                    CenterTrajectory::Steps(t) => t.end(),
                    CenterTrajectory::Constant(_) => None,
                };
                match (slice.base.horizon(), c) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
            _ => None,
        }
    }

    /// Times where `p` is not defined (the integrator starts just after them).
    pub fn singular_times(&self) -> Vec<f64> {
        match self {
            HerglotzSpec::Catalog(CatalogHerglotz::Essential(_)) => alloc::vec![0.0],
            HerglotzSpec::Table(table) => table.values().iter().flat_map(|p| p.singular_times()).collect(),
            HerglotzSpec::LambdaSlice(slice) => slice.base.singular_times(),
            _ => Vec::new(),
        }
    }
}

/// Sample set for condition checks: `radii × angles` points at each time.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionSampling {
    pub radii: Vec<f64>,
    pub angles: usize,
    pub times: Vec<f64>,
    /// Times excluded from the check (the "a.e." exception set).
    pub exceptions: Vec<f64>,
    pub tolerance: f64,
}

impl Default for ConditionSampling {
    fn default() -> Self {
        Self::for_horizon(8.0)
    }
}

impl ConditionSampling {
    /// Radii `{0.5, 0.9, 0.99, 0.999}`, 64 angles and 32 midpoint times in `[0, t_max]`.
    pub fn for_horizon(t_max: f64) -> Self {
        ConditionSampling {
            radii: alloc::vec![0.5, 0.9, 0.99, 0.999],
            angles: 64,
            times: (0..32).map(|j| t_max * (j as f64 + 0.5) / 32.0).collect(),
            exceptions: Vec::new(),
            tolerance: 1e-10,
        }
    }

    fn active_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.times
            .iter()
            .copied()
            .filter(|t| !self.exceptions.iter().any(|e| (t - e).abs() <= 1e-12))
    }

    fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.radii.len() * self.angles);
        for r in &self.radii {
            for j in 0..self.angles {
                out.push(Complex64::from_polar(*r, 2.0 * PI * j as f64 / self.angles as f64));
            }
        }
        out
    }
}

/// Outcome of a sampled condition check.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConditionReport {
    pub satisfied: bool,
    pub worst_margin: f64,
    pub worst_sample: Option<(Complex64, f64)>,
    pub tolerance: f64,
}

impl ConditionReport {
    pub fn new(tolerance: f64) -> Self {
        ConditionReport { satisfied: true, worst_margin: f64::NEG_INFINITY, worst_sample: None, tolerance }
    }

    pub fn record(&mut self, margin: f64, z: Complex64, t: f64) {
        if margin > self.worst_margin || margin.is_nan() {
            self.worst_margin = if margin.is_nan() { f64::INFINITY } else { margin };
            self.worst_sample = Some((z, t));
        }
        self.satisfied = self.worst_margin <= self.tolerance;
    }
}

/// `max |(p − 1)/(p + 1)| − k` over the samples.
pub fn check_becker_condition(p: &HerglotzSpec, k: f64, sampling: &ConditionSampling) -> Result<ConditionReport> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidParameter("k must lie in [0, 1)"));
    }
    let points = sampling.points();
    let mut report = ConditionReport::new(sampling.tolerance);
    for t in sampling.active_times() {
        for z in &points {
            let w = p.eval(*z, t)?;
            let den = w + 1.0;
            if den.norm() < 1e-300 {
                return Err(Error::SingularValue { z: *z, t });
            }
            report.record((w - 1.0).norm() / den.norm() - k, *z, t);
        }
    }
    Ok(report)
}

/// Hyperbolic distance from `p(z,t)` to `a(t)` minus `artanh k`; where
/// `Re a(t) = 0` the margin is `|p − a|`.
pub fn check_weaker_condition(
    p: &HerglotzSpec,
    k: f64,
    center: &CenterTrajectory,
    sampling: &ConditionSampling,
) -> Result<ConditionReport> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidParameter("k must lie in [0, 1)"));
    }
    let radius = k.atanh();
    let points = sampling.points();
    let mut report = ConditionReport::new(sampling.tolerance);
    for t in sampling.active_times() {
        let a = center.eval(t)?;
        for z in &points {
            let w = p.eval(*z, t)?;
            if w.re < -VALIDATION_EPS {
                return Err(Error::NotHerglotz { z: *z, t, re: w.re });
            }
            let margin = if a.re > 0.0 {
                if w.re > 0.0 {
                    hyperbolic_distance_halfplane(w, a)? - radius
                } else {
                    f64::INFINITY
                }
            } else {
                (w - a).norm()
            };
            report.record(margin, *z, t);
        }
    }
    Ok(report)
}

/// Validates `Re p ≥ −ε` and the circle-mean holomorphy probe on the samples.
pub fn validate_herglotz(p: &HerglotzSpec, sampling: &ConditionSampling) -> Result<ConditionReport> {
    let points = sampling.points();
    let mut report = ConditionReport::new(0.0);
    for t in sampling.active_times() {
        for z in &points {
            let w = p.eval(*z, t)?;
            if w.re < -VALIDATION_EPS {
                return Err(Error::NotHerglotz { z: *z, t, re: w.re });
            }
            if z.norm() + 0.01 < 1.0 {
                let probe = holomorphy_probe(|u| p.eval(u, t), *z, 0.01)?;
                report.record(probe - HOLOMORPHY_EPS, *z, t);
            }
        }
    }
    Ok(report)
}

/// `|mean of f over 16 points of the circle |u − center| = r| − f(center)|`.
pub fn holomorphy_probe<F>(mut f: F, center: Complex64, r: f64) -> Result<f64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..16 {
        acc += f(center + Complex64::from_polar(r, 2.0 * PI * j as f64 / 16.0))?;
    }
    Ok((acc / 16.0 - f(center)?).norm())
}

/// Builds `p_λ`. With `k = 0` the slice is the constant `a(t)`.
pub fn lambda_slice(p: &HerglotzSpec, k: f64, center: &CenterTrajectory, lambda: Complex64) -> Result<HerglotzSpec> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidParameter("k must lie in [0, 1)"));
    }
    if !(lambda.norm() <= 1.0) {
        return Err(Error::InvalidParameter("lambda must lie in the closed unit disk"));
    }
    Ok(HerglotzSpec::LambdaSlice(Box::new(LambdaSlice {
        base: p.clone(),
        k,
        center: center.clone(),
        lambda,
    })))
}

/// `max (1 − |z|²)|p'(z)| − 2 Re p(z)` over the samples.
pub fn schwarz_pick_residual(p: &HerglotzSpec, sampling: &ConditionSampling) -> Result<f64> {
    let points = sampling.points();
    let mut worst = f64::NEG_INFINITY;
    for t in sampling.active_times() {
        for z in &points {
            let (w, dw) = p.eval_with_derivative(*z, t)?;
            worst = worst.max((1.0 - z.norm_sqr()) * dw.norm() - 2.0 * w.re);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn koebe_type_value_at_one_half() {
        let p = HerglotzSpec::koebe(0.5).unwrap();
        assert!((p.eval(c(0.5, 0.0), 1.0).unwrap() - c(0.6, 0.0)).norm() < 1e-15);
        assert!(matches!(p.eval(c(1.0, 0.0), 0.0), Err(Error::OutOfDisk { .. })));
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let specs = [
            HerglotzSpec::koebe(0.5).unwrap(),
            HerglotzSpec::power(0.4, 3).unwrap(),
            HerglotzSpec::Catalog(CatalogHerglotz::Cayley),
            HerglotzSpec::Series(BeckerSeries::new(alloc::vec![c(0.1, 0.2), c(-0.2, 0.0), c(0.05, 0.05)]).unwrap()),
            HerglotzSpec::Rational(RationalHerglotz::new(alloc::vec![c(2.0, 0.0), c(0.5, 0.0)], alloc::vec![c(1.0, 0.0), c(0.0, 0.3)]).unwrap()),
        ];
        let z = c(0.3, -0.2);
        let h = 1e-6;
        for p in &specs {
            let (_, d) = p.eval_with_derivative(z, 0.5).unwrap();
            let fd = (p.eval(z + h, 0.5).unwrap() - p.eval(z - h, 0.5).unwrap()) / (2.0 * h);
            assert!((d - fd).norm() < 1e-8, "{p:?}");
        }
    }

    #[test]
    fn essential_field_has_unit_real_part() {
        for profile in [RadialProfile::TanhSqrt, RadialProfile::SqrtRatio] {
            let p = HerglotzSpec::essential(profile).unwrap();
            for t in [0.01, 0.5, 3.0, 50.0] {
                assert_eq!(p.eval(c(0.3, 0.1), t).unwrap().re, 1.0);
            }
            assert!(matches!(p.eval(c(0.0, 0.0), 0.0), Err(Error::TimeSingularity { .. })));
        }
    }

    #[test]
    fn profile_derivative_matches_differences() {
        for profile in [RadialProfile::TanhSqrt, RadialProfile::SqrtRatio, RadialProfile::PowerRatio { alpha: 0.3 }] {
            for t in [0.1, 1.0, 7.0] {
                let h = 1e-6;
                let fd = (profile.rho(t + h) - profile.rho(t - h)) / (2.0 * h);
                assert!((fd - profile.rho_prime(t)).abs() < 1e-8);
                let r = profile.rho(t);
                assert!((profile.one_minus_rho_sq(t) - (1.0 - r * r)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn divergent_profiles_are_rejected() {
        assert!(RadialProfile::PowerRatio { alpha: 1.0 }.validate().is_err());
        assert!(RadialProfile::PowerRatio { alpha: 1.5 }.validate().is_err());
        assert!(RadialProfile::PowerRatio { alpha: 0.5 }.validate().is_ok());
        assert!(RadialProfile::TanhSqrt.validate().is_ok());
        assert!(EssentialDriving::new(RadialProfile::PowerRatio { alpha: 1.0 }).is_err());
    }

    #[test]
    fn essential_driving_is_unimodular() {
        let d = EssentialDriving::new(RadialProfile::TanhSqrt).unwrap();
        for t in [0.0, 0.01, 0.7, 5.0, 1500.0] {
            assert!((d.tau(t).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_matches_direct_quadrature() {
        // Independent route: integrate in t with a graded mesh towards 0.
        let profile = RadialProfile::TanhSqrt;
        let d = EssentialDriving::new(profile).unwrap();
        let f = |t: f64| {
            let r = profile.rho(t);
            let o = 1.0 - r * r;
            o * o / ((1.0 + r * r) * r)
        };
        // t = 2σ⁴ on σ ∈ [0, 1].
        let direct = gauss_legendre_composite(|sig| f(2.0 * sig.powi(4)) * 8.0 * sig.powi(3), 0.0, 1.0, 200);
        assert!((d.theta(2.0) - direct).abs() < 1e-9, "{} vs {}", d.theta(2.0), direct);
        // Beyond the precomputed table.
        let t = 1200.0;
        let tail = gauss_legendre_composite(f, 1000.0, t, 100);
        assert!((d.theta(t) - d.theta(1000.0) - tail).abs() < 1e-9);
    }

    #[test]
    fn becker_condition_examples() {
        let s = ConditionSampling::default();
        let r = check_becker_condition(&HerglotzSpec::Constant(c(1.0, 0.0)), 0.3, &s).unwrap();
        assert!(r.satisfied);
        assert!((r.worst_margin + 0.3).abs() < 1e-15);
        let r = check_becker_condition(&HerglotzSpec::koebe(0.5).unwrap(), 0.5, &s).unwrap();
        assert!(r.satisfied);
        assert!((r.worst_margin + 0.5 * 0.001).abs() < 1e-12);
        let r = check_becker_condition(&HerglotzSpec::Catalog(CatalogHerglotz::Cayley), 0.9, &s).unwrap();
        assert!(!r.satisfied);
        let neg = HerglotzSpec::Constant(c(-1.0, 0.0));
        assert!(matches!(check_becker_condition(&neg, 0.5, &s), Err(Error::SingularValue { .. })));
    }

    #[test]
    fn weaker_condition_examples() {
        let s = ConditionSampling::default();
        let p = HerglotzSpec::koebe(0.5).unwrap();
        let one = CenterTrajectory::constant(c(1.0, 0.0)).unwrap();
        let weak = check_weaker_condition(&p, 0.5, &one, &s).unwrap();
        let strong = check_becker_condition(&p, 0.5, &s).unwrap();
        assert_eq!(weak.satisfied, strong.satisfied);
        // The margins are related by the monotone map m ↦ artanh(k + m) − artanh(k).
        let mapped = (0.5 + strong.worst_margin).atanh() - 0.5f64.atanh();
        assert!((weak.worst_margin - mapped).abs() < 1e-12);

        let cst = c(2.0, -1.0);
        let r = check_weaker_condition(&HerglotzSpec::Constant(cst), 0.4, &CenterTrajectory::constant(cst).unwrap(), &s).unwrap();
        assert!(r.satisfied);
        assert!((r.worst_margin + 0.4f64.atanh()).abs() < 1e-15);

        let i = c(0.0, 1.0);
        let r = check_weaker_condition(&HerglotzSpec::Constant(i), 0.4, &CenterTrajectory::constant(i).unwrap(), &s).unwrap();
        assert!(r.satisfied);

        let bad = HerglotzSpec::Constant(c(-0.5, 0.0));
        assert!(matches!(check_weaker_condition(&bad, 0.4, &one, &s), Err(Error::NotHerglotz { .. })));
    }

    #[test]
    fn lambda_slice_examples() {
        let k = 0.5;
        let p = HerglotzSpec::koebe(k).unwrap();
        let one = CenterTrajectory::constant(c(1.0, 0.0)).unwrap();
        let pk = lambda_slice(&p, k, &one, c(k, 0.0)).unwrap();
        let p0 = lambda_slice(&p, k, &one, c(0.0, 0.0)).unwrap();
        let lam = c(0.2, 0.3);
        let pl = lambda_slice(&p, k, &one, lam).unwrap();
        for z in [c(0.1, 0.2), c(-0.7, 0.5), c(0.95, 0.0)] {
            assert!((pk.eval(z, 1.0).unwrap() - p.eval(z, 1.0).unwrap()).norm() < 1e-12);
            assert_eq!(p0.eval(z, 1.0).unwrap(), c(1.0, 0.0));
            let expected = (c(1.0, 0.0) - lam * z) / (c(1.0, 0.0) + lam * z);
            assert!((pl.eval(z, 1.0).unwrap() - expected).norm() < 1e-13);
        }
        let degenerate = lambda_slice(&p, 0.0, &CenterTrajectory::constant(c(2.0, 1.0)).unwrap(), lam).unwrap();
        assert_eq!(degenerate.eval(c(0.3, 0.0), 0.0).unwrap(), c(2.0, 1.0));
    }

    #[test]
    fn lambda_slice_leaves_imaginary_centers_alone() {
        let p = HerglotzSpec::Constant(c(0.0, 2.0));
        let a = CenterTrajectory::constant(c(0.0, 2.0)).unwrap();
        let s = lambda_slice(&p, 0.5, &a, c(0.1, 0.0)).unwrap();
        assert_eq!(s.eval(c(0.2, 0.0), 0.0).unwrap(), c(0.0, 2.0));
    }

    #[test]
    fn schwarz_pick_examples() {
        let s = ConditionSampling::default();
        assert_eq!(schwarz_pick_residual(&HerglotzSpec::Constant(c(1.0, 0.0)), &s).unwrap(), -2.0);
        let cayley = schwarz_pick_residual(&HerglotzSpec::Catalog(CatalogHerglotz::Cayley), &s).unwrap();
        assert!(cayley.abs() < 1e-8, "{cayley}");
    }

    #[test]
    fn koebe_type_is_strictly_schwarz_pick() {
        // Brute force over a 64 × 64 polar grid of the disk.
        let p = HerglotzSpec::koebe(0.5).unwrap();
        for i in 0..64 {
            let r = 0.999 * i as f64 / 63.0;
            for j in 0..64 {
                let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / 64.0);
                let (w, dw) = p.eval_with_derivative(z, 0.0).unwrap();
                assert!((1.0 - z.norm_sqr()) * dw.norm() - 2.0 * w.re < 0.0);
            }
        }
    }

    #[test]
    fn step_table_lookup() {
        let t = StepTable::new(alloc::vec![0.0, 1.0, 2.5], alloc::vec![1, 2, 3], Some(4.0)).unwrap();
        assert_eq!(*t.locate(0.0).unwrap(), 1);
        assert_eq!(*t.locate(1.0).unwrap(), 2);
        assert_eq!(*t.locate(3.0).unwrap(), 3);
        assert!(t.locate(4.5).is_err());
        assert!(StepTable::new(alloc::vec![0.5], alloc::vec![1], None).is_err());
    }

    #[test]
    fn validation_accepts_catalog_fields() {
        let s = ConditionSampling::for_horizon(1.0);
        let r = validate_herglotz(&HerglotzSpec::koebe(0.3).unwrap(), &s).unwrap();
        assert!(r.satisfied);
    }
}
