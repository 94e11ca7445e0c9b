//! Loewner chains `f_s = lim_{t→∞} M_t ∘ φ_{s,t}` and the range diagnostic.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use crate::evolution::{EvolutionTrajectory, SolverSettings, VectorField};
use crate::herglotz::{DrivingSpec, EssentialDriving, HerglotzSpec, RadialProfile};
use crate::quadrature::trapezoid;
use crate::{Error, Result};

/// How the iterates `φ_{s,t}` are normalised before the limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Normalization {
    /// `φ_{s,t}(z)/φ'_{0,t}(0)`; requires `τ ≡ 0`.
    Radial,
    /// `h_t(φ_{s,t}(z)) (1 − |a|²)/φ'_{0,t}(0)` with `a = φ_{0,t}(0)` and
    /// `h_t(w) = (w − a)/(1 − āw)`.
    Mobius,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainSettings {
    /// Largest `t − s` used before giving up.
    pub horizon: f64,
    /// Required relative size of the last increment.
    pub tolerance: f64,
    /// Spacing of the iterates in `t`.
    pub step: f64,
    /// Apply order-1 Richardson extrapolation to the geometric tail.
    pub richardson: bool,
}

impl Default for ChainSettings {
    fn default() -> Self {
        ChainSettings { horizon: 40.0, tolerance: 1e-9, step: 1.0, richardson: true }
    }
}

/// A chain value with its convergence evidence.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChainValue {
    pub value: Complex64,
    /// Size of the last increment.
    pub increment: f64,
    /// Size of the tail correction that was added.
    pub residual: f64,
    /// `t` of the last iterate.
    pub time: f64,
}

/// Evaluates `f_s(z)` through the evolution family.
#[derive(Clone, Debug)]
pub struct ChainEvaluator {
    trajectory: EvolutionTrajectory,
    settings: ChainSettings,
    mode: Normalization,
}

impl ChainEvaluator {
    pub fn new(trajectory: EvolutionTrajectory, settings: ChainSettings, mode: Normalization) -> Result<Self> {
        if mode == Normalization::Radial && !trajectory.field().is_radial() {
            return Err(Error::InvalidParameter("radial normalisation needs tau = 0"));
        }
        if !(settings.horizon > 0.0 && settings.step > 0.0 && settings.tolerance > 0.0) {
            return Err(Error::InvalidParameter("chain horizon, step and tolerance must be positive"));
        }
        Ok(ChainEvaluator { trajectory, settings, mode })
    }

    /// Radial chain of `p` with default settings.
    pub fn radial(p: HerglotzSpec, solver: SolverSettings, settings: ChainSettings) -> Result<Self> {
        Self::new(EvolutionTrajectory::new(VectorField::radial(p), solver)?, settings, Normalization::Radial)
    }

    pub fn trajectory(&self) -> &EvolutionTrajectory {
        &self.trajectory
    }

    pub fn settings(&self) -> &ChainSettings {
        &self.settings
    }

    pub fn mode(&self) -> Normalization {
        self.mode
    }

    /// The normalised iterate at time `t`.
    pub fn iterate(&self, s: f64, z: Complex64, t: f64) -> Result<Complex64> {
        let base = self.trajectory.evolve_with_derivative(0.0, t, Complex64::new(0.0, 0.0))?;
        let w = self.trajectory.evolve_point(s, t, z)?;
        if base.derivative.norm() == 0.0 {
            return Err(Error::DerivativeDegenerate { z: Complex64::new(0.0, 0.0) });
        }
        Ok(match self.mode {
            Normalization::Radial => w / base.derivative,
            Normalization::Mobius => {
                let a = base.value;
                let h = (w - a) / (Complex64::new(1.0, 0.0) - a.conj() * w);
                h * (1.0 - a.norm_sqr()) / base.derivative
            }
        })
    }

    /// `f_s(z)`.
    pub fn eval(&self, s: f64, z: Complex64) -> Result<Complex64> {
        self.eval_detailed(s, z).map(|v| v.value)
    }

    /// `f_s(z)` with the last increment and the tail correction.
    pub fn eval_detailed(&self, s: f64, z: Complex64) -> Result<ChainValue> {
        let st = &self.settings;
        let steps = (st.horizon / st.step).floor() as usize;
        let mut prev = self.iterate(s, z, s)?;
        let mut prev_inc: Option<f64> = None;
        for n in 1..=steps {
            let t = s + n as f64 * st.step;
            let x = self.iterate(s, z, t)?;
            let d = x - prev;
            let inc = d.norm();
            if inc <= st.tolerance * x.norm().max(1.0) {
                let (value, residual) = match (st.richardson, prev_inc) {
                    (true, Some(p)) if p > 0.0 => {
                        let q = (inc / p).min(0.9);
                        let corr = d * (q / (1.0 - q));
                        (x + corr, corr.norm())
                    }
                    _ => (x, 0.0),
                };
                return Ok(ChainValue { value, increment: inc, residual, time: t });
            }
            prev = x;
            prev_inc = Some(inc);
            if n == steps {
                let previous = self.iterate(s, z, t - st.step)?;
                return Err(Error::Convergence { last: x, previous, horizon: t });
            }
        }
        Err(Error::Convergence { last: prev, previous: prev, horizon: s })
    }

    /// Iterates at the requested times, without any convergence claim.
    pub fn convergence_profile(&self, s: f64, z: Complex64, times: &[f64]) -> Result<Vec<(f64, Complex64)>> {
        times.iter().map(|&t| self.iterate(s, z, t).map(|x| (t, x))).collect()
    }

    /// Solves `f_t(w) = f_s(z)` by Newton from `φ_{s,t}(z)` and returns
    /// `(w, |f_t(w) − f_s(z)|)`.
    pub fn nesting_probe(&self, s: f64, t: f64, z: Complex64) -> Result<(Complex64, f64)> {
        let target = self.eval(s, z)?;
        let mut w = self.trajectory.evolve_point(s, t, z)?;
        let h = 1e-6;
        let mut residual = f64::INFINITY;
        for _ in 0..20 {
            let fw = self.eval(t, w)?;
            residual = (fw - target).norm();
            if residual <= 1e-12 * target.norm().max(1.0) {
                break;
            }
            let d = (self.eval(t, w + h)? - self.eval(t, w - h)?) / (2.0 * h);
            if d.norm() == 0.0 {
                return Err(Error::DerivativeDegenerate { z: w });
            }
            let next = w - (fw - target) / d;
            if !(next.norm() < 1.0) {
                return Err(Error::OutOfDisk { z: next });
            }
            w = next;
        }
        Ok((w, residual))
    }
}

/// Verdict of [`range_diagnostic`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RangeVerdict {
    Plane,
    DiskLike,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RangeSettings {
    pub horizon: f64,
    pub step: f64,
    /// `∫(1 − |a|²)` above this counts as divergent.
    pub integral_threshold: f64,
    /// `|c_T|` below this counts as decayed.
    pub decay_threshold: f64,
    /// Mean of `1 − |a|²` over the last unit of time below this counts as converged.
    pub tail_threshold: f64,
}

impl Default for RangeSettings {
    fn default() -> Self {
        RangeSettings { horizon: 40.0, step: 0.05, integral_threshold: 10.0, decay_threshold: 1e-3, tail_threshold: 1e-6 }
    }
}

/// Observables behind the plane / disk dichotomy.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RangeReport {
    pub horizon: f64,
    pub times: Vec<f64>,
    /// `a(t) = φ_{0,t}(0)`.
    pub centers: Vec<Complex64>,
    /// `|c_t| = |φ'_{0,t}(0)|/(1 − |a(t)|²)`.
    pub derivative_decay: Vec<f64>,
    /// `Re q(0,t)`.
    pub q_rate: Vec<f64>,
    /// `∫₀ᵀ (1 − |a|²) dt`.
    pub integral_estimate: f64,
    /// `∫₀ᵀ Re q dt`; agrees with `−log |c_T|`.
    pub integral_re_q: f64,
    /// Mean of `1 − |a|²` over `[T − 1, T]`.
    pub tail_increment: f64,
    pub final_decay: f64,
    /// `max |p₁'(0,t)|/(2 Re p₁(0,t))` over the samples.
    pub observed_nu: f64,
    pub verdict: RangeVerdict,
    pub settings: RangeSettings,
    pub warnings: Vec<String>,
}

/// Samples `a(t)`, `c_t` and `Re q(0,t)` on `[0, T]` and classifies the range
/// of the chain as the plane, a disk-like domain, or undecided.
pub fn range_diagnostic(field: VectorField, solver: SolverSettings, settings: RangeSettings) -> Result<RangeReport> {
    if !(settings.horizon >= 1.0) || !(settings.step > 0.0) {
        return Err(Error::InvalidParameter("range diagnostic needs horizon >= 1 and step > 0"));
    }
    let trajectory = EvolutionTrajectory::new(field, solver)?;
    let field = trajectory.field();
    let zero = Complex64::new(0.0, 0.0);
    let n = (settings.horizon / settings.step).round() as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut centers = Vec::with_capacity(n + 1);
    let mut decay = Vec::with_capacity(n + 1);
    let mut q_rate = Vec::with_capacity(n + 1);
    let mut defect = Vec::with_capacity(n + 1);
    let mut observed_nu: f64 = 0.0;
    let mut re_p_max: f64 = 0.0;
    for j in 0..=n {
        let t = if j == n { settings.horizon } else { j as f64 * settings.step };
        let d = trajectory.evolve_with_derivative(0.0, t, zero)?;
        let a = d.value;
        let one_minus = 1.0 - a.norm_sqr();
        let te = if field.is_singular_time(t) { t + solver.singular_offset } else { t };
        let tau = field.driving().eval(te)?;
        let (p, dp) = field.herglotz().value_and_derivative(a, te)?;
        let kappa = (tau - a) / (Complex64::new(1.0, 0.0) - a.conj() * tau);
        let p1 = p;
        let dp1 = dp * one_minus;
        let den = (Complex64::new(1.0, 0.0) + a.conj() * kappa).norm_sqr();
        let q = one_minus / den * ((1.0 + kappa.norm_sqr()) * p1 - kappa * dp1).re;
        if p1.re > 0.0 {
            observed_nu = observed_nu.max(dp1.norm() / (2.0 * p1.re));
        }
        re_p_max = re_p_max.max(p1.norm());
        times.push(t);
        centers.push(a);
        decay.push(d.derivative.norm() / one_minus);
        q_rate.push(q);
        defect.push(one_minus);
    }
    let integral_estimate = trapezoid(&times, &defect);
    let integral_re_q = trapezoid(&times, &q_rate);
    let tail_start = times.partition_point(|t| *t < settings.horizon - 1.0);
    let tail_increment = trapezoid(&times[tail_start..], &defect[tail_start..]) / (settings.horizon - times[tail_start]);
    let final_decay = *decay.last().unwrap();
    let verdict = if integral_estimate > settings.integral_threshold && final_decay < settings.decay_threshold {
        RangeVerdict::Plane
    } else if tail_increment < settings.tail_threshold && final_decay > settings.decay_threshold {
        RangeVerdict::DiskLike
    } else {
        RangeVerdict::Inconclusive
    };
    let mut warnings = Vec::new();
    if let Some(j) = defect.iter().position(|d| *d < 1e-12) {
        warnings.push(alloc::format!(
            "1 - |a|^2 drops below 1e-12 at t = {}; later samples are not resolved in double precision",
            times[j]
        ));
    }
    if re_p_max > 1e6 {
        warnings.push(String::from("p(a(t), t) is unbounded on the samples; q-rate bounds are heuristic"));
    }
    Ok(RangeReport {
        horizon: settings.horizon,
        times,
        centers,
        derivative_decay: decay,
        q_rate,
        integral_estimate,
        integral_re_q,
        tail_increment,
        final_decay,
        observed_nu,
        verdict,
        settings,
        warnings,
    })
}

/// The Herglotz function and driving of the essential example for a profile `ρ`.
pub fn essential_example_driving(profile: RadialProfile) -> Result<(HerglotzSpec, DrivingSpec)> {
    let driving = EssentialDriving::new(profile)?;
    Ok((HerglotzSpec::essential(profile)?, DrivingSpec::Essential(alloc::boxed::Box::new(driving))))
}
