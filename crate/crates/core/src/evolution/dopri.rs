//! Dormand–Prince 5(4) with Hairer's continuous extension, specialised to the
//! state `(w, ∂w/∂z)` of a Loewner–Kufarev trajectory.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use super::VectorField;
use crate::{Error, Result};

pub(crate) type State = [Complex64; 2];

/// `|w|` at or above this value counts as leaving the disk.
pub const BARRIER: f64 = 1.0 - 1e-14;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size control for the evolution integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverSettings {
    /// Relative local error bound per step.
    pub rtol: f64,
    /// Absolute floor of the error scale. Kept tiny so that error control is
    /// relative even when `w` decays like `e^{−t}`.
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Offset used when the trajectory starts at a singular time of the field.
    pub singular_offset: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { rtol: 1e-10, atol: 1e-30, max_step: 1.0, max_steps: 2_000_000, singular_offset: 1e-12 }
    }
}

impl SolverSettings {
    pub fn rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) || !(self.atol >= 0.0) || !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter("solver tolerances and step bound must be positive"));
        }
        if self.max_steps == 0 || !(self.singular_offset >= 0.0) {
            return Err(Error::InvalidParameter("invalid solver step budget or singular offset"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct DenseStep {
    t0: f64,
    t1: f64,
    y0: State,
    r: [State; 4],
}

impl DenseStep {
    fn eval(&self, t: f64) -> State {
        let th = (t - self.t0) / (self.t1 - self.t0);
        let th1 = 1.0 - th;
        let mut out = self.y0;
        for (i, o) in out.iter_mut().enumerate() {
            *o += (self.r[0][i] + (self.r[1][i] + (self.r[2][i] + self.r[3][i] * th1) * th) * th1) * th;
        }
        out
    }
}

/// One integrated trajectory `t ↦ (φ_{s,t}(z), φ'_{s,t}(z))`, extended on demand.
///
/// The step sequence depends only on the field, `s`, `z` and the settings,
/// never on which times were queried, so every query is a pure function.
#[derive(Clone, Debug)]
pub(crate) struct Arc {
    start: f64,
    origin: f64,
    z: Complex64,
    steps: Vec<DenseStep>,
    t: f64,
    y: State,
    k1: State,
    h: f64,
    rejected_last: bool,
    failure: Option<Error>,
}

fn rhs(field: &VectorField, t: f64, y: &State) -> Result<State> {
    let (g, dg) = field.value_and_derivative(y[0], t)?;
    Ok([g, dg * y[1]])
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for i in 0..2 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] += acc * h;
    }
    out
}

impl Arc {
    pub(crate) fn new(field: &VectorField, settings: &SolverSettings, s: f64, z: Complex64) -> Result<Self> {
        let start = if field.is_singular_time(s) { s + settings.singular_offset } else { s };
        let y = [z, Complex64::new(1.0, 0.0)];
        let k1 = rhs(field, start, &y)?;
        let mut arc = Arc {
            start,
            origin: s,
            z,
            steps: Vec::new(),
            t: start,
            y,
            k1,
            h: 0.0,
            rejected_last: false,
            failure: None,
        };
        arc.h = arc.initial_step(field, settings)?;
        Ok(arc)
    }

    fn scale(settings: &SolverSettings, a: &State, b: &State, i: usize) -> f64 {
        settings.atol + settings.rtol * a[i].norm().max(b[i].norm())
    }

    fn norm(settings: &SolverSettings, y: &State, v: &State) -> f64 {
        let mut m: f64 = 0.0;
        #[allow(clippy::needless_range_loop)]
        for i in 0..2 {
            m = m.max(v[i].norm() / Self::scale(settings, y, y, i));
        }
        m
    }

    fn initial_step(&self, field: &VectorField, settings: &SolverSettings) -> Result<f64> {
        let d0 = Self::norm(settings, &self.y, &self.y);
        let d1 = Self::norm(settings, &self.y, &self.k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(settings.max_step);
        let y1 = axpy(&self.y, h0, &[(1.0, &self.k1)]);
        let d2 = match rhs(field, self.t + h0, &y1) {
            Ok(k) => {
                let diff = [k[0] - self.k1[0], k[1] - self.k1[1]];
                Self::norm(settings, &self.y, &diff) / h0
            }
            Err(_) => f64::INFINITY,
        };
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
        // With a zero state the relative scale vanishes and the estimate
        // collapses; the step controller recovers from any positive start.
        let floor = 1e3 * Self::min_step(self.t);
        Ok((100.0 * h0).min(h1).min(settings.max_step).max(floor.min(settings.max_step)))
    }

    pub(crate) fn origin(&self) -> f64 {
        self.origin
    }

    fn min_step(t: f64) -> f64 {
        (16.0 * f64::EPSILON * t.abs()).max(1e-22)
    }

    fn step(&mut self, field: &VectorField, settings: &SolverSettings) -> Result<()> {
        let mut h = self.h.min(settings.max_step);
        let limit = field.next_stop(self.t);
        loop {
            let mut landing = None;
            if let Some(b) = limit {
                if self.t + h >= b - 1e-13 * b.abs().max(1.0) {
                    h = b - self.t;
                    landing = Some(b);
                }
            }
            if h < Self::min_step(self.t) {
                return Err(Error::IntegrationFailure { last_good_time: self.t });
            }
            let t = self.t;
            let y = self.y;
            let k1 = self.k1;
            let attempt = (|| -> Result<(State, [State; 7], State)> {
                let k2 = rhs(field, t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
                let k3 = rhs(field, t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
                let k4 = rhs(field, t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
                let k5 = rhs(field, t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
                let k6 = rhs(field, t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
                let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
                let k7 = rhs(field, t + h, &y_new)?;
                let err = axpy(
                    &[Complex64::new(0.0, 0.0); 2],
                    h,
                    &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                );
                Ok((y_new, [k1, k2, k3, k4, k5, k6, k7], err))
            })();
            let (y_new, ks, err) = match attempt {
                Ok(v) => v,
                // Extrapolation errors are genuine; anything else at a trial
                // point (a pole hit off the trajectory) just shrinks the step.
                Err(e @ Error::Extrapolation { .. }) => return Err(e),
                Err(_) => {
                    h *= 0.5;
                    self.rejected_last = true;
                    continue;
                }
            };
            if !(y_new[0].norm() < BARRIER) {
                h *= 0.5;
                self.rejected_last = true;
                continue;
            }
            let mut err_norm: f64 = 0.0;
            #[allow(clippy::needless_range_loop)]
            for i in 0..2 {
                err_norm = err_norm.max(err[i].norm() / Self::scale(settings, &y, &y_new, i));
            }
            if !(err_norm <= 1.0) {
                let fac = if err_norm.is_finite() { (0.9 * err_norm.powf(-0.2)).max(0.2) } else { 0.2 };
                h *= fac.min(0.9);
                self.rejected_last = true;
                continue;
            }
            let t_new = landing.unwrap_or(t + h);
            let ydiff = [y_new[0] - y[0], y_new[1] - y[1]];
            let mut r = [[Complex64::new(0.0, 0.0); 2]; 4];
            for i in 0..2 {
                let bspl = ks[0][i] * h - ydiff[i];
                r[0][i] = ydiff[i];
                r[1][i] = bspl;
                r[2][i] = ydiff[i] - ks[6][i] * h - bspl;
                r[3][i] = (ks[0][i] * D1 + ks[2][i] * D3 + ks[3][i] * D4 + ks[4][i] * D5 + ks[5][i] * D6 + ks[6][i] * D7) * h;
            }
            self.steps.push(DenseStep { t0: t, t1: t_new, y0: y, r });
            let facmax = if self.rejected_last { 1.0 } else { 10.0 };
            let fac = if err_norm == 0.0 { facmax } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, facmax) };
            self.h = h * fac;
            self.rejected_last = false;
            self.t = t_new;
            self.y = y_new;
            self.k1 = if landing.is_some() { rhs(field, t_new, &y_new)? } else { ks[6] };
            return Ok(());
        }
    }

    fn advance_to(&mut self, field: &VectorField, settings: &SolverSettings, target: f64) -> Result<()> {
        if let Some(e) = &self.failure {
            if self.t < target {
                return Err(e.clone());
            }
        }
        while self.t < target {
            if self.steps.len() >= settings.max_steps {
                let e = Error::StepBudget { last_good_time: self.t };
                self.failure = Some(e.clone());
                return Err(e);
            }
            if let Err(e) = self.step(field, settings) {
                self.failure = Some(e.clone());
                return Err(e);
            }
        }
        Ok(())
    }

    /// `(φ_{s,t}(z), φ'_{s,t}(z))`.
    pub(crate) fn state_at(&mut self, field: &VectorField, settings: &SolverSettings, t: f64) -> Result<State> {
        if t <= self.start {
            return Ok([self.z, Complex64::new(1.0, 0.0)]);
        }
        if let Some(end) = field.horizon() {
            if t > end {
                return Err(Error::Extrapolation { t });
            }
        }
        self.advance_to(field, settings, t)?;
        if t == self.t {
            return Ok(self.y);
        }
        let idx = self.steps.partition_point(|s| s.t0 <= t) - 1;
        let step = &self.steps[idx];
        if t == step.t0 {
            return Ok(step.y0);
        }
        if t >= step.t1 {
            return Ok(self.y);
        }
        Ok(step.eval(t))
    }

    pub(crate) fn step_count(&self) -> usize {
        self.steps.len()
    }
}
