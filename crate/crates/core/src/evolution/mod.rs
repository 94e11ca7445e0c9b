//! Herglotz vector fields and the evolution families they generate.

mod dopri;

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;
use core::cell::RefCell;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

pub use dopri::{SolverSettings, BARRIER};

use crate::geometry::{cross_ratio, Mobius, Point};
use crate::herglotz::{lambda_slice, CenterTrajectory, DrivingSpec, HerglotzSpec};
use crate::{Error, Result};

/// `G(z,t) = (τ(t) − z)(1 − τ̄(t)z) p(z,t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    driving: DrivingSpec,
    herglotz: HerglotzSpec,
    breakpoints: Vec<f64>,
    horizon: Option<f64>,
    singular: Vec<f64>,
}

impl VectorField {
    pub fn new(driving: DrivingSpec, herglotz: HerglotzSpec) -> Self {
        let mut breakpoints = driving.breakpoints();
        breakpoints.extend(herglotz.breakpoints());
        breakpoints.sort_by(|a, b| a.total_cmp(b));
        breakpoints.dedup();
        let horizon = match (driving.horizon(), herglotz.horizon()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let singular = herglotz.singular_times();
        VectorField { driving, herglotz, breakpoints, horizon, singular }
    }

    /// The radial field `τ ≡ 0`.
    pub fn radial(herglotz: HerglotzSpec) -> Self {
        Self::new(DrivingSpec::Constant(Complex64::new(0.0, 0.0)), herglotz)
    }

    pub fn driving(&self) -> &DrivingSpec {
        &self.driving
    }

    pub fn herglotz(&self) -> &HerglotzSpec {
        &self.herglotz
    }

    pub fn is_radial(&self) -> bool {
        self.driving.is_zero()
    }

    pub fn horizon(&self) -> Option<f64> {
        self.horizon
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn is_singular_time(&self, t: f64) -> bool {
        self.singular.iter().any(|s| (t - s).abs() <= 0.0)
    }

    /// `G(z,t)`.
    pub fn eval(&self, z: Complex64, t: f64) -> Result<Complex64> {
        self.value_and_derivative(z, t).map(|(g, _)| g)
    }

    /// `(G, ∂G/∂z)` at `(z,t)`.
    pub fn value_and_derivative(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        let tau = self.driving.eval(t)?;
        let (p, dp) = self.herglotz.value_and_derivative(z, t)?;
        let tc = tau.conj();
        let one = Complex64::new(1.0, 0.0);
        let a = tau - z;
        let b = one - tc * z;
        let q = a * b;
        Ok((q * p, (-b - tc * a) * p + q * dp))
    }

    /// First breakpoint or horizon strictly after `t`.
    fn next_stop(&self, t: f64) -> Option<f64> {
        let idx = self.breakpoints.partition_point(|b| *b <= t);
        let bp = self.breakpoints.get(idx).copied();
        match (bp, self.horizon) {
            (Some(b), Some(h)) => Some(b.min(h)),
            (b, h) => b.or(h.filter(|h| *h > t)),
        }
    }
}

/// `(φ_{s,t}(z), φ'_{s,t}(z))`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DerivativePair {
    pub value: Complex64,
    pub derivative: Complex64,
}

type ArcKey = (u64, u64, u64);

#[derive(Debug)]
struct ArcCache {
    arcs: BTreeMap<ArcKey, dopri::Arc>,
    order: VecDeque<ArcKey>,
    capacity: usize,
}

impl ArcCache {
    fn new(capacity: usize) -> Self {
        ArcCache { arcs: BTreeMap::new(), order: VecDeque::new(), capacity }
    }
}

/// The evolution family of a vector field, evaluated lazily.
///
/// Integrated trajectories are cached per starting point `(s, z)`; a cached
/// trajectory is extended when a later time is requested. Because step
/// sequences never depend on the query times, results do not depend on the
/// order of queries or on cache eviction.
///
/// The cache uses interior mutability, so the type is not `Sync`. Cloning
/// gives an independent evaluator with an empty cache, which is how parallel
/// callers obtain one per worker.
#[derive(Debug)]
pub struct EvolutionTrajectory {
    field: VectorField,
    settings: SolverSettings,
    cache: RefCell<ArcCache>,
}

impl Clone for EvolutionTrajectory {
    fn clone(&self) -> Self {
        EvolutionTrajectory {
            field: self.field.clone(),
            settings: self.settings,
            cache: RefCell::new(ArcCache::new(self.cache.borrow().capacity)),
        }
    }
}

impl EvolutionTrajectory {
    pub const DEFAULT_CACHE: usize = 512;

    pub fn new(field: VectorField, settings: SolverSettings) -> Result<Self> {
        settings.validate()?;
        Ok(EvolutionTrajectory { field, settings, cache: RefCell::new(ArcCache::new(Self::DEFAULT_CACHE)) })
    }

    /// Number of trajectories kept in the cache.
    pub fn with_cache_capacity(self, capacity: usize) -> Self {
        self.cache.borrow_mut().capacity = capacity.max(1);
        self
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// `φ_{s,t}(z)`.
    pub fn evolve_point(&self, s: f64, t: f64, z: Complex64) -> Result<Complex64> {
        self.evolve_with_derivative(s, t, z).map(|p| p.value)
    }

    /// `φ_{s,t}(z)` together with `∂φ_{s,t}/∂z`, from the variational equation.
    pub fn evolve_with_derivative(&self, s: f64, t: f64, z: Complex64) -> Result<DerivativePair> {
        if !(s >= 0.0) || !(t >= s) || !t.is_finite() {
            return Err(Error::InvalidParameter("times must satisfy 0 <= s <= t"));
        }
        if !(z.norm() < 1.0) {
            return Err(Error::OutOfDisk { z });
        }
        if t == s {
            return Ok(DerivativePair { value: z, derivative: Complex64::new(1.0, 0.0) });
        }
        let key = (s.to_bits(), z.re.to_bits(), z.im.to_bits());
        let mut cache = self.cache.borrow_mut();
        if !cache.arcs.contains_key(&key) {
            let arc = dopri::Arc::new(&self.field, &self.settings, s, z)?;
            if cache.arcs.len() >= cache.capacity {
                if let Some(old) = cache.order.pop_front() {
                    cache.arcs.remove(&old);
                }
            }
            cache.arcs.insert(key, arc);
            cache.order.push_back(key);
        }
        let arc = cache.arcs.get_mut(&key).expect("arc inserted above");
        debug_assert_eq!(arc.origin(), s);
        let y = arc.state_at(&self.field, &self.settings, t)?;
        if !(y[0].norm() < 1.0) {
            return Err(Error::BarrierViolation { t, modulus: y[0].norm() });
        }
        Ok(DerivativePair { value: y[0], derivative: y[1] })
    }

    /// Accepted steps of the trajectory from `(s, z)`, if it is cached.
    pub fn cached_steps(&self, s: f64, z: Complex64) -> Option<usize> {
        let key = (s.to_bits(), z.re.to_bits(), z.im.to_bits());
        self.cache.borrow().arcs.get(&key).map(|a| a.step_count())
    }

    /// Checks `φ_{s,s} = id` exactly and `φ_{s,t} = φ_{u,t} ∘ φ_{s,u}` on
    /// the given `(s, u, t)` triples and points. The margin is the worst
    /// semigroup defect.
    pub fn check_evolution_axioms(
        &self,
        triples: &[(f64, f64, f64)],
        points: &[Complex64],
        tolerance: f64,
    ) -> Result<crate::herglotz::ConditionReport> {
        let mut report = crate::herglotz::ConditionReport::new(tolerance);
        for &(s, u, t) in triples {
            if !(s <= u && u <= t) {
                return Err(Error::InvalidParameter("axiom triples must satisfy s <= u <= t"));
            }
            for &z in points {
                if self.evolve_point(s, s, z)? != z {
                    report.record(f64::INFINITY, z, s);
                    continue;
                }
                let direct = self.evolve_point(s, t, z)?;
                let mid = self.evolve_point(s, u, z)?;
                let composed = self.evolve_point(u, t, mid)?;
                report.record((direct - composed).norm(), z, t);
            }
        }
        Ok(report)
    }

    /// Samples `a(t) = φ_{0,t}(0)` at `0, step, 2·step, …` up to `t_max`.
    pub fn center_trajectory(&self, t_max: f64, step: f64) -> Result<Vec<(f64, Complex64)>> {
        if !(step > 0.0) || !(t_max >= 0.0) {
            return Err(Error::InvalidParameter("center trajectory needs step > 0 and t_max >= 0"));
        }
        let n = (t_max / step).round() as usize;
        let zero = Complex64::new(0.0, 0.0);
        (0..=n)
            .map(|j| {
                let t = if j == n { t_max } else { j as f64 * step };
                self.evolve_point(0.0, t, zero).map(|a| (t, a))
            })
            .collect()
    }
}

/// The evolution family of `G_λ = (τ − z)(1 − τ̄z) p_λ`, where `p_λ` is the
/// λ-slice of the template's Herglotz function.
pub fn lambda_family(
    template: &EvolutionTrajectory,
    k: f64,
    center: &CenterTrajectory,
    lambda: Complex64,
) -> Result<EvolutionTrajectory> {
    let p = lambda_slice(template.field().herglotz(), k, center, lambda)?;
    EvolutionTrajectory::new(VectorField::new(template.field().driving().clone(), p), *template.settings())
}

/// `φ^λ_{s,t}(z)`.
pub fn lambda_evolution(
    template: &EvolutionTrajectory,
    k: f64,
    center: &CenterTrajectory,
    lambda: Complex64,
    s: f64,
    t: f64,
    z: Complex64,
) -> Result<Complex64> {
    lambda_family(template, k, center, lambda)?.evolve_point(s, t, z)
}

/// Result of [`holomorphic_motion_probe`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HolomorphicMotionReport {
    /// `|φ⁰(z₄) − M(z₄)|` for the Möbius map `M` fitted through three anchors.
    pub mobius_defect: f64,
    /// `max |ψ_0(z) − z|`.
    pub identity_defect: f64,
    /// `min |ψ_λ(z_i) − ψ_λ(z_j)|` over sampled λ and pairs.
    pub min_separation: f64,
    /// Circle-mean residual of `λ ↦ ψ_λ(z)` around `λ = 0`.
    pub holomorphy_residual: f64,
    pub passed: bool,
}

/// Probes `ψ_λ = (φ⁰_{s,t})⁻¹ ∘ φ^λ_{s,t}` for injectivity in `z` and
/// holomorphy in `λ`.
///
/// `φ⁰` is Möbius when `a ≡ 1`; its inverse is taken from a three-point fit,
/// and a fourth point must agree within `1e−8`.
#[allow(clippy::too_many_arguments)]
pub fn holomorphic_motion_probe(
    template: &EvolutionTrajectory,
    k: f64,
    center: &CenterTrajectory,
    s: f64,
    t: f64,
    points: &[Complex64],
    lambdas: &[Complex64],
    holomorphy_radius: f64,
) -> Result<HolomorphicMotionReport> {
    let c = |re, im| Complex64::new(re, im);
    let zero_family = lambda_family(template, k, center, c(0.0, 0.0))?;
    let anchors = [c(0.0, 0.0), c(0.4, 0.0), c(0.0, 0.4)];
    let images = [
        zero_family.evolve_point(s, t, anchors[0])?,
        zero_family.evolve_point(s, t, anchors[1])?,
        zero_family.evolve_point(s, t, anchors[2])?,
    ];
    let fitted = Mobius::from_three_points(anchors, images)?;
    let probe = c(-0.4, 0.0);
    let mobius_defect = (fitted.apply(probe) - zero_family.evolve_point(s, t, probe)?).norm();
    if !(mobius_defect <= 1e-8) {
        return Err(Error::CannotInvert { defect: mobius_defect });
    }
    let inverse = fitted.inverse();
    let psi = |family: &EvolutionTrajectory, z: Complex64| -> Result<Complex64> {
        match inverse.eval(Point::Finite(family.evolve_point(s, t, z)?)) {
            Point::Finite(w) => Ok(w),
            Point::Infinity => Err(Error::CannotInvert { defect: f64::INFINITY }),
        }
    };

    let mut identity_defect: f64 = 0.0;
    for &z in points {
        identity_defect = identity_defect.max((psi(&zero_family, z)? - z).norm());
    }

    let mut min_separation = f64::INFINITY;
    for &lambda in lambdas {
        let family = lambda_family(template, k, center, lambda)?;
        let moved: Vec<Complex64> = points.iter().map(|z| psi(&family, *z)).collect::<Result<_>>()?;
        for i in 0..moved.len() {
            for j in i + 1..moved.len() {
                min_separation = min_separation.min((moved[i] - moved[j]).norm());
            }
        }
    }

    let mut sums = alloc::vec![c(0.0, 0.0); points.len()];
    for j in 0..16 {
        let lambda = Complex64::from_polar(holomorphy_radius, 2.0 * core::f64::consts::PI * j as f64 / 16.0);
        let family = lambda_family(template, k, center, lambda)?;
        for (acc, z) in sums.iter_mut().zip(points) {
            *acc += psi(&family, *z)?;
        }
    }
    let mut holomorphy_residual: f64 = 0.0;
    for (acc, z) in sums.iter().zip(points) {
        holomorphy_residual = holomorphy_residual.max((*acc / 16.0 - psi(&zero_family, *z)?).norm());
    }

    let passed = identity_defect <= 1e-8 && min_separation > 0.0 && holomorphy_residual <= 1e-8;
    Ok(HolomorphicMotionReport { mobius_defect, identity_defect, min_separation, holomorphy_residual, passed })
}

/// `|CR(φ(z₁..z₄)) − CR(z₁..z₄)|`.
pub fn cross_ratio_defect(trajectory: &EvolutionTrajectory, s: f64, t: f64, z: [Complex64; 4]) -> Result<f64> {
    let before = cross_ratio(z[0], z[1], z[2], z[3]);
    let w: Vec<Complex64> = z.iter().map(|p| trajectory.evolve_point(s, t, *p)).collect::<Result<_>>()?;
    let after = cross_ratio(w[0], w[1], w[2], w[3]);
    match (before, after) {
        (Point::Finite(a), Point::Finite(b)) => Ok((a - b).norm()),
        _ => Err(Error::InvalidParameter("cross-ratio points must be distinct")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herglotz::StepTable;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn radial(p: HerglotzSpec) -> EvolutionTrajectory {
        EvolutionTrajectory::new(VectorField::radial(p), SolverSettings::default()).unwrap()
    }

    #[test]
    fn identity_flow_is_exponential_decay() {
        let e = radial(HerglotzSpec::Constant(c(1.0, 0.0)));
        let w = e.evolve_point(0.0, 1.0, c(0.5, 0.0)).unwrap();
        assert!((w.re - 0.5 * (-1.0f64).exp()).abs() < 1e-9);
        assert!((w.re - 0.183_939_720_585_721_2).abs() < 1e-9);
        let d = e.evolve_with_derivative(0.0, 2.0, c(0.1, 0.2)).unwrap();
        assert!((d.derivative - c((-2.0f64).exp(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn equal_times_return_the_point_exactly() {
        let e = radial(HerglotzSpec::koebe(0.5).unwrap());
        let z = c(0.3, -0.7);
        assert_eq!(e.evolve_point(1.5, 1.5, z).unwrap(), z);
    }

    #[test]
    fn koebe_flow_matches_inverse_of_chain() {
        // f1(w) e^t = f1(z) e^s with f1(z) = z/(1 − kz)²; solve for w by Newton.
        let k = 0.5;
        let e = radial(HerglotzSpec::koebe(k).unwrap());
        let f = |z: Complex64| z / ((c(1.0, 0.0) - k * z) * (c(1.0, 0.0) - k * z));
        let df = |z: Complex64| (c(1.0, 0.0) + k * z) / (c(1.0, 0.0) - k * z).powi(3);
        for (s, t, z) in [(0.0, 1.0, c(0.5, 0.3)), (0.5, 3.0, c(-0.8, 0.1)), (0.0, 10.0, c(0.9, 0.0))] {
            let target = f(z) * (s - t).exp();
            let mut w = z * (s - t).exp();
            for _ in 0..50 {
                w -= (f(w) - target) / df(w);
            }
            let got = e.evolve_point(s, t, z).unwrap();
            assert!((got - w).norm() <= 1e-9 * w.norm().max(1e-3), "{got} vs {w}");
        }
    }

    #[test]
    fn chordal_flow_closed_form() {
        // G = (1 − z)² gives φ_{s,t}(z) = 1 − (1 − z)/(1 + (t − s)(1 − z)).
        let field = VectorField::new(DrivingSpec::constant(c(1.0, 0.0)).unwrap(), HerglotzSpec::Constant(c(1.0, 0.0)));
        let e = EvolutionTrajectory::new(field, SolverSettings::default()).unwrap();
        for (s, t, z) in [(0.0, 1.0, c(0.2, 0.3)), (1.0, 4.0, c(-0.9, 0.0))] {
            let one = c(1.0, 0.0);
            let expected = one - (one - z) / (one + (t - s) * (one - z));
            assert!((e.evolve_point(s, t, z).unwrap() - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn queries_do_not_depend_on_history() {
        let e1 = radial(HerglotzSpec::koebe(0.5).unwrap());
        let e2 = radial(HerglotzSpec::koebe(0.5).unwrap());
        let z = c(0.4, 0.4);
        let direct = e1.evolve_point(0.0, 2.3, z).unwrap();
        for t in [0.1, 5.0, 1.7] {
            e2.evolve_point(0.0, t, z).unwrap();
        }
        assert_eq!(e2.evolve_point(0.0, 2.3, z).unwrap().re.to_bits(), direct.re.to_bits());
        assert_eq!(e2.evolve_point(0.0, 2.3, z).unwrap().im.to_bits(), direct.im.to_bits());
        let small = e1.clone().with_cache_capacity(1);
        small.evolve_point(0.0, 1.0, c(0.1, 0.0)).unwrap();
        assert_eq!(small.evolve_point(0.0, 2.3, z).unwrap(), direct);
    }

    #[test]
    fn semigroup_defect_is_small() {
        let e = radial(HerglotzSpec::koebe(0.5).unwrap());
        let r = e
            .check_evolution_axioms(&[(0.0, 0.7, 2.0), (0.3, 0.4, 5.0)], &[c(0.5, 0.5), c(-0.9, 0.1)], 1e-7)
            .unwrap();
        assert!(r.satisfied, "{r:?}");
    }

    #[test]
    fn table_breakpoints_are_landed_exactly() {
        let table = StepTable::new(alloc::vec![0.0, 0.5], alloc::vec![HerglotzSpec::Constant(c(1.0, 0.0)), HerglotzSpec::Constant(c(2.0, 0.0))], Some(2.0)).unwrap();
        let e = radial(HerglotzSpec::Table(table));
        let w = e.evolve_point(0.0, 1.5, c(0.5, 0.0)).unwrap();
        assert!((w.re - 0.5 * (-0.5f64 - 2.0).exp()).abs() < 1e-10);
        assert!(matches!(e.evolve_point(0.0, 2.5, c(0.5, 0.0)), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn out_of_disk_and_bad_times_are_rejected() {
        let e = radial(HerglotzSpec::Constant(c(1.0, 0.0)));
        assert!(matches!(e.evolve_point(0.0, 1.0, c(1.0, 0.0)), Err(Error::OutOfDisk { .. })));
        assert!(e.evolve_point(2.0, 1.0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn lambda_zero_flow_is_mobius() {
        let driving = DrivingSpec::steps(StepTable::new(alloc::vec![0.0, 0.6], alloc::vec![c(0.6, 0.8), c(0.0, -1.0)], None).unwrap()).unwrap();
        let template = EvolutionTrajectory::new(
            VectorField::new(driving, HerglotzSpec::koebe(0.5).unwrap()),
            SolverSettings::default(),
        )
        .unwrap();
        let one = CenterTrajectory::constant(c(1.0, 0.0)).unwrap();
        let fam = lambda_family(&template, 0.5, &one, c(0.0, 0.0)).unwrap();
        let d = cross_ratio_defect(&fam, 0.0, 1.5, [c(0.0, 0.0), c(0.5, 0.1), c(-0.3, 0.6), c(0.2, -0.7)]).unwrap();
        assert!(d < 1e-8, "{d}");
    }
}
