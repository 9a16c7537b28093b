//! Driving functions phi: the two hyperbolic rules, the smooth-Phi family,
//! and the argmin-potential families, plus the scaling-detection rule.
//!
//! Neighbor ordering convention used throughout the crate: for a site x the
//! slice of 2d neighbor values is [u(x+e_1), u(x-e_1), ..., u(x+e_d), u(x-e_d)],
//! and the same ordering applies to difference vectors (v_1, v_{-1}, ...).

use crate::error::{GrowthError, Result};
use crate::lattice::ScalingMode;
use std::sync::Arc;

/// Absolute bisection tolerance on argmin locations. The consistency lab
/// divides increments by eps >= 1e-6, so this keeps ratio error <= 1e-6.
pub const TOL_ARGMIN: f64 = 1e-12;

/// One-sided derivatives below this magnitude count as zero when locating
/// flat minimizing intervals.
pub const FLAT_DERIV_TOL: f64 = 1e-13;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type OneSidedFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;
type PhiFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Symmetric convex potential V with minimum 0 at 0.
#[derive(Clone)]
pub enum Potential {
    /// V(y) = y^k for an even k >= 2.
    PowerEven { k: u32 },
    /// V(y) = |y|^(2+delta), 0 < delta < 1.
    FractionalPower { delta: f64 },
    /// V(y) = |y| (solid-on-solid).
    AbsoluteValue,
    /// V = 0 on [-a, a], V > 0 outside (restricted solid-on-solid).
    FlatWell { a: f64 },
    /// User potential with its (left, right) one-sided derivative.
    CustomConvex { v: ScalarFn, dv: OneSidedFn },
}

impl Potential {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Potential::PowerEven { k } => y.powi(*k as i32),
            Potential::FractionalPower { delta } => y.abs().powf(2.0 + delta),
            Potential::AbsoluteValue => y.abs(),
            Potential::FlatWell { a } => {
                let t = (y.abs() - a).max(0.0);
                t * t
            }
            Potential::CustomConvex { v, .. } => v(y),
        }
    }

    /// (left, right) one-sided derivatives.
    pub fn one_sided(&self, y: f64) -> (f64, f64) {
        match self {
            Potential::PowerEven { k } => {
                let g = *k as f64 * y.powi(*k as i32 - 1);
                (g, g)
            }
            Potential::FractionalPower { delta } => {
                let g = (2.0 + delta) * y.signum() * y.abs().powf(1.0 + delta);
                (g, g)
            }
            Potential::AbsoluteValue => {
                if y > 0.0 {
                    (1.0, 1.0)
                } else if y < 0.0 {
                    (-1.0, -1.0)
                } else {
                    (-1.0, 1.0)
                }
            }
            Potential::FlatWell { a } => {
                let g = 2.0 * (y.abs() - a).max(0.0) * y.signum();
                (g, g)
            }
            Potential::CustomConvex { dv, .. } => dv(y),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Potential::PowerEven { .. } => "power_even",
            Potential::FractionalPower { .. } => "fractional_power",
            Potential::AbsoluteValue => "absolute_value",
            Potential::FlatWell { .. } => "flat_well",
            Potential::CustomConvex { .. } => "custom_convex",
        }
    }

    /// Symmetry, convexity (nondecreasing one-sided derivative), V(0) = 0 and
    /// V >= 0 on a probe grid. Returns the first violation, if any.
    pub fn probe_invariants(&self, half_width: f64, n: usize) -> Option<String> {
        if self.eval(0.0).abs() > 1e-14 {
            return Some("V(0) != 0".into());
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        let mut prev_right = f64::NEG_INFINITY;
        for i in 0..n {
            let y = -half_width + i as f64 * h;
            let v = self.eval(y);
            if v < -1e-14 {
                return Some(format!("V({y}) = {v} < 0"));
            }
            if (v - self.eval(-y)).abs() > 1e-12 {
                return Some(format!("V not symmetric at {y}"));
            }
            let (l, r) = self.one_sided(y);
            if l > r + 1e-12 || l + 1e-12 < prev_right {
                return Some(format!("one-sided derivative not nondecreasing at {y}"));
            }
            prev_right = r;
        }
        None
    }
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Potential::PowerEven { k } => write!(f, "PowerEven(k={k})"),
            Potential::FractionalPower { delta } => write!(f, "FractionalPower(delta={delta})"),
            Potential::AbsoluteValue => write!(f, "AbsoluteValue"),
            Potential::FlatWell { a } => write!(f, "FlatWell(a={a})"),
            Potential::CustomConvex { .. } => write!(f, "CustomConvex"),
        }
    }
}

/// A C^2 increment function Phi of the 2d neighbor differences.
#[derive(Clone)]
pub struct SmoothPhiSpec {
    pub name: String,
    pub dim: usize,
    phi: PhiFn,
    /// Analytic gradient at 0 (length 2d), if supplied.
    pub analytic_grad0: Option<Vec<f64>>,
    /// Analytic Hessian at 0 (2d x 2d, row-major), if supplied.
    pub analytic_hess0: Option<Vec<f64>>,
    /// Set when only the at-zero monotonicity holds; such schemes require
    /// Lipschitz initial data (differences stay in the monotone region).
    pub requires_lipschitz_u0: bool,
}

impl SmoothPhiSpec {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        phi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SmoothPhiSpec {
            name: name.into(),
            dim,
            phi: Arc::new(phi),
            analytic_grad0: None,
            analytic_hess0: None,
            requires_lipschitz_u0: false,
        }
    }

    pub fn eval(&self, diffs: &[f64]) -> f64 {
        debug_assert_eq!(diffs.len(), 2 * self.dim);
        (self.phi)(diffs)
    }

    /// Central finite-difference step for derivatives at 0.
    pub const H_FD: f64 = 1e-4;

    /// Gradient at 0: analytic if supplied, else central differences.
    pub fn grad0(&self) -> Vec<f64> {
        if let Some(g) = &self.analytic_grad0 {
            return g.clone();
        }
        let m = 2 * self.dim;
        let h = Self::H_FD;
        (0..m)
            .map(|j| {
                let mut vp = vec![0.0; m];
                let mut vm = vec![0.0; m];
                vp[j] = h;
                vm[j] = -h;
                (self.eval(&vp) - self.eval(&vm)) / (2.0 * h)
            })
            .collect()
    }

    /// Hessian at 0 (2d x 2d, row-major): analytic if supplied, else
    /// central differences.
    pub fn hess0(&self) -> Vec<f64> {
        if let Some(hm) = &self.analytic_hess0 {
            return hm.clone();
        }
        let m = 2 * self.dim;
        let h = Self::H_FD;
        let f0 = self.eval(&vec![0.0; m]);
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let val = if i == j {
                    let mut vp = vec![0.0; m];
                    let mut vm = vec![0.0; m];
                    vp[i] = h;
                    vm[i] = -h;
                    (self.eval(&vp) - 2.0 * f0 + self.eval(&vm)) / (h * h)
                } else {
                    let mut vpp = vec![0.0; m];
                    let mut vpm = vec![0.0; m];
                    let mut vmp = vec![0.0; m];
                    let mut vmm = vec![0.0; m];
                    vpp[i] = h;
                    vpp[j] = h;
                    vpm[i] = h;
                    vpm[j] = -h;
                    vmp[i] = -h;
                    vmp[j] = h;
                    vmm[i] = -h;
                    vmm[j] = -h;
                    (self.eval(&vpp) - self.eval(&vpm) - self.eval(&vmp) + self.eval(&vmm))
                        / (4.0 * h * h)
                };
                out[i * m + j] = val;
                out[j * m + i] = val;
            }
        }
        out
    }

    /// The deterministic KPZ example in d = 1:
    /// Phi(v1, v-1) = (v1 + v-1)/4 + (v1 - v-1)^2/8.
    pub fn kpz_1d() -> Self {
        let mut spec = SmoothPhiSpec::new("smooth_kpz", 1, |v: &[f64]| {
            0.25 * (v[0] + v[1]) + 0.125 * (v[0] - v[1]) * (v[0] - v[1])
        });
        spec.analytic_grad0 = Some(vec![0.25, 0.25]);
        spec.analytic_hess0 = Some(vec![0.25, -0.25, -0.25, 0.25]);
        spec.requires_lipschitz_u0 = true;
        spec
    }

    /// Linear averaging Phi = (1/2d) sum v_a (the discrete heat example).
    pub fn average(dim: usize) -> Self {
        let m = 2 * dim;
        let w = 1.0 / m as f64;
        let mut spec =
            SmoothPhiSpec::new("smooth_average", dim, move |v: &[f64]| v.iter().sum::<f64>() * w);
        spec.analytic_grad0 = Some(vec![w; m]);
        spec.analytic_hess0 = Some(vec![0.0; m * m]);
        spec
    }
}

impl std::fmt::Debug for SmoothPhiSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothPhiSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// Which monotonicity condition a smooth Phi satisfies.
#[derive(Clone, Debug, PartialEq)]
pub enum MonotonicityMode {
    Global,
    AtZero,
}

#[derive(Clone, Debug)]
pub struct MonotonicityCertificate {
    pub mode: MonotonicityMode,
    pub holds: bool,
    /// Worst-case slack of the verified inequalities (negative = violated).
    pub margin: f64,
    /// First grid point where a violation was observed, if any.
    pub violation_at: Option<Vec<f64>>,
}

/// Check the monotonicity conditions for a smooth Phi.
///
/// Global mode verifies Phi_{v_a} >= 0 and 1 - sum_a Phi_{v_a} >= 0 on the
/// probe grid [-1,1]^{2d} with 5 points per axis (non-exhaustive); AtZero
/// verifies the strict versions at the origin only. Warning-grade: a failed
/// certificate does not abort builds.
pub fn check_monotonicity(spec: &SmoothPhiSpec, mode: MonotonicityMode) -> MonotonicityCertificate {
    let m = 2 * spec.dim;
    let grad_at = |v: &[f64]| -> Vec<f64> {
        let h = SmoothPhiSpec::H_FD;
        (0..m)
            .map(|j| {
                let mut vp = v.to_vec();
                let mut vm = v.to_vec();
                vp[j] += h;
                vm[j] -= h;
                (spec.eval(&vp) - spec.eval(&vm)) / (2.0 * h)
            })
            .collect()
    };
    let margin_at = |v: &[f64]| -> f64 {
        let g = grad_at(v);
        let div: f64 = g.iter().sum();
        let min_partial = g.iter().cloned().fold(f64::INFINITY, f64::min);
        min_partial.min(1.0 - div)
    };
    match mode {
        MonotonicityMode::AtZero => {
            let v = vec![0.0; m];
            let margin = margin_at(&v);
            MonotonicityCertificate {
                mode,
                holds: margin > 0.0,
                margin,
                violation_at: if margin > 0.0 { None } else { Some(v) },
            }
        }
        MonotonicityMode::Global => {
            let per_axis = 5usize;
            let total = per_axis.pow(m as u32);
            let mut worst = f64::INFINITY;
            let mut violation_at = None;
            for idx in 0..total {
                let mut rem = idx;
                let mut v = vec![0.0; m];
                for a in 0..m {
                    v[a] = -1.0 + 0.5 * (rem % per_axis) as f64;
                    rem /= per_axis;
                }
                let mg = margin_at(&v);
                if mg < worst {
                    worst = mg;
                    if mg < -1e-9 && violation_at.is_none() {
                        violation_at = Some(v.clone());
                    }
                }
            }
            MonotonicityCertificate {
                mode,
                // finite-difference noise allowance around exactly-zero margins
                holds: worst >= -1e-9,
                margin: worst,
                violation_at,
            }
        }
    }
}

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    if hi - lo <= tol {
        return 0.5 * (lo + hi);
    }
    // f is nondecreasing with f(lo) <= 0 <= f(hi)
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Unique minimizer of sum_j (y - c_j)^k for an even k >= 2, as the root of
/// the strictly increasing derivative sum, by bisection on [min c, max c].
pub fn argmin_power(k: u32, diffs: &[f64]) -> f64 {
    assert!(k >= 2 && k % 2 == 0, "k must be even and >= 2");
    if k == 2 {
        return diffs.iter().sum::<f64>() / diffs.len() as f64;
    }
    let (lo, hi) = min_max(diffs);
    let e = (k - 1) as i32;
    bisect_root(
        |y| diffs.iter().map(|&c| (y - c).powi(e)).sum::<f64>(),
        lo,
        hi,
        TOL_ARGMIN,
    )
}

/// Unique minimizer of sum_j |y - c_j|^(2+delta), 0 < delta < 1.
pub fn argmin_fracpower(delta: f64, diffs: &[f64]) -> f64 {
    assert!(delta > 0.0 && delta < 1.0, "delta must be in (0,1)");
    let (lo, hi) = min_max(diffs);
    let p = 1.0 + delta;
    bisect_root(
        |y| {
            diffs
                .iter()
                .map(|&c| {
                    let t = y - c;
                    t.signum() * t.abs().powf(p)
                })
                .sum::<f64>()
        },
        lo,
        hi,
        TOL_ARGMIN,
    )
}

/// Midpoint of the median interval of an even count of values: the average
/// of the d-th and (d+1)-th order statistics.
pub fn median_midpoint(diffs: &[f64]) -> f64 {
    let n = diffs.len();
    assert!(n >= 2 && n % 2 == 0, "median midpoint needs an even count");
    let mut sorted = diffs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
}

/// Midpoint of the extreme differences (restricted solid-on-solid rule).
pub fn rsos_midpoint(diffs: &[f64]) -> f64 {
    let (lo, hi) = min_max(diffs);
    0.5 * (lo + hi)
}

/// Minimizing interval midpoint of y -> sum_j V(y - c_j) for a general
/// symmetric convex potential, located by bisection on the sign of the
/// one-sided derivatives.
pub fn generic_convex_argmin(potential: &Potential, diffs: &[f64]) -> f64 {
    let obj_left = |y: f64| -> f64 { diffs.iter().map(|&c| potential.one_sided(y - c).0).sum() };
    let obj_right = |y: f64| -> f64 { diffs.iter().map(|&c| potential.one_sided(y - c).1).sum() };
    let (clo, chi) = min_max(diffs);

    // Expand left until the objective is strictly decreasing there.
    let mut lo = clo;
    let mut span = (chi - clo).max(1.0);
    while obj_right(lo) > -FLAT_DERIV_TOL {
        lo -= span;
        span *= 2.0;
        if span > 1e12 {
            break;
        }
    }
    let mut hi = chi;
    span = (chi - clo).max(1.0);
    while obj_left(hi) < FLAT_DERIV_TOL {
        hi += span;
        span *= 2.0;
        if span > 1e12 {
            break;
        }
    }
    // alpha: boundary between { right-derivative < -tol } and the rest
    let alpha = {
        let (mut a, mut b) = (lo, hi);
        while b - a > TOL_ARGMIN {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if obj_right(mid) < -FLAT_DERIV_TOL {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    // beta: boundary between the flat region and { left-derivative > tol }
    let beta = {
        let (mut a, mut b) = (lo, hi);
        while b - a > TOL_ARGMIN {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if obj_left(mid) > FLAT_DERIV_TOL {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    0.5 * (alpha + beta)
}

/// A growth rule phi mapping (center, 2d neighbors) to the new height.
#[derive(Clone, Debug)]
pub enum Driver {
    MaxNeighbor,
    PosPartAverage,
    SmoothPhi(SmoothPhiSpec),
    ArgminPotential(Potential),
    MedianMidpoint,
    RsosMidpoint,
}

impl Driver {
    /// New height at a site from its old value and its 2d neighbor values
    /// (ordering per the module docs).
    pub fn apply(&self, center: f64, neighbors: &[f64]) -> f64 {
        debug_assert!(neighbors.len() % 2 == 0 && !neighbors.is_empty());
        match self {
            Driver::MaxNeighbor => neighbors.iter().fold(center, |m, &v| m.max(v)),
            Driver::PosPartAverage => {
                let s: f64 = neighbors.iter().map(|&v| (v - center).max(0.0)).sum();
                center + s / neighbors.len() as f64
            }
            Driver::SmoothPhi(spec) => {
                let diffs: Vec<f64> = neighbors.iter().map(|&v| v - center).collect();
                center + spec.eval(&diffs)
            }
            Driver::ArgminPotential(potential) => {
                let diffs: Vec<f64> = neighbors.iter().map(|&v| v - center).collect();
                let shift = match potential {
                    Potential::PowerEven { k } => argmin_power(*k, &diffs),
                    Potential::FractionalPower { delta } => argmin_fracpower(*delta, &diffs),
                    // exact closed forms are the production path
                    Potential::AbsoluteValue => median_midpoint(&diffs),
                    Potential::FlatWell { .. } | Potential::CustomConvex { .. } => {
                        generic_convex_argmin(potential, &diffs)
                    }
                };
                center + shift
            }
            Driver::MedianMidpoint => {
                let diffs: Vec<f64> = neighbors.iter().map(|&v| v - center).collect();
                center + median_midpoint(&diffs)
            }
            Driver::RsosMidpoint => {
                let diffs: Vec<f64> = neighbors.iter().map(|&v| v - center).collect();
                center + rsos_midpoint(&diffs)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Driver::MaxNeighbor => "max",
            Driver::PosPartAverage => "pospart",
            Driver::SmoothPhi(_) => "smooth_phi",
            Driver::ArgminPotential(_) => "argmin_potential",
            Driver::MedianMidpoint => "median",
            Driver::RsosMidpoint => "rsos",
        }
    }

    /// Whether the rule belongs to the argmin family (potential minimization),
    /// for which the finite-eps sandwich bound applies.
    pub fn is_argmin_family(&self) -> bool {
        matches!(
            self,
            Driver::ArgminPotential(_) | Driver::MedianMidpoint | Driver::RsosMidpoint
        )
    }

    /// For smooth-Phi drivers with an at-zero-only certificate, the largest
    /// neighbor-difference amplitude inside the verified monotone region
    /// (used by property suites to keep probes in regime).
    pub fn monotone_probe_amplitude(&self) -> f64 {
        match self {
            Driver::SmoothPhi(spec) => {
                if check_monotonicity(spec, MonotonicityMode::Global).holds {
                    1.0
                } else {
                    0.2
                }
            }
            _ => 1.0,
        }
    }
}

/// Registered driver names for the CLI.
pub const REGISTRY: &[&str] = &["max", "pospart", "smooth_phi", "argmin_potential", "median", "rsos"];

/// Construct a driver by registry name with optional parameters.
pub fn by_name(name: &str, k: Option<u32>, delta: Option<f64>, a: Option<f64>) -> Result<Driver> {
    match name {
        "max" => Ok(Driver::MaxNeighbor),
        "pospart" => Ok(Driver::PosPartAverage),
        // the KPZ example is the registered smooth-Phi instance
        "smooth_phi" | "smooth_kpz" => Ok(Driver::SmoothPhi(SmoothPhiSpec::kpz_1d())),
        "smooth_average" => Ok(Driver::SmoothPhi(SmoothPhiSpec::average(1))),
        "argmin_potential" | "power" => {
            if let Some(k) = k {
                if k < 2 || k % 2 != 0 {
                    return Err(GrowthError::InvalidArgument(format!(
                        "power potential needs an even k >= 2, got {k}"
                    )));
                }
                Ok(Driver::ArgminPotential(Potential::PowerEven { k }))
            } else if let Some(delta) = delta {
                if !(0.0 < delta && delta < 1.0) {
                    return Err(GrowthError::InvalidArgument(format!(
                        "fractional potential needs delta in (0,1), got {delta}"
                    )));
                }
                Ok(Driver::ArgminPotential(Potential::FractionalPower { delta }))
            } else if let Some(a) = a {
                if a <= 0.0 {
                    return Err(GrowthError::InvalidArgument(format!(
                        "flat well needs a > 0, got {a}"
                    )));
                }
                Ok(Driver::ArgminPotential(Potential::FlatWell { a }))
            } else {
                Err(GrowthError::Config(
                    "argmin_potential needs one of k, delta, a".into(),
                ))
            }
        }
        "median" => Ok(Driver::MedianMidpoint),
        "rsos" => Ok(Driver::RsosMidpoint),
        _ => Err(GrowthError::UnknownName {
            kind: "driver",
            name: name.to_string(),
        }),
    }
}

/// Decide the scaling from how the rule propagates linear profiles.
///
/// For each probe gradient p the one-step increment on the stencil
/// {0, +/- s p_i} is measured at two small stencil scales and linearly
/// extrapolated to s -> 0; a nonzero extrapolated first-order increment
/// means linear profiles move, hence hyperbolic scaling.
pub fn detect_scaling(driver: &Driver, probes: &[Vec<f64>]) -> ScalingMode {
    let s = 1e-3;
    for p in probes {
        let increment = |scale: f64| -> f64 {
            let neighbors: Vec<f64> = p
                .iter()
                .flat_map(|&pi| [scale * pi, -scale * pi])
                .collect();
            driver.apply(0.0, &neighbors)
        };
        let r1 = increment(s) / s;
        let r2 = increment(0.5 * s) / (0.5 * s);
        let limit = 2.0 * r2 - r1;
        if limit.abs() > 1e-9 {
            return ScalingMode::Hyperbolic;
        }
    }
    ScalingMode::Parabolic
}

/// The default probe set for scaling detection in dimension d: axis vectors
/// plus fixed generic directions.
pub fn default_scaling_probes(dim: usize) -> Vec<Vec<f64>> {
    let mut probes = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        probes.push(e);
    }
    let generic: Vec<f64> = (0..dim).map(|i| 0.7 - 0.3 * i as f64).collect();
    probes.push(generic);
    let alternating: Vec<f64> = (0..dim).map(|i| if i % 2 == 0 { 1.0 } else { -2.0 }).collect();
    probes.push(alternating);
    probes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_driver_examples() {
        assert_eq!(Driver::MaxNeighbor.apply(3.0, &[3.0, 3.0]), 3.0);
        assert_eq!(Driver::MaxNeighbor.apply(0.0, &[1.0, -2.0, 0.5, -0.5]), 1.0);
    }

    #[test]
    fn pospart_driver_examples() {
        assert_eq!(Driver::PosPartAverage.apply(2.0, &[1.0, 0.0, -3.0, 2.0]), 2.0);
        assert_eq!(Driver::PosPartAverage.apply(0.0, &[2.0, -2.0]), 1.0);
    }

    #[test]
    fn smooth_phi_examples() {
        let avg = Driver::SmoothPhi(SmoothPhiSpec::average(2));
        assert_eq!(avg.apply(5.0, &[5.0, 5.0, 5.0, 5.0]), 5.0);
        let kpz = Driver::SmoothPhi(SmoothPhiSpec::kpz_1d());
        // center 0, neighbors (1, -1): (1/4)(0) + (1/8)(2)^2 = 0.5
        assert!((kpz.apply(0.0, &[1.0, -1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn argmin_power_quadratic_is_mean() {
        let diffs = [1.0, 2.0, 7.0, -4.0];
        assert!((argmin_power(2, &diffs) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn argmin_power_symmetry_case() {
        assert!((argmin_power(4, &[0.0, 0.0, 1.0, 1.0]) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn argmin_power_matches_grid_oracle() {
        // brute-force grid minimization of sum (y - c)^4, step 1e-6 locally
        let diffs = [0.0, 1.0, 2.0, 5.0];
        let obj = |y: f64| diffs.iter().map(|&c| (y - c).powi(4)).sum::<f64>();
        let mut best = (f64::INFINITY, 0.0);
        let mut y = 2.3;
        while y <= 2.6 {
            let v = obj(y);
            if v < best.0 {
                best = (v, y);
            }
            y += 1e-6;
        }
        assert!((argmin_power(4, &diffs) - best.1).abs() < 2e-6);
    }

    #[test]
    fn argmin_fracpower_examples() {
        assert!((argmin_fracpower(0.5, &[2.0, 2.0]) - 2.0).abs() < 1e-11);
        assert!(argmin_fracpower(0.3, &[-1.0, 1.0]).abs() < 1e-11);
        assert!((argmin_fracpower(0.5, &[0.0, 0.0, 3.0, 3.0]) - 1.5).abs() < 1e-11);
    }

    #[test]
    fn median_midpoint_examples() {
        assert_eq!(median_midpoint(&[5.0, 5.0, 5.0, 5.0]), 5.0);
        assert_eq!(median_midpoint(&[0.0, 2.0]), 1.0);
        // median interval of (0,0,4,10) is [0,4]
        assert_eq!(median_midpoint(&[0.0, 0.0, 4.0, 10.0]), 2.0);
    }

    #[test]
    fn rsos_midpoint_examples() {
        assert_eq!(rsos_midpoint(&[0.0, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(rsos_midpoint(&[-1.0, 3.0, 0.0, 2.0]), 1.0);
    }

    #[test]
    fn rsos_equals_flat_well_interval_midpoint() {
        // diffs within [-a, a]: minimizing interval is [max - a, min + a]
        let a = 1.0;
        let diffs = [0.3, -0.6, 0.1, 0.9];
        let (lo, hi) = (0.9 - a, -0.6 + a);
        assert!((rsos_midpoint(&diffs) - 0.5 * (lo + hi)).abs() < 1e-14);
        let generic = generic_convex_argmin(&Potential::FlatWell { a }, &diffs);
        assert!((generic - rsos_midpoint(&diffs)).abs() < 1e-9);
    }

    #[test]
    fn generic_argmin_agrees_with_closed_forms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let abs = Potential::CustomConvex {
            v: std::sync::Arc::new(|y: f64| y.abs()),
            dv: std::sync::Arc::new(|y: f64| {
                if y > 0.0 {
                    (1.0, 1.0)
                } else if y < 0.0 {
                    (-1.0, -1.0)
                } else {
                    (-1.0, 1.0)
                }
            }),
        };
        let quad = Potential::CustomConvex {
            v: std::sync::Arc::new(|y: f64| y * y),
            dv: std::sync::Arc::new(|y: f64| (2.0 * y, 2.0 * y)),
        };
        for _ in 0..1000 {
            let diffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let med = generic_convex_argmin(&abs, &diffs);
            assert!((med - median_midpoint(&diffs)).abs() < 1e-9);
            let mean = generic_convex_argmin(&quad, &diffs);
            let expect = diffs.iter().sum::<f64>() / 4.0;
            assert!((mean - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn potential_invariants_hold_for_builtins() {
        for p in [
            Potential::PowerEven { k: 4 },
            Potential::FractionalPower { delta: 0.5 },
            Potential::AbsoluteValue,
            Potential::FlatWell { a: 1.0 },
        ] {
            assert_eq!(p.probe_invariants(3.0, 61), None, "{p:?}");
        }
    }

    #[test]
    fn monotonicity_certificates() {
        // averaging Phi: global holds with zero margin, at-zero strictness fails
        let avg = SmoothPhiSpec::average(1);
        let global = check_monotonicity(&avg, MonotonicityMode::Global);
        assert!(global.holds);
        assert!(global.margin.abs() < 1e-9);
        let at_zero = check_monotonicity(&avg, MonotonicityMode::AtZero);
        assert!(!at_zero.holds);

        // KPZ: at-zero holds (partials 1/4 > 0, divergence 1/2 < 1)
        let kpz = SmoothPhiSpec::kpz_1d();
        let cert = check_monotonicity(&kpz, MonotonicityMode::AtZero);
        assert!(cert.holds);
        assert!((cert.margin - 0.25).abs() < 1e-6);

        // a Phi with a negative partial at 0 is flagged
        let bad = SmoothPhiSpec::new("bad", 1, |v: &[f64]| -0.5 * v[0]);
        let cert = check_monotonicity(&bad, MonotonicityMode::AtZero);
        assert!(!cert.holds);
        assert!(cert.violation_at.is_some());
    }

    #[test]
    fn scaling_detection() {
        let probes = default_scaling_probes(2);
        assert_eq!(
            detect_scaling(&Driver::MaxNeighbor, &probes),
            ScalingMode::Hyperbolic
        );
        assert_eq!(
            detect_scaling(&Driver::PosPartAverage, &probes),
            ScalingMode::Hyperbolic
        );
        assert_eq!(
            detect_scaling(&Driver::ArgminPotential(Potential::PowerEven { k: 4 }), &probes),
            ScalingMode::Parabolic
        );
        assert_eq!(
            detect_scaling(&Driver::MedianMidpoint, &probes),
            ScalingMode::Parabolic
        );
        assert_eq!(
            detect_scaling(&Driver::RsosMidpoint, &probes),
            ScalingMode::Parabolic
        );
        let probes1 = default_scaling_probes(1);
        assert_eq!(
            detect_scaling(&Driver::SmoothPhi(SmoothPhiSpec::kpz_1d()), &probes1),
            ScalingMode::Parabolic
        );
    }

    #[test]
    fn phi_vanishes_at_zero_for_all_drivers() {
        let zeros2 = vec![0.0; 4];
        for driver in [
            Driver::MaxNeighbor,
            Driver::PosPartAverage,
            Driver::ArgminPotential(Potential::PowerEven { k: 4 }),
            Driver::ArgminPotential(Potential::FractionalPower { delta: 0.5 }),
            Driver::MedianMidpoint,
            Driver::RsosMidpoint,
        ] {
            assert!(driver.apply(0.0, &zeros2).abs() <= 1e-14, "{driver:?}");
        }
        let kpz = Driver::SmoothPhi(SmoothPhiSpec::kpz_1d());
        assert!(kpz.apply(0.0, &[0.0, 0.0]).abs() <= 1e-14);
    }
}
