//! Closed-form and variational reference solutions used to judge scaled
//! growth models: a Hopf-Lax evaluator for the first-order limits and a
//! separable heat-kernel series for axis-aligned cosine data.

use crate::error::{GrowthError, Result};
use crate::initial::InitialData;

/// The reachable set of the Hopf-Lax formula u(x,t) = sup_{y in x + t K} u0(y).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReachableSet {
    /// l^1 ball of radius t (max-of-neighbors rule: H(p) = max |p_i|).
    L1Ball,
    /// Box prod_i [x_i - t/2d, x_i + t/2d] (positive-part averaging rule:
    /// H(p) = (1/2d) sum |p_i|, whose Legendre set is the sup-norm ball of
    /// radius 1/2d).
    SupBox,
}

/// Coarse points per axis in the first search pass.
const COARSE_PER_AXIS: usize = 33;
/// The refinement pass resolves the maximizer to t / REFINE_DENOM per axis.
const REFINE_DENOM: f64 = 512.0;

fn grid_max(
    u0: &InitialData,
    center: &[f64],
    half_widths: &[f64],
    per_axis: usize,
    constraint: Option<f64>, // l^1 radius about `origin`, if any
    origin: &[f64],
) -> (f64, Vec<f64>) {
    let d = center.len();
    let total = per_axis.pow(d as u32);
    let mut best = f64::NEG_INFINITY;
    let mut best_y = center.to_vec();
    let mut y = vec![0.0; d];
    for idx in 0..total {
        let mut rem = idx;
        for i in 0..d {
            let f = if per_axis == 1 {
                0.0
            } else {
                (rem % per_axis) as f64 / (per_axis - 1) as f64 * 2.0 - 1.0
            };
            rem /= per_axis;
            y[i] = center[i] + f * half_widths[i];
        }
        if let Some(r) = constraint {
            let l1: f64 = (0..d).map(|i| (y[i] - origin[i]).abs()).sum();
            if l1 > r + 1e-12 {
                continue;
            }
        }
        let v = u0.eval(&y);
        if v > best {
            best = v;
            best_y = y.clone();
        }
    }
    (best, best_y)
}

/// Evaluate the Hopf-Lax solution sup over the reachable set by a coarse
/// grid pass followed by one local refinement around the coarse maximizer.
/// Exact for t = 0. For Lipschitz u0 the final resolution t/512 bounds the
/// error by Lip(u0) * t * sqrt(d) / 512.
pub fn hopf_lax_oracle(u0: &InitialData, set: ReachableSet, x: &[f64], t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(GrowthError::InvalidArgument(format!("negative time {t}")));
    }
    if x.len() != u0.dim {
        return Err(GrowthError::DimensionMismatch { expected: u0.dim, got: x.len() });
    }
    if t == 0.0 {
        return Ok(u0.eval(x));
    }
    let d = x.len();
    let radius = match set {
        ReachableSet::L1Ball => t,
        ReachableSet::SupBox => t / (2.0 * d as f64),
    };
    let half_widths = vec![radius; d];
    let constraint = match set {
        ReachableSet::L1Ball => Some(t),
        ReachableSet::SupBox => None,
    };
    let (coarse_val, coarse_y) = grid_max(u0, x, &half_widths, COARSE_PER_AXIS, constraint, x);

    // refine: a window of one coarse cell around the maximizer, resolved to
    // t / REFINE_DENOM per axis
    let coarse_cell = radius / (COARSE_PER_AXIS - 1) as f64 * 2.0;
    let fine_per_axis = ((coarse_cell / (t / REFINE_DENOM)).ceil() as usize + 1).max(3);
    let mut center = coarse_y.clone();
    let fine_half = vec![0.5 * coarse_cell; d];
    // clamp the refinement window back inside the reachable box
    for i in 0..d {
        center[i] = center[i]
            .max(x[i] - radius + fine_half[i])
            .min(x[i] + radius - fine_half[i]);
    }
    let (fine_val, _) = grid_max(u0, &center, &fine_half, fine_per_axis, constraint, x);
    Ok(coarse_val.max(fine_val))
}

/// Initial data recognized as c0 + sum_m c_m cos(m x_1); currently the
/// single-mode registry entry `cos_x1`.
fn cosine_modes(u0: &InitialData) -> Result<Vec<(u32, f64)>> {
    match u0.name.as_str() {
        "cos_x1" => Ok(vec![(1, 1.0)]),
        _ => Err(GrowthError::NonCosineProfile(u0.name.clone())),
    }
}

/// Exact solution of u_t = nu u_{x1 x1} for axis-aligned cosine data:
/// each mode m decays by exp(-nu m^2 t).
pub fn separable_heat_oracle(u0: &InitialData, nu: f64, x: &[f64], t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(GrowthError::InvalidArgument(format!("negative time {t}")));
    }
    let modes = cosine_modes(u0)?;
    Ok(modes
        .iter()
        .map(|&(m, c)| c * (-nu * (m * m) as f64 * t).exp() * ((m as f64) * x[0]).cos())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial;

    #[test]
    fn hopf_lax_at_time_zero_is_initial_data() {
        let u0 = initial::by_name("tent", 2).unwrap();
        let x = [0.25, -0.5];
        let v = hopf_lax_oracle(&u0, ReachableSet::L1Ball, &x, 0.0).unwrap();
        assert_eq!(v, u0.eval(&x));
    }

    #[test]
    fn l1_tent_closed_form() {
        // tent(x) = max(0, 1 - |x|_1); sup over the l^1 ball of radius t is
        // min(1, max(0, 1 - (|x|_1 - t)))
        let u0 = initial::by_name("tent", 1).unwrap();
        for &(x, t) in &[(0.0f64, 0.3f64), (0.5, 0.2), (0.9, 0.5), (2.0, 0.4), (-1.2, 0.35)] {
            let expect = (1.0 - (x.abs() - t).max(0.0)).clamp(0.0, 1.0);
            let got = hopf_lax_oracle(&u0, ReachableSet::L1Ball, &[x], t).unwrap();
            assert!(
                (got - expect).abs() < 2e-3,
                "x={x} t={t}: got {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn l1_tent_closed_form_2d() {
        let u0 = initial::by_name("tent", 2).unwrap();
        // in 2d the reachable l^1 ball still shrinks the l^1 distance by t
        for &(x, y, t) in &[(0.4f64, 0.3f64, 0.25f64), (1.0, -0.5, 0.5), (0.0, 0.0, 0.2)] {
            let l1 = x.abs() + y.abs();
            let expect = (1.0 - (l1 - t).max(0.0)).clamp(0.0, 1.0);
            let got = hopf_lax_oracle(&u0, ReachableSet::L1Ball, &[x, y], t).unwrap();
            assert!(
                (got - expect).abs() < 3e-3,
                "x=({x},{y}) t={t}: got {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn sup_box_tent_closed_form() {
        // box radius t/2d per axis; for the 1d tent the l^1 distance drops
        // by t/2
        let u0 = initial::by_name("tent", 1).unwrap();
        for &(x, t) in &[(0.6f64, 0.4f64), (-0.9, 0.8), (0.0, 0.5)] {
            let expect = (1.0 - (x.abs() - 0.5 * t).max(0.0)).clamp(0.0, 1.0);
            let got = hopf_lax_oracle(&u0, ReachableSet::SupBox, &[x], t).unwrap();
            assert!(
                (got - expect).abs() < 2e-3,
                "x={x} t={t}: got {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn hopf_lax_monotone_in_time() {
        let u0 = initial::by_name("gauss", 2).unwrap();
        let x = [0.8, -0.4];
        let mut prev = f64::NEG_INFINITY;
        for k in 0..8 {
            let t = 0.1 * k as f64;
            let v = hopf_lax_oracle(&u0, ReachableSet::L1Ball, &x, t).unwrap();
            assert!(v >= prev - 1e-9, "t={t}");
            prev = v;
        }
    }

    #[test]
    fn heat_oracle_decay() {
        let u0 = initial::by_name("cos_x1", 1).unwrap();
        let v = separable_heat_oracle(&u0, 0.5, &[0.0], 1.0).unwrap();
        assert!((v - (-0.5_f64).exp()).abs() < 1e-15);
        let v = separable_heat_oracle(&u0, 0.5, &[std::f64::consts::PI / 2.0], 0.7).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn heat_oracle_rejects_unknown_profiles() {
        let u0 = initial::by_name("tent", 1).unwrap();
        assert!(matches!(
            separable_heat_oracle(&u0, 0.5, &[0.0], 1.0),
            Err(GrowthError::NonCosineProfile(_))
        ));
    }
}
