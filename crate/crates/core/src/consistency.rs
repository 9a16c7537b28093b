//! Consistency lab: measure (S(eps)phi(y) - phi(y)) / eps on smooth test
//! functions against the limit operator F(D^2 phi(x), D phi(x)), plus the
//! exact finite-eps sandwich bound for the argmin family.

use crate::drivers::Driver;
use crate::error::{GrowthError, Result};
use crate::lattice::ScalingMode;
use crate::operators::{LimitOperator, OperatorValue, SymMatrix};
use serde::Serialize;
use std::sync::Arc;

/// Final-eps tolerance for off-singular-set sweeps on quadratic test
/// functions at eps = 1e-6 (residuals are O(sqrt(eps)) at worst, and the
/// argmin bisection contributes <= 1e-6).
pub const TOL_CONSISTENCY: f64 = 5e-3;

/// Envelope-containment slack for on-singular-set sweeps.
pub const TOL_ENVELOPE: f64 = 1e-6;

type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type HessFn = Arc<dyn Fn(&[f64]) -> SymMatrix + Send + Sync>;

/// A C^2 test function with analytic gradient and Hessian.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub dim: usize,
    f: FieldFn,
    grad: GradFn,
    hess: HessFn,
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    pub fn hess(&self, x: &[f64]) -> SymMatrix {
        (self.hess)(x)
    }

    /// phi(y) = c + p.y + y^T X y / 2 — the canonical family: derivatives
    /// are exact, so the sweeps measure only the scheme's residue.
    pub fn quadratic(p: Vec<f64>, x_mat: SymMatrix, c: f64) -> Self {
        let d = p.len();
        assert_eq!(x_mat.dim, d);
        let (pf, xf) = (p.clone(), x_mat.clone());
        let xg = x_mat.clone();
        TestFunction {
            name: "quadratic".into(),
            dim: d,
            f: Arc::new(move |y: &[f64]| {
                let lin: f64 = y.iter().zip(&pf).map(|(a, b)| a * b).sum();
                c + lin + 0.5 * xf.quad_form(y)
            }),
            grad: Arc::new(move |y: &[f64]| {
                (0..d)
                    .map(|i| p[i] + (0..d).map(|j| xg.get(i, j) * y[j]).sum::<f64>())
                    .collect()
            }),
            hess: Arc::new(move |_y: &[f64]| x_mat.clone()),
        }
    }

    /// phi(y) = prod_i cos(k_i y_i) — smoke-test family.
    pub fn cosine_product(freqs: Vec<f64>) -> Self {
        let d = freqs.len();
        let (kf, kg, kh) = (freqs.clone(), freqs.clone(), freqs);
        let prod = |k: &[f64], y: &[f64]| -> f64 {
            y.iter().zip(k).map(|(yi, ki)| (ki * yi).cos()).product()
        };
        TestFunction {
            name: "cosine_product".into(),
            dim: d,
            f: Arc::new(move |y: &[f64]| prod(&kf, y)),
            grad: Arc::new(move |y: &[f64]| {
                (0..d)
                    .map(|i| {
                        let mut g = -kg[i] * (kg[i] * y[i]).sin();
                        for j in 0..d {
                            if j != i {
                                g *= (kg[j] * y[j]).cos();
                            }
                        }
                        g
                    })
                    .collect()
            }),
            hess: Arc::new(move |y: &[f64]| {
                let mut h = SymMatrix::zeros(d);
                for i in 0..d {
                    for j in i..d {
                        let mut v = 1.0;
                        for m in 0..d {
                            let km = kh[m];
                            v *= if m == i && m == j {
                                -km * km * (km * y[m]).cos()
                            } else if m == i || m == j {
                                -km * (km * y[m]).sin()
                            } else {
                                (km * y[m]).cos()
                            };
                        }
                        h.set(i, j, v);
                    }
                }
                h
            }),
        }
    }

    /// phi(y) = exp(-|y|^2) — smooth, compactly concentrated smoke test.
    pub fn gaussian_bump(dim: usize) -> Self {
        let g = |y: &[f64]| (-y.iter().map(|v| v * v).sum::<f64>()).exp();
        TestFunction {
            name: "bump".into(),
            dim,
            f: Arc::new(g),
            grad: Arc::new(move |y: &[f64]| {
                let e = g(y);
                y.iter().map(|&yi| -2.0 * yi * e).collect()
            }),
            hess: Arc::new(move |y: &[f64]| {
                let e = g(y);
                let mut h = SymMatrix::zeros(dim);
                for i in 0..dim {
                    for j in i..dim {
                        let v = if i == j {
                            (4.0 * y[i] * y[i] - 2.0) * e
                        } else {
                            4.0 * y[i] * y[j] * e
                        };
                        h.set(i, j, v);
                    }
                }
                h
            }),
        }
    }

    /// Largest deviation of the analytic gradient and Hessian from central
    /// finite differences at x (self-check; should be below 1e-5).
    pub fn fd_self_check(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let h = 1e-5;
        let mut worst = 0.0_f64;
        let g = self.grad(x);
        for i in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fd = (self.eval(&xp) - self.eval(&xm)) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs());
        }
        let hm = self.hess(x);
        let f0 = self.eval(x);
        for i in 0..d {
            for j in i..d {
                let fd = if i == j {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[i] += h;
                    xm[i] -= h;
                    (self.eval(&xp) - 2.0 * f0 + self.eval(&xm)) / (h * h)
                } else {
                    let mut a = x.to_vec();
                    let mut b = x.to_vec();
                    let mut c = x.to_vec();
                    let mut e = x.to_vec();
                    a[i] += h;
                    a[j] += h;
                    b[i] += h;
                    b[j] -= h;
                    c[i] -= h;
                    c[j] += h;
                    e[i] -= h;
                    e[j] -= h;
                    (self.eval(&a) - self.eval(&b) - self.eval(&c) + self.eval(&e)) / (4.0 * h * h)
                };
                worst = worst.max((fd - hm.get(i, j)).abs());
            }
        }
        worst
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// The one-step increment S(eps)phi(y) - phi(y) of a driver on the stencil
/// {y, y +/- eps^{space_exponent} e_i} of continuum samples.
pub fn scheme_increment(driver: &Driver, phi: &TestFunction, y: &[f64], eps: f64, scaling: ScalingMode) -> Result<f64> {
    if eps <= 0.0 {
        return Err(GrowthError::NonPositiveEpsilon(eps));
    }
    let s = scaling.space_scale(eps);
    let d = phi.dim;
    let center = phi.eval(y);
    let mut neighbors = Vec::with_capacity(2 * d);
    let mut z = y.to_vec();
    for i in 0..d {
        z[i] = y[i] + s;
        neighbors.push(phi.eval(&z));
        z[i] = y[i] - s;
        neighbors.push(phi.eval(&z));
        z[i] = y[i];
    }
    Ok(driver.apply(center, &neighbors) - center)
}

/// (S(eps)phi(y) - phi(y)) / eps.
pub fn consistency_ratio(driver: &Driver, phi: &TestFunction, y: &[f64], eps: f64, scaling: ScalingMode) -> Result<f64> {
    Ok(scheme_increment(driver, phi, y, eps, scaling)? / eps)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub ratio: f64,
    /// |ratio - F| off the singular set; distance to the envelope interval
    /// on it (0 when inside).
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub driver: String,
    pub test_function: String,
    pub point: Vec<f64>,
    pub on_singular_set: bool,
    pub target: OperatorValue,
    pub entries: Vec<SweepEntry>,
    pub pass: bool,
}

/// Run a ratio sweep along `eps_list` with the offset schedule
/// y_eps = x + sqrt(eps) * offset (pass a zero offset as the control).
///
/// Verdict: off the singular set, errors must be nonincreasing along the
/// sweep and the final one <= TOL_CONSISTENCY; on it, every ratio must lie
/// in [F_lower - TOL_ENVELOPE, F_upper + TOL_ENVELOPE].
pub fn consistency_sweep(
    driver: &Driver,
    operator: &LimitOperator,
    phi: &TestFunction,
    x: &[f64],
    offset: &[f64],
    eps_list: &[f64],
    scaling: ScalingMode,
) -> Result<ConsistencyReport> {
    let p = phi.grad(x);
    let x_mat = phi.hess(x);
    let on_singular_set = operator.singular_at(&p);
    let target = operator.evaluate(&x_mat, &p);
    let mut entries = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let y: Vec<f64> = x
            .iter()
            .zip(offset)
            .map(|(xi, oi)| xi + eps.sqrt() * oi)
            .collect();
        let ratio = consistency_ratio(driver, phi, &y, eps, scaling)?;
        let error = match target {
            OperatorValue::Value(f) => (ratio - f).abs(),
            OperatorValue::Envelope { lower, upper } => {
                (lower - ratio).max(ratio - upper).max(0.0)
            }
        };
        entries.push(SweepEntry { epsilon: eps, ratio, error });
    }
    let pass = if on_singular_set {
        entries.iter().all(|e| e.error <= TOL_ENVELOPE)
    } else {
        let decreasing = entries.windows(2).all(|w| w[1].error <= w[0].error + 1e-15);
        decreasing && entries.last().map_or(false, |e| e.error <= TOL_CONSISTENCY)
    };
    Ok(ConsistencyReport {
        driver: driver.kind_name().to_string(),
        test_function: phi.name.clone(),
        point: x.to_vec(),
        on_singular_set,
        target,
        entries,
        pass,
    })
}

/// Exact finite-eps bound for the argmin family: the one-step increment
/// lies in [min_i D_i, max_i D_i] with
/// D_i = (phi(y + s e_i) + phi(y - s e_i) - 2 phi(y)) / 2, s = sqrt(eps).
/// No tolerance: the containment is an algebraic identity of the rule.
pub fn sandwich_check(driver: &Driver, phi: &TestFunction, y: &[f64], eps: f64) -> Result<bool> {
    if !driver.is_argmin_family() {
        return Err(GrowthError::InvalidArgument(format!(
            "sandwich bound applies to the argmin family, not {}",
            driver.kind_name()
        )));
    }
    let increment = scheme_increment(driver, phi, y, eps, ScalingMode::Parabolic)?;
    let s = eps.sqrt();
    let d = phi.dim;
    let center = phi.eval(y);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut z = y.to_vec();
    for i in 0..d {
        z[i] = y[i] + s;
        let vp = phi.eval(&z);
        z[i] = y[i] - s;
        let vm = phi.eval(&z);
        z[i] = y[i];
        let delta = 0.5 * (vp + vm) - center;
        lo = lo.min(delta);
        hi = hi.max(delta);
    }
    Ok(increment >= lo && increment <= hi)
}
