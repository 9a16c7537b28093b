//! Library of continuum initial profiles u0 and their basic sanity checks.

use crate::error::{GrowthError, Result};
use std::sync::Arc;

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A bounded uniformly continuous initial profile, with an optional
/// Lipschitz constant used by schemes that require Lipschitz data.
#[derive(Clone)]
pub struct InitialData {
    pub name: String,
    pub dim: usize,
    eval: EvalFn,
    pub lipschitz: Option<f64>,
}

impl InitialData {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        lipschitz: Option<f64>,
    ) -> Self {
        InitialData {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            lipschitz,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    /// Boundedness and sampled uniform continuity on a fixed probe grid.
    /// Returns the observed sup and the largest jump between adjacent probes.
    pub fn probe_check(&self, half_width: f64, per_axis: usize) -> (f64, f64) {
        let d = self.dim;
        let n = per_axis.max(2);
        let h = 2.0 * half_width / (n - 1) as f64;
        let total: usize = n.pow(d as u32);
        let mut sup = 0.0f64;
        let mut jump = 0.0f64;
        for idx in 0..total {
            let mut rem = idx;
            let mut x = vec![0.0; d];
            for a in 0..d {
                x[a] = -half_width + (rem % n) as f64 * h;
                rem /= n;
            }
            let v = self.eval(&x);
            sup = sup.max(v.abs());
            for a in 0..d {
                let mut y = x.clone();
                y[a] += h;
                if y[a] <= half_width + 1e-12 {
                    jump = jump.max((self.eval(&y) - v).abs());
                }
            }
        }
        (sup, jump)
    }
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialData")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// Linear profile p.x — unbounded, used only for probes, not in the registry.
pub fn linear(p: &[f64]) -> InitialData {
    let p = p.to_vec();
    let lip = p.iter().map(|v| v.abs()).sum::<f64>();
    InitialData::new(
        format!("linear{:?}", p),
        p.len(),
        move |x| x.iter().zip(&p).map(|(a, b)| a * b).sum(),
        Some(lip),
    )
}

pub const REGISTRY: &[&str] = &["zero", "tent", "cos_x1", "bump", "gauss", "tanh_x1"];

/// Construct a registered profile for a given dimension.
pub fn by_name(name: &str, dim: usize) -> Result<InitialData> {
    match name {
        "zero" => Ok(InitialData::new("zero", dim, |_| 0.0, Some(0.0))),
        // l1 tent: max(0, 1 - sum |x_i|), Lipschitz 1 per axis
        "tent" => Ok(InitialData::new(
            "tent",
            dim,
            |x| (1.0 - x.iter().map(|v| v.abs()).sum::<f64>()).max(0.0),
            Some(1.0),
        )),
        "cos_x1" => Ok(InitialData::new("cos_x1", dim, |x| x[0].cos(), Some(1.0))),
        // smooth bump supported on the unit ball, height 1 at the origin
        "bump" => Ok(InitialData::new(
            "bump",
            dim,
            |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 < 1.0 {
                    (1.0 - 1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            },
            Some(2.0),
        )),
        "gauss" => Ok(InitialData::new(
            "gauss",
            dim,
            |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp(),
            Some(1.0),
        )),
        // bounded, strictly monotone in x_1, constant in the other axes
        "tanh_x1" => Ok(InitialData::new("tanh_x1", dim, |x| x[0].tanh(), Some(1.0))),
        _ => Err(GrowthError::UnknownName {
            kind: "initial data",
            name: name.to_string(),
        }),
    }
}
