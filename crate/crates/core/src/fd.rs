//! An explicit finite-difference solver for the quasilinear limit equations
//! u_t = tr(A D^2 u) + H(Du), used as an independent cross-check on scaled
//! growth models. Centered second differences for the diffusion, local
//! Lax-Friedrichs for the Hamiltonian, clamped (copy-edge) boundaries.
//!
//! Callers should solve on a window enlarged beyond the region they sample,
//! so the boundary treatment never pollutes the comparison.

use crate::error::{GrowthError, Result};
use crate::initial::InitialData;
use crate::operators::SmoothAH;

/// Safety factor in the explicit time-step bound.
pub const C_CFL: f64 = 0.4;

/// A scalar field on a uniform grid over a rectangular window, with
/// multilinear interpolation between nodes.
#[derive(Clone, Debug)]
pub struct GridSolution {
    pub window: Vec<(f64, f64)>,
    /// Nodes per axis (includes both endpoints).
    pub n: usize,
    pub values: Vec<f64>,
    pub time: f64,
}

impl GridSolution {
    pub fn dim(&self) -> usize {
        self.window.len()
    }

    fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.window[axis];
        (hi - lo) / (self.n - 1) as f64
    }

    fn index_of(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for &i in idx {
            flat = flat * self.n + i;
        }
        flat
    }

    /// Multilinear interpolation; x must lie inside the window.
    pub fn sample(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(GrowthError::DimensionMismatch { expected: d, got: x.len() });
        }
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for i in 0..d {
            let (lo, hi) = self.window[i];
            if x[i] < lo - 1e-12 || x[i] > hi + 1e-12 {
                return Err(GrowthError::InvalidArgument(format!(
                    "sample point {x:?} outside window on axis {i}"
                )));
            }
            let u = ((x[i] - lo) / self.spacing(i)).clamp(0.0, (self.n - 1) as f64);
            let b = (u.floor() as usize).min(self.n - 2);
            base[i] = b;
            frac[i] = u - b as f64;
        }
        let corners = 1usize << d;
        let mut out = 0.0;
        let mut idx = vec![0usize; d];
        for c in 0..corners {
            let mut w = 1.0;
            for i in 0..d {
                if c & (1 << i) != 0 {
                    idx[i] = base[i] + 1;
                    w *= frac[i];
                } else {
                    idx[i] = base[i];
                    w *= 1.0 - frac[i];
                }
            }
            out += w * self.values[self.index_of(&idx)];
        }
        Ok(out)
    }
}

fn clamp_shift(idx: usize, delta: i64, n: usize) -> usize {
    let j = idx as i64 + delta;
    j.clamp(0, n as i64 - 1) as usize
}

/// March u_t = tr(A D^2 u) + H(Du) from u0 up to `t_final` on `window`
/// with `n` nodes per axis.
///
/// The explicit step is dt = C_CFL * dx^2 / sum_i (2 A_ii + dx alpha_i),
/// where alpha_i bounds |dH/dp_i| over the initial gradient range (doubled
/// as a safety margin). Returns an error if the bound degenerates.
pub fn fd_cross_solve(
    op: &SmoothAH,
    u0: &InitialData,
    window: &[(f64, f64)],
    n: usize,
    t_final: f64,
) -> Result<GridSolution> {
    let d = op.dim;
    if window.len() != d || u0.dim != d {
        return Err(GrowthError::DimensionMismatch { expected: d, got: window.len() });
    }
    if n < 3 {
        return Err(GrowthError::InvalidArgument(format!("need n >= 3 nodes, got {n}")));
    }
    for (axis, &(lo, hi)) in window.iter().enumerate() {
        if hi <= lo {
            return Err(GrowthError::EmptyWindow { axis, lo, hi });
        }
    }
    let dx: Vec<f64> = (0..d)
        .map(|i| (window[i].1 - window[i].0) / (n - 1) as f64)
        .collect();

    let total = n.pow(d as u32);
    let mut grid = GridSolution {
        window: window.to_vec(),
        n,
        values: vec![0.0; total],
        time: 0.0,
    };
    let mut coord = vec![0.0; d];
    let mut idx = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for i in (0..d).rev() {
            idx[i] = rem % n;
            rem /= n;
        }
        for i in 0..d {
            coord[i] = window[i].0 + idx[i] as f64 * dx[i];
        }
        grid.values[flat] = u0.eval(&coord);
    }

    // gradient bound of the initial data on the grid, per axis
    let mut p_bound = vec![0.0_f64; d];
    {
        let strides: Vec<usize> = (0..d).map(|i| n.pow((d - 1 - i) as u32)).collect();
        for flat in 0..total {
            let mut rem = flat;
            for i in (0..d).rev() {
                idx[i] = rem % n;
                rem /= n;
            }
            for i in 0..d {
                let up = clamp_shift(idx[i], 1, n);
                let dn = clamp_shift(idx[i], -1, n);
                let base = flat as i64 - (idx[i] * strides[i]) as i64;
                let vu = grid.values[(base + (up * strides[i]) as i64) as usize];
                let vd = grid.values[(base + (dn * strides[i]) as i64) as usize];
                let g = (vu - vd) / (((up - dn).max(1)) as f64 * dx[i]);
                p_bound[i] = p_bound[i].max(g.abs());
            }
        }
    }
    // alpha_i >= |dH/dp_i| = |sum_j h_ij p_j| over the gradient box, doubled
    let alpha: Vec<f64> = (0..d)
        .map(|i| {
            2.0 * (0..d)
                .map(|j| op.h_coeff.get(i, j).abs() * p_bound[j])
                .sum::<f64>()
        })
        .collect();

    let dx_min = dx.iter().cloned().fold(f64::INFINITY, f64::min);
    let denom: f64 = (0..d)
        .map(|i| 2.0 * op.a_diag[i] + dx[i] * alpha[i])
        .sum();
    if denom <= 0.0 {
        return Err(GrowthError::CflViolation { dt: f64::INFINITY, limit: 0.0 });
    }
    let dt_stable = C_CFL * dx_min * dx_min / denom;
    let steps = (t_final / dt_stable).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    if dt > dt_stable * (1.0 + 1e-12) {
        return Err(GrowthError::CflViolation { dt, limit: dt_stable });
    }

    let strides: Vec<usize> = (0..d).map(|i| n.pow((d - 1 - i) as u32)).collect();
    let mut next = grid.values.clone();
    let mut p = vec![0.0; d];
    for _ in 0..steps {
        for flat in 0..total {
            let mut rem = flat;
            for i in (0..d).rev() {
                idx[i] = rem % n;
                rem /= n;
            }
            let u = grid.values[flat];
            let mut diffusion = 0.0;
            let mut lf = 0.0;
            for i in 0..d {
                let up = clamp_shift(idx[i], 1, n);
                let dn = clamp_shift(idx[i], -1, n);
                let base = flat - idx[i] * strides[i];
                let vu = grid.values[base + up * strides[i]];
                let vd = grid.values[base + dn * strides[i]];
                let second = (vu - 2.0 * u + vd) / (dx[i] * dx[i]);
                diffusion += op.a_diag[i] * second;
                p[i] = (vu - vd) / (((up - dn).max(1)) as f64 * dx[i]);
                // artificial viscosity of the local Lax-Friedrichs flux
                lf += 0.5 * alpha[i] * dx[i] * second;
            }
            let h = 0.5 * op.h_coeff.quad_form(&p);
            next[flat] = u + dt * (diffusion + h + lf);
        }
        std::mem::swap(&mut grid.values, &mut next);
        grid.time += dt;
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial;
    use crate::operators::{smooth_limit_operator, SymMatrix, SmoothAH};
    use crate::oracles::separable_heat_oracle;

    fn pure_heat(dim: usize, nu: f64) -> SmoothAH {
        SmoothAH {
            dim,
            a_diag: vec![nu; dim],
            h_coeff: SymMatrix::zeros(dim),
            symmetry_error: 0.0,
        }
    }

    #[test]
    fn heat_equation_matches_series_solution() {
        let u0 = initial::by_name("cos_x1", 1).unwrap();
        let pi = std::f64::consts::PI;
        let n = 257; // dx = 6 pi / 256 on the enlarged window
        let sol = fd_cross_solve(&pure_heat(1, 0.5), &u0, &[(-3.0 * pi, 3.0 * pi)], n, 0.5).unwrap();
        let mut worst = 0.0_f64;
        for k in 0..=64 {
            let x = -pi + 2.0 * pi * k as f64 / 64.0;
            let exact = separable_heat_oracle(&u0, 0.5, &[x], 0.5).unwrap();
            worst = worst.max((sol.sample(&[x]).unwrap() - exact).abs());
        }
        assert!(worst < 1e-3, "sup error {worst}");
    }

    #[test]
    fn constant_data_is_a_fixed_point() {
        let u0 = initial::InitialData::new("const", 1, |_: &[f64]| 2.5, Some(0.0));
        let sol = fd_cross_solve(&pure_heat(1, 0.25), &u0, &[(-1.0, 1.0)], 65, 0.3).unwrap();
        for &v in &sol.values {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_hamiltonian_grows_linear_data() {
        // u0 = p x with H(p) = p^2 / 2 and no diffusion: exact solution is
        // p x + t p^2 / 2; interior values should match away from the edges
        let p = 0.5;
        let u0 = initial::InitialData::new("lin", 1, move |x: &[f64]| p * x[0], Some(p));
        let mut op = smooth_limit_operator(&crate::drivers::SmoothPhiSpec::kpz_1d());
        op.a_diag = vec![0.0];
        let sol = fd_cross_solve(&op, &u0, &[(-4.0, 4.0)], 257, 0.4).unwrap();
        for &x in &[-1.0, 0.0, 0.7] {
            let exact = p * x + 0.4 * 0.5 * p * p;
            assert!((sol.sample(&[x]).unwrap() - exact).abs() < 2e-3, "x={x}");
        }
    }

    #[test]
    fn two_dimensional_heat_decays_symmetrically() {
        let u0 = initial::by_name("gauss", 2).unwrap();
        let sol = fd_cross_solve(&pure_heat(2, 0.25), &u0, &[(-4.0, 4.0), (-4.0, 4.0)], 81, 0.2)
            .unwrap();
        let a = sol.sample(&[0.5, 0.0]).unwrap();
        let b = sol.sample(&[0.0, 0.5]).unwrap();
        let c = sol.sample(&[-0.5, 0.0]).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!((a - c).abs() < 1e-10);
        let center0 = u0.eval(&[0.0, 0.0]);
        let center = sol.sample(&[0.0, 0.0]).unwrap();
        assert!(center < center0 && center > 0.0);
    }

    #[test]
    fn sample_interpolates_multilinearly() {
        let sol = GridSolution {
            window: vec![(0.0, 1.0)],
            n: 2,
            values: vec![1.0, 3.0],
            time: 0.0,
        };
        assert_eq!(sol.sample(&[0.5]).unwrap(), 2.0);
        assert!(sol.sample(&[2.0]).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        let u0 = initial::by_name("zero", 1).unwrap();
        let op = pure_heat(1, 0.5);
        assert!(fd_cross_solve(&op, &u0, &[(-1.0, 1.0)], 2, 0.1).is_err());
        assert!(fd_cross_solve(&op, &u0, &[(1.0, -1.0)], 33, 0.1).is_err());
    }
}
