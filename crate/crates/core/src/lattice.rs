//! Discrete height fields on finite lattice boxes.
//!
//! A simulation runs on the domain of dependence: the initial box is the
//! lattice image of the continuum window expanded by one halo cell per step,
//! and every step shrinks the box by one cell on every face. Values inside
//! the shrunken box are then exact, as if computed on the infinite lattice.

use crate::drivers::Driver;
use crate::error::{GrowthError, Result};
use crate::initial::InitialData;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Space scaling: x ~ eps (hyperbolic) or x ~ sqrt(eps) (parabolic),
/// with time ~ eps in both cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingMode {
    Hyperbolic,
    Parabolic,
}

impl ScalingMode {
    pub fn space_exponent(self) -> f64 {
        match self {
            ScalingMode::Hyperbolic => 1.0,
            ScalingMode::Parabolic => 0.5,
        }
    }

    /// The lattice spacing in continuum units: eps^space_exponent.
    pub fn space_scale(self, epsilon: f64) -> f64 {
        match self {
            ScalingMode::Hyperbolic => epsilon,
            ScalingMode::Parabolic => epsilon.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalingMode::Hyperbolic => "hyperbolic",
            ScalingMode::Parabolic => "parabolic",
        }
    }
}

/// An axis-aligned box of lattice points, bounds inclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl LatticeBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        LatticeBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self, axis: usize) -> i64 {
        self.hi[axis] - self.lo[axis] + 1
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim()).any(|a| self.hi[a] < self.lo[a])
    }

    pub fn volume(&self) -> usize {
        (0..self.dim()).map(|a| self.len(a).max(0) as usize).product()
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .enumerate()
                .all(|(a, &x)| self.lo[a] <= x && x <= self.hi[a])
    }

    /// Row-major flat index of a point assumed to be inside the box.
    pub fn index_of(&self, point: &[i64]) -> usize {
        let mut idx = 0usize;
        for a in 0..self.dim() {
            idx = idx * self.len(a) as usize + (point[a] - self.lo[a]) as usize;
        }
        idx
    }

    /// Point at a row-major flat index.
    pub fn point_at(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut point = vec![0i64; d];
        for a in (0..d).rev() {
            let len = self.len(a) as usize;
            point[a] = self.lo[a] + (idx % len) as i64;
            idx /= len;
        }
        point
    }

    /// Box shrunk by one cell on every face.
    pub fn shrink(&self) -> LatticeBox {
        LatticeBox {
            lo: self.lo.iter().map(|&l| l + 1).collect(),
            hi: self.hi.iter().map(|&h| h - 1).collect(),
        }
    }
}

/// A finite snapshot of the discrete surface u(., step).
#[derive(Clone, Debug)]
pub struct HeightField {
    bounds: LatticeBox,
    values: Vec<f64>,
    step: u64,
    epsilon: f64,
    scaling: ScalingMode,
}

impl HeightField {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &LatticeBox {
        &self.bounds
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scaling(&self) -> ScalingMode {
        self.scaling
    }

    pub fn value(&self, point: &[i64]) -> Option<f64> {
        if self.bounds.contains(point) {
            Some(self.values[self.bounds.index_of(point)])
        } else {
            None
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// One exact growth step. The result lives on the shrunken box; the
    /// input is untouched (double-buffered).
    pub fn step(&self, driver: &Driver) -> Result<HeightField> {
        let d = self.dim();
        for a in 0..d {
            let len = self.bounds.len(a);
            if len < 3 {
                return Err(GrowthError::BoxTooSmall { axis: a, len });
            }
        }
        let new_bounds = self.bounds.shrink();
        let n = new_bounds.volume();
        let values: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|idx| {
                let point = new_bounds.point_at(idx);
                let center = self.values[self.bounds.index_of(&point)];
                let mut neighbors = Vec::with_capacity(2 * d);
                let mut q = point.clone();
                for a in 0..d {
                    q[a] += 1;
                    neighbors.push(self.values[self.bounds.index_of(&q)]);
                    q[a] -= 2;
                    neighbors.push(self.values[self.bounds.index_of(&q)]);
                    q[a] += 1;
                }
                driver.apply(center, &neighbors)
            })
            .collect();
        Ok(HeightField {
            bounds: new_bounds,
            values,
            step: self.step + 1,
            epsilon: self.epsilon,
            scaling: self.scaling,
        })
    }
}

/// Initialize the field at step 0 on the window's lattice image expanded by
/// `steps` halo cells per face, with values u0(eps^s * x).
pub fn init_field(
    u0: &InitialData,
    window: &[(f64, f64)],
    steps: u64,
    epsilon: f64,
    scaling: ScalingMode,
) -> Result<HeightField> {
    if epsilon <= 0.0 {
        return Err(GrowthError::NonPositiveEpsilon(epsilon));
    }
    for (a, &(lo, hi)) in window.iter().enumerate() {
        if hi < lo {
            return Err(GrowthError::EmptyWindow { axis: a, lo, hi });
        }
    }
    let s = scaling.space_scale(epsilon);
    let lo: Vec<i64> = window
        .iter()
        .map(|&(l, _)| (l / s).floor() as i64 - steps as i64)
        .collect();
    let hi: Vec<i64> = window
        .iter()
        .map(|&(_, h)| (h / s).ceil() as i64 + steps as i64)
        .collect();
    let bounds = LatticeBox::new(lo, hi);
    let d = bounds.dim();
    let n = bounds.volume();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let point = bounds.point_at(idx);
            let x: Vec<f64> = (0..d).map(|a| s * point[a] as f64).collect();
            u0.eval(&x)
        })
        .collect();
    Ok(HeightField {
        bounds,
        values,
        step: 0,
        epsilon,
        scaling,
    })
}

/// A run of the scheme, holding snapshots keyed by step index.
///
/// `run_full` keeps every step; `run_recording` keeps only requested steps
/// (streaming mode for long runs).
#[derive(Clone, Debug)]
pub struct Trajectory {
    epsilon: f64,
    scaling: ScalingMode,
    steps_run: u64,
    fields: BTreeMap<u64, HeightField>,
}

impl Trajectory {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scaling(&self) -> ScalingMode {
        self.scaling
    }

    pub fn steps_run(&self) -> u64 {
        self.steps_run
    }

    pub fn field(&self, step: u64) -> Option<&HeightField> {
        self.fields.get(&step)
    }

    pub fn fields(&self) -> impl Iterator<Item = &HeightField> {
        self.fields.values()
    }

    pub fn run_full(
        driver: &Driver,
        u0: &InitialData,
        window: &[(f64, f64)],
        epsilon: f64,
        scaling: ScalingMode,
        steps: u64,
    ) -> Result<Trajectory> {
        let record: Vec<u64> = (0..=steps).collect();
        Trajectory::run_recording(driver, u0, window, epsilon, scaling, steps, &record)
    }

    pub fn run_recording(
        driver: &Driver,
        u0: &InitialData,
        window: &[(f64, f64)],
        epsilon: f64,
        scaling: ScalingMode,
        steps: u64,
        record: &[u64],
    ) -> Result<Trajectory> {
        let mut fields = BTreeMap::new();
        let mut current = init_field(u0, window, steps, epsilon, scaling)?;
        if record.contains(&0) {
            fields.insert(0, current.clone());
        }
        for k in 1..=steps {
            current = current.step(driver)?;
            if record.contains(&k) {
                fields.insert(k, current.clone());
            }
        }
        Ok(Trajectory {
            epsilon,
            scaling,
            steps_run: steps,
            fields,
        })
    }

    /// The rescaled field u^eps at a continuum point: u(floor(x/eps^s), floor(t/eps)),
    /// with true floor (toward -infinity) on every coordinate.
    pub fn evaluate_scaled(&self, x: &[f64], t: f64) -> Result<f64> {
        let outside = || GrowthError::OutsideLightCone {
            point: x.to_vec(),
            time: t,
        };
        let step_f = (t / self.epsilon).floor();
        if step_f < 0.0 || step_f > self.steps_run as f64 {
            return Err(outside());
        }
        let step = step_f as u64;
        let field = self.fields.get(&step).ok_or_else(outside)?;
        let s = self.scaling.space_scale(self.epsilon);
        let site: Vec<i64> = x.iter().map(|&xi| (xi / s).floor() as i64).collect();
        field.value(&site).ok_or_else(outside)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial;

    #[test]
    fn zero_initial_data_gives_zero_field() {
        let u0 = initial::by_name("zero", 1).unwrap();
        let f = init_field(&u0, &[(-1.0, 1.0)], 3, 0.25, ScalingMode::Hyperbolic).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_initial_data_samples_scaled_sites() {
        // u0(x) = p x with p = 1, eps = 0.5 hyperbolic: site 3 holds 1.5.
        let u0 = initial::linear(&[1.0]);
        let f = init_field(&u0, &[(-2.0, 2.0)], 0, 0.5, ScalingMode::Hyperbolic).unwrap();
        assert_eq!(f.value(&[3]), Some(1.5));
    }

    #[test]
    fn tent_window_box_matches_light_cone_count() {
        // window [-2,2], eps = 1/8, 8 steps: 16-cell window image + 8 halo per side.
        let u0 = initial::by_name("tent", 1).unwrap();
        let f = init_field(&u0, &[(-2.0, 2.0)], 8, 0.125, ScalingMode::Hyperbolic).unwrap();
        assert_eq!(f.bounds().lo, vec![-24]);
        assert_eq!(f.bounds().hi, vec![24]);
    }

    #[test]
    fn init_rejects_bad_arguments() {
        let u0 = initial::by_name("zero", 1).unwrap();
        assert!(init_field(&u0, &[(-1.0, 1.0)], 0, 0.0, ScalingMode::Hyperbolic).is_err());
        assert!(init_field(&u0, &[(1.0, -1.0)], 0, 0.5, ScalingMode::Hyperbolic).is_err());
    }

    #[test]
    fn step_shrinks_box_and_keeps_input() {
        let u0 = initial::by_name("tent", 2).unwrap();
        let f = init_field(&u0, &[(-1.0, 1.0), (-1.0, 1.0)], 2, 0.25, ScalingMode::Parabolic)
            .unwrap();
        let before = f.values().to_vec();
        let g = f.step(&Driver::MaxNeighbor).unwrap();
        assert_eq!(g.step_index(), 1);
        for a in 0..2 {
            assert_eq!(g.bounds().lo[a], f.bounds().lo[a] + 1);
            assert_eq!(g.bounds().hi[a], f.bounds().hi[a] - 1);
        }
        assert_eq!(f.values(), &before[..]);
        // purity: same input, same output
        let g2 = f.step(&Driver::MaxNeighbor).unwrap();
        assert_eq!(g.values(), g2.values());
    }

    #[test]
    fn step_refuses_tiny_box() {
        let u0 = initial::by_name("zero", 1).unwrap();
        let f = init_field(&u0, &[(0.0, 0.1)], 0, 1.0, ScalingMode::Hyperbolic).unwrap();
        assert!(f.bounds().len(0) < 3);
        assert!(f.step(&Driver::MaxNeighbor).is_err());
    }

    #[test]
    fn max_driver_on_linear_field_adds_max_abs_slope() {
        // d = 2, p = (1, -2): every surviving value rises by 2 per step.
        let u0 = initial::linear(&[1.0, -2.0]);
        let f = init_field(&u0, &[(-1.0, 1.0), (-1.0, 1.0)], 2, 1.0, ScalingMode::Hyperbolic)
            .unwrap();
        let g = f.step(&Driver::MaxNeighbor).unwrap();
        for idx in 0..g.bounds().volume() {
            let p = g.bounds().point_at(idx);
            let old = f.value(&p).unwrap();
            assert!((g.value(&p).unwrap() - (old + 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn median_driver_freezes_monotone_one_dimensional_profiles() {
        let u0 = initial::by_name("tanh_x1", 2).unwrap();
        let f = init_field(&u0, &[(-1.0, 1.0), (-1.0, 1.0)], 1, 0.25, ScalingMode::Parabolic)
            .unwrap();
        let g = f.step(&Driver::MedianMidpoint).unwrap();
        for idx in 0..g.bounds().volume() {
            let p = g.bounds().point_at(idx);
            assert_eq!(g.value(&p), f.value(&p));
        }
    }

    #[test]
    fn light_cone_values_do_not_depend_on_box_size() {
        let u0 = initial::by_name("bump", 1).unwrap();
        let drv = Driver::PosPartAverage;
        let small = Trajectory::run_full(&drv, &u0, &[(-1.0, 1.0)], 0.25, ScalingMode::Hyperbolic, 4)
            .unwrap();
        let large = Trajectory::run_full(&drv, &u0, &[(-3.0, 3.0)], 0.25, ScalingMode::Hyperbolic, 4)
            .unwrap();
        let fs = small.field(4).unwrap();
        let fl = large.field(4).unwrap();
        for idx in 0..fs.bounds().volume() {
            let p = fs.bounds().point_at(idx);
            // bit-for-bit equality
            assert_eq!(fs.value(&p).unwrap(), fl.value(&p).unwrap());
        }
    }

    #[test]
    fn evaluate_scaled_floor_semantics() {
        let u0 = initial::linear(&[1.0]);
        let traj =
            Trajectory::run_full(&Driver::MaxNeighbor, &u0, &[(-2.0, 2.0)], 0.25, ScalingMode::Hyperbolic, 2)
                .unwrap();
        // x = -0.3, eps = 0.25 hyperbolic: site floor(-1.2) = -2, value -0.5.
        assert_eq!(traj.evaluate_scaled(&[-0.3], 0.1).unwrap(), -0.5);
        // lattice image point hits the stored value exactly
        assert_eq!(traj.evaluate_scaled(&[0.5], 0.1).unwrap(), 0.5);
        // piecewise constant within one eps-cell
        let a = traj.evaluate_scaled(&[0.26], 0.01).unwrap();
        let b = traj.evaluate_scaled(&[0.49], 0.24).unwrap();
        assert_eq!(a, b);
        // t in [0, eps) returns the sampled initial data
        assert_eq!(
            traj.evaluate_scaled(&[0.8], 0.1).unwrap(),
            0.25 * (0.8f64 / 0.25).floor()
        );
    }

    #[test]
    fn evaluate_scaled_rejects_outside_cone() {
        let u0 = initial::by_name("zero", 1).unwrap();
        let traj =
            Trajectory::run_full(&Driver::MaxNeighbor, &u0, &[(-1.0, 1.0)], 0.5, ScalingMode::Hyperbolic, 1)
                .unwrap();
        assert!(traj.evaluate_scaled(&[0.0], 5.0).is_err());
        assert!(traj.evaluate_scaled(&[100.0], 0.0).is_err());
    }
}
