//! The limit operators: first-order Hamiltonians for the hyperbolic rules,
//! and the (possibly discontinuous) second-order operators F(X, p) for the
//! parabolic ones, including their upper/lower envelopes at gradient
//! singularities.

use crate::drivers::SmoothPhiSpec;
use serde::Serialize;

/// Dense symmetric d x d matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn from_rows(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        let m = SymMatrix { dim, data };
        for i in 0..dim {
            for j in 0..i {
                debug_assert!(
                    (m.get(i, j) - m.get(j, i)).abs() < 1e-9,
                    "matrix not symmetric at ({i},{j})"
                );
            }
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = SymMatrix::zeros(dim);
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// x^T M x.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += x[i] * self.get(i, j) * x[j];
            }
        }
        s
    }

    /// Loewner order check M <= other, i.e. other - M is positive
    /// semidefinite (verified on a fixed probe set of directions).
    pub fn leq_probe(&self, other: &SymMatrix, dirs: &[Vec<f64>]) -> bool {
        dirs.iter()
            .all(|x| other.quad_form(x) - self.quad_form(x) >= -1e-12)
    }
}

/// H(p) = max_i |p_i|: the Hamiltonian of the max-of-neighbors rule.
pub fn h_max(p: &[f64]) -> f64 {
    p.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
}

/// H(p) = (1/2d) sum_i |p_i|: the Hamiltonian of the positive-part
/// averaging rule. (Each axis contributes (p_i)_+ + (-p_i)_+ = |p_i|.)
pub fn h_pospart(p: &[f64]) -> f64 {
    p.iter().map(|v| v.abs()).sum::<f64>() / (2.0 * p.len() as f64)
}

/// The quasilinear limit of a smooth-Phi rule under parabolic scaling:
/// tr(A X) + H(p) with constant diffusion A and quadratic Hamiltonian H.
#[derive(Clone, Debug)]
pub struct SmoothAH {
    pub dim: usize,
    /// Diagonal of A: A_ii = Phi_{v_i}(0) (= Phi_{v_{-i}}(0)).
    pub a_diag: Vec<f64>,
    /// Coefficients of H(p) = (1/2) sum_{ij} h_coeff[i][j] p_i p_j.
    pub h_coeff: SymMatrix,
    /// Max asymmetry |Phi_{v_i}(0) - Phi_{v_{-i}}(0)| seen while extracting
    /// A; large values indicate drift and an invalid parabolic limit.
    pub symmetry_error: f64,
}

impl SmoothAH {
    pub fn evaluate(&self, x_mat: &SymMatrix, p: &[f64]) -> f64 {
        let diffusion: f64 = (0..self.dim).map(|i| self.a_diag[i] * x_mat.get(i, i)).sum();
        diffusion + 0.5 * self.h_coeff.quad_form(p)
    }
}

/// Extract the limit operator of a smooth-Phi rule from its derivatives
/// at zero. With the neighbor-difference indexing (2i -> +e_{i+1},
/// 2i+1 -> -e_{i+1}), the Hamiltonian coefficient for (i, j) is
/// Phi_{v_i v_j}(0) + Phi_{v_{-i} v_{-j}}(0) - 2 Phi_{v_i v_{-j}}(0).
pub fn smooth_limit_operator(spec: &SmoothPhiSpec) -> SmoothAH {
    let d = spec.dim;
    let g = spec.grad0();
    let h = spec.hess0();
    let m = 2 * d;
    let mut a_diag = Vec::with_capacity(d);
    let mut symmetry_error = 0.0_f64;
    for i in 0..d {
        let (gp, gm) = (g[2 * i], g[2 * i + 1]);
        symmetry_error = symmetry_error.max((gp - gm).abs());
        a_diag.push(0.5 * (gp + gm));
    }
    let mut h_coeff = SymMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let (ip, im) = (2 * i, 2 * i + 1);
            let (jp, jm) = (2 * j, 2 * j + 1);
            let c = h[ip * m + jp] + h[im * m + jm] - h[ip * m + jm] - h[im * m + jp];
            h_coeff.set(i, j, c);
        }
    }
    SmoothAH { dim: d, a_diag, h_coeff, symmetry_error }
}

/// Whether a coordinate set is ordered by minimal or maximal |p_i|.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    MinCoordinates,
    MaxCoordinates,
}

/// Coordinates grouped by comparing |p_i| against the remaining ones,
/// using exact floating-point comparison. For the min orientation the
/// selected set is argmin_i |p_i| (all ties included); max is symmetric.
/// At p = 0 every coordinate is selected.
pub fn classify_partition(p: &[f64], orientation: Orientation) -> Vec<usize> {
    let d = p.len();
    let mut extreme = match orientation {
        Orientation::MinCoordinates => f64::INFINITY,
        Orientation::MaxCoordinates => f64::NEG_INFINITY,
    };
    for &v in p {
        match orientation {
            Orientation::MinCoordinates => extreme = extreme.min(v.abs()),
            Orientation::MaxCoordinates => extreme = extreme.max(v.abs()),
        }
    }
    (0..d).filter(|&i| p[i].abs() == extreme).collect()
}

/// Value of a possibly discontinuous operator at a point: either a plain
/// value, or the (lower, upper) envelope pair at a singularity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum OperatorValue {
    Value(f64),
    Envelope { lower: f64, upper: f64 },
}

impl OperatorValue {
    pub fn value(self) -> f64 {
        match self {
            OperatorValue::Value(v) => v,
            OperatorValue::Envelope { lower, upper } => 0.5 * (lower + upper),
        }
    }

    pub fn contains(self, v: f64, tol: f64) -> bool {
        match self {
            OperatorValue::Value(w) => (v - w).abs() <= tol,
            OperatorValue::Envelope { lower, upper } => v >= lower - tol && v <= upper + tol,
        }
    }
}

fn selective_value(x_mat: &SymMatrix, selected: &[usize]) -> OperatorValue {
    if selected.len() == 1 {
        return OperatorValue::Value(0.5 * x_mat.get(selected[0], selected[0]));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &i in selected {
        lo = lo.min(x_mat.get(i, i));
        hi = hi.max(x_mat.get(i, i));
    }
    OperatorValue::Envelope { lower: 0.5 * lo, upper: 0.5 * hi }
}

/// Limit operator of the median rule: X_ii / 2 on the coordinate i with
/// minimal |p_i|; on ties, the envelope pair over the tied set.
pub fn f_median(x_mat: &SymMatrix, p: &[f64]) -> OperatorValue {
    let sel = classify_partition(p, Orientation::MinCoordinates);
    selective_value(x_mat, &sel)
}

/// Limit operator of the restricted solid-on-solid rule: as `f_median` but
/// over the coordinates with maximal |p_i| (crystalline infinity Laplacian).
pub fn f_crystalline(x_mat: &SymMatrix, p: &[f64]) -> OperatorValue {
    let sel = classify_partition(p, Orientation::MaxCoordinates);
    selective_value(x_mat, &sel)
}

/// Limit operator of the even-power / fractional-power potential rules:
/// a |p_i|^e-weighted average of the X_ii, with exponent e = k - 2 for the
/// power family or e = delta for the fractional one.
pub fn f_weighted(x_mat: &SymMatrix, p: &[f64], exponent: f64) -> OperatorValue {
    let d = p.len();
    let weights: Vec<f64> = p.iter().map(|v| v.abs().powf(exponent)).collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return envelope_weighted(x_mat, d);
    }
    let s: f64 = (0..d).map(|i| weights[i] * x_mat.get(i, i)).sum();
    OperatorValue::Value(0.5 * s / total)
}

/// The envelope pair of the weighted operator at p = 0: all weight can
/// concentrate on any single axis along a gradient sequence, so the
/// semicontinuous envelopes are half the extreme diagonal entries.
pub fn envelope_weighted(x_mat: &SymMatrix, dim: usize) -> OperatorValue {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..dim {
        lo = lo.min(x_mat.get(i, i));
        hi = hi.max(x_mat.get(i, i));
    }
    OperatorValue::Envelope { lower: 0.5 * lo, upper: 0.5 * hi }
}

/// Limit operator of a scaled growth rule, evaluated at (X, p).
#[derive(Clone, Debug)]
pub enum LimitOperator {
    /// H(p) = max_i |p_i| (hyperbolic; X is ignored).
    MaxHamiltonian,
    /// H(p) = (1/2d) sum |p_i| (hyperbolic; X is ignored).
    PosPartHamiltonian,
    /// tr(A X) + H(p) from a smooth Phi.
    SmoothQuasilinear(SmoothAH),
    /// Weighted diagonal average with exponent k - 2.
    WeightedPower { k: u32 },
    /// Weighted diagonal average with exponent delta.
    WeightedFractional { delta: f64 },
    /// Minimal-|p_i| diagonal average.
    Median,
    /// Maximal-|p_i| diagonal average.
    Crystalline,
}

impl LimitOperator {
    pub fn evaluate(&self, x_mat: &SymMatrix, p: &[f64]) -> OperatorValue {
        match self {
            LimitOperator::MaxHamiltonian => OperatorValue::Value(h_max(p)),
            LimitOperator::PosPartHamiltonian => OperatorValue::Value(h_pospart(p)),
            LimitOperator::SmoothQuasilinear(ah) => OperatorValue::Value(ah.evaluate(x_mat, p)),
            LimitOperator::WeightedPower { k } => f_weighted(x_mat, p, (*k - 2) as f64),
            LimitOperator::WeightedFractional { delta } => f_weighted(x_mat, p, *delta),
            LimitOperator::Median => f_median(x_mat, p),
            LimitOperator::Crystalline => f_crystalline(x_mat, p),
        }
    }

    /// Whether the operator is discontinuous in p at the given gradient.
    pub fn singular_at(&self, p: &[f64]) -> bool {
        match self {
            LimitOperator::MaxHamiltonian
            | LimitOperator::PosPartHamiltonian
            | LimitOperator::SmoothQuasilinear(_) => false,
            LimitOperator::WeightedPower { .. } | LimitOperator::WeightedFractional { .. } => {
                p.iter().all(|&v| v == 0.0)
            }
            // tied extreme |p_i| across axes switches the selected set
            LimitOperator::Median => {
                classify_partition(p, Orientation::MinCoordinates).len() > 1 && p.len() > 1
            }
            LimitOperator::Crystalline => {
                classify_partition(p, Orientation::MaxCoordinates).len() > 1 && p.len() > 1
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LimitOperator::MaxHamiltonian => "max_hamiltonian",
            LimitOperator::PosPartHamiltonian => "pospart_hamiltonian",
            LimitOperator::SmoothQuasilinear(_) => "smooth_quasilinear",
            LimitOperator::WeightedPower { .. } => "weighted_power",
            LimitOperator::WeightedFractional { .. } => "weighted_fractional",
            LimitOperator::Median => "median_selective",
            LimitOperator::Crystalline => "crystalline_selective",
        }
    }
}

/// The limit operator matching a driver, when one is known in closed form.
pub fn limit_for(driver: &crate::drivers::Driver) -> Option<LimitOperator> {
    use crate::drivers::{Driver, Potential};
    match driver {
        Driver::MaxNeighbor => Some(LimitOperator::MaxHamiltonian),
        Driver::PosPartAverage => Some(LimitOperator::PosPartHamiltonian),
        Driver::SmoothPhi(spec) => Some(LimitOperator::SmoothQuasilinear(smooth_limit_operator(spec))),
        Driver::ArgminPotential(Potential::PowerEven { k }) => {
            Some(LimitOperator::WeightedPower { k: *k })
        }
        Driver::ArgminPotential(Potential::FractionalPower { delta }) => {
            Some(LimitOperator::WeightedFractional { delta: *delta })
        }
        Driver::ArgminPotential(Potential::AbsoluteValue) | Driver::MedianMidpoint => {
            Some(LimitOperator::Median)
        }
        Driver::ArgminPotential(Potential::FlatWell { .. }) | Driver::RsosMidpoint => {
            Some(LimitOperator::Crystalline)
        }
        Driver::ArgminPotential(Potential::CustomConvex { .. }) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::SmoothPhiSpec;

    #[test]
    fn hamiltonians() {
        assert_eq!(h_max(&[1.0, -3.0, 2.0]), 3.0);
        assert_eq!(h_max(&[0.0, 0.0]), 0.0);
        // (|2| + |-2|) / 4 = 1
        assert_eq!(h_pospart(&[2.0, -2.0]), 1.0);
        assert_eq!(h_pospart(&[1.0]), 0.5);
    }

    #[test]
    fn kpz_limit_operator() {
        let ah = smooth_limit_operator(&SmoothPhiSpec::kpz_1d());
        assert!((ah.a_diag[0] - 0.25).abs() < 1e-12);
        // H(p) = p^2 / 2, so the coefficient matrix is [1]
        assert!((ah.h_coeff.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(ah.symmetry_error < 1e-12);
        let x = SymMatrix::diagonal(&[2.0]);
        // 0.25 * 2 + 0.5 * 3^2 = 5.0
        assert!((ah.evaluate(&x, &[3.0]) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn kpz_limit_from_finite_differences() {
        // strip the analytic derivatives and recompute numerically
        let mut spec = SmoothPhiSpec::kpz_1d();
        spec.analytic_grad0 = None;
        spec.analytic_hess0 = None;
        let ah = smooth_limit_operator(&spec);
        assert!((ah.a_diag[0] - 0.25).abs() < 1e-7);
        assert!((ah.h_coeff.get(0, 0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn partition_classification() {
        let p = [3.0, -1.0, 1.0, 0.5];
        assert_eq!(classify_partition(&p, Orientation::MinCoordinates), vec![3]);
        assert_eq!(classify_partition(&p, Orientation::MaxCoordinates), vec![0]);
        // exact ties are grouped
        let q = [2.0, -2.0, 0.0];
        assert_eq!(classify_partition(&q, Orientation::MaxCoordinates), vec![0, 1]);
        assert_eq!(classify_partition(&q, Orientation::MinCoordinates), vec![2]);
        // p = 0 selects every coordinate under both orientations
        let z = [0.0, 0.0];
        assert_eq!(classify_partition(&z, Orientation::MinCoordinates), vec![0, 1]);
        assert_eq!(classify_partition(&z, Orientation::MaxCoordinates), vec![0, 1]);
    }

    #[test]
    fn selective_operators() {
        let x = SymMatrix::diagonal(&[4.0, -2.0, 6.0]);
        let p = [1.0, 0.1, 2.0];
        // min |p_i| at axis 1 -> X_22 / 2; max at axis 2 -> X_33 / 2
        assert_eq!(f_median(&x, &p), OperatorValue::Value(-1.0));
        assert_eq!(f_crystalline(&x, &p), OperatorValue::Value(3.0));
        // p = (3, 1), X = diag(7, -2): minimal coordinate is the second
        let x2 = SymMatrix::diagonal(&[7.0, -2.0]);
        assert_eq!(f_median(&x2, &[3.0, 1.0]), OperatorValue::Value(-1.0));
        assert_eq!(f_crystalline(&x2, &[3.0, 1.0]), OperatorValue::Value(3.5));
        // tied |p_1| = |p_2| with X = diag(1, 5): envelope pair (0.5, 2.5)
        let x3 = SymMatrix::diagonal(&[1.0, 5.0]);
        assert_eq!(
            f_median(&x3, &[2.0, -2.0]),
            OperatorValue::Envelope { lower: 0.5, upper: 2.5 }
        );
        // p = 0, X = diag(-1, 0): envelopes (-1/2, 0)
        let x4 = SymMatrix::diagonal(&[-1.0, 0.0]);
        assert_eq!(
            f_crystalline(&x4, &[0.0, 0.0]),
            OperatorValue::Envelope { lower: -0.5, upper: 0.0 }
        );
        // tie across all axes at p = 0 spans the full diagonal range
        let z = [0.0, 0.0, 0.0];
        assert_eq!(f_median(&x, &z), OperatorValue::Envelope { lower: -1.0, upper: 3.0 });
        assert_eq!(f_median(&x, &z), f_crystalline(&x, &z));
    }

    #[test]
    fn envelope_attained_along_gradient_sequences() {
        // at tied p the envelope bounds are limits of F along sequences
        // confined to a single selected coordinate
        let x = SymMatrix::diagonal(&[1.0, 5.0]);
        let tied = f_median(&x, &[1.0, -1.0]);
        for (axis, expect) in [(0, 0.5), (1, 2.5)] {
            let mut p = [1.0, -1.0];
            p[axis] *= 1.0 - 1e-9; // push axis into the strict minimum
            let v = f_median(&x, &p).value();
            assert!((v - expect).abs() < 1e-12);
            assert!(tied.contains(v, 1e-12));
        }
    }

    #[test]
    fn weighted_operator_and_envelope() {
        let x = SymMatrix::diagonal(&[2.0, 6.0]);
        // k = 4 -> exponent 2: (1*2 + 4*6) / (2 * 5) = 2.6
        match f_weighted(&x, &[1.0, 2.0], 2.0) {
            OperatorValue::Value(v) => assert!((v - 2.6).abs() < 1e-14),
            _ => panic!("expected a value away from p = 0"),
        }
        match f_weighted(&x, &[0.0, 0.0], 2.0) {
            OperatorValue::Envelope { lower, upper } => {
                assert_eq!(lower, 1.0);
                assert_eq!(upper, 3.0);
            }
            _ => panic!("expected the envelope at p = 0"),
        }
        // the envelope is attained along gradient sequences p_n -> 0 with
        // all weight on one axis
        let along_axis0 = f_weighted(&x, &[1e-8, 0.0], 2.0);
        assert!(along_axis0.contains(1.0, 1e-12));
        let along_axis1 = f_weighted(&x, &[0.0, 1e-8], 2.0);
        assert!(along_axis1.contains(3.0, 1e-12));
    }

    #[test]
    fn singularity_detection() {
        let med = LimitOperator::Median;
        assert!(med.singular_at(&[1.0, -1.0]));
        assert!(!med.singular_at(&[1.0, 2.0]));
        assert!(med.singular_at(&[0.0, 0.0]));
        let wp = LimitOperator::WeightedPower { k: 4 };
        assert!(wp.singular_at(&[0.0, 0.0]));
        assert!(!wp.singular_at(&[0.0, 1.0]));
        let cr = LimitOperator::Crystalline;
        assert!(cr.singular_at(&[2.0, -2.0]));
        assert!(!cr.singular_at(&[2.0, 1.0]));
    }

    #[test]
    fn degenerate_ellipticity_probe() {
        // X <= Y (diagonal) implies F(X, p) <= F(Y, p) for the selective
        // and weighted operators
        let x = SymMatrix::diagonal(&[1.0, -1.0]);
        let y = SymMatrix::diagonal(&[2.0, 0.5]);
        let p = [0.7, -1.3];
        for op in [
            LimitOperator::Median,
            LimitOperator::Crystalline,
            LimitOperator::WeightedPower { k: 4 },
            LimitOperator::WeightedFractional { delta: 0.5 },
        ] {
            let fx = op.evaluate(&x, &p).value();
            let fy = op.evaluate(&y, &p).value();
            assert!(fx <= fy + 1e-12, "{}", op.name());
        }
    }

    #[test]
    fn sym_matrix_basics() {
        let mut m = SymMatrix::zeros(2);
        m.set(0, 1, 3.0);
        m.set(0, 0, 1.0);
        assert_eq!(m.get(1, 0), 3.0);
        assert_eq!(m.trace(), 1.0);
        assert_eq!(m.quad_form(&[1.0, 1.0]), 7.0);
        let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0]];
        let bigger = SymMatrix::from_rows(2, vec![2.0, 3.0, 3.0, 1.0]);
        assert!(m.leq_probe(&bigger, &dirs));
    }
}
