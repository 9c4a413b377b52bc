//! High-accuracy reference solutions used to measure `F(x) − F*`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::dist;
use crate::model::CompositeObjective;
use crate::projections::ConstraintSet;
use crate::solvers::fista::FistaState;

const MAX_ITERATIONS: usize = 1_000_000;
const POLISH_ITERATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub iterations: usize,
    /// Gradient-mapping norm at the point where the tolerance was first met.
    pub mapping_norm: f64,
}

/// `‖x − proj(x − h∇F(x))‖ / h`.
pub fn gradient_mapping_norm(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    let g = obj.full_gradient(x)?;
    let mut z: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - h * b).collect();
    set.project_in_place(&mut z);
    Ok(dist(x, &z) / h)
}

/// Solves from the projected origin. See [`run_reference_from`].
pub fn run_reference(obj: &CompositeObjective, set: &ConstraintSet, tol: f64) -> Result<Reference> {
    run_reference_from(obj, set, tol, &vec![0.0; obj.dim()])
}

/// Restarted FISTA with `h = 1/L` until the gradient-mapping norm drops to
/// `tol`, followed by a few polishing iterations.
pub fn run_reference_from(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    tol: f64,
    start: &[f64],
) -> Result<Reference> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {tol}")));
    }
    check_dim("constraint set", obj.dim(), set.dim())?;
    check_dim("start point", obj.dim(), start.len())?;
    let h = 1.0 / obj.lipschitz();
    let mut x0 = start.to_vec();
    set.project_in_place(&mut x0);
    let mut state = FistaState::new(obj, x0)?;

    let mut iterations = 0;
    let mut residual = gradient_mapping_norm(obj, set, &state.x, h)?;
    while residual > tol {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::Convergence {
                iterations,
                residual,
            });
        }
        state.step(obj, set, h)?;
        iterations += 1;
        residual = gradient_mapping_norm(obj, set, &state.x, h)?;
    }
    let mapping_norm = residual;
    for _ in 0..POLISH_ITERATIONS {
        state.step(obj, set, h)?;
    }
    Ok(Reference {
        f_star: state.f,
        x_star: state.x,
        iterations,
        mapping_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_svm_dual, LabeledDataset, Loss, SparseMatrix};

    #[test]
    fn least_squares_single_example() {
        let ds = LabeledDataset::new(
            SparseMatrix::from_dense(&[vec![1.0, 2.0]]).unwrap(),
            vec![3.0],
        )
        .unwrap();
        let obj = CompositeObjective::primal(&ds, Loss::Squared).unwrap();
        let set = ConstraintSet::uniform_box(2, -1e10, 1e10).unwrap();
        let r = run_reference(&obj, &set, 1e-12).unwrap();
        assert!(r.f_star < 1e-24);
        // minimum-norm solution (3/5)(1, 2) is where gradient descent from 0 lands
        assert!((r.x_star[0] - 0.6).abs() < 1e-12 && (r.x_star[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn svm_dual_one_example() {
        let ds = LabeledDataset::new(SparseMatrix::from_dense(&[vec![1.0]]).unwrap(), vec![1.0])
            .unwrap();
        let (obj, set) = build_svm_dual(&ds, 1.0).unwrap();
        let r = run_reference(&obj, &set, 1e-12).unwrap();
        assert!((r.x_star[0] - 1.0).abs() < 1e-10);
        assert!((r.f_star + 0.5).abs() < 1e-10);
    }

    #[test]
    fn svm_dual_two_examples() {
        let ds = LabeledDataset::new(
            SparseMatrix::from_dense(&[vec![1.0], vec![1.0]]).unwrap(),
            vec![1.0, -1.0],
        )
        .unwrap();
        let (obj, set) = build_svm_dual(&ds, 0.5).unwrap();
        let r = run_reference(&obj, &set, 1e-12).unwrap();
        assert!((r.f_star + 2.0).abs() < 1e-10);
        assert!((r.x_star[0] - 1.0).abs() < 1e-9 && (r.x_star[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let ds = LabeledDataset::new(SparseMatrix::from_dense(&[vec![1.0]]).unwrap(), vec![1.0])
            .unwrap();
        let obj = CompositeObjective::primal(&ds, Loss::Squared).unwrap();
        let set = ConstraintSet::linf_ball(1, 1.0).unwrap();
        assert!(run_reference(&obj, &set, 0.0).is_err());
    }
}
