//! Exact Euclidean projections onto the compact polyhedra used by the solvers.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::model::SparseRow;

/// A compact polyhedral feasible region `{x : Cx ≤ c}` with a closed-form projection.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    /// `lower ≤ x ≤ upper`, coordinate-wise.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `‖x‖_∞ ≤ radius`.
    LinfBall { dim: usize, radius: f64 },
    /// `‖x‖₁ ≤ radius`.
    L1Ball { dim: usize, radius: f64 },
}

impl ConstraintSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim("box bounds", lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::arg("box must have positive dimension"));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::arg(format!("box bound {j} is not finite")));
            }
            if lo > hi {
                return Err(Error::arg(format!(
                    "box is empty: lower[{j}] = {lo} > upper[{j}] = {hi}"
                )));
            }
        }
        Ok(ConstraintSet::Box { lower, upper })
    }

    pub fn uniform_box(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(vec![lower; dim], vec![upper; dim])
    }

    pub fn linf_ball(dim: usize, radius: f64) -> Result<Self> {
        check_radius(dim, radius)?;
        Ok(ConstraintSet::LinfBall { dim, radius })
    }

    pub fn l1_ball(dim: usize, radius: f64) -> Result<Self> {
        check_radius(dim, radius)?;
        Ok(ConstraintSet::L1Ball { dim, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::Box { lower, .. } => lower.len(),
            ConstraintSet::LinfBall { dim, .. } | ConstraintSet::L1Ball { dim, .. } => *dim,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConstraintSet::Box { .. } => "box",
            ConstraintSet::LinfBall { .. } => "linf",
            ConstraintSet::L1Ball { .. } => "l1",
        }
    }

    /// Euclidean projection `argmin_{x ∈ W} ½‖x − z‖²`.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim("project", self.dim(), z.len())?;
        let mut x = z.to_vec();
        self.project_in_place(&mut x);
        Ok(x)
    }

    /// In-place projection. The caller guarantees `x.len() == self.dim()`.
    pub fn project_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            ConstraintSet::Box { lower, upper } => {
                for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
                    *v = v.clamp(*lo, *hi);
                }
            }
            ConstraintSet::LinfBall { radius, .. } => {
                for v in x.iter_mut() {
                    *v = v.clamp(-radius, *radius);
                }
            }
            ConstraintSet::L1Ball { radius, .. } => project_l1_ball(x, *radius),
        }
    }

    /// True iff every defining inequality holds within `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim("contains", self.dim(), x.len())?;
        if tol.is_nan() || tol < 0.0 {
            return Err(Error::arg("tolerance must be nonnegative"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        Ok(match self {
            ConstraintSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol),
            ConstraintSet::LinfBall { radius, .. } => x.iter().all(|v| v.abs() <= radius + tol),
            ConstraintSet::L1Ball { radius, .. } => {
                x.iter().map(|v| v.abs()).sum::<f64>() <= radius + tol
            }
        })
    }

    /// Smallest axis-aligned box containing the set.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ConstraintSet::Box { lower, upper } => (lower.clone(), upper.clone()),
            ConstraintSet::LinfBall { dim, radius } | ConstraintSet::L1Ball { dim, radius } => {
                (vec![-radius; *dim], vec![*radius; *dim])
            }
        }
    }

    /// `max_{x ∈ W} |aᵀx|` for a sparse row `a`.
    pub fn support_abs(&self, row: SparseRow<'_>) -> f64 {
        match self {
            ConstraintSet::Box { lower, upper } => row
                .indices
                .iter()
                .zip(row.values)
                .map(|(&j, &v)| v.abs() * lower[j].abs().max(upper[j].abs()))
                .sum(),
            ConstraintSet::LinfBall { radius, .. } => {
                radius * row.values.iter().map(|v| v.abs()).sum::<f64>()
            }
            ConstraintSet::L1Ball { radius, .. } => {
                radius * row.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
        }
    }

    /// The polyhedral description `(C, c)` with `W = {x : Cx ≤ c}`.
    ///
    /// The L1 ball needs `2^d` facets, so it is only available for `d ≤ 16`.
    pub fn halfspaces(&self) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let d = self.dim();
        let unit = |j: usize, s: f64| {
            let mut row = vec![0.0; d];
            row[j] = s;
            row
        };
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        match self {
            ConstraintSet::Box { lower, upper } => {
                for j in 0..d {
                    rows.push(unit(j, 1.0));
                    rhs.push(upper[j]);
                    rows.push(unit(j, -1.0));
                    rhs.push(-lower[j]);
                }
            }
            ConstraintSet::LinfBall { radius, .. } => {
                for j in 0..d {
                    rows.push(unit(j, 1.0));
                    rhs.push(*radius);
                    rows.push(unit(j, -1.0));
                    rhs.push(*radius);
                }
            }
            ConstraintSet::L1Ball { radius, .. } => {
                if d > 16 {
                    return Err(Error::Budget(format!(
                        "l1 ball in dimension {d} has 2^{d} facets"
                    )));
                }
                for mask in 0u32..(1 << d) {
                    rows.push(
                        (0..d)
                            .map(|j| if mask & (1 << j) != 0 { -1.0 } else { 1.0 })
                            .collect(),
                    );
                    rhs.push(*radius);
                }
            }
        }
        Ok((rows, rhs))
    }
}

fn check_radius(dim: usize, radius: f64) -> Result<()> {
    if dim == 0 {
        return Err(Error::arg("ball must have positive dimension"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::arg(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Sort-and-threshold projection onto `{‖x‖₁ ≤ radius}`.
fn project_l1_ball(x: &mut [f64], radius: f64) {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    for v in x.iter_mut() {
        *v = v.signum() * (v.abs() - theta).max(0.0);
    }
}

/// Parses `linf:R`, `l1:R`, `box:LO:HI` or `none` (a box of half-width 1e10).
/// The dimension comes from the problem the set will be applied to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSpec {
    Linf(f64),
    L1(f64),
    Box(f64, f64),
    Unbounded,
}

impl ConstraintSpec {
    pub fn build(self, dim: usize) -> Result<ConstraintSet> {
        match self {
            ConstraintSpec::Linf(r) => ConstraintSet::linf_ball(dim, r),
            ConstraintSpec::L1(r) => ConstraintSet::l1_ball(dim, r),
            ConstraintSpec::Box(lo, hi) => ConstraintSet::uniform_box(dim, lo, hi),
            ConstraintSpec::Unbounded => ConstraintSet::uniform_box(dim, -1e10, 1e10),
        }
    }
}

impl FromStr for ConstraintSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::arg(format!("bad number '{t}' in constraint '{s}'")))
        };
        match parts.as_slice() {
            ["linf", r] => Ok(ConstraintSpec::Linf(num(r)?)),
            ["l1", r] => Ok(ConstraintSpec::L1(num(r)?)),
            ["box", lo, hi] => Ok(ConstraintSpec::Box(num(lo)?, num(hi)?)),
            ["none"] => Ok(ConstraintSpec::Unbounded),
            _ => Err(Error::arg(format!(
                "bad constraint '{s}' (expected linf:R, l1:R, box:LO:HI or none)"
            ))),
        }
    }
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintSpec::Linf(r) => write!(f, "linf:{r}"),
            ConstraintSpec::L1(r) => write!(f, "l1:{r}"),
            ConstraintSpec::Box(lo, hi) => write!(f, "box:{lo}:{hi}"),
            ConstraintSpec::Unbounded => f.write_str("none"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linf_clips() {
        let set = ConstraintSet::linf_ball(2, 0.1).unwrap();
        assert_eq!(set.project(&[0.5, -0.05]).unwrap(), vec![0.1, -0.05]);
    }

    #[test]
    fn l1_inside_is_untouched() {
        let set = ConstraintSet::l1_ball(2, 1.0).unwrap();
        assert_eq!(set.project(&[0.6, 0.3]).unwrap(), vec![0.6, 0.3]);
    }

    #[test]
    fn l1_threshold() {
        let set = ConstraintSet::l1_ball(2, 1.0).unwrap();
        assert_eq!(set.project(&[2.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        // threshold 1, signs preserved
        let set = ConstraintSet::l1_ball(3, 2.0).unwrap();
        let p = set.project(&[-2.5, 1.5, 0.1]).unwrap();
        assert!((p[0] + 1.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15 && p[2] == 0.0);
    }

    #[test]
    fn contains_examples() {
        let unit_box = ConstraintSet::uniform_box(2, 0.0, 1.0).unwrap();
        assert!(unit_box.contains(&[0.5, 0.5], 0.0).unwrap());
        let linf = ConstraintSet::linf_ball(2, 0.1).unwrap();
        assert!(linf.contains(&[0.1 + 1e-13, 0.0], 1e-12).unwrap());
        let l1 = ConstraintSet::l1_ball(2, 1.0).unwrap();
        assert!(!l1.contains(&[0.7, 0.4], 0.0).unwrap());
    }

    #[test]
    fn rejects_bad_sets_and_dims() {
        assert!(ConstraintSet::uniform_box(2, 1.0, 0.0).is_err());
        assert!(ConstraintSet::uniform_box(2, 0.0, f64::INFINITY).is_err());
        assert!(ConstraintSet::linf_ball(2, 0.0).is_err());
        let set = ConstraintSet::l1_ball(2, 1.0).unwrap();
        assert!(matches!(set.project(&[1.0]), Err(Error::Argument(_))));
        assert!(set.contains(&[1.0, 2.0, 3.0], 0.0).is_err());
    }

    #[test]
    fn halfspaces_agree_with_contains() {
        let sets = [
            ConstraintSet::boxed(vec![-1.0, 0.0, 0.5], vec![1.0, 2.0, 0.7]).unwrap(),
            ConstraintSet::linf_ball(3, 0.3).unwrap(),
            ConstraintSet::l1_ball(3, 0.5).unwrap(),
        ];
        let points = [
            [0.0, 0.1, 0.6],
            [0.2, -0.2, 0.05],
            [0.3, 0.3, 0.3],
            [-0.9, 1.9, 0.69],
            [0.1, 0.1, 0.29],
        ];
        for set in &sets {
            let (c, rhs) = set.halfspaces().unwrap();
            for p in &points {
                let by_halfspaces = c
                    .iter()
                    .zip(&rhs)
                    .all(|(row, r)| crate::linalg::dot(row, p) <= r + 1e-12);
                assert_eq!(
                    by_halfspaces,
                    set.contains(p, 1e-12).unwrap(),
                    "{set:?} {p:?}"
                );
            }
        }
    }

    #[test]
    fn support_matches_vertices() {
        let row_m = crate::model::SparseMatrix::from_dense(&[vec![1.0, -2.0]]).unwrap();
        let row = row_m.row(0);
        assert_eq!(
            ConstraintSet::linf_ball(2, 0.5).unwrap().support_abs(row),
            1.5
        );
        assert_eq!(
            ConstraintSet::l1_ball(2, 0.5).unwrap().support_abs(row),
            1.0
        );
        let b = ConstraintSet::boxed(vec![0.0, -1.0], vec![3.0, 0.5]).unwrap();
        assert_eq!(b.support_abs(row), 5.0);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            "linf:0.1".parse::<ConstraintSpec>().unwrap(),
            ConstraintSpec::Linf(0.1)
        );
        assert_eq!(
            "box:0:2".parse::<ConstraintSpec>().unwrap(),
            ConstraintSpec::Box(0.0, 2.0)
        );
        assert!("ball:1".parse::<ConstraintSpec>().is_err());
        let set = ConstraintSpec::Unbounded.build(3).unwrap();
        assert_eq!(set.dim(), 3);
    }
}
