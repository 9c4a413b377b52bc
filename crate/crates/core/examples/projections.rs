//! Euclidean projections onto a box, an L∞ ball and an L1 ball, checked
//! against a brute-force grid search in two dimensions.
//!
//! ```text
//! cargo run --release --example projections
//! ```

use ps2gd::linalg::dist;
use ps2gd::oracles::grid_projection_oracle;
use ps2gd::projections::{ConstraintSet, ConstraintSpec};

fn main() -> ps2gd::Result<()> {
    let sets = [
        ConstraintSet::boxed(vec![-0.2, 0.0], vec![0.3, 0.5])?,
        "linf:0.25".parse::<ConstraintSpec>()?.build(2)?,
        "l1:0.5".parse::<ConstraintSpec>()?.build(2)?,
    ];
    let points = [[0.9, 0.1], [-1.0, -2.0], [0.05, 0.1]];
    for set in &sets {
        println!("{}:", set.kind());
        for z in &points {
            let p = set.project(z)?;
            let grid = grid_projection_oracle(set, z, 1e-3)?;
            println!(
                "  {z:?} -> [{:.4}, {:.4}]  (grid search differs by {:.1e})",
                p[0],
                p[1],
                dist(&p, &grid)
            );
        }
    }

    // in high dimension the L1 projection is a soft threshold
    let l1 = ConstraintSet::l1_ball(6, 1.0)?;
    let p = l1.project(&[3.0, -2.0, 0.5, 0.1, -0.05, 1.5])?;
    println!(
        "l1 ball in 6-D: {p:.3?}, norm {:.3}",
        p.iter().map(|v| v.abs()).sum::<f64>()
    );
    Ok(())
}
