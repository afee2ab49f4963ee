//! Least-squares rigid alignment (orthogonal Procrustes, reflections allowed).

use std::collections::HashSet;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::framework::Framework;
use crate::tolerance::Tolerances;

/// Moves `moving` by an orthogonal map plus translation so that each listed
/// vertex lands on its target coordinate.
///
/// Distances among the listed vertices must already agree with the distances
/// among the targets to within `geom_abs`.
pub fn align_onto(
    targets: &[(usize, DVector<f64>)],
    moving: &Framework,
    tol: &Tolerances,
) -> Result<Framework> {
    let d = moving.dim();
    if targets.is_empty() {
        return Err(Error::PreconditionFailed(
            "alignment needs at least one correspondence".into(),
        ));
    }
    let mut seen = HashSet::new();
    for (vertex, target) in targets {
        if *vertex >= moving.vertex_count() {
            return Err(Error::PreconditionFailed(format!(
                "vertex {vertex} out of range"
            )));
        }
        if !seen.insert(*vertex) {
            return Err(Error::PreconditionFailed(format!(
                "vertex {vertex} listed twice"
            )));
        }
        if target.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: target.len(),
            });
        }
    }

    let cfg = moving.config();
    for ((va, ta), (vb, tb)) in targets.iter().tuple_combinations() {
        let mismatch = ((ta - tb).norm() - cfg.distance(*va, *vb)).abs();
        if mismatch > tol.geom_abs() {
            return Err(Error::IncompatibleDistances {
                first: *va,
                second: *vb,
                mismatch,
            });
        }
    }

    let n = targets.len() as f64;
    let src_centroid = targets
        .iter()
        .fold(DVector::zeros(d), |acc, (v, _)| acc + cfg.point(*v))
        / n;
    let dst_centroid = targets
        .iter()
        .fold(DVector::zeros(d), |acc, (_, t)| acc + t)
        / n;

    let mut cross = DMatrix::zeros(d, d);
    for (v, t) in targets {
        cross += (t - &dst_centroid) * (cfg.point(*v) - &src_centroid).transpose();
    }
    let svd = cross.svd(true, true);
    let mut u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let sv = &svd.singular_values;
    // With a rank-deficient cross-covariance the optimum is not unique; pick
    // the proper rotation then.
    let weakest = sv.imin();
    if (&u * &v_t).determinant() < 0.0 && sv[weakest] <= tol.zero_rel() * sv.max() {
        u.column_mut(weakest).neg_mut();
    }
    let rotation = u * v_t;
    let translation = &dst_centroid - &rotation * &src_centroid;
    let moved = moving.with_config(cfg.transformed(&rotation, &translation))?;

    for (v, t) in targets {
        let miss = (moved.config().point(*v) - t).norm();
        if miss > tol.geom_abs() {
            return Err(Error::IncompatibleDistances {
                first: *v,
                second: *v,
                mismatch: miss,
            });
        }
    }
    Ok(moved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::Configuration;

    fn triangle() -> Framework {
        let cfg = Configuration::from_points(2, &[[0.0, 0.0], [1.0, 0.0], [0.2, 0.9]]).unwrap();
        Framework::complete(cfg)
    }

    fn targets_of(fw: &Framework) -> Vec<(usize, DVector<f64>)> {
        (0..fw.vertex_count())
            .map(|i| (i, fw.config().point(i).into_owned()))
            .collect()
    }

    #[test]
    fn identity_when_coincident() {
        let tol = Tolerances::default();
        let fw = triangle();
        let out = align_onto(&targets_of(&fw), &fw, &tol).unwrap();
        assert!((out.config().coords() - fw.config().coords()).amax() <= tol.geom_abs());
    }

    #[test]
    fn recovers_translation() {
        let tol = Tolerances::default();
        let fw = triangle();
        let shifted = fw
            .with_config(
                fw.config()
                    .transformed(&DMatrix::identity(2, 2), &DVector::from_vec(vec![5.0, 7.0])),
            )
            .unwrap();
        let out = align_onto(&targets_of(&fw), &shifted, &tol).unwrap();
        assert!((out.config().coords() - fw.config().coords()).amax() <= tol.geom_abs());
    }

    #[test]
    fn reflection_is_allowed() {
        let tol = Tolerances::default();
        let fw = triangle();
        let mirror = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let flipped = fw
            .with_config(fw.config().transformed(&mirror, &DVector::zeros(2)))
            .unwrap();
        let out = align_onto(&targets_of(&fw), &flipped, &tol).unwrap();
        assert!((out.config().coords() - fw.config().coords()).amax() <= tol.geom_abs());
    }

    #[test]
    fn rejects_mismatched_distances() {
        let tol = Tolerances::default();
        let fw = triangle();
        let targets = vec![
            (0, DVector::from_vec(vec![0.0, 0.0])),
            (1, DVector::from_vec(vec![2.0, 0.0])),
        ];
        assert!(matches!(
            align_onto(&targets, &fw, &tol),
            Err(Error::IncompatibleDistances { .. })
        ));
        assert!(align_onto(&[], &fw, &tol).is_err());
    }
}
