//! Operation-level checks against independent oracles: direct distance loops,
//! determinant enumeration, and known rigid motions.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urigid_core::align::align_onto;
use urigid_core::stress::diagonalizing_basis;
use urigid_core::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn random_config(rng: &mut ChaCha8Rng, v: usize, d: usize) -> Configuration {
    Configuration::new(DMatrix::from_fn(d, v, |_, _| rng.random_range(-1.0..1.0))).unwrap()
}

fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

/// Oracle: affine independence by a nonzero bordered determinant, scaled by
/// the product of column norms.
fn general_position_by_determinants(cfg: &Configuration) -> bool {
    let b = cfg.bordered();
    let d = cfg.dim();
    (0..cfg.len()).combinations(d + 1).all(|subset| {
        let sub = b.select_columns(&subset);
        let scale: f64 = sub.column_iter().map(|c| c.norm()).product();
        sub.determinant().abs() > 1e-9 * scale
    })
}

#[test]
fn edge_function_matches_distance_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fw = Framework::complete(random_config(&mut rng, 4, 2));
    let f = fw.edge_function();
    let mut k = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut sq = 0.0;
            for c in 0..2 {
                let diff = fw.config().coords()[(c, i)] - fw.config().coords()[(c, j)];
                sq += diff * diff;
            }
            assert!((f[k] - 0.5 * sq).abs() < 1e-15);
            k += 1;
        }
    }
}

#[test]
fn k4_rank_and_stress_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fw = Framework::complete(random_config(&mut rng, 4, 2));
    assert!(fw.config().is_general_position(&tol()));
    assert_eq!(fw.rigidity_matrix().rank(&tol()), 5);
    let basis = stress_space_basis(&fw, &tol());
    assert_eq!(basis.len(), 1);
    let cert = verify_stress_matrix(&basis[0].to_matrix(), &fw, &tol()).unwrap();
    assert!(cert.is_certified(), "{}", cert.reasons_summary());
}

#[test]
fn simplex_has_no_stress() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 1..=3 {
        let fw = Framework::complete(random_config(&mut rng, d + 1, d));
        assert!(stress_space_basis(&fw, &tol()).is_empty());
    }
}

#[test]
fn general_position_agrees_with_determinant_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..50 {
        let mut cfg = random_config(&mut rng, 6, 2);
        if trial % 3 == 0 {
            // Force three collinear points.
            let mid = (cfg.point(0) + cfg.point(1)) * 0.5;
            let mut coords = cfg.coords().clone();
            coords.set_column(2, &mid);
            cfg = Configuration::new(coords).unwrap();
        }
        assert_eq!(
            cfg.is_general_position(&tol()),
            general_position_by_determinants(&cfg),
            "trial {trial}"
        );
    }
}

#[test]
fn sampled_configuration_passes_determinant_oracle() {
    let cfg = sample_general_position(10, 3, 99, &tol()).unwrap();
    assert_eq!(cfg.len(), 10);
    assert!(general_position_by_determinants(&cfg));
}

#[test]
fn complete_graph_in_general_position_is_infinitesimally_rigid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in 1..=3 {
        let fw = Framework::complete(random_config(&mut rng, d + 2, d));
        assert!(fw.infinitesimal_rigidity(&tol()).unwrap());
    }
}

#[test]
fn lateration_rank_matches_count() {
    let plan = LaterationPlan::random(2, 6, 21).unwrap();
    let (fw, _) = generate_lateration(&plan, &tol()).unwrap();
    assert_eq!(fw.rigidity_matrix().rank(&tol()), 9);
}

#[test]
fn alignment_recovers_random_motion_in_3d() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let fw = Framework::complete(random_config(&mut rng, 6, 3));
        let q = random_orthogonal(&mut rng, 3);
        let t = DVector::from_fn(3, |_, _| rng.random_range(-5.0..5.0));
        let moved = fw.with_config(fw.config().transformed(&q, &t)).unwrap();
        let targets: Vec<_> = (0..6)
            .map(|i| (i, fw.config().point(i).into_owned()))
            .collect();
        let back = align_onto(&targets, &moved, &tol()).unwrap();
        assert!((back.config().coords() - fw.config().coords()).amax() <= tol().geom_abs());
    }
}

#[test]
fn k5_in_3d_is_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fw = Framework::complete(random_config(&mut rng, 5, 3));
    let sm = complete_graph_stress(&fw, &tol()).unwrap();
    let cert = certify_universal_rigidity(&fw, &sm, &tol()).unwrap();
    assert!(cert.is_certified(), "{}", cert.reasons_summary());
    assert!(kernel_basis_check(&sm, &fw, &tol()).unwrap());
    let s = diagonalizing_basis(&sm, &fw, &tol()).unwrap();
    let mut off = s.clone().try_inverse().unwrap() * sm.omega() * &s;
    off.fill_diagonal(0.0);
    assert!(off.norm() <= 1e-8 * sm.spectral_norm());
}

/// Two complete frameworks in the plane sharing `shared` points of A, with B
/// moved by a random rigid motion.
fn complete_pair(
    rng: &mut ChaCha8Rng,
    va: usize,
    shared: usize,
    extra: usize,
) -> (Framework, Framework, AttachmentSpec) {
    loop {
        let a_cfg = random_config(rng, va, 2);
        let mut b_points = a_cfg.select(&(0..shared).collect::<Vec<_>>());
        for _ in 0..extra {
            b_points
                .push_point(&DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)))
                .unwrap();
        }
        let q = random_orthogonal(rng, 2);
        let t = DVector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
        let a = Framework::complete(a_cfg);
        let b = Framework::complete(b_points.transformed(&q, &t));
        let spec = AttachmentSpec::new((0..shared).map(|k| (k, k)).collect()).unwrap();
        let att = attach(&a, &b, &spec, &tol()).unwrap();
        if att.framework.config().is_general_position(&tol()) {
            return (a, b, spec);
        }
    }
}

#[test]
fn merge_path_matches_direct_sum_for_two_k5() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (a, b, spec) = complete_pair(&mut rng, 5, 4, 1);
    let att = attach(&a, &b, &spec, &tol()).unwrap();
    let sm_a = complete_graph_stress(&a, &tol()).unwrap();
    let sm_b = complete_graph_stress(&b, &tol()).unwrap();
    let direct = combined_stress(&att, &sm_a, &sm_b, &tol()).unwrap();
    let merged = combined_stress_via_merge(&att, &sm_a, &sm_b, &tol()).unwrap();
    assert!((direct.omega() - merged.omega()).amax() <= 1e-8 * direct.spectral_norm());
    let r = psd_nullity(merged.omega(), &tol());
    assert!(r.is_psd);
    assert_eq!(r.nullity, 3);
}

#[test]
fn merge_path_requires_extra_shared_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (a, b, spec) = complete_pair(&mut rng, 4, 3, 1);
    let att = attach(&a, &b, &spec, &tol()).unwrap();
    let sm_a = complete_graph_stress(&a, &tol()).unwrap();
    let sm_b = complete_graph_stress(&b, &tol()).unwrap();
    assert!(matches!(
        combined_stress_via_merge(&att, &sm_a, &sm_b, &tol()),
        Err(Error::PreconditionFailed(_))
    ));
}

#[test]
fn padding_one_matrix_alone_leaves_extra_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (a, b, spec) = complete_pair(&mut rng, 4, 3, 1);
    let att = attach(&a, &b, &spec, &tol()).unwrap();
    let sm_b = complete_graph_stress(&b, &tol()).unwrap();
    // Only B's block: rows of A-only vertices are zero.
    let mut padded = DMatrix::zeros(5, 5);
    for (i, &ci) in att.index_map_b.iter().enumerate() {
        for (j, &cj) in att.index_map_b.iter().enumerate() {
            padded[(ci, cj)] = sm_b.omega()[(i, j)];
        }
    }
    assert!(psd_nullity(&padded, &tol()).nullity > 3);
}

#[test]
fn empty_reduction_equals_combined_stress() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (a, b, spec) = complete_pair(&mut rng, 4, 3, 1);
    let att = attach(&a, &b, &spec, &tol()).unwrap();
    assert!(att.b_only_shared_edges().is_empty());
    let sm_a = complete_graph_stress(&a, &tol()).unwrap();
    let sm_b = complete_graph_stress(&b, &tol()).unwrap();
    let out = edge_reduced_stress(&att, &sm_a, &sm_b, &EdgeReduction::default(), &tol()).unwrap();
    assert_eq!(out.c, 1.0);
    assert_eq!(
        out.stress,
        combined_stress(&att, &sm_a, &sm_b, &tol()).unwrap()
    );
}

#[test]
fn edge_reduction_removes_b_only_edge_and_stays_certified() {
    // A is a lateration framework (not complete) so some shared pairs are
    // non-edges of A; B is a complete K4 on three of A's vertices.
    let tol = tol();
    let plan = LaterationPlan::random(2, 7, 12).unwrap();
    let (a, sm_a) = generate_lateration(&plan, &tol).unwrap();
    let triple = (0..7)
        .combinations(3)
        .find(|t| {
            t.iter()
                .tuple_combinations()
                .any(|(&i, &j)| !a.graph().has_edge(i, j))
        })
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut att = None;
    for _ in 0..100 {
        let mut b_cfg = a.config().select(&triple);
        b_cfg
            .push_point(&DVector::from_fn(2, |_, _| rng.random_range(0.0..1.0)))
            .unwrap();
        let b = Framework::complete(b_cfg);
        let spec =
            AttachmentSpec::new(triple.iter().enumerate().map(|(t, &k)| (k, t)).collect()).unwrap();
        let candidate = attach(&a, &b, &spec, &tol).unwrap();
        if candidate.framework.config().is_general_position(&tol) {
            att = Some((candidate, b));
            break;
        }
    }
    let (att, b) = att.unwrap();
    let sm_b = complete_graph_stress(&b, &tol).unwrap();
    let removed = att.b_only_shared_edges();
    assert!(!removed.is_empty());
    let out = edge_reduced_stress(
        &att,
        &sm_a,
        &sm_b,
        &EdgeReduction::new(removed.clone()),
        &tol,
    )
    .unwrap();
    for e in &removed {
        assert!(
            out.stress.omega()[(e.i(), e.j())].abs() <= tol.geom_abs() * out.stress.spectral_norm()
        );
        assert!(!out.framework.graph().has_edge(e.i(), e.j()));
    }
    let cert = certify_universal_rigidity(&out.framework, &out.stress, &tol).unwrap();
    assert!(cert.is_certified(), "{}", cert.reasons_summary());

    let balanced = edge_reduced_stress_with(
        &att,
        &sm_a,
        &sm_b,
        &EdgeReduction::new(removed.clone()),
        Multiplier::Balanced,
        &tol,
    )
    .unwrap();
    assert!(balanced.c <= out.c);
    let cert_b = certify_universal_rigidity(&balanced.framework, &balanced.stress, &tol).unwrap();
    assert!(cert_b.is_certified(), "{}", cert_b.reasons_summary());
    let ratio = |c: &Certificate| c.eigenvalues[3] / c.max_eigenvalue().unwrap();
    assert!(ratio(&cert_b) >= ratio(&cert));

    // Removing an edge A already has is rejected.
    let a_edge = a.graph().edges()[0];
    assert!(matches!(
        edge_reduced_stress(&att, &sm_a, &sm_b, &EdgeReduction::new(vec![a_edge]), &tol),
        Err(Error::EdgeAlreadyPresent(_)) | Err(Error::PreconditionFailed(_))
    ));
}

#[test]
fn reflection_preserves_edges_but_not_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..5 {
        let (a, b, spec) = complete_pair(&mut rng, 4, 2, 2);
        let att = attach(&a, &b, &spec, &tol()).unwrap();
        let out = reflection_counterexample(&att, &tol()).unwrap();
        assert!(out.edge_length_discrepancy(&att.framework) <= 1e-8);
        assert!(out.pairwise_distance_discrepancy(&att.framework) > 1e-6);
    }
}

#[test]
fn compose_needs_enough_shared_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (a, b, spec) = complete_pair(&mut rng, 4, 2, 2);
    let sm_a = complete_graph_stress(&a, &tol()).unwrap();
    let sm_b = complete_graph_stress(&b, &tol()).unwrap();
    assert!(matches!(
        compose_certified(
            &a,
            &sm_a,
            &b,
            &sm_b,
            &spec,
            &EdgeReduction::default(),
            &tol()
        ),
        Err(Error::NotEnoughSharedVertices { .. })
    ));
}

#[test]
fn large_laterations_are_certified_and_rigid() {
    for (d, v, seed) in [(2, 8, 5), (2, 20, 6), (3, 20, 7)] {
        let plan = LaterationPlan::random(d, v, seed).unwrap();
        let (fw, sm) = generate_lateration(&plan, &tol()).unwrap();
        assert!(is_lateration_graph(fw.graph(), d));
        let cert = certify_universal_rigidity(&fw, &sm, &tol()).unwrap();
        assert!(cert.is_certified(), "{}", cert.reasons_summary());
        assert!(fw.infinitesimal_rigidity(&tol()).unwrap());
    }
}
