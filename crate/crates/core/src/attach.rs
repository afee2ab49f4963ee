//! Framework attachment and stress synthesis for attached frameworks.
//!
//! Two frameworks `A` and `B` are joined on `n` corresponding vertices. With
//! `n >= d + 1` and certified stress matrices on both halves, the sum of the
//! zero-padded matrices certifies the attachment. Shared edges that exist only
//! in `B` may be removed: a counter-stress on `A` cancels their entries and a
//! large enough multiple of `A`'s matrix restores positive semidefiniteness.
//!
//! Combined indices place `A`'s vertices first, in `A`'s order, followed by
//! the `B`-only vertices in `B`'s order. Shared vertices keep `A`'s index.

use std::collections::HashSet;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::align::align_onto;
use crate::error::{Error, Result, Side};
use crate::framework::{Configuration, Framework};
use crate::graph::{Edge, Graph};
use crate::linalg;
use crate::stress::{
    certify_universal_rigidity, psd_combine_matrices, psd_nullity, StressMatrix, StressVector,
};
use crate::tolerance::Tolerances;

/// Vertex correspondences `(vertex of A, vertex of B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachmentSpec {
    pairs: Vec<(usize, usize)>,
}

impl AttachmentSpec {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen_a = HashSet::new();
        let mut seen_b = HashSet::new();
        for &(a, b) in &pairs {
            if !seen_a.insert(a) {
                return Err(Error::InvalidAttachment(format!(
                    "vertex {a} of A is shared twice"
                )));
            }
            if !seen_b.insert(b) {
                return Err(Error::InvalidAttachment(format!(
                    "vertex {b} of B is shared twice"
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn shared_count(&self) -> usize {
        self.pairs.len()
    }
}

/// An attachment of `A` and a rigidly moved copy of `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub framework: Framework,
    pub part_a: Framework,
    /// `B` after alignment onto `A`.
    pub part_b: Framework,
    pub index_map_a: Vec<usize>,
    pub index_map_b: Vec<usize>,
    /// Combined indices of the shared vertices, in spec order.
    pub shared: Vec<usize>,
    pub spec: AttachmentSpec,
}

impl Attachment {
    pub fn dim(&self) -> usize {
        self.framework.dim()
    }

    pub fn shared_count(&self) -> usize {
        self.shared.len()
    }

    pub fn is_shared(&self, combined: usize) -> bool {
        self.shared.contains(&combined)
    }

    fn a_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.part_a
            .graph()
            .edges()
            .iter()
            .map(|e| e.map(|x| self.index_map_a[x]))
    }

    fn b_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.part_b
            .graph()
            .edges()
            .iter()
            .map(|e| e.map(|x| self.index_map_b[x]))
    }

    /// Shared-vertex edges present in `B` but not in `A`: the candidates for
    /// edge reduction.
    pub fn b_only_shared_edges(&self) -> Vec<Edge> {
        let a: HashSet<Edge> = self.a_edges().collect();
        self.b_edges()
            .filter(|e| self.is_shared(e.i()) && self.is_shared(e.j()) && !a.contains(e))
            .sorted()
            .collect()
    }
}

/// Edges to drop from an attachment, in combined indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeReduction {
    pub removed_edges: Vec<Edge>,
}

impl EdgeReduction {
    pub fn new(removed_edges: Vec<Edge>) -> Self {
        Self { removed_edges }
    }

    pub fn is_empty(&self) -> bool {
        self.removed_edges.is_empty()
    }
}

/// Joins `fw_a` and `fw_b` on the vertices listed in `spec`, moving `fw_b`
/// rigidly so that its shared vertices land on `A`'s.
pub fn attach(
    fw_a: &Framework,
    fw_b: &Framework,
    spec: &AttachmentSpec,
    tol: &Tolerances,
) -> Result<Attachment> {
    let d = fw_a.dim();
    if fw_b.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: fw_b.dim(),
        });
    }
    let (va, vb) = (fw_a.vertex_count(), fw_b.vertex_count());
    let n = spec.shared_count();
    if n == 0 {
        return Err(Error::InvalidAttachment("no shared vertices".into()));
    }
    if n >= va || n >= vb {
        return Err(Error::InvalidAttachment(
            "shared vertices must be a proper subset of both frameworks".into(),
        ));
    }
    for &(a, b) in spec.pairs() {
        if a >= va || b >= vb {
            return Err(Error::InvalidAttachment(format!(
                "pair ({a}, {b}) out of range"
            )));
        }
    }

    let targets: Vec<(usize, DVector<f64>)> = spec
        .pairs()
        .iter()
        .map(|&(a, b)| (b, fw_a.config().point(a).into_owned()))
        .collect();
    let part_b = align_onto(&targets, fw_b, tol)?;

    let index_map_a: Vec<usize> = (0..va).collect();
    let mut index_map_b = vec![usize::MAX; vb];
    for &(a, b) in spec.pairs() {
        index_map_b[b] = a;
    }
    let mut next = va;
    for slot in index_map_b.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = next;
        next += 1;
    }
    let v = next;

    let mut coords = DMatrix::zeros(d, v);
    coords.columns_mut(0, va).copy_from(fw_a.config().coords());
    for (b, &c) in index_map_b.iter().enumerate() {
        if c >= va {
            coords.set_column(c, &part_b.config().point(b));
        }
    }
    let edges: HashSet<Edge> = fw_a
        .graph()
        .edges()
        .iter()
        .copied()
        .chain(
            fw_b.graph()
                .edges()
                .iter()
                .map(|e| e.map(|x| index_map_b[x])),
        )
        .collect();
    let framework = Framework::new(Graph::new(v, edges)?, Configuration::new(coords)?)?;

    Ok(Attachment {
        framework,
        part_a: fw_a.clone(),
        part_b,
        shared: spec.pairs().iter().map(|&(a, _)| a).collect(),
        index_map_a,
        index_map_b,
        spec: spec.clone(),
    })
}

/// `n >= d + 1`: the shared-vertex condition for the attachment of two
/// universally rigid frameworks in general position to be universally rigid.
pub fn check_attachment_rigidity_condition(att: &Attachment) -> bool {
    att.shared_count() > att.dim()
}

/// Copies `m` into a `size x size` zero matrix under `map`. Off-diagonal
/// entries are taken only on edges of `graph`, so non-edges stay exactly zero.
fn embed(m: &DMatrix<f64>, graph: &Graph, map: &[usize], size: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(size, size);
    for (i, &ci) in map.iter().enumerate() {
        out[(ci, ci)] += m[(i, i)];
    }
    for e in graph.edges() {
        let (ci, cj) = (map[e.i()], map[e.j()]);
        out[(ci, cj)] += m[(e.i(), e.j())];
        out[(cj, ci)] += m[(e.j(), e.i())];
    }
    out
}

fn require_shared(att: &Attachment) -> Result<()> {
    let required = att.dim() + 1;
    if att.shared_count() < required {
        return Err(Error::NotEnoughSharedVertices {
            shared: att.shared_count(),
            required,
        });
    }
    Ok(())
}

fn require_certified(
    fw: &Framework,
    sm: &StressMatrix,
    side: Side,
    tol: &Tolerances,
) -> Result<()> {
    let cert = certify_universal_rigidity(fw, sm, tol).map_err(|e| Error::UncertifiedInput {
        side,
        reasons: e.to_string(),
    })?;
    if !cert.is_certified() {
        return Err(Error::UncertifiedInput {
            side,
            reasons: cert.reasons_summary(),
        });
    }
    Ok(())
}

fn require_inputs(
    att: &Attachment,
    sm_a: &StressMatrix,
    sm_b: &StressMatrix,
    tol: &Tolerances,
) -> Result<()> {
    require_shared(att)?;
    require_certified(&att.part_a, sm_a, Side::A, tol)?;
    require_certified(&att.part_b, sm_b, Side::B, tol)
}

/// Stress matrix of the attachment: the zero-padded sum of `A`'s and `B`'s
/// matrices, overlapping on the shared block.
pub fn combined_stress(
    att: &Attachment,
    sm_a: &StressMatrix,
    sm_b: &StressMatrix,
    tol: &Tolerances,
) -> Result<StressMatrix> {
    require_inputs(att, sm_a, sm_b, tol)?;
    let v = att.framework.vertex_count();
    let omega = embed(sm_a.omega(), att.part_a.graph(), &att.index_map_a, v)
        + embed(sm_b.omega(), att.part_b.graph(), &att.index_map_b, v);
    StressMatrix::new(att.framework.graph().clone(), omega)
}

/// Same result as [`combined_stress`] reached differently: attach on the first
/// `d + 1` pairs only, keeping the remaining shared pairs as distinct
/// coinciding vertices, then merge each such pair by adding its row and
/// column into the surviving vertex and deleting it.
pub fn combined_stress_via_merge(
    att: &Attachment,
    sm_a: &StressMatrix,
    sm_b: &StressMatrix,
    tol: &Tolerances,
) -> Result<StressMatrix> {
    let d = att.dim();
    if att.shared_count() <= d + 1 {
        return Err(Error::PreconditionFailed(format!(
            "merge path needs more than d+1 = {} shared vertices",
            d + 1
        )));
    }
    require_inputs(att, sm_a, sm_b, tol)?;

    let va = att.part_a.vertex_count();
    let vb = att.part_b.vertex_count();
    let pairs = att.spec.pairs();
    let (kept, merged) = pairs.split_at(d + 1);

    let mut map_b = vec![usize::MAX; vb];
    for &(a, b) in kept {
        map_b[b] = a;
    }
    let mut next = va;
    for slot in map_b.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = next;
        next += 1;
    }
    let size = next;

    let mut omega = embed(sm_a.omega(), att.part_a.graph(), &att.index_map_a, size)
        + embed(sm_b.omega(), att.part_b.graph(), &map_b, size);

    // Omega' = R Omega R^T with R = I + e_keep e_drop^T.
    let mut dropped = Vec::with_capacity(merged.len());
    for &(a, b) in merged {
        let (keep, drop) = (a, map_b[b]);
        let col = omega.column(drop).into_owned();
        let mut target = omega.column_mut(keep);
        target += col;
        let row = omega.row(drop).into_owned();
        let mut target = omega.row_mut(keep);
        target += row;
        dropped.push(drop);
    }
    let survivors: Vec<usize> = (0..size).filter(|k| !dropped.contains(k)).collect();
    let omega = omega.select_rows(&survivors).select_columns(&survivors);
    StressMatrix::new(att.framework.graph().clone(), omega)
}

/// Result of one least-squares solve for an added edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSolve {
    pub edge: Edge,
    /// The stress `w1` being cancelled; the added edge carries `-w1`.
    pub target: f64,
    /// `||df^T w - rho * w1||`.
    pub residual: f64,
    /// `||rho * w1||`.
    pub rhs_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterStress {
    /// Stress matrix on `A`'s graph extended by the added edges.
    pub stress: StressMatrix,
    pub solves: Vec<EdgeSolve>,
}

/// For each added edge `{i,j}` with target `w1`, solves `df^T w = rho * w1`
/// (minimum norm) where `rho` is the rigidity-matrix row of the new edge,
/// and sums the stress matrices of the extended stresses `(w, -w1)`.
pub fn counter_stress(
    fw_a: &Framework,
    additions: &[(usize, usize, f64)],
    tol: &Tolerances,
) -> Result<CounterStress> {
    let v = fw_a.vertex_count();
    let mut added = Vec::with_capacity(additions.len());
    for &(i, j, _) in additions {
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        let e = Edge::new(i, j);
        if e.j() >= v {
            return Err(Error::EdgeOutOfRange {
                edge: e,
                vertex_count: v,
            });
        }
        if fw_a.graph().has_edge(i, j) {
            return Err(Error::EdgeAlreadyPresent(e));
        }
        if added.contains(&e) {
            return Err(Error::DuplicateEdge(e));
        }
        added.push(e);
    }
    let extended = fw_a.graph().with_edges_added(&added)?;

    let df = fw_a.rigidity_matrix();
    if !fw_a.infinitesimal_rigidity(tol)? {
        return Err(Error::NotInfinitesimallyRigid {
            rank: df.rank(tol),
            expected: fw_a.full_rigidity_rank(),
        });
    }
    if additions.is_empty() {
        return Ok(CounterStress {
            stress: StressMatrix::zeros(extended),
            solves: Vec::new(),
        });
    }
    let df_t = df.matrix.transpose();

    let mut omega = DMatrix::zeros(v, v);
    let mut solves = Vec::with_capacity(additions.len());
    for (&(i, j, w1), &edge) in additions.iter().zip(&added) {
        let rhs = fw_a.edge_row(i, j) * w1;
        let w = linalg::min_norm_solve(&df_t, &rhs, tol.zero_rel());
        let residual = (&df_t * &w - &rhs).norm();
        let rhs_norm = rhs.norm();
        let bound = tol.geom_abs() * rhs_norm;
        if residual > bound {
            return Err(Error::ResidualTooLarge {
                edge,
                residual,
                bound,
            });
        }
        let mut weights = DVector::zeros(extended.edge_count());
        for (k, e) in fw_a.graph().edges().iter().enumerate() {
            let slot = extended.edge_index(e.i(), e.j()).expect("kept edge");
            weights[slot] = w[k];
        }
        weights[extended.edge_index(i, j).expect("added edge")] = -w1;
        omega += StressVector::new(extended.clone(), weights)?
            .to_matrix()
            .into_omega();
        solves.push(EdgeSolve {
            edge,
            target: w1,
            residual,
            rhs_norm,
        });
    }
    Ok(CounterStress {
        stress: StressMatrix::new(extended, omega)?,
        solves,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeReducedStress {
    /// Multiplier applied to `A`'s stress matrix.
    pub c: f64,
    /// Stress matrix on the reduced framework.
    pub stress: StressMatrix,
    /// The attachment with the removed edges dropped.
    pub framework: Framework,
    pub counter: Option<CounterStress>,
}

fn validate_reduction(att: &Attachment, reduction: &EdgeReduction) -> Result<()> {
    let a: HashSet<Edge> = att.a_edges().collect();
    let b: HashSet<Edge> = att.b_edges().collect();
    let mut seen = HashSet::new();
    for &e in &reduction.removed_edges {
        if !seen.insert(e) {
            return Err(Error::DuplicateEdge(e));
        }
        if a.contains(&e) {
            return Err(Error::EdgeAlreadyPresent(e));
        }
        if !(att.is_shared(e.i()) && att.is_shared(e.j())) {
            return Err(Error::PreconditionFailed(format!(
                "removed edge {e} is not between shared vertices"
            )));
        }
        if !b.contains(&e) {
            return Err(Error::PreconditionFailed(format!(
                "removed edge {e} is not an edge of B"
            )));
        }
    }
    Ok(())
}

/// How the multiplier `c` of `A`'s stress matrix is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Multiplier {
    /// `c` from [`psd_combine_matrices`] on `(Omega_A, Omega_AK)`.
    #[default]
    Bound,
    /// The `c` at most the bound that maximizes the ratio of the smallest
    /// positive to the largest eigenvalue of the result, among those keeping
    /// it PSD with nullity `d + 1`. Repeated attachments with the bound lose
    /// a constant factor of conditioning per step.
    Balanced,
}

/// Candidate multipliers for [`Multiplier::Balanced`]: the bound times
/// `10^(-k/4)` for `k = 0..=BALANCE_STEPS`.
const BALANCE_STEPS: i32 = 48;

/// Stress matrix of the edge-reduced attachment:
/// `c * Omega_A + Omega_AK + Omega_B` in combined indices, where `Omega_AK`
/// is the counter-stress on `A` that cancels `B`'s stresses on the removed
/// edges and `c` comes from [`psd_combine_matrices`].
pub fn edge_reduced_stress(
    att: &Attachment,
    sm_a: &StressMatrix,
    sm_b: &StressMatrix,
    reduction: &EdgeReduction,
    tol: &Tolerances,
) -> Result<EdgeReducedStress> {
    edge_reduced_stress_with(att, sm_a, sm_b, reduction, Multiplier::Bound, tol)
}

/// [`edge_reduced_stress`] with a choice of multiplier.
pub fn edge_reduced_stress_with(
    att: &Attachment,
    sm_a: &StressMatrix,
    sm_b: &StressMatrix,
    reduction: &EdgeReduction,
    multiplier: Multiplier,
    tol: &Tolerances,
) -> Result<EdgeReducedStress> {
    validate_reduction(att, reduction)?;
    if reduction.is_empty() {
        return Ok(EdgeReducedStress {
            c: 1.0,
            stress: combined_stress(att, sm_a, sm_b, tol)?,
            framework: att.framework.clone(),
            counter: None,
        });
    }
    require_inputs(att, sm_a, sm_b, tol)?;
    reduce_certified(att, sm_a, sm_b, reduction, multiplier, tol)
}

/// The body of [`edge_reduced_stress_with`] for a nonempty, validated
/// reduction whose inputs are already known to be certified.
pub(crate) fn reduce_certified(
    att: &Attachment,
    sm_a: &StressMatrix,
    sm_b: &StressMatrix,
    reduction: &EdgeReduction,
    multiplier: Multiplier,
    tol: &Tolerances,
) -> Result<EdgeReducedStress> {
    let v = att.framework.vertex_count();
    let omega_b = embed(sm_b.omega(), att.part_b.graph(), &att.index_map_b, v);
    // Shared vertices keep A's indices, so combined indices of removed edges
    // are already A's.
    let additions: Vec<(usize, usize, f64)> = reduction
        .removed_edges
        .iter()
        .map(|e| (e.i(), e.j(), omega_b[(e.i(), e.j())]))
        .collect();
    let counter = counter_stress(&att.part_a, &additions, tol)?;
    let (bound, _) = psd_combine_matrices(sm_a.omega(), counter.stress.omega(), tol)?;

    let omega_a = embed(sm_a.omega(), att.part_a.graph(), &att.index_map_a, v);
    let omega_ak = embed(
        counter.stress.omega(),
        counter.stress.graph(),
        &att.index_map_a,
        v,
    );
    let rest = omega_ak + omega_b;
    let c = match multiplier {
        Multiplier::Bound => bound,
        Multiplier::Balanced => balanced_multiplier(&omega_a, &rest, bound, att.dim(), tol),
    };
    let omega = omega_a * c + rest;

    let norm = linalg::spectral_norm(&omega);
    for e in &reduction.removed_edges {
        let entry = omega[(e.i(), e.j())];
        if entry.abs() > tol.geom_abs() * norm {
            return Err(Error::PreconditionFailed(format!(
                "entry {entry:e} at removed edge {e} did not cancel"
            )));
        }
    }
    let graph = att
        .framework
        .graph()
        .without_edges(&reduction.removed_edges);
    let framework = att.framework.with_graph(graph.clone())?;
    Ok(EdgeReducedStress {
        c,
        stress: StressMatrix::new(graph, omega)?,
        framework,
        counter: Some(counter),
    })
}

fn balanced_multiplier(
    omega_a: &DMatrix<f64>,
    rest: &DMatrix<f64>,
    bound: f64,
    d: usize,
    tol: &Tolerances,
) -> f64 {
    let score = |c: f64| {
        let report = psd_nullity(&(omega_a * c + rest), tol);
        let top = report.eigenvalues.last().copied().unwrap_or(0.0);
        if !report.is_psd || report.nullity != d + 1 || top <= 0.0 {
            return None;
        }
        Some(report.eigenvalues[d + 1] / top)
    };
    let mut best = (score(bound).unwrap_or(0.0), bound);
    for k in 1..=BALANCE_STEPS {
        let c = bound * 10f64.powf(-f64::from(k) / 4.0);
        match score(c) {
            Some(s) if s > best.0 => best = (s, c),
            // Past the peak.
            Some(s) if s < 0.1 * best.0 => break,
            Some(_) => {}
            None => break,
        }
    }
    best.1
}

/// For an attachment on `n <= d` vertices, reflects every `B`-only vertex
/// through a hyperplane containing the shared vertices. The result has the
/// same edge lengths but is not congruent to the original.
pub fn reflection_counterexample(att: &Attachment, tol: &Tolerances) -> Result<Framework> {
    let d = att.dim();
    let n = att.shared_count();
    if n > d {
        return Err(Error::PreconditionFailed(format!(
            "reflection needs at most d = {d} shared vertices, got {n}"
        )));
    }
    let cfg = att.framework.config();
    let va = att.part_a.vertex_count();
    let v = att.framework.vertex_count();
    let origin = cfg.point(att.shared[0]).into_owned();

    let mut spans = DMatrix::zeros(d, n - 1);
    for (k, &s) in att.shared.iter().skip(1).enumerate() {
        spans.set_column(k, &(cfg.point(s) - &origin));
    }
    // Directions orthogonal to the affine span of the shared vertices.
    let complement = if n > 1 {
        linalg::null_space(&spans.transpose(), tol.zero_rel())
    } else {
        DMatrix::identity(d, d)
    };

    let b_only: Vec<usize> = (va..v).collect();
    let normal = b_only
        .iter()
        .map(|&b| {
            let offset = cfg.point(b) - &origin;
            &complement * (complement.transpose() * offset)
        })
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .filter(|x| x.norm() > tol.geom_abs())
        .ok_or(Error::DegenerateReflection)?
        .normalize();

    let mut coords = cfg.coords().clone();
    for &b in &b_only {
        let p = cfg.point(b);
        let height = (p - &origin).dot(&normal);
        coords.set_column(b, &(p - &normal * (2.0 * height)));
    }
    let reflected = att.framework.with_config(Configuration::new(coords)?)?;

    let a_only: Vec<usize> = (0..va).filter(|k| !att.is_shared(*k)).collect();
    let change = a_only
        .iter()
        .cartesian_product(&b_only)
        .map(|(&a, &b)| (cfg.distance(a, b) - reflected.config().distance(a, b)).abs())
        .fold(0.0, f64::max);
    if change <= tol.geom_abs() {
        return Err(Error::DegenerateReflection);
    }
    Ok(reflected)
}
