//! Random general-position configurations and `(d+1)`-lateration frameworks
//! with certified stress matrices.
//!
//! A lateration framework starts from a complete simplex on vertices
//! `0..=d`; every later vertex is joined to `d + 1` earlier ones. Each step is
//! carried out as an edge-reduced attachment of a complete `K_{d+2}` on the
//! new vertex and its neighbors, so the stress matrix is rebuilt at every
//! step from [`edge_reduced_stress_with`] using [`Multiplier::Balanced`], and
//! certified before the next vertex is added.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attach::{
    attach, edge_reduced_stress, edge_reduced_stress_with, reduce_certified, AttachmentSpec,
    EdgeReduction, Multiplier,
};
use crate::error::{Error, Result};
use crate::framework::{Configuration, Framework};
use crate::graph::Graph;
use crate::stress::{certify_universal_rigidity, complete_graph_stress, psd_nullity, StressMatrix};
use crate::tolerance::Tolerances;

/// Sampling attempts per point before giving up.
pub const RETRY_BUDGET: usize = 100;

/// Positions tried for each new lateration vertex. Sampling stops at the
/// first candidate keeping at least `ACCEPT_RATIO` of the previous step's
/// conditioning; otherwise the best candidate is kept.
pub const CANDIDATES: usize = 8;
const ACCEPT_RATIO: f64 = 0.5;

const PLAN_STREAM: u64 = 0;
const COORD_STREAM: u64 = 1;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Combinatorics of a lateration framework.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaterationPlan {
    d: usize,
    v: usize,
    seed: u64,
    /// Entry `k` lists the neighbors of vertex `d + 1 + k`.
    attach_order: Vec<Vec<usize>>,
}

impl LaterationPlan {
    pub fn new(d: usize, v: usize, seed: u64, attach_order: Vec<Vec<usize>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidPlan("dimension must be positive".into()));
        }
        if v < d + 1 {
            return Err(Error::InvalidPlan(format!(
                "need at least d+1 = {} vertices",
                d + 1
            )));
        }
        if attach_order.len() != v - d - 1 {
            return Err(Error::InvalidPlan(format!(
                "expected {} neighbor lists, got {}",
                v - d - 1,
                attach_order.len()
            )));
        }
        for (k, nbrs) in attach_order.iter().enumerate() {
            let vertex = d + 1 + k;
            let mut sorted = nbrs.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != d + 1 || nbrs.len() != d + 1 {
                return Err(Error::InvalidPlan(format!(
                    "vertex {vertex} needs {} distinct neighbors",
                    d + 1
                )));
            }
            if nbrs.iter().any(|&n| n >= vertex) {
                return Err(Error::InvalidPlan(format!(
                    "vertex {vertex} may only connect to earlier vertices"
                )));
            }
        }
        Ok(Self {
            d,
            v,
            seed,
            attach_order,
        })
    }

    /// Neighbors drawn uniformly among the earlier vertices.
    pub fn random(d: usize, v: usize, seed: u64) -> Result<Self> {
        if d == 0 || v < d + 1 {
            return Self::new(d, v, seed, Vec::new());
        }
        let mut rng = rng_for(seed, PLAN_STREAM);
        let attach_order = (d + 1..v)
            .map(|vertex| {
                let mut nbrs = sample(&mut rng, vertex, d + 1).into_vec();
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        Self::new(d, v, seed, attach_order)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn attach_order(&self) -> &[Vec<usize>] {
        &self.attach_order
    }

    /// `C(d+1, 2) + (v - d - 1)(d + 1)`.
    pub fn edge_count(&self) -> usize {
        let d = self.d;
        (d + 1) * d / 2 + (self.v - d - 1) * (d + 1)
    }

    pub fn graph(&self) -> Graph {
        let d = self.d;
        let seed_edges = Graph::complete(d + 1).edges().to_vec();
        let later = self
            .attach_order
            .iter()
            .enumerate()
            .flat_map(|(k, nbrs)| nbrs.iter().map(move |&n| (n, d + 1 + k).into()));
        Graph::new(self.v, seed_edges.into_iter().chain(later)).expect("validated plan")
    }
}

/// Checks the lateration structure directly: vertices `0..=d` form a clique
/// and every later vertex has exactly `d + 1` neighbors among earlier ones.
pub fn is_lateration_graph(graph: &Graph, d: usize) -> bool {
    let v = graph.vertex_count();
    if v < d + 1 {
        return false;
    }
    let mut earlier = vec![0usize; v];
    for e in graph.edges() {
        earlier[e.j()] += 1;
    }
    (0..=d).all(|j| earlier[j] == j) && (d + 1..v).all(|j| earlier[j] == d + 1)
}

fn uniform_point(rng: &mut ChaCha8Rng, lo: &DVector<f64>, hi: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        lo.len(),
        lo.iter()
            .zip(hi.iter())
            .map(|(&a, &b)| rng.random_range(a..=b)),
    )
}

fn sample_into(
    cfg: &mut Configuration,
    count: usize,
    rng: &mut ChaCha8Rng,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    tol: &Tolerances,
) -> Result<()> {
    for _ in 0..count {
        let vertex = cfg.len();
        let mut placed = false;
        for _ in 0..RETRY_BUDGET {
            let mut candidate = cfg.clone();
            candidate.push_point(&uniform_point(rng, lo, hi))?;
            if candidate.is_general_position_including(vertex, tol) {
                *cfg = candidate;
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::ExhaustedRetries {
                attempts: RETRY_BUDGET,
            });
        }
    }
    Ok(())
}

/// `v` points drawn uniformly from `[0,1]^d`, each redrawn until the
/// configuration stays in general position. Deterministic in `seed`.
pub fn sample_general_position(
    v: usize,
    d: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Configuration> {
    if v == 0 || d == 0 {
        return Err(Error::InvalidConfiguration("need v >= 1 and d >= 1".into()));
    }
    let mut rng = rng_for(seed, COORD_STREAM);
    sample_with(&mut rng, v, d, tol)
}

fn sample_with(
    rng: &mut ChaCha8Rng,
    v: usize,
    d: usize,
    tol: &Tolerances,
) -> Result<Configuration> {
    let mut cfg = Configuration::new(DMatrix::zeros(d, 0))?;
    sample_into(
        &mut cfg,
        v,
        rng,
        &DVector::zeros(d),
        &DVector::from_element(d, 1.0),
        tol,
    )?;
    Ok(cfg)
}

/// Builds the lateration framework of `plan` on a freshly sampled seed simplex.
pub fn generate_lateration(
    plan: &LaterationPlan,
    tol: &Tolerances,
) -> Result<(Framework, StressMatrix)> {
    let mut rng = rng_for(plan.seed, COORD_STREAM);
    let seed_cfg = sample_with(&mut rng, plan.d + 1, plan.d, tol)?;
    build(plan, seed_cfg, &mut rng, tol)
}

/// Builds the lateration framework of `plan` on the given `d + 1` seed points.
pub fn generate_lateration_from(
    plan: &LaterationPlan,
    seed_points: &Configuration,
    tol: &Tolerances,
) -> Result<(Framework, StressMatrix)> {
    if seed_points.dim() != plan.d || seed_points.len() != plan.d + 1 {
        return Err(Error::InvalidPlan(format!(
            "seed must be {} points in R^{}",
            plan.d + 1,
            plan.d
        )));
    }
    if !seed_points.is_general_position(tol) {
        return Err(Error::NotGeneralPosition);
    }
    let mut rng = rng_for(plan.seed, COORD_STREAM);
    build(plan, seed_points.clone(), &mut rng, tol)
}

/// New vertices are drawn from the bounding box of their neighbors, enlarged
/// by half its size.
fn neighbor_box(cfg: &Configuration, nbrs: &[usize]) -> (DVector<f64>, DVector<f64>) {
    let pts = cfg.coords().select_columns(nbrs);
    let d = cfg.dim();
    let lo = DVector::from_iterator(d, pts.row_iter().map(|r| r.min()));
    let hi = DVector::from_iterator(d, pts.row_iter().map(|r| r.max()));
    let widths = &hi - &lo;
    let fallback = widths.max().max(1e-3);
    let center = (&lo + &hi) * 0.5;
    let half = widths.map(|w| 0.75 * if w > 1e-3 * fallback { w } else { fallback });
    (&center - &half, &center + &half)
}

/// The smaller of two ratios: smallest positive over largest eigenvalue of
/// the stress matrix, and smallest nonzero over largest singular value of
/// the rigidity matrix. Zero when the stress matrix is not PSD with nullity
/// `d + 1` or the framework is not infinitesimally rigid.
fn conditioning(fw: &Framework, sm: &StressMatrix, tol: &Tolerances) -> f64 {
    let d = fw.dim();
    let report = psd_nullity(sm.omega(), tol);
    let stress_ratio = match report.eigenvalues.last() {
        Some(&top) if report.is_psd && report.nullity == d + 1 && top > 0.0 => {
            report.eigenvalues[d + 1] / top
        }
        _ => return 0.0,
    };
    let mut sv: Vec<f64> = fw
        .rigidity_matrix()
        .matrix
        .singular_values()
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let rank = fw.full_rigidity_rank();
    if rank == 0 || sv.len() < rank || sv[rank - 1] <= tol.zero_rel() * sv[0] {
        return 0.0;
    }
    stress_ratio.min(sv[rank - 1] / sv[0])
}

/// Adds the last point of `cfg` joined to `nbrs`, with the stress of the
/// edge-reduced attachment scaled to unit spectral norm.
fn extend(
    fw: &Framework,
    sm: &StressMatrix,
    cfg: Configuration,
    nbrs: &[usize],
    tol: &Tolerances,
) -> Result<(Framework, StressMatrix)> {
    let d = fw.dim();
    let vertex = fw.vertex_count();
    let mut local = fw.config().select(nbrs);
    local.push_point(&cfg.point(vertex).into_owned())?;
    let fw_b = Framework::complete(local);
    let sm_b = complete_graph_stress(&fw_b, tol)?;

    if vertex == d + 1 {
        // The seed simplex is contained in the new K_{d+2}.
        let fw = Framework::complete(cfg);
        let sm = complete_graph_stress(&fw, tol)?;
        return Ok((fw, sm));
    }

    let spec = AttachmentSpec::new(nbrs.iter().enumerate().map(|(t, &n)| (n, t)).collect())?;
    let att = attach(fw, &fw_b, &spec, tol)?;
    let reduction = EdgeReduction::new(att.b_only_shared_edges());
    // `sm` was certified on the previous step and `sm_b` is the stress of a
    // complete framework in general position.
    let reduced = if reduction.is_empty() {
        edge_reduced_stress_with(&att, sm, &sm_b, &reduction, Multiplier::Balanced, tol)?
    } else {
        reduce_certified(&att, sm, &sm_b, &reduction, Multiplier::Balanced, tol)?
    };
    let norm = reduced.stress.spectral_norm();
    let stress = if norm > 0.0 {
        reduced.stress.scaled(1.0 / norm)
    } else {
        reduced.stress
    };
    Ok((reduced.framework, stress))
}

fn build(
    plan: &LaterationPlan,
    seed_cfg: Configuration,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<(Framework, StressMatrix)> {
    let d = plan.d;
    let mut fw = Framework::complete(seed_cfg);
    let mut sm = StressMatrix::zeros(fw.graph().clone());
    let mut quality = 1.0;

    for (k, nbrs) in plan.attach_order.iter().enumerate() {
        let vertex = d + 1 + k;
        let (lo, hi) = neighbor_box(fw.config(), nbrs);
        let mut best: Option<(f64, Framework, StressMatrix)> = None;
        let mut last_err = None;
        for _ in 0..CANDIDATES {
            if best
                .as_ref()
                .is_some_and(|(q, _, _)| *q >= ACCEPT_RATIO * quality)
            {
                break;
            }
            let mut cfg = fw.config().clone();
            sample_into(&mut cfg, 1, rng, &lo, &hi, tol)
                .map_err(|_| Error::GeneralPositionFailure { vertex })?;
            match extend(&fw, &sm, cfg, nbrs, tol) {
                Ok((next_fw, next_sm)) => {
                    let quality = conditioning(&next_fw, &next_sm, tol);
                    if best.as_ref().is_none_or(|(q, _, _)| quality > *q) {
                        best = Some((quality, next_fw, next_sm));
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        match best {
            Some((q, next_fw, next_sm)) => {
                quality = q;
                fw = next_fw;
                sm = next_sm;
            }
            None => return Err(last_err.expect("at least one candidate")),
        }
        if fw.vertex_count() >= d + 2 {
            let cert = certify_universal_rigidity(&fw, &sm, tol)?;
            if !cert.is_certified() {
                return Err(Error::CertificationFailed(Box::new(cert)));
            }
        }
    }

    if fw.graph().edge_count() != plan.edge_count() {
        return Err(Error::InvalidPlan(
            "edge count does not match the plan".into(),
        ));
    }
    if fw.vertex_count() >= d + 2 {
        let cert = certify_universal_rigidity(&fw, &sm, tol)?;
        if !cert.is_certified() {
            return Err(Error::CertificationFailed(Box::new(cert)));
        }
    }
    Ok((fw, sm))
}

/// Attaches two certified frameworks, removes the requested `B`-only shared
/// edges, and certifies the result.
pub fn compose_certified(
    fw_a: &Framework,
    sm_a: &StressMatrix,
    fw_b: &Framework,
    sm_b: &StressMatrix,
    spec: &AttachmentSpec,
    reduction: &EdgeReduction,
    tol: &Tolerances,
) -> Result<(Framework, StressMatrix)> {
    let att = attach(fw_a, fw_b, spec, tol)?;
    let reduced = edge_reduced_stress(&att, sm_a, sm_b, reduction, tol)?;
    let cert = certify_universal_rigidity(&reduced.framework, &reduced.stress, tol)?;
    if !cert.is_certified() {
        return Err(Error::CertificationFailed(Box::new(cert)));
    }
    Ok((reduced.framework, reduced.stress))
}
