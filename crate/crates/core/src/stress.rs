//! Equilibrium stresses, stress matrices, and the universal-rigidity
//! certificate: a PSD stress matrix of nullity `d + 1` on a framework in
//! general position with at least `d + 2` vertices.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::framework::Framework;
use crate::graph::Graph;
use crate::linalg;
use crate::tolerance::Tolerances;

/// One weight per edge, in the graph's edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct StressVector {
    graph: Graph,
    weights: DVector<f64>,
}

impl StressVector {
    pub fn new(graph: Graph, weights: DVector<f64>) -> Result<Self> {
        if weights.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.edge_count(),
                found: weights.len(),
            });
        }
        Ok(Self { graph, weights })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// `Omega_ij = w_ij` on edges, zero elsewhere off the diagonal, and
    /// `Omega_ii = -sum_{j != i} Omega_ij`.
    pub fn to_matrix(&self) -> StressMatrix {
        let v = self.graph.vertex_count();
        let mut omega = DMatrix::zeros(v, v);
        for (e, &w) in self.graph.edges().iter().zip(self.weights.iter()) {
            omega[(e.i(), e.j())] = w;
            omega[(e.j(), e.i())] = w;
            omega[(e.i(), e.i())] -= w;
            omega[(e.j(), e.j())] -= w;
        }
        StressMatrix {
            graph: self.graph.clone(),
            omega,
        }
    }
}

pub fn stress_vector_to_matrix(sv: &StressVector) -> StressMatrix {
    sv.to_matrix()
}

/// A symmetric `v x v` matrix attached to a graph. Construction only checks
/// the shape; [`verify_stress_matrix`] checks the stress-matrix properties.
#[derive(Debug, Clone, PartialEq)]
pub struct StressMatrix {
    graph: Graph,
    omega: DMatrix<f64>,
}

impl StressMatrix {
    pub fn new(graph: Graph, omega: DMatrix<f64>) -> Result<Self> {
        let v = graph.vertex_count();
        if omega.shape() != (v, v) {
            return Err(Error::DimensionMismatch {
                expected: v,
                found: if omega.nrows() != v {
                    omega.nrows()
                } else {
                    omega.ncols()
                },
            });
        }
        Ok(Self { graph, omega })
    }

    pub fn zeros(graph: Graph) -> Self {
        let v = graph.vertex_count();
        Self {
            graph,
            omega: DMatrix::zeros(v, v),
        }
    }

    /// Builds the matrix from off-diagonal edge entries, filling the diagonal
    /// so that every row sums to zero.
    pub fn from_edge_stresses(graph: Graph, stresses: &[f64]) -> Result<Self> {
        let weights = DVector::from_column_slice(stresses);
        Ok(StressVector::new(graph, weights)?.to_matrix())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn into_omega(self) -> DMatrix<f64> {
        self.omega
    }

    pub fn size(&self) -> usize {
        self.omega.nrows()
    }

    /// The off-diagonal entries on edges, in edge order.
    pub fn edge_stresses(&self) -> Vec<f64> {
        self.graph
            .edges()
            .iter()
            .map(|e| self.omega[(e.i(), e.j())])
            .collect()
    }

    pub fn scaled(&self, alpha: f64) -> StressMatrix {
        StressMatrix {
            graph: self.graph.clone(),
            omega: &self.omega * alpha,
        }
    }

    pub fn with_graph(&self, graph: Graph) -> Result<StressMatrix> {
        StressMatrix::new(graph, self.omega.clone())
    }

    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_norm(&self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    NotCertified,
}

/// A failed check recorded in a [`Certificate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reason {
    Symmetry,
    Sparsity,
    RowSums,
    Equilibrium,
    GeneralPosition,
    NotPsd,
    Nullity { expected: usize, found: usize },
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::Symmetry => f.write_str("property (1): matrix is not symmetric"),
            Reason::Sparsity => f.write_str("property (2): nonzero entry at a non-edge"),
            Reason::RowSums => f.write_str("property (3): rows do not sum to zero"),
            Reason::Equilibrium => f.write_str("property (4): configuration is not in equilibrium"),
            Reason::GeneralPosition => f.write_str("configuration is not in general position"),
            Reason::NotPsd => f.write_str("not PSD"),
            Reason::Nullity { expected, found } => {
                write!(f, "nullity {found}, expected {expected}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub reasons: Vec<Reason>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub nullity: usize,
    pub tolerances: Tolerances,
}

impl Certificate {
    fn from_parts(reasons: Vec<Reason>, report: PsdReport, tolerances: Tolerances) -> Self {
        Self {
            verdict: if reasons.is_empty() {
                Verdict::Certified
            } else {
                Verdict::NotCertified
            },
            reasons,
            eigenvalues: report.eigenvalues,
            nullity: report.nullity,
            tolerances,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn max_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    pub fn reasons_summary(&self) -> String {
        if self.reasons.is_empty() {
            return "none".into();
        }
        self.reasons
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Orthonormal basis of `ker(df^T)`, i.e. of the space of equilibrium
/// stresses. Each vector is signed so that its first non-negligible
/// component is positive.
pub fn stress_space_basis(fw: &Framework, tol: &Tolerances) -> Vec<StressVector> {
    let df = fw.rigidity_matrix().matrix;
    let kernel = linalg::null_space(&df.transpose(), tol.zero_rel());
    kernel
        .column_iter()
        .map(|col| {
            let mut w = col.into_owned();
            let max = w.amax();
            if let Some(first) = w.iter().copied().find(|x| x.abs() > tol.zero_rel() * max) {
                if first < 0.0 {
                    w.neg_mut();
                }
            }
            StressVector {
                graph: fw.graph().clone(),
                weights: w,
            }
        })
        .collect()
}

fn property_failures(omega: &DMatrix<f64>, fw: &Framework, tol: &Tolerances) -> Vec<Reason> {
    let v = fw.vertex_count();
    let bound = tol.geom_abs() * linalg::spectral_norm(omega);
    let mut reasons = Vec::new();

    let asym = (omega - omega.transpose()).amax();
    if asym > bound {
        reasons.push(Reason::Symmetry);
    }

    let graph = fw.graph();
    let mut off_pattern = 0.0_f64;
    for i in 0..v {
        for j in 0..v {
            if i != j && !graph.has_edge(i, j) {
                off_pattern = off_pattern.max(omega[(i, j)].abs());
            }
        }
    }
    if off_pattern > bound {
        reasons.push(Reason::Sparsity);
    }

    let row_sums = omega.column_sum();
    if row_sums.amax() > bound {
        reasons.push(Reason::RowSums);
    }

    let coords = fw.config().coords();
    let scale = coords.amax().max(1.0);
    // Row i of Omega * P^T is sum_j Omega_ij p_j.
    let forces = omega * coords.transpose();
    let worst = forces.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    if worst > bound * scale {
        reasons.push(Reason::Equilibrium);
    }
    reasons
}

/// Checks the four stress-matrix properties against `fw`.
pub fn verify_stress_matrix(
    sm: &StressMatrix,
    fw: &Framework,
    tol: &Tolerances,
) -> Result<Certificate> {
    check_size(sm, fw)?;
    let reasons = property_failures(sm.omega(), fw, tol);
    Ok(Certificate::from_parts(
        reasons,
        psd_nullity(sm.omega(), tol),
        *tol,
    ))
}

fn check_size(sm: &StressMatrix, fw: &Framework) -> Result<()> {
    if sm.size() != fw.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: fw.vertex_count(),
            found: sm.size(),
        });
    }
    Ok(())
}

/// Spectrum summary of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub nullity: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues with magnitude at most this are treated as zero.
    pub zero_threshold: f64,
}

impl PsdReport {
    pub fn smallest_positive(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .copied()
            .find(|&l| l > self.zero_threshold)
    }
}

/// PSD iff `min(lambda) >= -zero_rel * max|lambda|`; nullity counts
/// eigenvalues with `|lambda| <= zero_rel * max|lambda|`.
pub fn psd_nullity(m: &DMatrix<f64>, tol: &Tolerances) -> PsdReport {
    let (values, _) = linalg::symmetric_eigen_ascending(m);
    report_from_eigenvalues(values.as_slice(), tol)
}

fn report_from_eigenvalues(values: &[f64], tol: &Tolerances) -> PsdReport {
    let max_abs = values.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
    let threshold = tol.zero_rel() * max_abs;
    PsdReport {
        is_psd: values.first().is_none_or(|&l| l >= -threshold),
        nullity: values.iter().filter(|l| l.abs() <= threshold).count(),
        eigenvalues: values.to_vec(),
        zero_threshold: threshold,
    }
}

/// Orthonormal basis of the numerical kernel of a symmetric matrix.
pub fn kernel_basis(m: &DMatrix<f64>, tol: &Tolerances) -> DMatrix<f64> {
    let (values, vectors) = linalg::symmetric_eigen_ascending(m);
    let report = report_from_eigenvalues(values.as_slice(), tol);
    let kept: Vec<usize> = (0..values.len())
        .filter(|&k| values[k].abs() <= report.zero_threshold)
        .collect();
    vectors.select_columns(&kept)
}

/// Full universal-rigidity check: general position, the four stress-matrix
/// properties, PSD, and nullity exactly `d + 1`. Every failure is listed.
pub fn certify_universal_rigidity(
    fw: &Framework,
    sm: &StressMatrix,
    tol: &Tolerances,
) -> Result<Certificate> {
    let d = fw.dim();
    if fw.vertex_count() < d + 2 {
        return Err(Error::TooFewVertices {
            vertex_count: fw.vertex_count(),
            required: d + 2,
        });
    }
    check_size(sm, fw)?;
    let mut reasons = Vec::new();
    if !fw.config().is_general_position(tol) {
        reasons.push(Reason::GeneralPosition);
    }
    reasons.extend(property_failures(sm.omega(), fw, tol));
    let report = psd_nullity(sm.omega(), tol);
    if !report.is_psd {
        reasons.push(Reason::NotPsd);
    }
    if report.nullity != d + 1 {
        reasons.push(Reason::Nullity {
            expected: d + 1,
            found: report.nullity,
        });
    }
    Ok(Certificate::from_parts(reasons, report, *tol))
}

/// True iff the numerical kernel of `sm` is spanned by the coordinate
/// projections of `fw` together with the all-ones vector.
pub fn kernel_basis_check(sm: &StressMatrix, fw: &Framework, tol: &Tolerances) -> Result<bool> {
    check_size(sm, fw)?;
    let d = fw.dim();
    let report = psd_nullity(sm.omega(), tol);
    if report.nullity != d + 1 {
        return Err(Error::PreconditionFailed(format!(
            "nullity is {}, expected {}",
            report.nullity,
            d + 1
        )));
    }
    let kernel = kernel_basis(sm.omega(), tol);
    let expected = linalg::range_basis(&fw.config().bordered().transpose(), tol.zero_rel());
    if expected.ncols() != d + 1 {
        return Ok(false);
    }
    let forward = linalg::projection_residual(&kernel, &expected);
    let backward = linalg::projection_residual(&expected, &kernel);
    Ok(forward <= tol.geom_abs() && backward <= tol.geom_abs())
}

/// Stress matrix of a complete framework: the orthogonal projector onto the
/// complement of the row space of the bordered coordinate matrix. It is PSD
/// with nullity `d + 1`, and zero for a simplex.
pub fn complete_graph_stress(fw: &Framework, tol: &Tolerances) -> Result<StressMatrix> {
    if !fw.graph().is_complete() {
        return Err(Error::NotComplete);
    }
    let d = fw.dim();
    let v = fw.vertex_count();
    if v < d + 1 {
        return Err(Error::TooFewVertices {
            vertex_count: v,
            required: d + 1,
        });
    }
    if !fw.config().is_general_position(tol) {
        return Err(Error::NotGeneralPosition);
    }
    if v == d + 1 {
        return Ok(StressMatrix::zeros(fw.graph().clone()));
    }
    let q = linalg::range_basis(&fw.config().bordered().transpose(), tol.zero_rel());
    let projector = DMatrix::identity(v, v) - &q * q.transpose();
    let omega = (&projector + projector.transpose()) * 0.5;
    Ok(StressMatrix {
        graph: fw.graph().clone(),
        omega,
    })
}

/// Returns `(c, c * omega1 + omega2)` with `c = 2 ||omega2||_2 / lambda_r`,
/// where `lambda_r` is the smallest positive eigenvalue of `omega1`. The sum
/// is PSD with the nullity of `omega1` whenever `ker(omega1)` lies in
/// `ker(omega2)`.
pub fn psd_combine_matrices(
    omega1: &DMatrix<f64>,
    omega2: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<(f64, DMatrix<f64>)> {
    if omega1.shape() != omega2.shape() || !omega1.is_square() {
        return Err(Error::DimensionMismatch {
            expected: omega1.nrows(),
            found: omega2.nrows(),
        });
    }
    let report = psd_nullity(omega1, tol);
    if !report.is_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: report.eigenvalues[0],
        });
    }
    let norm2 = linalg::spectral_norm(omega2);
    if norm2 == 0.0 {
        return Ok((1.0, omega1 + omega2));
    }
    let kernel = kernel_basis(omega1, tol);
    let residual = linalg::max_column_norm(&(omega2 * &kernel));
    if residual > tol.geom_abs() * norm2 {
        return Err(Error::KernelNotContained { residual });
    }
    let smallest = report
        .smallest_positive()
        .ok_or(Error::KernelNotContained { residual })?;
    let c = 2.0 * norm2 / smallest;
    Ok((c, omega1 * c + omega2))
}

/// [`psd_combine_matrices`] on stress matrices; the result lives on the union
/// of both graphs.
pub fn psd_combine(
    omega1: &StressMatrix,
    omega2: &StressMatrix,
    tol: &Tolerances,
) -> Result<(f64, StressMatrix)> {
    let graph = omega1.graph().union(omega2.graph())?;
    let (c, omega) = psd_combine_matrices(omega1.omega(), omega2.omega(), tol)?;
    Ok((c, StressMatrix { graph, omega }))
}

/// The invertible matrix whose first `d + 1` columns are the coordinate
/// projections and the all-ones vector, followed by eigenvectors of the
/// positive eigenvalues. It diagonalizes a certified stress matrix.
pub fn diagonalizing_basis(
    sm: &StressMatrix,
    fw: &Framework,
    tol: &Tolerances,
) -> Result<DMatrix<f64>> {
    check_size(sm, fw)?;
    let d = fw.dim();
    let v = fw.vertex_count();
    let (values, vectors) = linalg::symmetric_eigen_ascending(sm.omega());
    let report = report_from_eigenvalues(values.as_slice(), tol);
    if !report.is_psd || report.nullity != d + 1 {
        return Err(Error::PreconditionFailed(
            "stress matrix must be PSD with nullity d+1".into(),
        ));
    }
    let mut s = DMatrix::zeros(v, v);
    s.columns_mut(0, d + 1)
        .copy_from(&fw.config().bordered().transpose());
    let positive: Vec<usize> = (0..v)
        .filter(|&k| values[k] > report.zero_threshold)
        .collect();
    for (c, &k) in positive.iter().enumerate() {
        s.set_column(d + 1 + c, &vectors.column(k));
    }
    Ok(s)
}
