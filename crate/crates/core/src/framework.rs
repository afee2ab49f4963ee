use itertools::Itertools;
use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::linalg;
use crate::tolerance::Tolerances;

/// Vertex coordinates in `R^d`, stored as a `d x v` matrix whose columns are
/// the points.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    coords: DMatrix<f64>,
}

impl Configuration {
    pub fn new(coords: DMatrix<f64>) -> Result<Self> {
        if coords.nrows() == 0 {
            return Err(Error::InvalidConfiguration(
                "dimension must be positive".into(),
            ));
        }
        if let Some(bad) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidConfiguration(format!(
                "non-finite coordinate {bad}"
            )));
        }
        Ok(Self { coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut coords = DMatrix::zeros(dim, points.len());
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.set_column(i, &DVector::from_column_slice(p));
        }
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.nrows()
    }

    pub fn len(&self) -> usize {
        self.coords.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.ncols() == 0
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn point(&self, i: usize) -> DVectorView<'_, f64> {
        self.coords.column(i)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.point(i) - self.point(j)).norm()
    }

    /// The `(d+1) x v` matrix of coordinates with a row of ones appended.
    pub fn bordered(&self) -> DMatrix<f64> {
        let (d, v) = self.coords.shape();
        let mut b = DMatrix::from_element(d + 1, v, 1.0);
        b.rows_mut(0, d).copy_from(&self.coords);
        b
    }

    /// True when the points affinely span `R^d`.
    pub fn affinely_spans(&self, tol: &Tolerances) -> bool {
        linalg::numerical_rank(&self.bordered(), tol.zero_rel()) == self.dim() + 1
    }

    /// Every `d + 1` points are affinely independent. Vacuously true for
    /// fewer than `d + 1` points.
    pub fn is_general_position(&self, tol: &Tolerances) -> bool {
        let d = self.dim();
        let bordered = self.bordered();
        (0..self.len())
            .combinations(d + 1)
            .all(|subset| subset_full_rank(&bordered, &subset, tol))
    }

    /// General-position test restricted to the `(d+1)`-subsets containing
    /// `vertex`. Used when extending an already checked configuration.
    pub fn is_general_position_including(&self, vertex: usize, tol: &Tolerances) -> bool {
        let d = self.dim();
        let bordered = self.bordered();
        (0..self.len())
            .filter(|&k| k != vertex)
            .combinations(d)
            .all(|mut subset| {
                subset.push(vertex);
                subset_full_rank(&bordered, &subset, tol)
            })
    }

    /// Applies `x -> rotation * x + translation` to every point.
    pub fn transformed(
        &self,
        rotation: &DMatrix<f64>,
        translation: &DVector<f64>,
    ) -> Configuration {
        let mut coords = rotation * &self.coords;
        for mut col in coords.column_iter_mut() {
            col += translation;
        }
        Configuration { coords }
    }

    pub fn push_point(&mut self, point: &DVector<f64>) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: point.len(),
            });
        }
        let v = self.len();
        let coords = std::mem::replace(&mut self.coords, DMatrix::zeros(0, 0));
        self.coords = coords.insert_column(v, 0.0);
        self.coords.set_column(v, point);
        Ok(())
    }

    /// Configuration made of the selected points, in the given order.
    pub fn select(&self, vertices: &[usize]) -> Configuration {
        Configuration {
            coords: self.coords.select_columns(vertices),
        }
    }
}

fn subset_full_rank(bordered: &DMatrix<f64>, subset: &[usize], tol: &Tolerances) -> bool {
    let sv = bordered.select_columns(subset).singular_values();
    let max = sv.max();
    max > 0.0 && sv.min() > tol.zero_rel() * max
}

/// Rigidity matrix with its row order.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidityMatrix {
    pub matrix: DMatrix<f64>,
    pub edge_order: Vec<Edge>,
}

impl RigidityMatrix {
    pub fn rank(&self, tol: &Tolerances) -> usize {
        linalg::numerical_rank(&self.matrix, tol.zero_rel())
    }
}

/// A graph with a configuration of matching vertex count.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    graph: Graph,
    config: Configuration,
}

impl Framework {
    pub fn new(graph: Graph, config: Configuration) -> Result<Self> {
        if graph.vertex_count() != config.len() {
            return Err(Error::DimensionMismatch {
                expected: graph.vertex_count(),
                found: config.len(),
            });
        }
        Ok(Self { graph, config })
    }

    pub fn complete(config: Configuration) -> Self {
        Self {
            graph: Graph::complete(config.len()),
            config,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn with_graph(&self, graph: Graph) -> Result<Framework> {
        Framework::new(graph, self.config.clone())
    }

    pub fn with_config(&self, config: Configuration) -> Result<Framework> {
        Framework::new(self.graph.clone(), config)
    }

    /// Half squared edge lengths, in edge order.
    pub fn edge_function(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.graph.edge_count(),
            self.graph.edges().iter().map(|e| {
                0.5 * (self.config.point(e.i()) - self.config.point(e.j())).norm_squared()
            }),
        )
    }

    /// The Jacobian of [`Framework::edge_function`]: an `e x vd` matrix whose
    /// row for edge `{i,j}` holds `p_i - p_j` in the block of vertex `i` and
    /// `p_j - p_i` in the block of vertex `j`.
    pub fn rigidity_matrix(&self) -> RigidityMatrix {
        let d = self.dim();
        let mut m = DMatrix::zeros(self.graph.edge_count(), self.vertex_count() * d);
        for (row, e) in self.graph.edges().iter().enumerate() {
            let diff = self.config.point(e.i()) - self.config.point(e.j());
            for k in 0..d {
                m[(row, e.i() * d + k)] = diff[k];
                m[(row, e.j() * d + k)] = -diff[k];
            }
        }
        RigidityMatrix {
            matrix: m,
            edge_order: self.graph.edges().to_vec(),
        }
    }

    /// The rigidity-matrix row that edge `{i,j}` would have, whether or not
    /// it is an edge of the graph.
    pub fn edge_row(&self, i: usize, j: usize) -> DVector<f64> {
        let d = self.dim();
        let mut row = DVector::zeros(self.vertex_count() * d);
        let diff = self.config.point(i) - self.config.point(j);
        for k in 0..d {
            row[i * d + k] = diff[k];
            row[j * d + k] = -diff[k];
        }
        row
    }

    /// `d(d+1)/2`: dimension of the trivial flexes of a spanning configuration.
    pub fn trivial_flex_dimension(&self) -> usize {
        let d = self.dim();
        d * (d + 1) / 2
    }

    /// Translations followed by the infinitesimal rotations
    /// `q_i = (e_a e_b^T - e_b e_a^T) p_i`, as columns of a `vd`-row matrix.
    pub fn trivial_flex_basis(&self) -> DMatrix<f64> {
        let d = self.dim();
        let v = self.vertex_count();
        let mut t = DMatrix::zeros(v * d, self.trivial_flex_dimension());
        for k in 0..d {
            for i in 0..v {
                t[(i * d + k, k)] = 1.0;
            }
        }
        for (col, (a, b)) in (0..d).tuple_combinations().enumerate() {
            let col = d + col;
            for i in 0..v {
                let p = self.config.point(i);
                t[(i * d + a, col)] = -p[b];
                t[(i * d + b, col)] = p[a];
            }
        }
        t
    }

    fn require_span(&self, tol: &Tolerances) -> Result<()> {
        if self.vertex_count() < self.dim() + 1 || !self.config.affinely_spans(tol) {
            return Err(Error::DegenerateSpan { dim: self.dim() });
        }
        Ok(())
    }

    /// Rank an infinitesimally rigid framework must reach: `vd - d(d+1)/2`.
    pub fn full_rigidity_rank(&self) -> usize {
        self.vertex_count() * self.dim() - self.trivial_flex_dimension()
    }

    pub fn infinitesimal_rigidity(&self, tol: &Tolerances) -> Result<bool> {
        self.require_span(tol)?;
        Ok(self.rigidity_matrix().rank(tol) == self.full_rigidity_rank())
    }

    /// Orthonormal basis of the infinitesimal flexes orthogonal to the trivial
    /// ones. Empty exactly when the framework is infinitesimally rigid.
    pub fn nontrivial_flex_space(&self, tol: &Tolerances) -> Result<DMatrix<f64>> {
        self.require_span(tol)?;
        let kernel = linalg::null_space(&self.rigidity_matrix().matrix, tol.zero_rel());
        let trivial = linalg::range_basis(&self.trivial_flex_basis(), tol.zero_rel());
        let projected = &kernel - &trivial * (trivial.transpose() * &kernel);
        // Trivial flexes lie inside the kernel, so the projected singular values
        // are either ~1 or ~0.
        let svd = projected.svd(true, false);
        let u = svd.u.expect("u requested");
        let kept: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > 0.5)
            .collect();
        let mut basis = DMatrix::zeros(kernel.nrows(), kept.len());
        for (c, &k) in kept.iter().enumerate() {
            basis.set_column(c, &u.column(k));
        }
        Ok(basis)
    }

    /// Largest edge-length disagreement with another framework on the same graph.
    pub fn edge_length_discrepancy(&self, other: &Framework) -> f64 {
        self.graph
            .edges()
            .iter()
            .map(|e| {
                (self.config.distance(e.i(), e.j()) - other.config.distance(e.i(), e.j())).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest disagreement over all vertex pairs; zero up to rounding iff the
    /// configurations are congruent.
    pub fn pairwise_distance_discrepancy(&self, other: &Framework) -> f64 {
        (0..self.vertex_count())
            .tuple_combinations()
            .map(|(i, j)| (self.config.distance(i, j) - other.config.distance(i, j)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_equivalent(&self, other: &Framework, tol: &Tolerances) -> bool {
        self.graph == other.graph && self.edge_length_discrepancy(other) <= tol.geom_abs()
    }

    pub fn is_congruent(&self, other: &Framework, tol: &Tolerances) -> bool {
        self.vertex_count() == other.vertex_count()
            && self.pairwise_distance_discrepancy(other) <= tol.geom_abs()
    }
}
