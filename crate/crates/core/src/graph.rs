//! Dense network containers and the block structure of an egocentric sample.
//!
//! Node indices are 0-based. An egocentric sample fronts the observed nodes:
//! rows/columns `[0, n)` of every fronted matrix belong to the observed set
//! (in the caller's order) and `[n, N)` to the hidden set (ascending index).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn max_asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::invalid(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Symmetric matrix of edge probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    values: Matrix,
}

impl ProbabilityMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        check_square(&values, "probability matrix")?;
        check_finite(&values, "probability matrix")?;
        if values.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::invalid("probability matrix entries must lie in [0, 1]"));
        }
        let asym = max_asymmetry(&values);
        if asym > SYMMETRY_TOL {
            return Err(Error::invalid(format!(
                "probability matrix is not symmetric (max |P_ij - P_ji| = {asym:e})"
            )));
        }
        let mut values = values;
        symmetrize_upper(&mut values);
        Ok(Self { values })
    }

    pub fn n_nodes(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn into_inner(self) -> Matrix {
        self.values
    }

    /// Largest edge probability, `max_ij P_ij`.
    pub fn max_probability(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Expected average degree `sum_{i != j} P_ij / N`.
    pub fn expected_degree(&self) -> f64 {
        off_diagonal_sum(&self.values) / self.n_nodes() as f64
    }

    /// The probability block among hidden nodes of `view`, in the view's hidden order.
    pub fn hidden_block(&self, view: &EgoView) -> Matrix {
        submatrix(&self.values, view.hidden(), view.hidden())
    }

    /// `P` with rows and columns reordered so the view's observed nodes come first.
    pub fn fronted(&self, view: &EgoView) -> Matrix {
        let order = view.fronted_order();
        submatrix(&self.values, &order, &order)
    }
}

/// Symmetric 0/1 adjacency matrix with an empty diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    values: Matrix,
}

impl AdjacencyMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        check_square(&values, "adjacency matrix")?;
        if values.iter().any(|&a| a != 0.0 && a != 1.0) {
            return Err(Error::invalid("adjacency entries must be 0 or 1"));
        }
        if values.diagonal().iter().any(|&a| a != 0.0) {
            return Err(Error::invalid("adjacency matrix must have a zero diagonal"));
        }
        if max_asymmetry(&values) != 0.0 {
            return Err(Error::invalid("adjacency matrix must be symmetric"));
        }
        Ok(Self { values })
    }

    /// Builds an undirected simple graph. Self-loops are dropped and repeated
    /// edges collapse to one.
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::invalid("graph must have at least one node"));
        }
        let mut values = Matrix::zeros(n_nodes, n_nodes);
        for (u, v) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n_nodes} nodes"
                )));
            }
            if u != v {
                values[(u, v)] = 1.0;
                values[(v, u)] = 1.0;
            }
        }
        Ok(Self { values })
    }

    pub fn n_nodes(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn into_inner(self) -> Matrix {
        self.values
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.values
            .row_iter()
            .map(|row| row.iter().filter(|&&a| a != 0.0).count())
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.values[(i, j)] != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The true adjacency block among hidden nodes of `view`.
    pub fn hidden_block(&self, view: &EgoView) -> Matrix {
        submatrix(&self.values, view.hidden(), view.hidden())
    }
}

/// What an egocentric sample reveals: every link incident to the observed nodes.
///
/// `a11` holds links among observed nodes and `a12` links from observed to
/// hidden nodes. Blocks are real-valued so noiseless probability blocks can be
/// fed through the same estimators as binary data.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoView {
    observed: Vec<usize>,
    hidden: Vec<usize>,
    a11: Matrix,
    a12: Matrix,
    n_total: usize,
}

impl EgoView {
    pub fn new(observed: Vec<usize>, a11: Matrix, a12: Matrix, n_total: usize) -> Result<Self> {
        let n = observed.len();
        if n == 0 || n >= n_total {
            return Err(Error::invalid(format!(
                "need 1 <= observed count < N, got {n} of {n_total}"
            )));
        }
        let hidden = complement(&observed, n_total)?;
        if a11.nrows() != n || a11.ncols() != n {
            return Err(Error::invalid(format!(
                "a11 must be {n}x{n}, got {}x{}",
                a11.nrows(),
                a11.ncols()
            )));
        }
        if a12.nrows() != n || a12.ncols() != n_total - n {
            return Err(Error::invalid(format!(
                "a12 must be {n}x{}, got {}x{}",
                n_total - n,
                a12.nrows(),
                a12.ncols()
            )));
        }
        check_finite(&a11, "a11")?;
        check_finite(&a12, "a12")?;
        let scale = a11.amax().max(1.0);
        if max_asymmetry(&a11) > SYMMETRY_TOL * scale {
            return Err(Error::invalid("a11 must be symmetric"));
        }
        Ok(Self {
            observed,
            hidden,
            a11,
            a12,
            n_total,
        })
    }

    /// View whose observed nodes are `0..n` and hidden nodes `n..N`.
    pub fn from_blocks(a11: Matrix, a12: Matrix) -> Result<Self> {
        let n = a11.nrows();
        let n_total = n + a12.ncols();
        Self::new((0..n).collect(), a11, a12, n_total)
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    /// Hidden nodes in ascending order.
    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn a11(&self) -> &Matrix {
        &self.a11
    }

    pub fn a12(&self) -> &Matrix {
        &self.a12
    }

    pub fn n_observed(&self) -> usize {
        self.observed.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden.len()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// Observed nodes followed by hidden nodes.
    pub fn fronted_order(&self) -> Vec<usize> {
        self.observed.iter().chain(self.hidden.iter()).copied().collect()
    }

    /// `[a11 | a12]`, the n x N block of observed rows.
    pub fn observed_rows(&self) -> Matrix {
        let n = self.n_observed();
        let mut out = Matrix::zeros(n, self.n_total);
        out.columns_mut(0, n).copy_from(&self.a11);
        out.columns_mut(n, self.n_hidden()).copy_from(&self.a12);
        out
    }
}

/// The four blocks of a matrix split after row/column `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub m11: Matrix,
    pub m12: Matrix,
    pub m21: Matrix,
    pub m22: Matrix,
}

impl BlockPartition {
    pub fn reassemble(&self) -> Matrix {
        let n = self.m11.nrows();
        let total = n + self.m22.nrows();
        let mut out = Matrix::zeros(total, total);
        out.view_mut((0, 0), (n, n)).copy_from(&self.m11);
        out.view_mut((0, n), (n, total - n)).copy_from(&self.m12);
        out.view_mut((n, 0), (total - n, n)).copy_from(&self.m21);
        out.view_mut((n, n), (total - n, total - n)).copy_from(&self.m22);
        out
    }
}

pub fn partition(matrix: &Matrix, n: usize) -> Result<BlockPartition> {
    check_square(matrix, "partitioned matrix")?;
    let total = matrix.nrows();
    if n == 0 || n >= total {
        return Err(Error::invalid(format!("need 1 <= n < {total}, got n = {n}")));
    }
    let rest = total - n;
    Ok(BlockPartition {
        m11: matrix.view((0, 0), (n, n)).into_owned(),
        m12: matrix.view((0, n), (n, rest)).into_owned(),
        m21: matrix.view((n, 0), (rest, n)).into_owned(),
        m22: matrix.view((n, n), (rest, rest)).into_owned(),
    })
}

pub fn extract_ego_view(adjacency: &AdjacencyMatrix, observed: &[usize]) -> Result<EgoView> {
    let n_total = adjacency.n_nodes();
    let hidden = complement(observed, n_total)?;
    let a = adjacency.values();
    EgoView::new(
        observed.to_vec(),
        submatrix(a, observed, observed),
        submatrix(a, observed, &hidden),
        n_total,
    )
}

/// Nodes of `[0, n_total)` not in `observed`, ascending. Fails on duplicates
/// or out-of-range indices.
pub fn complement(observed: &[usize], n_total: usize) -> Result<Vec<usize>> {
    let mut seen = vec![false; n_total];
    for &i in observed {
        if i >= n_total {
            return Err(Error::invalid(format!(
                "node index {i} out of range for {n_total} nodes"
            )));
        }
        if seen[i] {
            return Err(Error::invalid(format!("duplicate node index {i}")));
        }
        seen[i] = true;
    }
    Ok((0..n_total).filter(|&i| !seen[i]).collect())
}

pub fn submatrix(m: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub(crate) fn off_diagonal_sum(m: &Matrix) -> f64 {
    m.sum() - m.trace()
}

/// Copies the upper triangle onto the lower one.
pub(crate) fn symmetrize_upper(m: &mut Matrix) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            m[(i, j)] = m[(j, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> AdjacencyMatrix {
        AdjacencyMatrix::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn identity_partition() {
        let p = partition(&Matrix::identity(4, 4), 2).unwrap();
        assert_eq!(p.m11, Matrix::identity(2, 2));
        assert_eq!(p.m12, Matrix::zeros(2, 2));
        assert_eq!(p.m21, Matrix::zeros(2, 2));
        assert_eq!(p.m22, Matrix::identity(2, 2));
    }

    #[test]
    fn last_node_partition() {
        let m = Matrix::from_fn(5, 5, |i, j| (i * 5 + j) as f64);
        let p = partition(&m, 4).unwrap();
        assert_eq!(p.m22.shape(), (1, 1));
        assert_eq!(p.m22[(0, 0)], m[(4, 4)]);
    }

    #[test]
    fn partition_rejects_bad_n() {
        let m = Matrix::identity(3, 3);
        assert!(matches!(partition(&m, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(partition(&m, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn path_graph_center_observed() {
        let view = extract_ego_view(&path3(), &[1]).unwrap();
        assert_eq!(view.a11(), &Matrix::zeros(1, 1));
        assert_eq!(view.a12(), &Matrix::from_row_slice(1, 2, &[1.0, 1.0]));
        assert_eq!(view.hidden(), &[0, 2]);
    }

    #[test]
    fn all_but_last_observed() {
        let a = AdjacencyMatrix::from_edges(5, [(0, 4), (1, 2), (3, 4), (2, 4)]).unwrap();
        let view = extract_ego_view(&a, &[0, 1, 2, 3]).unwrap();
        let last_col: Vec<f64> = (0..4).map(|i| a.values()[(i, 4)]).collect();
        assert_eq!(view.a12().as_slice(), last_col.as_slice());
    }

    #[test]
    fn ego_view_rejects_bad_indices() {
        let a = path3();
        assert!(extract_ego_view(&a, &[0, 0]).is_err());
        assert!(extract_ego_view(&a, &[3]).is_err());
        assert!(extract_ego_view(&a, &[]).is_err());
        assert!(extract_ego_view(&a, &[0, 1, 2]).is_err());
    }

    #[test]
    fn adjacency_from_edges_dedups() {
        let a = AdjacencyMatrix::from_edges(3, [(0, 1), (1, 0), (0, 1), (2, 2)]).unwrap();
        assert_eq!(a.edge_count(), 1);
        assert_eq!(a.degrees(), vec![1, 1, 0]);
    }

    #[test]
    fn probability_matrix_validation() {
        assert!(ProbabilityMatrix::new(Matrix::from_element(3, 3, 1.5)).is_err());
        let asym = Matrix::from_row_slice(2, 2, &[0.0, 0.1, 0.2, 0.0]);
        assert!(ProbabilityMatrix::new(asym).is_err());
        let p = ProbabilityMatrix::new(Matrix::from_element(4, 4, 0.25)).unwrap();
        assert_eq!(p.max_probability(), 0.25);
        assert!((p.expected_degree() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn adjacency_validation() {
        assert!(AdjacencyMatrix::new(Matrix::identity(2, 2)).is_err());
        assert!(AdjacencyMatrix::new(Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).is_err());
        assert!(AdjacencyMatrix::new(Matrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0])).is_err());
    }
}
