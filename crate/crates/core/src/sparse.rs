//! Compressed-row matrices on the Q2 connectivity of a mesh, plus the
//! direct solver used by the time integrator.

use std::io::{self, Write};
use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::mesh::VelocityMesh;
use crate::{Error, Result};

/// Systems with fewer unknowns than this are factored densely.
pub const DENSE_SOLVE_LIMIT: usize = 256;

#[derive(Clone, Debug, PartialEq)]
struct Pattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

/// Square CSR matrix. Matrices built from the same mesh share their pattern.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pattern: Arc<Pattern>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix whose pattern is the free-dof coupling of the mesh after
    /// hanging-node condensation.
    pub fn for_mesh(mesh: &VelocityMesh) -> Self {
        let n = mesh.num_dofs();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for nodes in mesh.cell_nodes() {
            let mut dofs: Vec<usize> = nodes
                .iter()
                .flat_map(|&nd| mesh.expansion(nd).iter().map(|&(d, _)| d))
                .collect();
            dofs.sort_unstable();
            dofs.dedup();
            for &i in &dofs {
                rows[i].extend_from_slice(&dofs);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            pattern: Arc::new(Pattern { n, row_ptr, col_idx }),
            values: vec![0.0; nnz],
        }
    }

    /// Zero matrix with the same pattern.
    pub fn zeros_like(&self) -> Self {
        Self {
            pattern: Arc::clone(&self.pattern),
            values: vec![0.0; self.values.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.pattern.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let p = &self.pattern;
        let lo = p.row_ptr[i];
        let hi = p.row_ptr[i + 1];
        p.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` at `(i, j)`. Panics if the entry is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside sparsity pattern"));
        self.values[k] += v;
    }

    /// Adds a 9×9 element matrix (row-major, test index first) for the cell
    /// with the given nodes, distributing hanging-node rows and columns to
    /// their masters.
    pub fn scatter_element(&mut self, mesh: &VelocityMesh, nodes: &[usize; 9], elem: &[f64; 81]) {
        for (i, &ni) in nodes.iter().enumerate() {
            for &(di, wi) in mesh.expansion(ni) {
                for (j, &nj) in nodes.iter().enumerate() {
                    let v = wi * elem[9 * i + j];
                    if v == 0.0 {
                        continue;
                    }
                    for &(dj, wj) in mesh.expansion(nj) {
                        self.add(di, dj, v * wj);
                    }
                }
            }
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        assert_eq!(x.len(), p.n);
        (0..p.n)
            .map(|i| {
                (p.row_ptr[i]..p.row_ptr[i + 1])
                    .map(|k| self.values[k] * x[p.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    /// `a·self + b·other`; patterns must match.
    pub fn lin_comb(&self, a: f64, other: &CsrMatrix, b: f64) -> CsrMatrix {
        assert!(self.same_pattern(other), "patterns differ");
        CsrMatrix {
            pattern: Arc::clone(&self.pattern),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// `(row, col, value)` for every stored entry, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let p = &self.pattern;
        (0..p.n).flat_map(move |i| (p.row_ptr[i]..p.row_ptr[i + 1]).map(move |k| (i, p.col_idx[k], self.values[k])))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for (i, j, v) in self.entries() {
            d[i][j] = v;
        }
        d
    }

    /// Coordinate text export: header line `n nnz`, then `i j value` per entry.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.dim(), self.nnz())?;
        for (i, j, v) in self.entries() {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }

    /// Solves `A x = b` with a direct LU factorization: dense below
    /// [`DENSE_SOLVE_LIMIT`] unknowns, sparse above.
    pub fn solve(&self, b: &[f64]) -> std::result::Result<Vec<f64>, String> {
        self.solve_with(b, self.dim() < DENSE_SOLVE_LIMIT)
    }

    /// Dense partial-pivoting LU regardless of size.
    pub fn solve_dense(&self, b: &[f64]) -> std::result::Result<Vec<f64>, String> {
        self.solve_with(b, true)
    }

    /// Sparse LU regardless of size.
    pub fn solve_sparse(&self, b: &[f64]) -> std::result::Result<Vec<f64>, String> {
        self.solve_with(b, false)
    }

    fn solve_with(&self, b: &[f64], dense: bool) -> std::result::Result<Vec<f64>, String> {
        let n = self.dim();
        if b.len() != n {
            return Err(format!("right-hand side has {} entries, expected {n}", b.len()));
        }
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        if dense {
            let mut a = Mat::<f64>::zeros(n, n);
            for (i, j, v) in self.entries() {
                a[(i, j)] = v;
            }
            let lu = a.partial_piv_lu();
            lu.solve_in_place(rhs.as_mut());
        } else {
            let triplets: Vec<Triplet<usize, usize, f64>> =
                self.entries().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
            let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets).map_err(|e| format!("{e:?}"))?;
            let lu = a.sp_lu().map_err(|e| format!("{e:?}"))?;
            lu.solve_in_place(rhs.as_mut());
        }
        let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err("factorization produced non-finite values (singular matrix)".into());
        }
        Ok(x)
    }
}

/// Wraps a solve failure for species `species`.
pub(crate) fn solve_for_species(a: &CsrMatrix, b: &[f64], species: usize) -> Result<Vec<f64>> {
    a.solve(b).map_err(|reason| Error::SingularSystem { species, reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{DomainSpec, VelocityMesh};

    fn small_mesh() -> VelocityMesh {
        VelocityMesh::cartesian(DomainSpec::new(1.0).unwrap(), 2, 2).unwrap()
    }

    #[test]
    fn pattern_is_symmetric_and_has_diagonal() {
        let a = CsrMatrix::for_mesh(&small_mesh());
        let n = a.dim();
        assert_eq!(n, 25);
        for i in 0..n {
            assert!(a.position(i, i).is_some());
        }
        for (i, j, _) in a.entries() {
            assert!(a.position(j, i).is_some());
        }
    }

    #[test]
    #[should_panic(expected = "outside sparsity pattern")]
    fn add_outside_pattern_panics() {
        let mut a = CsrMatrix::for_mesh(&small_mesh());
        // corner nodes of opposite cells never couple
        a.add(0, 24, 1.0);
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let mesh = small_mesh();
        let mut a = CsrMatrix::for_mesh(&mesh);
        let n = a.dim();
        let entries: Vec<(usize, usize)> = a.entries().map(|(i, j, _)| (i, j)).collect();
        for (k, (i, j)) in entries.into_iter().enumerate() {
            let v = if i == j {
                10.0
            } else {
                ((k * 37 % 11) as f64 - 5.0) * 0.1
            };
            a.add(i, j, v);
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let xd = a.solve_dense(&b).unwrap();
        let xs = a.solve_sparse(&b).unwrap();
        assert_eq!(a.solve(&b).unwrap(), xd);
        let r = a.mul_vec(&xs);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-12);
            assert!((xd[i] - xs[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::for_mesh(&small_mesh());
        let b = vec![1.0; a.dim()];
        assert!(a.solve(&b).is_err());
        assert!(a.solve_sparse(&b).is_err());
    }

    #[test]
    fn coordinate_export_has_header() {
        let mut a = CsrMatrix::for_mesh(&small_mesh());
        a.add(3, 3, 2.5);
        let mut buf = Vec::new();
        a.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, format!("25 {}", a.nnz()));
        assert!(text.contains("3 3 2.5"));
    }
}
