//! Flux-form discretization of the Baouendi-Grushin operator
//! `Delta_x + |x|^{2 gamma} Delta_y` with zero Dirichlet data.
//!
//! Each grid edge carries a weight (1 on x-edges, the degenerate coefficient on
//! y-edges). The matrix rows and [`grushin_energy`] are built from the same
//! edge list, so `-u^T A u * prod(h) == grushin_energy(u)` holds up to rounding.

use std::io::Write;
use std::path::Path;

use crate::error::{check_len, Error, Result};
use crate::geometry::{Grid, GrushinSpace};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Builds a square matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and columns sorted within each row.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::invalid(format!("entry ({i},{j}) outside {dim}x{dim}")));
            }
            rows[i].push((j, v));
        }
        let mut row_offsets = Vec::with_capacity(dim + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if col_indices.len() > *row_offsets.last().unwrap() && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        let mut m = Self {
            dim,
            row_offsets,
            col_indices,
            values,
            symmetric: false,
        };
        m.symmetric = m.is_symmetric(0.0);
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_offsets: (0..=dim).collect(),
            col_indices: (0..dim).collect(),
            values: vec![1.0; dim],
            symmetric: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Symmetry flag recorded at construction.
    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    /// Entrywise symmetry check with relative tolerance.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        (0..self.dim).all(|i| {
            self.row(i).all(|(j, v)| {
                let w = self.get(j, i);
                (v - w).abs() <= rel_tol * v.abs().max(w.abs())
            })
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x` without length checks.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_offsets[i]..self.row_offsets[i + 1];
            *yi = self.col_indices[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, x.len())?;
        let mut y = vec![0.0; self.dim];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// Coordinate text dump, one zero-based `i j value` triple per line.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:e}")?;
            }
        }
        Ok(())
    }

    pub fn dump(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_coordinate(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Free-function form of [`SparseMatrix::apply`].
pub fn apply(a: &SparseMatrix, u: &[f64]) -> Result<Vec<f64>> {
    a.apply(u)
}

fn check_axes(grid: &Grid, space: &GrushinSpace) -> Result<()> {
    if grid.dim() != space.dim() {
        return Err(Error::invalid(format!(
            "grid has {} axes but the space has m + k = {}",
            grid.dim(),
            space.dim()
        )));
    }
    Ok(())
}

/// Weight of y-direction edges sitting over the x-position `x`.
///
/// `|x|^{2 gamma}` is averaged over the 2m x-edge midpoints `x +- h_j/2 e_j`
/// adjacent to the node column, so the weight stays positive on `x = 0`.
fn y_edge_weight(x: &[f64], hx: &[f64], gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 1.0;
    }
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let mut acc = 0.0;
    for (xj, hj) in x.iter().zip(hx) {
        for s in [-0.5, 0.5] {
            let shifted = xj + s * hj;
            let r2 = sq - xj * xj + shifted * shifted;
            acc += r2.powf(gamma);
        }
    }
    acc / (2 * x.len()) as f64
}

/// Edge weights per axis for every interior node: `weights[axis]` is the weight
/// shared by both edges leaving the node along that axis.
fn node_weights(grid: &Grid, space: &GrushinSpace, node: &[f64]) -> Vec<f64> {
    let m = space.m();
    let wy = y_edge_weight(&node[..m], &grid.spacing()[..m], space.gamma());
    (0..grid.dim()).map(|a| if a < m { 1.0 } else { wy }).collect()
}

/// Assembles the discrete operator `A ~ Delta_gamma` (symmetric negative definite).
pub fn assemble_grushin(grid: &Grid, space: &GrushinSpace) -> Result<SparseMatrix> {
    check_axes(grid, space)?;
    let n = grid.len();
    let h2: Vec<f64> = grid.spacing().iter().map(|h| h * h).collect();
    let mut triplets = Vec::with_capacity(n * (2 * grid.dim() + 1));
    for i in 0..n {
        let multi = grid.multi_index(i);
        let node: Vec<f64> = multi.iter().enumerate().map(|(a, &j)| grid.coordinate(a, j)).collect();
        let weights = node_weights(grid, space, &node);
        let mut diag = 0.0;
        let mut nb = multi.clone();
        for a in 0..grid.dim() {
            let c = weights[a] / h2[a];
            for step in [-1isize, 1] {
                diag -= c;
                nb[a] = (multi[a] as isize + step) as usize;
                if let Some(j) = grid.flat_index(&nb) {
                    triplets.push((i, j, c));
                }
            }
            nb[a] = multi[a];
        }
        triplets.push((i, i, diag));
    }
    let mut a = SparseMatrix::from_triplets(n, &triplets)?;
    a.symmetric = a.is_symmetric(1e-15);
    Ok(a)
}

/// Squared discrete `H_0^{1,gamma}` seminorm: the weighted sum of squared edge
/// differences with zero extension beyond the boundary, times the cell volume.
pub fn grushin_energy(grid: &Grid, space: &GrushinSpace, u: &[f64]) -> Result<f64> {
    check_axes(grid, space)?;
    check_len(grid.len(), u.len())?;
    let shape = grid.shape();
    let strides = grid.strides();
    let mut total = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        let multi = grid.multi_index(i);
        let node: Vec<f64> = multi.iter().enumerate().map(|(a, &j)| grid.coordinate(a, j)).collect();
        let weights = node_weights(grid, space, &node);
        for a in 0..grid.dim() {
            let h = grid.spacing()[a];
            // edge towards the lower neighbor (boundary value 0 when j == 1)
            let lower = if multi[a] > 1 { u[i - strides[a]] } else { 0.0 };
            let d = (ui - lower) / h;
            let mut s = d * d;
            // closing edge to the upper boundary
            if multi[a] == shape[a] {
                let d = ui / h;
                s += d * d;
            }
            total += weights[a] * s;
        }
    }
    Ok(total * grid.cell_volume())
}

/// Discrete `int_D u^2`.
pub fn l2_norm_sq(grid: &Grid, u: &[f64]) -> Result<f64> {
    check_len(grid.len(), u.len())?;
    Ok(u.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume())
}

/// Discrete `int_D u v`.
pub fn l2_inner(grid: &Grid, u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(grid.len(), u.len())?;
    check_len(grid.len(), v.len())?;
    Ok(u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() * grid.cell_volume())
}
