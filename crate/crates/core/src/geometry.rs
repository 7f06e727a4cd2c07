//! Anisotropic space, box domains, tensor grids and nodal quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Splitting of `R^n` into `m` x-directions and `k` y-directions together
/// with the anisotropy exponent `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrushinSpace {
    m: usize,
    k: usize,
    gamma: f64,
}

impl GrushinSpace {
    pub fn new(m: usize, k: usize, gamma: f64) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::invalid(format!("m and k must be >= 1 (m={m}, k={k})")));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::invalid(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        Ok(Self { m, k, gamma })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Total dimension `n = m + k`.
    pub fn dim(&self) -> usize {
        self.m + self.k
    }

    /// Homogeneous dimension `Q = m + (1 + gamma) k`.
    pub fn homogeneous_dimension(&self) -> f64 {
        self.m as f64 + (1.0 + self.gamma) * self.k as f64
    }

    /// Anisotropic dilation: x-part scaled by `lambda`, y-part by `lambda^(1+gamma)`.
    pub fn dilate(&self, lambda: f64, z: &[f64]) -> Result<Vec<f64>> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!("dilation factor must be > 0, got {lambda}")));
        }
        check_len(self.dim(), z.len())?;
        let ly = lambda.powf(1.0 + self.gamma);
        Ok(z
            .iter()
            .enumerate()
            .map(|(i, &zi)| if i < self.m { lambda * zi } else { ly * zi })
            .collect())
    }

    /// Euclidean norm of the x-part of a point.
    pub fn x_norm(&self, z: &[f64]) -> f64 {
        z[..self.m].iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Free-function form of [`GrushinSpace::homogeneous_dimension`].
pub fn homogeneous_dimension(space: &GrushinSpace) -> f64 {
    space.homogeneous_dimension()
}

/// Free-function form of [`GrushinSpace::dilate`].
pub fn dilate(space: &GrushinSpace, lambda: f64, z: &[f64]) -> Result<Vec<f64>> {
    space.dilate(lambda, z)
}

/// Axis-aligned box. The first `m` axes are x-axes, the remaining `k` are y-axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    bounds: Vec<(f64, f64)>,
}

impl BoxDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("domain needs at least one axis"));
        }
        for (i, &(a, b)) in bounds.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::invalid(format!("axis {i}: need a < b, got [{a}, {b}]")));
            }
        }
        Ok(Self { bounds })
    }

    /// Unit cube `[0,1]^n`.
    pub fn unit(n: usize) -> Self {
        Self {
            bounds: vec![(0.0, 1.0); n],
        }
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }

    /// True iff some x-axis interval contains 0 in its interior.
    pub fn straddles_x_zero(&self, space: &GrushinSpace) -> bool {
        self.bounds
            .iter()
            .take(space.m())
            .any(|&(a, b)| a < 0.0 && 0.0 < b)
    }

    /// Warning text when the complement of `{x = 0}` in the box is disconnected.
    pub fn connectivity_warning(&self, space: &GrushinSpace) -> Option<String> {
        (space.m() == 1 && self.straddles_x_zero(space)).then(|| {
            "domain with m = 1 straddles x = 0: removing the degenerate hyperplane leaves two components".to_string()
        })
    }
}

/// Uniform tensor grid over a box. Only interior nodes carry unknowns;
/// they are ordered lexicographically with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    domain: BoxDomain,
    cells: Vec<usize>,
    spacing: Vec<f64>,
    /// interior nodes per axis (`cells - 1`)
    shape: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(domain: &BoxDomain, cells_per_axis: &[usize]) -> Result<Self> {
        check_len(domain.dim(), cells_per_axis.len())?;
        if let Some((i, c)) = cells_per_axis.iter().enumerate().find(|(_, &c)| c < 2) {
            return Err(Error::invalid(format!("axis {i}: need at least 2 cells, got {c}")));
        }
        let spacing = domain
            .bounds()
            .iter()
            .zip(cells_per_axis)
            .map(|(&(a, b), &c)| (b - a) / c as f64)
            .collect();
        let shape: Vec<usize> = cells_per_axis.iter().map(|c| c - 1).collect();
        let mut strides = vec![1; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        let len = shape.iter().product();
        Ok(Self {
            domain: domain.clone(),
            cells: cells_per_axis.to_vec(),
            spacing,
            shape,
            strides,
            len,
        })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Interior nodes per axis.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Number of interior nodes `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Quadrature weight of every node, `prod h_i`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Per-axis node indices `j_i` in `1..cells_i` of a flat interior index.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.shape)
            .map(|(&s, &n)| (flat / s) % n + 1)
            .collect()
    }

    /// Flat index of an interior multi-index, `None` on boundary or outside.
    pub fn flat_index(&self, multi: &[usize]) -> Option<usize> {
        let mut flat = 0;
        for ((&j, &n), &s) in multi.iter().zip(&self.shape).zip(&self.strides) {
            if j == 0 || j > n {
                return None;
            }
            flat += (j - 1) * s;
        }
        Some(flat)
    }

    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        self.domain.bounds()[axis].0 + j as f64 * self.spacing[axis]
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(axis, &j)| self.coordinate(axis, j))
            .collect()
    }

    /// Samples `g` on every interior node.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, g: F) -> Vec<f64> {
        (0..self.len).map(|i| g(&self.node(i))).collect()
    }

    /// Interior-node rectangle rule: `sum_j v_j * prod h_i`.
    pub fn integral(&self, values: &[f64]) -> Result<f64> {
        check_len(self.len, values.len())?;
        Ok(values.iter().sum::<f64>() * self.cell_volume())
    }
}

/// Free-function form of [`Grid::new`].
pub fn build_grid(domain: &BoxDomain, cells_per_axis: &[usize]) -> Result<Grid> {
    Grid::new(domain, cells_per_axis)
}

/// Free-function form of [`Grid::integral`].
pub fn integral(grid: &Grid, values: &[f64]) -> Result<f64> {
    grid.integral(values)
}
