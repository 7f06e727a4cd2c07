//! Conjugate gradients and inverse power iteration for the first Dirichlet
//! eigenpair.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::operator::SparseMatrix;

pub const DEFAULT_CG_TOL: f64 = 1e-10;
pub const DEFAULT_EIG_TOL: f64 = 1e-8;

/// A symmetric linear map that can be applied without materializing it.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        SparseMatrix::dim(self)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        SparseMatrix::apply_into(self, x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        SparseMatrix::diagonal(self)
    }
}

/// `shift * I + scale * A`.
#[derive(Clone, Copy, Debug)]
pub struct Affine<'a> {
    pub base: &'a SparseMatrix,
    pub shift: f64,
    pub scale: f64,
}

impl<'a> Affine<'a> {
    /// `-A`, the positive definite counterpart of the assembled operator.
    pub fn negated(base: &'a SparseMatrix) -> Self {
        Self {
            base,
            shift: 0.0,
            scale: -1.0,
        }
    }
}

impl LinearOperator for Affine<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.base.apply_into(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = self.shift * xi + self.scale * *yi;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.base
            .diagonal()
            .into_iter()
            .map(|d| self.shift + self.scale * d)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||b - A x|| / ||b||`
    pub final_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for symmetric positive definite `A` starting from zero.
pub fn cg_solve<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    cg_solve_from(a, b, vec![0.0; b.len()], tol, max_iter)
}

/// Jacobi-preconditioned conjugate gradients from an initial guess.
///
/// Converged when the true relative residual `||b - A x|| / ||b||` is at most `tol`.
pub fn cg_solve_from<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    check_len(n, b.len())?;
    check_len(n, x0.len())?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("cg tolerance must be > 0, got {tol}")));
    }
    let bnorm = norm(b);
    if bnorm.is_nan() {
        return Err(Error::NotANumber("cg right-hand side"));
    }
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                final_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = x0;
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    // The outer loop restarts from the true residual whenever the recurrence
    // claims convergence but rounding has let the two drift apart.
    loop {
        a.apply_into(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let mut rel = norm(&r) / bnorm;
        if rel.is_nan() {
            return Err(Error::NotANumber("cg residual"));
        }
        if rel <= tol {
            return Ok((
                x,
                SolveReport {
                    iterations,
                    final_residual: rel,
                },
            ));
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual: rel,
                best: x,
            });
        }
        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            a.apply_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap.is_nan() {
                return Err(Error::NotANumber("cg iteration"));
            }
            if pap <= 0.0 {
                return Err(Error::invalid("operator is not positive definite"));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            rel = norm(&r) / bnorm;
            if rel.is_nan() {
                return Err(Error::NotANumber("cg iteration"));
            }
            if rel <= tol {
                break;
            }
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
}

/// Smallest eigenpair of `-A`, with `phi1` normalized in the discrete L² norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda1: f64,
    pub phi1: Vec<f64>,
    /// `||(-A) phi - lambda phi|| / (lambda ||phi||)`
    pub residual: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
}

/// Inverse power iteration on `B = -A`, inner solves by CG.
///
/// `cell_volume` is the quadrature weight used to normalize `phi1` so that
/// `l2_norm_sq(phi1) == 1`. Converged once the eigen-residual drops below `tol`.
pub fn smallest_eigenpair(
    a: &SparseMatrix,
    cell_volume: f64,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult> {
    smallest_eigenpair_with(a, cell_volume, tol, max_iter, DEFAULT_CG_TOL)
}

pub fn smallest_eigenpair_with(
    a: &SparseMatrix,
    cell_volume: f64,
    tol: f64,
    max_iter: usize,
    cg_tol: f64,
) -> Result<EigenResult> {
    if !(tol > 0.0) || !(cell_volume > 0.0) {
        return Err(Error::invalid("eigen tolerance and cell volume must be positive"));
    }
    let n = a.dim();
    let b = Affine::negated(a);
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut bx = vec![0.0; n];
    let mut guess = x.clone();
    let mut inner_iterations = 0;
    let mut residual = f64::INFINITY;
    let inner_max = 10 * n.max(10);

    for it in 0..=max_iter {
        b.apply_into(&x, &mut bx);
        let lambda = dot(&x, &bx);
        residual = bx
            .iter()
            .zip(&x)
            .map(|(p, q)| (p - lambda * q).powi(2))
            .sum::<f64>()
            .sqrt()
            / lambda.abs();
        if residual.is_nan() {
            return Err(Error::NotANumber("inverse power iteration"));
        }
        if residual <= tol {
            return Ok(finish(x, lambda, residual, it, inner_iterations, cell_volume));
        }
        if it == max_iter {
            break;
        }
        for (g, xi) in guess.iter_mut().zip(&x) {
            *g = xi / lambda;
        }
        let (y, report) = cg_solve_from(&b, &x, guess.clone(), cg_tol, inner_max)?;
        inner_iterations += report.iterations;
        let ny = norm(&y);
        x = y.into_iter().map(|v| v / ny).collect();
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
        best: x,
    })
}

fn finish(
    mut x: Vec<f64>,
    lambda: f64,
    residual: f64,
    iterations: usize,
    inner_iterations: usize,
    cell_volume: f64,
) -> EigenResult {
    let (imax, _) = x
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    let sign = if x[imax] < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / (dot(&x, &x) * cell_volume).sqrt();
    for v in x.iter_mut() {
        *v *= scale;
    }
    EigenResult {
        lambda1: lambda,
        phi1: x,
        residual,
        iterations,
        inner_iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoxDomain, Grid, GrushinSpace};
    use crate::operator::{assemble_grushin, grushin_energy, l2_norm_sq};

    fn diag(values: &[f64]) -> SparseMatrix {
        let t: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        SparseMatrix::from_triplets(values.len(), &t).unwrap()
    }

    #[test]
    fn identity_solves_in_one_step() {
        let b = vec![1.0, -2.0, 3.5];
        let (x, rep) = cg_solve(&SparseMatrix::identity(3), &b, 1e-12, 10).unwrap();
        assert_eq!(x, b);
        assert!(rep.iterations <= 1);
    }

    #[test]
    fn diagonal_solve() {
        let b = vec![1.0, 4.0, -6.0];
        let (x, _) = cg_solve(&diag(&[2.0, 2.0, 2.0]), &b, 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.5, 2.0, -3.0]);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (x, rep) = cg_solve(&diag(&[2.0, 3.0]), &[0.0, 0.0], 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn manufactured_solution_recovered() {
        let space = GrushinSpace::new(1, 1, 1.0).unwrap();
        let d = BoxDomain::new(vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let grid = Grid::new(&d, &[24, 24]).unwrap();
        let a = assemble_grushin(&grid, &space).unwrap();
        let op = Affine {
            base: &a,
            shift: 1.0,
            scale: -1.0,
        };
        let xs: Vec<f64> = (0..grid.len()).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
        let mut b = vec![0.0; grid.len()];
        op.apply_into(&xs, &mut b);
        let tol = 1e-10;
        let (x, rep) = cg_solve(&op, &b, tol, 10_000).unwrap();
        assert!(rep.final_residual <= tol);
        let err = x.iter().zip(&xs).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let scale = xs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        // cond(I - A) ~ 1e4 here, so allow the usual residual-to-error amplification
        assert!(err <= 10.0 * tol * scale * 1e4, "err {err}");
    }

    #[test]
    fn non_convergence_carries_best_iterate() {
        let space = GrushinSpace::new(1, 1, 0.0).unwrap();
        let grid = Grid::new(&BoxDomain::unit(2), &[16, 16]).unwrap();
        let a = assemble_grushin(&grid, &space).unwrap();
        let b = vec![1.0; grid.len()];
        match cg_solve(&Affine::negated(&a), &b, 1e-14, 2) {
            Err(Error::NonConvergence { iterations, best, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(best.len(), grid.len());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn nan_rhs_detected() {
        let r = cg_solve(&diag(&[1.0, 1.0]), &[f64::NAN, 1.0], 1e-10, 10);
        assert!(matches!(r, Err(Error::NotANumber(_))));
    }

    #[test]
    fn discrete_laplacian_eigenvalue() {
        let space = GrushinSpace::new(1, 1, 0.0).unwrap();
        for n in [8usize, 16, 32] {
            let grid = Grid::new(&BoxDomain::unit(2), &[n, n]).unwrap();
            let a = assemble_grushin(&grid, &space).unwrap();
            let eig = smallest_eigenpair(&a, grid.cell_volume(), DEFAULT_EIG_TOL, 10 * grid.len()).unwrap();
            let h = 1.0 / n as f64;
            let s = (std::f64::consts::PI * h / 2.0).sin();
            let exact = 8.0 / (h * h) * s * s;
            assert!(((eig.lambda1 - exact) / exact).abs() < 1e-8, "n={n}");
            assert!((l2_norm_sq(&grid, &eig.phi1).unwrap() - 1.0).abs() < 1e-12);
            let e = grushin_energy(&grid, &space, &eig.phi1).unwrap();
            assert!(((e - eig.lambda1) / eig.lambda1).abs() < 1e-10);
            // sign normalization
            let big = eig.phi1.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn rectangle_eigenvalue_converges() {
        let space = GrushinSpace::new(1, 1, 0.0).unwrap();
        let d = BoxDomain::new(vec![(0.0, 1.0), (0.0, 2.0)]).unwrap();
        let grid = Grid::new(&d, &[48, 96]).unwrap();
        let a = assemble_grushin(&grid, &space).unwrap();
        let eig = smallest_eigenpair(&a, grid.cell_volume(), DEFAULT_EIG_TOL, 10 * grid.len()).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        let exact = pi2 * 1.25;
        assert!(((eig.lambda1 - exact) / exact).abs() < 0.01);
    }

    #[test]
    fn eigenvalue_decreases_on_larger_box() {
        let space = GrushinSpace::new(1, 1, 1.0).unwrap();
        let small = BoxDomain::new(vec![(-0.5, 0.5), (0.0, 1.0)]).unwrap();
        let large = BoxDomain::new(vec![(-1.0, 1.0), (0.0, 1.0)]).unwrap();
        let l = |d: &BoxDomain, cells: [usize; 2]| {
            let g = Grid::new(d, &cells).unwrap();
            let a = assemble_grushin(&g, &space).unwrap();
            smallest_eigenpair(&a, g.cell_volume(), DEFAULT_EIG_TOL, 10 * g.len()).unwrap().lambda1
        };
        // same spacing h = 1/16 on both boxes
        assert!(l(&large, [32, 16]) <= l(&small, [16, 16]));
    }
}
