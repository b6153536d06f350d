//! Symmetric eigensolvers for operators self-adjoint in a weighted inner product
//! `⟨f, h⟩_w = Σ_p w_p f_p h_p`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{LabError, Result};

pub const DEFAULT_DENSE_CAP: usize = 4096;
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_TOL_EIG: f64 = 1e-9;

/// A linear map on grid fields. Closures `Fn(&[f64]) -> Vec<f64>` qualify.
pub trait LinearOperator {
    fn apply(&self, f: &[f64]) -> Vec<f64>;

    /// Two applications; implementors may share work between them.
    fn apply_pair(&self, f: &[f64], h: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.apply(f), self.apply(h))
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> LinearOperator for F {
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        self(f)
    }
}

/// Eigenpairs in ascending order with their weighted residual norms.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Operator applications spent.
    pub applications: usize,
}

fn inner(weights: &[f64], f: &[f64], h: &[f64]) -> f64 {
    f.iter()
        .zip(h)
        .zip(weights)
        .map(|((a, b), w)| a * b * w)
        .sum()
}

fn residual_norm(weights: &[f64], image: &[f64], lambda: f64, u: &[f64]) -> f64 {
    let r: Vec<f64> = image.iter().zip(u).map(|(a, v)| a - lambda * v).collect();
    inner(weights, &r, &r).sqrt()
}

/// Images of all `fields`, paired up.
fn apply_all(op: &impl LinearOperator, fields: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for chunk in fields.chunks(2) {
        match chunk {
            [f, h] => {
                let (a, b) = op.apply_pair(f, h);
                out.push(a);
                out.push(b);
            }
            [f] => out.push(op.apply(f)),
            _ => unreachable!(),
        }
    }
    out
}

/// Weighted residual norms ‖A u_i − λ_i u_i‖_w.
fn residuals(
    op: &impl LinearOperator,
    weights: &[f64],
    values: &[f64],
    vectors: &[Vec<f64>],
) -> Vec<f64> {
    let refs: Vec<&[f64]> = vectors.iter().map(|v| v.as_slice()).collect();
    apply_all(op, &refs)
        .iter()
        .zip(values)
        .zip(vectors)
        .map(|((image, &lambda), u)| residual_norm(weights, image, lambda, u))
        .collect()
}

/// Symmetrized weighted matrix `K_pq = w_p (A e_q)_p` and its asymmetry defect
/// ‖K − Kᵀ‖_F / ‖K‖_F before symmetrization.
#[derive(Debug, Clone)]
pub struct DenseAssembly {
    pub matrix: DMatrix<f64>,
    pub asymmetry_defect: f64,
}

pub fn assemble_dense(
    op: &impl LinearOperator,
    weights: &[f64],
    cap: usize,
) -> Result<DenseAssembly> {
    let len = weights.len();
    if len > cap {
        return Err(LabError::DenseCapExceeded { points: len, cap });
    }
    let mut k = DMatrix::zeros(len, len);
    let unit = |q: usize| {
        let mut e = vec![0.0; len];
        e[q] = 1.0;
        e
    };
    let mut q = 0;
    while q < len {
        let cols = if q + 1 < len {
            let (a, b) = op.apply_pair(&unit(q), &unit(q + 1));
            vec![a, b]
        } else {
            vec![op.apply(&unit(q))]
        };
        for col in cols {
            for p in 0..len {
                k[(p, q)] = weights[p] * col[p];
            }
            q += 1;
        }
    }
    let norm = k.norm();
    let skew = (&k - k.transpose()).norm();
    let asymmetry_defect = if norm > 0.0 { skew / norm } else { 0.0 };
    let matrix = (&k + k.transpose()) * 0.5;
    Ok(DenseAssembly {
        matrix,
        asymmetry_defect,
    })
}

/// The `count` smallest eigenpairs of an assembled operator; residuals are
/// measured against `op` itself, not the symmetrized matrix.
pub fn dense_smallest(
    assembly: &DenseAssembly,
    op: &impl LinearOperator,
    weights: &[f64],
    count: usize,
) -> Result<EigenPairs> {
    let len = weights.len();
    let scale: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    // M = W^{-1/2} K W^{-1/2} is symmetric with the same spectrum
    let m = DMatrix::from_fn(len, len, |p, q| {
        scale[p] * assembly.matrix[(p, q)] * scale[q]
    });
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(LabError::SolverFailure {
            iterations: 0,
            worst_residual: f64::NAN,
            residuals: vec![],
        });
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(count.min(len));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            eig.eigenvectors
                .column(i)
                .iter()
                .zip(&scale)
                .map(|(x, s)| x * s)
                .collect()
        })
        .collect();
    let residuals = residuals(op, weights, &values, &vectors);
    Ok(EigenPairs {
        applications: len + values.len(),
        values,
        vectors,
        residuals,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Converged when ‖Au − θu‖_w ≤ tol·max(1, |θ|).
    pub tol: f64,
    /// Block steps; defaults to 50·count.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: DEFAULT_TOL_EIG,
            max_iter: None,
            seed: DEFAULT_SEED,
        }
    }
}

/// Orthonormal columns stored contiguously, column-major.
struct Basis {
    rows: usize,
    data: Vec<f64>,
    /// First column of every block.
    starts: Vec<usize>,
}

impl Basis {
    fn cols(&self) -> usize {
        self.data.len() / self.rows
    }

    fn push(&mut self, block: &DMatrix<f64>) {
        self.starts.push(self.cols());
        self.data.extend_from_slice(block.as_slice());
    }

    fn columns(&self, from: usize, to: usize) -> &[f64] {
        &self.data[from * self.rows..to * self.rows]
    }

    /// Removes the components of `x` along columns `from..`, adding the
    /// coefficients into `total` (rows `from..` of a cols×w matrix).
    fn project_out(&self, from: usize, x: &mut DMatrix<f64>, total: &mut DMatrix<f64>) {
        let to = self.cols();
        let v = self.columns(from, to);
        let coef = gemm_tn(v, self.rows, to - from, x);
        gemm_nn_sub(v, self.rows, to - from, &coef, x);
        let mut rows = total.rows_mut(from, to - from);
        rows += &coef;
    }

    /// V[:, ..m] · S.
    fn combine(&self, m: usize, s: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, s.ncols());
        gemm_raw(
            (self.rows, m, s.ncols()),
            (self.columns(0, m), 1, self.rows),
            (s.as_slice(), 1, m),
            1.0,
            out.as_mut_slice(),
        );
        out
    }
}

/// `c = op(a)·b + beta·c` on column-major buffers via `matrixmultiply`;
/// `a` and `b` carry their (row, column) strides.
fn gemm_raw(
    (m, k, n): (usize, usize, usize),
    (a, rsa, csa): (&[f64], usize, usize),
    (b, rsb, csb): (&[f64], usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    gemm_alpha((m, k, n), 1.0, (a, rsa, csa), (b, rsb, csb), beta, c)
}

fn gemm_alpha(
    (m, k, n): (usize, usize, usize),
    alpha: f64,
    (a, rsa, csa): (&[f64], usize, usize),
    (b, rsb, csb): (&[f64], usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(a.len() > (m - 1) * rsa + (k.max(1) - 1) * csa || k == 0);
    assert!(b.len() > (k.max(1) - 1) * rsb + (n - 1) * csb || k == 0);
    assert_eq!(c.len(), m * n);
    // SAFETY: the asserts above keep every strided access of `a`, `b` in
    // bounds, and `c` is a distinct dense m×n column-major buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}

/// Vᵀ X for a rows×cols column-major V.
fn gemm_tn(v: &[f64], rows: usize, cols: usize, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(cols, x.ncols());
    gemm_raw(
        (cols, rows, x.ncols()),
        (v, rows, 1),
        (x.as_slice(), 1, rows),
        0.0,
        out.as_mut_slice(),
    );
    out
}

/// X ← X − V C.
fn gemm_nn_sub(v: &[f64], rows: usize, cols: usize, coef: &DMatrix<f64>, x: &mut DMatrix<f64>) {
    let n = x.ncols();
    gemm_alpha(
        (rows, cols, n),
        -1.0,
        (v, 1, rows),
        (coef.as_slice(), 1, cols),
        1.0,
        x.as_mut_slice(),
    );
}

/// Orthonormalizes the columns of `block` against each other (two passes),
/// dropping columns whose norm falls below `1e-10` of `reference[j]`.
fn orthonormalize_block(mut block: DMatrix<f64>, reference: &[f64]) -> DMatrix<f64> {
    let mut kept: Vec<DVector<f64>> = Vec::with_capacity(block.ncols());
    for (j, mut col) in block.column_iter_mut().enumerate() {
        for _ in 0..2 {
            for q in &kept {
                let c = q.dot(&col);
                col.axpy(-c, q, 1.0);
            }
        }
        let norm = col.norm();
        if norm > 1e-10 * reference[j] && norm.is_finite() {
            kept.push(col.into_owned() / norm);
        }
    }
    if kept.is_empty() {
        return DMatrix::zeros(block.nrows(), 0);
    }
    DMatrix::from_columns(&kept)
}

/// Operator in √w-scaled coordinates, where the weighted product is the plain dot.
struct Scaled<'a, O> {
    op: &'a O,
    sqrt_w: Vec<f64>,
}

impl<O: LinearOperator> Scaled<'_, O> {
    fn unscale(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.sqrt_w).map(|(v, s)| v / s).collect()
    }

    fn apply_block(&self, block: &DMatrix<f64>) -> DMatrix<f64> {
        let fields: Vec<Vec<f64>> = block
            .column_iter()
            .map(|c| self.unscale(c.as_slice()))
            .collect();
        let refs: Vec<&[f64]> = fields.iter().map(|v| v.as_slice()).collect();
        let images = apply_all(self.op, &refs);
        DMatrix::from_fn(block.nrows(), block.ncols(), |p, j| {
            images[j][p] * self.sqrt_w[p]
        })
    }
}

/// The `count` smallest eigenpairs by block Lanczos with full
/// reorthogonalization. The block size equals `count` so that eigenvalues of
/// multiplicity up to `count` are captured. Convergence is judged on explicit
/// residuals, checked on a geometric schedule of block steps.
pub fn lanczos_smallest(
    op: &impl LinearOperator,
    weights: &[f64],
    count: usize,
    opts: LanczosOptions,
) -> Result<EigenPairs> {
    let len = weights.len();
    if count == 0 || count > len {
        return Err(LabError::InsufficientEigenvalues {
            bound: "lanczos".into(),
            need: count,
            have: len,
        });
    }
    let scaled = Scaled {
        op,
        sqrt_w: weights.iter().map(|w| w.sqrt()).collect(),
    };
    let max_iter = opts.max_iter.unwrap_or(50 * count);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = DMatrix::from_fn(len, count, |_, _| StandardNormal.sample(&mut rng));
    let reference: Vec<f64> = start.column_iter().map(|c| c.norm()).collect();
    let mut basis = Basis {
        rows: len,
        data: Vec::new(),
        starts: Vec::new(),
    };
    basis.push(&orthonormalize_block(start, &reference));
    // projected operator on every applied column
    let mut projected = DMatrix::<f64>::zeros(0, 0);
    let mut applications = 0;
    let mut next_check = 1;
    let mut last_residuals = Vec::new();

    for step in 1..=max_iter {
        let applied = projected.nrows();
        let m = basis.cols();
        let width = m - applied;
        let latest = DMatrix::from_column_slice(len, width, basis.columns(applied, m));
        let mut images = scaled.apply_block(&latest);
        applications += width;
        let reference: Vec<f64> = images.column_iter().map(|c| c.norm()).collect();

        // three-term part against the last two blocks, then full passes while
        // they still remove a large share of the norm
        let mut total = DMatrix::zeros(m, width);
        let local = basis.starts[basis.starts.len().saturating_sub(2)];
        basis.project_out(local, &mut images, &mut total);
        for _ in 0..3 {
            let before: Vec<f64> = images.column_iter().map(|c| c.norm()).collect();
            basis.project_out(0, &mut images, &mut total);
            let collapsed = images
                .column_iter()
                .zip(&before)
                .any(|(c, b)| c.norm() < 0.5 * b);
            if !collapsed {
                break;
            }
        }
        projected = projected.resize(m, m, 0.0);
        projected
            .view_mut((0, applied), (m, width))
            .copy_from(&total);
        projected
            .view_mut((applied, 0), (width, m))
            .copy_from(&total.transpose());
        let diag = projected
            .view((applied, applied), (width, width))
            .into_owned();
        projected
            .view_mut((applied, applied), (width, width))
            .copy_from(&((&diag + diag.transpose()) * 0.5));

        let mut fresh = orthonormalize_block(images, &reference);
        if fresh.ncols() > 0 {
            // in-block elimination can shrink a column far enough to expose
            // its rounding-level components along earlier blocks
            let mut discard = DMatrix::zeros(m, fresh.ncols());
            basis.project_out(0, &mut fresh, &mut discard);
            fresh = orthonormalize_block(fresh, &vec![1.0; discard.ncols()]);
        }
        let exhausted = fresh.ncols() == 0 || m >= len;
        if !exhausted {
            basis.push(&fresh);
        }

        if exhausted || step >= next_check || step == max_iter {
            let (values, coefs) = smallest_ritz(&projected, count);
            let ritz = basis.combine(m, &coefs);
            let vectors: Vec<Vec<f64>> = ritz
                .column_iter()
                .map(|x| scaled.unscale(x.as_slice()))
                .collect();
            let res = residuals(op, weights, &values, &vectors);
            applications += vectors.len();
            let converged = res
                .iter()
                .zip(&values)
                .all(|(r, v)| *r <= opts.tol * v.abs().max(1.0));
            if values.len() == count && converged {
                return Ok(EigenPairs {
                    values,
                    vectors,
                    residuals: res,
                    applications,
                });
            }
            if exhausted {
                return Err(failure(step, res));
            }
            last_residuals = res;
            next_check = (step + 1).max((step as f64 * 1.5).ceil() as usize);
        }
    }
    Err(failure(max_iter, last_residuals))
}

fn failure(iterations: usize, residuals: Vec<f64>) -> LabError {
    let worst_residual = residuals.iter().copied().fold(0.0, f64::max);
    LabError::SolverFailure {
        iterations,
        worst_residual,
        residuals,
    }
}

/// Smallest `count` eigenpairs of the projected matrix.
fn smallest_ritz(projected: &DMatrix<f64>, count: usize) -> (Vec<f64>, DMatrix<f64>) {
    let m = projected.nrows();
    let eig = SymmetricEigen::new(projected.clone());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(count);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let coefs = DMatrix::from_fn(m, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, coefs)
}
