//! Symmetric 5-point operator on the interior nodes of the polar grid and a
//! preconditioned conjugate gradient solver for it.
//!
//! Unknown `(i, j)`, `1 ≤ i < n_r`, `1 ≤ j < n_φ`, is stored at
//! `(i−1)·(n_φ−1) + (j−1)`, so one radial ring is one contiguous row.

use crate::par::{self, Execution};

/// Edge conductances of `∂_s(w u_s) + ∂_φ(w u_φ)` on a grid with `n_r + 1`
/// rings and `n_φ + 1` rays.
#[derive(Debug, Clone)]
pub struct FivePoint {
    pub n_r: usize,
    pub n_phi: usize,
    /// `cs[i·(n_φ+1) + j]`: edge between rings `i` and `i+1` on ray `j`.
    pub cs: Vec<f64>,
    /// `cp[i·n_φ + j]`: edge between rays `j` and `j+1` on ring `i`.
    pub cp: Vec<f64>,
}

impl FivePoint {
    pub fn width(&self) -> usize {
        self.n_phi - 1
    }

    pub fn rings(&self) -> usize {
        self.n_r - 1
    }

    pub fn len(&self) -> usize {
        self.width() * self.rings()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn cs(&self, i: usize, j: usize) -> f64 {
        self.cs[i * (self.n_phi + 1) + j]
    }

    #[inline]
    fn cp(&self, i: usize, j: usize) -> f64 {
        self.cp[i * self.n_phi + j]
    }

    #[inline]
    fn diag(&self, i: usize, j: usize) -> f64 {
        self.cs(i - 1, j) + self.cs(i, j) + self.cp(i, j - 1) + self.cp(i, j)
    }

    /// Right-hand side from the Dirichlet values of the full grid `u`
    /// (row-major, `(n_r+1) × (n_φ+1)`).
    pub fn rhs(&self, u: &[f64], exec: Execution) -> Vec<f64> {
        let (m, w) = (self.n_phi + 1, self.width());
        let mut b = vec![0.0; self.len()];
        par::for_each_row(exec, &mut b, w, |row, out| {
            let i = row + 1;
            for (jj, o) in out.iter_mut().enumerate() {
                let j = jj + 1;
                let mut acc = 0.0;
                if i == 1 {
                    acc += self.cs(0, j) * u[j];
                }
                if i + 1 == self.n_r {
                    acc += self.cs(i, j) * u[self.n_r * m + j];
                }
                if j == 1 {
                    acc += self.cp(i, 0) * u[i * m];
                }
                if j + 1 == self.n_phi {
                    acc += self.cp(i, j) * u[i * m + self.n_phi];
                }
                *o = acc;
            }
        });
        b
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64], exec: Execution) {
        let w = self.width();
        let rings = self.rings();
        par::for_each_row(exec, y, w, |row, out| {
            let i = row + 1;
            let xr = &x[row * w..(row + 1) * w];
            for (jj, o) in out.iter_mut().enumerate() {
                let j = jj + 1;
                let mut v = self.diag(i, j) * xr[jj];
                if row > 0 {
                    v -= self.cs(i - 1, j) * x[(row - 1) * w + jj];
                }
                if row + 1 < rings {
                    v -= self.cs(i, j) * x[(row + 1) * w + jj];
                }
                if jj > 0 {
                    v -= self.cp(i, j - 1) * xr[jj - 1];
                }
                if jj + 1 < w {
                    v -= self.cp(i, j) * xr[jj + 1];
                }
                *o = v;
            }
        });
    }
}

/// Block-Jacobi preconditioner whose blocks are the tridiagonal ring
/// couplings, factored once (Thomas algorithm).
#[derive(Debug, Clone)]
pub struct RingPreconditioner {
    width: usize,
    /// Per unknown: modified super-diagonal `c'` and reciprocal pivot.
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
    lower: Vec<f64>,
}

impl RingPreconditioner {
    pub fn new(op: &FivePoint, exec: Execution) -> Self {
        let w = op.width();
        let n = op.len();
        let mut factors = vec![(0.0, 0.0, 0.0); n];
        par::for_each_row(exec, &mut factors, w, |row, out| {
            let i = row + 1;
            let mut prev_upper = 0.0;
            for (jj, o) in out.iter_mut().enumerate() {
                let j = jj + 1;
                let lower = if jj > 0 { -op.cp(i, j - 1) } else { 0.0 };
                let upper = if jj + 1 < w { -op.cp(i, j) } else { 0.0 };
                let pivot = op.diag(i, j) - lower * prev_upper;
                let inv = 1.0 / pivot;
                prev_upper = upper * inv;
                *o = (prev_upper, inv, lower);
            }
        });
        RingPreconditioner {
            width: w,
            upper: factors.iter().map(|f| f.0).collect(),
            inv_pivot: factors.iter().map(|f| f.1).collect(),
            lower: factors.iter().map(|f| f.2).collect(),
        }
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64], exec: Execution) {
        let w = self.width;
        par::for_each_row(exec, z, w, |row, out| {
            let base = row * w;
            let mut prev = 0.0;
            for jj in 0..w {
                let k = base + jj;
                prev = (r[k] - self.lower[k] * prev) * self.inv_pivot[k];
                out[jj] = prev;
            }
            for jj in (0..w - 1).rev() {
                let k = base + jj;
                out[jj] -= self.upper[k] * out[jj + 1];
            }
        });
    }
}

fn dot(a: &[f64], b: &[f64], exec: Execution) -> f64 {
    par::sum_range(exec, a.len(), |i| a[i] * b[i])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Preconditioned CG for `A x = b` starting from the given `x`. Stops when
/// `‖b − Ax‖₂ ≤ rel_tol·‖b‖₂` or after `max_iter` steps.
pub fn pcg(op: &FivePoint, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize, exec: Execution) -> CgOutcome {
    let n = b.len();
    let pre = RingPreconditioner::new(op, exec);
    let bnorm = dot(b, b, exec).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut ax = vec![0.0; n];
    op.apply(x, &mut ax, exec);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z, exec);
    let mut d = z.clone();
    let mut rz = dot(&r, &z, exec);
    let mut q = ax;
    let mut rel = dot(&r, &r, exec).sqrt() / bnorm;
    let mut it = 0;
    while rel > rel_tol && it < max_iter {
        op.apply(&d, &mut q, exec);
        let alpha = rz / dot(&d, &q, exec);
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        rel = dot(&r, &r, exec).sqrt() / bnorm;
        it += 1;
        if rel <= rel_tol {
            break;
        }
        pre.apply(&r, &mut z, exec);
        let rz_new = dot(&r, &z, exec);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            d[i] = z[i] + beta * d[i];
        }
    }
    CgOutcome {
        iterations: it,
        relative_residual: rel,
        converged: rel <= rel_tol,
    }
}
