//! Dense LU and restarted GMRES for the complex collocation system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    Direct,
    #[default]
    Gmres,
}

impl SolverMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverMethod::Direct => "direct",
            SolverMethod::Gmres => "gmres",
        }
    }
}

impl std::fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" | "lu" => Ok(SolverMethod::Direct),
            "gmres" | "iterative" => Ok(SolverMethod::Gmres),
            other => Err(Error::InvalidArgument(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub method: SolverMethod,
    /// Target relative residual `‖Ax - b‖ / ‖b‖`.
    pub tolerance: f64,
    /// Cap on the total number of GMRES iterations (matrix-vector products).
    pub max_iterations: usize,
    /// Krylov dimension before a restart.
    pub restart: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { method: SolverMethod::Gmres, tolerance: 1e-6, max_iterations: 1000, restart: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: SolverMethod,
    pub iterations: usize,
    /// Relative residual after each GMRES iteration, starting with the
    /// initial guess; at a restart the estimate is replaced by the true
    /// residual. Empty for the direct solver.
    pub residual_history: Vec<f64>,
    pub relative_residual: f64,
}

fn check_square(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "system is {}x{} with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    Ok(())
}

fn relative_residual(a: &DMatrix<Complex64>, x: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let bn = b.norm();
    if bn == 0.0 {
        return (a * x).norm();
    }
    (a * x - b).norm() / bn
}

pub fn solve(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    settings: &SolverSettings,
) -> Result<(DVector<Complex64>, SolveReport)> {
    check_square(a, b)?;
    match settings.method {
        SolverMethod::Direct => {
            let x = solve_direct(a, b)?;
            let rel = relative_residual(a, &x, b);
            Ok((
                x,
                SolveReport {
                    method: SolverMethod::Direct,
                    iterations: 0,
                    residual_history: Vec::new(),
                    relative_residual: rel,
                },
            ))
        }
        SolverMethod::Gmres => {
            let (x, history, iterations) = gmres(|v| a * v, b, settings)?;
            let rel = relative_residual(a, &x, b);
            Ok((
                x,
                SolveReport {
                    method: SolverMethod::Gmres,
                    iterations,
                    residual_history: history,
                    relative_residual: rel,
                },
            ))
        }
    }
}

/// Partial-pivoting LU. Works on a copy, so peak memory is twice the matrix.
pub fn solve_direct(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    check_square(a, b)?;
    let lu = a.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !(min > 1e-14 * max) {
        return Err(Error::Singular);
    }
    let x = lu.solve(b).ok_or(Error::Singular)?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x)
}

/// Complex Givens rotation `(c, s)` with real `c` zeroing `h2` against `h1`.
fn givens(h1: Complex64, h2: Complex64) -> (f64, Complex64) {
    let a1 = h1.norm();
    let rho = a1.hypot(h2.norm());
    if rho == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a1 == 0.0 {
        return (0.0, h2.conj() / rho);
    }
    (a1 / rho, (h1 / a1) * h2.conj() / rho)
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations,
/// starting from `x = 0`. Returns the solution, the residual history and
/// the number of iterations.
pub fn gmres<F>(
    apply: F,
    b: &DVector<Complex64>,
    settings: &SolverSettings,
) -> Result<(DVector<Complex64>, Vec<f64>, usize)>
where
    F: Fn(&DVector<Complex64>) -> DVector<Complex64>,
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = DVector::from_element(n, zero);
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok((x, vec![0.0], 0));
    }
    let tol = settings.tolerance;
    let m = settings.restart.max(1).min(n.max(1));
    let mut history = Vec::new();
    let mut total = 0usize;
    let mut first = true;

    loop {
        let r = if first { b.clone() } else { b - apply(&x) };
        let beta = r.norm();
        let rel = beta / bnorm;
        if first {
            history.push(rel);
        } else if let Some(last) = history.last_mut() {
            *last = rel;
        }
        first = false;
        if rel <= tol {
            return Ok((x, history, total));
        }
        if total >= settings.max_iterations {
            return Err(Error::NoConvergence { iterations: total, residual: rel });
        }

        let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r / Complex64::new(beta, 0.0));
        let mut h: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut steps = 0;

        for j in 0..m {
            let mut w = apply(&basis[j]);
            total += 1;
            let mut col = vec![zero; j + 2];
            for (i, vi) in basis.iter().enumerate() {
                let hij = vi.dotc(&w);
                w.axpy(-hij, vi, Complex64::new(1.0, 0.0));
                col[i] = hij;
            }
            let hnext = w.norm();
            col[j + 1] = Complex64::new(hnext, 0.0);
            for (i, &(c, s)) in cs.iter().enumerate() {
                let t = col[i] * c + s * col[i + 1];
                col[i + 1] = -s.conj() * col[i] + col[i + 1] * c;
                col[i] = t;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = col[j] * c + s * col[j + 1];
            col[j + 1] = zero;
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            cs.push((c, s));
            h.push(col);
            steps = j + 1;
            let est = g[j + 1].norm() / bnorm;
            history.push(est);
            if est <= tol || hnext <= 1e-14 * beta || total >= settings.max_iterations {
                break;
            }
            basis.push(w / Complex64::new(hnext, 0.0));
        }

        // back substitution on the rotated Hessenberg matrix
        let mut y = vec![zero; steps];
        for i in (0..steps).rev() {
            let mut acc = g[i];
            for (k, yk) in y.iter().enumerate().take(steps).skip(i + 1) {
                acc -= h[k][i] * yk;
            }
            if h[i][i].norm() == 0.0 {
                return Err(Error::Singular);
            }
            y[i] = acc / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x.axpy(*yi, &basis[i], Complex64::new(1.0, 0.0));
        }
    }
}
