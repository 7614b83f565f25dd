//! Dense symmetric positive-definite solves for the normal equations.

use super::CalibrationError;

/// Relative pivot floor of the scaled Cholesky factorization.
const PIVOT_FLOOR: f64 = 1e-13;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Accumulates `x xᵀ` into the upper triangle only.
    pub fn rank_one_upper(&mut self, x: &[f64]) {
        for i in 0..self.n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &mut self.data[i * self.n..(i + 1) * self.n];
            for j in i..self.n {
                row[j] += xi * x[j];
            }
        }
    }

    pub fn symmetrize_from_upper(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = self.get(j, i);
                self.set(i, j, v);
            }
        }
    }

    /// `self · v` for a column block `v` (n × m, row-major).
    pub fn mul_block(&self, v: &[f64], m: usize) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..m {
                    out[i * m + c] += a * v[k * m + c];
                }
            }
        }
        out
    }
}

/// Solves `G X = B` for symmetric positive-definite `G` with `m` right-hand
/// sides (`B` is n × m row-major). Uses Jacobi scaling, a Cholesky
/// factorization and one step of iterative refinement.
pub fn solve_spd(g: &SquareMatrix, b: &[f64], m: usize) -> Result<Vec<f64>, CalibrationError> {
    let n = g.dim();
    assert_eq!(b.len(), n * m);

    let mut scale = vec![0.0; n];
    for i in 0..n {
        let d = g.get(i, i);
        if !(d > 0.0) || !d.is_finite() {
            return Err(CalibrationError::IllConditioned(format!(
                "feature {i} has zero variance"
            )));
        }
        scale[i] = 1.0 / d.sqrt();
    }

    // lower-triangular factor of the scaled matrix
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = g.get(j, j) * scale[j] * scale[j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > PIVOT_FLOOR) {
            return Err(CalibrationError::IllConditioned(format!(
                "normal matrix is rank deficient at column {j} (pivot {d:e})"
            )));
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = g.get(i, j) * scale[i] * scale[j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }

    let chol_solve = |rhs: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n * m];
        for c in 0..m {
            for i in 0..n {
                let mut s = rhs[i * m + c] * scale[i];
                for k in 0..i {
                    s -= l[i * n + k] * y[k * m + c];
                }
                y[i * m + c] = s / l[i * n + i];
            }
            for i in (0..n).rev() {
                let mut s = y[i * m + c];
                for k in i + 1..n {
                    s -= l[k * n + i] * y[k * m + c];
                }
                y[i * m + c] = s / l[i * n + i];
            }
            for i in 0..n {
                y[i * m + c] *= scale[i];
            }
        }
        y
    };

    let mut x = chol_solve(b);
    let gx = g.mul_block(&x, m);
    let r: Vec<f64> = b.iter().zip(&gx).map(|(bi, gi)| bi - gi).collect();
    let dx = chol_solve(&r);
    for (xi, di) in x.iter_mut().zip(dx) {
        *xi += di;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CalibrationError::IllConditioned(
            "solution is not finite".into(),
        ));
    }
    Ok(x)
}
