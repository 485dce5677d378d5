//! Minimal dense linear algebra at desk scale: LU with partial pivoting for
//! determinants and solves, and a Jacobi eigensolver for the symmetric
//! normal equations in least-squares fitting.

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    n: usize,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { data: vec![0.0; n * n], n }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "not square");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// LU factorization with partial pivoting. Returns None when a pivot
    /// column is exactly zero (singular to working precision).
    pub fn lu(&self) -> Option<Lu> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut pivot = k;
            let mut best = a[k * n + k].abs();
            for r in (k + 1)..n {
                let v = a[r * n + k].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            if pivot != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot * n + c);
                }
                perm.swap(k, pivot);
                sign = -sign;
            }
            let pv = a[k * n + k];
            for r in (k + 1)..n {
                let factor = a[r * n + k] / pv;
                a[r * n + k] = factor;
                for c in (k + 1)..n {
                    a[r * n + c] -= factor * a[k * n + c];
                }
            }
        }
        Some(Lu { lu: a, perm, sign, n })
    }

    /// Determinant via LU; exactly singular matrices give 0.
    pub fn det(&self) -> f64 {
        match self.lu() {
            Some(lu) => lu.det(),
            None => 0.0,
        }
    }
}

/// Packed LU factors with the row permutation applied during pivoting.
pub struct Lu {
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
    n: usize,
}

impl Lu {
    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for k in 0..self.n {
            d *= self.lu[k * self.n + k];
        }
        d
    }

    /// Ratio of largest to smallest |U diagonal|; a cheap condition proxy
    /// sufficient for the near-singularity fallbacks.
    pub fn condition_estimate(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for k in 0..self.n {
            let v = self.lu[k * self.n + k].abs();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] = y[i] - self.lu[i * n + j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                y[i] = y[i] - self.lu[i * n + j] * y[j];
            }
            y[i] /= self.lu[i * n + i];
        }
        y
    }

    /// Columns of the inverse via n solves against unit vectors.
    pub fn inverse(&self) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::zeros(n);
        let mut e = vec![0.0; n];
        for col in 0..n {
            e[col] = 1.0;
            let x = self.solve(&e);
            e[col] = 0.0;
            for row in 0..n {
                inv.set(row, col, x[row]);
            }
        }
        inv
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns
/// (eigenvalues, eigenvectors as columns); a = V diag(w) V^T.
pub fn jacobi_eigh(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.n();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + frobenius(&m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let w = (0..n).map(|i| m.get(i, i)).collect();
    (w, v)
}

fn frobenius(m: &Matrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.n() {
        for j in 0..m.n() {
            acc += m.get(i, j) * m.get(i, j);
        }
    }
    acc.sqrt()
}

/// Minimum-norm least-squares solution of the normal equations
/// (A^T A) x = A^T b through the eigendecomposition, dropping eigenvalue
/// directions below `rank_tol` times the largest. Returns the solution and
/// the condition number of the retained spectrum.
pub struct LeastSquares {
    pub solution: Vec<f64>,
    pub condition: f64,
    pub rank: usize,
    pub rank_deficient: bool,
}

pub fn solve_normal_equations(gram: &Matrix, rhs: &[f64], rank_tol: f64) -> LeastSquares {
    let n = gram.n();
    assert_eq!(rhs.len(), n);
    let (w, v) = jacobi_eigh(gram);
    let wmax = w.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let cutoff = rank_tol * wmax;
    let mut solution = vec![0.0; n];
    let mut wmin_kept = f64::INFINITY;
    let mut rank = 0;
    for k in 0..n {
        if w[k].abs() <= cutoff || w[k] == 0.0 {
            continue;
        }
        rank += 1;
        wmin_kept = wmin_kept.min(w[k].abs());
        // Project b onto eigenvector k and scale by 1/w_k.
        let mut proj = 0.0;
        for i in 0..n {
            proj += v.get(i, k) * rhs[i];
        }
        let scale = proj / w[k];
        for i in 0..n {
            solution[i] += scale * v.get(i, k);
        }
    }
    let condition = if rank == 0 { f64::INFINITY } else { wmax / wmin_kept };
    LeastSquares { solution, condition, rank, rank_deficient: rank < n }
}
