//! Dense reference computations that share no code with the library.

#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

pub fn correlation(points: &[Vec<f64>], beta: &[f64], p: f64) -> Mat {
    let n = points.len();
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            r[i][j] = cross(&points[i], &points[j], beta, p);
        }
    }
    r
}

pub fn cross(a: &[f64], b: &[f64], beta: &[f64], p: f64) -> f64 {
    let mut prod = 1.0;
    for k in 0..a.len() {
        prod *= (-(10f64.powf(beta[k])) * (a[k] - b[k]).abs().powf(p)).exp();
    }
    prod
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `log |det a|` by Gaussian elimination with partial pivoting.
pub fn log_abs_det(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut acc = 0.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        acc += m[col][col].abs().ln();
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    acc
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn mat_vec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nugget from the extreme eigenvalues, with condition numbers beyond 1e14
/// treated as 1e14.
pub fn nugget(r: &Mat, a: f64) -> f64 {
    let ev = jacobi_eigenvalues(r);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let kappa = if lo <= 1e-14 * hi { 1e14 } else { hi / lo };
    let ea = a.exp();
    (hi * (kappa - ea) / (kappa * (ea - 1.0))).max(0.0)
}

pub fn condition(a: &Mat) -> f64 {
    let ev = jacobi_eigenvalues(a);
    ev[ev.len() - 1] / ev[0]
}

/// Everything the model computes, recomputed from explicit inverses.
pub struct Oracle {
    pub points: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: f64,
    pub delta: f64,
    pub r_delta: Mat,
    pub r_inv: Mat,
    pub mu: f64,
    pub sigma2: f64,
    pub deviance: f64,
}

impl Oracle {
    pub fn new(points: &[Vec<f64>], y: &[f64], beta: &[f64], p: f64) -> Self {
        let n = y.len();
        let r = correlation(points, beta, p);
        let delta = nugget(&r, 25.0);
        let mut r_delta = r.clone();
        for i in 0..n {
            r_delta[i][i] += delta;
        }
        let r_inv = inverse(&r_delta);
        let ones = vec![1.0; n];
        let ri1 = mat_vec(&r_inv, &ones);
        let mu = dot(&ri1, y) / dot(&ri1, &ones);
        let resid: Vec<f64> = y.iter().map(|v| v - mu).collect();
        let quad = dot(&resid, &mat_vec(&r_inv, &resid));
        let sigma2 = quad / n as f64;
        let deviance = log_abs_det(&r_delta) + n as f64 * quad.ln();
        Self {
            points: points.to_vec(),
            y: y.to_vec(),
            beta: beta.to_vec(),
            p,
            delta,
            r_delta,
            r_inv,
            mu,
            sigma2,
            deviance,
        }
    }

    /// `(mu + r'R^-1(Y - 1 mu), C'Y, mse)`.
    pub fn predict(&self, x: &[f64]) -> (f64, f64, f64) {
        let n = self.y.len();
        let r: Vec<f64> = self.points.iter().map(|pt| cross(pt, x, &self.beta, self.p)).collect();
        let ones = vec![1.0; n];
        let resid: Vec<f64> = self.y.iter().map(|v| v - self.mu).collect();
        let blup = self.mu + dot(&r, &mat_vec(&self.r_inv, &resid));
        let ri1 = mat_vec(&self.r_inv, &ones);
        let a = (1.0 - dot(&r, &ri1)) / dot(&ones, &ri1);
        let rhs: Vec<f64> = r.iter().map(|v| v + a).collect();
        let c = mat_vec(&self.r_inv, &rhs);
        let linear = dot(&c, &self.y);
        let rc = mat_vec(&self.r_delta, &c);
        let mse = self.sigma2 * (1.0 - 2.0 * dot(&c, &r) + dot(&c, &rc));
        (blup, linear, mse.max(0.0))
    }
}

/// Five-point central difference with absolute step `h`.
pub fn five_point_gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let at = |s: f64| {
                let mut y = x.to_vec();
                y[k] += s * h;
                y
            };
            (-f(&at(2.0)) + 8.0 * f(&at(1.0)) - 8.0 * f(&at(-1.0)) + f(&at(-2.0))) / (12.0 * h)
        })
        .collect()
}

/// Dense grid minimum of a 1-D function: `(argmin, min)`.
pub fn grid_min(f: &mut impl FnMut(f64) -> f64, lo: f64, hi: f64, nodes: usize) -> (f64, f64) {
    (0..nodes)
        .map(|i| lo + (hi - lo) * i as f64 / (nodes - 1) as f64)
        .map(|b| (b, f(b)))
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

pub fn relative_error(got: f64, want: f64, floor: f64) -> f64 {
    (got - want).abs() / want.abs().max(floor)
}
