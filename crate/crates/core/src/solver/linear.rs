use crate::exec::Execution;

/// Five-point operator on an `n × n` grid (or a tridiagonal column when
/// `n_perp == 1`). Off-diagonal entries multiply the west, east, south
/// (below) and north (above) neighbours; entries pointing outside the grid
/// are ignored.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub n_perp: usize,
    pub n_vert: usize,
    pub diag: Vec<f64>,
    pub west: Vec<f64>,
    pub east: Vec<f64>,
    pub south: Vec<f64>,
    pub north: Vec<f64>,
}

impl Stencil {
    pub fn new(n_perp: usize, n_vert: usize) -> Self {
        let len = n_perp * n_vert;
        Self {
            n_perp,
            n_vert,
            diag: vec![0.0; len],
            west: vec![0.0; len],
            east: vec![0.0; len],
            south: vec![0.0; len],
            north: vec![0.0; len],
        }
    }

    fn len(&self) -> usize {
        self.diag.len()
    }

    fn row(&self, k: usize, x: &[f64]) -> f64 {
        let (i, j) = (k % self.n_perp, k / self.n_perp);
        let mut s = self.diag[k] * x[k];
        if i > 0 {
            s += self.west[k] * x[k - 1];
        }
        if i + 1 < self.n_perp {
            s += self.east[k] * x[k + 1];
        }
        if j > 0 {
            s += self.south[k] * x[k - self.n_perp];
        }
        if j + 1 < self.n_vert {
            s += self.north[k] * x[k + self.n_perp];
        }
        s
    }

    fn apply(&self, x: &[f64], out: &mut [f64], exec: Execution) {
        exec.fill(out, |k| self.row(k, x));
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LinearFailure {
    Singular,
    NotConverged { residual: f64 },
}

/// Thomas algorithm for a single column (`n_perp == 1`).
pub(crate) fn thomas(a: &Stencil, rhs: &[f64]) -> Result<Vec<f64>, LinearFailure> {
    let n = a.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = a.diag[0];
    if beta == 0.0 {
        return Err(LinearFailure::Singular);
    }
    c[0] = a.north[0] / beta;
    d[0] = rhs[0] / beta;
    for k in 1..n {
        beta = a.diag[k] - a.south[k] * c[k - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(LinearFailure::Singular);
        }
        c[k] = if k + 1 < n { a.north[k] / beta } else { 0.0 };
        d[k] = (rhs[k] - a.south[k] * d[k - 1]) / beta;
    }
    for k in (0..n - 1).rev() {
        d[k] -= c[k] * d[k + 1];
    }
    Ok(d)
}

fn dot(exec: Execution, a: &[f64], b: &[f64]) -> f64 {
    exec.sum(a.len(), |k| a[k] * b[k])
}

fn norm_inf(exec: Execution, a: &[f64]) -> f64 {
    exec.max(a.len(), |k| a[k].abs())
}

/// Jacobi-preconditioned BiCGSTAB. Converges when
/// `max|r| ≤ rel_tol · max|rhs|`.
pub(crate) fn bicgstab(a: &Stencil, rhs: &[f64], rel_tol: f64, max_iter: usize, exec: Execution) -> Result<Vec<f64>, LinearFailure> {
    let n = a.len();
    if a.diag.iter().any(|d| *d == 0.0) {
        return Err(LinearFailure::Singular);
    }
    let inv: Vec<f64> = a.diag.iter().map(|d| 1.0 / d).collect();
    let target = rel_tol * norm_inf(exec, rhs);
    let mut x: Vec<f64> = (0..n).map(|k| rhs[k] * inv[k]).collect();
    let mut ax = vec![0.0; n];
    a.apply(&x, &mut ax, exec);
    let mut r = vec![0.0; n];
    exec.fill(&mut r, |k| rhs[k] - ax[k]);
    if norm_inf(exec, &r) <= target {
        return Ok(x);
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut res = f64::INFINITY;
    for _ in 0..max_iter {
        let rho_new = dot(exec, &r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        {
            let (rr, vv) = (&r, &v);
            let old = p.clone();
            exec.fill(&mut p, |k| rr[k] + beta * (old[k] - omega * vv[k]));
        }
        {
            let pp = &p;
            exec.fill(&mut y, |k| inv[k] * pp[k]);
        }
        a.apply(&y, &mut v, exec);
        let denom = dot(exec, &r_hat, &v);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        alpha = rho / denom;
        {
            let (rr, vv) = (&r, &v);
            exec.fill(&mut s, |k| rr[k] - alpha * vv[k]);
        }
        if norm_inf(exec, &s) <= target {
            let yy = &y;
            let old = x.clone();
            exec.fill(&mut x, |k| old[k] + alpha * yy[k]);
            return Ok(x);
        }
        {
            let ss = &s;
            exec.fill(&mut z, |k| inv[k] * ss[k]);
        }
        a.apply(&z, &mut t, exec);
        let tt = dot(exec, &t, &t);
        if tt == 0.0 || !tt.is_finite() {
            break;
        }
        omega = dot(exec, &t, &s) / tt;
        {
            let (yy, zz) = (&y, &z);
            let old = x.clone();
            exec.fill(&mut x, |k| old[k] + alpha * yy[k] + omega * zz[k]);
        }
        {
            let (ss, tv) = (&s, &t);
            exec.fill(&mut r, |k| ss[k] - omega * tv[k]);
        }
        res = norm_inf(exec, &r);
        if res <= target {
            return Ok(x);
        }
        if omega == 0.0 {
            break;
        }
    }
    Err(LinearFailure::NotConverged { residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_like(n_perp: usize, n_vert: usize) -> Stencil {
        let mut a = Stencil::new(n_perp, n_vert);
        for k in 0..n_perp * n_vert {
            a.diag[k] = 4.5 + (k % 7) as f64 * 0.1;
            a.west[k] = -1.0;
            a.east[k] = -1.0;
            a.south[k] = -1.0;
            a.north[k] = -1.3;
        }
        a
    }

    #[test]
    fn thomas_solves_column() {
        let a = laplacian_like(1, 50);
        let x_true: Vec<f64> = (0..50).map(|k| (k as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; 50];
        a.apply(&x_true, &mut b, Execution::Sequential);
        let x = thomas(&a, &b).unwrap();
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn bicgstab_solves_plane_in_both_modes() {
        let a = laplacian_like(20, 20);
        let x_true: Vec<f64> = (0..400).map(|k| (k as f64 * 0.17).cos()).collect();
        let mut b = vec![0.0; 400];
        a.apply(&x_true, &mut b, Execution::Sequential);
        let xs = bicgstab(&a, &b, 1e-13, 500, Execution::Sequential).unwrap();
        let xp = bicgstab(&a, &b, 1e-13, 500, Execution::Parallel).unwrap();
        assert_eq!(xs, xp);
        for (p, q) in xs.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-11);
        }
    }

    #[test]
    fn bicgstab_agrees_with_thomas_on_column() {
        let a = laplacian_like(1, 64);
        let b: Vec<f64> = (0..64).map(|k| 1.0 + k as f64).collect();
        let x1 = thomas(&a, &b).unwrap();
        let x2 = bicgstab(&a, &b, 1e-14, 500, Execution::Sequential).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-11 * p.abs().max(1.0));
        }
    }
}
