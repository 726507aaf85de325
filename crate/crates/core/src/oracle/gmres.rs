use num_complex::Complex64;

pub(crate) struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Restarted GMRES with right preconditioning by `precond` (applied as
/// elementwise multiplication), starting from zero.
pub(crate) fn gmres<F>(
    apply: F,
    rhs: &[Complex64],
    precond: &[Complex64],
    restart: usize,
    max_iter: usize,
    tol: f64,
) -> GmresOutcome
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = rhs.len();
    let b_norm = norm(rhs).max(f64::MIN_POSITIVE);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut iterations = 0;
    let residual_of = |x: &[Complex64]| {
        let ax = apply(x);
        rhs.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>()
    };
    let mut r = residual_of(&x);
    let mut beta = norm(&r);
    while iterations < max_iter {
        if beta / b_norm < tol {
            return GmresOutcome {
                x,
                relative_residual: beta / b_norm,
                converged: true,
            };
        }
        let m = restart.min(max_iter - iterations).max(1);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![Complex64::new(0.0, 0.0); m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            iterations += 1;
            let z: Vec<Complex64> = basis[k].iter().zip(precond).map(|(v, p)| v * p).collect();
            let mut w = apply(&z);
            for (j, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[j][k] = hij;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hij * vi;
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = Complex64::new(wn, 0.0);
            for j in 0..k {
                let t = cs[j].conj() * h[j][k] + sn[j].conj() * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (a, b) = (h[k][k], h[k + 1][k]);
            let denom = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if denom == 0.0 {
                cs[k] = Complex64::new(1.0, 0.0);
                sn[k] = Complex64::new(0.0, 0.0);
            } else {
                cs[k] = a / denom;
                sn[k] = b / denom;
            }
            h[k][k] = cs[k].conj() * a + sn[k].conj() * b;
            h[k + 1][k] = Complex64::new(0.0, 0.0);
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k_used = k + 1;
            if g[k + 1].norm() / b_norm < tol * 0.1 || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution
        let mut y = vec![Complex64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for ((xi, vi), p) in x.iter_mut().zip(&basis[j]).zip(precond) {
                *xi += yj * vi * p;
            }
        }
        r = residual_of(&x);
        beta = norm(&r);
    }
    GmresOutcome {
        relative_residual: beta / b_norm,
        converged: beta / b_norm < tol,
        x,
    }
}
