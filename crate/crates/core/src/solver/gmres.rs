use crate::scalar::{lit, Real};

/// Restarted GMRES settings.
#[derive(Clone, Copy, Debug)]
pub struct GmresConfig {
    pub restart: usize,
    pub max_iterations: usize,
    /// Target for the sup norm of the preconditioned residual.
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct GmresOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Sup norm of `P(b - A x)` at exit.
    pub residual: T,
    pub converged: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn sup<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

/// Left-preconditioned restarted GMRES for `P A x = P b`.
///
/// `apply` and `precond` write their result into the output slice. The
/// Krylov basis lives in the range of `P`, so a preconditioner that kills a
/// nullspace direction keeps every iterate out of it.
pub fn gmres<T: Real>(
    apply: impl Fn(&[T], &mut [T]),
    precond: impl Fn(&[T], &mut [T]),
    b: &[T],
    x0: Option<Vec<T>>,
    cfg: &GmresConfig,
) -> GmresOutcome<T> {
    let len = b.len();
    let tol = lit::<T>(cfg.tolerance);
    let m = cfg.restart.max(1);
    let mut x = x0.unwrap_or_else(|| vec![T::zero(); len]);
    let mut work = vec![T::zero(); len];
    let mut z = vec![T::zero(); len];
    let mut iterations = 0;

    let residual = |x: &[T], work: &mut Vec<T>, z: &mut Vec<T>| {
        apply(x, work);
        for (w, &bi) in work.iter_mut().zip(b) {
            *w = bi - *w;
        }
        precond(work, z);
    };

    loop {
        residual(&x, &mut work, &mut z);
        let res_sup = sup(&z);
        if res_sup <= tol || iterations >= cfg.max_iterations {
            return GmresOutcome { x, iterations, residual: res_sup, converged: res_sup <= tol };
        }
        let beta = norm2(&z);
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        basis.push(z.iter().map(|&v| v / beta).collect());
        let mut h = vec![vec![T::zero(); m]; m + 1];
        let mut cs = vec![T::zero(); m];
        let mut sn = vec![T::zero(); m];
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut steps = 0;
        // inner target on the 2-norm; the sup norm is re-checked at restart
        let inner_tol = tol * lit(0.5);
        for j in 0..m {
            if iterations >= cfg.max_iterations {
                break;
            }
            apply(&basis[j], &mut work);
            let mut w = vec![T::zero(); len];
            precond(&work, &mut w);
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                h[i][j] = hij;
                for (wk, &vk) in w.iter_mut().zip(&basis[i]) {
                    *wk = *wk - hij * vk;
                }
            }
            // one reorthogonalization sweep keeps tiny residuals honest
            for i in 0..=j {
                let c = dot(&w, &basis[i]);
                h[i][j] = h[i][j] + c;
                for (wk, &vk) in w.iter_mut().zip(&basis[i]) {
                    *wk = *wk - c * vk;
                }
            }
            let hn = norm2(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == T::zero() {
                cs[j] = T::one();
                sn[j] = T::zero();
            } else {
                cs[j] = h[j][j] / denom;
                sn[j] = h[j + 1][j] / denom;
            }
            h[j][j] = denom;
            h[j + 1][j] = T::zero();
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            iterations += 1;
            steps = j + 1;
            let breakdown = hn <= T::epsilon() * beta;
            if !breakdown {
                basis.push(w.iter().map(|&v| v / hn).collect());
            }
            if g[j + 1].abs() <= inner_tol || breakdown {
                break;
            }
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![T::zero(); steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s = s - h[i][k] * y[k];
            }
            y[i] = if h[i][i] == T::zero() { T::zero() } else { s / h[i][i] };
        }
        for (i, &yi) in y.iter().enumerate() {
            for (xk, &vk) in x.iter_mut().zip(&basis[i]) {
                *xk = *xk + yi * vk;
            }
        }
        if steps == 0 {
            residual(&x, &mut work, &mut z);
            let res_sup = sup(&z);
            return GmresOutcome { x, iterations, residual: res_sup, converged: res_sup <= tol };
        }
    }
}
