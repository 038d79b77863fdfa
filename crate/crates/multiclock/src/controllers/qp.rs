//! Dense strictly convex QP solver: Goldfarb-Idnani dual active set.
//!
//! minimize ½ zᵀHz + cᵀz  subject to  A_eq z = b_eq,  A_in z ≤ b_in.
//!
//! Internally every constraint is a row `nᵀz ≥ b` with multiplier `u ≥ 0`
//! and stationarity `Hz + c = Σ uᵢ nᵢ`. Starting from the unconstrained
//! minimizer, the most violated constraint is added at each outer step;
//! the inner loop takes partial steps that drop blocking constraints until
//! it becomes active. Iteration order is fully deterministic.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct Qp {
    pub h: DMatrix<f64>,
    pub c: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub a_in: DMatrix<f64>,
    pub b_in: DVector<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct QpOptions {
    /// Accepted constraint violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions { tol: 1e-10, max_iter: 2000 }
    }
}

/// Post-hoc residuals of the first-order optimality conditions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Kkt {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl Kkt {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.dual).max(self.complementarity)
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub lambda_eq: DVector<f64>,
    /// Nonnegative multipliers of `A_in z ≤ b_in`.
    pub lambda_in: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub kkt: Kkt,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("Hessian is not positive definite")]
    NotPositiveDefinite,
    #[error("constraints are infeasible (detected after {iterations} iterations)")]
    Infeasible { iterations: usize },
    #[error("iteration limit reached ({iterations})")]
    IterLimit { iterations: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Qp {
    fn check(&self) -> Result<(), QpError> {
        let n = self.h.nrows();
        let ok = self.h.ncols() == n
            && self.c.len() == n
            && self.a_eq.ncols() == n
            && self.a_in.ncols() == n
            && self.a_eq.nrows() == self.b_eq.len()
            && self.a_in.nrows() == self.b_in.len();
        if ok {
            Ok(())
        } else {
            Err(QpError::Dimension(format!(
                "H {}x{}, c {}, A_eq {}x{}, b_eq {}, A_in {}x{}, b_in {}",
                self.h.nrows(),
                self.h.ncols(),
                self.c.len(),
                self.a_eq.nrows(),
                self.a_eq.ncols(),
                self.b_eq.len(),
                self.a_in.nrows(),
                self.a_in.ncols(),
                self.b_in.len()
            )))
        }
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.h * z)) + self.c.dot(z)
    }

    pub fn kkt(&self, z: &DVector<f64>, lambda_eq: &DVector<f64>, lambda_in: &DVector<f64>) -> Kkt {
        let grad = &self.h * z + &self.c + self.a_eq.transpose() * lambda_eq + self.a_in.transpose() * lambda_in;
        let eq = &self.a_eq * z - &self.b_eq;
        let slack = &self.a_in * z - &self.b_in;
        Kkt {
            stationarity: grad.amax(),
            primal: eq.amax().max(slack.iter().fold(0.0f64, |m, s| m.max(*s))),
            dual: lambda_in.iter().fold(0.0f64, |m, l| m.max(-*l)),
            complementarity: slack.iter().zip(lambda_in.iter()).fold(0.0f64, |m, (s, l)| m.max((s * l).abs())),
        }
    }
}

struct Row {
    n: DVector<f64>,
    b: f64,
    eq: bool,
    norm: f64,
}

pub fn solve(qp: &Qp, opts: &QpOptions) -> Result<QpSolution, QpError> {
    qp.check()?;
    let n = qp.h.nrows();
    let chol = qp.h.clone().cholesky().ok_or(QpError::NotPositiveDefinite)?;
    let hinv = chol.inverse();

    let mut rows: Vec<Row> = Vec::with_capacity(qp.a_eq.nrows() + qp.a_in.nrows());
    for i in 0..qp.a_eq.nrows() {
        let r = qp.a_eq.row(i).transpose();
        rows.push(Row { norm: r.norm(), n: r, b: qp.b_eq[i], eq: true });
    }
    for i in 0..qp.a_in.nrows() {
        let r = -qp.a_in.row(i).transpose();
        rows.push(Row { norm: r.norm(), n: r, b: -qp.b_in[i], eq: false });
    }
    let hn: Vec<DVector<f64>> = rows.iter().map(|r| &hinv * &r.n).collect();
    // Sign applied to equality rows approached from above.
    let mut sign = vec![1.0; rows.len()];

    let mut st = State { x: -(&hinv * &qp.c), active: Vec::new(), u: Vec::new(), iterations: 0 };
    let n_eq = qp.a_eq.nrows();
    for p in 0..n_eq {
        st.add(p, &rows, &hn, &mut sign, opts)?;
    }
    let mut is_active = vec![false; rows.len()];
    loop {
        for a in is_active.iter_mut() {
            *a = false;
        }
        for &a in &st.active {
            is_active[a] = true;
        }
        let mut worst: Option<(usize, f64)> = None;
        for (i, r) in rows.iter().enumerate().skip(n_eq) {
            if is_active[i] || r.norm == 0.0 {
                continue;
            }
            let s = (r.n.dot(&st.x) - r.b) / r.norm;
            if s < -opts.tol && worst.is_none_or(|(_, w)| s < w) {
                worst = Some((i, s));
            }
        }
        match worst {
            None => break,
            Some((p, _)) => st.add(p, &rows, &hn, &mut sign, opts)?,
        }
        if st.iterations > opts.max_iter {
            return Err(QpError::IterLimit { iterations: st.iterations });
        }
    }

    let mut lambda_eq = DVector::zeros(n_eq);
    let mut lambda_in = DVector::zeros(qp.a_in.nrows());
    for (&a, &u) in st.active.iter().zip(&st.u) {
        if a < n_eq {
            lambda_eq[a] = -sign[a] * u;
        } else {
            lambda_in[a - n_eq] = u;
        }
    }
    let z = st.x;
    debug_assert_eq!(z.len(), n);
    let kkt = qp.kkt(&z, &lambda_eq, &lambda_in);
    Ok(QpSolution { objective: qp.objective(&z), z, lambda_eq, lambda_in, iterations: st.iterations, kkt })
}

struct State {
    x: DVector<f64>,
    active: Vec<usize>,
    u: Vec<f64>,
    iterations: usize,
}

impl State {
    fn add(&mut self, p: usize, rows: &[Row], hn: &[DVector<f64>], sign: &mut [f64], opts: &QpOptions) -> Result<(), QpError> {
        let row = &rows[p];
        if row.norm == 0.0 {
            return if row.b <= opts.tol && (!row.eq || row.b >= -opts.tol) {
                Ok(())
            } else {
                Err(QpError::Infeasible { iterations: self.iterations })
            };
        }
        if row.eq && row.n.dot(&self.x) - row.b > 0.0 {
            sign[p] = -1.0;
        }
        let sg = sign[p];
        let np = &row.n * sg;
        let bp = row.b * sg;
        let hnp = &hn[p] * sg;
        let mut up = 0.0;
        loop {
            self.iterations += 1;
            if self.iterations > opts.max_iter {
                return Err(QpError::IterLimit { iterations: self.iterations });
            }
            let s = np.dot(&self.x) - bp;
            let k = self.active.len();
            let r = if k == 0 {
                DVector::zeros(0)
            } else {
                let mut sm = DMatrix::zeros(k, k);
                let mut rhs = DVector::zeros(k);
                for i in 0..k {
                    let ai = self.active[i];
                    let ni = &rows[ai].n * sign[ai];
                    for j in 0..k {
                        let aj = self.active[j];
                        sm[(i, j)] = ni.dot(&hn[aj]) * sign[aj];
                    }
                    rhs[i] = ni.dot(&hnp);
                }
                match sm.clone().cholesky() {
                    Some(ch) => ch.solve(&rhs),
                    None => sm.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k)),
                }
            };
            let mut zdir = hnp.clone();
            for (j, &a) in self.active.iter().enumerate() {
                zdir.axpy(-r[j] * sign[a], &hn[a], 1.0);
            }
            let zn = zdir.dot(&np);
            let t1 = if zn > 1e-12 * row.norm * hnp.norm() { -s / zn } else { f64::INFINITY };
            let mut t2 = f64::INFINITY;
            let mut block = None;
            for (j, &a) in self.active.iter().enumerate() {
                if !rows[a].eq && r[j] > 1e-14 {
                    let t = self.u[j] / r[j];
                    if t < t2 {
                        t2 = t;
                        block = Some(j);
                    }
                }
            }
            if t1.is_infinite() && t2.is_infinite() {
                if row.eq && s.abs() <= opts.tol * row.norm.max(1.0) {
                    // linearly dependent and already satisfied
                    return Ok(());
                }
                return Err(QpError::Infeasible { iterations: self.iterations });
            }
            let t = t1.min(t2);
            if t1.is_finite() {
                self.x.axpy(t, &zdir, 1.0);
            }
            for j in 0..k {
                self.u[j] -= t * r[j];
            }
            up += t;
            if t1 <= t2 {
                self.active.push(p);
                self.u.push(up);
                return Ok(());
            }
            let j = block.expect("finite partial step has a blocking constraint");
            self.active.remove(j);
            self.u.remove(j);
        }
    }
}
