//! Crossing forms of the three plane families, evaluated on intersection
//! vectors given in trace coordinates `(y(a), y(b), -y'(a), y'(b))`.
//!
//! Every form is `Q(v, w) = ω(v, ẇ)` for the path moving with its own
//! parameter increasing. Orientation and pairing signs are applied by the
//! engine.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::potential::Potential;
use crate::propagation::{lift, rescaled_system, solution_gram, StepPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
}

impl Signature {
    pub fn value(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }
}

/// Inertia of a symmetric form; eigenvalues below `rel_tol · max|μ|` (or
/// `1e-13`) count as zero.
pub fn signature(q: &DMatrix<f64>, rel_tol: f64) -> (Signature, Vec<f64>) {
    if q.nrows() == 0 {
        return (Signature { n_plus: 0, n_zero: 0, n_minus: 0 }, Vec::new());
    }
    let sym = (q + q.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let scale = ev.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let zero = (rel_tol * scale).max(1e-13);
    let n_plus = ev.iter().filter(|&&x| x > zero).count();
    let n_minus = ev.iter().filter(|&&x| x < -zero).count();
    (Signature { n_plus, n_zero: ev.len() - n_plus - n_minus, n_minus }, ev)
}

/// `(y(a), y'(a))` of every trace vector, each `2n × d`.
pub fn boundary_values(n: usize, basis: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = 2 * n;
    assert_eq!(basis.nrows(), 4 * m, "trace vectors must have length 8n");
    let p = basis.rows(0, m).into_owned();
    let q = -basis.rows(2 * m, m).into_owned();
    (p, q)
}

/// Channel-level real initial data: the real parts of all vectors followed by
/// the imaginary parts (`2n × 2d`).
fn channel_data(n: usize, p: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let d = p.ncols();
    DMatrix::from_fn(2 * n, 2 * d, |i, j| {
        let (col, part) = (j % d, j / d);
        if i < n { p[(2 * i + part, col)] } else { q[(2 * (i - n) + part, col)] }
    })
}

fn fold_gram(g: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| g[(i, j)] + g[(d + i, d + j)])
}

/// `∫ (y_i, C(x) y_j)` over the solutions behind the trace vectors.
fn weighted_gram(
    pot: &Potential,
    lambda: f64,
    t: f64,
    plan: StepPlan,
    basis: &DMatrix<f64>,
    weight: Option<&dyn Fn(f64) -> DMatrix<f64>>,
) -> Result<DMatrix<f64>> {
    let n = pot.n();
    let (p, q) = boundary_values(n, basis);
    let sys = rescaled_system(pot, lambda, t)?;
    let g = solution_gram(&sys, plan, &channel_data(n, &p, &q), weight)?;
    Ok(fold_gram(&g, basis.ncols()))
}

/// λ-form of the solution plane: `-t² ∫ (y_i, y_j)`.
pub fn lambda_form(pot: &Potential, lambda: f64, t: f64, plan: StepPlan, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(weighted_gram(pot, lambda, t, plan, basis, None)? * (-t * t))
}

/// θ-form of the boundary plane: `(q_i, (I⊗J) p_j) + (q_j, (I⊗J) p_i)` with
/// `p = y(a)`, `q = y'(a)`.
pub fn theta_form(n: usize, basis: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, q) = boundary_values(n, basis);
    // (I⊗J) maps (x, y) pairs to (y, -x).
    let jp = DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| if i % 2 == 0 { p[(i + 1, j)] } else { -p[(i - 1, j)] });
    let a = q.transpose() * jp;
    &a + a.transpose()
}

/// t-form of the rescaled solution plane at level `r`:
/// `∫ (y_i, (2t(V(tx) - r) + t² x V'(tx)) y_j)`.
pub fn t_form(pot: &Potential, r: f64, t: f64, plan: StepPlan, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !pot.differentiable() {
        return Err(Error::NoDerivative);
    }
    let n = pot.n();
    let weight = |x: f64| -> DMatrix<f64> {
        let v = pot.eval(t * x);
        let dv = pot.derivative(t * x).unwrap_or_else(|_| DMatrix::zeros(n, n));
        (v - DMatrix::identity(n, n) * r) * (2.0 * t) + dv * (t * t * x)
    };
    weighted_gram(pot, r, t, plan, basis, Some(&weight))
}

/// The same t-form after integration by parts, from boundary values alone:
/// `tL (y(-L), (V(tL) + V(-tL) - 2r) y(-L)) - (2L/t) (y'(-L), y'(-L))`.
/// Valid on θ-periodic solutions.
pub fn t_form_boundary(pot: &Potential, r: f64, t: f64, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !pot.is_symmetric_interval() {
        return Err(Error::invalid("boundary t-form needs a symmetric interval"));
    }
    let n = pot.n();
    let l = pot.interval().1;
    let (p, q) = boundary_values(n, basis);
    let b = pot.eval(t * l) + pot.eval(-t * l) - DMatrix::identity(n, n) * (2.0 * r);
    let bp = lift(&b, n) * &p;
    Ok(p.transpose() * bp * (t * l) - q.transpose() * &q * (2.0 * l / t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_counts() {
        let q = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1e-15]);
        let (s, _) = signature(&q, 1e-9);
        assert_eq!(s, Signature { n_plus: 1, n_zero: 1, n_minus: 1 });
        assert_eq!(s.value(), 0);
    }

    #[test]
    fn theta_form_of_plane_wave() {
        // u = e^{iμx}: u(a) = 1, u'(a) = iμ, so (q, Jp) = -μ.
        let mu = 0.25;
        let mut h = DMatrix::zeros(8, 1);
        h[(0, 0)] = 1.0;
        h[(5, 0)] = -mu;
        let q = theta_form(1, &h);
        assert!((q[(0, 0)] + 2.0 * mu).abs() < 1e-15);
    }
}
