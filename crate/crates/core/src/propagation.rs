//! Operator-side objects: the realified Schrödinger system, its propagator,
//! monodromy matrices and the Lagrangian planes of boundary conditions and
//! solution traces.
//!
//! Everything is integrated at the level of the `n`-channel equation
//! `y'' = W(x) y` with `W(x) = t²(V(tx) - λ)`. Since `V` is real the realified
//! propagator on `(Re u, Im u)` pairs is the Kronecker lift `Φ ⊗ I₂` of the
//! real `2n × 2n` propagator `Φ`; [`lift`] performs that lift. Interleaved
//! ordering is used throughout: realified index `2k` holds `Re u_k` and `2k+1`
//! holds `Im u_k`.

use nalgebra::{Complex, DMatrix};

use crate::potential::Potential;
use crate::symplectic::{LagrangianFrame, SymplecticSpace};
use crate::{Error, Real, Result};

/// Number of steps between QR renormalizations of propagated frames.
const RENORMALIZE_EVERY: usize = 8;
const MAX_STEPS: usize = 2_000_000;

/// The equation `-y'' + t²(V(tx) ⊗ I₂) y = t²λ y` on the potential's interval.
#[derive(Debug, Clone, Copy)]
pub struct RealifiedSystem<'a, T: Real = f64> {
    potential: &'a Potential<T>,
    lambda: T,
    t: T,
}

impl<'a, T: Real> RealifiedSystem<'a, T> {
    /// The unscaled system `-y'' + (V ⊗ I₂) y = λ y`.
    pub fn new(potential: &'a Potential<T>, lambda: T) -> Self {
        Self { potential, lambda, t: T::one() }
    }

    pub fn potential(&self) -> &'a Potential<T> {
        self.potential
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn n(&self) -> usize {
        self.potential.n()
    }

    pub fn domain(&self) -> (T, T) {
        self.potential.interval()
    }

    /// `W(x) = t²(V(tx) - λ)` written into the `n × n` buffer `out`.
    pub fn w_into(&self, x: T, out: &mut DMatrix<T>) {
        let t2 = self.t * self.t;
        self.potential.eval_into(self.t * x, out);
        for i in 0..out.nrows() {
            out[(i, i)] -= self.lambda;
        }
        *out *= t2;
    }

    /// The `4n × 4n` realified coefficient `A(x)` of `z' = A z`, `z = (y, y')`.
    pub fn coefficient(&self, x: T) -> DMatrix<T> {
        let n = self.n();
        let mut w = DMatrix::zeros(n, n);
        self.w_into(x, &mut w);
        let wr = lift(&w, n);
        let m = 2 * n;
        let mut a = DMatrix::zeros(2 * m, 2 * m);
        a.view_mut((0, m), (m, m)).fill_with_identity();
        a.view_mut((m, 0), (m, m)).copy_from(&wr);
        a
    }
}

/// The rescaled system on a symmetric interval `[-L, L]`.
pub fn rescaled_system<T: Real>(pot: &Potential<T>, lambda: T, t: T) -> Result<RealifiedSystem<'_, T>> {
    if !(t > T::zero() && t <= T::one()) {
        return Err(Error::invalid(format!("scaling t = {} must lie in (0, 1]", t.as_f64())));
    }
    if t != T::one() && !pot.is_symmetric_interval() {
        return Err(Error::invalid("the rescaled family needs a symmetric interval [-L, L]"));
    }
    Ok(RealifiedSystem { potential: pot, lambda, t })
}

/// Kronecker lift `Z ⊗ I₂` of a matrix whose rows come in blocks of `n`
/// complex-channel components; every column becomes a (Re, Im) pair.
pub fn lift<T: Real>(z: &DMatrix<T>, n: usize) -> DMatrix<T> {
    assert_eq!(z.nrows() % n, 0);
    let blocks = z.nrows() / n;
    let mut out = DMatrix::zeros(2 * z.nrows(), 2 * z.ncols());
    for blk in 0..blocks {
        for k in 0..n {
            for c in 0..z.ncols() {
                let v = z[(blk * n + k, c)];
                out[(blk * 2 * n + 2 * k, 2 * c)] = v;
                out[(blk * 2 * n + 2 * k + 1, 2 * c + 1)] = v;
            }
        }
    }
    out
}

/// Splits realified vectors into channel-level real and imaginary parts.
///
/// Input rows come in blocks of `2n` interleaved entries; the output has the
/// same block structure with `n` rows per block and twice the columns
/// (`Re` part of column `j` at `2j`, `Im` part at `2j+1`).
pub fn unlift<T: Real>(y: &DMatrix<T>, n: usize) -> DMatrix<T> {
    assert_eq!(y.nrows() % (2 * n), 0);
    let blocks = y.nrows() / (2 * n);
    let mut out = DMatrix::zeros(blocks * n, 2 * y.ncols());
    for blk in 0..blocks {
        for k in 0..n {
            for c in 0..y.ncols() {
                out[(blk * n + k, 2 * c)] = y[(blk * 2 * n + 2 * k, c)];
                out[(blk * n + k, 2 * c + 1)] = y[(blk * 2 * n + 2 * k + 1, c)];
            }
        }
    }
    out
}

/// Fixed number of Gauss–Legendre steps used for one propagation context.
///
/// Keeping the step count fixed along a path makes every computed plane a
/// smooth function of the path parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepPlan {
    pub steps: usize,
}

impl StepPlan {
    /// Step count for the largest local frequency over a parameter range.
    ///
    /// The error model of the sixth-order method is `~ ℓω (hω)^6 · 4e-4`; the
    /// count is then confirmed by step doubling at the worst parameters.
    pub fn for_range<T: Real>(pot: &Potential<T>, t_max: T, lambda_abs_max: T, tol: T) -> Result<Self> {
        let tol_f = tol.as_f64();
        if !(tol_f > 1e-14 && tol_f < 1e-2) {
            return Err(Error::invalid(format!("integrator tolerance {tol_f:e} outside (1e-14, 1e-2)")));
        }
        let t = t_max.as_f64();
        let ell = pot.length().as_f64();
        let omega = t * (pot.v_max().as_f64() + lambda_abs_max.as_f64()).sqrt() + t * pot.max_frequency().as_f64();
        let lw = (ell * omega).max(1.0);
        let eta = (tol_f / (4e-4 * lw)).powf(1.0 / 6.0).clamp(0.004, 0.25);
        let steps = ((lw / eta).ceil() as usize).max(32);
        if steps > MAX_STEPS {
            return Err(Error::StepUnderflow { steps });
        }
        let mut plan = StepPlan { steps };
        // Step-doubling confirmation at the most demanding corner.
        for lambda in [-lambda_abs_max, lambda_abs_max] {
            let sys = RealifiedSystem { potential: pot, lambda, t: t_max };
            loop {
                let coarse = fundamental(&sys, plan)?;
                let fine = fundamental(&sys, StepPlan { steps: 2 * plan.steps })?;
                let scale = fine.amax().max(T::one());
                if ((coarse - &fine).amax() / scale).as_f64() <= tol_f {
                    break;
                }
                plan.steps *= 2;
                if plan.steps > MAX_STEPS {
                    return Err(Error::StepUnderflow { steps: plan.steps });
                }
            }
        }
        Ok(plan)
    }

    pub fn for_system<T: Real>(sys: &RealifiedSystem<'_, T>, tol: T) -> Result<Self> {
        Self::for_range(sys.potential, sys.t, sys.lambda.abs(), tol)
    }
}

// Three-stage Gauss–Legendre collocation (order 6).
struct Gauss<T> {
    c: [T; 3],
    b: [T; 3],
    a2: [[T; 3]; 3],
    ba: [T; 3],
}

impl<T: Real> Gauss<T> {
    fn new() -> Self {
        let r = 15f64.sqrt();
        let c = [0.5 - r / 10.0, 0.5, 0.5 + r / 10.0];
        let a = [
            [5.0 / 36.0, 2.0 / 9.0 - r / 15.0, 5.0 / 36.0 - r / 30.0],
            [5.0 / 36.0 + r / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r / 24.0],
            [5.0 / 36.0 + r / 30.0, 2.0 / 9.0 + r / 15.0, 5.0 / 36.0],
        ];
        let b = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
        let mut a2 = [[0.0; 3]; 3];
        let mut ba = [0.0; 3];
        for i in 0..3 {
            for k in 0..3 {
                a2[i][k] = (0..3).map(|j| a[i][j] * a[j][k]).sum();
            }
            ba[i] = (0..3).map(|j| b[j] * a[j][i]).sum();
        }
        let l = |x: f64| T::lit(x);
        Self {
            c: c.map(l),
            b: b.map(l),
            a2: a2.map(|row| row.map(l)),
            ba: ba.map(l),
        }
    }
}

/// Integrator for `y'' = W(x) y` with `n` components.
struct Stepper<'s, T: Real> {
    n: usize,
    w: &'s dyn Fn(T, &mut DMatrix<T>),
    gauss: Gauss<T>,
    wbuf: [DMatrix<T>; 3],
}

impl<'s, T: Real> Stepper<'s, T> {
    fn new(n: usize, w: &'s dyn Fn(T, &mut DMatrix<T>)) -> Self {
        Self {
            n,
            w,
            gauss: Gauss::new(),
            wbuf: [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)],
        }
    }

    /// The `2n × 2n` matrix advancing `(y, y')` from `x` to `x + h`.
    fn step(&mut self, x: T, h: T) -> Result<DMatrix<T>> {
        let n = self.n;
        let g = &self.gauss;
        for i in 0..3 {
            let xi = x + g.c[i] * h;
            (self.w)(xi, &mut self.wbuf[i]);
            if self.wbuf[i].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(xi.as_f64()));
            }
        }
        let h2 = h * h;
        // Stage positions P_i solve P_i - h² Σ_k (A²)_{ik} W_k P_k = p + h c_i q.
        let mut m = DMatrix::<T>::identity(3 * n, 3 * n);
        for i in 0..3 {
            for k in 0..3 {
                let coef = -h2 * g.a2[i][k];
                let mut blk = m.view_mut((i * n, k * n), (n, n));
                blk += &self.wbuf[k] * coef;
            }
        }
        let mut rhs = DMatrix::<T>::zeros(3 * n, 2 * n);
        for i in 0..3 {
            for k in 0..n {
                rhs[(i * n + k, k)] = T::one();
                rhs[(i * n + k, n + k)] = h * g.c[i];
            }
        }
        let p = m.lu().solve(&rhs).ok_or_else(|| Error::invalid("singular Gauss stage system"))?;
        let mut out = DMatrix::<T>::zeros(2 * n, 2 * n);
        for k in 0..n {
            out[(k, k)] = T::one();
            out[(k, n + k)] = h;
            out[(n + k, n + k)] = T::one();
        }
        for i in 0..3 {
            let wp = &self.wbuf[i] * p.rows(i * n, n);
            let mut top = out.rows_mut(0, n);
            top += &wp * (h2 * g.ba[i]);
            let mut bot = out.rows_mut(n, n);
            bot += &wp * (h * g.b[i]);
        }
        Ok(out)
    }
}

fn w_closure<'a, T: Real>(sys: &'a RealifiedSystem<'a, T>) -> impl Fn(T, &mut DMatrix<T>) + 'a {
    move |x, out| sys.w_into(x, out)
}

/// Real `2n × 2n` propagator of `(y, y')` over the interval at channel level.
pub fn fundamental<T: Real>(sys: &RealifiedSystem<'_, T>, plan: StepPlan) -> Result<DMatrix<T>> {
    let n = sys.n();
    let w = w_closure(sys);
    propagate_with(n, &w, sys.domain(), plan, DMatrix::identity(2 * n, 2 * n))
}

fn propagate_with<T: Real>(
    n: usize,
    w: &dyn Fn(T, &mut DMatrix<T>),
    (a, b): (T, T),
    plan: StepPlan,
    mut z: DMatrix<T>,
) -> Result<DMatrix<T>> {
    let mut st = Stepper::new(n, w);
    let h = (b - a) / T::lit(plan.steps as f64);
    for k in 0..plan.steps {
        let x = a + h * T::lit(k as f64);
        z = st.step(x, h)? * z;
    }
    Ok(z)
}

/// Realified `4n × 4n` propagator from `(y(a), y'(a))` to `(y(b), y'(b))`.
pub fn propagate_fundamental<T: Real>(sys: &RealifiedSystem<'_, T>, tol: T) -> Result<DMatrix<T>> {
    let plan = StepPlan::for_system(sys, tol)?;
    propagate_fundamental_with(sys, plan)
}

pub fn propagate_fundamental_with<T: Real>(sys: &RealifiedSystem<'_, T>, plan: StepPlan) -> Result<DMatrix<T>> {
    Ok(lift(&fundamental(sys, plan)?, sys.n()))
}

/// Integrates the `4n`-dimensional realified equation directly, without using
/// the Kronecker structure. Used to cross-check [`propagate_fundamental`].
pub fn propagate_realified_direct<T: Real>(sys: &RealifiedSystem<'_, T>, plan: StepPlan) -> Result<DMatrix<T>> {
    let n = sys.n();
    let mut wn = DMatrix::zeros(n, n);
    let cell = std::cell::RefCell::new(&mut wn);
    let w = |x: T, out: &mut DMatrix<T>| {
        let mut buf = cell.borrow_mut();
        sys.w_into(x, &mut buf);
        out.copy_from(&lift(&buf, n));
    };
    propagate_with(2 * n, &w, sys.domain(), plan, DMatrix::identity(4 * n, 4 * n))
}

/// Channel-level stacked frame `[Z(a); Z(b)]` (`4n × 2n`, orthonormal columns)
/// spanning `{((y(a), y'(a)), (y(b), y'(b)))}` over all solutions.
///
/// The pair is renormalized by a thin QR every few steps so growing and
/// decaying solutions stay resolved.
pub fn boundary_pairs<T: Real>(sys: &RealifiedSystem<'_, T>, plan: StepPlan) -> Result<DMatrix<T>> {
    let n = sys.n();
    let w = w_closure(sys);
    let mut st = Stepper::new(n, &w);
    let (a, b) = sys.domain();
    let h = (b - a) / T::lit(plan.steps as f64);
    let d = 2 * n;
    let mut z0 = DMatrix::<T>::identity(d, d);
    let mut z = DMatrix::<T>::identity(d, d);
    for k in 0..plan.steps {
        let x = a + h * T::lit(k as f64);
        z = st.step(x, h)? * z;
        if (k + 1) % RENORMALIZE_EVERY == 0 || k + 1 == plan.steps {
            let mut stack = DMatrix::zeros(2 * d, d);
            stack.rows_mut(0, d).copy_from(&z0);
            stack.rows_mut(d, d).copy_from(&z);
            let q = stack.qr().q();
            z0 = q.rows(0, d).into_owned();
            z = q.rows(d, d).into_owned();
        }
    }
    let mut out = DMatrix::zeros(2 * d, d);
    out.rows_mut(0, d).copy_from(&z0);
    out.rows_mut(d, d).copy_from(&z);
    Ok(out)
}

/// The trace plane `{(y(a), y(b), -y'(a), y'(b))}` of all solutions.
pub fn trace_plane<T: Real>(sys: &RealifiedSystem<'_, T>, tol: T) -> Result<LagrangianFrame<T>> {
    let plan = StepPlan::for_system(sys, tol)?;
    trace_plane_with(sys, plan)
}

pub fn trace_plane_with<T: Real>(sys: &RealifiedSystem<'_, T>, plan: StepPlan) -> Result<LagrangianFrame<T>> {
    let n = sys.n();
    let pairs = boundary_pairs(sys, plan)?;
    // pairs rows: p(a), q(a), p(b), q(b); trace order: p(a), p(b), -q(a), q(b).
    let mut tr = DMatrix::zeros(4 * n, 2 * n);
    tr.rows_mut(0, n).copy_from(&pairs.rows(0, n));
    tr.rows_mut(n, n).copy_from(&pairs.rows(2 * n, n));
    tr.rows_mut(2 * n, n).copy_from(&(-pairs.rows(n, n)));
    tr.rows_mut(3 * n, n).copy_from(&pairs.rows(3 * n, n));
    let space = SymplecticSpace::standard(4 * n)?;
    LagrangianFrame::new(space, &lift(&tr, n))
}

/// Trace vector `(y(a), y(b), -y'(a), y'(b))` of the solution with the given
/// realified initial data; `fundamental` is the realified propagator.
pub fn trace_vector<T: Real>(fundamental: &DMatrix<T>, y0: &[T]) -> Vec<T> {
    let m = fundamental.nrows() / 2;
    let z0 = nalgebra::DVector::from_column_slice(y0);
    let zb = fundamental * &z0;
    let mut out = Vec::with_capacity(4 * m);
    out.extend_from_slice(&y0[..m]);
    out.extend(zb.rows(0, m).iter().copied());
    out.extend(y0[m..].iter().map(|&v| -v));
    out.extend(zb.rows(m, m).iter().copied());
    out
}

/// Generator of the boundary plane `{(p, (I⊗M_θ)p, -q, (I⊗M_θ)q)}`: columns
/// for `p = e_i` followed by columns for `q = e_i`.
pub fn boundary_generator<T: Real>(theta: T, n: usize) -> DMatrix<T> {
    let m = 2 * n;
    let (s, c) = theta.sin_cos();
    let mut g = DMatrix::zeros(4 * m, 2 * m);
    for k in 0..n {
        for r in 0..2 {
            let i = 2 * k + r;
            // (I⊗M_θ) e_i: column r of the 2×2 block [[c, -s], [s, c]].
            let (m0, m1) = if r == 0 { (c, s) } else { (-s, c) };
            g[(i, i)] = T::one();
            g[(m + 2 * k, i)] = m0;
            g[(m + 2 * k + 1, i)] = m1;
            g[(2 * m + i, m + i)] = -T::one();
            g[(3 * m + 2 * k, m + i)] = m0;
            g[(3 * m + 2 * k + 1, m + i)] = m1;
        }
    }
    g
}

/// `d/dθ` of [`boundary_generator`]; uses `M_θ' = -J M_θ`.
pub fn boundary_generator_derivative<T: Real>(theta: T, n: usize) -> DMatrix<T> {
    let half_pi = T::frac_pi_2();
    // d/dθ (cos θ, sin θ) = (cos(θ + π/2), sin(θ + π/2)) for the rotation
    // entries; the structural ±1 entries have zero derivative.
    let shifted = boundary_generator(theta + half_pi, n);
    let mut d = shifted;
    let m = 2 * n;
    for i in 0..m {
        d[(i, i)] = T::zero();
        d[(2 * m + i, m + i)] = T::zero();
    }
    d
}

/// Boundary plane of θ-periodic conditions `y(b) = (I⊗M_θ) y(a)`,
/// `y'(b) = (I⊗M_θ) y'(a)`.
pub fn boundary_plane<T: Real>(theta: T, n: usize) -> Result<LagrangianFrame<T>> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let space = SymplecticSpace::standard(8 * n / 2)?;
    // Columns are orthogonal with norm √2 because I⊗M_θ is orthogonal.
    let g = boundary_generator(theta, n) / T::lit(2.0).sqrt();
    Ok(LagrangianFrame::from_orthonormal_unchecked(space, g))
}

/// Propagator of the complex system `(u, u')` over the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy<T: Real = f64> {
    pub lambda: T,
    pub t: T,
    pub matrix: DMatrix<Complex<T>>,
}

impl<T: Real> Monodromy<T> {
    /// `T(λ) - e^{iθ} I`.
    pub fn shifted(&self, theta: T) -> DMatrix<Complex<T>> {
        let mut m = self.matrix.clone();
        let z = Complex::new(theta.cos(), theta.sin());
        for i in 0..m.nrows() {
            m[(i, i)] -= z;
        }
        m
    }

    pub fn determinant(&self) -> Complex<T> {
        self.matrix.clone().determinant()
    }

    /// `Re(e^{-inθ} det(T - e^{iθ}))`, real because the characteristic
    /// polynomial of the real symplectic `T` is palindromic. Its zeros are
    /// the `θ`-eigenvalues; it is entire in `λ`, `t` and `θ` and changes sign
    /// at roots of odd multiplicity.
    pub fn secular(&self, theta: T) -> T {
        let n = self.matrix.nrows() / 2;
        let phase = Complex::new((-T::lit(n as f64) * theta).cos(), (-T::lit(n as f64) * theta).sin());
        (self.shifted(theta).determinant() * phase).re
    }

    /// Singular values, ascending, of `[G | -B]` where `G` is an orthonormal
    /// basis of the graph `{(y, T y)}` and `B` one of `{(y, e^{iθ} y)}`.
    ///
    /// The two subspaces meet exactly when `e^{iθ}` is an eigenvalue of `T`,
    /// with the kernel dimension as intersection dimension. Unlike the
    /// singular values of `T - e^{iθ}`, these are scale-free: a strongly
    /// hyperbolic `T` does not make them small.
    pub fn graph_singular_values(&self, theta: T) -> Vec<T> {
        let d = self.matrix.nrows();
        let mut stacked = DMatrix::<Complex<T>>::zeros(2 * d, d);
        stacked.view_mut((0, 0), (d, d)).fill_with_identity();
        stacked.view_mut((d, 0), (d, d)).copy_from(&self.matrix);
        let g = stacked.qr().q();
        let z = Complex::new(theta.cos(), theta.sin());
        let s = T::one() / T::lit(2.0).sqrt();
        let mut m = DMatrix::<Complex<T>>::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (2 * d, d)).copy_from(&g);
        for i in 0..d {
            m[(i, d + i)] = Complex::new(-s, T::zero());
            m[(d + i, d + i)] = -z * s;
        }
        let mut sv: Vec<T> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        sv
    }

    /// Dimension of `ker(T(λ) - e^{iθ}I)`: graph singular values (see
    /// [`Self::graph_singular_values`]) at or below `tol`.
    pub fn kernel_dim(&self, theta: T, tol: T) -> usize {
        self.graph_singular_values(theta).iter().filter(|&&s| s <= tol).count()
    }
}

/// Monodromy matrix of the (possibly rescaled) system at `λ`.
///
/// The potential is real, so the propagator is real; it is returned as a
/// complex matrix for the Floquet test `e^{iθ} ∈ Spec T(λ)`.
pub fn monodromy<T: Real>(pot: &Potential<T>, lambda: T, t: T, plan: StepPlan) -> Result<Monodromy<T>> {
    let sys = rescaled_system(pot, lambda, t)?;
    let phi = fundamental(&sys, plan)?;
    Ok(Monodromy { lambda, t, matrix: phi.map(|v| Complex::new(v, T::zero())) })
}

/// Weighted Gram matrix `∫ y_iᵀ C(x) y_j dx` of channel-level real solutions
/// with initial data the columns of `z0` (`2n × k`).
///
/// The solution values at the Gauss nodes of every step are obtained by
/// partial steps from the step start, so the quadrature keeps the sixth
/// order of the integrator. `weight` is `C(x)` (`n × n`); `None` means `I`.
pub fn solution_gram<T: Real>(
    sys: &RealifiedSystem<'_, T>,
    plan: StepPlan,
    z0: &DMatrix<T>,
    weight: Option<&dyn Fn(T) -> DMatrix<T>>,
) -> Result<DMatrix<T>> {
    let n = sys.n();
    let w = w_closure(sys);
    let mut st = Stepper::new(n, &w);
    let (a, b) = sys.domain();
    let h = (b - a) / T::lit(plan.steps as f64);
    let nodes = Gauss::<T>::new();
    let k = z0.ncols();
    let mut gram = DMatrix::<T>::zeros(k, k);
    let mut z = z0.clone();
    for step in 0..plan.steps {
        let x = a + h * T::lit(step as f64);
        for i in 0..3 {
            let xi = x + nodes.c[i] * h;
            let zi = st.step(x, nodes.c[i] * h)? * &z;
            let y = zi.rows(0, n);
            let cy = match weight {
                Some(f) => f(xi) * y,
                None => y.into_owned(),
            };
            gram += (y.transpose() * cy) * (h * nodes.b[i]);
        }
        z = st.step(x, h)? * z;
    }
    Ok((&gram + gram.transpose()) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::intersect;
    use std::f64::consts::PI;

    fn two_pi() -> (f64, f64) {
        (0.0, 2.0 * PI)
    }

    #[test]
    fn free_zero_energy_is_linear_motion() {
        let pot = Potential::free(1, (0.0, 1.0)).unwrap();
        let sys = RealifiedSystem::new(&pot, 0.0);
        let phi = propagate_fundamental(&sys, 1e-10).unwrap();
        let mut expected = DMatrix::<f64>::identity(4, 4);
        expected[(0, 2)] = 1.0;
        expected[(1, 3)] = 1.0;
        assert!((phi - expected).amax() < 1e-13);
    }

    #[test]
    fn free_unit_energy_has_period_two_pi() {
        let pot = Potential::free(1, two_pi()).unwrap();
        let sys = RealifiedSystem::new(&pot, 1.0);
        let phi = propagate_fundamental(&sys, 1e-10).unwrap();
        assert!((phi - DMatrix::<f64>::identity(4, 4)).amax() < 1e-9);
    }

    #[test]
    fn mathieu_propagator_is_step_converged_and_symplectic() {
        let pot = Potential::mathieu(2.0, two_pi()).unwrap();
        let sys = RealifiedSystem::new(&pot, 0.0);
        let plan = StepPlan::for_system(&sys, 1e-10).unwrap();
        let phi = propagate_fundamental_with(&sys, plan).unwrap();
        let phi2 = propagate_fundamental_with(&sys, StepPlan { steps: 2 * plan.steps }).unwrap();
        assert!((&phi - phi2).amax() < 1e-9);
        let s = SymplecticSpace::<f64>::standard(2).unwrap();
        let o = s.omega_matrix();
        assert!((phi.transpose() * &o * &phi - &o).amax() < 1e-9);
    }

    #[test]
    fn direct_realified_integration_matches_lift() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, -0.5]);
        let pot = Potential::cosine(DMatrix::zeros(2, 2), v, 1.0, two_pi()).unwrap();
        let sys = RealifiedSystem::new(&pot, 0.7);
        let plan = StepPlan::for_system(&sys, 1e-10).unwrap();
        let lifted = propagate_fundamental_with(&sys, plan).unwrap();
        let direct = propagate_realified_direct(&sys, plan).unwrap();
        assert!((lifted - direct).amax() < 1e-12);
    }

    #[test]
    fn boundary_planes_are_lagrangian() {
        for n in 1..4 {
            for &theta in &[0.0, 0.3, PI, 5.0] {
                let f = boundary_plane(theta, n).unwrap();
                assert!(f.isotropy_defect() < 1e-12);
                let g = f.columns().transpose() * f.columns();
                assert!((g - DMatrix::<f64>::identity(4 * n, 4 * n)).amax() < 1e-14);
            }
        }
        // θ = π: y(b) = -y(a) and y'(b) = -y'(a).
        let g = boundary_generator(PI, 1);
        assert!((g[(2, 0)] + 1.0).abs() < 1e-15 && (g[(6, 2)] + 1.0).abs() < 1e-15);
        assert!((g[(4, 2)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn generator_derivative_matches_finite_difference() {
        let th = 0.83;
        let d = boundary_generator_derivative(th, 2);
        let e = 1e-6;
        let fd = (boundary_generator(th + e, 2) - boundary_generator(th - e, 2)) / (2.0 * e);
        assert!((d - fd).amax() < 1e-9);
    }

    #[test]
    fn trace_plane_meets_boundary_plane_at_free_eigenvalue() {
        let pot = Potential::free(1, two_pi()).unwrap();
        let sys = RealifiedSystem::new(&pot, 1.0 / 16.0);
        let tr = trace_plane(&sys, 1e-10).unwrap();
        assert!(tr.isotropy_defect() < 1e-8);
        let bc = boundary_plane(PI / 2.0, 1).unwrap();
        assert_eq!(intersect(&bc, &tr, 1e-6).unwrap().dim_real, 2);
        let off = RealifiedSystem::new(&pot, 0.1);
        let tr = trace_plane(&off, 1e-10).unwrap();
        assert_eq!(intersect(&bc, &tr, 1e-6).unwrap().dim_real, 0);
    }

    #[test]
    fn trace_plane_survives_strong_growth() {
        let pot = Potential::constant(DMatrix::from_element(1, 1, 30.0), two_pi()).unwrap();
        let sys = RealifiedSystem::new(&pot, -31.0);
        let tr = trace_plane(&sys, 1e-10).unwrap();
        assert!(tr.isotropy_defect() < 1e-8);
    }

    #[test]
    fn free_monodromy_eigenvalues() {
        let pot = Potential::free(1, two_pi()).unwrap();
        let mu = 0.37f64;
        let plan = StepPlan::for_range(&pot, 1.0, mu * mu, 1e-10).unwrap();
        let t = monodromy(&pot, mu * mu, 1.0, plan).unwrap();
        assert!((t.determinant() - Complex::new(1.0, 0.0)).norm() < 1e-8);
        let theta = 2.0 * PI * mu;
        assert_eq!(t.kernel_dim(theta, 1e-6), 1);
        assert_eq!(t.kernel_dim(-theta, 1e-6), 1);
        assert_eq!(t.kernel_dim(theta + 0.1, 1e-6), 0);
    }

    #[test]
    fn rescaled_constant_potential_closed_form() {
        let l = PI;
        let pot = Potential::constant(DMatrix::from_element(1, 1, 0.8), (-l, l)).unwrap();
        let (t, theta) = (0.6, 1.1);
        for k in [-1i32, 0, 1] {
            let lambda = ((theta + 2.0 * PI * k as f64) / (2.0 * t * l)).powi(2) + 0.8;
            let plan = StepPlan::for_range(&pot, t, lambda.abs(), 1e-10).unwrap();
            let m = monodromy(&pot, lambda, t, plan).unwrap();
            assert_eq!(m.kernel_dim(theta, 1e-6), 1, "k={k}");
        }
        let asym = Potential::free(1, (0.0, 1.0)).unwrap();
        assert!(rescaled_system(&asym, 0.0, 0.5).is_err());
        assert!(rescaled_system(&asym, 0.0, 1.0).is_ok());
    }

    #[test]
    fn gram_of_free_waves() {
        // cos(x/4) and sin(x/4) on [0, 2π].
        let pot = Potential::free(1, two_pi()).unwrap();
        let sys = RealifiedSystem::new(&pot, 1.0 / 16.0);
        let plan = StepPlan::for_system(&sys, 1e-10).unwrap();
        let z0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.25]);
        let g = solution_gram(&sys, plan, &z0, None).unwrap();
        // ∫cos² = π, ∫sin² = π, ∫ cos·sin = [sin²(x/4)·2]_0^{2π} = 2.
        assert!((g[(0, 0)] - PI).abs() < 1e-10);
        assert!((g[(1, 1)] - PI).abs() < 1e-10);
        assert!((g[(0, 1)] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn lift_and_unlift_are_inverse_on_columns() {
        let z = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let l = lift(&z, 2);
        assert_eq!(l.shape(), (8, 4));
        let u = unlift(&l, 2);
        // Column 0 of the lift carries z[:,0] in the Re slots only.
        assert_eq!(u.column(0), z.column(0));
        assert_eq!(u.column(1).amax(), 0.0);
    }
}
