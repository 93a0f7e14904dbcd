//! Independent eigenvalue machinery for `H_θ(t)`: a finite-difference
//! discretization with Sturm-type inertia counting, Floquet root-finding on
//! the monodromy matrix, counting functions, eigenvalue curves `λ_k(θ)` and
//! the derivative `dλ/dθ` by three routes.
//!
//! `H_θ(t)` is the operator `-d²/dξ² + V(ξ)` on the stretched interval
//! `[t a, t b]` with θ-periodic conditions; for `t = 1` it is `H_θ` itself.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::maslov::forms::theta_form;
use crate::numeric::{brent_min, brent_root};
use crate::potential::Potential;
use crate::propagation::{monodromy, rescaled_system, solution_gram, Monodromy, StepPlan};
use crate::{Error, Result};

/// Tolerances shared by the oracle routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    pub integrator_tol: f64,
    /// Grid size `K` of the finite-difference cross-check.
    pub fd_grid: usize,
    /// Counting levels closer than this to an eigenvalue are rejected.
    pub guard_band: f64,
    /// Relative singular-value threshold for kernel dimensions.
    pub kernel_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { integrator_tol: 1e-10, fd_grid: 2000, guard_band: 1e-7, kernel_tol: 1e-6 }
    }
}

/// Lower bound `-v_max` for every spectrum of the family.
pub fn lambda_floor(pot: &Potential) -> f64 {
    -pot.v_max()
}

/// The level `λ_∞ = -v_max - 1` strictly below every spectrum.
pub fn lambda_infinity(pot: &Potential) -> f64 {
    -pot.v_max() - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    FiniteDifference,
    MonodromyRoots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub lambda: f64,
    /// Complex multiplicity.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub theta: f64,
    pub t: f64,
    /// Eigenvalues were searched in `[window.0, window.1]`.
    pub window: (f64, f64),
    pub eigenvalues: Vec<Eigenvalue>,
    pub method: SpectrumMethod,
}

impl SpectrumResult {
    pub fn cutoff(&self) -> f64 {
        self.window.1
    }

    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    /// Eigenvalues repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.eigenvalues.iter().flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity)).collect()
    }

    /// `N(r)`: eigenvalues strictly below `r`, counted with multiplicity.
    ///
    /// Levels within `guard` of an eigenvalue are rejected because the count
    /// is not stable there.
    pub fn count_below(&self, r: f64, guard: f64) -> Result<usize> {
        if r > self.window.1 - guard {
            return Err(Error::invalid(format!("level {r} is outside the computed window ending at {}", self.window.1)));
        }
        if let Some(e) = self.eigenvalues.iter().find(|e| (e.lambda - r).abs() <= guard) {
            return Err(Error::CutoffOnEigenvalue { level: r, eigenvalue: e.lambda, band: guard });
        }
        Ok(self.eigenvalues.iter().filter(|e| e.lambda < r).map(|e| e.multiplicity).sum())
    }

    pub fn distance_to_spectrum(&self, r: f64) -> f64 {
        self.eigenvalues.iter().map(|e| (e.lambda - r).abs()).fold(f64::INFINITY, f64::min)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::invalid(format!("scaling t = {t} must lie in (0, 1]")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Finite differences

/// The `nK × nK` twisted finite-difference matrix, stored folded: node `j` is
/// paired with node `K-1-j`, which turns the wrap-around coupling into a
/// block-tridiagonal matrix with `2n × 2n` blocks.
struct FdOperator {
    n: usize,
    h: f64,
    diag: Vec<DMatrix<Complex<f64>>>,
}

impl FdOperator {
    fn new(pot: &Potential, theta: f64, t: f64, k: usize) -> Self {
        let n = pot.n();
        let k = k + (k % 2);
        let (a, b) = pot.interval();
        let (a, b) = (t * a, t * b);
        let h = (b - a) / k as f64;
        let inv_h2 = 1.0 / (h * h);
        let mut diag = Vec::with_capacity(k / 2);
        let mut v = DMatrix::zeros(n, n);
        for j in 0..k / 2 {
            let mut d = DMatrix::<Complex<f64>>::zeros(2 * n, 2 * n);
            for (slot, node) in [(0, j), (1, k - 1 - j)] {
                pot.eval_into(a + h * node as f64, &mut v);
                for r in 0..n {
                    for c in 0..n {
                        d[(slot * n + r, slot * n + c)] = Complex::new(v[(r, c)], 0.0);
                    }
                    d[(slot * n + r, slot * n + r)] += Complex::new(2.0 * inv_h2, 0.0);
                }
            }
            let (c01, c10) = if j == 0 {
                // u_{-1} = e^{-iθ} u_{K-1} and u_K = e^{iθ} u_0.
                (Complex::from_polar(-inv_h2, -theta), Complex::from_polar(-inv_h2, theta))
            } else if j == k / 2 - 1 {
                (Complex::new(-inv_h2, 0.0), Complex::new(-inv_h2, 0.0))
            } else {
                (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0))
            };
            for r in 0..n {
                d[(r, n + r)] += c01;
                d[(n + r, r)] += c10;
            }
            diag.push(d);
        }
        Self { n, h, diag }
    }

    /// Number of eigenvalues below `mu` (Sylvester's law of inertia applied
    /// to a block LDL* factorization of `H - μ`).
    fn inertia(&self, mu: f64) -> usize {
        let d = 2 * self.n;
        let c = 1.0 / self.h.powi(4);
        let mut count = 0;
        let mut prev_inv: Option<DMatrix<Complex<f64>>> = None;
        for blk in &self.diag {
            let mut s = blk.clone();
            for i in 0..d {
                s[(i, i)] -= Complex::new(mu, 0.0);
            }
            if let Some(pi) = &prev_inv {
                s -= pi * Complex::new(c, 0.0);
            }
            let (neg, inv) = hermitian_ldl(&s);
            count += neg;
            prev_inv = Some(inv);
        }
        count
    }
}

/// Unpivoted LDL* of a small Hermitian matrix: returns the number of
/// negative pivots and the inverse. Vanishing pivots are nudged to a tiny
/// positive value, the usual convention for Sturm counts.
fn hermitian_ldl(a: &DMatrix<Complex<f64>>) -> (usize, DMatrix<Complex<f64>>) {
    let d = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;
    let mut l = DMatrix::<Complex<f64>>::identity(d, d);
    let mut piv = vec![0.0; d];
    for j in 0..d {
        let mut dj = a[(j, j)].re;
        for k in 0..j {
            dj -= l[(j, k)].norm_sqr() * piv[k];
        }
        if dj.abs() < tiny {
            dj = tiny;
        }
        piv[j] = dj;
        for i in j + 1..d {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj() * piv[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    // X = L^{-1} by forward substitution, then A^{-1} = X* D^{-1} X.
    let mut x = DMatrix::<Complex<f64>>::identity(d, d);
    for i in 0..d {
        for j in 0..i {
            let mut v = Complex::new(0.0, 0.0);
            for k in j..i {
                v -= l[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = v;
        }
    }
    let mut dx = x.clone();
    for i in 0..d {
        for j in 0..d {
            dx[(i, j)] /= piv[i];
        }
    }
    let inv = x.adjoint() * dx;
    (piv.iter().filter(|&&p| p < 0.0).count(), inv)
}

fn fd_error_bound(pot: &Potential, t: f64, k: usize, lambda: f64) -> f64 {
    let h = t * pot.length() / k as f64;
    2.0 * h * h / 12.0 * (lambda.abs() + pot.v_max() + 1.0).powi(2)
}

fn fd_resolution_ok(pot: &Potential, t: f64, k: usize, cutoff: f64) -> bool {
    let ell = t * pot.length();
    cutoff <= (k as f64 / 10.0).powi(2) * (std::f64::consts::PI / ell).powi(2)
}

/// Eigenvalues of the finite-difference operator below `cutoff`.
///
/// Second-order accurate: the error of each eigenvalue scales as `1/K²`.
pub fn fd_spectrum(pot: &Potential, theta: f64, t: f64, k: usize, cutoff: f64) -> Result<SpectrumResult> {
    check_t(t)?;
    if k < 64 {
        return Err(Error::invalid(format!("finite-difference grid K = {k} is below 64")));
    }
    if !fd_resolution_ok(pot, t, k, cutoff) {
        return Err(Error::invalid(format!("grid K = {k} cannot resolve eigenvalues up to {cutoff}")));
    }
    let op = FdOperator::new(pot, theta, t, k);
    let lo = lambda_infinity(pot);
    let mut eigen = Vec::new();
    let mut stack = vec![(lo, cutoff, op.inertia(lo), op.inertia(cutoff))];
    while let Some((a, b, na, nb)) = stack.pop() {
        if nb == na {
            continue;
        }
        let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
        if b - a <= tol {
            eigen.push(Eigenvalue { lambda: 0.5 * (a + b), multiplicity: nb - na });
            continue;
        }
        let mid = 0.5 * (a + b);
        let nm = op.inertia(mid);
        stack.push((mid, b, nm, nb));
        stack.push((a, mid, na, nm));
    }
    eigen.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    Ok(SpectrumResult {
        theta,
        t,
        window: (lo, cutoff),
        // Round-off in the block recursion grows like K²·ε, so eigenvalues
        // closer than 1e-7 are not resolved and are reported as one cluster.
        eigenvalues: merge_clusters(eigen, 1e-7),
        method: SpectrumMethod::FiniteDifference,
    })
}

fn merge_clusters(sorted: Vec<Eigenvalue>, rel: f64) -> Vec<Eigenvalue> {
    let mut out: Vec<Eigenvalue> = Vec::new();
    for e in sorted {
        if let Some(last) = out.last_mut()
            && (e.lambda - last.lambda).abs() <= rel * e.lambda.abs().max(1.0) {
                let m = last.multiplicity + e.multiplicity;
                last.lambda = (last.lambda * last.multiplicity as f64 + e.lambda * e.multiplicity as f64) / m as f64;
                last.multiplicity = m;
                continue;
            }
        out.push(e);
    }
    out
}

// ---------------------------------------------------------------------------
// Floquet roots

struct Floquet<'a> {
    pot: &'a Potential,
    theta: f64,
    t: f64,
    plan: StepPlan,
    kernel_tol: f64,
}

impl<'a> Floquet<'a> {
    fn new(pot: &'a Potential, theta: f64, t: f64, lambda_abs_max: f64, opts: &OracleOptions) -> Result<Self> {
        let plan = StepPlan::for_range(pot, t, lambda_abs_max, opts.integrator_tol)?;
        Ok(Self { pot, theta, t, plan, kernel_tol: opts.kernel_tol })
    }

    fn monodromy(&self, lambda: f64) -> Result<Monodromy> {
        monodromy(self.pot, lambda, self.t, self.plan)
    }

    fn secular(tm: &Monodromy, theta: f64) -> f64 {
        tm.secular(theta)
    }

    /// Smallest graph singular value: zero exactly at eigenvalues.
    fn separation(tm: &Monodromy, theta: f64) -> f64 {
        tm.graph_singular_values(theta)[0]
    }

    fn eval(&self, lambda: f64) -> Result<(f64, f64)> {
        let tm = self.monodromy(lambda)?;
        Ok((Self::secular(&tm, self.theta), Self::separation(&tm, self.theta)))
    }

    fn nullity(&self, lambda: f64) -> Result<usize> {
        Ok(self.monodromy(lambda)?.kernel_dim(self.theta, self.kernel_tol))
    }

    fn polish(&self, a: f64, b: f64, ga: f64, gb: f64) -> Result<f64> {
        let tol = 1e-13 * a.abs().max(b.abs()).max(1.0);
        brent_root(|l| Ok::<f64, Error>(self.eval(l)?.0), a, b, ga, gb, tol)
    }

    /// All roots in the window from a grid of `cells` cells, uniform in
    /// `√(λ - base)`, which spaces free eigenvalues evenly.
    fn roots(&self, lo: f64, hi: f64, cells: usize) -> Result<Vec<Eigenvalue>> {
        let base = lo.min(lambda_floor(self.pot)) - 1.0;
        let (k0, k1) = ((lo - base).sqrt(), (hi - base).sqrt());
        let lam = |i: usize| {
            let k = k0 + (k1 - k0) * i as f64 / cells as f64;
            if i == cells { hi } else if i == 0 { lo } else { base + k * k }
        };
        let pts: Vec<f64> = (0..=cells).map(lam).collect();
        let vals: Vec<(f64, f64)> = pts.iter().map(|&l| self.eval(l)).collect::<Result<_>>()?;
        let mut found = Vec::new();
        let mut sign_change = vec![false; cells];
        for i in 0..cells {
            let (ga, gb) = (vals[i].0, vals[i + 1].0);
            if ga == 0.0 {
                found.push(pts[i]);
            } else if ga * gb < 0.0 {
                sign_change[i] = true;
                found.push(self.polish(pts[i], pts[i + 1], ga, gb)?);
            }
        }
        if vals[cells].0 == 0.0 {
            found.push(pts[cells]);
        }
        // A narrow gap puts two sign changes into one cell. The secular
        // function then dips through zero between two grid values of the
        // same sign; its signed minimum brackets both roots.
        for i in 1..cells {
            let (gl, g, gr) = (vals[i - 1].0, vals[i].0, vals[i + 1].0);
            if !(gl * gr > 0.0 && g * gl > 0.0 && g.abs() <= gl.abs() && g.abs() <= gr.abs()) {
                continue;
            }
            let sign = gl.signum();
            let (a, b) = (pts[i - 1], pts[i + 1]);
            let tol = 1e-14 * a.abs().max(b.abs()).max(1.0);
            let (x, fx) = brent_min(|l| Ok::<f64, Error>(sign * self.eval(l)?.0), a, b, tol)?;
            if fx < 0.0 {
                found.push(self.polish(a, x, gl, sign * fx)?);
                found.push(self.polish(x, b, sign * fx, gr)?);
            }
        }
        // Roots of even multiplicity: local minima of the smallest singular
        // value that reach zero without a sign change nearby.
        let accept = 1e-7;
        for i in 0..=cells {
            let s = vals[i].1;
            let left_ok = i == 0 || s <= vals[i - 1].1;
            let right_ok = i == cells || s <= vals[i + 1].1;
            let near_sign = (i > 0 && sign_change[i - 1]) || (i < cells && sign_change[i]);
            if !(left_ok && right_ok) || near_sign {
                continue;
            }
            let a = pts[i.saturating_sub(1)];
            let b = pts[(i + 1).min(cells)];
            let tol = 1e-13 * a.abs().max(b.abs()).max(1.0);
            let (x, fx) = brent_min(
                |l| Ok::<f64, Error>(Self::separation(&self.monodromy(l)?, self.theta).powi(2)),
                a,
                b,
                tol,
            )?;
            if fx.sqrt() < accept {
                found.push(x);
            }
        }
        found.sort_by(f64::total_cmp);
        // The detectors overlap, so one root may be reported twice.
        found.dedup_by(|b, a| (*b - *a).abs() <= 1e-10 * a.abs().max(1.0));
        // Cluster nearby roots; a cluster's multiplicity is the kernel
        // dimension at its center, but never less than its member count.
        let mut clusters: Vec<Vec<f64>> = Vec::new();
        for r in found {
            match clusters.last_mut() {
                Some(c) if (r - c[c.len() - 1]).abs() <= 1e-6 * r.abs().max(1.0) => c.push(r),
                _ => clusters.push(vec![r]),
            }
        }
        let mut out = Vec::new();
        for c in clusters {
            let center = c.iter().sum::<f64>() / c.len() as f64;
            let null = self.nullity(center)?;
            out.push(Eigenvalue { lambda: center, multiplicity: null.max(c.len()) });
        }
        Ok(out)
    }
}

/// Eigenvalues in `[λ_lo, λ_hi]` as roots of `λ ↦ det(T(λ) - e^{iθ})`.
///
/// Roots are cross-checked against finite-difference inertia counts in every
/// gap the discretization error can resolve; disagreement triggers grid
/// refinement and, if it persists, [`Error::RootCluster`].
pub fn floquet_spectrum(
    pot: &Potential,
    theta: f64,
    t: f64,
    window: (f64, f64),
    opts: &OracleOptions,
) -> Result<SpectrumResult> {
    check_t(t)?;
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("spectral window must be a finite interval"));
    }
    let fl = Floquet::new(pot, theta, t, lo.abs().max(hi.abs()), opts)?;
    let ell = t * pot.length();
    let base = lo.min(lambda_floor(pot)) - 1.0;
    let span = (hi - base).sqrt() - (lo - base).sqrt();
    let per_unit = 16.0 * pot.n() as f64 * ell / (2.0 * std::f64::consts::PI);
    let mut cells = ((span * per_unit).ceil() as usize).max(64);

    let mut k = opts.fd_grid.max(64);
    while !fd_resolution_ok(pot, t, k, hi.max(0.0) + pot.v_max()) {
        k *= 2;
    }
    let fd = FdOperator::new(pot, theta, t, k);
    for _attempt in 0..3 {
        let eig = fl.roots(lo, hi, cells)?;
        if fd_consistent(&fd, pot, t, k, lo, hi, &eig) {
            return Ok(SpectrumResult { theta, t, window, eigenvalues: eig, method: SpectrumMethod::MonodromyRoots });
        }
        cells *= 4;
    }
    Err(Error::RootCluster { lo, hi })
}

/// Compares Floquet multiplicities against finite-difference counts at the
/// window ends and in the middle of every resolvable gap.
fn fd_consistent(fd: &FdOperator, pot: &Potential, t: f64, k: usize, lo: f64, hi: f64, eig: &[Eigenvalue]) -> bool {
    let mut probes = vec![lo, hi];
    for w in eig.windows(2) {
        probes.push(0.5 * (w[0].lambda + w[1].lambda));
    }
    if let Some(f) = eig.first() {
        probes.push(0.5 * (lo + f.lambda));
    }
    if let Some(l) = eig.last() {
        probes.push(0.5 * (l.lambda + hi));
    }
    let trusted: Vec<f64> = probes
        .into_iter()
        .filter(|&p| {
            let d = eig.iter().map(|e| (e.lambda - p).abs()).fold(f64::INFINITY, f64::min);
            d > 2.0 * fd_error_bound(pot, t, k, p) + 1e-9
        })
        .collect();
    let below = |p: f64| -> usize { eig.iter().filter(|e| e.lambda < p).map(|e| e.multiplicity).sum() };
    // Below the floor both operators have nothing, so counts compare
    // absolutely; otherwise only differences from the lowest probe do.
    let (base_fd, base_fl) = if lo < lambda_floor(pot) {
        (0, 0)
    } else {
        let Some(&first) = trusted.iter().min_by(|a, b| a.total_cmp(b)) else {
            return true;
        };
        (fd.inertia(first), below(first))
    };
    trusted.iter().all(|&p| fd.inertia(p) as i64 - base_fd as i64 == below(p) as i64 - base_fl as i64)
}

/// Spectrum from `λ_∞` up to a little above `r`, enough to count at `r`.
fn spectrum_through(pot: &Potential, theta: f64, t: f64, r: f64, opts: &OracleOptions) -> Result<SpectrumResult> {
    let lo = lambda_infinity(pot);
    let hi = r.max(lo + 1.0) + 0.01 * r.abs().max(1.0);
    floquet_spectrum(pot, theta, t, (lo, hi), opts)
}

/// `N(r, θ)` for `H_θ(t)`.
pub fn count(pot: &Potential, theta: f64, t: f64, r: f64, opts: &OracleOptions) -> Result<usize> {
    spectrum_through(pot, theta, t, r, opts)?.count_below(r, opts.guard_band)
}

/// `N([r₁, r₂), θ) = N(r₂, θ) - N(r₁, θ)`.
pub fn count_interval(pot: &Potential, theta: f64, t: f64, r1: f64, r2: f64, opts: &OracleOptions) -> Result<usize> {
    if !(r1 < r2) {
        return Err(Error::invalid("count_interval needs r1 < r2"));
    }
    let s = spectrum_through(pot, theta, t, r2, opts)?;
    Ok(s.count_below(r2, opts.guard_band)? - s.count_below(r1, opts.guard_band)?)
}

/// Morse index: the number of negative eigenvalues of `H_θ(t)`.
///
/// Eigenvalues within the guard band of zero are zero modes and are not
/// counted, so the index is defined at conjugate points too.
pub fn morse(pot: &Potential, theta: f64, t: f64, opts: &OracleOptions) -> Result<usize> {
    let s = spectrum_through(pot, theta, t, 0.0, opts)?;
    Ok(s.eigenvalues.iter().filter(|e| e.lambda < -opts.guard_band).map(|e| e.multiplicity).sum())
}

/// `dim_ℂ ker(H_θ(t) - λ)` from the monodromy matrix.
pub fn kernel_dimension(pot: &Potential, theta: f64, t: f64, lambda: f64, opts: &OracleOptions) -> Result<usize> {
    let plan = StepPlan::for_range(pot, t, lambda.abs(), opts.integrator_tol)?;
    Ok(monodromy(pot, lambda, t, plan)?.kernel_dim(theta, opts.kernel_tol))
}

/// The lowest `how_many` eigenvalues (with multiplicity) of `H_θ(t)`.
pub fn lowest_eigenvalues(pot: &Potential, theta: f64, t: f64, how_many: usize, opts: &OracleOptions) -> Result<Vec<f64>> {
    let lo = lambda_infinity(pot);
    let ell = t * pot.length();
    let mut hi = lambda_floor(pot) + (2.0 * std::f64::consts::PI / ell).powi(2) * (how_many as f64 / 2.0 + 1.0).powi(2);
    loop {
        let s = floquet_spectrum(pot, theta, t, (lo, hi), opts)?;
        if s.total_multiplicity() > how_many {
            let mut all = s.expanded();
            all.truncate(how_many);
            return Ok(all);
        }
        hi = hi + (hi - lo);
    }
}

// ---------------------------------------------------------------------------
// Eigencurves and dλ/dθ

/// A point on an eigenvalue curve with its normalized boundary data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigencurvePoint {
    pub theta: f64,
    pub lambda: f64,
    /// `u(a)` for the eigenfunction with `‖u‖_{L²} = 1`.
    pub u_a: Vec<(f64, f64)>,
    /// `u'(a)` for the same eigenfunction.
    pub du_a: Vec<(f64, f64)>,
    pub simple: bool,
    /// `‖(T(λ) - e^{iθ}) v‖` for the unit vector `v ∝ (u(a), u'(a))`.
    pub residual: f64,
}

impl EigencurvePoint {
    fn u(&self) -> Vec<Complex<f64>> {
        self.u_a.iter().map(|&(re, im)| Complex::new(re, im)).collect()
    }

    fn du(&self) -> Vec<Complex<f64>> {
        self.du_a.iter().map(|&(re, im)| Complex::new(re, im)).collect()
    }

    /// `(u'(a), u(a))_{ℂⁿ}`, linear in the first slot.
    pub fn boundary_pairing(&self) -> Complex<f64> {
        self.du().iter().zip(self.u()).map(|(d, u)| d * u.conj()).sum()
    }
}

/// Eigenfunction data at a (numerically exact) eigenvalue of `H_θ`.
pub fn eigen_point(pot: &Potential, theta: f64, lambda: f64, plan: StepPlan, opts: &OracleOptions) -> Result<EigencurvePoint> {
    let n = pot.n();
    let tm = monodromy(pot, lambda, 1.0, plan)?;
    let nullity = tm.kernel_dim(theta, opts.kernel_tol);
    let svd = tm.shifted(theta).svd(false, true);
    let sv = &svd.singular_values;
    let (imin, smin) = sv.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let v_t = svd.v_t.expect("right singular vectors requested");
    let v: Vec<Complex<f64>> = v_t.row(imin).iter().map(|z| z.conj()).collect();
    let sys = rescaled_system(pot, lambda, 1.0)?;
    let z0 = DMatrix::from_fn(2 * n, 2, |i, j| if j == 0 { v[i].re } else { v[i].im });
    let g = solution_gram(&sys, plan, &z0, None)?;
    let norm = (g[(0, 0)] + g[(1, 1)]).sqrt();
    let u_a = v[..n].iter().map(|z| (z.re / norm, z.im / norm)).collect();
    let du_a = v[n..].iter().map(|z| (z.re / norm, z.im / norm)).collect();
    Ok(EigencurvePoint { theta, lambda, u_a, du_a, simple: nullity == 1, residual: smin })
}

/// Root of the secular function near `guess`, found by expanding a bracket.
fn polish_near(fl: &Floquet<'_>, guess: f64, width: f64) -> Result<f64> {
    let mut w = width;
    for _ in 0..30 {
        let (a, b) = (guess - w, guess + w);
        let (ga, _) = fl.eval(a)?;
        let (gb, _) = fl.eval(b)?;
        if ga * gb <= 0.0 {
            return fl.polish(a, b, ga, gb);
        }
        w *= 2.0;
    }
    Err(Error::BranchCollision { theta: fl.theta })
}

/// Eigencurve point at `theta` for the simple eigenvalue nearest to `guess`.
pub fn track_point(pot: &Potential, theta: f64, guess: f64, width: f64, opts: &OracleOptions) -> Result<EigencurvePoint> {
    let plan = StepPlan::for_range(pot, 1.0, guess.abs() + width + 1.0, opts.integrator_tol)?;
    let fl = Floquet { pot, theta, t: 1.0, plan, kernel_tol: opts.kernel_tol };
    let lambda = polish_near(&fl, guess, width)?;
    eigen_point(pot, theta, lambda, plan, opts)
}

/// The `k`-th eigenvalue curve (ascending order at the start, from 0) sampled
/// at `steps + 1` equally spaced angles in `theta_range`.
///
/// Continuation uses the previous slope as predictor and a bracketed root
/// polish as corrector; the branch index is confirmed at every point by
/// finite-difference inertia counts, and a lost gap aborts with
/// [`Error::BranchCollision`].
pub fn eigencurve(
    pot: &Potential,
    k: usize,
    theta_range: (f64, f64),
    steps: usize,
    opts: &OracleOptions,
) -> Result<Vec<EigencurvePoint>> {
    if steps == 0 {
        return Err(Error::invalid("eigencurve needs at least one step"));
    }
    let (th0, th1) = theta_range;
    let start = lowest_eigenvalues(pot, th0, 1.0, k + 2, opts)?;
    let lam0 = start[k];
    let gap = |i: usize| (start[i + 1] - start[i]).abs();
    if gap(k) < 1e-6 || (k > 0 && gap(k - 1) < 1e-6) {
        return Err(Error::BranchCollision { theta: th0 });
    }
    let lam_bound = 2.0 * start[k + 1].abs() + pot.v_max() + 4.0;
    let plan = StepPlan::for_range(pot, 1.0, lam_bound, opts.integrator_tol)?;
    let mut kfd = opts.fd_grid.max(64);
    while !fd_resolution_ok(pot, 1.0, kfd, lam_bound + pot.v_max()) {
        kfd *= 2;
    }
    let dth = (th1 - th0) / steps as f64;
    let inertia_ok = |theta: f64, lam: f64| {
        let fd = FdOperator::new(pot, theta, 1.0, kfd);
        let band = (3.0 * fd_error_bound(pot, 1.0, kfd, lam)).max(1e-6);
        fd.inertia(lam - band) == k && fd.inertia(lam + band) == k + 1
    };
    // One predictor-corrector step, accepted only if the inertia count still
    // places the root on branch k.
    let step = |from: f64, lam: f64, slope: f64, to: f64| -> Result<f64> {
        let h = to - from;
        let pred = lam + slope * h;
        let width = (0.25 * (slope * h).abs()).max(1e-6 * pred.abs().max(1.0));
        let fl = Floquet { pot, theta: to, t: 1.0, plan, kernel_tol: opts.kernel_tol };
        let next = polish_near(&fl, pred, width)?;
        if inertia_ok(to, next) { Ok(next) } else { Err(Error::BranchCollision { theta: to }) }
    };
    if !inertia_ok(th0, lam0) {
        return Err(Error::BranchCollision { theta: th0 });
    }
    let mut out: Vec<EigencurvePoint> = Vec::with_capacity(steps + 1);
    let mut lam = lam0;
    let mut slope = 0.0;
    for j in 0..=steps {
        let theta = th0 + dth * j as f64;
        if j > 0 {
            // Coarse sample spacing can carry the predictor onto a
            // neighbouring branch; retry with successively halved substeps.
            let from = theta - dth;
            let mut pieces = 1usize;
            lam = loop {
                let h = dth / pieces as f64;
                let (mut at, mut l, mut sl) = (from, lam, slope);
                let walked = (1..=pieces).try_for_each(|i| {
                    let to = if i == pieces { theta } else { from + h * i as f64 };
                    let next = step(at, l, sl, to)?;
                    sl = (next - l) / (to - at);
                    (at, l) = (to, next);
                    Ok::<(), Error>(())
                });
                match walked {
                    Ok(()) => break l,
                    Err(Error::BranchCollision { .. }) if pieces < 1024 => pieces *= 2,
                    Err(e) => return Err(e),
                }
            };
        }
        let p = eigen_point(pot, theta, lam, plan, opts)?;
        if !p.simple {
            return Err(Error::BranchCollision { theta });
        }
        if let Some(prev) = out.last() {
            slope = (p.lambda - prev.lambda) / dth;
        } else {
            slope = 2.0 * p.boundary_pairing().im;
        }
        out.push(p);
    }
    Ok(out)
}

/// `dλ/dθ` at an eigencurve point by three independent routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeTriple {
    /// `2 Im(u'(a), u(a))`.
    pub boundary: f64,
    /// Minus the θ-crossing form evaluated on the trace of the normalized
    /// realified eigenfunction.
    pub crossing_form: f64,
    /// Centered difference of the curve with step `1e-3`.
    pub finite_difference: f64,
}

impl SlopeTriple {
    /// Largest pairwise disagreement.
    pub fn spread(&self) -> f64 {
        let v = [self.boundary, self.crossing_form, self.finite_difference];
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Realified trace vector `(y(a), y(b), -y'(a), y'(b))` of the eigenfunction,
/// with `y(b) = (I⊗M_θ) y(a)` and `y'(b) = (I⊗M_θ) y'(a)`.
pub fn eigen_trace(point: &EigencurvePoint) -> DMatrix<f64> {
    let n = point.u_a.len();
    let m = 2 * n;
    let (s, c) = point.theta.sin_cos();
    let mut h = DMatrix::zeros(4 * m, 1);
    for k in 0..n {
        let (ur, ui) = point.u_a[k];
        let (dr, di) = point.du_a[k];
        h[(2 * k, 0)] = ur;
        h[(2 * k + 1, 0)] = ui;
        h[(m + 2 * k, 0)] = c * ur - s * ui;
        h[(m + 2 * k + 1, 0)] = s * ur + c * ui;
        h[(2 * m + 2 * k, 0)] = -dr;
        h[(2 * m + 2 * k + 1, 0)] = -di;
        h[(3 * m + 2 * k, 0)] = c * dr - s * di;
        h[(3 * m + 2 * k + 1, 0)] = s * dr + c * di;
    }
    h
}

pub fn dlambda_dtheta(pot: &Potential, point: &EigencurvePoint, opts: &OracleOptions) -> Result<SlopeTriple> {
    if !point.simple {
        return Err(Error::invalid("dλ/dθ needs a simple eigenvalue"));
    }
    let n = pot.n();
    let sys = rescaled_system(pot, point.lambda, 1.0)?;
    let plan = StepPlan::for_range(pot, 1.0, point.lambda.abs() + 1.0, opts.integrator_tol)?;
    // Normalization check: the attached data must be L²-normalized.
    let z0 = DMatrix::from_fn(2 * n, 2, |i, j| {
        let (re, im) = if i < n { point.u_a[i] } else { point.du_a[i - n] };
        if j == 0 { re } else { im }
    });
    let g = solution_gram(&sys, plan, &z0, None)?;
    let norm2 = g[(0, 0)] + g[(1, 1)];
    if (norm2 - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!("eigenfunction is not normalized (‖u‖² = {norm2})")));
    }
    let boundary = 2.0 * point.boundary_pairing().im;
    let q = theta_form(n, &eigen_trace(point));
    let crossing_form = -q[(0, 0)];
    let delta = 1e-3;
    let mut side = [0.0; 2];
    for (i, sgn) in [-1.0, 1.0].into_iter().enumerate() {
        let fl = Floquet { pot, theta: point.theta + sgn * delta, t: 1.0, plan, kernel_tol: opts.kernel_tol };
        let guess = point.lambda + sgn * delta * boundary;
        side[i] = polish_near(&fl, guess, 1e-7 * point.lambda.abs().max(1.0))?;
    }
    let finite_difference = (side[1] - side[0]) / (2.0 * delta);
    Ok(SlopeTriple { boundary, crossing_form, finite_difference })
}

/// Wronskian `W(u, ū)(a) = u'(a)ū(a) - u(a)ū'(a)` of a scalar eigenfunction.
///
/// Equals `2i Im(u'(a) ū(a)) = i dλ/dθ` for a normalized eigenfunction.
pub fn wronskian_check(point: &EigencurvePoint) -> Result<Complex<f64>> {
    if point.u_a.len() != 1 {
        return Err(Error::invalid("the Wronskian check is defined for n = 1"));
    }
    let u = Complex::new(point.u_a[0].0, point.u_a[0].1);
    let du = Complex::new(point.du_a[0].0, point.du_a[0].1);
    Ok(du * u.conj() - u * du.conj())
}

// ---------------------------------------------------------------------------
// Bands and level sets

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    /// One-based band index.
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// Band edges from the periodic (`θ = 0`) and antiperiodic (`θ = π`)
/// spectra: band `k` spans the `k`-th eigenvalues of the two problems.
pub fn bands(pot: &Potential, k_max: usize, opts: &OracleOptions) -> Result<Vec<Band>> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let per = lowest_eigenvalues(pot, 0.0, 1.0, k_max, opts)?;
    let anti = lowest_eigenvalues(pot, std::f64::consts::PI, 1.0, k_max, opts)?;
    Ok((0..k_max)
        .map(|i| Band { k: i + 1, alpha: per[i].min(anti[i]), beta: per[i].max(anti[i]) })
        .collect())
}

/// Angles `θ ∈ [0, 2π)` at which `r` is an eigenvalue of `H_θ(t)`, with the
/// kernel dimensions: the unit-circle eigenvalues of `T(r)`.
pub fn level_set(pot: &Potential, r: f64, t: f64, opts: &OracleOptions) -> Result<Vec<(f64, usize)>> {
    check_t(t)?;
    let plan = StepPlan::for_range(pot, t, r.abs(), opts.integrator_tol)?;
    let tm = monodromy(pot, r, t, plan)?;
    let cells = 1440;
    let two_pi = 2.0 * std::f64::consts::PI;
    let eval = |th: f64| -> (f64, f64) {
        (Floquet::secular(&tm, th), Floquet::separation(&tm, th))
    };
    let pts: Vec<f64> = (0..=cells).map(|i| two_pi * i as f64 / cells as f64).collect();
    let vals: Vec<(f64, f64)> = pts.iter().map(|&x| eval(x)).collect();
    let mut found = Vec::new();
    for i in 0..cells {
        let (ga, gb) = (vals[i].0, vals[i + 1].0);
        if ga == 0.0 {
            found.push(pts[i]);
        } else if ga * gb < 0.0 {
            found.push(brent_root(|x| Ok::<f64, ()>(eval(x).0), pts[i], pts[i + 1], ga, gb, 1e-13).unwrap_or(pts[i]));
        }
    }
    for i in 0..cells {
        let prev = vals[(i + cells - 1) % cells].1;
        if vals[i].1 <= prev && vals[i].1 <= vals[i + 1].1 {
            let (x, fx) = brent_min(|x| Ok::<f64, ()>(eval(x).1.powi(2)), pts[i] - two_pi / cells as f64, pts[i + 1], 1e-13)
                .unwrap_or((pts[i], 1.0));
            if fx.sqrt() < 1e-7 {
                found.push(x.rem_euclid(two_pi));
            }
        }
    }
    found.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for th in found {
        let dup = out.iter().any(|&(o, _)| {
            let d = (o - th).abs();
            d.min(two_pi - d) < 1e-6
        });
        if !dup {
            out.push((th, tm.kernel_dim(th, opts.kernel_tol)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn free() -> Potential {
        Potential::free(1, (0.0, 2.0 * PI)).unwrap()
    }

    #[test]
    fn ldl_counts_negative_eigenvalues() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]).map(|x| Complex::new(x, 0.0));
        let (neg, inv) = hermitian_ldl(&a);
        assert_eq!(neg, 1);
        assert!((&a * inv - DMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn fd_free_spectrum() {
        let s = fd_spectrum(&free(), PI / 2.0, 1.0, 2000, 2.0).unwrap();
        let ev: Vec<f64> = s.expanded();
        for (got, want) in ev.iter().zip([0.0625, 0.5625, 1.5625]) {
            assert!((got - want).abs() / want < 1e-4, "{got} vs {want}");
        }
        let s0 = fd_spectrum(&free(), 0.0, 1.0, 2000, 2.0).unwrap();
        assert_eq!(s0.eigenvalues[1].multiplicity, 2);
    }

    #[test]
    fn fd_guard_rejects_coarse_grids() {
        assert!(fd_spectrum(&free(), 0.3, 1.0, 64, 1000.0).is_err());
        assert!(fd_spectrum(&free(), 0.3, 1.0, 32, 1.0).is_err());
    }

    #[test]
    fn floquet_free_roots_and_multiplicity() {
        let opts = OracleOptions::default();
        let s = floquet_spectrum(&free(), PI / 2.0, 1.0, (0.0, 2.0), &opts).unwrap();
        let ev = s.expanded();
        assert_eq!(ev.len(), 3);
        for (got, want) in ev.iter().zip([1.0 / 16.0, 9.0 / 16.0, 25.0 / 16.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        let s0 = floquet_spectrum(&free(), 0.0, 1.0, (0.5, 1.5), &opts).unwrap();
        assert_eq!(s0.eigenvalues.len(), 1);
        assert_eq!(s0.eigenvalues[0].multiplicity, 2);
    }

    #[test]
    fn counts_and_guard_band() {
        let opts = OracleOptions::default();
        assert_eq!(count(&free(), PI / 2.0, 1.0, 1.0, &opts).unwrap(), 2);
        assert_eq!(count(&free(), PI / 4.0, 1.0, 0.6, &opts).unwrap(), 1);
        assert!(matches!(
            count(&free(), PI / 2.0, 1.0, 0.0625 + 1e-9, &opts),
            Err(Error::CutoffOnEigenvalue { .. })
        ));
        let well = Potential::constant(DMatrix::from_element(1, 1, -5.0), (-PI, PI)).unwrap();
        assert_eq!(morse(&well, 0.0, 1.0, &opts).unwrap(), 5);
        assert_eq!(morse(&well, 0.0, 0.3, &opts).unwrap(), 1);
    }

    #[test]
    fn free_eigencurve_and_slopes() {
        let opts = OracleOptions::default();
        let pts = eigencurve(&free(), 0, (PI / 4.0, PI / 2.0), 4, &opts).unwrap();
        let last = pts.last().unwrap();
        assert!((last.lambda - 1.0 / 16.0).abs() < 1e-10);
        assert!(last.residual < 1e-8);
        let s = dlambda_dtheta(&free(), last, &opts).unwrap();
        let exact = 1.0 / (4.0 * PI);
        assert!((s.boundary - exact).abs() < 1e-8, "{s:?}");
        assert!((s.crossing_form - exact).abs() < 1e-8, "{s:?}");
        assert!((s.finite_difference - exact).abs() < 1e-8, "{s:?}");
        let w = wronskian_check(last).unwrap();
        assert!((w.im - exact).abs() < 1e-8 && w.re.abs() < 1e-12);
    }

    #[test]
    fn free_bands_touch() {
        let b = bands(&free(), 4, &OracleOptions::default()).unwrap();
        let want = [(0.0, 0.25), (0.25, 1.0), (1.0, 2.25), (2.25, 4.0)];
        for (band, (a, bb)) in b.iter().zip(want) {
            assert!((band.alpha - a).abs() < 1e-9 && (band.beta - bb).abs() < 1e-9, "{band:?}");
        }
    }

    #[test]
    fn level_set_of_free_operator() {
        // r = 0.36: μ = ±0.6 gives θ = ±1.2π (mod 2π).
        let ls = level_set(&free(), 0.36, 1.0, &OracleOptions::default()).unwrap();
        assert_eq!(ls.len(), 2);
        let total: usize = ls.iter().map(|x| x.1).sum();
        assert_eq!(total, 2);
        assert!(ls.iter().any(|&(th, _)| (th - 0.8 * PI).abs() < 1e-9));
    }
}
