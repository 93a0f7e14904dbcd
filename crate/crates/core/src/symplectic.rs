//! Real symplectic linear algebra: the form ω, Lagrangian frames, their
//! intersections, the Souriau map and the doubled space used for two-path
//! Maslov indices.
//!
//! Complex structure. The space `(ℝ^{2m}, ω)` with `ω(p,q) = (p, Ωq)` is
//! made complex by letting `i` act as `Ω`. With this choice `ω(p, Ωq)` is
//! symmetric and positive, and a Lagrangian plane `X` with an orthonormal
//! basis `x_1..x_m` is a totally real complement of `ΩX`, so the `x_j` form a
//! complex basis of the whole space. The Souriau matrix is the matrix of
//! `S_X(Y)` in that basis.

use nalgebra::{self as na, Complex, DMatrix, DVector};
use rand::Rng;

use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// `Ω = J ⊗ I_m`, i.e. `[[0, I], [-I, 0]]`.
    Standard,
    /// `Ω ⊕ (-Ω)` on `ℝ^{2m} ⊕ ℝ^{2m}` built from a standard space.
    Doubled,
}

/// A symplectic vector space with an orthogonal form matrix.
///
/// Only the shape is stored; [`SymplecticSpace::omega_matrix`] materializes Ω
/// and [`SymplecticSpace::apply_omega`] applies it without forming it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymplecticSpace<T = f64> {
    half_dim: usize,
    kind: SpaceKind,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real> SymplecticSpace<T> {
    pub fn standard(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("symplectic half-dimension must be positive"));
        }
        Ok(Self { half_dim: m, kind: SpaceKind::Standard, _scalar: Default::default() })
    }

    /// The doubled space `(ℝ^{2m} ⊕ ℝ^{2m}, ω ⊕ (-ω))`.
    pub fn doubled(&self) -> Result<Self> {
        match self.kind {
            SpaceKind::Standard => Ok(Self {
                half_dim: 2 * self.half_dim,
                kind: SpaceKind::Doubled,
                _scalar: Default::default(),
            }),
            SpaceKind::Doubled => Err(Error::WrongSpaceKind("cannot double a doubled space")),
        }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn omega_matrix(&self) -> DMatrix<T> {
        let d = self.dim();
        self.apply_omega(&DMatrix::identity(d, d))
    }

    /// `Ω v` for every column `v` of `v`.
    pub fn apply_omega(&self, v: &DMatrix<T>) -> DMatrix<T> {
        assert_eq!(v.nrows(), self.dim(), "vector length does not match the space");
        let mut out = DMatrix::zeros(v.nrows(), v.ncols());
        match self.kind {
            SpaceKind::Standard => standard_omega_into(v, 0, self.half_dim, T::one(), &mut out),
            SpaceKind::Doubled => {
                let m = self.half_dim / 2;
                standard_omega_into(v, 0, m, T::one(), &mut out);
                standard_omega_into(v, 2 * m, m, -T::one(), &mut out);
            }
        }
        out
    }

    /// `ω(p, q) = (p, Ω q)`.
    pub fn form(&self, p: &DVector<T>, q: &DVector<T>) -> T {
        let q = DMatrix::from_column_slice(q.len(), 1, q.as_slice());
        p.dot(&self.apply_omega(&q).column(0))
    }

    /// Gram matrix `ω(a_i, b_j)` of two families of vectors.
    pub fn form_matrix(&self, a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
        a.transpose() * self.apply_omega(b)
    }
}

// Writes `sign · (J ⊗ I_m)` applied to rows `offset..offset+2m` of `v`.
fn standard_omega_into<T: Real>(v: &DMatrix<T>, offset: usize, m: usize, sign: T, out: &mut DMatrix<T>) {
    for c in 0..v.ncols() {
        for i in 0..m {
            out[(offset + i, c)] = sign * v[(offset + m + i, c)];
            out[(offset + m + i, c)] = -sign * v[(offset + i, c)];
        }
    }
}

pub fn make_standard_space<T: Real>(m: usize) -> Result<SymplecticSpace<T>> {
    SymplecticSpace::standard(m)
}

pub fn double_space<T: Real>(s: &SymplecticSpace<T>) -> Result<SymplecticSpace<T>> {
    s.doubled()
}

/// A Lagrangian plane stored as an orthonormal `2m × m` frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame<T = f64> {
    space: SymplecticSpace<T>,
    columns: DMatrix<T>,
}

impl<T: Real> LagrangianFrame<T> {
    /// Orthonormalizes `a` and checks rank and isotropy with the default tolerances.
    pub fn new(space: SymplecticSpace<T>, a: &DMatrix<T>) -> Result<Self> {
        Self::with_tolerances(space, a, T::lit(T::RANK_TOL), T::lit(T::ISOTROPY_TOL))
    }

    pub fn with_tolerances(space: SymplecticSpace<T>, a: &DMatrix<T>, rank_tol: T, isotropy_tol: T) -> Result<Self> {
        let m = space.half_dim();
        if a.nrows() != space.dim() || a.ncols() != m {
            return Err(Error::invalid(format!(
                "frame has shape {}x{}, expected {}x{}",
                a.nrows(),
                a.ncols(),
                space.dim(),
                m
            )));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotLagrangian("frame has non-finite entries".into()));
        }
        let svd = a.clone().svd(true, false);
        let sv = &svd.singular_values;
        let smax = sv.max();
        let smin = sv.min();
        if smax <= T::zero() || smin <= rank_tol * smax {
            return Err(Error::NotLagrangian(format!(
                "rank deficient frame (singular values {:e}..{:e})",
                smin.as_f64(),
                smax.as_f64()
            )));
        }
        let columns = svd.u.expect("left singular vectors requested");
        let frame = Self { space, columns };
        let iso = frame.isotropy_defect();
        if iso > isotropy_tol {
            return Err(Error::NotLagrangian(format!("isotropy defect {:e}", iso.as_f64())));
        }
        Ok(frame)
    }

    /// Wraps columns that are already orthonormal and Lagrangian.
    pub(crate) fn from_orthonormal_unchecked(space: SymplecticSpace<T>, columns: DMatrix<T>) -> Self {
        debug_assert_eq!(columns.shape(), (space.dim(), space.half_dim()));
        Self { space, columns }
    }

    pub fn space(&self) -> &SymplecticSpace<T> {
        &self.space
    }

    pub fn columns(&self) -> &DMatrix<T> {
        &self.columns
    }

    /// `max |AᵀΩA|`; zero for an exactly Lagrangian frame.
    pub fn isotropy_defect(&self) -> T {
        self.space.form_matrix(&self.columns, &self.columns).amax()
    }

    pub fn projector(&self) -> DMatrix<T> {
        &self.columns * self.columns.transpose()
    }

    /// Direct sum `X ⊕ Y` in the doubled space of `X`'s space.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::invalid("direct sum of frames from different spaces"));
        }
        let space = self.space.doubled()?;
        let (d, m) = self.columns.shape();
        let mut c = DMatrix::zeros(2 * d, 2 * m);
        c.view_mut((0, 0), (d, m)).copy_from(&self.columns);
        c.view_mut((d, m), (d, m)).copy_from(&other.columns);
        Ok(Self { space, columns: c })
    }
}

/// The diagonal `Δ = {(p, p)}` of a doubled space.
pub fn diagonal_plane<T: Real>(s: &SymplecticSpace<T>) -> Result<LagrangianFrame<T>> {
    if s.kind() != SpaceKind::Doubled {
        return Err(Error::WrongSpaceKind("the diagonal plane lives in a doubled space"));
    }
    let m = s.half_dim();
    let scale = T::one() / T::lit(2.0).sqrt();
    let mut c = DMatrix::zeros(2 * m, m);
    for i in 0..m {
        c[(i, i)] = scale;
        c[(m + i, i)] = scale;
    }
    Ok(LagrangianFrame::from_orthonormal_unchecked(*s, c))
}

/// Orthonormal basis of `span(A) ∩ span(B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionBasis<T = f64> {
    /// `2m × dim_real`, orthonormal columns.
    pub vectors: DMatrix<T>,
    pub dim_real: usize,
    /// Singular values of `[A | -B]`, descending.
    pub singular_values: Vec<T>,
}

fn stacked<T: Real>(a: &LagrangianFrame<T>, b: &LagrangianFrame<T>) -> Result<DMatrix<T>> {
    if a.space != b.space {
        return Err(Error::invalid("frames live in different spaces"));
    }
    let (d, m) = a.columns.shape();
    let mut mat = DMatrix::zeros(d, 2 * m);
    mat.view_mut((0, 0), (d, m)).copy_from(&a.columns);
    mat.view_mut((0, m), (d, m)).copy_from(&(-&b.columns));
    Ok(mat)
}

fn sorted_desc<T: Real>(v: &DVector<T>) -> Vec<T> {
    let mut s: Vec<T> = v.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Smallest singular value of `[A | -B]`; zero exactly when the planes meet.
pub fn separation<T: Real>(a: &LagrangianFrame<T>, b: &LagrangianFrame<T>) -> Result<T> {
    let mat = stacked(a, b)?;
    Ok(mat.singular_values().min())
}

/// Intersection of two Lagrangian planes as the null space of `[A | -B]`.
///
/// Singular values below `tol · σ_max` count as zero. A singular value within
/// a factor 10 of that threshold makes the rank undecidable and is reported as
/// [`Error::Borderline`].
pub fn intersect<T: Real>(a: &LagrangianFrame<T>, b: &LagrangianFrame<T>, tol: T) -> Result<IntersectionBasis<T>> {
    let mat = stacked(a, b)?;
    let (d, m) = a.columns.shape();
    let svd = mat.svd(false, true);
    let sv = sorted_desc(&svd.singular_values);
    let threshold = tol * sv[0];
    let ten = T::lit(10.0);
    if let Some(&s) = sv.iter().find(|&&s| s > threshold / ten && s < threshold * ten) {
        return Err(Error::Borderline { sigma: s.as_f64(), threshold: threshold.as_f64() });
    }
    let v_t = svd.v_t.expect("right singular vectors requested");
    let null_rows: Vec<usize> = (0..v_t.nrows()).filter(|&i| svd.singular_values[i] <= threshold).collect();
    let k = null_rows.len();
    let mut w = DMatrix::zeros(d, k);
    let scale = T::one() / T::lit(2.0).sqrt();
    for (col, &row) in null_rows.iter().enumerate() {
        let v = v_t.row(row).transpose();
        let alpha = v.rows(0, m);
        let beta = v.rows(m, m);
        let x = (&a.columns * alpha + &b.columns * beta) * scale;
        w.set_column(col, &x);
    }
    let vectors = if k > 0 { w.qr().q() } else { w };
    Ok(IntersectionBasis { vectors, dim_real: k, singular_values: sv })
}

/// The Souriau map `S_X(Y) = (I - 2P_Y)(2P_X - I)` written as a complex
/// `m × m` matrix in an orthonormal basis of the basepoint `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct SouriauMatrix<T: Real = f64> {
    pub u: DMatrix<Complex<T>>,
}

impl<T: Real> SouriauMatrix<T> {
    pub fn unitarity_defect(&self) -> T {
        let m = self.u.nrows();
        let e = self.u.adjoint() * &self.u - DMatrix::<Complex<T>>::identity(m, m);
        e.iter().map(|z| na::ComplexField::modulus(*z)).fold(T::zero(), |a, b| a.max(b))
    }

    /// Eigenphases `φ_k ∈ (-π, π]` of the unitary matrix.
    ///
    /// A Cayley transform with its pole in the widest gap of the spectrum
    /// turns `U` into a Hermitian matrix, so only Hermitian eigensolvers are
    /// needed. (A complex Schur iteration stalls on the nearly scalar matrices
    /// that occur near `U = -I`.)
    pub fn eigenphases(&self) -> Result<Vec<T>> {
        let m = self.u.nrows();
        let half = Complex::new(T::lit(0.5), T::zero());
        let h = (&self.u + self.u.adjoint()) * half;
        let cosines = na::SymmetricEigen::new(h).eigenvalues;
        let two_pi = T::two_pi();
        let mut cand: Vec<T> = Vec::with_capacity(2 * m);
        for &c in cosines.iter() {
            let a = c.max(-T::one()).min(T::one()).acos();
            cand.push(a);
            cand.push(two_pi - a);
        }
        cand.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        let mut best = (cand[0] + two_pi - cand[cand.len() - 1], cand[cand.len() - 1]);
        for w in cand.windows(2) {
            if w[1] - w[0] > best.0 {
                best = (w[1] - w[0], w[0]);
            }
        }
        let alpha = best.1 + best.0 * T::lit(0.5);
        let rot = Complex::new(alpha.cos(), -alpha.sin());
        let w = &self.u * rot;
        let id = DMatrix::<Complex<T>>::identity(m, m);
        let inv = (&id - &w)
            .try_inverse()
            .ok_or_else(|| Error::invalid("Cayley transform of the Souriau matrix is singular"))?;
        let a = (&id + &w) * inv * Complex::new(T::zero(), T::one());
        let a = (&a + a.adjoint()) * half;
        let vals = na::SymmetricEigen::new(a).eigenvalues;
        Ok(vals
            .iter()
            .map(|&v| wrap_angle(alpha + T::lit(2.0) * T::one().atan2(-v)))
            .collect())
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex<T>>> {
        Ok(self.eigenphases()?.into_iter().map(|p| Complex::new(p.cos(), p.sin())).collect())
    }

    /// Eigenphases measured clockwise from `-1`, wrapped to `(-π, π]`.
    ///
    /// An eigenvalue `e^{i(π - d)}` has offset `d`, so `d = 0` means `-1`.
    pub fn offsets_from_minus_one(&self) -> Result<Vec<T>> {
        let pi = T::pi();
        Ok(self.eigenphases()?.into_iter().map(|p| wrap_angle(pi - p)).collect())
    }

    /// Number of eigenvalues within angular distance `delta` of `-1`.
    pub fn minus_one_multiplicity(&self, delta: T) -> Result<usize> {
        Ok(self.offsets_from_minus_one()?.iter().filter(|d| d.abs() <= delta).count())
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let x = a - two_pi * ((a + T::pi()) / two_pi).floor();
    if x <= -T::pi() { x + two_pi } else { x }
}

/// Complexified Souriau map of `y` relative to the basepoint `x`.
pub fn souriau_map<T: Real>(x: &LagrangianFrame<T>, y: &LagrangianFrame<T>) -> Result<SouriauMatrix<T>> {
    if x.space != y.space {
        return Err(Error::invalid("frames live in different spaces"));
    }
    // S X = (I - 2YYᵀ) X, so with C = YᵀX and D = XᵀΩY:
    //   XᵀSX = I - 2CᵀC   and   -XᵀΩSX = 2DC   (XᵀΩX = 0).
    let c = y.columns.transpose() * &x.columns;
    let d = x.space.form_matrix(&x.columns, &y.columns);
    let m = c.nrows();
    let re = DMatrix::<T>::identity(m, m) - (c.transpose() * &c) * T::lit(2.0);
    let im = (d * &c) * T::lit(2.0);
    let u = DMatrix::from_fn(m, m, |i, j| Complex::new(re[(i, j)], im[(i, j)]));
    let out = SouriauMatrix { u };
    let defect = out.unitarity_defect();
    let tol = T::lit(T::ISOTROPY_TOL.max(1e-8));
    if defect > tol {
        return Err(Error::NotLagrangian(format!("Souriau matrix is not unitary (defect {:e})", defect.as_f64())));
    }
    Ok(out)
}

/// Gap distance `‖P_X - P_Y‖₂` between two planes.
pub fn gap_distance<T: Real>(x: &LagrangianFrame<T>, y: &LagrangianFrame<T>) -> T {
    (x.projector() - y.projector()).singular_values().max()
}

/// Random orthonormal Lagrangian frame of a standard space: the realification
/// `[Re W; Im W]` of a random unitary `W`.
pub fn random_frame<T: Real, R: Rng + ?Sized>(space: SymplecticSpace<T>, rng: &mut R) -> Result<LagrangianFrame<T>> {
    if space.kind() != SpaceKind::Standard {
        return Err(Error::WrongSpaceKind("random frames are drawn in a standard space"));
    }
    let m = space.half_dim();
    let g = DMatrix::<Complex<f64>>::from_fn(m, m, |_, _| {
        Complex::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
    });
    let w = g.qr().q();
    let a = DMatrix::from_fn(2 * m, m, |i, j| if i < m { T::lit(w[(i, j)].re) } else { T::lit(w[(i - m, j)].im) });
    LagrangianFrame::new(space, &a)
}

/// Random pair of Lagrangian planes meeting in exactly `k` dimensions.
///
/// `Y` is spanned by `cos φ_j x_j + sin φ_j Ω x_j` with `φ_j = 0` for `j < k`
/// and `φ_j` well inside `(0, π)` otherwise; both frames are then mixed by
/// random changes of basis so that nothing about the construction is visible
/// in the columns.
pub fn random_pair_with_intersection<T: Real, R: Rng + ?Sized>(
    space: SymplecticSpace<T>,
    k: usize,
    rng: &mut R,
) -> Result<(LagrangianFrame<T>, LagrangianFrame<T>)> {
    let m = space.half_dim();
    if k > m {
        return Err(Error::invalid("intersection dimension exceeds the half-dimension"));
    }
    let x = random_frame(space, rng)?;
    let xc = x.columns();
    let oxc = space.apply_omega(xc);
    let mut y = DMatrix::zeros(2 * m, m);
    for j in 0..m {
        let phi = if j < k { 0.0 } else { 0.3 + rng.random::<f64>() * (std::f64::consts::PI - 0.6) };
        let (s, c) = phi.sin_cos();
        let col = xc.column(j) * T::lit(c) + oxc.column(j) * T::lit(s);
        y.set_column(j, &col);
    }
    let mix_x = random_orthogonal::<T, R>(m, rng);
    let mix_y = DMatrix::from_fn(m, m, |i, j| {
        T::lit(rng.random::<f64>() - 0.5) + if i == j { T::lit(2.0) } else { T::zero() }
    });
    let x2 = LagrangianFrame::new(space, &(xc * mix_x))?;
    let y2 = LagrangianFrame::new(space, &(y * mix_y))?;
    Ok((x2, y2))
}

fn random_orthogonal<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<T> {
    let g = DMatrix::<f64>::from_fn(m, m, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    g.qr().q().map(T::lit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_omega_is_complex_structure() {
        for m in 1..5 {
            let s = make_standard_space::<f64>(m).unwrap();
            let o = s.omega_matrix();
            assert_eq!(&o + o.transpose(), DMatrix::zeros(2 * m, 2 * m));
            assert_eq!(&o * &o, -DMatrix::<f64>::identity(2 * m, 2 * m));
        }
        let o = make_standard_space::<f64>(1).unwrap().omega_matrix();
        assert_eq!(o, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn doubled_omega_is_block_diagonal() {
        let s = make_standard_space::<f64>(1).unwrap();
        let d = double_space(&s).unwrap();
        assert_eq!(d.half_dim(), 2);
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0],
        );
        assert_eq!(d.omega_matrix(), expected);
        assert!(matches!(double_space(&d), Err(Error::WrongSpaceKind(_))));
    }

    #[test]
    fn diagonal_is_lagrangian() {
        let s = make_standard_space::<f64>(1).unwrap().doubled().unwrap();
        let delta = diagonal_plane(&s).unwrap();
        assert_eq!(delta.isotropy_defect(), 0.0);
        let c = delta.columns() * 2f64.sqrt();
        assert_eq!(c.column(0).as_slice(), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(c.column(1).as_slice(), &[0.0, 1.0, 0.0, 1.0]);
        assert!(diagonal_plane(&make_standard_space::<f64>(2).unwrap()).is_err());
    }

    #[test]
    fn transversal_and_identical_lines() {
        let s = make_standard_space::<f64>(1).unwrap();
        let a = LagrangianFrame::new(s, &DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let b = LagrangianFrame::new(s, &DMatrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        assert_eq!(intersect(&a, &b, 1e-9).unwrap().dim_real, 0);
        assert_eq!(intersect(&a, &a, 1e-9).unwrap().dim_real, 1);
        let u = souriau_map(&a, &b).unwrap();
        assert_eq!(u.minus_one_multiplicity(1e-8).unwrap(), 0);
        let u = souriau_map(&a, &a).unwrap();
        assert!((u.u[(0, 0)] - Complex::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_lagrangian_frames() {
        let s = make_standard_space::<f64>(2).unwrap();
        // span(e1, e3) pairs p1 with q1, so ω does not vanish on it.
        let a = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(LagrangianFrame::new(s, &a), Err(Error::NotLagrangian(_))));
        let rank1 = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
        assert!(matches!(LagrangianFrame::new(s, &rank1), Err(Error::NotLagrangian(_))));
    }

    #[test]
    fn borderline_singular_value_is_reported() {
        let s = make_standard_space::<f64>(1).unwrap();
        let a = LagrangianFrame::new(s, &DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let eps = 1e-9;
        let b = LagrangianFrame::new(s, &DMatrix::from_column_slice(2, 1, &[1.0, eps])).unwrap();
        assert!(matches!(intersect(&a, &b, 1e-9), Err(Error::Borderline { .. })));
        assert_eq!(intersect(&a, &b, 1e-6).unwrap().dim_real, 1);
        assert_eq!(intersect(&a, &b, 1e-12).unwrap().dim_real, 0);
    }

    #[test]
    fn rotating_line_passes_minus_one_clockwise() {
        // Y(t) = span(cos t, sin t) has a positive crossing form against
        // X = span(e1) at t = 0, and its eigenvalue is e^{i(π - 2t)}.
        let s = make_standard_space::<f64>(1).unwrap();
        let x = LagrangianFrame::new(s, &DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        for &t in &[-0.3f64, 0.1, 0.7] {
            let y = LagrangianFrame::new(s, &DMatrix::from_column_slice(2, 1, &[t.cos(), t.sin()])).unwrap();
            let d = souriau_map(&x, &y).unwrap().offsets_from_minus_one().unwrap()[0];
            assert!((d - 2.0 * t).abs() < 1e-12, "t={t} d={d}");
        }
    }

    #[test]
    fn random_pairs_have_prescribed_intersections() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [2usize, 4, 8] {
            let s = make_standard_space::<f64>(m).unwrap();
            for k in 0..=m {
                let (x, y) = random_pair_with_intersection(s, k, &mut rng).unwrap();
                let basis = intersect(&x, &y, 1e-9).unwrap();
                assert_eq!(basis.dim_real, k);
                let px = x.projector();
                let py = y.projector();
                for j in 0..k {
                    let v = basis.vectors.column(j).into_owned();
                    assert!((&px * &v - &v).amax() < 1e-10);
                    assert!((&py * &v - &v).amax() < 1e-10);
                }
                assert_eq!(souriau_map(&x, &y).unwrap().minus_one_multiplicity(1e-6).unwrap(), k);
            }
        }
    }

    #[test]
    fn gap_distance_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = make_standard_space::<f64>(3).unwrap();
        let x = random_frame(s, &mut rng).unwrap();
        let y = random_frame(s, &mut rng).unwrap();
        assert!(gap_distance(&x, &x) < 1e-12);
        let g = gap_distance(&x, &y);
        assert!(g > 0.0 && g <= 1.0 + 1e-12);
        assert!((g - gap_distance(&y, &x)).abs() < 1e-12);
    }

    #[test]
    fn single_precision_frames_work() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = make_standard_space::<f32>(2).unwrap();
        let (x, y) = random_pair_with_intersection(s, 1, &mut rng).unwrap();
        assert_eq!(intersect(&x, &y, 1e-4).unwrap().dim_real, 1);
        assert_eq!(souriau_map(&x, &y).unwrap().minus_one_multiplicity(1e-3).unwrap(), 1);
    }
}
