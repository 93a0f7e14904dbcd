use nalgebra as na;
use num_traits as nt;

/// Real scalar the linear-algebra layers are generic over.
///
/// Implemented for `f32` and `f64`. The two associated tolerances are the
/// defaults used when a caller does not pass one explicitly.
pub trait Real:
    na::RealField + Copy + nt::FromPrimitive + nt::ToPrimitive + nt::FloatConst + Default
{
    /// Relative threshold under which a singular value counts as zero.
    const RANK_TOL: f64;
    /// Absolute tolerance for isotropy of an orthonormal frame.
    const ISOTROPY_TOL: f64;

    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64;
}

macro_rules! impl_real {
    ($t:ty, $rank:expr, $iso:expr) => {
        impl Real for $t {
            const RANK_TOL: f64 = $rank;
            const ISOTROPY_TOL: f64 = $iso;

            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32, 1e-4, 1e-4);
impl_real!(f64, 1e-9, 1e-8);
