use num_traits::{Float, FloatConst, FromPrimitive, NumCast, ToPrimitive};
use rustfft::FftNum;

/// Floating-point type usable for fields, transforms and spectral statistics.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumCast + FftNum + Default + std::fmt::Display
{
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
