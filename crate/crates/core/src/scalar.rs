//! Floating-point abstraction shared by every numeric module.
//!
//! Pair statistics are computed as exact integer ratios and only converted to
//! the working scalar at the boundary, so `f32` and `f64` pipelines see the
//! same counts and differ only in rounding.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// f32 or f64
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Converts an `f64` constant. Never fails for the types implementing this trait.
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable")
    }

    /// `num / den` with each side rounded once.
    fn from_ratio(num: i128, den: i128) -> Self {
        let n = Self::from_i128(num).expect("i128 representable");
        let d = Self::from_i128(den).expect("i128 representable");
        n / d
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

impl Scalar for f64 {
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp = self.comp + ((self.sum - t) + value);
        } else {
            self.comp = self.comp + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}
