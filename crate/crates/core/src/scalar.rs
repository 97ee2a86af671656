use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Exact integer type used for weights, values and the `(n, m)` invariants.
///
/// Every computation in this crate is exact, so only integer types qualify.
/// `BigInt` never overflows; fixed-width types are faster but the caller is
/// responsible for keeping inputs small enough.
pub trait Scalar:
    Clone
    + Ord
    + Hash
    + Debug
    + Display
    + FromStr
    + Integer
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    fn from_usize_exact(v: usize) -> Self {
        Self::from_usize(v).expect("usize fits the scalar type")
    }
}

impl<T> Scalar for T where
    T: Clone
        + Ord
        + Hash
        + Debug
        + Display
        + FromStr
        + Integer
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Exact rational built from a pair of scalars.
pub type Quotient<T> = Ratio<T>;

/// Formats a rational as `num/den`, keeping the `/1` for integers.
pub fn fmt_ratio<T: Scalar>(r: &Ratio<T>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Formats `m/n` without reducing, the way `(n, m)` pairs are usually quoted.
pub fn fmt_pair<T: Scalar>(m: &T, n: &T) -> String {
    format!("{m}/{n}")
}
