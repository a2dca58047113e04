//! Output helpers shared by the JSON and CSV emitters.
//!
//! Exact rationals are always rendered as `num/den` (with `den ≥ 1`, so
//! integers print as `n/1`); this rendering is bit-exact and stable.

use std::fmt::Display;

use num_rational::BigRational;
use serde::Serializer;

pub fn rational(q: &BigRational) -> String {
    q.to_string()
}

pub fn serialize_rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational(q))
}

pub fn serialize_opt_rational<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&rational(q)),
        None => s.serialize_none(),
    }
}

pub fn display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_rendering() {
        let q = BigRational::new(8.into(), 10.into());
        assert_eq!(rational(&q), "4/5");
        assert_eq!(rational(&BigRational::from_integer(3.into())), "3");
        assert_eq!(rational(&BigRational::new((-6).into(), 9.into())), "-2/3");
    }
}
