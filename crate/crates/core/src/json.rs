//! Serde helpers for extended reals: JSON has no infinity, so non-finite
//! values are written as the strings `"inf"`, `"-inf"` and `"nan"`.

use serde::Serializer;

pub fn ext_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn ext_real_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ext_real(v, s),
        None => s.serialize_none(),
    }
}
