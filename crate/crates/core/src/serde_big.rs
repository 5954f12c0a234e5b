//! Serde adapters that write big integers and rationals as decimal strings.
//!
//! JSON numbers cannot carry arbitrary precision, so `BigInt` values travel as
//! `"-123"` and rationals as `"num/den"`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub fn parse_ratio(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}

pub fn ratio_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub mod int {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

pub mod int_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.parse().map_err(D::Error::custom))
            .collect()
    }
}

pub mod ratio {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ratio_to_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}
