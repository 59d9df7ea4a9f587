//! Text and serde forms of extended reals: infinities are written as the
//! literals `inf` / `-inf`, never as `null` or NaN.

/// Finite reals in shortest round-trip form, infinities as `inf`/`-inf`.
pub fn fmt_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// Inverse of [`fmt_real`].
pub fn parse_real(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
enum Real {
    Num(f64),
    Tag(String),
}

impl Real {
    fn wrap(x: f64) -> Real {
        if x.is_finite() {
            Real::Num(x)
        } else {
            Real::Tag(fmt_real(x))
        }
    }

    fn unwrap<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            Real::Num(x) => Ok(x),
            Real::Tag(t) => parse_real(&t).ok_or_else(|| E::custom(format!("bad real {t:?}"))),
        }
    }
}

/// `#[serde(with = ...)]` for a single `f64` that may be infinite.
pub mod inf_scalar {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        super::Real::wrap(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        super::Real::deserialize(d)?.unwrap()
    }
}

/// `#[serde(with = ...)]` for a `Vec<f64>` whose entries may be infinite.
pub mod inf_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        xs.iter()
            .map(|&x| super::Real::wrap(x))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<super::Real>::deserialize(d)?
            .into_iter()
            .map(|r| r.unwrap())
            .collect()
    }
}
