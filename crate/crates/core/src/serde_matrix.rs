//! JSON representation of complex matrices: a list of rows, each entry an
//! `[re, im]` pair.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{c, ComplexMatrix};

pub fn to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix, String> {
    let n = rows.len();
    if n == 0 {
        return Err("matrix has no rows".into());
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(format!("row {bad} has {} entries, expected {n}", rows[bad].len()));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, k| c(rows[r][k][0], rows[r][k][1])))
}

pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
    to_rows(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
    let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
    from_rows(&rows).map_err(D::Error::custom)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<ComplexMatrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ComplexMatrix>, D::Error> {
        match Option::<Vec<Vec<[f64; 2]>>>::deserialize(d)? {
            Some(rows) => from_rows(&rows).map(Some).map_err(D::Error::custom),
            None => Ok(None),
        }
    }
}
