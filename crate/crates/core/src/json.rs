//! Serde adapters for complex matrices.
//!
//! A matrix is a list of rows, each row a list of `[re, im]` pairs.
//! On input a bare number is accepted for a real entry.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::CMatrix;
use crate::Complex64;

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn from_rows<E: serde::de::Error>(rows: Vec<Vec<Entry>>) -> Result<CMatrix, E> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(E::custom("matrix rows have unequal length"));
    }
    let data: Vec<Complex64> = rows.into_iter().flatten().map(Complex64::from).collect();
    Ok(CMatrix::from_row_slice(nrows, ncols, &data))
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        from_rows(Vec::<Vec<Entry>>::deserialize(d)?)
    }
}

pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        Vec::<Vec<Vec<Entry>>>::deserialize(d)?
            .into_iter()
            .map(from_rows)
            .collect()
    }
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(Entry::deserialize(d)?.into())
    }
}

pub mod complex_list {
    use super::*;

    pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        zs.iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?
            .into_iter()
            .map(Complex64::from)
            .collect())
    }
}

/// Rejects non-finite entries, which JSON cannot carry.
pub fn ensure_finite(m: &CMatrix, what: &str) -> crate::Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(crate::Error::InvalidInput(format!(
            "{what} has non-finite entries"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder {
        #[serde(with = "matrix")]
        m: CMatrix,
    }

    #[test]
    fn round_trip_and_real_shorthand() {
        let h: Holder = serde_json::from_str(r#"{"m": [[1, [0, 2]], [[0, -2], 3.5]]}"#).unwrap();
        assert_eq!(h.m[(0, 1)], Complex64::new(0.0, 2.0));
        assert_eq!(h.m[(1, 1)], Complex64::new(3.5, 0.0));
        let text = serde_json::to_string(&h).unwrap();
        let back: Holder = serde_json::from_str(&text).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(serde_json::from_str::<Holder>(r#"{"m": [[1, 2], [3]]}"#).is_err());
    }
}
