//! Serde adapters: complex numbers as `[re, im]`, matrices as row-major
//! nested arrays of such pairs.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matkit::{c, ComplexMatrix, C64};

pub type RawMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_raw(m: &ComplexMatrix) -> RawMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_raw(raw: &RawMatrix) -> Result<ComplexMatrix, String> {
    let rows = raw.len();
    if rows == 0 {
        return Err("matrix has no rows".into());
    }
    let cols = raw[0].len();
    if cols == 0 {
        return Err("matrix has no columns".into());
    }
    if let Some(i) = raw.iter().position(|r| r.len() != cols) {
        return Err(format!("row {i} has {} entries, expected {cols}", raw[i].len()));
    }
    if raw.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err("matrix contains non-finite entries".into());
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| c(raw[i][j][0], raw[i][j][1])))
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(c(re, im))
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_raw(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let raw = RawMatrix::deserialize(d)?;
        matrix_from_raw(&raw).map_err(D::Error::custom)
    }
}

pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_raw).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexMatrix>, D::Error> {
        Vec::<RawMatrix>::deserialize(d)?
            .iter()
            .map(|r| matrix_from_raw(r).map_err(D::Error::custom))
            .collect()
    }
}

/// On-disk list of matrices on a time grid. Used for sampled Hamiltonians
/// (N x N per point) and custom sections (N x M per point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSeries {
    pub dimension: usize,
    pub times: Vec<f64>,
    #[serde(with = "matrix_list")]
    pub matrices: Vec<ComplexMatrix>,
}
