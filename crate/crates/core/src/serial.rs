//! Serde adapters for nalgebra values. Complex scalars travel as `[re, im]`,
//! matrices as nested row-major arrays.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn complex_to_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn pair_to_complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn real_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn complex_rows(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|r| r.iter().map(|z| complex_to_pair(*z)).collect())
        .collect()
}

pub fn complex_entries(v: &DVector<Complex64>) -> Vec<[f64; 2]> {
    v.iter().map(|z| complex_to_pair(*z)).collect()
}

/// Builds a matrix from rows, returning `None` when the rows are ragged.
pub fn matrix_from_rows<T: nalgebra::Scalar + Copy>(rows: &[Vec<T>]) -> Option<DMatrix<T>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub mod real_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        real_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        matrix_from_rows(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}

pub mod complex_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        complex_rows(m).serialize(s)
    }
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        complex_to_pair(*z).serialize(s)
    }
}

pub mod opt_complex_vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<DVector<Complex64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(complex_entries).serialize(s)
    }
}
