//! Matrix JSON: `{"shape":[r,c], "re":[...], "im":[...]}`, row-major, with
//! `im` optional (absent means all imaginary parts are zero).
//!
//! Floats are written in shortest round-trip form and parsed exactly, so any
//! emitted matrix re-parses to bit-identical entries.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixJson {
    shape: [usize; 2],
    re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        let re = m.as_slice().iter().map(|z| z.re).collect();
        // -0.0 must survive the round trip, so compare bit patterns.
        let has_im = m.as_slice().iter().any(|z| z.im.to_bits() != 0);
        let im = has_im.then(|| m.as_slice().iter().map(|z| z.im).collect());
        Self {
            shape: [m.rows(), m.cols()],
            re,
            im,
        }
    }
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let [rows, cols] = j.shape;
        let n = rows * cols;
        if j.re.len() != n {
            return Err(Error::Json(format!(
                "shape [{rows},{cols}] needs {n} real parts, got {}",
                j.re.len()
            )));
        }
        let im = match j.im {
            Some(im) if im.len() != n => {
                return Err(Error::Json(format!(
                    "shape [{rows},{cols}] needs {n} imaginary parts, got {}",
                    im.len()
                )))
            }
            Some(im) => im,
            None => vec![0.0; n],
        };
        let data = j.re.into_iter().zip(im).map(|(r, i)| C64::new(r, i)).collect();
        Matrix::new(rows, cols, data)
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        Matrix::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl Matrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // serde accepts a struct written as a JSON array; only objects are valid here.
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        if !value.is_object() {
            return Err(Error::Json("matrix must be a JSON object with shape and re".into()));
        }
        serde_json::from_value(value).map_err(|e| Error::Json(e.to_string()))
    }

    /// Parses a vector given as an `n x 1` or `1 x n` matrix.
    pub fn vector_from_json(text: &str) -> Result<Vec<C64>> {
        let m = Self::from_json(text)?;
        match m.shape() {
            (_, 1) | (1, _) => Ok(m.as_slice().to_vec()),
            (r, c) => Err(Error::Json(format!("expected a vector, got shape [{r},{c}]"))),
        }
    }
}
