//! Antipodal binary vectors and matrices, the decision variables of the
//! bit-flipping search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign with the convention `sgn(0) = +1`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[inline]
fn sgn_i8(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// A vector in {-1, +1}^N.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn from_bits(bits: Vec<i8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::Input(format!(
                "sign entry {pos} is {}, expected +1 or -1",
                bits[pos]
            )));
        }
        Ok(SignVector(bits))
    }

    pub fn ones(n: usize) -> Self {
        SignVector(vec![1; n])
    }

    /// Entrywise sign of `values`.
    pub fn sign_of<'a>(values: impl IntoIterator<Item = &'a f64>) -> Self {
        SignVector(values.into_iter().map(|&v| sgn_i8(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, n: usize) -> f64 {
        f64::from(self.0[n])
    }

    pub fn flip(&mut self, n: usize) {
        self.0[n] = -self.0[n];
    }

    pub fn negated(&self) -> Self {
        SignVector(self.0.iter().map(|b| -b).collect())
    }

    /// Representative of `{b, -b}` with a leading `+1`.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(-1) => self.negated(),
            _ => self.clone(),
        }
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|&b| f64::from(b)))
    }
}

impl TryFrom<Vec<i8>> for SignVector {
    type Error = Error;
    fn try_from(bits: Vec<i8>) -> Result<Self> {
        SignVector::from_bits(bits)
    }
}

impl From<SignVector> for Vec<i8> {
    fn from(v: SignVector) -> Self {
        v.0
    }
}

/// A matrix in {-1, +1}^{N x K}, stored column-major so that entry `(n, k)`
/// has flat index `k * N + n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<i8>,
}

impl SignMatrix {
    pub fn from_columns(columns: &[SignVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, SignVector::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Input("sign columns have unequal lengths".into()));
        }
        let bits = columns.iter().flat_map(|c| c.bits().iter().copied()).collect();
        Ok(SignMatrix {
            rows,
            cols: columns.len(),
            bits,
        })
    }

    /// `b 1_K^T`.
    pub fn replicate(b: &SignVector, cols: usize) -> Self {
        let bits = (0..cols).flat_map(|_| b.bits().iter().copied()).collect();
        SignMatrix {
            rows: b.len(),
            cols,
            bits,
        }
    }

    pub fn sign_of(m: &DMatrix<f64>) -> Self {
        // nalgebra storage is column-major already
        SignMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            bits: m.iter().map(|&v| sgn_i8(v)).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn flat_index(&self, n: usize, k: usize) -> usize {
        k * self.rows + n
    }

    pub fn position(&self, flat: usize) -> (usize, usize) {
        (flat % self.rows, flat / self.rows)
    }

    pub fn get(&self, n: usize, k: usize) -> f64 {
        f64::from(self.bits[self.flat_index(n, k)])
    }

    pub fn flip(&mut self, n: usize, k: usize) {
        let i = self.flat_index(n, k);
        self.bits[i] = -self.bits[i];
    }

    pub fn column(&self, k: usize) -> SignVector {
        SignVector(self.bits[k * self.rows..(k + 1) * self.rows].to_vec())
    }

    pub fn negate_column(&mut self, k: usize) {
        for b in &mut self.bits[k * self.rows..(k + 1) * self.rows] {
            *b = -*b;
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(
            self.rows,
            self.cols,
            self.bits.iter().map(|&b| f64::from(b)),
        )
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<i8> {
        (0..self.rows)
            .flat_map(|n| (0..self.cols).map(move |k| (n, k)))
            .map(|(n, k)| self.bits[self.flat_index(n, k)])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_maps_to_plus_one() {
        assert_eq!(sgn(0.0), 1.0);
        assert_eq!(sgn(-0.0), 1.0);
        assert_eq!(SignVector::sign_of(&[0.0, 5.0, -1.0]).bits(), &[1, 1, -1]);
    }

    #[test]
    fn rejects_non_antipodal_entries() {
        assert!(SignVector::from_bits(vec![1, 0, -1]).is_err());
    }

    #[test]
    fn flat_index_is_a_bijection() {
        let b = SignMatrix::replicate(&SignVector::ones(5), 3);
        let mut seen = vec![false; 15];
        for k in 0..3 {
            for n in 0..5 {
                let x = b.flat_index(n, k);
                assert_eq!(b.position(x), (n, k));
                seen[x] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn dmatrix_layout_matches_flat_index() {
        let mut b = SignMatrix::replicate(&SignVector::ones(3), 2);
        b.flip(2, 1);
        let m = b.to_dmatrix();
        assert_eq!(m[(2, 1)], -1.0);
        assert_eq!(m.iter().filter(|&&v| v < 0.0).count(), 1);
        assert_eq!(SignMatrix::sign_of(&m), b);
        assert_eq!(b.to_row_major(), vec![1, 1, 1, 1, 1, -1]);
    }
}
