//! JSON encodings: complex numbers as `[re, im]`, matrices as row-major
//! nested arrays, symbols as lists of `(multi-index, coefficient)` terms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::symbol::MultiplierSymbol;
use crate::spaces::MultiIndex;
use crate::C64;

pub type ComplexPair = [f64; 2];

pub fn to_pair(z: C64) -> ComplexPair {
    [z.re, z.im]
}

pub fn from_pair(p: ComplexPair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn matrix_to_rows(m: &DMatrix<C64>) -> Vec<Vec<ComplexPair>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| to_pair(m[(i, j)])).collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<ComplexPair>]) -> Result<DMatrix<C64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| from_pair(rows[i][j])))
}

/// `#[serde(with = "wire::complex")]`.
pub mod complex {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_pair(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        Ok(from_pair(ComplexPair::deserialize(d)?))
    }
}

/// `#[serde(with = "wire::matrix")]`.
pub mod matrix {
    use super::*;
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DMatrix<C64>, D::Error> {
        let rows = Vec::<Vec<ComplexPair>>::deserialize(d)?;
        matrix_from_rows(&rows).map_err(de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermLiteral {
    pub alpha: Vec<usize>,
    pub coeff: Vec<Vec<ComplexPair>>,
}

/// `{"n": 2, "coeff_dim": 1, "terms": [{"alpha": [1, 0], "coeff": [[[0.5, 0.0]]]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolLiteral {
    pub n: usize,
    pub coeff_dim: usize,
    pub terms: Vec<TermLiteral>,
}

impl SymbolLiteral {
    pub fn to_symbol(&self) -> Result<MultiplierSymbol> {
        let mut phi = MultiplierSymbol::zero(self.n, self.coeff_dim);
        for term in &self.terms {
            if term.alpha.len() != self.n {
                return Err(Error::DimensionMismatch(format!(
                    "multi-index {:?} in a symbol on {} variables",
                    term.alpha, self.n
                )));
            }
            let alpha = MultiIndex(term.alpha.clone());
            let coeff = matrix_from_rows(&term.coeff)?;
            let sum = phi.coefficient(&alpha) + coeff;
            phi.add_term(alpha, sum)?;
        }
        Ok(phi)
    }

    pub fn from_symbol(phi: &MultiplierSymbol) -> Self {
        SymbolLiteral {
            n: phi.n(),
            coeff_dim: phi.coeff_dim(),
            terms: phi
                .terms()
                .iter()
                .map(|(alpha, c)| TermLiteral { alpha: alpha.0.clone(), coeff: matrix_to_rows(c) })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_round_trip() {
        let json = r#"{"n":2,"coeff_dim":1,"terms":[{"alpha":[0,0],"coeff":[[[0.25,0.0]]]},{"alpha":[1,1],"coeff":[[[0.0,-0.5]]]}]}"#;
        let lit: SymbolLiteral = serde_json::from_str(json).unwrap();
        let phi = lit.to_symbol().unwrap();
        assert_eq!(phi.coefficient(&MultiIndex(vec![1, 1]))[(0, 0)], C64::new(0.0, -0.5));
        assert_eq!(SymbolLiteral::from_symbol(&phi), lit);
    }

    #[test]
    fn rejects_ragged_and_mismatched() {
        assert!(matrix_from_rows(&[vec![[1.0, 0.0]], vec![]]).is_err());
        let lit = SymbolLiteral { n: 2, coeff_dim: 1, terms: vec![TermLiteral { alpha: vec![1], coeff: vec![vec![[1.0, 0.0]]] }] };
        assert!(lit.to_symbol().is_err());
    }
}
