//! Diagonal kernels `k(z, w) = sum_m c_m (z w̄)^m` on the disc (one factor of
//! a polydisc kernel) and `k(z, w) = sum_j a_j <z, w>^j` on the ball.
//!
//! All coefficient arithmetic is in `f64` with a hard series cap of
//! [`MAX_ORDER`]; asking for more is a range error rather than an overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::MAX_ORDER;

/// Largest ball parameter `m` accepted for the `H_m(B_n)` family.
pub const MAX_BALL_M: u32 = 16;

/// One-variable factor of a product kernel on the polydisc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec1D {
    /// Szegő kernel `1/(1 - x)`.
    Hardy,
    /// `1/(1 - x)^2`.
    Bergman,
    /// `(1 - x)^(alpha - 2)`, defined here for `-1 < alpha < 2`.
    WeightedBergman { alpha: f64 },
    /// `-ln(1 - x)/x`.
    Dirichlet,
    /// Explicit positive coefficients `c_0, c_1, ...`.
    Custom { custom_coeffs: Vec<f64> },
}

impl KernelSpec1D {
    pub fn weighted_bergman(alpha: f64) -> Result<Self> {
        let spec = KernelSpec1D::WeightedBergman { alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn custom(coeffs: Vec<f64>) -> Result<Self> {
        let spec = KernelSpec1D::Custom { custom_coeffs: coeffs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec1D::WeightedBergman { alpha } => {
                // Coefficients of (1-x)^(alpha-2) are prod (j+1-alpha)/j, which
                // stay positive for every j only when alpha < 2.
                if !(alpha.is_finite() && *alpha > -1.0 && *alpha < 2.0) {
                    return Err(Error::InvalidInput(format!(
                        "weighted Bergman parameter must satisfy -1 < alpha < 2, got {alpha}"
                    )));
                }
            }
            KernelSpec1D::Custom { custom_coeffs } => check_positive(custom_coeffs, "custom_coeffs")?,
            _ => {}
        }
        Ok(())
    }

    /// Whether the wandering-subspace results for both the shift tuple and
    /// its Cauchy dual are known to hold for this family. Only the weighted
    /// Bergman family is restricted, to `-1 < alpha <= 0`.
    pub fn theorem_certified(&self) -> bool {
        match self {
            KernelSpec1D::WeightedBergman { alpha } => *alpha > -1.0 && *alpha <= 0.0,
            KernelSpec1D::Custom { .. } => false,
            _ => true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec1D::Hardy => "hardy",
            KernelSpec1D::Bergman => "bergman",
            KernelSpec1D::WeightedBergman { .. } => "weighted_bergman",
            KernelSpec1D::Dirichlet => "dirichlet",
            KernelSpec1D::Custom { .. } => "custom",
        }
    }
}

fn check_positive(coeffs: &[f64], what: &str) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::InvalidInput(format!("{what} is empty")));
    }
    if let Some((i, c)) = coeffs.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c > 0.0)) {
        return Err(Error::InvalidInput(format!("{what}[{i}] = {c} is not a positive finite number")));
    }
    Ok(())
}

fn check_order(what: &'static str, value: usize) -> Result<()> {
    if value > MAX_ORDER {
        return Err(Error::OutOfRange { what, value, cap: MAX_ORDER });
    }
    Ok(())
}

/// Coefficient `c_m` of a one-variable kernel.
pub fn coeff_1d(spec: &KernelSpec1D, m: usize) -> Result<f64> {
    check_order("series index", m)?;
    spec.validate()?;
    Ok(match spec {
        KernelSpec1D::Hardy => 1.0,
        KernelSpec1D::Bergman => (m + 1) as f64,
        KernelSpec1D::WeightedBergman { alpha } => {
            (1..=m).fold(1.0, |acc, j| acc * (j as f64 + 1.0 - alpha) / j as f64)
        }
        KernelSpec1D::Dirichlet => 1.0 / (m + 1) as f64,
        KernelSpec1D::Custom { custom_coeffs } => *custom_coeffs.get(m).ok_or(Error::OutOfRange {
            what: "custom coefficient index",
            value: m,
            cap: custom_coeffs.len() - 1,
        })?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BallFamily {
    /// `(1 - <z,w>)^(-m)`; `m = 1` is the Drury-Arveson kernel.
    Hm { m: u32 },
    /// Explicit coefficients with `a_0 = 1`.
    UnitarilyInvariant { a_coeffs: Vec<f64> },
}

/// Unitarily invariant kernel on the unit ball of `C^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallKernelSpec {
    pub n: usize,
    #[serde(flatten)]
    pub family: BallFamily,
}

impl BallKernelSpec {
    pub fn hm(n: usize, m: u32) -> Result<Self> {
        let spec = BallKernelSpec { n, family: BallFamily::Hm { m } };
        spec.validate()?;
        Ok(spec)
    }

    pub fn drury_arveson(n: usize) -> Result<Self> {
        Self::hm(n, 1)
    }

    pub fn unitarily_invariant(n: usize, a_coeffs: Vec<f64>) -> Result<Self> {
        let spec = BallKernelSpec { n, family: BallFamily::UnitarilyInvariant { a_coeffs } };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("ball dimension must be positive".into()));
        }
        match &self.family {
            BallFamily::Hm { m } => {
                if *m == 0 || *m > MAX_BALL_M {
                    return Err(Error::InvalidInput(format!(
                        "ball parameter m must lie in 1..={MAX_BALL_M}, got {m}"
                    )));
                }
            }
            BallFamily::UnitarilyInvariant { a_coeffs } => {
                check_positive(a_coeffs, "a_coeffs")?;
                if a_coeffs[0] != 1.0 {
                    return Err(Error::NotNormalized { c0: a_coeffs[0] });
                }
            }
        }
        Ok(())
    }

    /// The parameter `m` when this is an `H_m(B_n)` kernel.
    pub fn hm_parameter(&self) -> Option<u32> {
        match self.family {
            BallFamily::Hm { m } => Some(m),
            BallFamily::UnitarilyInvariant { .. } => None,
        }
    }
}

/// Coefficient `a_j` of a ball kernel.
pub fn ball_coeff(spec: &BallKernelSpec, j: usize) -> Result<f64> {
    check_order("series index", j)?;
    spec.validate()?;
    match &spec.family {
        BallFamily::Hm { m } => {
            // C(j+m-1, j) = prod_{i=1..j} (m-1+i)/i, exact in integers.
            let m = *m as u128;
            let mut acc: u128 = 1;
            for i in 1..=j as u128 {
                acc = acc * (m - 1 + i) / i;
            }
            Ok(acc as f64)
        }
        BallFamily::UnitarilyInvariant { a_coeffs } => {
            a_coeffs.get(j).copied().ok_or(Error::OutOfRange {
                what: "a_coeffs index",
                value: j,
                cap: a_coeffs.len() - 1,
            })
        }
    }
}

/// Truncated real power series `sum_{j < len} coeffs[j] x^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub coeffs: Vec<f64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        PowerSeries { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn same_length(&self, other: &PowerSeries) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }

    /// Product truncated to the common length.
    pub fn mul(&self, other: &PowerSeries) -> Result<PowerSeries> {
        self.same_length(other)?;
        let n = self.len();
        let coeffs = (0..n)
            .map(|j| (0..=j).map(|i| self.coeffs[i] * other.coeffs[j - i]).sum())
            .collect();
        Ok(PowerSeries { coeffs })
    }

    pub fn sub(&self, other: &PowerSeries) -> Result<PowerSeries> {
        self.same_length(other)?;
        Ok(PowerSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// The series `1 + 0x + ...` of the given length.
    pub fn one(len: usize) -> PowerSeries {
        let mut coeffs = vec![0.0; len];
        if len > 0 {
            coeffs[0] = 1.0;
        }
        PowerSeries { coeffs }
    }
}

/// Kernels with a diagonal series in one scalar variable.
pub trait DiagonalKernel {
    /// Coefficients of degree `0..=order`.
    fn diagonal_series(&self, order: usize) -> Result<PowerSeries>;
}

impl DiagonalKernel for KernelSpec1D {
    fn diagonal_series(&self, order: usize) -> Result<PowerSeries> {
        check_order("series order", order)?;
        let coeffs = (0..=order).map(|m| coeff_1d(self, m)).collect::<Result<_>>()?;
        Ok(PowerSeries { coeffs })
    }
}

impl DiagonalKernel for BallKernelSpec {
    fn diagonal_series(&self, order: usize) -> Result<PowerSeries> {
        check_order("series order", order)?;
        let coeffs = (0..=order).map(|j| ball_coeff(self, j)).collect::<Result<_>>()?;
        Ok(PowerSeries { coeffs })
    }
}

/// Reciprocal `r` with `c * r = 1 + O(x^len)`.
pub fn reciprocal_series(c: &PowerSeries) -> Result<PowerSeries> {
    let c0 = *c.coeffs.first().ok_or(Error::InvalidInput("empty power series".into()))?;
    if c0 == 0.0 {
        return Err(Error::ZeroConstantTerm);
    }
    let mut r = Vec::with_capacity(c.len());
    r.push(1.0 / c0);
    for j in 1..c.len() {
        let s: f64 = (1..=j).map(|i| c.coeffs[i] * r[j - i]).sum();
        r.push(-s / c0);
    }
    Ok(PowerSeries { coeffs: r })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnpCertificate {
    /// Order up to which positivity was tested.
    pub order: usize,
    pub is_cnp_to_order: bool,
    /// Coefficients of `1 - 1/k`, degrees `0..=order`.
    pub b: PowerSeries,
    pub first_violation: Option<usize>,
}

/// Tests `1 - 1/k` for nonnegative coefficients up to the given order.
pub fn cnp_certificate(kernel: &impl DiagonalKernel, order: usize, tol: f64) -> Result<CnpCertificate> {
    let series = kernel.diagonal_series(order)?;
    cnp_certificate_from_series(&series, tol)
}

/// As [`cnp_certificate`], from an explicit normalized diagonal series.
pub fn cnp_certificate_from_series(series: &PowerSeries, tol: f64) -> Result<CnpCertificate> {
    let c0 = *series.coeffs.first().ok_or(Error::InvalidInput("empty power series".into()))?;
    if c0 != 1.0 {
        return Err(Error::NotNormalized { c0 });
    }
    let recip = reciprocal_series(series)?;
    let mut b = PowerSeries::one(series.len()).sub(&recip)?;
    b.coeffs[0] = 0.0;
    let first_violation = (1..b.len()).find(|&j| b.coeffs[j] < -tol);
    Ok(CnpCertificate {
        order: series.len() - 1,
        is_cnp_to_order: first_violation.is_none(),
        b,
        first_violation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChenCoefficients {
    /// Coefficients of `1/k` in `<z, w>`, degrees `0..=order`.
    pub c: PowerSeries,
    /// All `c_j <= tol` for `j >= 1`.
    pub signs_ok: bool,
}

pub fn chen_coeffs(spec: &BallKernelSpec, order: usize, tol: f64) -> Result<ChenCoefficients> {
    let series = spec.diagonal_series(order)?;
    let c = reciprocal_series(&series)?;
    let signs_ok = c.coeffs.iter().skip(1).all(|&x| x <= tol);
    Ok(ChenCoefficients { c, signs_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_coefficients() {
        assert_eq!(coeff_1d(&KernelSpec1D::Hardy, 5).unwrap(), 1.0);
        assert_eq!(coeff_1d(&KernelSpec1D::Bergman, 3).unwrap(), 4.0);
        assert_eq!(coeff_1d(&KernelSpec1D::Dirichlet, 3).unwrap(), 0.25);
        let wb0 = KernelSpec1D::weighted_bergman(0.0).unwrap();
        let wb1 = KernelSpec1D::weighted_bergman(1.0).unwrap();
        for m in 0..10 {
            assert_eq!(coeff_1d(&wb0, m).unwrap(), coeff_1d(&KernelSpec1D::Bergman, m).unwrap());
            assert_eq!(coeff_1d(&wb1, m).unwrap(), 1.0);
        }
    }

    #[test]
    fn range_and_parameter_errors() {
        assert!(matches!(
            coeff_1d(&KernelSpec1D::Hardy, MAX_ORDER + 1),
            Err(Error::OutOfRange { .. })
        ));
        assert!(KernelSpec1D::weighted_bergman(-1.0).is_err());
        assert!(KernelSpec1D::weighted_bergman(2.5).is_err());
        assert!(KernelSpec1D::custom(vec![1.0, 0.0]).is_err());
        assert!(BallKernelSpec::unitarily_invariant(2, vec![2.0, 1.0]).is_err());
        assert!(BallKernelSpec::hm(2, 0).is_err());
    }

    #[test]
    fn certification_flag_for_weighted_bergman() {
        assert!(KernelSpec1D::weighted_bergman(-0.5).unwrap().theorem_certified());
        assert!(KernelSpec1D::weighted_bergman(0.0).unwrap().theorem_certified());
        assert!(!KernelSpec1D::weighted_bergman(0.5).unwrap().theorem_certified());
    }

    #[test]
    fn ball_coefficients() {
        let da = BallKernelSpec::drury_arveson(2).unwrap();
        assert_eq!(ball_coeff(&da, 7).unwrap(), 1.0);
        let h2 = BallKernelSpec::hm(2, 2).unwrap();
        assert_eq!(ball_coeff(&h2, 3).unwrap(), 4.0);
        let h3 = BallKernelSpec::hm(2, 3).unwrap();
        assert_eq!(ball_coeff(&h3, 4).unwrap(), 15.0);
        let custom = BallKernelSpec::unitarily_invariant(2, vec![1.0, 0.5, 1.0 / 3.0]).unwrap();
        assert_eq!(ball_coeff(&custom, 2).unwrap(), 1.0 / 3.0);
        assert!(ball_coeff(&custom, 3).is_err());
    }

    #[test]
    fn reciprocal_examples() {
        let r = reciprocal_series(&PowerSeries::new(vec![1.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!(r.coeffs, vec![1.0, -1.0, 0.0, 0.0]);
        let r = reciprocal_series(&PowerSeries::new(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(r.coeffs, vec![1.0, 0.0, 0.0]);
        let r = reciprocal_series(&PowerSeries::new(vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.coeffs, vec![1.0, -2.0, 1.0]);
        assert_eq!(
            reciprocal_series(&PowerSeries::new(vec![0.0, 1.0])),
            Err(Error::ZeroConstantTerm)
        );
    }

    #[test]
    fn series_arithmetic_requires_equal_length() {
        let a = PowerSeries::new(vec![1.0, 2.0]);
        let b = PowerSeries::new(vec![1.0]);
        assert_eq!(a.mul(&b), Err(Error::LengthMismatch { left: 2, right: 1 }));
    }

    #[test]
    fn cnp_examples() {
        let hardy = cnp_certificate(&KernelSpec1D::Hardy, 5, 1e-12).unwrap();
        assert_eq!(hardy.b.coeffs, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(hardy.is_cnp_to_order);

        let bergman = cnp_certificate(&KernelSpec1D::Bergman, 3, 1e-12).unwrap();
        assert_eq!(bergman.b.coeffs, vec![0.0, 2.0, -1.0, 0.0]);
        assert!(!bergman.is_cnp_to_order);
        assert_eq!(bergman.first_violation, Some(2));

        let not_normalized = PowerSeries::new(vec![2.0, 1.0]);
        assert!(matches!(
            cnp_certificate_from_series(&not_normalized, 1e-12),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn chen_examples() {
        let da = chen_coeffs(&BallKernelSpec::drury_arveson(2).unwrap(), 4, 1e-12).unwrap();
        assert_eq!(da.c.coeffs, vec![1.0, -1.0, 0.0, 0.0, 0.0]);
        assert!(da.signs_ok);
        let h2 = chen_coeffs(&BallKernelSpec::hm(2, 2).unwrap(), 3, 1e-12).unwrap();
        assert_eq!(h2.c.coeffs, vec![1.0, -2.0, 1.0, 0.0]);
        assert!(!h2.signs_ok);
        let geo = chen_coeffs(&BallKernelSpec::unitarily_invariant(2, vec![1.0; 3]).unwrap(), 2, 1e-12).unwrap();
        assert_eq!(geo.c.coeffs, vec![1.0, -1.0, 0.0]);
    }

    #[test]
    fn specs_round_trip_through_json() {
        let spec = KernelSpec1D::weighted_bergman(-0.5).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"family":"weighted_bergman","alpha":-0.5}"#);
        assert_eq!(serde_json::from_str::<KernelSpec1D>(&text).unwrap(), spec);
        let ball = BallKernelSpec::hm(3, 2).unwrap();
        let text = serde_json::to_string(&ball).unwrap();
        assert_eq!(text, r#"{"n":3,"family":"hm","m":2}"#);
        assert_eq!(serde_json::from_str::<BallKernelSpec>(&text).unwrap(), ball);
    }
}
