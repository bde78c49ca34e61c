//! Concrete models of the skew field: exact rational matrices, float matrices
//! and commutative rational scalars, under one `RingValue` type.
//!
//! All binary operations require both operands to live in the same backend
//! with the same matrix dimension; mixing panics, since it is a programmer
//! error rather than a data-dependent condition. Data-dependent failures
//! (singular elements, ill-conditioned inversions) are reported as errors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("element is not invertible ({0})")]
    NotInvertible(String),
    #[error("sampling failed after {0} attempts")]
    SamplingFailed(usize),
    #[error("invalid construction: {0}")]
    Construction(String),
}

/// Reciprocal-condition cutoff for float-backend inversion.
pub const FLOAT_RCOND_MIN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
    Scalar,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Rational => write!(f, "rational"),
            Backend::Float => write!(f, "float"),
            Backend::Scalar => write!(f, "scalar"),
        }
    }
}

// ---------------------------------------------------------------------------
// Exact rational dxd matrices
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq)]
pub struct RatMat {
    pub d: usize,
    entries: Vec<BigRational>,
}

impl RatMat {
    pub fn new(d: usize, entries: Vec<BigRational>) -> Self {
        assert_eq!(entries.len(), d * d, "entry count must be d*d");
        RatMat { d, entries }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zero(d);
        for i in 0..d {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn zero(d: usize) -> Self {
        RatMat {
            d,
            entries: vec![BigRational::zero(); d * d],
        }
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut out = Self::zero(d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = self[(j, i)].clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn trace(&self) -> BigRational {
        (0..self.d).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RatMat {
            d: self.d,
            entries: self.entries.iter().map(|x| x * c).collect(),
        }
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.d;
        let mut a = self.clone();
        let mut inv = Self::identity(d);
        for col in 0..d {
            let pivot = (col..d).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..d {
                    let (x, y) = (a[(pivot, j)].clone(), a[(col, j)].clone());
                    a[(pivot, j)] = y;
                    a[(col, j)] = x;
                    let (x, y) = (inv[(pivot, j)].clone(), inv[(col, j)].clone());
                    inv[(pivot, j)] = y;
                    inv[(col, j)] = x;
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..d {
                a[(col, j)] = &a[(col, j)] / &p;
                inv[(col, j)] = &inv[(col, j)] / &p;
            }
            for r in 0..d {
                if r != col && !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone();
                    for j in 0..d {
                        let t = &a[(col, j)] * &f;
                        a[(r, j)] = &a[(r, j)] - &t;
                        let t = &inv[(col, j)] * &f;
                        inv[(r, j)] = &inv[(r, j)] - &t;
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn det(&self) -> BigRational {
        let d = self.d;
        let mut a = self.clone();
        let mut det = BigRational::one();
        for col in 0..d {
            let pivot = match (col..d).find(|&r| !a[(r, col)].is_zero()) {
                Some(p) => p,
                None => return BigRational::zero(),
            };
            if pivot != col {
                for j in 0..d {
                    let (x, y) = (a[(pivot, j)].clone(), a[(col, j)].clone());
                    a[(pivot, j)] = y;
                    a[(col, j)] = x;
                }
                det = -det;
            }
            let p = a[(col, col)].clone();
            det *= p.clone();
            for r in col + 1..d {
                if !a[(r, col)].is_zero() {
                    let f = &a[(r, col)] / &p;
                    for j in col..d {
                        let t = &a[(col, j)] * &f;
                        a[(r, j)] = &a[(r, j)] - &t;
                    }
                }
            }
        }
        det
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.entries[i * self.d + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        let d = self.d;
        &mut self.entries[i * d + j]
    }
}

impl fmt::Debug for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMat{}x{}{:?}", self.d, self.d, self.entries)
    }
}

fn ratmat_mul(a: &RatMat, b: &RatMat) -> RatMat {
    assert_eq!(a.d, b.d);
    let d = a.d;
    let mut out = RatMat::zero(d);
    for i in 0..d {
        for k in 0..d {
            let aik = &a[(i, k)];
            if aik.is_zero() {
                continue;
            }
            for j in 0..d {
                let t = aik * &b[(k, j)];
                out[(i, j)] = &out[(i, j)] + &t;
            }
        }
    }
    out
}

/// Kronecker product, used by the network bracket evaluator.
pub fn ratmat_kron(a: &RatMat, b: &RatMat) -> RatMat {
    let (da, db) = (a.d, b.d);
    let d = da * db;
    let mut out = RatMat::zero(d);
    for i1 in 0..da {
        for j1 in 0..da {
            if a[(i1, j1)].is_zero() {
                continue;
            }
            for i2 in 0..db {
                for j2 in 0..db {
                    out[(i1 * db + i2, j1 * db + j2)] = &a[(i1, j1)] * &b[(i2, j2)];
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Float dxd matrices
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq)]
pub struct FloatMat {
    pub d: usize,
    entries: Vec<f64>,
}

impl FloatMat {
    pub fn new(d: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), d * d);
        FloatMat { d, entries }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zero(d);
        for i in 0..d {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn zero(d: usize) -> Self {
        FloatMat {
            d,
            entries: vec![0.0; d * d],
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut out = Self::zero(d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = self[(j, i)];
            }
        }
        out
    }

    pub fn norm1(&self) -> f64 {
        (0..self.d)
            .map(|j| (0..self.d).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.d).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        FloatMat {
            d: self.d,
            entries: self.entries.iter().map(|x| x * c).collect(),
        }
    }

    /// Partial-pivot Gauss-Jordan inverse; `None` on exact zero pivot.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.d;
        let mut a = self.clone();
        let mut inv = Self::identity(d);
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&r, &s| a[(r, col)].abs().total_cmp(&a[(s, col)].abs()))?;
            if a[(pivot, col)] == 0.0 {
                return None;
            }
            if pivot != col {
                for j in 0..d {
                    a.entries.swap(pivot * d + j, col * d + j);
                    inv.entries.swap(pivot * d + j, col * d + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..d {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..d {
                if r != col && a[(r, col)] != 0.0 {
                    let f = a[(r, col)];
                    for j in 0..d {
                        let t = a[(col, j)] * f;
                        a[(r, j)] -= t;
                        let t = inv[(col, j)] * f;
                        inv[(r, j)] -= t;
                    }
                }
            }
        }
        Some(inv)
    }

    /// Reciprocal condition estimate in the 1-norm.
    pub fn rcond(&self) -> f64 {
        match self.inverse() {
            Some(inv) => {
                let n = self.norm1() * inv.norm1();
                if n == 0.0 {
                    0.0
                } else {
                    1.0 / n
                }
            }
            None => 0.0,
        }
    }

    /// Matrix exponential: scaling and squaring around a fixed [6/6] Pade
    /// approximant.
    pub fn expm(&self) -> Self {
        let d = self.d;
        let mut s = 0u32;
        let mut nrm = self.norm1();
        while nrm > 0.5 {
            nrm /= 2.0;
            s += 1;
        }
        let a = self.scale(0.5f64.powi(s as i32));
        // [6/6] Pade coefficients
        let c = [1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0];
        let mut p = Self::identity(d);
        let mut q = Self::identity(d);
        let mut ak = Self::identity(d);
        for (k, ck) in c.iter().enumerate().skip(1) {
            ak = floatmat_mul(&ak, &a);
            let term = ak.scale(*ck);
            p = floatmat_add(&p, &term);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            q = floatmat_add(&q, &term.scale(sign));
        }
        let mut e = floatmat_mul(&q.inverse().expect("Pade denominator is invertible"), &p);
        for _ in 0..s {
            e = floatmat_mul(&e, &e);
        }
        e
    }

    /// Integer power, negative exponents via the inverse.
    pub fn powi(&self, k: i64) -> Option<Self> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut out = Self::identity(self.d);
        for _ in 0..k.unsigned_abs() {
            out = floatmat_mul(&out, &base);
        }
        Some(out)
    }
}

impl std::ops::Index<(usize, usize)> for FloatMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.d + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for FloatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        let d = self.d;
        &mut self.entries[i * d + j]
    }
}

impl fmt::Debug for FloatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FloatMat{}x{}{:?}", self.d, self.d, self.entries)
    }
}

fn floatmat_mul(a: &FloatMat, b: &FloatMat) -> FloatMat {
    assert_eq!(a.d, b.d);
    let d = a.d;
    let mut out = FloatMat::zero(d);
    for i in 0..d {
        for k in 0..d {
            let aik = a[(i, k)];
            for j in 0..d {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    out
}

fn floatmat_add(a: &FloatMat, b: &FloatMat) -> FloatMat {
    assert_eq!(a.d, b.d);
    FloatMat {
        d: a.d,
        entries: a
            .entries
            .iter()
            .zip(&b.entries)
            .map(|(x, y)| x + y)
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// RingValue
// ---------------------------------------------------------------------------

/// An element of the chosen model of the skew field.
#[derive(Clone, PartialEq, Debug)]
pub enum RingValue {
    Rational(RatMat),
    Float(FloatMat),
    Scalar(BigRational),
}

impl RingValue {
    pub fn backend(&self) -> Backend {
        match self {
            RingValue::Rational(_) => Backend::Rational,
            RingValue::Float(_) => Backend::Float,
            RingValue::Scalar(_) => Backend::Scalar,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RingValue::Rational(m) => m.d,
            RingValue::Float(m) => m.d,
            RingValue::Scalar(_) => 1,
        }
    }

    pub fn one_like(&self) -> RingValue {
        match self {
            RingValue::Rational(m) => RingValue::Rational(RatMat::identity(m.d)),
            RingValue::Float(m) => RingValue::Float(FloatMat::identity(m.d)),
            RingValue::Scalar(_) => RingValue::Scalar(BigRational::one()),
        }
    }

    pub fn zero_like(&self) -> RingValue {
        match self {
            RingValue::Rational(m) => RingValue::Rational(RatMat::zero(m.d)),
            RingValue::Float(m) => RingValue::Float(FloatMat::zero(m.d)),
            RingValue::Scalar(_) => RingValue::Scalar(BigRational::zero()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RingValue::Rational(m) => m.is_zero(),
            RingValue::Float(m) => m.entries.iter().all(|x| *x == 0.0),
            RingValue::Scalar(x) => x.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        self == &self.one_like()
    }

    /// Two-sided inverse. Exact backends use an exact rank criterion, the
    /// float backend additionally rejects reciprocal condition numbers below
    /// [`FLOAT_RCOND_MIN`].
    pub fn inv(&self) -> Result<RingValue, AlgebraError> {
        match self {
            RingValue::Rational(m) => m
                .inverse()
                .map(RingValue::Rational)
                .ok_or_else(|| AlgebraError::NotInvertible("rank-deficient rational matrix".into())),
            RingValue::Float(m) => {
                let rc = m.rcond();
                if rc <= FLOAT_RCOND_MIN {
                    return Err(AlgebraError::NotInvertible(format!(
                        "rcond {rc:.3e} below threshold"
                    )));
                }
                m.inverse()
                    .map(RingValue::Float)
                    .ok_or_else(|| AlgebraError::NotInvertible("zero pivot".into()))
            }
            RingValue::Scalar(x) => {
                if x.is_zero() {
                    Err(AlgebraError::NotInvertible("zero scalar".into()))
                } else {
                    Ok(RingValue::Scalar(x.recip()))
                }
            }
        }
    }

    /// The involution: matrix transpose, identity on scalars.
    pub fn star(&self) -> RingValue {
        match self {
            RingValue::Rational(m) => RingValue::Rational(m.transpose()),
            RingValue::Float(m) => RingValue::Float(m.transpose()),
            RingValue::Scalar(x) => RingValue::Scalar(x.clone()),
        }
    }

    /// Trace in the matrix model (scalars are their own trace). Exact
    /// backends only.
    pub fn trace_rat(&self) -> Option<BigRational> {
        match self {
            RingValue::Rational(m) => Some(m.trace()),
            RingValue::Scalar(x) => Some(x.clone()),
            RingValue::Float(_) => None,
        }
    }

    /// Largest absolute entry, as f64; exact entries are converted.
    pub fn max_abs_f64(&self) -> f64 {
        match self {
            RingValue::Rational(m) => m
                .entries
                .iter()
                .map(|x| x.to_f64().unwrap_or(f64::INFINITY).abs())
                .fold(0.0, f64::max),
            RingValue::Float(m) => m.max_abs(),
            RingValue::Scalar(x) => x.to_f64().unwrap_or(f64::INFINITY).abs(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            RingValue::Rational(m) => json!({
                "backend": "rational",
                "d": m.d,
                "entries": m.entries.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            }),
            RingValue::Float(m) => json!({
                "backend": "float",
                "d": m.d,
                "entries": m.entries.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>(),
            }),
            RingValue::Scalar(x) => json!({
                "backend": "scalar",
                "value": x.to_string(),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<RingValue, AlgebraError> {
        let backend = v
            .get("backend")
            .and_then(Value::as_str)
            .ok_or_else(|| AlgebraError::Construction("missing backend".into()))?;
        let parse_rat = |s: &str| -> Result<BigRational, AlgebraError> {
            s.parse::<BigRational>()
                .map_err(|e| AlgebraError::Construction(format!("bad rational {s:?}: {e}")))
        };
        match backend {
            "scalar" => {
                let s = v
                    .get("value")
                    .and_then(Value::as_str)
                    .ok_or_else(|| AlgebraError::Construction("missing value".into()))?;
                Ok(RingValue::Scalar(parse_rat(s)?))
            }
            "rational" | "float" => {
                let d = v
                    .get("d")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| AlgebraError::Construction("missing d".into()))?
                    as usize;
                let entries = v
                    .get("entries")
                    .and_then(Value::as_array)
                    .ok_or_else(|| AlgebraError::Construction("missing entries".into()))?;
                if entries.len() != d * d {
                    return Err(AlgebraError::Construction("entry count mismatch".into()));
                }
                if backend == "rational" {
                    let es = entries
                        .iter()
                        .map(|e| parse_rat(e.as_str().unwrap_or("?")))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(RingValue::Rational(RatMat::new(d, es)))
                } else {
                    let es = entries
                        .iter()
                        .map(|e| {
                            e.as_str()
                                .and_then(|s| s.parse::<f64>().ok())
                                .ok_or_else(|| AlgebraError::Construction("bad float".into()))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(RingValue::Float(FloatMat::new(d, es)))
                }
            }
            other => Err(AlgebraError::Construction(format!(
                "unknown backend {other:?}"
            ))),
        }
    }
}

fn check_compatible(a: &RingValue, b: &RingValue) {
    assert!(
        a.backend() == b.backend() && a.dim() == b.dim(),
        "backend mismatch: {}({}) vs {}({})",
        a.backend(),
        a.dim(),
        b.backend(),
        b.dim()
    );
}

impl Add for &RingValue {
    type Output = RingValue;
    fn add(self, rhs: &RingValue) -> RingValue {
        check_compatible(self, rhs);
        match (self, rhs) {
            (RingValue::Rational(a), RingValue::Rational(b)) => {
                let entries = a
                    .entries
                    .iter()
                    .zip(&b.entries)
                    .map(|(x, y)| x + y)
                    .collect();
                RingValue::Rational(RatMat::new(a.d, entries))
            }
            (RingValue::Float(a), RingValue::Float(b)) => RingValue::Float(floatmat_add(a, b)),
            (RingValue::Scalar(a), RingValue::Scalar(b)) => RingValue::Scalar(a + b),
            _ => unreachable!(),
        }
    }
}

impl Sub for &RingValue {
    type Output = RingValue;
    fn sub(self, rhs: &RingValue) -> RingValue {
        self + &(-rhs)
    }
}

impl Neg for &RingValue {
    type Output = RingValue;
    fn neg(self) -> RingValue {
        match self {
            RingValue::Rational(a) => RingValue::Rational(RatMat::new(
                a.d,
                a.entries.iter().map(|x| -x).collect(),
            )),
            RingValue::Float(a) => RingValue::Float(a.scale(-1.0)),
            RingValue::Scalar(a) => RingValue::Scalar(-a),
        }
    }
}

impl Mul for &RingValue {
    type Output = RingValue;
    fn mul(self, rhs: &RingValue) -> RingValue {
        check_compatible(self, rhs);
        match (self, rhs) {
            (RingValue::Rational(a), RingValue::Rational(b)) => {
                RingValue::Rational(ratmat_mul(a, b))
            }
            (RingValue::Float(a), RingValue::Float(b)) => RingValue::Float(floatmat_mul(a, b)),
            (RingValue::Scalar(a), RingValue::Scalar(b)) => RingValue::Scalar(a * b),
            _ => unreachable!(),
        }
    }
}

// ---------------------------------------------------------------------------
// Central scalars
// ---------------------------------------------------------------------------

/// A rational number viewed as `c * identity` in any backend; commutes with
/// every ring value of matching shape.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralScalar(pub BigRational);

impl CentralScalar {
    pub fn from_int(n: i64) -> Self {
        CentralScalar(BigRational::from(BigInt::from(n)))
    }

    pub fn promote(&self, proto: &RingValue) -> RingValue {
        match proto {
            RingValue::Rational(m) => {
                RingValue::Rational(RatMat::identity(m.d).scale(&self.0))
            }
            RingValue::Float(m) => {
                RingValue::Float(FloatMat::identity(m.d).scale(self.0.to_f64().unwrap()))
            }
            RingValue::Scalar(_) => RingValue::Scalar(self.0.clone()),
        }
    }
}

// ---------------------------------------------------------------------------
// Deterministic generic sampling
// ---------------------------------------------------------------------------

/// Seeded sampler producing generic points of the skew-field models. Entries
/// are small rationals, which keeps quasi-determinant denominators modest
/// while staying in general position with high probability.
pub struct GenericSampler {
    rng: ChaCha8Rng,
}

impl GenericSampler {
    pub fn new(seed: u64) -> Self {
        GenericSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn rational_entry(&mut self) -> BigRational {
        let num = self.rng.gen_range(-12i64..=12);
        let den = self.rng.gen_range(1i64..=5);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn draw(&mut self, backend: Backend, d: usize) -> RingValue {
        match backend {
            Backend::Rational => {
                let entries = (0..d * d).map(|_| self.rational_entry()).collect();
                RingValue::Rational(RatMat::new(d, entries))
            }
            Backend::Float => {
                let entries = (0..d * d)
                    .map(|_| self.rational_entry().to_f64().unwrap())
                    .collect();
                RingValue::Float(FloatMat::new(d, entries))
            }
            Backend::Scalar => RingValue::Scalar(self.rational_entry()),
        }
    }

    /// Deterministic generic element; resamples until invertible when
    /// requested, giving up after 100 attempts.
    pub fn ring_value(
        &mut self,
        backend: Backend,
        d: usize,
        invertible: bool,
    ) -> Result<RingValue, AlgebraError> {
        assert!(d >= 1, "dimension must be positive");
        for _ in 0..100 {
            let v = self.draw(backend, d);
            if !invertible || v.inv().is_ok() {
                return Ok(v);
            }
        }
        Err(AlgebraError::SamplingFailed(100))
    }

    pub fn gen_range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }
}

/// Convenience: deterministic generic invertible value.
pub fn random_generic(seed: u64, d: usize, backend: Backend) -> RingValue {
    GenericSampler::new(seed)
        .ring_value(backend, d, true)
        .expect("generic sampling")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn identity_inverts_to_identity() {
        let one = RingValue::Rational(RatMat::identity(3));
        assert_eq!(one.inv().unwrap(), one);
    }

    #[test]
    fn closed_form_2x2_inverse() {
        let m = RingValue::Rational(RatMat::new(
            2,
            vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)],
        ));
        let inv = m.inv().unwrap();
        let expect = RingValue::Rational(RatMat::new(
            2,
            vec![rat(-2, 1), rat(1, 1), rat(3, 2), rat(-1, 2)],
        ));
        assert_eq!(inv, expect);
        assert!((&m * &inv).is_one());
    }

    #[test]
    fn zero_matrix_not_invertible() {
        let z = RingValue::Rational(RatMat::zero(2));
        assert!(z.inv().is_err());
    }

    #[test]
    fn star_is_transpose_and_antiautomorphism() {
        let m = RingValue::Rational(RatMat::new(
            2,
            vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)],
        ));
        let t = RingValue::Rational(RatMat::new(
            2,
            vec![rat(1, 1), rat(3, 1), rat(2, 1), rat(4, 1)],
        ));
        assert_eq!(m.star(), t);
        let mut s = GenericSampler::new(7);
        for _ in 0..20 {
            let a = s.ring_value(Backend::Rational, 3, false).unwrap();
            let b = s.ring_value(Backend::Rational, 3, false).unwrap();
            assert_eq!((&a * &b).star(), &b.star() * &a.star());
            assert_eq!(a.star().star(), a);
            assert_eq!((&a + &b).star(), &a.star() + &b.star());
        }
        assert_eq!(RingValue::Scalar(rat(5, 1)).star(), RingValue::Scalar(rat(5, 1)));
    }

    #[test]
    fn inverse_commutes_with_star() {
        let mut s = GenericSampler::new(11);
        for _ in 0..10 {
            let a = s.ring_value(Backend::Rational, 2, true).unwrap();
            assert_eq!(a.inv().unwrap().star(), a.star().inv().unwrap());
        }
    }

    #[test]
    fn ring_laws_exact() {
        let mut s = GenericSampler::new(3);
        for _ in 0..25 {
            let a = s.ring_value(Backend::Rational, 2, false).unwrap();
            let b = s.ring_value(Backend::Rational, 2, false).unwrap();
            let c = s.ring_value(Backend::Rational, 2, false).unwrap();
            assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }
    }

    #[test]
    fn involution_laws_float_tolerance() {
        let mut s = GenericSampler::new(5);
        for _ in 0..10 {
            let a = s.ring_value(Backend::Float, 3, false).unwrap();
            let b = s.ring_value(Backend::Float, 3, false).unwrap();
            let lhs = (&a * &b).star();
            let rhs = &b.star() * &a.star();
            let diff = (&lhs - &rhs).max_abs_f64();
            let scale = lhs.max_abs_f64().max(1.0);
            assert!(diff / scale < 1e-12);
        }
    }

    #[test]
    fn central_scalar_commutes() {
        let c = CentralScalar(rat(3, 7));
        let mut s = GenericSampler::new(13);
        for _ in 0..100 {
            let a = s.ring_value(Backend::Rational, 3, false).unwrap();
            let ci = c.promote(&a);
            assert_eq!(&ci * &a, &a * &ci);
        }
    }

    #[test]
    fn sampler_determinism() {
        let a = random_generic(1, 2, Backend::Rational);
        let b = random_generic(1, 2, Backend::Rational);
        assert_eq!(a, b);
        let c = random_generic(2, 2, Backend::Rational);
        assert_ne!(a, c);
    }

    #[test]
    fn float_rcond_threshold() {
        // nearly singular matrix is rejected
        let m = RingValue::Float(FloatMat::new(2, vec![1.0, 1.0, 1.0, 1.0 + 1e-13]));
        assert!(m.inv().is_err());
        let ok = RingValue::Float(FloatMat::new(2, vec![2.0, 1.0, 1.0, 2.0]));
        assert!(ok.inv().is_ok());
    }

    #[test]
    fn expm_matches_series_on_small_input() {
        let a = FloatMat::new(2, vec![0.1, 0.02, -0.03, 0.05]);
        let e = a.expm();
        // crude series reference
        let mut acc = FloatMat::identity(2);
        let mut term = FloatMat::identity(2);
        for k in 1..25 {
            term = floatmat_mul(&term, &a.scale(1.0 / k as f64));
            acc = floatmat_add(&acc, &term);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[(i, j)] - acc[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let mut s = GenericSampler::new(21);
        for backend in [Backend::Rational, Backend::Scalar, Backend::Float] {
            let v = s.ring_value(backend, 2, false).unwrap();
            let j = v.to_json();
            let back = RingValue::from_json(&j).unwrap();
            assert_eq!(v, back);
        }
    }
}
