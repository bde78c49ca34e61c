//! Evaluation of symbolic expressions at generic rational matrix points.
//!
//! Semantic equality of expressions in the free skew field is decided by
//! exact evaluation at several random matrix points; equality of cyclic
//! classes compares traces instead. Tensor expressions evaluate through the
//! Kronecker product.
//!
//! Words evaluate over scaled integer matrices (an integer matrix with one
//! denominator), which keeps the hot loop in plain big-integer arithmetic
//! with no per-operation gcd reduction.

use super::expr::{AtomTable, BaseGen, NCExpr, NcnetError, Sym, Tensor3Expr, TensorExpr, Word};
use crate::algebra::{GenericSampler, RatMat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Number of generic points and matrix dimension used for semantic
/// equality decisions.
pub const EQUALITY_POINTS: usize = 20;
pub const EQUALITY_DIM: usize = 3;

/// Integer matrix with a single positive denominator; value = m / den.
#[derive(Clone, Debug)]
struct ScaledMat {
    d: usize,
    m: Vec<BigInt>,
    den: BigInt,
}

impl ScaledMat {
    fn identity(d: usize) -> Self {
        let mut m = vec![BigInt::zero(); d * d];
        for i in 0..d {
            m[i * d + i] = BigInt::one();
        }
        ScaledMat {
            d,
            m,
            den: BigInt::one(),
        }
    }

    fn from_ratmat(r: &RatMat) -> Self {
        let d = r.d;
        let mut den = BigInt::one();
        for e in r.entries() {
            let q = e.denom();
            // lcm accumulation
            let g = num_integer::Integer::gcd(&den, q);
            den = &den / &g * q;
        }
        let m = r
            .entries()
            .iter()
            .map(|e| e.numer() * (&den / e.denom()))
            .collect();
        ScaledMat { d, m, den }
    }

    fn to_ratmat(&self) -> RatMat {
        RatMat::new(
            self.d,
            self.m
                .iter()
                .map(|x| BigRational::new(x.clone(), self.den.clone()))
                .collect(),
        )
    }

    fn mul(&self, other: &ScaledMat) -> ScaledMat {
        let d = self.d;
        let mut m = vec![BigInt::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let aik = &self.m[i * d + k];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..d {
                    m[i * d + j] += aik * &other.m[k * d + j];
                }
            }
        }
        ScaledMat {
            d,
            m,
            den: &self.den * &other.den,
        }
    }

    fn kron(&self, other: &ScaledMat) -> ScaledMat {
        let (da, db) = (self.d, other.d);
        let d = da * db;
        let mut m = vec![BigInt::zero(); d * d];
        for i1 in 0..da {
            for j1 in 0..da {
                let a = &self.m[i1 * da + j1];
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..db {
                    for j2 in 0..db {
                        m[(i1 * db + i2) * d + (j1 * db + j2)] = a * &other.m[i2 * db + j2];
                    }
                }
            }
        }
        ScaledMat {
            d,
            m,
            den: &self.den * &other.den,
        }
    }

    fn trace(&self) -> BigRational {
        let mut t = BigInt::zero();
        for i in 0..self.d {
            t += &self.m[i * self.d + i];
        }
        BigRational::new(t, self.den.clone())
    }

    fn entry(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.m[i * self.d + j].clone(), self.den.clone())
    }
}

/// One generic point: invertible matrices for the base generators, with
/// atom values derived from their definitions.
pub struct EvalPoint {
    pub d: usize,
    gens: BTreeMap<BaseGen, ScaledMat>,
    gen_invs: BTreeMap<BaseGen, ScaledMat>,
    atoms: Vec<ScaledMat>,
}

impl EvalPoint {
    /// Sample a point where every generator and every atom definition is
    /// invertible; retries internally with perturbed seeds.
    pub fn generic(
        seed: u64,
        d: usize,
        gens: &[BaseGen],
        atoms: &AtomTable,
    ) -> Result<EvalPoint, NcnetError> {
        for attempt in 0..50u64 {
            let mut sampler = GenericSampler::new(seed.wrapping_add(attempt.wrapping_mul(0x9e37)));
            match Self::try_sample(&mut sampler, d, gens, atoms) {
                Some(p) => return Ok(p),
                None => continue,
            }
        }
        Err(NcnetError::Evaluation(
            "no invertible evaluation point found".into(),
        ))
    }

    fn try_sample(
        sampler: &mut GenericSampler,
        d: usize,
        gens: &[BaseGen],
        atoms: &AtomTable,
    ) -> Option<EvalPoint> {
        let mut point = EvalPoint {
            d,
            gens: BTreeMap::new(),
            gen_invs: BTreeMap::new(),
            atoms: Vec::new(),
        };
        for g in gens {
            let v = match sampler
                .ring_value(crate::algebra::Backend::Rational, d, true)
                .ok()?
            {
                crate::algebra::RingValue::Rational(m) => m,
                _ => unreachable!(),
            };
            let inv = v.inverse()?;
            point.gens.insert(*g, ScaledMat::from_ratmat(&v));
            point.gen_invs.insert(*g, ScaledMat::from_ratmat(&inv));
        }
        // atoms evaluate as inverses of their definitions, in registration
        // order (definitions only look backwards)
        for i in 0..atoms.len() {
            let def = atoms.def(super::expr::AtomId(i as u32));
            let val = point.eval_expr_raw(def)?;
            let inv = val.inverse()?;
            point.atoms.push(ScaledMat::from_ratmat(&inv));
        }
        Some(point)
    }

    fn eval_word_scaled(&self, w: &Word) -> Option<ScaledMat> {
        let mut acc = ScaledMat::identity(self.d);
        for l in w.letters() {
            let m = match l.sym {
                Sym::Gen(g) => {
                    if l.inv {
                        self.gen_invs.get(&g)?
                    } else {
                        self.gens.get(&g)?
                    }
                }
                Sym::Atom(id) => self.atoms.get(id.0 as usize)?,
            };
            acc = acc.mul(m);
        }
        Some(acc)
    }

    fn eval_expr_raw(&self, e: &NCExpr) -> Option<RatMat> {
        let d = self.d;
        let mut acc = RatMat::zero(d);
        for (w, c) in e.terms() {
            let m = self.eval_word_scaled(w)?;
            for i in 0..d {
                for j in 0..d {
                    let term = m.entry(i, j) * c;
                    acc[(i, j)] = &acc[(i, j)] + &term;
                }
            }
        }
        Some(acc)
    }

    pub fn eval_word(&self, w: &Word) -> Result<RatMat, NcnetError> {
        self.eval_word_scaled(w)
            .map(|s| s.to_ratmat())
            .ok_or_else(|| NcnetError::Evaluation("missing assignment".into()))
    }

    pub fn eval_expr(&self, e: &NCExpr) -> Result<RatMat, NcnetError> {
        self.eval_expr_raw(e)
            .ok_or_else(|| NcnetError::Evaluation("missing assignment".into()))
    }

    /// Kronecker evaluation of a two-slot tensor.
    pub fn eval_tensor(&self, t: &TensorExpr) -> Result<RatMat, NcnetError> {
        let dd = self.d * self.d;
        let mut acc = RatMat::zero(dd);
        for ((u, v), c) in t.terms() {
            let k = self
                .eval_word_scaled(u)
                .zip(self.eval_word_scaled(v))
                .map(|(a, b)| a.kron(&b))
                .ok_or_else(|| NcnetError::Evaluation("missing assignment".into()))?;
            for i in 0..dd {
                for j in 0..dd {
                    let term = k.entry(i, j) * c;
                    acc[(i, j)] = &acc[(i, j)] + &term;
                }
            }
        }
        Ok(acc)
    }

    /// Kronecker evaluation of a three-slot tensor.
    pub fn eval_tensor3(&self, t: &Tensor3Expr) -> Result<RatMat, NcnetError> {
        let ddd = self.d * self.d * self.d;
        let mut acc = RatMat::zero(ddd);
        for ((u, v, w), c) in t.terms() {
            let (a, b, cc) = (
                self.eval_word_scaled(u),
                self.eval_word_scaled(v),
                self.eval_word_scaled(w),
            );
            let k = a
                .zip(b)
                .zip(cc)
                .map(|((a, b), c)| a.kron(&b.kron(&c)))
                .ok_or_else(|| NcnetError::Evaluation("missing assignment".into()))?;
            for i in 0..ddd {
                for j in 0..ddd {
                    let term = k.entry(i, j) * c;
                    acc[(i, j)] = &acc[(i, j)] + &term;
                }
            }
        }
        Ok(acc)
    }

    pub fn trace_expr(&self, e: &NCExpr) -> Result<BigRational, NcnetError> {
        let mut acc = BigRational::zero();
        for (w, c) in e.terms() {
            let m = self
                .eval_word_scaled(w)
                .ok_or_else(|| NcnetError::Evaluation("missing assignment".into()))?;
            acc += m.trace() * c;
        }
        Ok(acc)
    }
}

fn collect_gens(exprs: &[&NCExpr], atoms: &AtomTable) -> Vec<BaseGen> {
    let mut set = std::collections::BTreeSet::new();
    let mut scan = |e: &NCExpr| {
        for (w, _) in e.terms() {
            for l in w.letters() {
                if let Sym::Gen(g) = l.sym {
                    set.insert(g);
                }
            }
        }
    };
    for e in exprs {
        scan(e);
    }
    for i in 0..atoms.len() {
        scan(atoms.def(super::expr::AtomId(i as u32)));
    }
    set.into_iter().collect()
}

/// Largest absolute difference of evaluations over the sampled points, as an
/// exact rational turned into f64 for reporting; `0` certifies equality at
/// every point.
pub fn expr_drift(
    e1: &NCExpr,
    e2: &NCExpr,
    atoms: &AtomTable,
    seed: u64,
) -> Result<f64, NcnetError> {
    let gens = collect_gens(&[e1, e2], atoms);
    let mut worst = BigRational::zero();
    for p in 0..EQUALITY_POINTS as u64 {
        let point = EvalPoint::generic(seed.wrapping_add(p * 7919), EQUALITY_DIM, &gens, atoms)?;
        let a = point.eval_expr(e1)?;
        let b = point.eval_expr(e2)?;
        for i in 0..point.d {
            for j in 0..point.d {
                let diff = (&a[(i, j)] - &b[(i, j)]).abs();
                if diff > worst {
                    worst = diff;
                }
            }
        }
    }
    Ok(rational_to_f64(&worst))
}

/// Trace (cyclic-class) drift over the sampled points. The expressions are
/// projected to their natural form first; cyclic rotation preserves traces,
/// and the projection both shortens words and merges terms.
pub fn trace_drift(
    e1: &NCExpr,
    e2: &NCExpr,
    atoms: &AtomTable,
    seed: u64,
) -> Result<f64, NcnetError> {
    let e1 = e1.natural_form();
    let e2 = e2.natural_form();
    let gens = collect_gens(&[&e1, &e2], atoms);
    let mut worst = BigRational::zero();
    for p in 0..EQUALITY_POINTS as u64 {
        let point = EvalPoint::generic(seed.wrapping_add(p * 7919), EQUALITY_DIM, &gens, atoms)?;
        let diff = (&point.trace_expr(&e1)? - &point.trace_expr(&e2)?).abs();
        if diff > worst {
            worst = diff;
        }
    }
    Ok(rational_to_f64(&worst))
}

/// Tensor drift via Kronecker evaluation.
pub fn tensor_drift(
    t1: &TensorExpr,
    t2: &TensorExpr,
    atoms: &AtomTable,
    seed: u64,
) -> Result<f64, NcnetError> {
    let mut exprs: Vec<NCExpr> = Vec::new();
    for t in [t1, t2] {
        for ((u, v), c) in t.terms() {
            exprs.push(NCExpr::from_terms([(u.clone(), c.clone()), (v.clone(), c.clone())]));
        }
    }
    let refs: Vec<&NCExpr> = exprs.iter().collect();
    let gens = collect_gens(&refs, atoms);
    let mut worst = BigRational::zero();
    for p in 0..EQUALITY_POINTS as u64 {
        let point = EvalPoint::generic(seed.wrapping_add(p * 7919), EQUALITY_DIM, &gens, atoms)?;
        let a = point.eval_tensor(t1)?;
        let b = point.eval_tensor(t2)?;
        let dd = point.d * point.d;
        for i in 0..dd {
            for j in 0..dd {
                let diff = (&a[(i, j)] - &b[(i, j)]).abs();
                if diff > worst {
                    worst = diff;
                }
            }
        }
    }
    Ok(rational_to_f64(&worst))
}

fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Semantic equality: exact agreement at all sampled points.
pub fn nc_equal(e1: &NCExpr, e2: &NCExpr, atoms: &AtomTable, seed: u64) -> Result<bool, NcnetError> {
    Ok(expr_drift(e1, e2, atoms, seed)? == 0.0)
}
