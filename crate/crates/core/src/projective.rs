//! Quasi-Pluecker coordinates on 2 x n coordinate matrices, non-commutative
//! cross-ratios, and their invariance/identity suite.

use crate::algebra::RingValue;
use crate::quasidet::{quasi_det, QMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProjectiveError {
    #[error("degenerate configuration: boxed 2x2 quasi-determinant on columns ({0}, {1}) is not invertible")]
    DegenerateConfiguration(usize, usize),
    #[error("column indices must be distinct: {0}")]
    IndexClash(String),
    #[error("shape error: {0}")]
    Shape(String),
}

/// A point of the projective line over the ring, stored as an explicit lift.
#[derive(Clone, PartialEq, Debug)]
pub struct PointP1 {
    pub x1: RingValue,
    pub x2: RingValue,
}

impl PointP1 {
    pub fn new(x1: RingValue, x2: RingValue) -> Self {
        assert!(
            !(x1.is_zero() && x2.is_zero()),
            "both lift components are zero"
        );
        PointP1 { x1, x2 }
    }

    /// Affine chart lift `(v, 1)`.
    pub fn affine(v: &RingValue) -> Self {
        PointP1 {
            x1: v.clone(),
            x2: v.one_like(),
        }
    }

    /// Right-scale the lift by an invertible ring element.
    pub fn scaled(&self, lambda: &RingValue) -> Self {
        PointP1 {
            x1: &self.x1 * lambda,
            x2: &self.x2 * lambda,
        }
    }

    /// Apply a 2x2 matrix over the ring on the left.
    pub fn transformed(&self, g: &QMatrix) -> Self {
        assert!(g.rows() == 2 && g.cols() == 2, "g must be 2x2");
        PointP1 {
            x1: &(g.at(0, 0) * &self.x1) + &(g.at(0, 1) * &self.x2),
            x2: &(g.at(1, 0) * &self.x1) + &(g.at(1, 1) * &self.x2),
        }
    }
}

/// A 2 x n coordinate matrix, kept as its list of column lifts.
#[derive(Clone, Debug)]
pub struct CoordMatrix {
    cols: Vec<PointP1>,
}

impl CoordMatrix {
    pub fn new(cols: Vec<PointP1>) -> Self {
        assert!(!cols.is_empty());
        CoordMatrix { cols }
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn col(&self, i: usize) -> &PointP1 {
        &self.cols[i]
    }
}

/// Boxed 2x2 quasi-determinant `|(col_i, col_j)|_{(1,2)}` used by the
/// Pluecker coordinates: `a_{1j} - a_{1i} a_{2i}^{-1} a_{2j}`.
fn boxed_qdet(ci: &PointP1, cj: &PointP1) -> Result<RingValue, ProjectiveError> {
    let m = QMatrix::from_rows(vec![
        vec![ci.x1.clone(), cj.x1.clone()],
        vec![ci.x2.clone(), cj.x2.clone()],
    ])
    .map_err(|e| ProjectiveError::Shape(e.to_string()))?;
    quasi_det(&m, 0, 1).map_err(|_| ProjectiveError::DegenerateConfiguration(0, 1))
}

/// Quasi-Pluecker coordinate `q_{jk}^i(A)`.
pub fn qpluecker(a: &CoordMatrix, i: usize, j: usize, k: usize) -> Result<RingValue, ProjectiveError> {
    if i == j {
        return Err(ProjectiveError::IndexClash(format!("i == j == {i}")));
    }
    let left = boxed_qdet(a.col(i), a.col(j))
        .map_err(|_| ProjectiveError::DegenerateConfiguration(i, j))?;
    let right = boxed_qdet(a.col(i), a.col(k))
        .map_err(|_| ProjectiveError::DegenerateConfiguration(i, k))?;
    let linv = left
        .inv()
        .map_err(|_| ProjectiveError::DegenerateConfiguration(i, j))?;
    Ok(&linv * &right)
}

/// The single-quasi-determinant form of `q_{jk}^i`, used as a cross-check:
/// `-[ [a_i a_k a_j], [0 box(0) 1] ]` expanded at the boxed zero.
pub fn qpluecker_alt(
    a: &CoordMatrix,
    i: usize,
    j: usize,
    k: usize,
) -> Result<RingValue, ProjectiveError> {
    if i == j {
        return Err(ProjectiveError::IndexClash(format!("i == j == {i}")));
    }
    let (ci, ck, cj) = (a.col(i), a.col(k), a.col(j));
    let one = ci.x1.one_like();
    let zero = ci.x1.zero_like();
    let m = QMatrix::from_rows(vec![
        vec![ci.x1.clone(), ck.x1.clone(), cj.x1.clone()],
        vec![ci.x2.clone(), ck.x2.clone(), cj.x2.clone()],
        vec![zero.clone(), zero, one],
    ])
    .map_err(|e| ProjectiveError::Shape(e.to_string()))?;
    let q = quasi_det(&m, 2, 1).map_err(|_| ProjectiveError::DegenerateConfiguration(i, k))?;
    Ok(-&q)
}

/// Non-commutative cross-ratio `kappa(x,y,z,t) = q_{zt}^y q_{tz}^x` on the
/// coordinate matrix with columns (x, y, z, t). The four points must be in
/// general position: every pair of columns spans, i.e. each 2x2 over the
/// ring is invertible. Coincident columns (such as z = t) are rejected.
pub fn cross_ratio(
    x: &PointP1,
    y: &PointP1,
    z: &PointP1,
    t: &PointP1,
) -> Result<RingValue, ProjectiveError> {
    let m = CoordMatrix::new(vec![x.clone(), y.clone(), z.clone(), t.clone()]);
    for i in 0..4 {
        for j in i + 1..4 {
            let pair = QMatrix::from_rows(vec![
                vec![m.col(i).x1.clone(), m.col(j).x1.clone()],
                vec![m.col(i).x2.clone(), m.col(j).x2.clone()],
            ])
            .map_err(|e| ProjectiveError::Shape(e.to_string()))?;
            if !pair.invertible_over_ring() {
                return Err(ProjectiveError::DegenerateConfiguration(i, j));
            }
        }
    }
    let q1 = qpluecker(&m, 1, 2, 3)?;
    let q2 = qpluecker(&m, 0, 3, 2)?;
    Ok(&q1 * &q2)
}

/// Residual of the relative invariance law
/// `kappa(g x l1, g y l2, g z l3, g t l4) - l3^{-1} kappa(x,y,z,t) l3`.
pub fn verify_relative_invariance(
    x: &CoordMatrix,
    g: &QMatrix,
    lambdas: &[RingValue; 4],
) -> Result<RingValue, ProjectiveError> {
    if x.len() != 4 {
        return Err(ProjectiveError::Shape("need 4 columns".into()));
    }
    let kappa = cross_ratio(x.col(0), x.col(1), x.col(2), x.col(3))?;
    let moved: Vec<PointP1> = (0..4)
        .map(|i| x.col(i).transformed(g).scaled(&lambdas[i]))
        .collect();
    let kappa2 = cross_ratio(&moved[0], &moved[1], &moved[2], &moved[3])?;
    let l3inv = lambdas[2]
        .inv()
        .map_err(|_| ProjectiveError::DegenerateConfiguration(2, 2))?;
    Ok(&kappa2 - &(&(&l3inv * &kappa) * &lambdas[2]))
}

/// Residuals of the exchange identities on a 4-column configuration plus a
/// fifth auxiliary point `w`; the `eq_per` identity is recorded through both
/// of its displayed equalities.
#[derive(Debug)]
pub struct CrIdentityResiduals {
    /// `kappa(x,y,z,t) - kappa(w,y,z,t) kappa(x,w,z,t)`
    pub eq3: RingValue,
    /// `kappa(x,y,z,t) - (1 - kappa(t,y,z,x))`
    pub eq_one_minus: RingValue,
    /// `q^x_{tz} kappa q^x_{zt} - kappa(y,x,t,z)`
    pub eq_per_x: RingValue,
    /// `q^y_{tz} kappa q^y_{zt} - kappa(y,x,t,z)` (middle chain member)
    pub eq_per_y: RingValue,
}

impl CrIdentityResiduals {
    pub fn all_zero(&self) -> bool {
        self.eq3.is_zero()
            && self.eq_one_minus.is_zero()
            && self.eq_per_x.is_zero()
            && self.eq_per_y.is_zero()
    }
}

pub fn verify_cr_identities(
    x: &CoordMatrix,
    w: &PointP1,
) -> Result<CrIdentityResiduals, ProjectiveError> {
    if x.len() != 4 {
        return Err(ProjectiveError::Shape("need 4 columns".into()));
    }
    let (px, py, pz, pt) = (x.col(0), x.col(1), x.col(2), x.col(3));
    let kappa = cross_ratio(px, py, pz, pt)?;
    let one = kappa.one_like();

    let eq3 = {
        let k1 = cross_ratio(w, py, pz, pt)?;
        let k2 = cross_ratio(px, w, pz, pt)?;
        &kappa - &(&k1 * &k2)
    };
    let eq_one_minus = {
        let k = cross_ratio(pt, py, pz, px)?;
        &kappa - &(&one - &k)
    };
    let m = CoordMatrix::new(vec![px.clone(), py.clone(), pz.clone(), pt.clone()]);
    let rhs = cross_ratio(py, px, pt, pz)?;
    let eq_per_x = {
        let qtz = qpluecker(&m, 0, 3, 2)?;
        let qzt = qpluecker(&m, 0, 2, 3)?;
        &(&(&qtz * &kappa) * &qzt) - &rhs
    };
    let eq_per_y = {
        let qtz = qpluecker(&m, 1, 3, 2)?;
        let qzt = qpluecker(&m, 1, 2, 3)?;
        &(&(&qtz * &kappa) * &qzt) - &rhs
    };
    Ok(CrIdentityResiduals {
        eq3,
        eq_one_minus,
        eq_per_x,
        eq_per_y,
    })
}

/// Residuals of the skew-symmetry relation `q_{ij}^k q_{jk}^i q_{ki}^j = -1`
/// (columns 0,1,2) and the Pluecker identity
/// `q_{ij}^k q_{ji}^l + q_{il}^k q_{li}^j = 1` (columns 0,1,2,3).
pub fn verify_skew_pluecker(a: &CoordMatrix) -> Result<(RingValue, RingValue), ProjectiveError> {
    if a.len() < 4 {
        return Err(ProjectiveError::Shape("need 4 columns".into()));
    }
    let (i, j, k, l) = (0usize, 1usize, 2usize, 3usize);
    let one = a.col(0).x1.one_like();
    let skew = {
        let p = &(&qpluecker(a, k, i, j)? * &qpluecker(a, i, j, k)?) * &qpluecker(a, j, k, i)?;
        &p + &one
    };
    let pluecker = {
        let s = &(&qpluecker(a, k, i, j)? * &qpluecker(a, l, j, i)?)
            + &(&qpluecker(a, k, i, l)? * &qpluecker(a, j, l, i)?);
        &s - &one
    };
    Ok((skew, pluecker))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Backend, GenericSampler, RingValue};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn scalar(n: i64) -> RingValue {
        RingValue::Scalar(BigRational::from(BigInt::from(n)))
    }

    fn rand_points(s: &mut GenericSampler, n: usize, backend: Backend, d: usize) -> CoordMatrix {
        CoordMatrix::new(
            (0..n)
                .map(|_| {
                    PointP1::new(
                        s.ring_value(backend, d, false).unwrap(),
                        s.ring_value(backend, d, false).unwrap(),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn affine_scalar_pluecker() {
        // v = (0, 1, 3): q_{12}^0 = (v1 - v0)^{-1} (v2 - v0) = 3
        let m = CoordMatrix::new(vec![
            PointP1::affine(&scalar(0)),
            PointP1::affine(&scalar(1)),
            PointP1::affine(&scalar(3)),
        ]);
        assert_eq!(qpluecker(&m, 0, 1, 2).unwrap(), scalar(3));
    }

    #[test]
    fn degenerate_k_equals_j() {
        let mut s = GenericSampler::new(2);
        let m = rand_points(&mut s, 3, Backend::Rational, 2);
        if let Ok(q) = qpluecker(&m, 0, 1, 1) {
            assert!(q.is_one());
        }
    }

    #[test]
    fn inverse_property_random() {
        let mut s = GenericSampler::new(3);
        let mut done = 0;
        while done < 10 {
            let m = rand_points(&mut s, 3, Backend::Rational, 2);
            match (qpluecker(&m, 0, 2, 1), qpluecker(&m, 0, 1, 2)) {
                (Ok(a), Ok(b)) => {
                    assert!((&a * &b).is_one());
                    done += 1;
                }
                _ => continue,
            }
        }
    }

    #[test]
    fn alt_form_agrees() {
        let mut s = GenericSampler::new(5);
        let mut done = 0;
        while done < 10 {
            let m = rand_points(&mut s, 4, Backend::Rational, 2);
            match (qpluecker(&m, 0, 1, 2), qpluecker_alt(&m, 0, 1, 2)) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a, b);
                    done += 1;
                }
                _ => continue,
            }
        }
    }

    #[test]
    fn scalar_cross_ratio_example() {
        // x=0, y=1, z=2, t=3 -> 4/3
        let k = cross_ratio(
            &PointP1::affine(&scalar(0)),
            &PointP1::affine(&scalar(1)),
            &PointP1::affine(&scalar(2)),
            &PointP1::affine(&scalar(3)),
        )
        .unwrap();
        assert_eq!(
            k,
            RingValue::Scalar(BigRational::new(BigInt::from(4), BigInt::from(3)))
        );
    }

    #[test]
    fn coincident_points_degenerate() {
        let p = PointP1::affine(&scalar(2));
        assert!(cross_ratio(&PointP1::affine(&scalar(0)), &PointP1::affine(&scalar(1)), &p, &p).is_err());
    }

    #[test]
    fn classical_cross_ratio_formula_all_small_rationals() {
        // kappa = (z-y)^{-1}(t-y)(t-x)^{-1}(z-x) on distinct small rationals
        let vals = [-2i64, -1, 0, 1, 2, 3];
        for &x in &vals {
            for &y in &vals {
                for &z in &vals {
                    for &t in &vals {
                        if x == y || x == z || x == t || y == z || y == t || z == t {
                            continue;
                        }
                        let k = cross_ratio(
                            &PointP1::affine(&scalar(x)),
                            &PointP1::affine(&scalar(y)),
                            &PointP1::affine(&scalar(z)),
                            &PointP1::affine(&scalar(t)),
                        )
                        .unwrap();
                        let want = BigRational::new(
                            BigInt::from((t - y) * (z - x)),
                            BigInt::from((z - y) * (t - x)),
                        );
                        assert_eq!(k, RingValue::Scalar(want));
                    }
                }
            }
        }
    }

    #[test]
    fn identity_transform_invariance() {
        let mut s = GenericSampler::new(12);
        let m = rand_points(&mut s, 4, Backend::Rational, 2);
        let proto = &m.col(0).x1;
        let g = QMatrix::identity_like(2, proto);
        let one = proto.one_like();
        let lambdas = [one.clone(), one.clone(), one.clone(), one];
        let r = verify_relative_invariance(&m, &g, &lambdas).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn w_equals_x_degenerates_eq3() {
        let mut s = GenericSampler::new(18);
        let m = rand_points(&mut s, 4, Backend::Rational, 2);
        let w = m.col(0).clone();
        assert!(verify_cr_identities(&m, &w).is_err());
    }

    #[test]
    fn repeated_columns_error() {
        let p = PointP1::affine(&scalar(1));
        let m = CoordMatrix::new(vec![p.clone(), p.clone(), p.clone(), p]);
        assert!(verify_skew_pluecker(&m).is_err());
    }
}
