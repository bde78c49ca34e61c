//! The weighted network on a cylinder: square moves, the (X, Y, Z) gauge,
//! the induced discrete dynamics, boundary measurement matrices and the
//! conserved spectral coefficients.

use super::expr::{AtomId, AtomTable, BaseGen, GenKind, Letter, NCExpr, NcnetError, Word};
use crate::algebra::{CentralScalar, RingValue};
use crate::quasidet::{nc_inverse, QMatrix};
use num_rational::BigRational;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("f_{0} = b + a d c is not invertible")]
    SingularF(usize),
    #[error("X_{0} + Y_{0} is not invertible")]
    DegenerateConfiguration(usize),
    #[error("weight {0} is not invertible")]
    SingularWeight(String),
    #[error("mu = 0 is outside the factorization domain")]
    MuZero,
    #[error(transparent)]
    Expr(#[from] NcnetError),
}

// ---------------------------------------------------------------------------
// numeric network
// ---------------------------------------------------------------------------

/// Numeric edge weights of the N-square cylinder network; squares are
/// indexed 1..=N and stored 0-based.
#[derive(Clone, Debug)]
pub struct NumericNetwork {
    pub n: usize,
    pub a: Vec<RingValue>,
    pub b: Vec<RingValue>,
    pub c: Vec<RingValue>,
    pub d: Vec<RingValue>,
}

impl NumericNetwork {
    /// Deterministic random weights, resampled until the gauge and one move
    /// exist.
    pub fn random(seed: u64, backend: crate::algebra::Backend, d: usize, n: usize) -> Self {
        let mut sampler = crate::algebra::GenericSampler::new(seed);
        loop {
            let mut draw = |_: ()| -> Vec<RingValue> {
                (0..n)
                    .map(|_| sampler.ring_value(backend, d, true).expect("sampling"))
                    .collect()
            };
            let net = NumericNetwork {
                n,
                a: draw(()),
                b: draw(()),
                c: draw(()),
                d: draw(()),
            };
            if net.xy_weights().is_ok() && net.square_move_all().is_ok() {
                return net;
            }
        }
    }

    fn f(&self, i: usize) -> RingValue {
        // f_i = b_i + a_i d_i c_i
        &self.b[i] + &(&(&self.a[i] * &self.d[i]) * &self.c[i])
    }

    /// Square move at every face: `a~ = d c f^{-1}`, `b~ = f`,
    /// `c~ = f^{-1} a d`, `d~ = d c f^{-1} b c^{-1}` with `f = b + a d c`.
    pub fn square_move_all(&self) -> Result<NumericNetwork, NetworkError> {
        let mut out = self.clone();
        for i in 0..self.n {
            let f = self.f(i);
            let finv = f.inv().map_err(|_| NetworkError::SingularF(i + 1))?;
            let cinv = self.c[i]
                .inv()
                .map_err(|_| NetworkError::SingularWeight(format!("c{}", i + 1)))?;
            let dc = &self.d[i] * &self.c[i];
            out.a[i] = &dc * &finv;
            out.b[i] = f;
            out.c[i] = &(&finv * &self.a[i]) * &self.d[i];
            out.d[i] = &(&(&dc * &finv) * &self.b[i]) * &cinv;
        }
        Ok(out)
    }

    /// Per-square transfer matrix `[[b + adc, ad], [dc, d]]` (path sums from
    /// (bottom, top) sources to (bottom, top) sinks).
    pub fn square_transfer(&self, i: usize) -> QMatrix {
        let ad = &self.a[i] * &self.d[i];
        let dc = &self.d[i] * &self.c[i];
        QMatrix::from_rows(vec![
            vec![self.f(i), ad],
            vec![dc, self.d[i].clone()],
        ])
        .expect("uniform weights")
    }

    /// Transfer matrix of a moved square: the move flips the internal
    /// orientation, so the path sums are `[[b~, b~ c~], [a~ b~, d~ + a~ b~ c~]]`.
    pub fn moved_square_transfer(&self, i: usize) -> QMatrix {
        let bt = &self.b[i];
        let bc = bt * &self.c[i];
        let ab = &self.a[i] * bt;
        let abc = &ab * &self.c[i];
        QMatrix::from_rows(vec![
            vec![bt.clone(), bc],
            vec![ab, &self.d[i] + &abc],
        ])
        .expect("uniform weights")
    }

    /// The gauge-reduced weights: `X_1 = c_N^{-1} a_1`,
    /// `Y_1 = c_N^{-1} b_1 c_1^{-1} d_1^{-1}`, and for i >= 2
    /// `X_i = z_{i-1} a_i c_{i-1}^{-1} z_{i-1}^{-1}`,
    /// `Y_i = z_{i-1} b_i c_i^{-1} d_i^{-1} c_{i-1}^{-1} z_{i-1}^{-1}` with
    /// `z_i = d_1 c_1 ... d_{i-1} c_{i-1} d_i`; `Z = z_N c_N`.
    pub fn xy_weights(&self) -> Result<XyWeights, NetworkError> {
        let n = self.n;
        let inv = |v: &RingValue, name: String| {
            v.inv().map_err(|_| NetworkError::SingularWeight(name))
        };
        let mut z_prefix = Vec::with_capacity(n + 1); // z_i for i = 0..n (z_0 = 1)
        let one = self.a[0].one_like();
        z_prefix.push(one.clone());
        for i in 1..=n {
            // z_i = z_{i-1} with the trailing d replaced: build directly
            let mut z = one.clone();
            for k in 1..i {
                z = &(&z * &self.d[k - 1]) * &self.c[k - 1];
            }
            z = &z * &self.d[i - 1];
            z_prefix.push(z);
        }
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let cn_inv = inv(&self.c[n - 1], format!("c{n}"))?;
        x.push(&cn_inv * &self.a[0]);
        y.push(
            &(&(&cn_inv * &self.b[0]) * &inv(&self.c[0], "c1".into())?)
                * &inv(&self.d[0], "d1".into())?,
        );
        for i in 2..=n {
            let z = &z_prefix[i - 1];
            let zinv = inv(z, format!("z{}", i - 1))?;
            let xi = &(&(z * &self.a[i - 1]) * &inv(&self.c[i - 2], format!("c{}", i - 1))?) * &zinv;
            let yi = &(&(&(&(z * &self.b[i - 1]) * &inv(&self.c[i - 1], format!("c{i}"))?)
                * &inv(&self.d[i - 1], format!("d{i}"))?)
                * &inv(&self.c[i - 2], format!("c{}", i - 1))?)
                * &zinv;
            x.push(xi);
            y.push(yi);
        }
        let z = &z_prefix[n] * &self.c[n - 1];
        Ok(XyWeights { n, x, y, z })
    }

    /// Gauge weights of the moved network:
    /// `X~_1 = c~_N a~_1^{-1}`, `Y~_1 = d~_1 a~_2^{-1} b~_1^{-1} a~_1^{-1}`,
    /// and for i >= 2 the xi-conjugated forms with
    /// `xi_i = a~_1 b~_1 ... a~_i b~_i` (base weights are plainly periodic:
    /// `a~_{N+1} = a~_1`).
    pub fn tilde_xy_weights(&self) -> Result<XyWeights, NetworkError> {
        let moved = self.square_move_all()?;
        let n = self.n;
        let one = self.a[0].one_like();
        let inv = |v: &RingValue, name: String| {
            v.inv().map_err(|_| NetworkError::SingularWeight(name))
        };
        let mut xi = Vec::with_capacity(n + 1);
        xi.push(one.clone());
        for i in 0..n {
            xi.push(&(&xi[i] * &moved.a[i]) * &moved.b[i]);
        }
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        x.push(&moved.c[n - 1] * &inv(&moved.a[0], "a~1".into())?);
        let a_next = |i: usize| -> &RingValue { &moved.a[i % n] };
        y.push(
            &(&(&moved.d[0] * &inv(a_next(1), "a~2".into())?) * &inv(&moved.b[0], "b~1".into())?)
                * &inv(&moved.a[0], "a~1".into())?,
        );
        for i in 2..=n {
            let conj = &xi[i - 1];
            let conj_inv = inv(conj, format!("xi{}", i - 1))?;
            let xi_val = &(conj * &(&moved.c[i - 2] * &inv(&moved.a[i - 1], format!("a~{i}"))?))
                * &conj_inv;
            let core = &(&(&moved.d[i - 1] * &inv(a_next(i), format!("a~{}", i + 1))?)
                * &inv(&moved.b[i - 1], format!("b~{i}"))?)
                * &inv(&moved.a[i - 1], format!("a~{i}"))?;
            let yi_val = &(conj * &core) * &conj_inv;
            x.push(xi_val);
            y.push(yi_val);
        }
        // xi_N equals Z = d_1 c_1 ... d_N c_N
        let z = xi[n].clone();
        Ok(XyWeights { n, x, y, z })
    }
}

/// White-swap weight rewrite (type-2 Postnikov move): edges `(x up, y down)`
/// across a white-white edge `b` become `(b^{-1} x, b y)`.
pub fn white_swap(
    b: &RingValue,
    x: &RingValue,
    y: &RingValue,
) -> Result<(RingValue, RingValue), NetworkError> {
    let binv = b
        .inv()
        .map_err(|_| NetworkError::SingularWeight("white-swap edge".into()))?;
    Ok((&binv * x, b * y))
}

/// Black-swap weight rewrite (type-3 Postnikov move): `(x, y)` become
/// `(x b, y b^{-1})`.
pub fn black_swap(
    b: &RingValue,
    x: &RingValue,
    y: &RingValue,
) -> Result<(RingValue, RingValue), NetworkError> {
    let binv = b
        .inv()
        .map_err(|_| NetworkError::SingularWeight("black-swap edge".into()))?;
    Ok((x * b, y * &binv))
}

/// Gauge weights with the monodromy element; twisted indexing
/// `X_{i+N} = Z X_i Z^{-1}`.
#[derive(Clone, Debug)]
pub struct XyWeights {
    pub n: usize,
    pub x: Vec<RingValue>,
    pub y: Vec<RingValue>,
    pub z: RingValue,
}

impl XyWeights {
    /// Twisted access, `i` arbitrary (1-based; 0 and n+1 wrap through Z).
    pub fn x_at(&self, i: i64) -> Result<RingValue, NetworkError> {
        self.twisted(i, &self.x)
    }

    pub fn y_at(&self, i: i64) -> Result<RingValue, NetworkError> {
        self.twisted(i, &self.y)
    }

    fn twisted(&self, i: i64, arr: &[RingValue]) -> Result<RingValue, NetworkError> {
        let n = self.n as i64;
        let mut shift = 0i64;
        let mut idx = i;
        while idx < 1 {
            idx += n;
            shift -= 1;
        }
        while idx > n {
            idx -= n;
            shift += 1;
        }
        let base = arr[(idx - 1) as usize].clone();
        if shift == 0 {
            return Ok(base);
        }
        let zinv = self
            .z
            .inv()
            .map_err(|_| NetworkError::SingularWeight("Z".into()))?;
        let mut out = base;
        for _ in 0..shift.abs() {
            out = if shift > 0 {
                &(&self.z * &out) * &zinv
            } else {
                &(&zinv * &out) * &self.z
            };
        }
        Ok(out)
    }

    /// Twist-law residual `X_{i+N} - Z X_i Z^{-1}` (zero by construction,
    /// kept as an explicit check).
    pub fn twist_residual(&self, i: i64) -> Result<RingValue, NetworkError> {
        let lhs = self.x_at(i + self.n as i64)?;
        let zinv = self
            .z
            .inv()
            .map_err(|_| NetworkError::SingularWeight("Z".into()))?;
        let rhs = &(&self.z * &self.x_at(i)?) * &zinv;
        Ok(&lhs - &rhs)
    }
}

/// One step of the induced dynamics:
/// `X~_i = (X_{i-1} + Y_{i-1})^{-1} X_{i-1} (X_i + Y_i)`,
/// `Y~_i = (X_i + Y_i)^{-1} Y_i (X_{i+1} + Y_{i+1})`, `Z~ = Z`,
/// with the twisted wrap at both ends.
pub fn step_xy(w: &XyWeights) -> Result<XyWeights, NetworkError> {
    let n = w.n;
    let s_at = |i: i64| -> Result<RingValue, NetworkError> {
        Ok(&w.x_at(i)? + &w.y_at(i)?)
    };
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 1..=n as i64 {
        let sm = s_at(i - 1)?
            .inv()
            .map_err(|_| NetworkError::DegenerateConfiguration((i - 1).rem_euclid(n as i64) as usize))?;
        x.push(&(&sm * &w.x_at(i - 1)?) * &s_at(i)?);
        let s = s_at(i)?
            .inv()
            .map_err(|_| NetworkError::DegenerateConfiguration(i as usize))?;
        y.push(&(&s * &w.y_at(i)?) * &s_at(i + 1)?);
    }
    Ok(XyWeights {
        n,
        x,
        y,
        z: w.z.clone(),
    })
}

// ---------------------------------------------------------------------------
// boundary measurements and invariants
// ---------------------------------------------------------------------------

/// Boundary measurement matrix `B(mu) = B_1(mu) ... B_N(mu) diag(Z, Z)` at a
/// fixed central value of mu, with `B_i = [[X_i, mu(X_i + Y_i)], [mu, mu^2]]`.
/// The trailing factor carries the rail weights of the gauge-reduced network.
pub fn boundary_matrix(w: &XyWeights, mu: &CentralScalar) -> QMatrix {
    let proto = &w.x[0];
    let mu_v = mu.promote(proto);
    let mu2 = &mu_v * &mu_v;
    let mut acc: Option<QMatrix> = None;
    for i in 0..w.n {
        let b = QMatrix::from_rows(vec![
            vec![w.x[i].clone(), &mu_v * &(&w.x[i] + &w.y[i])],
            vec![mu_v.clone(), mu2.clone()],
        ])
        .expect("uniform");
        acc = Some(match acc {
            Some(p) => p.mul(&b),
            None => b,
        });
    }
    let zf = QMatrix::from_rows(vec![
        vec![w.z.clone(), proto.zero_like()],
        vec![proto.zero_like(), w.z.clone()],
    ])
    .expect("uniform");
    acc.unwrap().mul(&zf)
}

/// Polynomial in mu with ring coefficients, per degree.
type MuPoly = BTreeMap<i64, RingValue>;

fn mu_poly_mat_mul(a: &[Vec<MuPoly>], b: &[Vec<MuPoly>]) -> Vec<Vec<MuPoly>> {
    let n = a.len();
    let m = b[0].len();
    let k_len = b.len();
    let mut out = vec![vec![MuPoly::new(); m]; n];
    for i in 0..n {
        for j in 0..m {
            for k in 0..k_len {
                for (da, ca) in &a[i][k] {
                    for (db, cb) in &b[k][j] {
                        let e = out[i][j]
                            .entry(da + db)
                            .or_insert_with(|| ca.zero_like());
                        *e = &*e + &(ca * cb);
                    }
                }
            }
        }
    }
    for row in out.iter_mut() {
        for cell in row.iter_mut() {
            cell.retain(|_, v| !v.is_zero());
        }
    }
    out
}

/// Spectral invariants: `t_{i,j}` is the coefficient of `mu^j` in the
/// representation-space trace of `B(mu)^i`. Exact backends only.
pub fn t_invariants(
    w: &XyWeights,
    i_max: usize,
) -> Result<BTreeMap<(usize, i64), BigRational>, NetworkError> {
    let proto = &w.x[0];
    let one = proto.one_like();
    let zero = proto.zero_like();
    let poly = |deg: i64, v: RingValue| -> MuPoly {
        let mut p = MuPoly::new();
        if !v.is_zero() {
            p.insert(deg, v);
        }
        p
    };
    let mut b_total: Option<Vec<Vec<MuPoly>>> = None;
    for i in 0..w.n {
        let s = &w.x[i] + &w.y[i];
        let bi = vec![
            vec![poly(0, w.x[i].clone()), poly(1, s)],
            vec![poly(1, one.clone()), poly(2, one.clone())],
        ];
        b_total = Some(match b_total {
            Some(p) => mu_poly_mat_mul(&p, &bi),
            None => bi,
        });
    }
    let zf = vec![
        vec![poly(0, w.z.clone()), poly(0, zero.clone())],
        vec![poly(0, zero.clone()), poly(0, w.z.clone())],
    ];
    let b_total = mu_poly_mat_mul(&b_total.unwrap(), &zf);
    let mut out = BTreeMap::new();
    let mut power = b_total.clone();
    for i in 1..=i_max {
        if i > 1 {
            power = mu_poly_mat_mul(&power, &b_total);
        }
        let mut tr = MuPoly::new();
        for k in 0..2 {
            for (deg, v) in &power[k][k] {
                let e = tr.entry(*deg).or_insert_with(|| v.zero_like());
                *e = &*e + v;
            }
        }
        for (deg, v) in tr {
            let t = v
                .trace_rat()
                .ok_or_else(|| NetworkError::SingularWeight("float trace".into()))?;
            if !num_traits::Zero::is_zero(&t) {
                out.insert((i, deg), t);
            }
        }
    }
    Ok(out)
}

/// Residuals `B_i - A_i L_i A_{i+1}^{-1}` with `L_i = [[0, lambda Y_i],
/// [1, lambda + X_{i+1}]]`, `A_i = [[lambda^{-1}, lambda^{-1} X_i],
/// [0, mu^{-1}]]`, `lambda = mu^2`; `X_{N+1}` wraps through the twist.
pub fn lax_factorization_residual(
    w: &XyWeights,
    mu: &CentralScalar,
) -> Result<Vec<QMatrix>, NetworkError> {
    use num_traits::Zero;
    if mu.0.is_zero() {
        return Err(NetworkError::MuZero);
    }
    let proto = &w.x[0];
    let mu_v = mu.promote(proto);
    let lam = &mu_v * &mu_v;
    let lam_inv = lam.inv().expect("nonzero central");
    let mu_inv = mu_v.inv().expect("nonzero central");
    let one = proto.one_like();
    let zero = proto.zero_like();
    let a_mat = |i: i64| -> Result<QMatrix, NetworkError> {
        Ok(QMatrix::from_rows(vec![
            vec![lam_inv.clone(), &lam_inv * &w.x_at(i)?],
            vec![zero.clone(), mu_inv.clone()],
        ])
        .expect("uniform"))
    };
    let mut out = Vec::with_capacity(w.n);
    for i in 1..=w.n as i64 {
        let l = QMatrix::from_rows(vec![
            vec![zero.clone(), &lam * &w.y_at(i)?],
            vec![one.clone(), &lam + &w.x_at(i + 1)?],
        ])
        .expect("uniform");
        let ai = a_mat(i)?;
        let ainv = nc_inverse(&a_mat(i + 1)?)
            .map_err(|_| NetworkError::SingularWeight(format!("A_{}", i + 1)))?;
        let rhs = ai.mul(&l).mul(&ainv);
        let b = QMatrix::from_rows(vec![
            vec![w.x_at(i)?, &mu_v * &(&w.x_at(i)? + &w.y_at(i)?)],
            vec![mu_v.clone(), &mu_v * &mu_v],
        ])
        .expect("uniform");
        out.push(b.sub(&rhs));
    }
    Ok(out)
}

/// Conservation report: exact drift of every `t_{i,j}` (i <= i_max) after
/// each of `steps` applications of the dynamics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConservationReport {
    pub steps: usize,
    pub i_max: usize,
    /// largest |t_{i,j}(after) - t_{i,j}(before)| over all steps as f64
    pub max_drift: f64,
    pub exact: bool,
}

pub fn invariants_conservation(
    w: &XyWeights,
    steps: usize,
    i_max: usize,
) -> Result<ConservationReport, NetworkError> {
    use num_traits::{Signed, ToPrimitive, Zero};
    let reference = t_invariants(w, i_max)?;
    let mut cur = w.clone();
    let mut max_drift = BigRational::zero();
    for _ in 0..steps {
        cur = step_xy(&cur)?;
        let t = t_invariants(&cur, i_max)?;
        let keys: std::collections::BTreeSet<_> =
            reference.keys().chain(t.keys()).cloned().collect();
        for key in keys {
            let a = reference.get(&key).cloned().unwrap_or_else(BigRational::zero);
            let b = t.get(&key).cloned().unwrap_or_else(BigRational::zero);
            let d = (&a - &b).abs();
            if d > max_drift {
                max_drift = d;
            }
        }
    }
    Ok(ConservationReport {
        steps,
        i_max,
        max_drift: max_drift.to_f64().unwrap_or(f64::INFINITY),
        exact: max_drift.is_zero(),
    })
}

// ---------------------------------------------------------------------------
// symbolic weights
// ---------------------------------------------------------------------------

fn gen(kind: GenKind, idx: usize) -> BaseGen {
    BaseGen::new(kind, idx as u32)
}

/// Words of the gauge weights `X_i`, `Y_i` and `Z` in the base generators.
pub fn xy_words(n: usize) -> (Vec<Word>, Vec<Word>, Word) {
    let z_word = |i: usize| -> Vec<Letter> {
        let mut out = Vec::new();
        for k in 1..i {
            out.push(Letter::gen(gen(GenKind::D, k)));
            out.push(Letter::gen(gen(GenKind::C, k)));
        }
        out.push(Letter::gen(gen(GenKind::D, i)));
        out
    };
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    xs.push(Word::from_letters([
        Letter::gen_inv(gen(GenKind::C, n)),
        Letter::gen(gen(GenKind::A, 1)),
    ]));
    ys.push(Word::from_letters([
        Letter::gen_inv(gen(GenKind::C, n)),
        Letter::gen(gen(GenKind::B, 1)),
        Letter::gen_inv(gen(GenKind::C, 1)),
        Letter::gen_inv(gen(GenKind::D, 1)),
    ]));
    for i in 2..=n {
        let z = z_word(i - 1);
        let zinv: Vec<Letter> = z
            .iter()
            .rev()
            .map(|l| Letter {
                sym: l.sym,
                inv: !l.inv,
            })
            .collect();
        let mut xw = z.clone();
        xw.push(Letter::gen(gen(GenKind::A, i)));
        xw.push(Letter::gen_inv(gen(GenKind::C, i - 1)));
        xw.extend(zinv.iter().copied());
        xs.push(Word::from_letters(xw));
        let mut yw = z.clone();
        yw.push(Letter::gen(gen(GenKind::B, i)));
        yw.push(Letter::gen_inv(gen(GenKind::C, i)));
        yw.push(Letter::gen_inv(gen(GenKind::D, i)));
        yw.push(Letter::gen_inv(gen(GenKind::C, i - 1)));
        yw.extend(zinv.iter().copied());
        ys.push(Word::from_letters(yw));
    }
    let mut zw = z_word(n);
    zw.push(Letter::gen(gen(GenKind::C, n)));
    (xs, ys, Word::from_letters(zw))
}

/// Post-move weights as expressions over the base generators, with the
/// inverse atoms `F_i` of `f_i = b_i + a_i d_i c_i` registered into `atoms`.
pub struct TildeWeights {
    pub a: Vec<NCExpr>,
    pub b: Vec<NCExpr>,
    pub c: Vec<NCExpr>,
    pub d: Vec<NCExpr>,
    pub f_atoms: Vec<AtomId>,
}

pub fn tilde_weights(n: usize, atoms: &mut AtomTable) -> TildeWeights {
    let mut out = TildeWeights {
        a: Vec::new(),
        b: Vec::new(),
        c: Vec::new(),
        d: Vec::new(),
        f_atoms: Vec::new(),
    };
    for i in 1..=n {
        let b = NCExpr::gen(gen(GenKind::B, i));
        let adc = NCExpr::gen(gen(GenKind::A, i))
            .mul(&NCExpr::gen(gen(GenKind::D, i)))
            .mul(&NCExpr::gen(gen(GenKind::C, i)));
        let f = b.add(&adc);
        let fid = atoms.register(format!("F{i}"), f.clone());
        let fe = NCExpr::atom(fid);
        let dc = NCExpr::gen(gen(GenKind::D, i)).mul(&NCExpr::gen(gen(GenKind::C, i)));
        out.a.push(dc.mul(&fe));
        out.b.push(f);
        out.c.push(fe.mul(&NCExpr::gen(gen(GenKind::A, i))).mul(&NCExpr::gen(gen(GenKind::D, i))));
        out.d.push(
            dc.mul(&fe)
                .mul(&NCExpr::gen(gen(GenKind::B, i)))
                .mul(&NCExpr::gen_inv(gen(GenKind::C, i))),
        );
        out.f_atoms.push(fid);
    }
    out
}

/// Symbolic step of the dynamics: `X~_i`, `Y~_i` as expressions, with the
/// inverse atoms `G_i = (X_i + Y_i)^{-1}` (twisted indices 0..n+1) in
/// `atoms`. Returns (X~, Y~, Z).
pub fn step_xy_symbolic(
    n: usize,
    atoms: &mut AtomTable,
) -> (Vec<NCExpr>, Vec<NCExpr>, Word) {
    let (xs, ys, zw) = xy_words(n);
    let zinv = Word::from_letters(
        zw.letters()
            .iter()
            .rev()
            .map(|l| Letter {
                sym: l.sym,
                inv: !l.inv,
            })
            .collect::<Vec<_>>(),
    );
    let tw = |i: i64, arr: &[Word]| -> NCExpr {
        // twisted word at index i in 0..=n+1
        let n_i = n as i64;
        if i >= 1 && i <= n_i {
            NCExpr::from_word(arr[(i - 1) as usize].clone())
        } else if i == 0 {
            NCExpr::from_word(zinv.concat(&arr[n - 1]).concat(&zw))
        } else if i == n_i + 1 {
            NCExpr::from_word(zw.concat(&arr[0]).concat(&zinv))
        } else {
            unreachable!()
        }
    };
    let s_expr = |i: i64| tw(i, &xs).add(&tw(i, &ys));
    let mut g_ids = BTreeMap::new();
    for i in 0..=n as i64 + 1 {
        let id = atoms.register(format!("G{i}"), s_expr(i));
        g_ids.insert(i, id);
    }
    let mut xt = Vec::with_capacity(n);
    let mut yt = Vec::with_capacity(n);
    for i in 1..=n as i64 {
        let gm = NCExpr::atom(g_ids[&(i - 1)]);
        xt.push(gm.mul(&tw(i - 1, &xs)).mul(&s_expr(i)));
        let gi = NCExpr::atom(g_ids[&i]);
        yt.push(gi.mul(&tw(i, &ys)).mul(&s_expr(i + 1)));
    }
    (xt, yt, zw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Backend;

    #[test]
    fn twist_law_holds_by_construction() {
        let net = NumericNetwork::random(3, Backend::Rational, 2, 3);
        let w = net.xy_weights().unwrap();
        for i in 1..=3 {
            assert!(w.twist_residual(i).unwrap().is_zero());
        }
    }

    #[test]
    fn n1_explicit_weights() {
        // X_1 = c_1^{-1} a_1, Y_1 = c_1^{-1} b_1 c_1^{-1} d_1^{-1}, Z = d_1 c_1
        let net = NumericNetwork::random(5, Backend::Rational, 2, 1);
        let w = net.xy_weights().unwrap();
        let cinv = net.c[0].inv().unwrap();
        assert_eq!(w.x[0], &cinv * &net.a[0]);
        assert_eq!(
            w.y[0],
            &(&(&cinv * &net.b[0]) * &net.c[0].inv().unwrap()) * &net.d[0].inv().unwrap()
        );
        assert_eq!(w.z, &net.d[0] * &net.c[0]);
    }

    #[test]
    fn commutative_x_reduces_to_ratio() {
        let net = NumericNetwork::random(7, Backend::Scalar, 1, 3);
        let w = net.xy_weights().unwrap();
        for i in 2..=3usize {
            let want = &net.a[i - 1] * &net.c[i - 2].inv().unwrap();
            assert_eq!(w.x[i - 1], want);
        }
    }

    #[test]
    fn square_move_preserves_transfer() {
        for (seed, backend, d) in [(11u64, Backend::Scalar, 1usize), (12, Backend::Rational, 2)] {
            let net = NumericNetwork::random(seed, backend, d, 2);
            let moved = net.square_move_all().unwrap();
            for i in 0..2 {
                let before = net.square_transfer(i);
                let after = moved.moved_square_transfer(i);
                assert!(before.sub(&after).is_zero(), "transfer changed at {i}");
            }
        }
    }

    #[test]
    fn commutative_square_move_values() {
        // a = d = c = 1, b = 1: f = 2, a~ = 1/2
        use num_bigint::BigInt;
        let one = RingValue::Scalar(BigRational::from(BigInt::from(1)));
        let net = NumericNetwork {
            n: 1,
            a: vec![one.clone()],
            b: vec![one.clone()],
            c: vec![one.clone()],
            d: vec![one.clone()],
        };
        let moved = net.square_move_all().unwrap();
        assert_eq!(
            moved.b[0],
            RingValue::Scalar(BigRational::from(BigInt::from(2)))
        );
        assert_eq!(
            moved.a[0],
            RingValue::Scalar(BigRational::new(BigInt::from(1), BigInt::from(2)))
        );
    }

    #[test]
    fn route_commutation_move_vs_step() {
        for (seed, backend, d, n) in [
            (21u64, Backend::Scalar, 1usize, 2usize),
            (22, Backend::Rational, 2, 2),
            (23, Backend::Rational, 2, 3),
            (24, Backend::Rational, 2, 4),
        ] {
            let net = NumericNetwork::random(seed, backend, d, n);
            let via_move = net.tilde_xy_weights().unwrap();
            let via_step = step_xy(&net.xy_weights().unwrap()).unwrap();
            assert_eq!(via_move.z, via_step.z, "Z changed");
            for i in 0..n {
                assert_eq!(via_move.x[i], via_step.x[i], "X mismatch at {}", i + 1);
                assert_eq!(via_move.y[i], via_step.y[i], "Y mismatch at {}", i + 1);
            }
        }
    }

    #[test]
    fn step_matches_ab_map_on_same_inputs() {
        // the (X, Y) update is literally (leap_a)/(leap_b) under X <-> a,
        // Y <-> b away from the twisted wrap
        use crate::leapfrog::{step_ab, ABCoords, IndexedSeq};
        let net = NumericNetwork::random(31, Backend::Rational, 2, 5);
        let w = net.xy_weights().unwrap();
        let ab = ABCoords {
            a: IndexedSeq::windowed(1, w.x.clone()),
            b: IndexedSeq::windowed(1, w.y.clone()),
        };
        let mapped = step_ab(&ab).unwrap();
        let stepped = step_xy(&w).unwrap();
        let (lo, hi) = mapped.a.range();
        for i in lo..=hi {
            assert_eq!(mapped.a.get(i), &stepped.x[(i - 1) as usize]);
            assert_eq!(mapped.b.get(i), &stepped.y[(i - 1) as usize]);
        }
    }

    #[test]
    fn boundary_matrix_at_zero_mu() {
        let net = NumericNetwork::random(9, Backend::Rational, 2, 1);
        let w = net.xy_weights().unwrap();
        let b = boundary_matrix(&w, &CentralScalar::from_int(0));
        // B = [[X_1, 0], [0, 0]] diag(Z, Z) = [[X_1 Z, 0], [0, 0]]
        assert_eq!(b.at(0, 0), &(&w.x[0] * &w.z));
        assert!(b.at(0, 1).is_zero());
        assert!(b.at(1, 0).is_zero());
        assert!(b.at(1, 1).is_zero());
    }

    #[test]
    fn commutative_path_sum_oracle_n2() {
        // t_{1,j} against hand-computed path sums for N = 2, scalar backend
        let net = NumericNetwork::random(13, Backend::Scalar, 1, 2);
        let w = net.xy_weights().unwrap();
        let t = t_invariants(&w, 1).unwrap();
        let sc = |v: &RingValue| match v {
            RingValue::Scalar(x) => x.clone(),
            _ => unreachable!(),
        };
        let (x1, y1, x2, y2, z) = (sc(&w.x[0]), sc(&w.y[0]), sc(&w.x[1]), sc(&w.y[1]), sc(&w.z));
        // tr B(mu) with B = B_1 B_2 diag(Z, Z):
        // mu^0: X_1 X_2 Z; mu^2: (X_1 + Y_1)Z + (X_2 + Y_2)Z; mu^4: Z
        assert_eq!(t[&(1, 0)], &x1 * &x2 * &z);
        assert_eq!(t[&(1, 2)], (&x1 + &y1) * &z + (&x2 + &y2) * &z);
        assert_eq!(t[&(1, 4)], z);
    }

    #[test]
    fn trace_conjugation_invariance() {
        // conjugating every weight by one fixed g leaves all t_{i,j} fixed
        let net = NumericNetwork::random(17, Backend::Rational, 2, 2);
        let w = net.xy_weights().unwrap();
        let mut s = crate::algebra::GenericSampler::new(55);
        let g = s
            .ring_value(Backend::Rational, 2, true)
            .unwrap();
        let ginv = g.inv().unwrap();
        let conj = |v: &RingValue| &(&g * v) * &ginv;
        let wc = XyWeights {
            n: w.n,
            x: w.x.iter().map(conj).collect(),
            y: w.y.iter().map(conj).collect(),
            z: conj(&w.z),
        };
        assert_eq!(t_invariants(&w, 3).unwrap(), t_invariants(&wc, 3).unwrap());
    }

    #[test]
    fn conservation_small() {
        for (seed, backend, d, n, steps) in [
            (41u64, Backend::Scalar, 1usize, 3usize, 6usize),
            (42, Backend::Rational, 2, 2, 4),
        ] {
            let net = NumericNetwork::random(seed, backend, d, n);
            let w = net.xy_weights().unwrap();
            let rep = invariants_conservation(&w, steps, 2 * n).unwrap();
            assert!(rep.exact, "drift {:?}", rep.max_drift);
        }
    }

    #[test]
    fn conservation_detects_perturbation() {
        let net = NumericNetwork::random(43, Backend::Scalar, 1, 3);
        let w = net.xy_weights().unwrap();
        let t0 = t_invariants(&w, 3).unwrap();
        let mut wp = w.clone();
        wp.x[1] = &wp.x[1] + &wp.x[1].one_like();
        let t1 = t_invariants(&wp, 3).unwrap();
        assert_ne!(t0, t1, "perturbation not detected");
    }

    #[test]
    fn lax_factorization_zero() {
        for (seed, backend, d) in [(51u64, Backend::Scalar, 1usize), (52, Backend::Rational, 2)] {
            let net = NumericNetwork::random(seed, backend, d, 3);
            let w = net.xy_weights().unwrap();
            for mu in [1i64, 2, 3] {
                let rs = lax_factorization_residual(&w, &CentralScalar::from_int(mu)).unwrap();
                for (i, r) in rs.iter().enumerate() {
                    assert!(r.is_zero(), "Lax residual nonzero at i={} mu={mu}", i + 1);
                }
            }
        }
    }

    #[test]
    fn lax_rejects_zero_mu() {
        let net = NumericNetwork::random(53, Backend::Rational, 2, 2);
        let w = net.xy_weights().unwrap();
        assert!(matches!(
            lax_factorization_residual(&w, &CentralScalar::from_int(0)),
            Err(NetworkError::MuZero)
        ));
    }

    #[test]
    fn swap_rewrites() {
        let mut s = crate::algebra::GenericSampler::new(61);
        let b = s.ring_value(Backend::Rational, 2, true).unwrap();
        let x = s.ring_value(Backend::Rational, 2, false).unwrap();
        let y = s.ring_value(Backend::Rational, 2, false).unwrap();
        let binv = b.inv().unwrap();
        let (x2, y2) = white_swap(&b, &x, &y).unwrap();
        assert_eq!(x2, &binv * &x);
        assert_eq!(y2, &b * &y);
        let (x3, y3) = black_swap(&b, &x, &y).unwrap();
        assert_eq!(x3, &x * &b);
        assert_eq!(y3, &y * &binv);
    }
}
