//! Non-commutative Laurent bi-orthogonal polynomials built from moment
//! windows, their spectral transformations (Christoffel/Geronimus), the
//! three-term recurrence, the discrete relativistic Toda equations with the
//! leapfrog correspondence, and the two semi-discrete flows.

use crate::algebra::{Backend, FloatMat, GenericSampler, RingValue};
use crate::leapfrog::{step_ab, ABCoords, IndexedSeq};
use crate::quasidet::{nc_solve, nc_solve_row, quasi_det, QMatrix, QuasidetError};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BiorthoError {
    #[error("moment m_{0} outside the stored window")]
    MomentOutOfWindow(i64),
    #[error("Toeplitz quasi-determinant singular at order {0}")]
    SingularToeplitz(usize),
    #[error(transparent)]
    Quasidet(#[from] QuasidetError),
    #[error("flow error: {0}")]
    Flow(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flow {
    Negative,
    Positive,
}

/// Finite window of formal moments `m_k`.
#[derive(Clone, Debug)]
pub struct MomentWindow {
    moments: BTreeMap<i64, RingValue>,
}

impl MomentWindow {
    pub fn new(moments: BTreeMap<i64, RingValue>) -> Self {
        MomentWindow { moments }
    }

    pub fn get(&self, k: i64) -> Result<&RingValue, BiorthoError> {
        self.moments.get(&k).ok_or(BiorthoError::MomentOutOfWindow(k))
    }

    pub fn range(&self) -> (i64, i64) {
        let lo = *self.moments.keys().next().expect("nonempty window");
        let hi = *self.moments.keys().last().unwrap();
        (lo, hi)
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .moments
            .iter()
            .map(|(k, v)| json!({"k": k, "m": v.to_json()}))
            .collect::<Vec<_>>())
    }

    /// Deterministic random moments on `[kmin, kmax]`.
    pub fn random(seed: u64, backend: Backend, d: usize, kmin: i64, kmax: i64) -> Self {
        let mut s = GenericSampler::new(seed);
        let mut m = BTreeMap::new();
        for k in kmin..=kmax {
            m.insert(k, s.ring_value(backend, d, false).expect("sampling"));
        }
        MomentWindow { moments: m }
    }
}

/// Laurent polynomial with ring coefficients, sparse in the power.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, RingValue>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(proto: &RingValue) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, proto.one_like());
        LaurentPoly { coeffs }
    }

    pub fn from_coeffs(coeffs: BTreeMap<i64, RingValue>) -> Self {
        let mut p = LaurentPoly { coeffs };
        p.prune();
        p
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| !c.is_zero());
    }

    pub fn coeff(&self, power: i64) -> Option<&RingValue> {
        self.coeffs.get(&power)
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, RingValue> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Multiply by `z^s`.
    pub fn shifted(&self, s: i64) -> Self {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(p, c)| (p + s, c.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.coeffs.clone();
        for (p, c) in &other.coeffs {
            let e = out.entry(*p).or_insert_with(|| c.zero_like());
            *e = &*e + c;
        }
        Self::from_coeffs(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.coeffs.clone();
        for (p, c) in &other.coeffs {
            let e = out.entry(*p).or_insert_with(|| c.zero_like());
            *e = &*e - c;
        }
        Self::from_coeffs(out)
    }

    /// Right-multiply every coefficient.
    pub fn rmul(&self, a: &RingValue) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .map(|(p, c)| (*p, c * a))
                .collect(),
        )
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.coeffs
            .values()
            .map(RingValue::max_abs_f64)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .coeffs
            .iter()
            .map(|(p, c)| json!({"power": p, "coeff": c.to_json()}))
            .collect::<Vec<_>>())
    }
}

/// Shifted inner product `<f, g>_k = sum_{i,j} f_i m_{i-j+k} g_j^*` with the
/// involution applied to the right argument's coefficients.
pub fn inner_product(
    f: &LaurentPoly,
    g: &LaurentPoly,
    k: i64,
    m: &MomentWindow,
) -> Result<RingValue, BiorthoError> {
    let mut acc: Option<RingValue> = None;
    for (i, fi) in f.coeffs() {
        for (j, gj) in g.coeffs() {
            let term = &(fi * m.get(i - j + k)?) * &gj.star();
            acc = Some(match acc {
                Some(a) => &a + &term,
                None => term,
            });
        }
    }
    acc.ok_or(BiorthoError::MomentOutOfWindow(k))
}

/// Pairing against a stored starred family: `sum f_i m_{i-j+k} qstar_{-j}`,
/// consuming the starred coefficients directly.
pub fn pair_with_star(
    f: &LaurentPoly,
    g_star: &LaurentPoly,
    k: i64,
    m: &MomentWindow,
) -> Result<RingValue, BiorthoError> {
    let mut acc: Option<RingValue> = None;
    for (i, fi) in f.coeffs() {
        for (mj, gsj) in g_star.coeffs() {
            let j = -mj;
            let term = &(fi * m.get(i - j + k)?) * gsj;
            acc = Some(match acc {
                Some(a) => &a + &term,
                None => term,
            });
        }
    }
    acc.ok_or(BiorthoError::MomentOutOfWindow(k))
}

/// The shifted Toeplitz matrix `(m_{k + r - c})_{r,c = 0..n}` as a QMatrix.
fn toeplitz(m: &MomentWindow, k: i64, n: usize) -> Result<QMatrix, BiorthoError> {
    let rows = (0..=n)
        .map(|r| {
            (0..=n)
                .map(|c| Ok(m.get(k + r as i64 - c as i64)?.clone()))
                .collect::<Result<Vec<_>, BiorthoError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QMatrix::from_rows(rows).expect("uniform moments"))
}

/// `H_n^{(k)}`: trailing-corner quasi-determinant of the shifted Toeplitz
/// matrix; the empty case is one.
pub fn h_value(m: &MomentWindow, k: i64, n: i64) -> Result<RingValue, BiorthoError> {
    let proto = m.get(k)?;
    if n < 0 {
        return Ok(proto.one_like());
    }
    let t = toeplitz(m, k, n as usize)?;
    quasi_det(&t, n as usize, n as usize)
        .map_err(|_| BiorthoError::SingularToeplitz(n as usize))
}

/// `phi_n^{(k)}`: ratio of the two (0, n)-boxed shifted Toeplitz
/// quasi-determinants at shifts k and k-1.
pub fn phi_value(m: &MomentWindow, k: i64, n: i64) -> Result<RingValue, BiorthoError> {
    if n < 0 {
        return Ok(m.get(k)?.zero_like());
    }
    let n = n as usize;
    let ta = toeplitz(m, k, n)?;
    let tb = toeplitz(m, k - 1, n)?;
    let qa = quasi_det(&ta, 0, n).map_err(|_| BiorthoError::SingularToeplitz(n))?;
    let qb = quasi_det(&tb, 0, n).map_err(|_| BiorthoError::SingularToeplitz(n))?;
    let qai = qa
        .inv()
        .map_err(|_| BiorthoError::SingularToeplitz(n))?;
    Ok(&qai * &qb)
}

/// `psi_n^{(k)} = (H_n^{(k)})^{-1} H_n^{(k-1)}`.
pub fn psi_value(m: &MomentWindow, k: i64, n: i64) -> Result<RingValue, BiorthoError> {
    let hk = h_value(m, k, n)?;
    let hk1 = h_value(m, k - 1, n)?;
    let hki = hk
        .inv()
        .map_err(|_| BiorthoError::SingularToeplitz(n.max(0) as usize))?;
    Ok(&hki * &hk1)
}

/// `xi_n^{(k)} = psi_n^{(k)} - phi_n^{(k-1)}`; the n = -1 boundary value is
/// zero.
pub fn xi_value(m: &MomentWindow, k: i64, n: i64) -> Result<RingValue, BiorthoError> {
    if n < 0 {
        return Ok(m.get(k)?.zero_like());
    }
    Ok(&psi_value(m, k, n)? - &phi_value(m, k - 1, n)?)
}

/// One family of adjacent bi-orthogonal data at a fixed shift.
#[derive(Clone, Debug)]
pub struct BiorthoSystem {
    pub shift: i64,
    pub n_max: usize,
    /// monic `P_n`, powers `0..=n`
    pub p: Vec<LaurentPoly>,
    /// `(Q_n)^*`, powers `-n..=0`
    pub q_star: Vec<LaurentPoly>,
    pub h: Vec<RingValue>,
    pub phi: Vec<RingValue>,
    pub psi: Vec<RingValue>,
    pub xi: Vec<RingValue>,
    pub zeta: Vec<RingValue>,
}

/// Build the families at shift `k` up to degree `n_max`. Coefficients come
/// from the moment linear systems (column solve for the starred family, row
/// solve for the monic one); for n <= 3 the result is cross-checked against
/// direct quasi-determinant expansion.
pub fn build_family(
    m: &MomentWindow,
    k: i64,
    n_max: usize,
) -> Result<BiorthoSystem, BiorthoError> {
    let proto = m.get(k)?.clone();
    let one = proto.one_like();
    let mut p = Vec::with_capacity(n_max + 1);
    let mut q_star = Vec::with_capacity(n_max + 1);
    let mut h = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n == 0 {
            p.push(LaurentPoly::one(&proto));
            q_star.push(LaurentPoly::one(&proto));
        } else {
            // block A = (m_{k + r - c})_{r,c < n}
            let a = QMatrix::from_rows(
                (0..n)
                    .map(|r| {
                        (0..n)
                            .map(|c| Ok(m.get(k + r as i64 - c as i64)?.clone()))
                            .collect::<Result<Vec<_>, BiorthoError>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            )
            .expect("uniform");
            // monic P_n: coefficients solve the row system x^T A = r_n with
            // r_n = (m_{k+n}, ..., m_{k+1})
            let row: Vec<RingValue> = (0..n)
                .map(|c| Ok(m.get(k + n as i64 - c as i64)?.clone()))
                .collect::<Result<Vec<_>, BiorthoError>>()?;
            let x = nc_solve_row(&a, &row).map_err(|_| BiorthoError::SingularToeplitz(n))?;
            let mut coeffs = BTreeMap::new();
            coeffs.insert(n as i64, one.clone());
            for (c, xc) in x.iter().enumerate() {
                coeffs.insert(c as i64, -xc);
            }
            p.push(LaurentPoly::from_coeffs(coeffs));
            // (Q_n)^*: column solve A w = c with c_r = m_{k + r - n}
            let col: Vec<RingValue> = (0..n)
                .map(|r| Ok(m.get(k + r as i64 - n as i64)?.clone()))
                .collect::<Result<Vec<_>, BiorthoError>>()?;
            let w = nc_solve(&a, &col).map_err(|_| BiorthoError::SingularToeplitz(n))?;
            let mut coeffs = BTreeMap::new();
            coeffs.insert(-(n as i64), one.clone());
            for (c, wc) in w.iter().enumerate() {
                coeffs.insert(-(c as i64), -wc);
            }
            q_star.push(LaurentPoly::from_coeffs(coeffs));
        }
        h.push(h_value(m, k, n as i64)?);
    }
    // quasi-determinant cross-check of the solve route for small degrees
    if proto.backend() != Backend::Float {
        for n in 1..=n_max.min(3) {
            let t = toeplitz(m, k, n)?;
            for c in 0..n {
                // P coefficient: z-column replaced by the unit column e_c
                let mut tp = t.clone();
                for r in 0..=n {
                    tp.set(
                        r,
                        n,
                        if r == c { one.clone() } else { proto.zero_like() },
                    );
                }
                let direct = quasi_det(&tp, n, n).map_err(|_| BiorthoError::SingularToeplitz(n))?;
                debug_assert_eq!(
                    direct,
                    p[n].coeff(c as i64).cloned().unwrap_or_else(|| proto.zero_like()),
                    "P cross-check n={n} c={c}"
                );
                // Q* coefficient: z-row replaced by the unit row e_c
                let mut tq = t.clone();
                for cc in 0..=n {
                    tq.set(
                        n,
                        cc,
                        if cc == c { one.clone() } else { proto.zero_like() },
                    );
                }
                let direct = quasi_det(&tq, n, n).map_err(|_| BiorthoError::SingularToeplitz(n))?;
                debug_assert_eq!(
                    direct,
                    q_star[n]
                        .coeff(-(c as i64))
                        .cloned()
                        .unwrap_or_else(|| proto.zero_like()),
                    "Q* cross-check n={n} c={c}"
                );
            }
        }
    }
    let mut phi = Vec::new();
    let mut psi = Vec::new();
    let mut xi = Vec::new();
    let mut zeta = Vec::new();
    for n in 0..=n_max {
        phi.push(phi_value(m, k, n as i64)?);
        psi.push(psi_value(m, k, n as i64)?);
        xi.push(xi_value(m, k, n as i64)?);
    }
    for n in 0..=n_max {
        // zeta_n = (psi_n - xi_{n-1}) xi_n
        let xprev = if n == 0 {
            proto.zero_like()
        } else {
            xi[n - 1].clone()
        };
        zeta.push(&(&psi[n] - &xprev) * &xi[n]);
    }
    Ok(BiorthoSystem {
        shift: k,
        n_max,
        p,
        q_star,
        h,
        phi,
        psi,
        xi,
        zeta,
    })
}

impl BiorthoSystem {
    pub fn to_json(&self) -> Value {
        json!({
            "shift": self.shift,
            "n_max": self.n_max,
            "p": self.p.iter().map(LaurentPoly::to_json).collect::<Vec<_>>(),
            "q_star": self.q_star.iter().map(LaurentPoly::to_json).collect::<Vec<_>>(),
            "h": self.h.iter().map(RingValue::to_json).collect::<Vec<_>>(),
            "phi": self.phi.iter().map(RingValue::to_json).collect::<Vec<_>>(),
            "psi": self.psi.iter().map(RingValue::to_json).collect::<Vec<_>>(),
            "xi": self.xi.iter().map(RingValue::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Christoffel residuals
/// `(Q_{n+1}^{(k)})^* - z^{-1}(Q_n^{(k)})^* + (Q_n^{(k+1)})^* phi_n^{(k)}`
/// for n < n_max; identically zero coefficientwise.
pub fn christoffel_residual(
    sys_k: &BiorthoSystem,
    sys_k_plus_1: &BiorthoSystem,
) -> Vec<LaurentPoly> {
    assert_eq!(sys_k.shift + 1, sys_k_plus_1.shift, "shifts must be adjacent");
    let n_top = sys_k.n_max.min(sys_k_plus_1.n_max + 1);
    (0..n_top)
        .map(|n| {
            sys_k.q_star[n + 1]
                .sub(&sys_k.q_star[n].shifted(-1))
                .add(&sys_k_plus_1.q_star[n].rmul(&sys_k.phi[n]))
        })
        .collect()
}

/// Geronimus residuals
/// `z^{-1}(Q_n^{(k-1)})^* - (Q_{n+1}^{(k)})^* - (Q_n^{(k)})^* psi_n^{(k)}`.
pub fn geronimus_residual(
    sys_k_minus_1: &BiorthoSystem,
    sys_k: &BiorthoSystem,
) -> Vec<LaurentPoly> {
    assert_eq!(sys_k_minus_1.shift + 1, sys_k.shift, "shifts must be adjacent");
    let n_top = sys_k.n_max.min(sys_k_minus_1.n_max + 1);
    (0..n_top)
        .map(|n| {
            sys_k_minus_1.q_star[n]
                .shifted(-1)
                .sub(&sys_k.q_star[n + 1])
                .sub(&sys_k.q_star[n].rmul(&sys_k.psi[n]))
        })
        .collect()
}

/// Three-term recurrence residuals
/// `z((Q_{n+1})^* + (Q_n)^* psi_n) - (Q_n)^* - (Q_{n-1})^* xi_{n-1}`, with
/// the (Q_{-1}) term dropped at the n = 0 boundary.
pub fn recurrence_residual(sys_k: &BiorthoSystem) -> Vec<LaurentPoly> {
    (0..sys_k.n_max)
        .map(|n| {
            let lhs = sys_k.q_star[n + 1]
                .add(&sys_k.q_star[n].rmul(&sys_k.psi[n]))
                .shifted(1);
            let mut rhs = sys_k.q_star[n].clone();
            if n >= 1 {
                rhs = rhs.add(&sys_k.q_star[n - 1].rmul(&sys_k.xi[n - 1]));
            }
            lhs.sub(&rhs)
        })
        .collect()
}

/// Residual pairs of the discrete relativistic Toda equations at shift `k`:
/// `(psi_i^{(k+1)} - phi_i^{(k)}) psi_{i+1}^{(k)} - psi_i^{(k+1)} (psi_i^{(k)} - phi_i^{(k-1)})`
/// and `psi_i^{(k)} - phi_i^{(k)} - psi_{i-1}^{(k)} + phi_{i-1}^{(k-1)}`.
pub fn discrete_toda_residual(
    m: &MomentWindow,
    k: i64,
    i_max: usize,
) -> Result<Vec<(RingValue, RingValue)>, BiorthoError> {
    let mut out = Vec::new();
    for i in 0..=i_max as i64 {
        let eq1 = {
            let lhs = &(&psi_value(m, k + 1, i)? - &phi_value(m, k, i)?) * &psi_value(m, k, i + 1)?;
            let rhs = &psi_value(m, k + 1, i)? * &(&psi_value(m, k, i)? - &phi_value(m, k - 1, i)?);
            &lhs - &rhs
        };
        let eq2 = {
            let lhs = &psi_value(m, k, i)? - &phi_value(m, k, i)?;
            if i == 0 {
                // boundary: the i-1 terms are absent from the semi-infinite
                // Lax matrices, and psi_0 = phi_0 identically
                lhs
            } else {
                let rhs = &psi_value(m, k, i - 1)? - &phi_value(m, k - 1, i - 1)?;
                &lhs - &rhs
            }
        };
        out.push((eq1, eq2));
    }
    Ok(out)
}

/// Residual pairs of the leapfrog correspondence: with
/// `a_i = psi_i^{(k)}`, `b_i = phi_i^{(k-1)} - psi_i^{(k)}` and
/// `a_i^+ = psi_i^{(k-1)}`, `b_i^+ = phi_i^{(k-2)} - psi_i^{(k-1)}`, one step
/// of the (a, b) map must reproduce the plus family.
pub fn leapfrog_correspondence(
    m: &MomentWindow,
    k: i64,
    i_max: usize,
) -> Result<Vec<(RingValue, RingValue)>, BiorthoError> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut a_plus = Vec::new();
    let mut b_plus = Vec::new();
    for i in 0..=i_max as i64 + 1 {
        a.push(psi_value(m, k, i)?);
        b.push(&phi_value(m, k - 1, i)? - &psi_value(m, k, i)?);
        a_plus.push(psi_value(m, k - 1, i)?);
        b_plus.push(&phi_value(m, k - 2, i)? - &psi_value(m, k - 1, i)?);
    }
    let ab = ABCoords {
        a: IndexedSeq::windowed(0, a),
        b: IndexedSeq::windowed(0, b),
    };
    let stepped = step_ab(&ab).map_err(|e| BiorthoError::Flow(e.to_string()))?;
    let (lo, hi) = stepped.a.range();
    let mut out = Vec::new();
    for i in lo..=hi.min(i_max as i64) {
        out.push((
            stepped.a.get(i) - &a_plus[i as usize],
            stepped.b.get(i) - &b_plus[i as usize],
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// continuous flows
// ---------------------------------------------------------------------------

/// One geometric constituent of a flow moment family.
#[derive(Clone, Debug)]
pub struct FlowTerm {
    pub u: FloatMat,
    pub v: FloatMat,
}

/// Deterministic flow terms with well-separated scales: the eigenvalue ladder
/// keeps the block-Toeplitz systems comfortably conditioned.
pub fn random_flow_terms(seed: u64, d: usize, count: usize) -> Vec<FlowTerm> {
    use num_traits::ToPrimitive;
    let ladder = [1.0, 1.6, 2.4, 3.4, 4.6, 6.0, 7.6, 9.4];
    let mut s = GenericSampler::new(seed);
    let mut unit = move || -> f64 {
        match s.ring_value(Backend::Scalar, 1, false).unwrap() {
            RingValue::Scalar(x) => x.to_f64().unwrap() / 12.0,
            _ => unreachable!(),
        }
    };
    let mut draw = move |scale: f64| {
        let mut m = FloatMat::zero(d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = scale * unit();
            }
        }
        m
    };
    (0..count)
        .map(|i| {
            let lam = ladder[i % ladder.len()];
            let mut v = draw(0.25);
            for k in 0..d {
                v[(k, k)] += lam;
            }
            let u = draw(1.0);
            FlowTerm { u, v }
        })
        .collect()
}

/// Exact-in-t moment family `m_k(t) = sum_s U_s V_s^k exp(t V_s^{-1})`
/// (negative flow) or `sum_s U_s V_s^k exp(t V_s)` (positive flow); it
/// satisfies `d/dt m_k = m_{k-1}` resp. `m_{k+1}` identically. A sum of
/// several terms is required: a single geometric family has block-rank one
/// and makes every `H_n`, n >= 1, vanish.
pub fn flow_moments(
    terms: &[FlowTerm],
    t: f64,
    flow: Flow,
    kmin: i64,
    kmax: i64,
) -> Result<MomentWindow, BiorthoError> {
    if terms.is_empty() {
        return Err(BiorthoError::Flow("no flow terms".into()));
    }
    let d = terms[0].u.d;
    let mut moments: BTreeMap<i64, RingValue> = BTreeMap::new();
    for k in kmin..=kmax {
        moments.insert(k, RingValue::Float(FloatMat::zero(d)));
    }
    for term in terms {
        let gen = match flow {
            Flow::Negative => term
                .v
                .inverse()
                .ok_or_else(|| BiorthoError::Flow("singular V".into()))?,
            Flow::Positive => term.v.clone(),
        };
        let g = gen.scale(t).expm();
        for k in kmin..=kmax {
            let vk = term
                .v
                .powi(k)
                .ok_or_else(|| BiorthoError::Flow("singular V".into()))?;
            let add = RingValue::Float(mul3(&term.u, &vk, &g));
            let cur = moments.get_mut(&k).unwrap();
            *cur = &*cur + &add;
        }
    }
    Ok(MomentWindow::new(moments))
}

fn mul3(a: &FloatMat, b: &FloatMat, c: &FloatMat) -> FloatMat {
    let av = RingValue::Float(a.clone());
    let bv = RingValue::Float(b.clone());
    let cv = RingValue::Float(c.clone());
    match &(&av * &bv) * &cv {
        RingValue::Float(m) => m,
        _ => unreachable!(),
    }
}

/// Max-norm residuals of one central-difference check at step width `h`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FlowResidualReport {
    pub h: f64,
    /// moment derivative against the shifted moment
    pub moment: f64,
    /// polynomial evolution residual ((tw2) resp. (te22)), coefficientwise
    pub tw: f64,
    /// psi scalar ODE residual
    pub psi_ode: f64,
    /// xi scalar ODE residual
    pub xi_ode: f64,
}

/// Central-difference residuals of the negative flow at time `t`:
/// `d/dt (Q_n)^* = (z^{-1}(Q_{n-1})^* - (Q_n)^*) xi_{n-1}`,
/// `d/dt psi_n = xi_{n-1} psi_n - psi_n xi_n`,
/// `d/dt xi_n = -(psi_n - xi_{n-1}) xi_n - xi_n (xi_{n+1} - psi_{n+1})`.
pub fn negative_flow_residual(
    terms: &[FlowTerm],
    t: f64,
    n_max: usize,
    h: f64,
) -> Result<FlowResidualReport, BiorthoError> {
    flow_residual(terms, Flow::Negative, t, n_max, h)
}

/// Central-difference residuals of the positive flow at time `t`:
/// `d/dt (Q_n)^* = (Q_{n-1})^* eta_n` with `eta_n = -xi_{n-1} psi_n^{-1}`,
/// `d/dt xi_n = xi_n psi_{n+1}^{-1} - psi_n^{-1} xi_n`,
/// `d/dt psi_n = xi_n psi_{n+1}^{-1} - psi_{n-1}^{-1} xi_{n-1}`.
pub fn positive_flow_residual(
    terms: &[FlowTerm],
    t: f64,
    n_max: usize,
    h: f64,
) -> Result<FlowResidualReport, BiorthoError> {
    flow_residual(terms, Flow::Positive, t, n_max, h)
}

fn flow_residual(
    terms: &[FlowTerm],
    flow: Flow,
    t: f64,
    n_max: usize,
    h: f64,
) -> Result<FlowResidualReport, BiorthoError> {
    let reach = n_max as i64 + 3;
    let (kmin, kmax) = (-2 * reach, 2 * reach);
    let m_minus = flow_moments(terms, t - h, flow, kmin, kmax)?;
    let m_0 = flow_moments(terms, t, flow, kmin, kmax)?;
    let m_plus = flow_moments(terms, t + h, flow, kmin, kmax)?;
    let diff = |a: &RingValue, b: &RingValue| -> RingValue {
        match a - b {
            RingValue::Float(mm) => RingValue::Float(mm.scale(1.0 / (2.0 * h))),
            _ => unreachable!(),
        }
    };
    // moment derivative
    let mut moment_res: f64 = 0.0;
    for k in kmin / 2..=kmax / 2 {
        let dm = diff(m_plus.get(k)?, m_minus.get(k)?);
        let want = match flow {
            Flow::Negative => m_0.get(k - 1)?,
            Flow::Positive => m_0.get(k + 1)?,
        };
        moment_res = moment_res.max((&dm - want).max_abs_f64());
    }
    let sys_m = build_family(&m_minus, 0, n_max + 1)?;
    let sys_0 = build_family(&m_0, 0, n_max + 1)?;
    let sys_p = build_family(&m_plus, 0, n_max + 1)?;
    let zero = m_0.get(0)?.zero_like();
    let xi_at = |sys: &BiorthoSystem, n: i64| -> RingValue {
        if n < 0 {
            zero.clone()
        } else {
            sys.xi[n as usize].clone()
        }
    };
    let mut tw_res: f64 = 0.0;
    let mut psi_res: f64 = 0.0;
    let mut xi_res: f64 = 0.0;
    for n in 0..=n_max {
        // polynomial evolution
        let dq = sys_p.q_star[n]
            .sub(&sys_m.q_star[n])
            .coeffs()
            .iter()
            .map(|(p, c)| (*p, scale_float(c, 1.0 / (2.0 * h))))
            .collect::<BTreeMap<_, _>>();
        let dq = LaurentPoly::from_coeffs(dq);
        let rhs = match flow {
            Flow::Negative => {
                if n == 0 {
                    LaurentPoly::zero()
                } else {
                    sys_0.q_star[n - 1]
                        .shifted(-1)
                        .sub(&sys_0.q_star[n])
                        .rmul(&xi_at(&sys_0, n as i64 - 1))
                }
            }
            Flow::Positive => {
                if n == 0 {
                    LaurentPoly::zero()
                } else {
                    let psi_inv = sys_0.psi[n]
                        .inv()
                        .map_err(|_| BiorthoError::Flow("psi not invertible".into()))?;
                    let eta = -&(&xi_at(&sys_0, n as i64 - 1) * &psi_inv);
                    sys_0.q_star[n - 1].rmul(&eta)
                }
            }
        };
        tw_res = tw_res.max(dq.sub(&rhs).max_abs_f64());
        // scalar ODEs
        let dpsi = scale_float(&(&sys_p.psi[n] - &sys_m.psi[n]), 1.0 / (2.0 * h));
        let dxi = scale_float(&(&sys_p.xi[n] - &sys_m.xi[n]), 1.0 / (2.0 * h));
        match flow {
            Flow::Negative => {
                let want_psi =
                    &(&xi_at(&sys_0, n as i64 - 1) * &sys_0.psi[n]) - &(&sys_0.psi[n] * &sys_0.xi[n]);
                psi_res = psi_res.max((&dpsi - &want_psi).max_abs_f64());
                let t1 = &(&sys_0.psi[n] - &xi_at(&sys_0, n as i64 - 1)) * &sys_0.xi[n];
                let t2 = &sys_0.xi[n] * &(&sys_0.xi[n + 1] - &sys_0.psi[n + 1]);
                let want_xi = -&(&t1 + &t2);
                xi_res = xi_res.max((&dxi - &want_xi).max_abs_f64());
            }
            Flow::Positive => {
                let psi_next_inv = sys_0.psi[n + 1]
                    .inv()
                    .map_err(|_| BiorthoError::Flow("psi not invertible".into()))?;
                let psi_inv = sys_0.psi[n]
                    .inv()
                    .map_err(|_| BiorthoError::Flow("psi not invertible".into()))?;
                let want_xi =
                    &(&sys_0.xi[n] * &psi_next_inv) - &(&psi_inv * &sys_0.xi[n]);
                xi_res = xi_res.max((&dxi - &want_xi).max_abs_f64());
                let tail = if n == 0 {
                    zero.clone()
                } else {
                    let pm = sys_0.psi[n - 1]
                        .inv()
                        .map_err(|_| BiorthoError::Flow("psi not invertible".into()))?;
                    &pm * &xi_at(&sys_0, n as i64 - 1)
                };
                let want_psi = &(&sys_0.xi[n] * &psi_next_inv) - &tail;
                psi_res = psi_res.max((&dpsi - &want_psi).max_abs_f64());
            }
        }
    }
    Ok(FlowResidualReport {
        h,
        moment: moment_res,
        tw: tw_res,
        psi_ode: psi_res,
        xi_ode: xi_res,
    })
}

fn scale_float(v: &RingValue, s: f64) -> RingValue {
    match v {
        RingValue::Float(m) => RingValue::Float(m.scale(s)),
        _ => panic!("flow residuals are float-backend only"),
    }
}

/// Log-log slope of residuals under h-halving; the expected order is 2.
pub fn convergence_slope(reports: &[FlowResidualReport], pick: fn(&FlowResidualReport) -> f64) -> f64 {
    assert!(reports.len() >= 2);
    let n = reports.len();
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for r in reports {
        let x = r.h.ln();
        let y = pick(r).max(1e-300).ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n as f64 * sxy - sx * sy) / (n as f64 * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn scalar(n: i64) -> RingValue {
        RingValue::Scalar(BigRational::from(BigInt::from(n)))
    }

    fn window(seed: u64, backend: Backend, d: usize) -> MomentWindow {
        MomentWindow::random(seed, backend, d, -10, 10)
    }

    fn build_ok(
        seed: u64,
        backend: Backend,
        d: usize,
        k: i64,
        n_max: usize,
    ) -> (MomentWindow, BiorthoSystem) {
        let mut s = seed;
        loop {
            let m = window(s, backend, d);
            if let Ok(sys) = build_family(&m, k, n_max) {
                return (m, sys);
            }
            s += 1000;
        }
    }

    #[test]
    fn trivial_inner_products() {
        let m = window(1, Backend::Scalar, 1);
        let one = LaurentPoly::one(&scalar(1));
        assert_eq!(inner_product(&one, &one, 0, &m).unwrap(), *m.get(0).unwrap());
        let z = one.shifted(1);
        assert_eq!(inner_product(&z, &z, 0, &m).unwrap(), *m.get(0).unwrap());
    }

    #[test]
    fn shift_law() {
        // <z f, g>_k = <f, z^{-1} g>_k for random small polys
        let m = window(2, Backend::Rational, 2);
        let mut s = GenericSampler::new(5);
        for _ in 0..5 {
            let f = LaurentPoly::from_coeffs(
                (0..3)
                    .map(|p| (p, s.ring_value(Backend::Rational, 2, false).unwrap()))
                    .collect(),
            );
            let g = LaurentPoly::from_coeffs(
                (-1..2)
                    .map(|p| (p, s.ring_value(Backend::Rational, 2, false).unwrap()))
                    .collect(),
            );
            let lhs = inner_product(&f.shifted(1), &g, 0, &m).unwrap();
            let rhs = inner_product(&f, &g.shifted(-1), 0, &m).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn moment_out_of_window() {
        let m = window(3, Backend::Scalar, 1);
        let f = LaurentPoly::one(&scalar(1)).shifted(40);
        assert!(matches!(
            inner_product(&f, &LaurentPoly::one(&scalar(1)), 0, &m),
            Err(BiorthoError::MomentOutOfWindow(40))
        ));
    }

    #[test]
    fn base_family_values() {
        let (m, sys) = build_ok(4, Backend::Scalar, 1, 0, 2);
        assert_eq!(sys.p[0], LaurentPoly::one(&scalar(1)));
        assert_eq!(sys.q_star[0], LaurentPoly::one(&scalar(1)));
        assert_eq!(sys.h[0], *m.get(0).unwrap());
        // H_1 = m_0 - m_1 m_0^{-1} m_{-1}
        let m0 = m.get(0).unwrap();
        let want = m0 - &(&(m.get(1).unwrap() * &m0.inv().unwrap()) * m.get(-1).unwrap());
        assert_eq!(sys.h[1], want);
        // phi_0^{(k)} = m_k^{-1} m_{k-1}
        assert_eq!(
            sys.phi[0],
            &m.get(0).unwrap().inv().unwrap() * m.get(-1).unwrap()
        );
    }

    #[test]
    fn orthogonality_table() {
        for (seed, backend, d, nmax) in [
            (7u64, Backend::Scalar, 1usize, 5usize),
            (8, Backend::Rational, 2, 4),
        ] {
            let (m, sys) = build_ok(seed, backend, d, 0, nmax);
            for n in 0..=nmax {
                for mm in 0..=nmax {
                    let v = pair_with_star(&sys.p[n], &sys.q_star[mm], 0, &m).unwrap();
                    if n == mm {
                        assert_eq!(v, sys.h[n], "diagonal {n}");
                    } else {
                        assert!(v.is_zero(), "off-diagonal ({n},{mm})");
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_geronimus_recurrence() {
        for (seed, backend, d) in [(11u64, Backend::Scalar, 1usize), (12, Backend::Rational, 2)] {
            let (m, sys0) = build_ok(seed, backend, d, 0, 4);
            let sys1 = build_family(&m, 1, 4).unwrap();
            let sysm1 = build_family(&m, -1, 4).unwrap();
            for r in christoffel_residual(&sys0, &sys1) {
                assert!(r.is_zero(), "christoffel nonzero");
            }
            for r in geronimus_residual(&sysm1, &sys0) {
                assert!(r.is_zero(), "geronimus nonzero");
            }
            for r in recurrence_residual(&sys0) {
                assert!(r.is_zero(), "recurrence nonzero");
            }
            // n = 0 christoffel closed form: (Q_1^{(k)})^* = z^{-1} - phi_0
            let want = LaurentPoly::one(m.get(0).unwrap())
                .shifted(-1)
                .sub(&LaurentPoly::from_coeffs(
                    [(0i64, sys0.phi[0].clone())].into_iter().collect(),
                ));
            assert_eq!(sys0.q_star[1], want);
        }
    }

    #[test]
    fn toda_and_correspondence() {
        for (seed, backend, d) in [(13u64, Backend::Scalar, 1usize), (14, Backend::Rational, 2)] {
            let (m, _) = build_ok(seed, backend, d, 0, 3);
            let rs = discrete_toda_residual(&m, 0, 3).expect("toda builds");
            for (e1, e2) in rs {
                assert!(e1.is_zero(), "toda eq1 nonzero");
                assert!(e2.is_zero(), "toda eq2 nonzero");
            }
            let rs = leapfrog_correspondence(&m, 0, 2).expect("correspondence builds");
            assert!(!rs.is_empty());
            for (ra, rb) in rs {
                assert!(ra.is_zero(), "leap_a correspondence nonzero");
                assert!(rb.is_zero(), "leap_b correspondence nonzero");
            }
        }
    }

    #[test]
    fn flow_moment_families() {
        let terms = random_flow_terms(5, 2, 4);
        // t = 0: exp is the identity, m_k = sum U V^k
        let m = flow_moments(&terms, 0.0, Flow::Negative, -2, 2).unwrap();
        let mut want = RingValue::Float(FloatMat::zero(2));
        for term in &terms {
            want = &want + &RingValue::Float(term.u.clone());
        }
        assert!((m.get(0).unwrap() - &want).max_abs_f64() < 1e-12);
    }

    #[test]
    fn flow_convergence_order_two() {
        let terms = random_flow_terms(6, 2, 5);
        for flow in [Flow::Negative, Flow::Positive] {
            let mut reports = Vec::new();
            let mut h = 1e-2;
            while h > 1.1e-3 {
                let r = flow_residual(&terms, flow, 0.2, 3, h).unwrap();
                reports.push(r);
                h /= 2.0;
            }
            for pick in [
                (|r: &FlowResidualReport| r.moment) as fn(&FlowResidualReport) -> f64,
                |r| r.tw,
                |r| r.psi_ode,
                |r| r.xi_ode,
            ] {
                let slope = convergence_slope(&reports, pick);
                assert!(
                    (slope - 2.0).abs() <= 0.3,
                    "slope {slope} out of range for {flow:?}"
                );
            }
        }
    }

    #[test]
    fn flow_sensitivity_control() {
        // perturbing xi must blow the (tw2) residual up by orders of magnitude
        let terms = random_flow_terms(7, 2, 5);
        let base = flow_residual(&terms, Flow::Negative, 0.2, 2, 1e-3).unwrap();
        let m0 = flow_moments(&terms, 0.2, Flow::Negative, -12, 12).unwrap();
        let sys = build_family(&m0, 0, 3).unwrap();
        let bad = &sys.xi[1] + &sys.xi[1].one_like();
        let good_rhs = sys.q_star[1]
            .shifted(-1)
            .sub(&sys.q_star[2])
            .rmul(&sys.xi[1]);
        let bad_rhs = sys.q_star[1]
            .shifted(-1)
            .sub(&sys.q_star[2])
            .rmul(&bad);
        let perturbed = bad_rhs.sub(&good_rhs).max_abs_f64();
        assert!(perturbed > 1e3 * base.tw.max(1e-12));
    }
}
