//! The non-commutative leapfrog map in vertex, (p,q) and (a,b) coordinates,
//! with its Lax residuals, y-variables and the y-system.
//!
//! Two boundary modes are supported. Periodic states index modulo N and keep
//! their period under the map. Windowed states carry values on an integer
//! interval; each step consumes one index on each side, which is the price
//! for the scaling-dependent (a,b) chart (the scalings are solved
//! left-to-right and do not close up around a period).

use crate::algebra::{CentralScalar, RingValue};
use crate::projective::{cross_ratio, PointP1};
use crate::quasidet::QMatrix;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LeapfrogError {
    #[error("degenerate configuration at index {0}")]
    DegenerateConfiguration(i64),
    #[error("h_{0} is not invertible")]
    SingularH(i64),
    #[error("operation requires windowed mode")]
    WindowedOnly,
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("state generation failed after {0} attempts")]
    GenerationFailed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Periodic,
    Windowed,
}

/// Sequence of ring values indexed by `i64`, either N-periodic or supported
/// on a finite window `[lo, lo + len)`.
#[derive(Clone, Debug)]
pub struct IndexedSeq {
    mode: Mode,
    n: usize,
    lo: i64,
    items: Vec<RingValue>,
}

impl IndexedSeq {
    pub fn periodic(items: Vec<RingValue>) -> Self {
        let n = items.len();
        IndexedSeq {
            mode: Mode::Periodic,
            n,
            lo: 0,
            items,
        }
    }

    pub fn windowed(lo: i64, items: Vec<RingValue>) -> Self {
        IndexedSeq {
            mode: Mode::Windowed,
            n: items.len(),
            lo,
            items,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Inclusive index range for windowed sequences; `(0, n-1)` for periodic.
    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.lo + self.items.len() as i64 - 1)
    }

    pub fn get(&self, i: i64) -> &RingValue {
        match self.mode {
            Mode::Periodic => {
                let k = i.rem_euclid(self.n as i64) as usize;
                &self.items[k]
            }
            Mode::Windowed => {
                let k = i - self.lo;
                assert!(
                    k >= 0 && (k as usize) < self.items.len(),
                    "index {i} outside window [{}, {}]",
                    self.lo,
                    self.lo + self.items.len() as i64 - 1
                );
                &self.items[k as usize]
            }
        }
    }

    pub fn contains(&self, i: i64) -> bool {
        match self.mode {
            Mode::Periodic => true,
            Mode::Windowed => {
                let (lo, hi) = self.range();
                i >= lo && i <= hi
            }
        }
    }

    pub fn iter_indices(&self) -> impl Iterator<Item = i64> {
        let (lo, hi) = self.range();
        lo..=hi
    }
}

/// A pair of vertex sequences `(S^-, S)` in the affine chart.
#[derive(Clone, Debug)]
pub struct LeapfrogState {
    pub n: usize,
    pub v_minus: IndexedSeq,
    pub v: IndexedSeq,
}

impl LeapfrogState {
    pub fn periodic(n: usize, v_minus: Vec<RingValue>, v: Vec<RingValue>) -> Self {
        assert_eq!(v_minus.len(), n);
        assert_eq!(v.len(), n);
        LeapfrogState {
            n,
            v_minus: IndexedSeq::periodic(v_minus),
            v: IndexedSeq::periodic(v),
        }
    }

    pub fn windowed(n: usize, lo: i64, v_minus: Vec<RingValue>, v: Vec<RingValue>) -> Self {
        assert_eq!(v_minus.len(), v.len());
        LeapfrogState {
            n,
            v_minus: IndexedSeq::windowed(lo, v_minus),
            v: IndexedSeq::windowed(lo, v),
        }
    }

    pub fn mode(&self) -> Mode {
        self.v.mode()
    }

    /// Inclusive valid window (for periodic states, one fundamental domain).
    pub fn window(&self) -> (i64, i64) {
        match self.mode() {
            Mode::Periodic => (0, self.n as i64 - 1),
            Mode::Windowed => self.v.range(),
        }
    }

    fn index_range_interior(&self) -> Vec<i64> {
        match self.mode() {
            Mode::Periodic => (0..self.n as i64).collect(),
            Mode::Windowed => {
                let (lo, hi) = self.window();
                (lo + 1..=hi - 1).collect()
            }
        }
    }

    pub fn backend_proto(&self) -> &RingValue {
        self.v.get(self.window().0)
    }

    pub fn to_json(&self, layer: u64) -> Value {
        let (lo, hi) = self.window();
        let dump = |s: &IndexedSeq| -> Vec<Value> {
            (lo..=hi).map(|i| s.get(i).to_json()).collect()
        };
        json!({
            "backend": self.backend_proto().backend().to_string(),
            "d": self.backend_proto().dim(),
            "N": self.n,
            "mode": match self.mode() { Mode::Periodic => "periodic", Mode::Windowed => "windowed" },
            "lo": lo,
            "layer": layer,
            "v_minus": dump(&self.v_minus),
            "v": dump(&self.v),
        })
    }
}

fn inv_or_degenerate(x: &RingValue, i: i64) -> Result<RingValue, LeapfrogError> {
    x.inv().map_err(|_| LeapfrogError::DegenerateConfiguration(i))
}

/// `p_i = (v_{i-1} - v_i)^{-1} (v_{i+1} - v_i)`.
fn p_at(state: &LeapfrogState, i: i64) -> Result<RingValue, LeapfrogError> {
    let v = &state.v;
    let left = inv_or_degenerate(&(v.get(i - 1) - v.get(i)), i)?;
    Ok(&left * &(v.get(i + 1) - v.get(i)))
}

/// `q_i = (v_i - v_i^-)^{-1} (v_{i+1} - v_i^-)`.
///
/// The defining property of the coordinates is the substitution identity
/// `lift(v_i^-) = (lift(v_{i+1}) - lift(v_i) q_i)(1 - q_i)^{-1}`, which pins
/// this orientation of the difference quotient.
fn q_at(state: &LeapfrogState, i: i64) -> Result<RingValue, LeapfrogError> {
    let (v, vm) = (&state.v, &state.v_minus);
    let left = inv_or_degenerate(&(v.get(i) - vm.get(i)), i)?;
    let q = &left * &(v.get(i + 1) - vm.get(i));
    // general position requires q_i itself invertible
    q.inv().map_err(|_| LeapfrogError::DegenerateConfiguration(i))?;
    Ok(q)
}

#[derive(Clone, Debug)]
pub struct PQCoords {
    pub p: IndexedSeq,
    pub q: IndexedSeq,
}

/// Extract the (p, q) chart. On windowed states `p` lives on
/// `[lo+1, hi-1]` and `q` on `[lo, hi-1]`.
pub fn pq_from_vertices(state: &LeapfrogState) -> Result<PQCoords, LeapfrogError> {
    match state.mode() {
        Mode::Periodic => {
            let n = state.n as i64;
            let mut p = Vec::new();
            let mut q = Vec::new();
            for i in 0..n {
                p.push(p_at(state, i)?);
                q.push(q_at(state, i)?);
            }
            for i in 0..n as usize {
                (&p[i] + &q[i])
                    .inv()
                    .map_err(|_| LeapfrogError::DegenerateConfiguration(i as i64))?;
            }
            Ok(PQCoords {
                p: IndexedSeq::periodic(p),
                q: IndexedSeq::periodic(q),
            })
        }
        Mode::Windowed => {
            let (lo, hi) = state.window();
            if hi - lo < 2 {
                return Err(LeapfrogError::WindowTooSmall(format!(
                    "window [{lo},{hi}] cannot support the map"
                )));
            }
            let mut p = Vec::new();
            for i in lo + 1..=hi - 1 {
                p.push(p_at(state, i)?);
            }
            let mut q = Vec::new();
            for i in lo..=hi - 1 {
                q.push(q_at(state, i)?);
            }
            let pq = PQCoords {
                p: IndexedSeq::windowed(lo + 1, p),
                q: IndexedSeq::windowed(lo, q),
            };
            for i in lo + 1..=hi - 1 {
                (pq.p.get(i) + pq.q.get(i))
                    .inv()
                    .map_err(|_| LeapfrogError::DegenerateConfiguration(i))?;
            }
            Ok(pq)
        }
    }
}

/// One step of the map in vertex coordinates:
/// `v_i^+ = (v_{i-1} p_i + v_i q_i)(p_i + q_i)^{-1}`, returned as the new
/// state `(S, S^+)`.
pub fn step_vertices(state: &LeapfrogState) -> Result<LeapfrogState, LeapfrogError> {
    let idx = state.index_range_interior();
    if idx.is_empty() {
        return Err(LeapfrogError::WindowTooSmall(
            "no interior indices left".into(),
        ));
    }
    let mut new_v = Vec::with_capacity(idx.len());
    for &i in &idx {
        let p = p_at(state, i)?;
        let q = q_at(state, i)?;
        let denom = inv_or_degenerate(&(&p + &q), i)?;
        let num = &(state.v.get(i - 1) * &p) + &(state.v.get(i) * &q);
        new_v.push(&num * &denom);
    }
    match state.mode() {
        Mode::Periodic => {
            let old_v: Vec<RingValue> = idx.iter().map(|&i| state.v.get(i).clone()).collect();
            Ok(LeapfrogState::periodic(state.n, old_v, new_v))
        }
        Mode::Windowed => {
            let lo2 = idx[0];
            let old_v: Vec<RingValue> = idx.iter().map(|&i| state.v.get(i).clone()).collect();
            Ok(LeapfrogState::windowed(state.n, lo2, old_v, new_v))
        }
    }
}

/// The projective transformation `g_i` realizing the map at site `i`
/// (with beta_i = -1):
/// `g_i = [[v_i r_i + 1, -(v_i r_i + 2) v_i], [r_i, -(r_i v_i + 1)]]`,
/// `r_i = (v_{i-1} - v_i)^{-1} + (v_{i+1} - v_i)^{-1}`.
pub fn g_matrix(state: &LeapfrogState, i: i64) -> Result<QMatrix, LeapfrogError> {
    let v = &state.v;
    let one = v.get(i).one_like();
    let two = &one + &one;
    let r = &inv_or_degenerate(&(v.get(i - 1) - v.get(i)), i)?
        + &inv_or_degenerate(&(v.get(i + 1) - v.get(i)), i)?;
    let vi = v.get(i);
    let g11 = &(vi * &r) + &one;
    let g12 = -&(&(&(vi * &r) + &two) * vi);
    let g21 = r.clone();
    let g22 = -&(&(&r * vi) + &one);
    QMatrix::from_rows(vec![vec![g11, g12], vec![g21, g22]])
        .map_err(|_| LeapfrogError::DegenerateConfiguration(i))
}

/// `eta_i^{-1} = (1 - q_i)(p_i + q_i)^{-1}`, the right scaling that takes
/// `g_i lift(v_i^-)` to the affine lift of `v_i^+`.
pub fn eta_inverse(state: &LeapfrogState, i: i64) -> Result<RingValue, LeapfrogError> {
    let p = p_at(state, i)?;
    let q = q_at(state, i)?;
    let one = p.one_like();
    Ok(&(&one - &q) * &inv_or_degenerate(&(&p + &q), i)?)
}

/// One step in the (p, q) chart:
/// `T(q_i) = (p_i + q_i) q_{i+1} (p_{i+1} + q_{i+1})^{-1}` and
/// `T(p_i) = h_i^{-1} p_i h_{i+1}` with
/// `h_i = (p_{i-1} + q_{i-1})^{-1} - q_i (p_i + q_i)^{-1}`.
pub fn step_pq(pq: &PQCoords) -> Result<PQCoords, LeapfrogError> {
    let h_at = |i: i64| -> Result<RingValue, LeapfrogError> {
        let s_prev = inv_or_degenerate(&(pq.p.get(i - 1) + pq.q.get(i - 1)), i - 1)?;
        let s_here = inv_or_degenerate(&(pq.p.get(i) + pq.q.get(i)), i)?;
        Ok(&s_prev - &(pq.q.get(i) * &s_here))
    };
    match pq.p.mode() {
        Mode::Periodic => {
            let n = pq.p.range().1 + 1;
            let mut tp = Vec::new();
            let mut tq = Vec::new();
            for i in 0..n {
                let s = inv_or_degenerate(&(pq.p.get(i + 1) + pq.q.get(i + 1)), i + 1)?;
                tq.push(&(&(pq.p.get(i) + pq.q.get(i)) * pq.q.get(i + 1)) * &s);
                let h_i = h_at(i)?;
                let h_next = h_at(i + 1)?;
                let hinv = h_i.inv().map_err(|_| LeapfrogError::SingularH(i))?;
                tp.push(&(&hinv * pq.p.get(i)) * &h_next);
            }
            Ok(PQCoords {
                p: IndexedSeq::periodic(tp),
                q: IndexedSeq::periodic(tq),
            })
        }
        Mode::Windowed => {
            let (plo, phi) = pq.p.range();
            // T(q_i) needs p,q at i and i+1: i in [plo, phi-1]
            let mut tq = Vec::new();
            for i in plo..=phi - 1 {
                let s = inv_or_degenerate(&(pq.p.get(i + 1) + pq.q.get(i + 1)), i + 1)?;
                tq.push(&(&(pq.p.get(i) + pq.q.get(i)) * pq.q.get(i + 1)) * &s);
            }
            // T(p_i) needs h_i (p_{i-1}) and h_{i+1} (p_{i+1}): i in [plo+1, phi-1]
            let mut tp = Vec::new();
            for i in plo + 1..=phi - 1 {
                let h_i = h_at(i)?;
                let h_next = h_at(i + 1)?;
                let hinv = h_i.inv().map_err(|_| LeapfrogError::SingularH(i))?;
                tp.push(&(&hinv * pq.p.get(i)) * &h_next);
            }
            Ok(PQCoords {
                p: IndexedSeq::windowed(plo + 1, tp),
                q: IndexedSeq::windowed(plo, tq),
            })
        }
    }
}

/// Residuals of the Lax pair at spectral parameter `z`:
/// first, `v_{i+1} + v_i (p_i + q_i - 1) - z (v_{i-1} p_i + v_i q_i)`
/// (zero iff z = 1, linear in z otherwise); second,
/// `T(v_i) - (v_{i-1} p_i + v_i q_i)(p_i + q_i)^{-1}` (always zero).
pub fn lax_residual(
    pq: &PQCoords,
    state: &LeapfrogState,
    z: &CentralScalar,
) -> Result<(Vec<RingValue>, Vec<RingValue>), LeapfrogError> {
    let stepped = step_vertices(state)?;
    let idx = state.index_range_interior();
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &i in &idx {
        let p = pq.p.get(i);
        let q = pq.q.get(i);
        let one = p.one_like();
        let zc = z.promote(&one);
        let combo = &(state.v.get(i - 1) * p) + &(state.v.get(i) * q);
        let r1 = &(state.v.get(i + 1) + &(state.v.get(i) * &(&(p + q) - &one))) - &(&zc * &combo);
        first.push(r1);
        let denom = inv_or_degenerate(&(p + q), i)?;
        second.push(stepped.v.get(i) - &(&combo * &denom));
    }
    Ok((first, second))
}

/// Residual of the cross-ratio defining property with beta = -1:
/// `kappa(S_{i-1}, S_{i+1}, S_i, S_i^-) - kappa(S_{i+1}, S_{i-1}, S_i, S_i^+)`
/// per interior index of the stepped window.
pub fn eq_k_residuals(
    state: &LeapfrogState,
    stepped: &LeapfrogState,
) -> Result<Vec<(i64, RingValue)>, LeapfrogError> {
    let idx: Vec<i64> = match state.mode() {
        Mode::Periodic => (0..state.n as i64).collect(),
        Mode::Windowed => {
            let (lo, hi) = stepped.window();
            (lo..=hi).collect()
        }
    };
    let mut out = Vec::new();
    for &i in &idx {
        let lift = |x: &RingValue| PointP1::affine(x);
        let k1 = cross_ratio(
            &lift(state.v.get(i - 1)),
            &lift(state.v.get(i + 1)),
            &lift(state.v.get(i)),
            &lift(state.v_minus.get(i)),
        )
        .map_err(|_| LeapfrogError::DegenerateConfiguration(i))?;
        let k2 = cross_ratio(
            &lift(state.v.get(i + 1)),
            &lift(state.v.get(i - 1)),
            &lift(state.v.get(i)),
            &lift(stepped.v.get(i)),
        )
        .map_err(|_| LeapfrogError::DegenerateConfiguration(i))?;
        out.push((i, &k1 - &k2));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// (a, b) chart
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ABCoords {
    pub a: IndexedSeq,
    pub b: IndexedSeq,
}

/// The (a, b) chart together with the scaling sequences it was built from.
#[derive(Clone, Debug)]
pub struct AbExtraction {
    pub coords: ABCoords,
    /// `V_i` on the full state window
    pub v_scal: IndexedSeq,
    /// `V_i^-` on the full state window
    pub v_minus_scal: IndexedSeq,
}

/// `u`-lift of site `i`: `lift(v_i) V_i^{-1}`.
fn u_lift(v: &RingValue, scal: &RingValue, i: i64) -> Result<PointP1, LeapfrogError> {
    let s = inv_or_degenerate(scal, i)?;
    Ok(PointP1::new(v * &s, s))
}

/// Extract the (a, b) chart from a windowed state with explicit scaling
/// anchors at the left edge of the window. The scalings solve
/// `V_{i+1} = V_i q_i` and the `con_det` constraint
/// `V^-_{i+1} = V_i (v_i^- - v_i)^{-1} (v_i^- - v_{i+1}^-)`; then
/// `a_i = kappa(u^-_{i-1}, u^-_{i+1}, u^-_i, u_i)` and
/// `b_i = -kappa(u_i, u_{i+1}, u^-_i, u^-_{i+1}) a_i`.
pub fn ab_from_vertices_anchored(
    state: &LeapfrogState,
    anchor_v: &RingValue,
    anchor_v_minus: &RingValue,
) -> Result<AbExtraction, LeapfrogError> {
    if state.mode() != Mode::Windowed {
        return Err(LeapfrogError::WindowedOnly);
    }
    let (lo, hi) = state.window();
    if hi - lo < 2 {
        return Err(LeapfrogError::WindowTooSmall(
            "need at least 3 sites for the (a,b) chart".into(),
        ));
    }
    let mut v_scal = vec![anchor_v.clone()];
    let mut vm_scal = vec![anchor_v_minus.clone()];
    for i in lo..hi {
        let q = q_at(state, i)?;
        let vi = v_scal[(i - lo) as usize].clone();
        v_scal.push(&vi * &q);
        let diff = inv_or_degenerate(&(state.v_minus.get(i) - state.v.get(i)), i)?;
        vm_scal.push(&(&vi * &diff) * &(state.v_minus.get(i) - state.v_minus.get(i + 1)));
    }
    let v_scal = IndexedSeq::windowed(lo, v_scal);
    let vm_scal = IndexedSeq::windowed(lo, vm_scal);

    let u = |i: i64| u_lift(state.v.get(i), v_scal.get(i), i);
    let um = |i: i64| u_lift(state.v_minus.get(i), vm_scal.get(i), i);

    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in lo + 1..=hi - 1 {
        let ai = cross_ratio(&um(i - 1)?, &um(i + 1)?, &um(i)?, &u(i)?)
            .map_err(|_| LeapfrogError::DegenerateConfiguration(i))?;
        let kb = cross_ratio(&u(i)?, &u(i + 1)?, &um(i)?, &um(i + 1)?)
            .map_err(|_| LeapfrogError::DegenerateConfiguration(i))?;
        let bi = -&(&kb * &ai);
        a.push(ai);
        b.push(bi);
    }
    Ok(AbExtraction {
        coords: ABCoords {
            a: IndexedSeq::windowed(lo + 1, a),
            b: IndexedSeq::windowed(lo + 1, b),
        },
        v_scal,
        v_minus_scal: vm_scal,
    })
}

/// Extraction with the default anchors `V = V^- = ` one at the window edge.
pub fn ab_from_vertices(state: &LeapfrogState) -> Result<AbExtraction, LeapfrogError> {
    let one = state.backend_proto().one_like();
    ab_from_vertices_anchored(state, &one, &one)
}

/// Scaling anchors for the stepped state that make the (a,b) chart of
/// `step_vertices(state)` agree exactly with `step_ab` of the current chart:
/// at the new left edge `lo' = lo + 1`,
/// `V'(lo') = V(lo') q_{lo'} (p_{lo'} + q_{lo'})^{-1}` and `V'^-(lo') = V(lo')`.
pub fn transported_anchor(
    state: &LeapfrogState,
    extraction: &AbExtraction,
) -> Result<(RingValue, RingValue), LeapfrogError> {
    if state.mode() != Mode::Windowed {
        return Err(LeapfrogError::WindowedOnly);
    }
    let (lo, _) = state.window();
    let i = lo + 1;
    let p = p_at(state, i)?;
    let q = q_at(state, i)?;
    let vi = extraction.v_scal.get(i);
    let s = inv_or_degenerate(&(&p + &q), i)?;
    Ok((&(vi * &q) * &s, vi.clone()))
}

/// Residuals of the `con_det` constraint for the built u-lifts: the three
/// boxed 2x2 quasi-determinants on `(u^-_i, u^-_{i+1})`, `(u^-_i, u_i)`,
/// `(u^-_i, u_{i+1})` must agree.
pub fn con_det_residuals(
    state: &LeapfrogState,
    extraction: &AbExtraction,
) -> Result<Vec<(i64, RingValue, RingValue)>, LeapfrogError> {
    let (lo, hi) = state.window();
    let u = |i: i64| u_lift(state.v.get(i), extraction.v_scal.get(i), i);
    let um = |i: i64| u_lift(state.v_minus.get(i), extraction.v_minus_scal.get(i), i);
    let boxed = |p: &PointP1, q: &PointP1| -> Result<RingValue, LeapfrogError> {
        // |(p q)|_{(1,2)} = q.x1 - p.x1 p.x2^{-1} q.x2
        let pinv = p.x2.inv().map_err(|_| LeapfrogError::DegenerateConfiguration(0))?;
        Ok(&q.x1 - &(&(&p.x1 * &pinv) * &q.x2))
    };
    let mut out = Vec::new();
    for i in lo..hi {
        let d1 = boxed(&um(i)?, &um(i + 1)?)?;
        let d2 = boxed(&um(i)?, &u(i)?)?;
        let d3 = boxed(&um(i)?, &u(i + 1)?)?;
        out.push((i, &d1 - &d2, &d2 - &d3));
    }
    Ok(out)
}

/// `c_i` from `u_{i+1} = u_i + u_i^- c_i`; satisfies `a_i + b_i + c_i = 0`.
pub fn c_coefficient(
    state: &LeapfrogState,
    extraction: &AbExtraction,
    i: i64,
) -> Result<RingValue, LeapfrogError> {
    // c_i = V_i^- (1 - q_i) V_{i+1}^{-1}, from the substitution identity
    let q = q_at(state, i)?;
    let one = q.one_like();
    let vnext = inv_or_degenerate(extraction.v_scal.get(i + 1), i + 1)?;
    Ok(&(extraction.v_minus_scal.get(i) * &(&one - &q)) * &vnext)
}

/// One step in the (a, b) chart:
/// `a_i^+ = (a_{i-1} + b_{i-1})^{-1} a_{i-1} (a_i + b_i)` and
/// `b_i^+ = (a_i + b_i)^{-1} b_i (a_{i+1} + b_{i+1})`.
pub fn step_ab(ab: &ABCoords) -> Result<ABCoords, LeapfrogError> {
    let s_at = |i: i64| -> Result<RingValue, LeapfrogError> {
        Ok(ab.a.get(i) + ab.b.get(i))
    };
    match ab.a.mode() {
        Mode::Periodic => {
            let n = ab.a.range().1 + 1;
            let mut na = Vec::new();
            let mut nb = Vec::new();
            for i in 0..n {
                let sm = inv_or_degenerate(&s_at(i - 1)?, i - 1)?;
                na.push(&(&sm * ab.a.get(i - 1)) * &s_at(i)?);
                let s = inv_or_degenerate(&s_at(i)?, i)?;
                nb.push(&(&s * ab.b.get(i)) * &s_at(i + 1)?);
            }
            Ok(ABCoords {
                a: IndexedSeq::periodic(na),
                b: IndexedSeq::periodic(nb),
            })
        }
        Mode::Windowed => {
            let (lo, hi) = ab.a.range();
            if hi - lo < 2 {
                return Err(LeapfrogError::WindowTooSmall(
                    "(a,b) window exhausted".into(),
                ));
            }
            let mut na = Vec::new();
            let mut nb = Vec::new();
            for i in lo + 1..=hi - 1 {
                let sm = inv_or_degenerate(&s_at(i - 1)?, i - 1)?;
                na.push(&(&sm * ab.a.get(i - 1)) * &s_at(i)?);
                let s = inv_or_degenerate(&s_at(i)?, i)?;
                nb.push(&(&s * ab.b.get(i)) * &s_at(i + 1)?);
            }
            Ok(ABCoords {
                a: IndexedSeq::windowed(lo + 1, na),
                b: IndexedSeq::windowed(lo + 1, nb),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// y-variables
// ---------------------------------------------------------------------------

/// Time layers of (a, b) data; layer `j+1` is `step_ab` of layer `j`.
#[derive(Clone, Debug)]
pub struct YHistory {
    pub layers: Vec<ABCoords>,
}

impl YHistory {
    /// Build `layers+1` layers starting from the given chart.
    pub fn from_chart(ab: ABCoords, steps: usize) -> Result<Self, LeapfrogError> {
        let mut layers = vec![ab];
        for _ in 0..steps {
            let next = step_ab(layers.last().unwrap())?;
            layers.push(next);
        }
        Ok(YHistory { layers })
    }

    /// `y_i^j = (a_i^j)^{-1} b_i^j`.
    pub fn y(&self, j: usize, i: i64) -> Result<RingValue, LeapfrogError> {
        let layer = &self.layers[j];
        let ainv = inv_or_degenerate(layer.a.get(i), i)?;
        Ok(&ainv * layer.b.get(i))
    }

    pub fn layer_range(&self, j: usize) -> (i64, i64) {
        self.layers[j].a.range()
    }
}

/// Residuals of the y-system at layer `j` (needs layers j-1, j, j+1):
/// `(b_i^j)^{-1} (1 + y_{i-1}^j)(1 + (y_i^j)^{-1})^{-1} (y_i^{j-1})^{-1} b_i^j
///  - (1 + (y_i^j)^{-1}) y_i^{j+1} (1 + y_{i+1}^j)^{-1}`.
pub fn y_system_residuals(
    hist: &YHistory,
    j: usize,
) -> Result<Vec<(i64, RingValue)>, LeapfrogError> {
    assert!(j >= 1 && j + 1 < hist.layers.len(), "need three layers");
    let (lo, hi) = match hist.layers[0].a.mode() {
        Mode::Periodic => (0, hist.layers[j].a.range().1),
        Mode::Windowed => {
            let (l, h) = hist.layer_range(j + 1);
            (l + 1, h - 1)
        }
    };
    let mut out = Vec::new();
    for i in lo..=hi {
        let y = |jj: usize, ii: i64| hist.y(jj, ii);
        let one = hist.layers[j].a.get(i).one_like();
        let bij = hist.layers[j].b.get(i);
        let binv = inv_or_degenerate(bij, i)?;
        let yj = y(j, i)?;
        let yjinv = inv_or_degenerate(&yj, i)?;
        let mid = inv_or_degenerate(&(&one + &yjinv), i)?;
        let yprev_inv = inv_or_degenerate(&y(j - 1, i)?, i)?;
        let lhs = &(&(&(&binv * &(&one + &y(j, i - 1)?)) * &mid) * &yprev_inv) * bij;
        let tail = inv_or_degenerate(&(&one + &y(j, i + 1)?), i)?;
        let rhs = &(&(&one + &yjinv) * &y(j + 1, i)?) * &tail;
        out.push((i, &lhs - &rhs));
    }
    Ok(out)
}

/// Commutative-reduction residual
/// `y_i^{j+1} y_i^{j-1} (1 + (y_i^j)^{-1})^2 - (1 + y_{i+1}^j)(1 + y_{i-1}^j)`
/// (meaningful on the scalar backend).
pub fn y_system_commutative_residuals(
    hist: &YHistory,
    j: usize,
) -> Result<Vec<(i64, RingValue)>, LeapfrogError> {
    assert!(j >= 1 && j + 1 < hist.layers.len());
    let (l, h) = hist.layer_range(j + 1);
    let mut out = Vec::new();
    for i in l + 1..=h - 1 {
        let one = hist.layers[j].a.get(i).one_like();
        let denom = &one + &inv_or_degenerate(&hist.y(j, i)?, i)?;
        let lhs = &(&(&hist.y(j + 1, i)? * &hist.y(j - 1, i)?) * &denom) * &denom;
        let rhs = &(&one + &hist.y(j, i + 1)?) * &(&one + &hist.y(j, i - 1)?);
        out.push((i, &lhs - &rhs));
    }
    Ok(out)
}

/// Residuals of the intermediate recurrences along trajectories:
/// `a_{i+1}^j - (y_i^{j-1})^{-1} a_i^j y_i^j` and
/// `a_i^{j+1} - (1 + y_{i-1}^j)^{-1} a_i^j (1 + y_i^j)`.
pub fn aij_recurrence_residuals(
    hist: &YHistory,
    j: usize,
) -> Result<Vec<(i64, RingValue, RingValue)>, LeapfrogError> {
    assert!(j >= 1 && j + 1 < hist.layers.len());
    let (l1, h1) = hist.layer_range(j + 1);
    let mut out = Vec::new();
    for i in l1..=h1 - 1 {
        let one = hist.layers[j].a.get(i).one_like();
        // spatial recurrence at layer j, driven by layer j-1 y's
        let r1 = {
            let yprev = inv_or_degenerate(&hist.y(j - 1, i)?, i)?;
            let rhs = &(&yprev * hist.layers[j].a.get(i)) * &hist.y(j, i)?;
            hist.layers[j].a.get(i + 1) - &rhs
        };
        // temporal recurrence from layer j to j+1
        let r2 = {
            let pref = inv_or_degenerate(&(&one + &hist.y(j, i - 1)?), i)?;
            let rhs = &(&pref * hist.layers[j].a.get(i)) * &(&one + &hist.y(j, i)?);
            hist.layers[j + 1].a.get(i) - &rhs
        };
        out.push((i, r1, r2));
    }
    Ok(out)
}

/// Cross-check of the y definition through the cross-ratio
/// `y_i^j = -kappa(u_i^{j+1}, u_{i+1}^{j+1}, u_i^j a_i^j, u_{i+1}^j)`, where
/// the u-lifts of layers j, j+1 are the minus/current lifts of the state the
/// chart was extracted from.
pub fn y_cross_ratio_residuals(
    state: &LeapfrogState,
    extraction: &AbExtraction,
) -> Result<Vec<(i64, RingValue)>, LeapfrogError> {
    let (lo, hi) = extraction.coords.a.range();
    let u = |i: i64| u_lift(state.v.get(i), extraction.v_scal.get(i), i);
    let um = |i: i64| u_lift(state.v_minus.get(i), extraction.v_minus_scal.get(i), i);
    let mut out = Vec::new();
    for i in lo..=hi - 1 {
        let ai = extraction.coords.a.get(i);
        let bi = extraction.coords.b.get(i);
        let y = &inv_or_degenerate(ai, i)? * bi;
        let third = um(i)?.scaled(ai);
        let kappa = cross_ratio(&u(i)?, &u(i + 1)?, &third, &um(i + 1)?)
            .map_err(|_| LeapfrogError::DegenerateConfiguration(i))?;
        out.push((i, &y + &kappa));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// random states
// ---------------------------------------------------------------------------

use crate::algebra::{Backend, GenericSampler};

fn try_random_state(
    sampler: &mut GenericSampler,
    backend: Backend,
    d: usize,
    n: usize,
    window: Option<(i64, i64)>,
) -> Result<LeapfrogState, LeapfrogError> {
    let count = match window {
        Some((lo, hi)) => (hi - lo + 1) as usize,
        None => n,
    };
    let draw = |s: &mut GenericSampler| -> Vec<RingValue> {
        (0..count)
            .map(|_| s.ring_value(backend, d, false).expect("sampling"))
            .collect()
    };
    let vm = draw(sampler);
    let v = draw(sampler);
    let state = match window {
        Some((lo, _)) => LeapfrogState::windowed(n, lo, vm, v),
        None => LeapfrogState::periodic(n, vm, v),
    };
    // general position: the charts, one step and the defining cross-ratios
    // must all exist
    pq_from_vertices(&state)?;
    let stepped = step_vertices(&state)?;
    eq_k_residuals(&state, &stepped)?;
    if state.mode() == Mode::Windowed {
        ab_from_vertices(&state)?;
    }
    Ok(state)
}

/// Deterministic random N-periodic state in general position.
pub fn random_periodic_state(
    seed: u64,
    backend: Backend,
    d: usize,
    n: usize,
) -> Result<LeapfrogState, LeapfrogError> {
    assert!(n >= 3, "periodic mode needs N >= 3");
    let mut sampler = GenericSampler::new(seed);
    for _ in 0..200 {
        if let Ok(s) = try_random_state(&mut sampler, backend, d, n, None) {
            return Ok(s);
        }
    }
    Err(LeapfrogError::GenerationFailed(200))
}

/// Deterministic random windowed state on `[-w, n + w)` in general position.
pub fn random_windowed_state(
    seed: u64,
    backend: Backend,
    d: usize,
    n: usize,
    w: usize,
) -> Result<LeapfrogState, LeapfrogError> {
    let lo = -(w as i64);
    let hi = n as i64 + w as i64 - 1;
    assert!(hi - lo >= 2, "window too small");
    let mut sampler = GenericSampler::new(seed);
    for _ in 0..200 {
        if let Ok(s) = try_random_state(&mut sampler, backend, d, n, Some((lo, hi))) {
            return Ok(s);
        }
    }
    Err(LeapfrogError::GenerationFailed(200))
}
