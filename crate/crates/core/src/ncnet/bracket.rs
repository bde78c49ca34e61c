//! The double bracket of the cylinder network: base rules on one square's
//! weights, bilinear Leibniz extension on both slots, inverse letters via the
//! localization rule, and inverse atoms through their defining expressions.

use super::expr::{
    AtomTable, GenKind, Letter, NCExpr, Sym, Tensor3Expr, TensorExpr, Word,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

fn word1(l: Letter) -> Word {
    Word::from_letters([l])
}

fn word2(l1: Letter, l2: Letter) -> Word {
    Word::from_letters([l1, l2])
}

/// Bracket computation context with memoized word pairs.
pub struct BracketCtx<'a> {
    pub atoms: &'a AtomTable,
    cache: BTreeMap<(Word, Word), TensorExpr>,
}

impl<'a> BracketCtx<'a> {
    pub fn new(atoms: &'a AtomTable) -> Self {
        BracketCtx {
            atoms,
            cache: BTreeMap::new(),
        }
    }

    /// Base table on one square's weights:
    /// `{{b_i, a_i}} = 1/2 b_i ox a_i`, `{{b_i, c_i}} = 1/2 c_i ox b_i`,
    /// `{{a_i, d_i}} = 1/2 1 ox a_i d_i`, `{{c_i, d_i}} = 1/2 d_i c_i ox 1`,
    /// antisymmetric flips, all other generator pairs zero.
    fn base(&self, g1: super::expr::BaseGen, g2: super::expr::BaseGen) -> TensorExpr {
        if g1.idx != g2.idx {
            return TensorExpr::zero();
        }
        let i = g1.idx;
        let l = |k: GenKind| Letter::gen(super::expr::BaseGen::new(k, i));
        use GenKind::*;
        match (g1.kind, g2.kind) {
            (B, A) => TensorExpr::term(word1(l(B)), word1(l(A)), half()),
            (A, B) => TensorExpr::term(word1(l(A)), word1(l(B)), -half()),
            (B, C) => TensorExpr::term(word1(l(C)), word1(l(B)), half()),
            (C, B) => TensorExpr::term(word1(l(B)), word1(l(C)), -half()),
            (A, D) => TensorExpr::term(Word::empty(), word2(l(A), l(D)), half()),
            (D, A) => TensorExpr::term(word2(l(A), l(D)), Word::empty(), -half()),
            (C, D) => TensorExpr::term(word2(l(D), l(C)), Word::empty(), half()),
            (D, C) => TensorExpr::term(Word::empty(), word2(l(D), l(C)), -half()),
            _ => TensorExpr::zero(),
        }
    }

    fn letters(&mut self, l1: Letter, l2: Letter) -> TensorExpr {
        match (l1.sym, l2.sym) {
            (_, Sym::Atom(id2)) => {
                // {{x, F}} = -(F ox 1) {{x, def}} (1 ox F)
                let def = self.atoms.def(id2).clone();
                let inner = self.exprs(&NCExpr::from_word(word1(l1)), &def);
                let fw = word1(Letter::atom(id2));
                inner.lmul(&fw, &Word::empty()).rmul(&Word::empty(), &fw).neg()
            }
            (Sym::Atom(id1), _) => {
                // {{F, y}} = -(1 ox F) {{def, y}} (F ox 1)
                let def = self.atoms.def(id1).clone();
                let inner = self.exprs(&def, &NCExpr::from_word(word1(l2)));
                let fw = word1(Letter::atom(id1));
                inner.lmul(&Word::empty(), &fw).rmul(&fw, &Word::empty()).neg()
            }
            (Sym::Gen(g1), Sym::Gen(g2)) => {
                if l2.inv {
                    // {{x, g^{-1}}} = -(g^{-1} ox 1) {{x, g}} (1 ox g^{-1})
                    let gi = word1(Letter::gen_inv(g2));
                    let inner = self.letters(l1, Letter::gen(g2));
                    inner.lmul(&gi, &Word::empty()).rmul(&Word::empty(), &gi).neg()
                } else if l1.inv {
                    // {{g^{-1}, y}} = -(1 ox g^{-1}) {{g, y}} (g^{-1} ox 1)
                    let gi = word1(Letter::gen_inv(g1));
                    let inner = self.letters(Letter::gen(g1), l2);
                    inner.lmul(&Word::empty(), &gi).rmul(&gi, &Word::empty()).neg()
                } else {
                    self.base(g1, g2)
                }
            }
        }
    }

    fn words(&mut self, u: &Word, w: &Word) -> TensorExpr {
        if u.is_empty() || w.is_empty() {
            return TensorExpr::zero();
        }
        let key = (u.clone(), w.clone());
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let result = if w.len() > 1 {
            // {{u, h r}} = {{u, h}} (1 ox r) + (h ox 1) {{u, r}}
            let h = Word::from_letters([w.letters()[0]]);
            let r = Word::from_letters(w.letters()[1..].iter().copied());
            let t1 = self.words(u, &h).rmul(&Word::empty(), &r);
            let t2 = self.words(u, &r).lmul(&h, &Word::empty());
            t1.add(&t2)
        } else if u.len() > 1 {
            // {{h r, w}} = (1 ox h) {{r, w}} + {{h, w}} (r ox 1)
            let h = Word::from_letters([u.letters()[0]]);
            let r = Word::from_letters(u.letters()[1..].iter().copied());
            let t1 = self.words(&r, w).lmul(&Word::empty(), &h);
            let t2 = self.words(&h, w).rmul(&r, &Word::empty());
            t1.add(&t2)
        } else {
            self.letters(u.letters()[0], w.letters()[0])
        };
        self.cache.insert(key, result.clone());
        result
    }

    /// Bilinear extension to expressions.
    pub fn exprs(&mut self, e1: &NCExpr, e2: &NCExpr) -> TensorExpr {
        let mut out = TensorExpr::zero();
        for (w1, c1) in e1.terms() {
            for (w2, c2) in e2.terms() {
                out = out.add(&self.words(w1, w2).scale(&(c1 * c2)));
            }
        }
        out
    }
}

/// The double bracket `{{e1, e2}}`.
pub fn double_bracket(e1: &NCExpr, e2: &NCExpr, atoms: &AtomTable) -> TensorExpr {
    BracketCtx::new(atoms).exprs(e1, e2)
}

/// The induced bracket `{e1, e2} = mu({{e1, e2}})`.
pub fn induced_bracket(e1: &NCExpr, e2: &NCExpr, atoms: &AtomTable) -> NCExpr {
    double_bracket(e1, e2, atoms).multiply_out()
}

/// The left action `{{x, -}}_L` on a two-slot tensor:
/// `{{x, u ox v}}_L = {{x, u}} ox v`.
fn bracket_left(
    ctx: &mut BracketCtx<'_>,
    x: &NCExpr,
    t: &TensorExpr,
) -> Tensor3Expr {
    let mut out = Tensor3Expr::zero();
    for ((u, v), c) in t.terms() {
        let inner = ctx.exprs(x, &NCExpr::from_word(u.clone()));
        for ((p, q), c2) in inner.terms() {
            out.add_term(p.clone(), q.clone(), v.clone(), c * c2);
        }
    }
    out
}

/// The triple-tensor Jacobi expression
/// `{{x, {{y, z}}}}_L + sigma {{y, {{z, x}}}}_L + sigma^2 {{z, {{x, y}}}}_L`.
/// For the network's local rules this is not identically zero (the bracket
/// is quasi-Poisson); the cyclic-space Jacobi below is the identity that
/// does hold on the weight algebra.
pub fn jacobi_triple_sum(
    x: &NCExpr,
    y: &NCExpr,
    z: &NCExpr,
    atoms: &AtomTable,
) -> Tensor3Expr {
    let mut ctx = BracketCtx::new(atoms);
    let t1 = {
        let inner = ctx.exprs(y, z);
        bracket_left(&mut ctx, x, &inner)
    };
    let t2 = {
        let inner = ctx.exprs(z, x);
        bracket_left(&mut ctx, y, &inner).sigma()
    };
    let t3 = {
        let inner = ctx.exprs(x, y);
        bracket_left(&mut ctx, z, &inner).sigma().sigma()
    };
    t1.add(&t2).add(&t3)
}

/// Residual of the Lie Jacobi identity for the induced bracket on the cyclic
/// space: `<x,<y,z>> + <y,<z,x>> + <z,<x,y>>` as an `NCExpr` whose cyclic
/// class must vanish (decide by trace evaluation).
pub fn h0_jacobi_residual(
    x: &NCExpr,
    y: &NCExpr,
    z: &NCExpr,
    atoms: &AtomTable,
) -> NCExpr {
    let mut acc = NCExpr::zero();
    for (p, q, r) in [(x, y, z), (y, z, x), (z, x, y)] {
        let inner = induced_bracket(q, r, atoms);
        acc = acc.add(&induced_bracket(p, &inner, atoms));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::super::eval::{expr_drift, tensor_drift, trace_drift};
    use super::super::expr::BaseGen;
    use super::*;
    use num_traits::One;

    fn g(kind: GenKind, idx: u32) -> BaseGen {
        BaseGen::new(kind, idx)
    }

    fn e(kind: GenKind, idx: u32) -> NCExpr {
        NCExpr::gen(g(kind, idx))
    }

    #[test]
    fn base_table_values() {
        let atoms = AtomTable::new();
        // {{b1, a1}} = 1/2 b1 ox a1
        let t = double_bracket(&e(GenKind::B, 1), &e(GenKind::A, 1), &atoms);
        let want = TensorExpr::term(
            word1(Letter::gen(g(GenKind::B, 1))),
            word1(Letter::gen(g(GenKind::A, 1))),
            half(),
        );
        assert_eq!(t, want);
        // {{a1, a1}} = 0
        assert!(double_bracket(&e(GenKind::A, 1), &e(GenKind::A, 1), &atoms).is_zero());
        // cross-square brackets vanish
        assert!(double_bracket(&e(GenKind::B, 1), &e(GenKind::A, 2), &atoms).is_zero());
    }

    #[test]
    fn inverse_rule_reduces() {
        let atoms = AtomTable::new();
        // {{b1, a1^{-1}}} = -1/2 a1^{-1} b1 ox 1
        let t = double_bracket(&e(GenKind::B, 1), &NCExpr::gen_inv(g(GenKind::A, 1)), &atoms);
        let want = TensorExpr::term(
            word2(Letter::gen_inv(g(GenKind::A, 1)), Letter::gen(g(GenKind::B, 1))),
            Word::empty(),
            -half(),
        );
        assert_eq!(t, want);
    }

    #[test]
    fn antisymmetry_on_random_composites() {
        let atoms = AtomTable::new();
        let mut sampler = crate::algebra::GenericSampler::new(99);
        let kinds = [GenKind::A, GenKind::B, GenKind::C, GenKind::D];
        for rep in 0..50 {
            let mut rand_word = || {
                let len = sampler.gen_range_i64(1, 3);
                Word::from_letters((0..len).map(|_| {
                    let kind = kinds[sampler.gen_range_i64(0, 3) as usize];
                    let idx = sampler.gen_range_i64(1, 2) as u32;
                    if sampler.gen_range_i64(0, 3) == 0 {
                        Letter::gen_inv(g(kind, idx))
                    } else {
                        Letter::gen(g(kind, idx))
                    }
                }))
            };
            let x = NCExpr::from_word(rand_word());
            let y = NCExpr::from_word(rand_word());
            let lhs = double_bracket(&x, &y, &atoms);
            let rhs = double_bracket(&y, &x, &atoms).tau().neg();
            assert_eq!(
                tensor_drift(&lhs, &rhs, &atoms, 100 + rep).unwrap(),
                0.0,
                "antisymmetry fails for {x} vs {y}"
            );
        }
    }

    #[test]
    fn induced_bracket_examples() {
        let atoms = AtomTable::new();
        // {b1, a1} = 1/2 b1 a1
        let got = induced_bracket(&e(GenKind::B, 1), &e(GenKind::A, 1), &atoms);
        let want = e(GenKind::B, 1).mul(&e(GenKind::A, 1)).scale(&half());
        assert_eq!(got, want);
        // {a1, a1} = 0
        assert!(induced_bracket(&e(GenKind::A, 1), &e(GenKind::A, 1), &atoms).is_zero());
        // {b1, a1^{-1}} = -1/2 a1^{-1} b1
        let got = induced_bracket(&e(GenKind::B, 1), &NCExpr::gen_inv(g(GenKind::A, 1)), &atoms);
        let want = NCExpr::gen_inv(g(GenKind::A, 1))
            .mul(&e(GenKind::B, 1))
            .scale(&-half());
        assert_eq!(got, want);
    }

    #[test]
    fn leibniz_consistency_eval() {
        let atoms = AtomTable::new();
        // {b1, a1 a1} expanded by hand: 1/2 b1 a1 a1 + 1/2 a1 b1 a1
        let aa = e(GenKind::A, 1).mul(&e(GenKind::A, 1));
        let got = induced_bracket(&e(GenKind::B, 1), &aa, &atoms);
        let ba = e(GenKind::B, 1).mul(&aa).scale(&half());
        let aba = e(GenKind::A, 1)
            .mul(&e(GenKind::B, 1))
            .mul(&e(GenKind::A, 1))
            .scale(&half());
        let want = ba.add(&aba);
        assert_eq!(expr_drift(&got, &want, &atoms, 5).unwrap(), 0.0);
    }

    #[test]
    fn induced_leibniz_right_slot() {
        // {a, bc} = {a, b} c + b {a, c} evaluated on random letter triples
        let atoms = AtomTable::new();
        let kinds = [GenKind::A, GenKind::B, GenKind::C, GenKind::D];
        let mut seed = 1;
        for ka in kinds {
            for kb in kinds {
                for kc in kinds {
                    let (a, b, c) = (e(ka, 1), e(kb, 1), e(kc, 1));
                    let lhs = induced_bracket(&a, &b.mul(&c), &atoms);
                    let rhs = induced_bracket(&a, &b, &atoms)
                        .mul(&c)
                        .add(&b.mul(&induced_bracket(&a, &c, &atoms)));
                    seed += 1;
                    assert_eq!(expr_drift(&lhs, &rhs, &atoms, seed).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn triple_jacobi_has_known_counterexample() {
        // the local rules are quasi-Poisson: on (a1, a1, b1) the triple sum
        // equals -1/4 a1 ox a1 ox b1
        let atoms = AtomTable::new();
        let t = jacobi_triple_sum(&e(GenKind::A, 1), &e(GenKind::A, 1), &e(GenKind::B, 1), &atoms);
        let mut want = Tensor3Expr::zero();
        want.add_term(
            word1(Letter::gen(g(GenKind::A, 1))),
            word1(Letter::gen(g(GenKind::A, 1))),
            word1(Letter::gen(g(GenKind::B, 1))),
            -BigRational::new(BigInt::from(1), BigInt::from(4)),
        );
        assert_eq!(t, want);
    }

    #[test]
    fn h0_jacobi_on_generator_triples() {
        let atoms = AtomTable::new();
        let kinds = [GenKind::A, GenKind::B, GenKind::C, GenKind::D];
        let zero = NCExpr::zero();
        let mut seed = 40;
        for kx in kinds {
            for ky in kinds {
                for kz in kinds {
                    let r = h0_jacobi_residual(&e(kx, 1), &e(ky, 1), &e(kz, 1), &atoms);
                    seed += 1;
                    assert_eq!(
                        trace_drift(&r, &zero, &atoms, seed).unwrap(),
                        0.0,
                        "H0 Jacobi fails on ({kx:?},{ky:?},{kz:?})"
                    );
                }
            }
        }
    }

    #[test]
    fn natural_form_respects_mu_of_bracket() {
        // mu({{b1 a1, c1}}) matches the Leibniz expansion
        let atoms = AtomTable::new();
        let ba = e(GenKind::B, 1).mul(&e(GenKind::A, 1));
        let got = induced_bracket(&ba, &e(GenKind::C, 1), &atoms);
        // {{ba, c}} = (1 ox b){{a, c}} + {{b, c}}(a ox 1); {{a,c}} = 0
        let want = double_bracket(&e(GenKind::B, 1), &e(GenKind::C, 1), &atoms)
            .rmul(&word1(Letter::gen(g(GenKind::A, 1))), &Word::empty())
            .multiply_out();
        assert_eq!(got, want);
        let _ = BigRational::one();
    }
}
