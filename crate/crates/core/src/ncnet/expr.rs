//! Formal linear combinations of reduced words in network edge-weight
//! generators, with designated inverse atoms for composites such as
//! `f_i = b_i + a_i d_i c_i`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NcnetError {
    #[error("inverse of composite expression {0:?} has no registered atom")]
    UnregisteredInverse(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("network shape: {0}")]
    Shape(String),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum GenKind {
    A,
    B,
    C,
    D,
}

impl GenKind {
    pub fn token(self) -> char {
        match self {
            GenKind::A => 'a',
            GenKind::B => 'b',
            GenKind::C => 'c',
            GenKind::D => 'd',
        }
    }
}

/// A base edge-weight generator, e.g. `a3`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct BaseGen {
    pub kind: GenKind,
    pub idx: u32,
}

impl BaseGen {
    pub fn new(kind: GenKind, idx: u32) -> Self {
        BaseGen { kind, idx }
    }
}

/// Handle of a registered inverse atom.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct AtomId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Sym {
    Gen(BaseGen),
    Atom(AtomId),
}

/// A single letter; atoms never carry the inverse flag (the inverse of an
/// atom is its defining expression).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Letter {
    pub sym: Sym,
    pub inv: bool,
}

impl Letter {
    pub fn gen(g: BaseGen) -> Self {
        Letter {
            sym: Sym::Gen(g),
            inv: false,
        }
    }

    pub fn gen_inv(g: BaseGen) -> Self {
        Letter {
            sym: Sym::Gen(g),
            inv: true,
        }
    }

    pub fn atom(a: AtomId) -> Self {
        Letter {
            sym: Sym::Atom(a),
            inv: false,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.sym == other.sym && self.inv != other.inv
    }
}

/// A free-reduced word of letters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|last| last.cancels(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Canonical representative of the cyclic class: cyclic reduction
    /// followed by the lexicographically minimal rotation.
    pub fn necklace(&self) -> Word {
        let mut w = self.0.clone();
        loop {
            if w.len() >= 2 && w[0].cancels(*w.last().unwrap()) {
                w.remove(0);
                w.pop();
            } else {
                break;
            }
        }
        if w.is_empty() {
            return Word::empty();
        }
        let mut best: Option<Vec<Letter>> = None;
        for r in 0..w.len() {
            let rot: Vec<Letter> = w[r..].iter().chain(w[..r].iter()).copied().collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
        Word(best.unwrap())
    }
}

/// Registry of inverse atoms with their defining expressions. Definitions
/// may reference previously registered atoms only, which keeps bracket
/// recursion well-founded.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    defs: Vec<NCExpr>,
    names: Vec<String>,
    by_def: BTreeMap<NCExpr, AtomId>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register (or look up) the inverse atom of `def`.
    pub fn register(&mut self, name: impl Into<String>, def: NCExpr) -> AtomId {
        if let Some(id) = self.by_def.get(&def) {
            return *id;
        }
        let id = AtomId(self.defs.len() as u32);
        self.defs.push(def.clone());
        self.names.push(name.into());
        self.by_def.insert(def, id);
        id
    }

    pub fn def(&self, id: AtomId) -> &NCExpr {
        &self.defs[id.0 as usize]
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn lookup(&self, def: &NCExpr) -> Option<AtomId> {
        self.by_def.get(def).copied()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Invert a word: reverse with inverted letters; atom letters invert to
    /// their defining expressions (which may be sums).
    pub fn invert_word(&self, w: &Word) -> NCExpr {
        let mut acc = NCExpr::one();
        for l in w.letters().iter().rev() {
            let factor = match l.sym {
                Sym::Gen(g) => NCExpr::from_word(
                    Word::from_letters([Letter {
                        sym: Sym::Gen(g),
                        inv: !l.inv,
                    }]),
                ),
                Sym::Atom(id) => {
                    debug_assert!(!l.inv, "atom letters are never stored inverted");
                    self.def(id).clone()
                }
            };
            acc = acc.mul(&factor);
        }
        acc
    }

    /// Invert an expression: single unit-coefficient words invert directly;
    /// anything else must have been registered as an atom.
    pub fn invert_expr(&self, e: &NCExpr) -> Result<NCExpr, NcnetError> {
        if let Some((w, c)) = e.as_single_term() {
            if c.is_one() {
                return Ok(self.invert_word(&w));
            }
            let inv_word = self.invert_word(&w);
            return Ok(inv_word.scale(&c.recip()));
        }
        match self.lookup(e) {
            Some(id) => Ok(NCExpr::from_word(Word::from_letters([Letter::atom(id)]))),
            None => Err(NcnetError::UnregisteredInverse(format!("{e}"))),
        }
    }
}

/// Formal rational linear combination of reduced words.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct NCExpr {
    terms: BTreeMap<Word, BigRational>,
}

impl NCExpr {
    pub fn zero() -> Self {
        NCExpr::default()
    }

    pub fn one() -> Self {
        NCExpr::from_word(Word::empty())
    }

    pub fn from_word(w: Word) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(w, BigRational::one());
        NCExpr { terms }
    }

    pub fn gen(g: BaseGen) -> Self {
        Self::from_word(Word::from_letters([Letter::gen(g)]))
    }

    pub fn gen_inv(g: BaseGen) -> Self {
        Self::from_word(Word::from_letters([Letter::gen_inv(g)]))
    }

    pub fn atom(id: AtomId) -> Self {
        Self::from_word(Word::from_letters([Letter::atom(id)]))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, BigRational)>) -> Self {
        let mut out = NCExpr::zero();
        for (w, c) in terms {
            out.add_term(w, c);
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn as_single_term(&self) -> Option<(Word, BigRational)> {
        if self.terms.len() == 1 {
            let (w, c) = self.terms.iter().next().unwrap();
            Some((w.clone(), c.clone()))
        } else {
            None
        }
    }

    pub fn add_term(&mut self, w: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(w).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        NCExpr {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return NCExpr::zero();
        }
        NCExpr {
            terms: self.terms.iter().map(|(w, k)| (w.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = NCExpr::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), c1 * c2);
            }
        }
        out
    }

    /// Projection to the cyclic space: every word is replaced by the
    /// canonical representative of its cyclic class. Equal natural forms
    /// certify equality of classes; the converse is decided by evaluation.
    pub fn natural_form(&self) -> Self {
        let mut out = NCExpr::zero();
        for (w, c) in &self.terms {
            out.add_term(w.necklace(), c.clone());
        }
        out
    }
}

fn fmt_rational(c: &BigRational) -> String {
    if c.denom() == &BigInt::one() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Deterministic token form: terms in word order, words as
/// `a1*b1^-1*F1`, rational coefficients as `p/q`.
pub struct ExprPrinter<'a> {
    pub expr: &'a NCExpr,
    pub atoms: &'a AtomTable,
}

impl fmt::Display for ExprPrinter<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expr.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in self.expr.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", fmt_rational(c))?;
            for l in w.letters() {
                let name = match l.sym {
                    Sym::Gen(g) => format!("{}{}", g.kind.token(), g.idx),
                    Sym::Atom(id) => self.atoms.name(id).to_string(),
                };
                write!(f, "*{}", name)?;
                if l.inv {
                    write!(f, "^-1")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for NCExpr {
    /// Table-free form: atoms print as `F<id>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", fmt_rational(c))?;
            for l in w.letters() {
                match l.sym {
                    Sym::Gen(g) => write!(f, "*{}{}", g.kind.token(), g.idx)?,
                    Sym::Atom(id) => write!(f, "*F{}", id.0)?,
                }
                if l.inv {
                    write!(f, "^-1")?;
                }
            }
        }
        Ok(())
    }
}

/// Formal combination of word (x) word tensors.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TensorExpr {
    terms: BTreeMap<(Word, Word), BigRational>,
}

impl TensorExpr {
    pub fn zero() -> Self {
        TensorExpr::default()
    }

    pub fn term(u: Word, v: Word, c: BigRational) -> Self {
        let mut t = TensorExpr::zero();
        t.add_term(u, v, c);
        t
    }

    pub fn add_term(&mut self, u: Word, v: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry((u, v))
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Word, Word), &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((u, v), c) in &other.terms {
            out.add_term(u.clone(), v.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TensorExpr {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), -c))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return TensorExpr::zero();
        }
        TensorExpr {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }

    /// `(x ox y) -> (y ox x)` on every term.
    pub fn tau(&self) -> Self {
        TensorExpr {
            terms: self
                .terms
                .iter()
                .map(|((u, v), c)| ((v.clone(), u.clone()), c.clone()))
                .collect(),
        }
    }

    /// Multiply each term by `l ox r` on the left.
    pub fn lmul(&self, l: &Word, r: &Word) -> Self {
        TensorExpr {
            terms: self
                .terms
                .iter()
                .map(|((u, v), c)| ((l.concat(u), r.concat(v)), c.clone()))
                .collect(),
        }
    }

    /// Multiply each term by `l ox r` on the right.
    pub fn rmul(&self, l: &Word, r: &Word) -> Self {
        TensorExpr {
            terms: self
                .terms
                .iter()
                .map(|((u, v), c)| ((u.concat(l), v.concat(r)), c.clone()))
                .collect(),
        }
    }

    /// Multiplication map: `mu(u ox v) = u v`.
    pub fn multiply_out(&self) -> NCExpr {
        let mut out = NCExpr::zero();
        for ((u, v), c) in &self.terms {
            out.add_term(u.concat(v), c.clone());
        }
        out
    }
}

/// Triple tensors for the Jacobi expressions.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Tensor3Expr {
    terms: BTreeMap<(Word, Word, Word), BigRational>,
}

impl Tensor3Expr {
    pub fn zero() -> Self {
        Tensor3Expr::default()
    }

    pub fn add_term(&mut self, u: Word, v: Word, w: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry((u, v, w))
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, x| !x.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Word, Word, Word), &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((u, v, w), c) in &other.terms {
            out.add_term(u.clone(), v.clone(), w.clone(), c.clone());
        }
        out
    }

    /// The cyclic permutation `sigma: x ox y ox z -> z ox x ox y`.
    pub fn sigma(&self) -> Self {
        Tensor3Expr {
            terms: self
                .terms
                .iter()
                .map(|((u, v, w), c)| ((w.clone(), u.clone(), v.clone()), c.clone()))
                .collect(),
        }
    }
}
