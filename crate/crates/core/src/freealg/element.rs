use std::collections::BTreeMap;

use crate::coeff::Coefficient;

/// Index of a generator inside its presentation. Ids double as precedence ranks:
/// a larger id is a larger letter in the monomial order.
pub type GenId = u16;

/// A monomial in the free monoid, tagged with its weighted degree.
///
/// The derived ordering compares weight first and then the letters lexicographically,
/// which is exactly the weighted degree-lexicographic order when ids are precedence ranks.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Word {
    weight: u32,
    letters: Vec<GenId>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub(crate) fn from_parts(weight: u32, letters: Vec<GenId>) -> Self {
        Self { weight, letters }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn letters(&self) -> &[GenId] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + o.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&o.letters);
        Word { weight: self.weight + o.weight, letters }
    }

    /// Replace `letters[start..start + removed.len()]` by `inserted`.
    pub(crate) fn splice(&self, start: usize, removed: &Word, inserted: &Word) -> Word {
        let end = start + removed.len();
        let mut letters = Vec::with_capacity(self.len() - removed.len() + inserted.len());
        letters.extend_from_slice(&self.letters[..start]);
        letters.extend_from_slice(&inserted.letters);
        letters.extend_from_slice(&self.letters[end..]);
        Word { weight: self.weight - removed.weight + inserted.weight, letters }
    }

    /// Position of the first occurrence of `pat` as a contiguous subword.
    pub fn find(&self, pat: &[GenId]) -> Option<usize> {
        if pat.is_empty() || pat.len() > self.len() {
            return None;
        }
        self.letters.windows(pat.len()).position(|w| w == pat)
    }
}

/// Finite linear combination of words.
#[derive(Clone, PartialEq, Debug)]
pub struct Element<C> {
    terms: BTreeMap<Word, C>,
}

impl<C: Coefficient> Default for Element<C> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<C: Coefficient> Element<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(C::one())
    }

    pub fn scalar(c: C) -> Self {
        Self::term(c, Word::empty())
    }

    pub fn word(w: Word) -> Self {
        Self::term(C::one(), w)
    }

    pub fn term(c: C, w: Word) -> Self {
        let mut e = Self::zero();
        e.add_term(w, &c);
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, C)>>(it: I) -> Self {
        let mut e = Self::zero();
        for (w, c) in it {
            e.add_term(w, &c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Word, &C)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> C {
        self.terms.get(w).cloned().unwrap_or_else(C::zero)
    }

    /// Largest word with its coefficient.
    pub fn leading(&self) -> Option<(&Word, &C)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, w: Word, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                *v = v.add(c);
                if v.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c.clone());
            }
        }
    }

    pub(crate) fn pop_last(&mut self) -> Option<(Word, C)> {
        self.terms.pop_last()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), &c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(w, c)| (w.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(w, v)| (w.clone(), v.mul(c))))
    }

    /// Free (concatenation) product; no reduction is applied.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                out.add_term(w1.concat(w2), &c1.mul(c2));
            }
        }
        out
    }

    /// Commutator `ab − ba` in the free algebra.
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Element<D> {
        Element::from_terms(self.terms.iter().map(|(w, c)| (w.clone(), f(c))))
    }

    /// Constant part (coefficient of the empty word).
    pub fn constant_term(&self) -> C {
        self.coeff(&Word::empty())
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }
}

/// Free product of two elements.
pub fn multiply<C: Coefficient>(a: &Element<C>, b: &Element<C>) -> Element<C> {
    a.mul(b)
}
