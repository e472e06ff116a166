use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use super::element::{Element, GenId, Word};
use super::AlgebraError;
use crate::coeff::Coefficient;

/// Default bound on the number of single rewrite steps in one normal-form computation.
pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub id: GenId,
    pub name: String,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewriteRule<C> {
    pub lhs: Word,
    pub rhs: Element<C>,
}

/// Generators, monomial order, rewrite rules and an optional star structure.
#[derive(Clone, Debug)]
pub struct Presentation<C> {
    name: String,
    generators: Vec<Generator>,
    by_name: HashMap<String, GenId>,
    rules: Vec<RewriteRule<C>>,
    by_first: Vec<Vec<usize>>,
    star: Option<Vec<Element<C>>>,
    inverses: Vec<(GenId, GenId)>,
    step_limit: usize,
}

/// Incremental constructor for a [`Presentation`]. Generators added later have higher precedence.
#[derive(Clone, Debug)]
pub struct PresentationBuilder<C> {
    name: String,
    generators: Vec<Generator>,
    rules: Vec<(Vec<GenId>, Element<C>)>,
    star: BTreeMap<GenId, Element<C>>,
    inverses: Vec<(GenId, GenId)>,
}

impl<C: Coefficient> PresentationBuilder<C> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            generators: Vec::new(),
            rules: Vec::new(),
            star: BTreeMap::new(),
            inverses: Vec::new(),
        }
    }

    /// Add a generator; it becomes the largest letter so far.
    pub fn generator(&mut self, name: &str, weight: u32) -> GenId {
        let id = self.generators.len() as GenId;
        self.generators.push(Generator { id, name: name.to_string(), weight });
        id
    }

    pub fn word(&self, letters: &[GenId]) -> Word {
        let weight = letters.iter().map(|&g| self.generators[g as usize].weight).sum();
        Word::from_parts(weight, letters.to_vec())
    }

    pub fn mono(&self, c: C, letters: &[GenId]) -> Element<C> {
        Element::term(c, self.word(letters))
    }

    pub fn gen_elem(&self, g: GenId) -> Element<C> {
        self.mono(C::one(), &[g])
    }

    pub fn rule(&mut self, lhs: &[GenId], rhs: Element<C>) -> &mut Self {
        self.rules.push((lhs.to_vec(), rhs));
        self
    }

    pub fn star(&mut self, g: GenId, image: Element<C>) -> &mut Self {
        self.star.insert(g, image);
        self
    }

    pub fn inverse_pair(&mut self, g: GenId, ginv: GenId) -> &mut Self {
        self.inverses.push((g, ginv));
        self
    }

    pub fn build(mut self) -> Result<Presentation<C>, AlgebraError> {
        let mut by_name = HashMap::new();
        for g in &self.generators {
            if by_name.insert(g.name.clone(), g.id).is_some() {
                return Err(AlgebraError::DuplicateGenerator(g.name.clone()));
            }
        }
        let mut rules = Vec::with_capacity(self.rules.len());
        for (lhs, rhs) in std::mem::take(&mut self.rules) {
            let lhs = self.word_of(&lhs);
            if lhs.is_empty() {
                return Err(AlgebraError::InvalidRule("empty left-hand side".into()));
            }
            if let Some((w, _)) = rhs.leading() {
                if *w >= lhs {
                    return Err(AlgebraError::InvalidRule(format!(
                        "right-hand side term {} is not smaller than {}",
                        self.render_word(w),
                        self.render_word(&lhs)
                    )));
                }
            }
            if rules.iter().any(|r: &RewriteRule<C>| r.lhs == lhs) {
                return Err(AlgebraError::InvalidRule(format!("duplicate left-hand side {}", self.render_word(&lhs))));
            }
            rules.push(RewriteRule { lhs, rhs });
        }
        let star = if self.star.is_empty() {
            None
        } else {
            let mut images = Vec::with_capacity(self.generators.len());
            for g in &self.generators {
                match self.star.get(&g.id) {
                    Some(e) => images.push(e.clone()),
                    None => return Err(AlgebraError::InvalidStar(format!("generator {} has no star image", g.name))),
                }
            }
            Some(images)
        };
        let mut by_first = vec![Vec::new(); self.generators.len()];
        for (idx, r) in rules.iter().enumerate() {
            by_first[r.lhs.letters()[0] as usize].push(idx);
        }
        Ok(Presentation {
            name: self.name,
            generators: self.generators,
            by_name,
            rules,
            by_first,
            star,
            inverses: self.inverses,
            step_limit: DEFAULT_STEP_LIMIT,
        })
    }

    fn word_of(&self, letters: &[GenId]) -> Word {
        self.word(letters)
    }

    fn render_word(&self, w: &Word) -> String {
        render_letters(w.letters(), |g| &self.generators[g as usize].name)
    }
}

/// One critical pair whose two reductions disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct Ambiguity<C> {
    pub word: Word,
    pub rules: (usize, usize),
    pub left: Element<C>,
    pub right: Element<C>,
}

/// Result of checking one relation under a morphism or a star map.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationCheck<C> {
    pub relation: String,
    pub pass: bool,
    pub residual: Element<C>,
}

impl<C: Coefficient> Presentation<C> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn rules(&self) -> &[RewriteRule<C>] {
        &self.rules
    }

    pub fn has_star(&self) -> bool {
        self.star.is_some()
    }

    pub fn star_image(&self, g: GenId) -> Option<&Element<C>> {
        self.star.as_ref().map(|s| &s[g as usize])
    }

    pub fn inverse_pairs(&self) -> &[(GenId, GenId)] {
        &self.inverses
    }

    /// Generator paired with `g` as its inverse, in either direction.
    pub fn inverse_of(&self, g: GenId) -> Option<GenId> {
        self.inverses.iter().find_map(|&(a, b)| {
            if a == g {
                Some(b)
            } else if b == g {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn step_limit(&self) -> usize {
        self.step_limit
    }

    pub fn with_step_limit(mut self, limit: usize) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn generator_id(&self, name: &str) -> Option<GenId> {
        self.by_name.get(name).copied()
    }

    pub fn generator_name(&self, g: GenId) -> &str {
        &self.generators[g as usize].name
    }

    pub fn word(&self, letters: &[GenId]) -> Word {
        let weight = letters.iter().map(|&g| self.generators[g as usize].weight).sum();
        Word::from_parts(weight, letters.to_vec())
    }

    /// Word from generator names; panics on unknown names (for constructing fixed data).
    pub fn word_named(&self, names: &[&str]) -> Word {
        let ids: Vec<GenId> =
            names.iter().map(|n| self.generator_id(n).unwrap_or_else(|| panic!("unknown generator {n}"))).collect();
        self.word(&ids)
    }

    pub fn gen(&self, name: &str) -> Element<C> {
        Element::word(self.word_named(&[name]))
    }

    pub fn mono(&self, c: C, names: &[&str]) -> Element<C> {
        Element::term(c, self.word_named(names))
    }

    /// Leftmost rule application site in `w`.
    fn find_redex(&self, w: &Word) -> Option<(usize, &RewriteRule<C>)> {
        let letters = w.letters();
        for pos in 0..letters.len() {
            for &ri in &self.by_first[letters[pos] as usize] {
                let r = &self.rules[ri];
                let l = r.lhs.letters();
                if pos + l.len() <= letters.len() && &letters[pos..pos + l.len()] == l {
                    return Some((pos, r));
                }
            }
        }
        None
    }

    pub fn is_irreducible(&self, w: &Word) -> bool {
        self.find_redex(w).is_none()
    }

    /// Rewrite until no rule left-hand side occurs in any word.
    pub fn normal_form(&self, e: &Element<C>) -> Result<Element<C>, AlgebraError> {
        let mut pending = e.clone();
        let mut out = Element::zero();
        let mut steps = 0usize;
        while let Some((w, c)) = pending.pop_last() {
            match self.find_redex(&w) {
                None => out.add_term(w, &c),
                Some((pos, rule)) => {
                    steps += 1;
                    if steps > self.step_limit {
                        return Err(AlgebraError::StepLimit(self.step_limit));
                    }
                    for (rw, rc) in rule.rhs.terms() {
                        pending.add_term(w.splice(pos, &rule.lhs, rw), &c.mul(rc));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Normal form of the product of two elements.
    pub fn product(&self, a: &Element<C>, b: &Element<C>) -> Result<Element<C>, AlgebraError> {
        self.normal_form(&a.mul(b))
    }

    /// Normal form of a product of several elements, reducing after each factor.
    pub fn product_all(&self, factors: &[&Element<C>]) -> Result<Element<C>, AlgebraError> {
        let mut acc = Element::one();
        for f in factors {
            acc = self.normal_form(&acc.mul(f))?;
        }
        Ok(acc)
    }

    /// `true` iff `lhs − rhs` reduces to zero; the reduced difference is returned either way.
    pub fn check_relation(&self, lhs: &Element<C>, rhs: &Element<C>) -> Result<(bool, Element<C>), AlgebraError> {
        let residual = self.normal_form(&lhs.sub(rhs))?;
        Ok((residual.is_zero(), residual))
    }

    fn apply_rule_at(&self, w: &Word, pos: usize, rule: &RewriteRule<C>) -> Element<C> {
        Element::from_terms(rule.rhs.terms().map(|(rw, rc)| (w.splice(pos, &rule.lhs, rw), rc.clone())))
    }

    /// All overlap and inclusion ambiguities with total length at most `maxlen`,
    /// as `(word, rule a, position a, rule b, position b)`.
    fn critical_pairs(&self, maxlen: usize) -> Vec<(Word, usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for (ia, a) in self.rules.iter().enumerate() {
            let la = a.lhs.letters();
            for (ib, b) in self.rules.iter().enumerate() {
                let lb = b.lhs.letters();
                for k in 1..la.len().min(lb.len()) {
                    if la[la.len() - k..] == lb[..k] {
                        let total = la.len() + lb.len() - k;
                        if total <= maxlen {
                            let mut letters = la.to_vec();
                            letters.extend_from_slice(&lb[k..]);
                            out.push((self.word(&letters), ia, 0, ib, la.len() - k));
                        }
                    }
                }
                if ia != ib && lb.len() < la.len() && la.len() <= maxlen {
                    for pos in 0..=la.len() - lb.len() {
                        if la[pos..pos + lb.len()] == *lb {
                            out.push((a.lhs.clone(), ia, 0, ib, pos));
                        }
                    }
                }
            }
        }
        out
    }

    /// Diamond-lemma check: reduce both sides of every ambiguity up to `maxlen` and
    /// return those whose normal forms differ.
    pub fn overlap_check(&self, maxlen: usize) -> Result<Vec<Ambiguity<C>>, AlgebraError> {
        let pairs = self.critical_pairs(maxlen);
        let results: Result<Vec<Option<Ambiguity<C>>>, AlgebraError> = pairs
            .par_iter()
            .map(|(w, ia, pa, ib, pb)| {
                let left = self.normal_form(&self.apply_rule_at(w, *pa, &self.rules[*ia]))?;
                let right = self.normal_form(&self.apply_rule_at(w, *pb, &self.rules[*ib]))?;
                Ok((left != right).then(|| Ambiguity { word: w.clone(), rules: (*ia, *ib), left, right }))
            })
            .collect();
        Ok(results?.into_iter().flatten().collect())
    }

    /// Number of critical pairs examined by [`Self::overlap_check`].
    pub fn critical_pair_count(&self, maxlen: usize) -> usize {
        self.critical_pairs(maxlen).len()
    }

    /// Antilinear, antimultiplicative extension of the star map (unreduced).
    pub fn apply_star(&self, e: &Element<C>) -> Result<Element<C>, AlgebraError> {
        let images = self.star.as_ref().ok_or(AlgebraError::NoStar)?;
        let mut out = Element::zero();
        for (w, c) in e.terms() {
            let mut acc = Element::scalar(c.conj());
            for &g in w.letters().iter().rev() {
                acc = acc.mul(&images[g as usize]);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Star followed by normal form.
    pub fn star_nf(&self, e: &Element<C>) -> Result<Element<C>, AlgebraError> {
        self.normal_form(&self.apply_star(e)?)
    }

    /// Checks that star is an involution on generators and maps every relation to a relation.
    pub fn check_star(&self) -> Result<Vec<RelationCheck<C>>, AlgebraError> {
        if self.star.is_none() {
            return Err(AlgebraError::NoStar);
        }
        let mut items = Vec::new();
        for g in &self.generators {
            let e = self.gen(&g.name);
            let twice = self.star_nf(&self.apply_star(&e)?)?;
            let residual = self.normal_form(&twice.sub(&e))?;
            items.push(RelationCheck {
                relation: format!("star(star({})) = {}", g.name, g.name),
                pass: residual.is_zero(),
                residual,
            });
        }
        let rule_items: Result<Vec<_>, AlgebraError> = self
            .rules
            .par_iter()
            .map(|r| {
                let diff = Element::word(r.lhs.clone()).sub(&r.rhs);
                let residual = self.star_nf(&diff)?;
                Ok(RelationCheck {
                    relation: format!("star({} = {})", self.render(&Element::word(r.lhs.clone())), self.render(&r.rhs)),
                    pass: residual.is_zero(),
                    residual,
                })
            })
            .collect();
        items.extend(rule_items?);
        Ok(items)
    }

    /// Relation text `lhs = rhs` of rule `idx`.
    pub fn rule_text(&self, idx: usize) -> String {
        let r = &self.rules[idx];
        format!("{} = {}", self.render(&Element::word(r.lhs.clone())), self.render(&r.rhs))
    }

    pub fn render_word(&self, w: &Word) -> String {
        render_letters(w.letters(), |g| &self.generators[g as usize].name)
    }

    /// Canonical text: terms from the largest word down, runs of a letter written as powers.
    pub fn render(&self, e: &Element<C>) -> String {
        render_element(e, |w| self.render_word(w))
    }

    /// Copy of this presentation with all coefficients mapped through `f`.
    pub fn map_coeffs<D: Coefficient>(&self, name: &str, f: impl Fn(&C) -> D) -> Result<Presentation<D>, AlgebraError> {
        let mut b = PresentationBuilder::<D>::new(name);
        for g in &self.generators {
            b.generator(&g.name, g.weight);
        }
        for r in &self.rules {
            let rhs = r.rhs.map_coeffs(&f);
            b.rule(r.lhs.letters(), rhs);
        }
        if let Some(star) = &self.star {
            for (g, img) in star.iter().enumerate() {
                b.star(g as GenId, img.map_coeffs(&f));
            }
        }
        for &(a, c) in &self.inverses {
            b.inverse_pair(a, c);
        }
        Ok(b.build()?.with_step_limit(self.step_limit))
    }
}

pub(crate) fn render_letters<'a>(letters: &[GenId], name: impl Fn(GenId) -> &'a str) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < letters.len() {
        let g = letters[i];
        let mut j = i;
        while j < letters.len() && letters[j] == g {
            j += 1;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(name(g));
        if j - i > 1 {
            let _ = write!(out, "^{}", j - i);
        }
        i = j;
    }
    out
}

pub(crate) fn render_element<C: Coefficient>(e: &Element<C>, word: impl Fn(&Word) -> String) -> String {
    let mut out = String::new();
    for (w, c) in e.terms().rev() {
        let first = out.is_empty();
        let (neg, mag) = if c.is_negative_display() { (true, c.neg()) } else { (false, c.clone()) };
        if first {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let ws = word(w);
        let cs = if mag.is_atomic() { mag.to_string() } else { format!("({mag})") };
        if ws.is_empty() {
            out.push_str(&cs);
        } else if mag.is_one() {
            out.push_str(&ws);
        } else {
            out.push_str(&cs);
            out.push(' ');
            out.push_str(&ws);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
