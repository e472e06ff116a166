use rayon::prelude::*;

use super::element::Element;
use super::presentation::{Presentation, RelationCheck};
use super::AlgebraError;
use crate::coeff::Coefficient;

/// Assignment of target elements to source generators, extended multiplicatively.
#[derive(Clone, Debug)]
pub struct Morphism<C> {
    name: String,
    source: Presentation<C>,
    target: Presentation<C>,
    images: Vec<Element<C>>,
}

impl<C: Coefficient> Morphism<C> {
    /// `images` pairs source generator names with target elements; every generator must appear.
    pub fn new(
        name: impl Into<String>,
        source: Presentation<C>,
        target: Presentation<C>,
        images: Vec<(&str, Element<C>)>,
    ) -> Result<Self, AlgebraError> {
        let mut slots: Vec<Option<Element<C>>> = vec![None; source.generators().len()];
        for (n, e) in images {
            let g = source.generator_id(n).ok_or_else(|| AlgebraError::UnknownGenerator(n.to_string()))?;
            slots[g as usize] = Some(e);
        }
        let images = slots
            .into_iter()
            .enumerate()
            .map(|(g, s)| s.ok_or_else(|| AlgebraError::MissingImage(source.generator_name(g as u16).to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { name: name.into(), source, target, images })
    }

    pub fn identity(pres: &Presentation<C>) -> Self {
        let images = pres.generators().iter().map(|g| pres.gen(&g.name)).collect();
        Self { name: format!("id:{}", pres.name()), source: pres.clone(), target: pres.clone(), images }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Presentation<C> {
        &self.source
    }

    pub fn target(&self) -> &Presentation<C> {
        &self.target
    }

    /// Image of a source element, reduced in the target.
    pub fn apply(&self, e: &Element<C>) -> Result<Element<C>, AlgebraError> {
        let mut out = Element::zero();
        for (w, c) in e.terms() {
            let factors: Vec<&Element<C>> = w.letters().iter().map(|&g| &self.images[g as usize]).collect();
            let img = self.target.product_all(&factors)?;
            out = out.add(&img.scale(c));
        }
        Ok(out)
    }

    /// For every source rule `lhs → rhs`, the reduced image of `lhs − rhs`.
    pub fn verify_hom(&self) -> Result<Vec<RelationCheck<C>>, AlgebraError> {
        (0..self.source.rules().len())
            .into_par_iter()
            .map(|idx| {
                let r = &self.source.rules()[idx];
                let diff = Element::word(r.lhs.clone()).sub(&r.rhs);
                let residual = self.apply(&diff)?;
                Ok(RelationCheck { relation: self.source.rule_text(idx), pass: residual.is_zero(), residual })
            })
            .collect()
    }
}
