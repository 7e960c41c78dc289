//! Binding parameter structs onto a tape.

use crate::numgrad::{Tape, Tensor, Var};

/// A fixed, ordered collection of tensors with a mirror struct of tape
/// handles. `tensors`, `tensors_mut` and `bind_from` must agree on order.
pub trait Parameters {
    type Bound;

    fn tensors(&self) -> Vec<&Tensor>;

    fn tensors_mut(&mut self) -> Vec<&mut Tensor>;

    /// Rebuilds the handle struct from leaves given in `tensors` order.
    fn bind_from(vars: &mut dyn Iterator<Item = Var>) -> Self::Bound;

    /// Registers every tensor as a tracked leaf.
    fn bind(&self, tape: &mut Tape) -> Self::Bound {
        let vars: Vec<Var> = self
            .tensors()
            .into_iter()
            .map(|t| tape.param(t.clone()))
            .collect();
        Self::bind_from(&mut vars.into_iter())
    }

    fn to_tensors(&self) -> Vec<Tensor> {
        self.tensors().into_iter().cloned().collect()
    }

    fn entry_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}
