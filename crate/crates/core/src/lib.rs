//! Mihailova fiber products in F₂×F₂, their faithful image in GL(4,ℤ), the
//! gadget groups `G_h = ℤ⁴⋊F_{p+1}` and the checks that tie membership in
//! the fiber product to isomorphism of gadget groups and to conjugacy of
//! finitely generated subgroups of GL(4,ℤ).

pub mod fiber;
pub mod matrep;
pub mod pipeline;
pub mod planes;
pub mod semidir;
pub mod words;
