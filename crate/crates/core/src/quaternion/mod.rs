//! Definite quaternion algebras ramified at one finite prime `ell`: orders,
//! right ideal classes, and optimal embeddings of imaginary quadratic orders.

pub mod algebra;
pub mod census;
pub mod embeddings;
pub mod enumerate;
pub mod ideals;
pub mod lattice;
pub mod order;

pub use algebra::{hilbert_symbol, make_algebra, Place, Quat, QuatAlgebra};
pub use lattice::Lattice4;
pub use order::{eichler_order, maximalize, unit_group, EichlerOrder, QuatOrder};
pub use census::{embedding_census, Census, CensusRow};
pub use embeddings::{optimal_embeddings, residue_sign, EmbeddingClass, Embeddings, ResidueField};
pub use ideals::{right_ideal_classes, RightIdealClass};
