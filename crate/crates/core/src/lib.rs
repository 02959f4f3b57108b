//! Exact arithmetic for CM points and their reduction maps over `Q`.
//!
//! * [`local_tree`]: lattices over `Z_p`, the Bruhat-Tits tree, and the local
//!   orbit counts `N(n', n'', delta)` by enumeration and by closed form.
//! * [`quad_orders`]: imaginary quadratic orders and their class numbers.
//! * [`orbit_combinatorics`]: Galois-orbit counts for fine conductors, the multiplicity
//!   `kappa` and the identities tying the two quaternion algebras together.
//! * [`quaternion`]: definite quaternion orders, ideal classes and optimal
//!   embeddings, used to count the fibers of the reduction map directly.

pub mod arith;
pub mod error;
pub mod local_tree;
pub mod orbit_combinatorics;
pub mod quad_orders;
pub mod quaternion;

pub use error::{Error, Result};
