//! Multi-domain finite element forms over sequences of conforming submeshes.
//!
//! Problems posed on several meshes (codim-0 and codim-1 submeshes of a
//! common parent) are written as one mixed problem on a product function
//! space. Integrals bind several meshes through intersection measures, the
//! Jacobian is the Gateaux derivative with respect to the whole solution, and
//! assembly walks the primal mesh of each integral while composing entity
//! maps to reach the other participants.

pub mod app;
pub mod assemble;
pub mod compile;
pub mod fe;
pub mod forms;
pub mod mesh;
