//! Exact computations for plane foliation germs and surface singularities:
//! blowup reduction, local indices, dual-graph classification, intersection
//! lattices, cyclic quotient charts and Riemann-Roch bookkeeping.

pub mod blowup;
pub mod dualgraph;
pub mod germ;
pub mod lattice;
pub mod localindex;
pub mod numerics;
pub mod poly;
pub mod quotsing;
pub mod scalar;
