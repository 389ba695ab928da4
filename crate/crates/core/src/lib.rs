//! Time integration of an expensive full model coupled to a cheap surrogate
//! through multirate infinitesimal GARK methods.
//!
//! The full ODE `y' = f(t, y)` is split as
//! `y' = V f_s(t, W* y) + [f(t, y) − V f_s(t, W* y)]`, where `f_s` is a
//! surrogate on a space of dimension `S ≤ N` and `(V, W*)` is a projection
//! pair with `W* V = I`. The surrogate part is micro-stepped; the remainder is
//! treated as the slow tendency of an MRI-GARK scheme.

pub mod coefficients;
pub mod integrators;
pub mod problems;
pub mod projections;
