//! Exact-arithmetic 2-descent on elliptic curves of conductor 2^m p with a
//! rational 2-torsion point, and Watkins-conjecture certificates for their
//! quadratic twists.
//!
//! The crate is organized around a pipeline:
//!
//! - [`intcore`] — big-integer kernel (valuations, residue symbols,
//!   squarefree parts, the square-root sign convention, primality, f(n)).
//! - [`curves`] — Weierstrass models y^2 = x^3 + ax^2 + bx, the 2-isogenous
//!   dual, homogeneous spaces, quadratic twists, point counting over F_q.
//! - [`families`] — the twenty parametric families I–XX of curves of
//!   conductor 2^m p (Ivorra's classification): instantiation, inverse
//!   classification, prime sweeps, and the per-family rank-bound hypotheses.
//! - [`localsolve`] — certified solvability of torsors d w^2 = d^2 + c2 z^2 +
//!   c4 z^4 over R and Q_p; the oracle that adjudicates every descent claim.
//! - [`descent`] — Selmer tables on both sides of the 2-isogeny, group
//!   closure, dimension bounds, and rank certificates.
//! - [`watkins`] — quadratic-twist certification through the 2-adic valuation
//!   of the modular-degree ratio identity.
//! - [`report`] / [`cli`] — rendering and the command-line front end.
//!
//! Run `cargo run --example generate_family` (or any other example) for a
//! guided tour; the `ivorra-watkins` binary exposes the same operations as
//! subcommands.

pub mod cli;
pub mod curves;
pub mod descent;
pub mod families;
pub mod intcore;
pub mod localsolve;
pub mod report;
pub mod watkins;

/// Version tag carried by every JSON document this crate emits.
pub const SCHEMA: &str = "ivorra-watkins/1";
