//! epsiray: a finite-precision analysis toolkit.
//!
//! The crate has four parts:
//!
//! * [`growth`]: canonical growth functions `c·b^n·n^a·lg(n)^k`, the big-O
//!   preorder over them, and the dominant-resource / overall-complexity
//!   calculus.
//! * [`precision`]: additive/multiplicative error models, worst-case
//!   corrigibility of store/retrieve channels, and deterministic grid
//!   estimation of corrigible-region areas (precision = 1/area).
//! * [`angle_channel`]: the concrete channel that stores an n-bit value as a
//!   plane angle, with its analytic corrigibility threshold `2^{-n}·π` and
//!   closed-form precision `2^{2n+1}/π²`.
//! * [`optics`]: a 2D segment-scene ray tracer answering "does the ray ever
//!   reach the target?", both exactly and under uncertainty-ball semantics
//!   with an honest `UNKNOWN` verdict, plus a manufacturing-sensitivity sweep.

pub mod angle_channel;
pub mod growth;
pub mod optics;
pub mod precision;
