//! Decoherence of a noisy spin-1 Zeeman multiplet and its suppression by
//! continuous driving.
//!
//! The Larmor frequency fluctuates as an Ornstein-Uhlenbeck process. The
//! crate gives closed forms for the free coherence decay and for the
//! noise-induced transfer between dressed states, with or without a
//! quadratic Zeeman shift, plus a seed-deterministic Monte Carlo that
//! propagates single noise paths for comparison.
//!
//! ```
//! use spin1_cdd::analytic::cdd_transfer;
//! use spin1_cdd::noise::OuNoiseModel;
//!
//! let model = OuNoiseModel::new(0.0025, 0.1)?;
//! let p = cdd_transfer(1.0, 0, 1, &model, 10.0)?;
//! assert!(p.perturbative && p.probability < 0.01);
//! # Ok::<(), spin1_cdd::Error>(())
//! ```
//!
//! Frequencies are angular throughout and the basis order is
//! `{|1,1>, |1,0>, |1,-1>}`. A longer guide lives in `book/`.

pub mod analytic;
pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod physconfig;
pub mod quadrature;
pub mod spinops;
pub mod validate;
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/dephasing.md")]
    mod dephasing {}
    #[doc = include_str!("../../../book/src/cdd.md")]
    mod cdd {}
    #[doc = include_str!("../../../book/src/dressed.md")]
    mod dressed {}
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    mod montecarlo {}
    #[doc = include_str!("../../../book/src/units.md")]
    mod units {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
