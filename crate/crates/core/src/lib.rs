//! Time-frequency Zadoff-Chu pilots and line-of-sight delay-Doppler estimation.
//!
//! The crate models a wideband link whose channel acts on a time-frequency
//! pilot grid through a *twisted* convolution, and recovers the line-of-sight
//! delay and Doppler with a matched filter built on the same operation.
//!
//! * [`tfgrid`]: signed-index complex grids, the common currency of the crate.
//! * [`zcseq`]: 1D Zadoff-Chu, separable ZC and stacked ZC pilots.
//! * [`sigops`]: correlations, the discrete ambiguity function, 2D linear and
//!   twisted convolution.
//! * [`channel`]: Rician delay-Doppler channels and noisy reception.
//! * [`estimator`]: the twisted matched filter, peak search and the
//!   interference diagnostics used to validate it.
//! * [`scenario`]: the moving-UE geometry, NMSE and the Monte Carlo sweep.
//!
//! ```
//! use tfpilot::prelude::*;
//!
//! let spacing = Spacing::new(10.0, 0.5e-6).unwrap();
//! let pilot = separable_zc(7, 5, 1, 1, spacing).unwrap();
//! let pc = PhaseCoupling::physical(spacing);
//!
//! // A single line-of-sight tap at Doppler bin 3, delay bin 4.
//! let tap = GridIndex::new(3, 4);
//! let h = ComplexGrid::delta(tap, spacing).scale(Complex64::new(0.0, 0.8));
//! let y = twisted_conv(&h, &pilot, pc);
//!
//! let q = filter_output(&y, &pilot, pc);
//! assert!((q.at(tap) - Complex64::new(0.0, 0.8)).norm() < 1e-12);
//! ```

pub mod channel;
pub mod estimator;
mod fmt;
pub mod scenario;
pub mod sigops;
pub mod tfgrid;
pub mod zcseq;

pub use crate::fmt::{fmt_complex, fmt_sig9, parse_complex};

/// Errors raised by grid construction, pilot generation, channel and scenario validation.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid pilot: {0}")]
    InvalidPilot(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid channel configuration: {0}")]
    InvalidChannel(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("empty search region")]
    EmptySearchRegion,
    /// A simulated ground truth fell outside the channel grid.
    #[error("truth outside grid: {0}")]
    TruthOutsideGrid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub mod prelude {
    pub use crate::channel::{apply_channel, pdp, sample_channel, DDChannel, DDChannelConfig, DopplerLayout, NoiseModel, SnrReference};
    pub use crate::estimator::{
        appendix_oracle_q, estimate_dd, filter_output, interference_sep, interference_stack, matched_filter_gamma,
        EstimationResult, SearchRegion,
    };
    pub use crate::sigops::{
        conv2d, discrete_caf, linear_acf2d, linear_xcorr, periodic_xcorr, twisted_acf, twisted_conv, zc_acf_closed_form,
        LagSeries, PhaseCoupling,
    };
    pub use crate::tfgrid::{ComplexGrid, GridIndex, Span, Spacing};
    pub use crate::zcseq::{default_roots, separable_zc, stacked_zc, zc_sequence, PilotSpec};
    pub use crate::Error;
    pub use num_complex::Complex64;
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/pilots.md")]
    mod pilots {}
    #[doc = include_str!("../../../book/src/twisted.md")]
    mod twisted {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/sweep.md")]
    mod sweep {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
