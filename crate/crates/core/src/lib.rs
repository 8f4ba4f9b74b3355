//! Time-domain prosody analysis.
//!
//! - [`audio`]: waveform I/O and synthetic calibration signals
//! - [`aems`]: amplitude envelope demodulation, low-frequency envelope spectra,
//!   polynomial spectrum shapes and frequency-zone detection
//! - [`annot`]: TextGrid / CSV interval annotations and duration sequences
//! - [`rhythm`]: duration dispersion metrics and z-score quadrant analysis
//! - [`timetree`]: metrical time-tree induction over valued sequences and spectra
//! - [`fsm`]: multi-tape finite-state machines for intonation and tone terracing
//! - [`contour`]: F0 estimation, inter-pausal units and polynomial contour models

pub mod aems;
pub mod annot;
pub mod audio;
pub mod contour;
pub mod error;
pub mod fsm;
pub mod rhythm;
pub mod timetree;

pub use error::{Error, Result};
