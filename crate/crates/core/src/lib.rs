//! Sequence token-mixing operators and a simulated sharded attention runtime.
//!
//! Every operator here maps an `L x D` token sequence to a new sequence of the
//! same length by forming (learned or fixed) weighted combinations of tokens:
//!
//! * [`mixers::conv_mix`]: causal depthwise convolution, with a structured
//!   banded-matrix route and an FFT route that must agree.
//! * [`mixers::attention_mix`]: full multi-head attention, plus the
//!   Gram-matrix form and kernel/feature-map factorizations that are
//!   algebraically equivalent and cross-checked in tests.
//! * [`mixers::mlp_mix`]: token mixing and channel mixing by dense matrices,
//!   factored or collapsed.
//! * [`mixers::fnet_mix`]: parameterless two-axis Fourier mixing.
//! * [`ssm`]: linear state-space mixing with dual recurrent/convolutional
//!   evaluation and polynomial-basis history reconstruction.
//! * [`sgconv`]: multi-scale global convolution with log-many parameters and
//!   explicit memory accounting.
//! * [`dist`]: multi-worker multi-head attention simulated in-process with
//!   two all-to-all shuffles, exact conservation checks, and per-worker
//!   score-memory and communication accounting.
//! * [`selector`]: threshold token pruning ahead of any mixer.

pub mod bench;
pub mod dist;
mod error;
pub mod fft;
pub mod io;
pub mod mat;
pub mod mixers;
pub mod selector;
pub mod seq;
pub mod sgconv;
pub mod ssm;

pub use error::{Error, Result};
pub use mat::{ComplexMat, RealMat};
pub use mixers::{Mixer, ParamKind, Taxonomy};
pub use seq::Seq;
