//! The unified mixing interface and the non-state-space operators.
//!
//! Every mixer maps an `L x D` sequence to a new sequence by a weighted
//! combination of tokens. Operators differ in whether those weights are
//! learned parameters or fixed procedures, and whether they depend on the
//! input itself; [`Taxonomy`] carries that classification.

mod attention;
mod conv;
mod fnet;
mod kernel;
mod mlp;

pub use attention::{
    attention_mix, attention_weights, gram_form_attention, AttentionMixer, AttnParams,
};
pub(crate) use attention::softmax_rows_in_place;
pub use conv::{conv_mix, conv_mix_banded, conv_mix_fft, ConvMixer, ConvParams};
pub use fnet::{fnet_mix, fnet_mix_sequence_first, fnet_mix_vandermonde, FnetMixer};
pub use kernel::{kernel_attention_mix, kernel_attention_mix_gram, FeatureMap, KernelAttentionMixer};
pub use mlp::{mlp_mix, MlpMixer, MlpParams, Nonlinearity};

use crate::seq::Seq;
use crate::Result;

/// How a mixer's weights arise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Weights are trainable parameters (taken as given here; no training).
    Learned,
    /// Weights come from a fixed procedure with nothing to train.
    Fixed,
}

/// Classification of a mixing operator: learned vs fixed weights, and
/// whether the mixing weights depend on the input sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Taxonomy {
    pub params: ParamKind,
    pub input_dependent: bool,
}

impl Taxonomy {
    pub const fn new(params: ParamKind, input_dependent: bool) -> Self {
        Self { params, input_dependent }
    }

    pub fn describe(&self) -> String {
        format!(
            "{}, input-{}",
            match self.params {
                ParamKind::Learned => "learned",
                ParamKind::Fixed => "fixed",
            },
            if self.input_dependent { "dependent" } else { "independent" }
        )
    }
}

/// A sequence-to-sequence token mixing operator.
pub trait Mixer {
    fn name(&self) -> &'static str;
    fn taxonomy(&self) -> Taxonomy;
    fn mix(&self, x: &Seq) -> Result<Seq>;
}
