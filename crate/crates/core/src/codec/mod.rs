//! Per-frame payload construction: LDPC protection, template keys and the
//! template-index control channel.

pub mod control;
pub mod ldpc;
pub mod templates;

pub use control::{
    control_capacity, decode_control, template_channel_length, ControlDecode, ControlSequence, FrameMatch,
};
pub use ldpc::{Codeword, DataWord, DecodeResult, LdpcCode};
pub use templates::{default_min_distance, generate_codeword_templates, generate_templates, TemplateSet};
