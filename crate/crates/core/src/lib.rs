pub mod bits;
pub mod channel;
pub mod codec;
pub mod detection;
pub mod error;
pub mod io;
pub mod rng;
pub mod tamper;
pub mod watermark;
