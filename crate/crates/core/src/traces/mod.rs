//! Heat and wave traces of the quotient, the local trace of `H3`, and
//! extraction of the length spectrum from trace data.

pub mod heat;
pub mod lengths;
pub mod local;
pub mod wave;

pub use heat::{
    heat_trace_closed, heat_trace_direct, heat_trace_double_sum, verify_fourier_pair, TraceSample,
};
pub use lengths::{detect_peaks, extract_lengths_heat, LengthSpectrum};
pub use local::{local_h3_trace, regularized_fourier_u3};
pub use wave::{wave_trace_mollified, Mollifier};
