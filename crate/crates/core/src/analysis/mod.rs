//! Spectra, capacity, interference, detection complexity and layout search.

pub mod capacity;
pub mod complexity;
pub mod search;
pub mod sir;
pub mod spectrum;

pub use capacity::{capacity_curve, water_filling, CapacityCurve, PowerPolicy};
pub use complexity::{complexity_table, Architecture, ComplexityComparison, ComplexityReport};
pub use search::{search_max_streams, LayoutSearchResult, SearchCandidate, SearchSpace};
pub use sir::{stream_sir, SirReport, StreamSir, SIR_CAP_DB};
pub use spectrum::{eigen_spectrum, eigen_spectrum_dense, effective_rank, EigenSpectrum, SpectrumSource, DENSE_SIZE_LIMIT};
