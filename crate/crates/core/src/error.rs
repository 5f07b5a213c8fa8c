use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequency index {index} outside grid range ±{max_index}")]
    Range { index: i64, max_index: i64 },

    #[error("spectra live on different frequency grids")]
    IncompatibleGrid,

    #[error("{samples_per_period} samples per period cannot represent index {max_index} (need > {})", 2 * max_index)]
    Aliasing { samples_per_period: usize, max_index: i64 },

    #[error("waveform is not coherently sampled on the grid: {0}")]
    Leakage(String),

    #[error("degenerate frequency plan: k2 = 2*k1 ({k1}, {k2}) leaves the lower IM3 term at DC")]
    DegenerateFrequencyPlan { k1: i64, k2: i64 },

    #[error("frequency line {0} is absent from every antenna")]
    LineAbsent(i64),

    #[error("{0} is undefined")]
    Undefined(&'static str),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
