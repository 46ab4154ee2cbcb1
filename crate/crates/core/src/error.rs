use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid packet configuration: {0}")]
    Config(String),

    #[error("subcarrier {k} out of range 0..{n}")]
    Subcarrier { k: usize, n: usize },

    #[error("symbol slot {l} out of range 1..={max}")]
    Slot { l: usize, max: usize },

    #[error("data matrix is {rows}x{cols}, expected {want_rows}x{want_cols}")]
    Dimension { rows: usize, cols: usize, want_rows: usize, want_cols: usize },

    #[error("frequency offset {0} outside (-0.5, 0.5)")]
    FrequencyOffset(f64),

    #[error("prototype design for overlap factor {0}: {1}")]
    Design(usize, String),

    #[error("prototype impulse response has imaginary residue {0:e}; coefficients are not even-symmetric")]
    ImaginaryResidue(f64),

    #[error("coefficient table has {got} entries, expected {want}")]
    Coefficients { got: usize, want: usize },

    #[error("receiver window does not fold to one (max deviation {0:e})")]
    FoldToOne(f64),

    #[error("receiver roll-off {rolloff} exceeds half the packet body ({half})")]
    RxRolloff { rolloff: usize, half: usize },

    #[error("band selects no grid points")]
    EmptyBand,
}
