//! Level structures, multilevel sampling and subsampled measurement
//! operators together with coherence and budget calculations.

mod budgets;
mod coherence;
mod levels;
mod measurement;
mod patterns;
mod sampling;
mod sparsifier;

pub use budgets::{fourier_budgets, walsh_budgets, BudgetParams};
pub use coherence::{coherence_to_csv, local_coherence, CoherenceTable};
pub use levels::{default_weights, dyadic_bounds, level_ranges_of, LevelStructure};
pub use measurement::{fourier_bin, fourier_frequency, MeasurementOperator, Transform};
pub use patterns::{count_vanishing_level_patterns, vanishing_level_patterns};
pub use sampling::{draw_multilevel_scheme, DrawMode, SamplingScheme};
pub use sparsifier::Sparsifier;
