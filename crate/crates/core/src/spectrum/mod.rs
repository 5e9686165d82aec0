//! Characteristic determinant, degeneracy detection and argument-principle root search.

mod charfn;
mod search;

pub use charfn::{block_generator, char_det, closed_form_delta0, CharFunction, CharValue, EvalMethod, ExpSum, ExpTerm};
pub use search::{
    auto_window, degeneracy_probe_points, detect_degenerate, find_eigenvalues, refine_from, search_eigenvalues,
    CellRecord, Degeneracy, Eigenvalue, SearchOptions, SpectrumReport, Window,
};
