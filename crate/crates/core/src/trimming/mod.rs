//! Trimming sequences, thresholds and the streaming sum ledger.

pub mod ledger;
pub mod psi;
pub mod sequences;

pub use ledger::{truncated_sum, SumLedger};
pub use psi::{omega_max, omega_min, PsiClass, PsiExpr, PsiSpec};
pub use sequences::{
    b_asymptote, b_of_n, b_plus, eps_threshold, floor_ln, floor_log2, omega_contract, thresholds, OmegaReport,
    OmegaVariant, Thresholds,
};
