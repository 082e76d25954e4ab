//! Transfer-operator identities, cylinder-event measures, mixing coefficients
//! and second-moment bounds.

pub mod alpha;
pub mod cylinder;
pub mod moments;
pub mod transfer;

pub use alpha::{alpha_bound_holds, alpha_coefficient, block_atoms, signed_mass_table, sup_over_unions, ALPHA_ATOM_CAP};
pub use cylinder::{
    digit_event, induced_transfer, joint_measure_tau, joint_measure_tau_b, joint_measure_tau_b_unchecked,
    CylinderEvent, DigitCondition, InducedEvent,
};
pub use moments::{bernstein_bound, bernstein_simple, second_moment_tn, MAX_EXACT_LAG};
pub use transfer::{
    correlation, correlation_bound, correlation_transfer, duality_check, transfer_apply, transfer_iterates,
    transfer_pow, variation_decay_check, OperatorTrace,
};
