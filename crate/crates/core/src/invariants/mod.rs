//! Exact logarithmic arithmetic and the numeric invariants of self-similar
//! groups.

mod hausdorff;
mod logq;
mod sequences;

pub use hausdorff::{hausdorff_dimension, Ambient, DimensionValue, HausdorffReport};
pub use logq::{
    factor_biguint, factor_u64, parse_rational, rational_to_string, DisplayBase, LogQuantity,
};
pub use sequences::{
    big_f_formula, f_invariant, log_full_automorphisms, order_law_defects, r_sequence,
    s_sequence, shannon_entropy, verify_branch_order_condition, FInvariant, FStatus,
    OrderConditionLevel, OrderConditionReport,
};
