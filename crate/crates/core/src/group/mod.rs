//! Self-similar group specifications, their congruence quotients, pattern
//! sets of finite type and finite-level branch evidence.

mod branch;
mod ggs;
mod patterns;
mod quotient;
mod spec;
mod word;

pub use branch::{
    detect_depth, fractality_evidence, rigid_stabilizer_index, verify_regular_branch,
    BranchReport, DepthEvidence, FractalityReport,
};
pub use ggs::{circulant_rank, is_symmetric};
pub use patterns::{count_pattern_closed, extract_pattern_set, PatternSet, DEFAULT_STATE_CAP};
pub use quotient::{
    level_quotient, quotient_generators, vertex_domain_size, PortraitIter, Quotient, Tower,
    DEFAULT_ENUM_CAP,
};
pub use spec::{
    cyclic_group, ggs_spec, grigorchuk_spec, symmetric_group, wreath_spec, GgsParams, Generator,
    GroupSpec, SpecKind,
};
pub use word::Word;
