//! Slow-entropy analysis of quasi-unipotent flows, from exact matrix input to
//! empirical verification.
//!
//! The pipeline: a rational matrix Lie-algebra basis and a distinguished
//! element `U` go in; the adjoint operator `ad_U` is split into its semisimple
//! and nilpotent parts; a chain basis (real Jordan data: nilpotent chains plus
//! rotating double chains) is extracted; and the polynomial slow-entropy
//! invariant `R` and sequence entropies come out in closed form. Independent
//! routes to the same invariant — sl(2)-triple weight data and direct
//! combinatorial formulas — serve as cross-checks, and a simulation layer
//! measures Bowen-ball volume decay and Hamming covering growth to confirm the
//! predicted exponents numerically.

pub mod chains;
pub mod closed_forms;
pub mod dynamics;
pub mod elim;
pub mod fit;
pub mod fpoly;
pub mod linalg;
pub mod qpoly;
pub mod rng;
pub mod sl2;
pub mod spectral;
pub mod torus;
pub mod zoo;

pub use chains::{
    analyze, chain_basis, chain_structure, is_quasi_unipotent, sequence_entropy, slow_entropy,
    Chain, ChainBasis, ChainError, ChainSpec, ChainStructure, DoubleChain, EntropyMethod,
    EntropyReport, QuasiUnipotentCheck, DEFAULT_TOL,
};
pub use closed_forms::{
    r_block_sequence, r_nilpotent_example, r_principal, r_twisted, r_twisted_sym_power,
    BlockSequence, ClosedFormError, JordanLengths,
};
pub use dynamics::{
    adapted_box, check_brudnyi, evolve, evolve_matrix_check, mc_bowen_volume, norm_equiv_constant,
    orbit_sup, predicted_exponents, sequence_bowen_volume, shearing_visit_fraction, AdaptedBox,
    BowenPoint, DivergenceState, DoubleState, DynError, McConfig, NormEquiv, SequencePoint,
    SupMode,
};
pub use fit::{fit_line, FitError, SlopeFit};
pub use fpoly::FPoly;
pub use linalg::{
    ad_operator, bracket, exp_nilpotent, jordan_chevalley, nilpotency_index, rat, ratq,
    LinalgError, RatMatrix, Rational,
};
pub use qpoly::{char_poly, QPoly};
pub use rng::StreamRng;
pub use sl2::{
    block_triple, centralizer, entropy_via_triple, jacobson_morozov, principal_triple,
    CentralizerSpectrum, Sl2Error, Sl2Triple,
};
pub use torus::{
    empirical_slow_entropy, hamming, mean_ball_mass, orbit_code, spanning_count, CodingConfig,
    EntropyPoint, SpanningCount, TorusError, TorusOrbitCoding,
};
pub use zoo::{
    block_nilpotent, heisenberg_type, principal_nilpotent, sl_basis, sym_power_rep,
    synthetic_from_structure, twisted_algebra, AlgebraWithFlow, ZooError,
};
