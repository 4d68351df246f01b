//! Discrete laboratory for a lacunary maximal partial-sum operator on the
//! Walsh group: exact transforms and phase-plane geometry, the model sums
//! that realize the operator tile by tile, decomposition machinery with
//! quantitative constants, and the norm scales the endpoint bounds live on.

pub mod cake;
pub mod carleson;
pub mod decomp;
pub mod error;
pub mod norms;
pub mod plane;
pub mod signal;
pub mod walsh;

pub use cake::{
    band_index, embedding_decomposition, quasinorm_bound, unit_ball_cake, EmbeddingBand, Layer,
    LayerCake, QuasinormReport, TowerValue,
};
pub use carleson::{
    greedy_choice, lacunary_bitiles, maximal_operator, model_sum, tile_sum_partial,
    ChoiceFunction, LacunarySequence, TILE_SUM_CUTOFF_IS_EXCLUSIVE,
};
pub use decomp::{
    bitile_size, exceptional_set, john_nirenberg_probe, multifreq_projection,
    repartition_bounded_crown, set_size, size_decomposition, tree_operator, tree_projection,
    tree_tail_profile, ExceptionalReport, JnRow, MultifreqProjection, SizeDecomposition,
    SizeLevel,
};
pub use error::{CoreError, Result};
pub use norms::{
    dyadic_bmo, local_lp, local_orlicz_norm, local_orlicz_norm_with, log_tower,
    log_tower_from_log, lp_norm, maximal_mp, tail_fraction, tower_exp, weak_lp, young_phi,
    YoungFunction,
};
pub use plane::{
    counting_function, crown, crown_function, downset, enumerate_bitiles, feff_leq,
    forest_from_records, forest_records, is_convex, maximal_dyadic_cover, set_from_records,
    bitile_records, Bitile, BitileRecord, DyadicInterval, Forest, ForestRecord, IntervalKind,
    PhaseRect, Tile, Tree,
};
pub use num_complex::Complex64;
pub use signal::GridSignal;
pub use walsh::{
    bit_reverse, partial_sum, partial_sum_below, rademacher, signal_from_coefficients,
    walsh_coefficients, walsh_function, wave_packet, PacketOnGrid,
};
