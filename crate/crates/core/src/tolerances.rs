//! Central numerical tolerances. Single source of truth for every
//! threshold the library applies; tests assert against these names.

/// Orthogonality defect allowed on rotation matrices, `‖QQᵀ − I‖_max`.
pub const TOL_ORTH: f64 = 1e-10;

/// Canonical-form reconstruction tolerance, relative: scaled by `1 + ‖A‖_F`.
pub const TOL_RECON: f64 = 1e-10;

/// Pairing tolerance for the ± symmetry of skew spectra.
pub const TOL_PAIR: f64 = 1e-10;

/// Slack on the physicality bound |gamma_k| ≤ 1; eigensolver noise must
/// not reject valid states.
pub const PHYSICALITY_SLACK: f64 = 1e-12;

/// Extremal-state guard for the inverse map Γ → Ω: 2·artanh overflows in
/// double precision once |gamma| > 1 − EPS_PURE.
pub const EPS_PURE: f64 = 1e-12;

/// Singular-pair cutoff |gamma_j·gamma_k − 1| below which the Lyapunov
/// denominator counts as vanishing.
pub const EPS_SING: f64 = 1e-10;

/// Relative cutoff (× ‖Γ̇‖_F) separating removable singularities from
/// tangents that genuinely leave the physical manifold.
pub const EPS_TANGENT_REL: f64 = 1e-8;

/// Dense-oracle SLD kernel cutoff on eigenvalue sums p_a + p_b.
pub const EPS_KERNEL: f64 = 1e-12;

/// Magnitude of a zeroed dense-SLD entry beyond which the tangent is
/// rejected as leaving the support.
pub const KERNEL_TANGENT_ABS: f64 = 1e-8;

/// Probability cutoff for classical Fisher information sums.
pub const EPS_PROB: f64 = 1e-14;

/// QFIM invertibility cutoff, relative: min eigenvalue must exceed
/// EPS_INV_REL · ‖J‖_max.
pub const EPS_INV_REL: f64 = 1e-12;

/// Default central-difference step for family derivatives.
pub const FD_STEP: f64 = 1e-4;

/// Analytic-vs-finite-difference agreement, scaled by 1 + ‖Γ̇‖_F.
pub const FD_TOL_REL: f64 = 1e-7;

/// Angles below KERNEL_SNAP_REL · (1 + ‖A‖_F) are treated as exact zeros
/// when assembling canonical planes.
pub const KERNEL_SNAP_REL: f64 = 1e-12;
