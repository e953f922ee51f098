//! Fermionic Gaussian states: correlation and generator matrices,
//! conversions between the Ω and Γ pictures, partition functions, purity,
//! and Wick correlators.
//!
//! Γ is imaginary antisymmetric; it is stored through its real
//! representative G with Γ = i·G, which keeps antisymmetry exact and all
//! in-module arithmetic real. Complex values appear only at correlator
//! boundaries. Majorana indices are 0-based throughout.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skewlin::{self, CanonicalForm, HermitianEigensystem, RealAntisym};
use crate::tolerances::{EPS_PURE, PHYSICALITY_SLACK};

/// Correlation matrix Γ_{jk} = ½Tr(ρ[ω_j, ω_k]) of an n-mode Gaussian
/// state, stored as Γ = i·rep. Eigenvalues of Γ satisfy |γ_k| ≤ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    modes: usize,
    rep: RealAntisym,
}

/// Generator matrix Ω of ρ ∝ exp(−(i/4) ωᵀΩω); finite entries only, so
/// extremal states (|γ_k| = 1) have no generator representative.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    modes: usize,
    rep: RealAntisym,
}

/// Strictly increasing Majorana index tuple of even length, used to
/// address Pfaffian sub-correlators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajoranaIndexTuple {
    indices: Vec<usize>,
}

impl MajoranaIndexTuple {
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        if indices.is_empty() || !indices.len().is_multiple_of(2) {
            return Err(Error::BadIndexTuple);
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::BadIndexTuple);
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::IndexOutOfRange { index: last, dim });
            }
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

impl CorrelationMatrix {
    /// Validates physicality: all Hermitian eigenvalues of Γ within
    /// [−1 − slack, 1 + slack].
    pub fn new(rep: RealAntisym) -> Result<Self> {
        let eig = skewlin::hermitian_eig(&rep)?;
        let max_abs = eig.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_abs > 1.0 + PHYSICALITY_SLACK {
            return Err(Error::Unphysical { gamma_abs: max_abs });
        }
        Ok(Self::from_rep_unchecked(rep))
    }

    /// For internal construction paths that guarantee |γ_k| ≤ 1 (tanh
    /// images, orthogonal conjugations of physical states).
    pub(crate) fn from_rep_unchecked(rep: RealAntisym) -> Self {
        Self {
            modes: rep.dim() / 2,
            rep,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn rep(&self) -> &RealAntisym {
        &self.rep
    }

    /// Γ_{jk} = i·G_{jk}.
    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        Complex64::new(0.0, self.rep.matrix()[(j, k)])
    }

    pub fn canonical(&self) -> Result<CanonicalForm> {
        skewlin::canonical_form(&self.rep)
    }

    pub fn eig(&self) -> Result<HermitianEigensystem> {
        skewlin::hermitian_eig(&self.rep)
    }

    /// Canonical eigenvalues γ_k ≥ 0, sorted descending.
    pub fn gammas(&self) -> Result<Vec<f64>> {
        Ok(self.canonical()?.angles().to_vec())
    }
}

impl GeneratorMatrix {
    pub fn new(rep: RealAntisym) -> Result<Self> {
        // RealAntisym construction already rejects non-finite entries
        Ok(Self {
            modes: rep.dim() / 2,
            rep,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn rep(&self) -> &RealAntisym {
        &self.rep
    }

    pub fn canonical(&self) -> Result<CanonicalForm> {
        skewlin::canonical_form(&self.rep)
    }
}

/// Γ = tanh(iΩ/2); the maximally mixed state comes from Ω = 0.
pub fn gamma_from_omega(w: &GeneratorMatrix) -> Result<CorrelationMatrix> {
    let rep = skewlin::tanh_of_i_halved(w.rep())?;
    Ok(CorrelationMatrix::from_rep_unchecked(rep))
}

/// Ω = 2·artanh blockwise; fails with `ExtremalState` when any
/// |γ_k| > 1 − EPS_PURE, where no finite Ω exists.
pub fn omega_from_gamma(g: &CorrelationMatrix) -> Result<GeneratorMatrix> {
    let cf = g.canonical()?;
    if let Some(&gamma) = cf
        .angles()
        .iter()
        .find(|&&gamma| gamma > 1.0 - EPS_PURE)
    {
        return Err(Error::ExtremalState { gamma_abs: gamma });
    }
    let rep = cf.map_angles(|gamma| 2.0 * gamma.atanh());
    GeneratorMatrix::new(rep)
}

/// Z = ∏_k 2cosh(Ω_k/2); overflows to `PartitionOverflow` once any
/// |Ω_k| ≳ 1400 or the product leaves f64 range.
pub fn partition_function(w: &GeneratorMatrix) -> Result<f64> {
    let z = w
        .canonical()?
        .angles()
        .iter()
        .map(|&wk| 2.0 * (0.5 * wk).cosh())
        .product::<f64>();
    if !z.is_finite() {
        return Err(Error::PartitionOverflow);
    }
    Ok(z)
}

/// log Z = Σ_k log(2cosh(Ω_k/2)), overflow-safe:
/// log(2cosh(x)) = |x| + log1p(e^{−2|x|}).
pub fn log_partition_function(w: &GeneratorMatrix) -> Result<f64> {
    Ok(w.canonical()?
        .angles()
        .iter()
        .map(|&wk| {
            let half = 0.5 * wk.abs();
            half + (-2.0 * half).exp().ln_1p()
        })
        .sum())
}

/// Purity Tr ρ² = √det((1 + Γ²)/2) = ∏_k (1 + γ_k²)/2 ∈ (2^{−n}, 1].
///
/// Computed through the determinant form; (1 + Γ²)/2 = (1 − G²)/2 is
/// symmetric with spectrum in [1/2, 1], so the determinant never
/// degenerates.
pub fn purity(g: &CorrelationMatrix) -> f64 {
    let dim = g.rep().dim();
    let gm = g.rep().matrix();
    let m = (DMatrix::<f64>::identity(dim, dim) - gm * gm) * 0.5;
    m.determinant().sqrt()
}

/// Purity from the canonical angles, ∏_k (1 + γ_k²)/2 — the independent
/// in-module route used to cross-check `purity`.
pub fn purity_from_angles(g: &CorrelationMatrix) -> Result<f64> {
    Ok(g.gammas()?
        .iter()
        .map(|gamma| 0.5 * (1.0 + gamma * gamma))
        .product())
}

/// Four-point correlator Tr(ρ ω_j ω_k ω_l ω_m) = a_{jk}a_{lm} −
/// a_{jl}a_{km} + a_{jm}a_{kl} with a = Γ + 1. Repeated indices are
/// allowed; the δ term handles them.
pub fn wick_four(
    g: &CorrelationMatrix,
    j: usize,
    k: usize,
    l: usize,
    m: usize,
) -> Result<Complex64> {
    let dim = g.rep().dim();
    for &idx in &[j, k, l, m] {
        if idx >= dim {
            return Err(Error::IndexOutOfRange { index: idx, dim });
        }
    }
    let a = |p: usize, q: usize| {
        let delta = if p == q { 1.0 } else { 0.0 };
        Complex64::new(delta, g.rep().matrix()[(p, q)])
    };
    Ok(a(j, k) * a(l, m) - a(j, l) * a(k, m) + a(j, m) * a(k, l))
}

/// 2p-point correlator Tr(ρ ω_{k₁}…ω_{k₂p}) = Pf(Γ_{k₁…k₂p}) for a
/// strictly increasing tuple. The submatrix of Γ = i·G is i·G_sub, so
/// Pf(Γ_sub) = i^p · Pf(G_sub) with a real Pfaffian.
pub fn wick_2p(g: &CorrelationMatrix, idx: &MajoranaIndexTuple) -> Result<Complex64> {
    let dim = g.rep().dim();
    if let Some(&last) = idx.indices().last() {
        if last >= dim {
            return Err(Error::IndexOutOfRange { index: last, dim });
        }
    }
    let p = idx.indices().len() / 2;
    let sub = g.rep().matrix().select_rows(idx.indices()).select_columns(idx.indices());
    let pf = skewlin::pfaffian(&RealAntisym::new(sub)?);
    let phase = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][p % 4];
    Ok(phase * pf)
}

/// JSON wire format for both matrix kinds: `{"modes": n, "rep": [[…]]}`
/// with row-major real entries.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixJson {
    modes: usize,
    rep: Vec<Vec<f64>>,
}

fn rep_to_rows(rep: &RealAntisym) -> Vec<Vec<f64>> {
    let dim = rep.dim();
    (0..dim)
        .map(|i| (0..dim).map(|j| rep.matrix()[(i, j)]).collect())
        .collect()
}

fn rep_from_rows(modes: usize, rows: &[Vec<f64>]) -> Result<RealAntisym> {
    let dim = 2 * modes;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: rows.len(),
        });
    }
    let mat = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    RealAntisym::new(mat)
}

impl Serialize for CorrelationMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            modes: self.modes,
            rep: rep_to_rows(&self.rep),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CorrelationMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(de)?;
        let rep = rep_from_rows(raw.modes, &raw.rep).map_err(serde::de::Error::custom)?;
        CorrelationMatrix::new(rep).map_err(serde::de::Error::custom)
    }
}

impl Serialize for GeneratorMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            modes: self.modes,
            rep: rep_to_rows(&self.rep),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for GeneratorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(de)?;
        let rep = rep_from_rows(raw.modes, &raw.rep).map_err(serde::de::Error::custom)?;
        GeneratorMatrix::new(rep).map_err(serde::de::Error::custom)
    }
}
