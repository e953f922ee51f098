//! Parameterised families of Gaussian states producing (Γ, {∂Γ_μ})
//! pairs, with analytic derivatives for every family and controlled
//! finite differences as the independent cross-check.
//!
//! Families are pure value-level descriptions: no callbacks, so a family
//! is fully reproducible from its name and fixed arguments.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::CorrelationMatrix;
use crate::skewlin::{self, CanonicalForm, RealAntisym};
use crate::tolerances::FD_STEP;

/// Boundary condition of the Kitaev wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone)]
enum FamilyKind {
    /// n = 1, Γ(λ) the single block with γ = λ.
    SingleMode,
    /// Γ(β) = tanh(iβA/2) for a fixed antisymmetric coefficient matrix A.
    Thermal { canonical: CanonicalForm },
    /// Γ(λ) = O(λ) Γ₀ O(λ)ᵀ with O(λ) = exp(λ₁G₁)···exp(λ_dG_d).
    Rotation {
        base: CorrelationMatrix,
        generators: Vec<RealAntisym>,
        canonicals: Vec<CanonicalForm>,
    },
    /// Kitaev wire composed with the thermal map at fixed β:
    /// Γ = tanh(iβA(μ_chem, t_hop, Δ_pair)/2).
    Kitaev {
        beta: f64,
        components: [RealAntisym; 3],
    },
}

/// A named map from parameter points to correlation matrices with
/// analytic tangents.
#[derive(Debug, Clone)]
pub struct StateFamily {
    name: &'static str,
    modes: usize,
    parameter_names: Vec<String>,
    domain: Vec<(f64, f64)>,
    kind: FamilyKind,
}

const FULL_LINE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

impl StateFamily {
    /// One mode, one parameter: γ = λ on the fixed plane, λ ∈ (−1, 1).
    pub fn single_mode() -> Self {
        Self {
            name: "single_mode",
            modes: 1,
            parameter_names: vec!["lambda".into()],
            domain: vec![(-1.0, 1.0)],
            kind: FamilyKind::SingleMode,
        }
    }

    /// Thermal family Γ(β) = tanh(iβA/2), β ∈ (0, ∞).
    pub fn thermal(coefficient: &RealAntisym) -> Result<Self> {
        let canonical = skewlin::canonical_form(coefficient)?;
        Ok(Self {
            name: "thermal",
            modes: coefficient.dim() / 2,
            parameter_names: vec!["beta".into()],
            domain: vec![(0.0, f64::INFINITY)],
            kind: FamilyKind::Thermal { canonical },
        })
    }

    /// Gaussian-unitary orbit of a base state; one parameter per
    /// generator, exercising noncommuting directions.
    pub fn rotation(base: CorrelationMatrix, generators: Vec<RealAntisym>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::ParameterCount {
                expected: 1,
                got: 0,
            });
        }
        let dim = base.rep().dim();
        for g in &generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: g.dim(),
                    right: dim,
                });
            }
        }
        let canonicals = generators
            .iter()
            .map(skewlin::canonical_form)
            .collect::<Result<Vec<_>>>()?;
        let d = generators.len();
        Ok(Self {
            name: "rotation",
            modes: base.modes(),
            parameter_names: (1..=d).map(|i| format!("theta_{i}")).collect(),
            domain: vec![FULL_LINE; d],
            kind: FamilyKind::Rotation {
                base,
                generators,
                canonicals,
            },
        })
    }

    /// Kitaev wire at inverse temperature β with parameters
    /// (μ_chem, t_hop, Δ_pair).
    ///
    /// Majorana layout: site j carries ω_{2j}, ω_{2j+1}; the coefficient
    /// matrix A of H = (i/4)ωᵀAω (so Ω = βA approaches the ground state
    /// as β → ∞) has
    ///   A[2j, 2j+1]   = −μ_chem           (on-site),
    ///   A[2j, 2j'+1]  = Δ_pair − t_hop    (bond j → j' = j+1),
    ///   A[2j+1, 2j']  = Δ_pair + t_hop,
    /// with j+1 wrapping around for periodic boundaries.
    pub fn kitaev_chain(sites: usize, boundary: Boundary, beta: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::TooFewSites(sites));
        }
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::DomainViolation {
                name: "beta".into(),
                value: beta,
            });
        }
        let dim = 2 * sites;
        let mut a_mu = DMatrix::zeros(dim, dim);
        let mut a_t = DMatrix::zeros(dim, dim);
        let mut a_delta = DMatrix::zeros(dim, dim);
        let add = |m: &mut DMatrix<f64>, i: usize, j: usize, v: f64| {
            m[(i, j)] += v;
            m[(j, i)] -= v;
        };
        for j in 0..sites {
            add(&mut a_mu, 2 * j, 2 * j + 1, -1.0);
        }
        let bonds = match boundary {
            Boundary::Open => sites - 1,
            Boundary::Periodic => sites,
        };
        for j in 0..bonds {
            let next = (j + 1) % sites;
            add(&mut a_t, 2 * j, 2 * next + 1, -1.0);
            add(&mut a_t, 2 * j + 1, 2 * next, 1.0);
            add(&mut a_delta, 2 * j, 2 * next + 1, 1.0);
            add(&mut a_delta, 2 * j + 1, 2 * next, 1.0);
        }
        Ok(Self {
            name: "kitaev_chain",
            modes: sites,
            parameter_names: vec!["mu_chem".into(), "t_hop".into(), "delta_pair".into()],
            domain: vec![FULL_LINE; 3],
            kind: FamilyKind::Kitaev {
                beta,
                components: [
                    RealAntisym::new(a_mu)?,
                    RealAntisym::new(a_t)?,
                    RealAntisym::new(a_delta)?,
                ],
            },
        })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn param_count(&self) -> usize {
        self.parameter_names.len()
    }

    pub fn parameter_names(&self) -> &[String] {
        &self.parameter_names
    }

    /// Open-interval domain box, one (lo, hi) per parameter.
    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// Validates a parameter point against the domain box.
    pub fn contains(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.param_count() {
            return Err(Error::ParameterCount {
                expected: self.param_count(),
                got: point.len(),
            });
        }
        for ((&(lo, hi), &x), name) in self
            .domain
            .iter()
            .zip(point)
            .zip(&self.parameter_names)
        {
            if !x.is_finite() || x <= lo || x >= hi {
                return Err(Error::DomainViolation {
                    name: name.clone(),
                    value: x,
                });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<CorrelationMatrix> {
        self.contains(point)?;
        match &self.kind {
            FamilyKind::SingleMode => Ok(CorrelationMatrix::from_rep_unchecked(
                RealAntisym::from_block_angles(&[point[0]])?,
            )),
            FamilyKind::Thermal { canonical } => {
                let beta = point[0];
                Ok(CorrelationMatrix::from_rep_unchecked(
                    canonical.map_angles(|a| (0.5 * beta * a).tanh()),
                ))
            }
            FamilyKind::Rotation { base, canonicals, .. } => {
                let o = orbit_rotation(canonicals, point, point.len());
                Ok(CorrelationMatrix::from_rep_unchecked(RealAntisym::new(
                    &o * base.rep().matrix() * o.transpose(),
                )?))
            }
            FamilyKind::Kitaev { beta, components } => {
                let a = kitaev_coefficient(components, point)?;
                Ok(CorrelationMatrix::from_rep_unchecked(
                    skewlin::tanh_of_i_halved(&a.scale(*beta))?,
                ))
            }
        }
    }

    /// Analytic tangent ∂Γ/∂λ_μ at the point, as a real representative.
    pub fn analytic_tangent(&self, point: &[f64], mu: usize) -> Result<RealAntisym> {
        self.contains(point)?;
        debug_assert!(mu < self.param_count());
        match &self.kind {
            FamilyKind::SingleMode => RealAntisym::from_block_angles(&[1.0]),
            FamilyKind::Thermal { canonical } => {
                let beta = point[0];
                Ok(canonical.map_angles(|a| {
                    let t = (0.5 * beta * a).tanh();
                    0.5 * a * (1.0 - t * t)
                }))
            }
            FamilyKind::Rotation {
                base,
                generators,
                canonicals,
            } => {
                // ∂_μΓ = [A_μ, Γ(λ)] with A_μ = R_μ G_μ R_μᵀ,
                // R_μ = exp(λ₁G₁)···exp(λ_μG_μ)
                let o = orbit_rotation(canonicals, point, point.len());
                let gamma = &o * base.rep().matrix() * o.transpose();
                let r = orbit_rotation(canonicals, point, mu + 1);
                let a = &r * generators[mu].matrix() * r.transpose();
                RealAntisym::new(&a * &gamma - gamma * a)
            }
            FamilyKind::Kitaev { beta, components } => {
                let a = kitaev_coefficient(components, point)?;
                tangent_of_thermal_map(&a, &components[mu], *beta)
            }
        }
    }

    /// All d analytic tangents at the point.
    pub fn tangents(&self, point: &[f64]) -> Result<Vec<RealAntisym>> {
        (0..self.param_count())
            .map(|mu| self.analytic_tangent(point, mu))
            .collect()
    }
}

/// Product exp(λ₁G₁)···exp(λ_kG_k) of the first `k` orbit factors.
fn orbit_rotation(canonicals: &[CanonicalForm], point: &[f64], k: usize) -> DMatrix<f64> {
    let dim = canonicals
        .first()
        .map(|c| c.rotation().nrows())
        .unwrap_or(0);
    let mut o = DMatrix::identity(dim, dim);
    for (cf, &lambda) in canonicals.iter().zip(point).take(k) {
        o *= cf.rotation_exp(lambda);
    }
    o
}

fn kitaev_coefficient(components: &[RealAntisym; 3], point: &[f64]) -> Result<RealAntisym> {
    components[0]
        .linear_combination(point[0], &components[1], point[1])?
        .linear_combination(1.0, &components[2], point[2])
}

/// Fréchet derivative of A ↦ tanh(iβA/2) along Ȧ, via divided
/// differences of f(x) = tanh(βx/2) in the eigenbasis of iA.
fn tangent_of_thermal_map(a: &RealAntisym, adot: &RealAntisym, beta: f64) -> Result<RealAntisym> {
    let eig = skewlin::hermitian_eig(a)?;
    let vals = eig.values();
    let dim = a.dim();
    let mut mid = eig.vectors().adjoint() * adot.to_hermitian() * eig.vectors();
    for j in 0..dim {
        for k in 0..dim {
            mid[(j, k)] *= Complex64::new(dd_tanh_scaled(vals[j], vals[k], beta), 0.0);
        }
    }
    let dense = eig.vectors() * mid * eig.vectors().adjoint();
    RealAntisym::new(dense.map(|z| z.im))
}

/// Divided difference of tanh(βx/2):
/// (β/2)·sinhc(β(a−b)/2) / (cosh(βa/2)·cosh(βb/2)).
fn dd_tanh_scaled(a: f64, b: f64, beta: f64) -> f64 {
    let half_diff = 0.5 * beta * (a - b);
    let sinhc = if half_diff.abs() < 1e-8 {
        1.0 + half_diff * half_diff / 6.0
    } else {
        half_diff.sinh() / half_diff
    };
    0.5 * beta * sinhc / ((0.5 * beta * a).cosh() * (0.5 * beta * b).cosh())
}

/// Central finite difference of the family along parameter `mu`;
/// with `richardson`, the 4th-order five-point stencil. Output is
/// symmetrised to exact antisymmetry.
pub fn finite_diff(
    family: &StateFamily,
    point: &[f64],
    mu: usize,
    h: f64,
    richardson: bool,
) -> Result<RealAntisym> {
    if mu >= family.param_count() {
        return Err(Error::ParameterCount {
            expected: family.param_count(),
            got: mu,
        });
    }
    let shifted = |s: f64| -> Result<DMatrix<f64>> {
        let mut p = point.to_vec();
        p[mu] += s;
        Ok(family.evaluate(&p)?.rep().matrix().clone())
    };
    let mat = if richardson {
        (-shifted(2.0 * h)? + shifted(h)? * 8.0 - shifted(-h)? * 8.0 + shifted(-2.0 * h)?)
            / (12.0 * h)
    } else {
        (shifted(h)? - shifted(-h)?) / (2.0 * h)
    };
    RealAntisym::new(mat)
}

/// Default finite-difference settings: Richardson stencil at FD_STEP.
pub fn finite_diff_default(
    family: &StateFamily,
    point: &[f64],
    mu: usize,
) -> Result<RealAntisym> {
    finite_diff(family, point, mu, FD_STEP, true)
}
