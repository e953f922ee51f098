//! Closed-form symmetric logarithmic derivative from (Γ, Γ̇), plus the
//! quantum Fisher information matrix, mean Uhlmann curvature,
//! compatibility check, and scalar Cramér–Rao bounds.
//!
//! The SLD of a Gaussian state is quadratic, L = ½ωᵀKω + η with K
//! Hermitian antisymmetric and no linear term. K solves the discrete
//! Lyapunov equation Γ̇ = ΓKΓ − K, which in Γ's eigenbasis reads
//! K̄_{jk} = (V†Γ̇V)_{jk}/(γ_jγ_k − 1). Pairs with γ_jγ_k ≈ 1 are at most
//! removable singularities of the QFIM and are zeroed under the default
//! policy.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{self, CorrelationMatrix};
use crate::skewlin::{HermitianEigensystem, RealAntisym};
use crate::tolerances::{EPS_INV_REL, EPS_SING, EPS_TANGENT_REL};

/// What to do with matrix entries whose Lyapunov denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularPolicy {
    /// Zero the entry (continuous extension from full-rank states) and
    /// count it; still errors when the entry carries non-removable weight.
    Zero,
    /// Raise `SingularPair` on any vanishing denominator.
    Strict,
}

/// Quadratic SLD coefficients for one parameter direction:
/// L = ½ωᵀ(i·krep)ω + eta.
#[derive(Debug, Clone, PartialEq)]
pub struct SldQuadratic {
    modes: usize,
    krep: RealAntisym,
    eta: f64,
    singular_pairs: usize,
}

impl SldQuadratic {
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Real antisymmetric representative of K = i·krep.
    pub fn krep(&self) -> &RealAntisym {
        &self.krep
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Number of eigenbasis entries zeroed by the singular-pair policy.
    pub fn singular_pairs(&self) -> usize {
        self.singular_pairs
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SldJson {
    modes: usize,
    k_rep: Vec<Vec<f64>>,
    eta: f64,
    singular_pairs: usize,
}

impl Serialize for SldQuadratic {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.krep.dim();
        SldJson {
            modes: self.modes,
            k_rep: (0..dim)
                .map(|i| (0..dim).map(|j| self.krep.matrix()[(i, j)]).collect())
                .collect(),
            eta: self.eta,
            singular_pairs: self.singular_pairs,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SldQuadratic {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = SldJson::deserialize(de)?;
        let dim = 2 * raw.modes;
        if raw.k_rep.len() != dim || raw.k_rep.iter().any(|r| r.len() != dim) {
            return Err(serde::de::Error::custom("k_rep shape mismatch"));
        }
        let mat = DMatrix::from_fn(dim, dim, |i, j| raw.k_rep[i][j]);
        let krep = RealAntisym::new(mat).map_err(serde::de::Error::custom)?;
        Ok(Self {
            modes: raw.modes,
            krep,
            eta: raw.eta,
            singular_pairs: raw.singular_pairs,
        })
    }
}

/// QFIM J, mean Uhlmann curvature U, and per-parameter SLDs at one
/// parameter point.
#[derive(Debug, Clone)]
pub struct QfimResult {
    j: DMatrix<f64>,
    u: DMatrix<f64>,
    slds: Vec<SldQuadratic>,
    max_residual: f64,
}

impl QfimResult {
    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn j_matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn u_matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn slds(&self) -> &[SldQuadratic] {
        &self.slds
    }

    /// Total singular-pair count across parameter directions.
    pub fn singular_pairs(&self) -> usize {
        self.slds.iter().map(|s| s.singular_pairs).sum()
    }

    /// Largest masked Lyapunov residual across parameter directions.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }
}

impl Serialize for QfimResult {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let d = self.dim();
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect()
        };
        let mut st = ser.serialize_struct("QfimResult", 4)?;
        st.serialize_field("j", &rows(&self.j))?;
        st.serialize_field("u", &rows(&self.u))?;
        st.serialize_field("singular_pairs", &self.singular_pairs())?;
        st.serialize_field("max_residual", &self.max_residual)?;
        st.end()
    }
}

/// Eigenbasis data shared by the per-direction solves at one state.
struct GammaEigen {
    eig: HermitianEigensystem,
    gammas: Vec<f64>,
}

impl GammaEigen {
    fn new(g: &CorrelationMatrix) -> Result<Self> {
        let eig = g.eig()?;
        let gammas = eig.values().to_vec();
        Ok(Self { eig, gammas })
    }

    /// M = V† Γ̇ V with Γ̇ = i·Ġ.
    fn tangent_in_basis(&self, gdot: &RealAntisym) -> DMatrix<Complex64> {
        self.eig.vectors().adjoint() * gdot.to_hermitian() * self.eig.vectors()
    }

    /// Solves for K̄ with the singular-pair policy applied; returns the
    /// eigenbasis matrix and the count of zeroed entries.
    fn solve_kbar(
        &self,
        gdot: &RealAntisym,
        policy: SingularPolicy,
    ) -> Result<(DMatrix<Complex64>, usize)> {
        let dim = self.gammas.len();
        let eps_tangent = EPS_TANGENT_REL * gdot.frobenius_norm();
        let mut kbar = self.tangent_in_basis(gdot);
        let mut zeroed = 0usize;
        for j in 0..dim {
            for k in 0..dim {
                let denom = self.gammas[j] * self.gammas[k] - 1.0;
                if denom.abs() < EPS_SING {
                    let magnitude = kbar[(j, k)].norm();
                    if policy == SingularPolicy::Strict || magnitude > eps_tangent {
                        return Err(Error::SingularPair { j, k, magnitude });
                    }
                    kbar[(j, k)] = Complex64::new(0.0, 0.0);
                    zeroed += 1;
                } else {
                    kbar[(j, k)] /= Complex64::new(denom, 0.0);
                }
            }
        }
        Ok((kbar, zeroed))
    }

    fn back_transform(&self, kbar: &DMatrix<Complex64>) -> Result<RealAntisym> {
        let dense = self.eig.vectors() * kbar * self.eig.vectors().adjoint();
        // K is i·(real antisymmetric); the imaginary part is the
        // representative, real-part noise is discarded
        RealAntisym::new(dense.map(|z| z.im))
    }

    /// ‖Γ̇ − (ΓKΓ − K)‖_F restricted to non-singular entry pairs.
    fn masked_residual(&self, gdot: &RealAntisym, s: &SldQuadratic) -> f64 {
        let dim = self.gammas.len();
        let m = self.tangent_in_basis(gdot);
        let kbar = self.eig.vectors().adjoint()
            * s.krep.to_hermitian()
            * self.eig.vectors();
        let mut acc = 0.0;
        for j in 0..dim {
            for k in 0..dim {
                let denom = self.gammas[j] * self.gammas[k] - 1.0;
                if denom.abs() < EPS_SING {
                    continue;
                }
                let r = m[(j, k)] - kbar[(j, k)] * Complex64::new(denom, 0.0);
                acc += r.norm_sqr();
            }
        }
        acc.sqrt()
    }
}

fn build_sld(
    g: &CorrelationMatrix,
    eigen: &GammaEigen,
    gdot: &RealAntisym,
    policy: SingularPolicy,
) -> Result<(SldQuadratic, DMatrix<Complex64>)> {
    if gdot.dim() != g.rep().dim() {
        return Err(Error::DimensionMismatch {
            left: gdot.dim(),
            right: g.rep().dim(),
        });
    }
    let (kbar, zeroed) = eigen.solve_kbar(gdot, policy)?;
    let krep = eigen.back_transform(&kbar)?;
    // η = ½Tr(KΓ) = −½Tr(krep · G)
    let eta = -0.5 * (krep.matrix() * g.rep().matrix()).trace();
    Ok((
        SldQuadratic {
            modes: g.modes(),
            krep,
            eta,
            singular_pairs: zeroed,
        },
        kbar,
    ))
}

/// Solves the Lyapunov equation Γ̇ = ΓKΓ − K for one tangent direction
/// and fixes η from the trace-preserving condition.
pub fn solve_k(
    g: &CorrelationMatrix,
    gdot: &RealAntisym,
    policy: SingularPolicy,
) -> Result<SldQuadratic> {
    let eigen = GammaEigen::new(g)?;
    Ok(build_sld(g, &eigen, gdot, policy)?.0)
}

/// Frobenius residual of the Lyapunov equation on the non-singular
/// subspace; a freshly solved SLD satisfies ≤ 1e-10·(1 + ‖Γ̇‖_F).
pub fn assemble_residual(
    g: &CorrelationMatrix,
    gdot: &RealAntisym,
    s: &SldQuadratic,
) -> Result<f64> {
    let eigen = GammaEigen::new(g)?;
    Ok(eigen.masked_residual(gdot, s))
}

/// QFIM and mean Uhlmann curvature over d parameter directions, via the
/// eigenbasis closed form
/// J_{μν} = ½Σ_{jk} K̄^μ_{jk} K̄^ν_{kj} (1 − γ_jγ_k),
/// U_{μν} = −(i/4)Σ_{jk} K̄^μ_{jk} K̄^ν_{kj} (γ_k − γ_j).
pub fn qfim(
    g: &CorrelationMatrix,
    tangents: &[RealAntisym],
    policy: SingularPolicy,
) -> Result<QfimResult> {
    let d = tangents.len();
    let eigen = GammaEigen::new(g)?;
    let mut slds = Vec::with_capacity(d);
    let mut kbars = Vec::with_capacity(d);
    for gdot in tangents {
        let (s, kbar) = build_sld(g, &eigen, gdot, policy)?;
        slds.push(s);
        kbars.push(kbar);
    }
    let dim = eigen.gammas.len();
    let mut j = DMatrix::zeros(d, d);
    let mut u = DMatrix::zeros(d, d);
    for mu in 0..d {
        for nu in mu..d {
            let mut j_acc = Complex64::new(0.0, 0.0);
            let mut u_acc = Complex64::new(0.0, 0.0);
            for a in 0..dim {
                for b in 0..dim {
                    let pair = kbars[mu][(a, b)] * kbars[nu][(b, a)];
                    j_acc += pair * Complex64::new(1.0 - eigen.gammas[a] * eigen.gammas[b], 0.0);
                    u_acc += pair * Complex64::new(eigen.gammas[b] - eigen.gammas[a], 0.0);
                }
            }
            j[(mu, nu)] = 0.5 * j_acc.re;
            j[(nu, mu)] = j[(mu, nu)];
            u[(mu, nu)] = (Complex64::new(0.0, -0.25) * u_acc).re;
            u[(nu, mu)] = -u[(mu, nu)];
        }
    }
    let max_residual = slds
        .iter()
        .zip(tangents)
        .map(|(s, gdot)| eigen.masked_residual(gdot, s))
        .fold(0.0f64, f64::max);
    Ok(QfimResult {
        j,
        u,
        slds,
        max_residual,
    })
}

/// Mean Uhlmann curvature only; U ≡ \[\[0\]\] for a single parameter.
pub fn uhlmann_curvature(
    g: &CorrelationMatrix,
    tangents: &[RealAntisym],
    policy: SingularPolicy,
) -> Result<DMatrix<f64>> {
    Ok(qfim(g, tangents, policy)?.u)
}

/// Reference evaluation of (J, U) through the literal Wick four-point
/// expansion of ½Tr ρ{L_μ, L_ν} and −(i/4)Tr ρ[L_μ, L_ν] — O(dim⁴) per
/// entry. Kept permanently as the testing path for the eigenbasis
/// closed form.
pub fn qfim_wick(
    g: &CorrelationMatrix,
    slds: &[SldQuadratic],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = slds.len();
    let dim = g.rep().dim();
    let k_of = |s: &SldQuadratic, a: usize, b: usize| -> Complex64 {
        Complex64::new(0.0, s.krep.matrix()[(a, b)])
    };
    // Tr(ρ L_μ L_ν) assembled term by term
    let mut t = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for mu in 0..d {
        for nu in 0..d {
            let mut quartic = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                for k in 0..dim {
                    if slds[mu].krep.matrix()[(j, k)] == 0.0 {
                        continue;
                    }
                    let kmu = k_of(&slds[mu], j, k);
                    for l in 0..dim {
                        for m in 0..dim {
                            if slds[nu].krep.matrix()[(l, m)] == 0.0 {
                                continue;
                            }
                            quartic += kmu
                                * k_of(&slds[nu], l, m)
                                * gaussian::wick_four(g, j, k, l, m)?;
                        }
                    }
                }
            }
            let mut s_mu = Complex64::new(0.0, 0.0);
            let mut s_nu = Complex64::new(0.0, 0.0);
            for a in 0..dim {
                for b in 0..dim {
                    let two_pt = g.entry(a, b)
                        + if a == b {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                    s_mu += k_of(&slds[mu], a, b) * two_pt;
                    s_nu += k_of(&slds[nu], a, b) * two_pt;
                }
            }
            t[(mu, nu)] = quartic * Complex64::new(0.25, 0.0)
                + s_mu * Complex64::new(0.5 * slds[nu].eta, 0.0)
                + s_nu * Complex64::new(0.5 * slds[mu].eta, 0.0)
                + Complex64::new(slds[mu].eta * slds[nu].eta, 0.0);
        }
    }
    let mut j = DMatrix::zeros(d, d);
    let mut u = DMatrix::zeros(d, d);
    for mu in 0..d {
        for nu in 0..d {
            j[(mu, nu)] = 0.5 * (t[(mu, nu)] + t[(nu, mu)]).re;
            u[(mu, nu)] = (Complex64::new(0.0, -0.25) * (t[(mu, nu)] - t[(nu, mu)])).re;
        }
    }
    Ok((j, u))
}

/// Compatibility verdict: the multiparameter bound is saturable iff the
/// mean Uhlmann curvature vanishes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub max_abs_u: f64,
    /// Offending (μ, ν) pair when incompatible.
    pub worst_pair: Option<(usize, usize)>,
}

/// True iff max |U_{μν}| ≤ tol·(1 + ‖J‖_max).
pub fn compatibility_check(result: &QfimResult, tol: f64) -> CompatibilityReport {
    let d = result.dim();
    let mut max_abs_u = 0.0f64;
    let mut worst = None;
    for mu in 0..d {
        for nu in (mu + 1)..d {
            let v = result.u[(mu, nu)].abs();
            if v > max_abs_u {
                max_abs_u = v;
                worst = Some((mu, nu));
            }
        }
    }
    let j_max = result.j.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let compatible = max_abs_u <= tol * (1.0 + j_max);
    CompatibilityReport {
        compatible,
        max_abs_u,
        worst_pair: if compatible { None } else { worst },
    }
}

/// Scalar Cramér–Rao bound tr(W·J⁻¹) for a symmetric positive-definite
/// cost matrix W.
pub fn cr_bound_scalar(result: &QfimResult, w: &DMatrix<f64>) -> Result<f64> {
    let d = result.dim();
    if w.nrows() != d || w.ncols() != d {
        return Err(Error::DimensionMismatch {
            left: w.nrows(),
            right: d,
        });
    }
    let w_scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if (w - w.transpose()).iter().any(|x| x.abs() > 1e-12 * (1.0 + w_scale)) {
        return Err(Error::NonPdCost);
    }
    let w_eig = w.clone().symmetric_eigen();
    if w_eig.eigenvalues.iter().any(|&e| e <= 0.0) {
        return Err(Error::NonPdCost);
    }
    let j_eig = result.j.clone().symmetric_eigen();
    let j_max = result.j.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let min_eig = j_eig.eigenvalues.min();
    if min_eig <= EPS_INV_REL * j_max {
        return Err(Error::SingularQfim { min_eig });
    }
    let inv_diag = DMatrix::from_diagonal(&j_eig.eigenvalues.map(|e| 1.0 / e));
    let j_inv = &j_eig.eigenvectors * inv_diag * j_eig.eigenvectors.transpose();
    Ok((w * j_inv).trace())
}
