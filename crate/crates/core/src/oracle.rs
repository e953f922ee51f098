//! Dense Fock-space brute force for small mode counts: explicit Majorana
//! matrices, dense ρ, spectral SLD, dense QFI/curvature, and measurement
//! Fisher information. Ground truth for every closed-form path.
//!
//! Three independent state constructions are provided: the eigenmode
//! product form, the matrix exponential of the quadratic generator, and
//! the Pfaffian operator expansion. Exact tangents ∂ρ come from the
//! expansion (any physical state, n ≤ 5) or from differentiating the
//! exponential form (full-rank states, any n ≤ `N_MAX`).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::{CorrelationMatrix, GeneratorMatrix};
use crate::skewlin::{self, RealAntisym};
use crate::tolerances::{EPS_KERNEL, EPS_PROB, EPS_PURE, KERNEL_TANGENT_ABS};

/// 2^n × 2^n complex matrix on the Fock space.
pub type DenseOperator = DMatrix<Complex64>;

/// Mode-count ceiling: dim 64 keeps every oracle call fast.
pub const N_MAX: usize = 6;

/// Expansion-based constructions cache all 4^n subset operators; capped
/// lower to bound memory.
pub const N_MAX_EXPANSION: usize = 5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn pauli_x() -> DenseOperator {
    DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

fn pauli_y() -> DenseOperator {
    DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

fn pauli_z() -> DenseOperator {
    DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Jordan–Wigner Majorana matrices: mode j occupies tensor slot j with
/// Z-strings to the left; ω_{2j} carries X, ω_{2j+1} carries Y on slot j.
/// Entries are exact elements of {0, ±1, ±i}.
pub fn majorana_matrices(n: usize) -> Result<Vec<DenseOperator>> {
    if n == 0 || n > N_MAX {
        return Err(Error::ModeCount { n, max: N_MAX });
    }
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let mut ops = Vec::with_capacity(2 * n);
    for j in 0..n {
        for local in [&x, &y] {
            let mut m = DMatrix::identity(1, 1);
            for slot in 0..n {
                let factor = if slot < j {
                    &z
                } else if slot == j {
                    local
                } else {
                    // identity slot
                    &DMatrix::identity(2, 2)
                };
                m = m.kronecker(factor);
            }
            ops.push(m);
        }
    }
    Ok(ops)
}

fn fock_dim(ops: &[DenseOperator]) -> usize {
    ops[0].nrows()
}

/// Eigenvectors (columns) and real eigenvalues of a dense Hermitian
/// operator, e.g. ρ or an SLD whose eigenbasis is the optimal measurement.
pub fn hermitian_eigen(m: &DenseOperator) -> Result<(DenseOperator, DVector<f64>)> {
    let dim = m.nrows();
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 200 * dim.max(8))
        .ok_or(Error::EigenFailure)?;
    Ok((eig.eigenvectors, eig.eigenvalues))
}

/// Eigenmode product form ρ = ∏_k (1 − i γ_k z_{2k} z_{2k+1})/2 with
/// z = Qω from the canonical form of Γ. Valid for every physical Γ,
/// including extremal states.
pub fn dense_state(g: &CorrelationMatrix, ops: &[DenseOperator]) -> Result<DenseOperator> {
    if ops.len() != 2 * g.modes() {
        return Err(Error::DimensionMismatch {
            left: ops.len(),
            right: 2 * g.modes(),
        });
    }
    let cf = g.canonical()?;
    let dim = fock_dim(ops);
    let q = cf.rotation();
    let eigenmode = |a: usize| -> DenseOperator {
        let mut m = DMatrix::zeros(dim, dim);
        for (b, op) in ops.iter().enumerate() {
            m += op * Complex64::new(q[(a, b)], 0.0);
        }
        m
    };
    let mut rho: DenseOperator = DMatrix::identity(dim, dim);
    for (k, &gamma) in cf.angles().iter().enumerate() {
        let z1 = eigenmode(2 * k);
        let z2 = eigenmode(2 * k + 1);
        let factor = (DMatrix::identity(dim, dim)
            - z1 * z2 * (I * Complex64::new(gamma, 0.0)))
            * Complex64::new(0.5, 0.0);
        rho *= factor;
    }
    Ok(rho)
}

/// The quadratic generator D = −(i/4) ωᵀ A ω as a dense operator.
fn dense_quadratic_generator(a: &RealAntisym, ops: &[DenseOperator]) -> DenseOperator {
    let dim = fock_dim(ops);
    let mut d = DMatrix::zeros(dim, dim);
    let m = a.matrix();
    for j in 0..a.dim() {
        for k in (j + 1)..a.dim() {
            if m[(j, k)] != 0.0 {
                d += &ops[j] * &ops[k] * (-I * Complex64::new(0.5 * m[(j, k)], 0.0));
            }
        }
    }
    d
}

/// Dense quadratic observable ½ ωᵀ(i·krep)ω + η, e.g. the SLD assembled
/// from its closed-form coefficients.
pub fn dense_quadratic(krep: &RealAntisym, eta: f64, ops: &[DenseOperator]) -> DenseOperator {
    let dim = fock_dim(ops);
    let mut l = DMatrix::identity(dim, dim) * Complex64::new(eta, 0.0);
    let m = krep.matrix();
    for j in 0..krep.dim() {
        for k in (j + 1)..krep.dim() {
            if m[(j, k)] != 0.0 {
                l += &ops[j] * &ops[k] * (I * Complex64::new(m[(j, k)], 0.0));
            }
        }
    }
    l
}

/// ρ = exp(−(i/4) ωᵀΩω)/Z via Hermitian eigendecomposition of the
/// exponent. Returns the normalised state and the partition trace Z.
pub fn dense_state_exp(
    w: &GeneratorMatrix,
    ops: &[DenseOperator],
) -> Result<(DenseOperator, f64)> {
    if ops.len() != 2 * w.modes() {
        return Err(Error::DimensionMismatch {
            left: ops.len(),
            right: 2 * w.modes(),
        });
    }
    let d = dense_quadratic_generator(w.rep(), ops);
    let (v, vals) = hermitian_eigen(&d)?;
    let shift = vals.max();
    let weights = vals.map(|x| (x - shift).exp());
    let z_shifted: f64 = weights.iter().sum();
    let diag = DMatrix::from_diagonal(&weights.map(|x| Complex64::new(x / z_shifted, 0.0)));
    let rho = &v * diag * v.adjoint();
    let z = z_shifted * shift.exp();
    Ok((rho, z))
}

/// Spectral SLD: in ρ's eigenbasis L_{ab} = 2(∂ρ)_{ab}/(p_a + p_b) on the
/// support, 0 on the kernel. Errors with `KernelTangent` when a zeroed
/// entry carries weight above `KERNEL_TANGENT_ABS`.
pub fn dense_sld(rho: &DenseOperator, drho: &DenseOperator) -> Result<DenseOperator> {
    let (v, p) = hermitian_eigen(rho)?;
    let dim = rho.nrows();
    let mut mid = v.adjoint() * drho * &v;
    for a in 0..dim {
        for b in 0..dim {
            let denom = p[a] + p[b];
            if denom > EPS_KERNEL {
                mid[(a, b)] *= Complex64::new(2.0 / denom, 0.0);
            } else {
                let magnitude = mid[(a, b)].norm();
                if magnitude > KERNEL_TANGENT_ABS {
                    return Err(Error::KernelTangent { magnitude });
                }
                mid[(a, b)] = ZERO;
            }
        }
    }
    Ok(&v * mid * v.adjoint())
}

/// Dense QFIM and mean Uhlmann curvature from spectral SLDs:
/// J_{μν} = ½Tr ρ{L_μ, L_ν}, U_{μν} = −(i/4)Tr ρ[L_μ, L_ν].
pub fn dense_qfi(
    rho: &DenseOperator,
    drhos: &[DenseOperator],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = drhos.len();
    let slds: Vec<DenseOperator> = drhos
        .iter()
        .map(|dr| dense_sld(rho, dr))
        .collect::<Result<_>>()?;
    let mut j = DMatrix::zeros(d, d);
    let mut u = DMatrix::zeros(d, d);
    for mu in 0..d {
        for nu in mu..d {
            let t_mu_nu = (rho * &slds[mu] * &slds[nu]).trace();
            let t_nu_mu = (rho * &slds[nu] * &slds[mu]).trace();
            j[(mu, nu)] = 0.5 * (t_mu_nu + t_nu_mu).re;
            j[(nu, mu)] = j[(mu, nu)];
            let comm = t_mu_nu - t_nu_mu;
            u[(mu, nu)] = (-I * 0.25 * comm).re;
            u[(nu, mu)] = -u[(mu, nu)];
        }
    }
    Ok((j, u))
}

/// Classical Fisher information of a projective measurement whose
/// outcomes are the columns of `basis`: Σ (∂p_x)²/p_x over p_x > EPS_PROB.
pub fn measurement_fi(rho: &DenseOperator, drho: &DenseOperator, basis: &DenseOperator) -> f64 {
    let dim = rho.nrows();
    let mut fi = 0.0;
    for xcol in 0..dim {
        let x = basis.column(xcol);
        let p = (x.adjoint() * rho * x)[(0, 0)].re;
        if p > EPS_PROB {
            let dp = (x.adjoint() * drho * x)[(0, 0)].re;
            fi += dp * dp / p;
        }
    }
    fi
}

/// Tr(ρ ω_{i₁} … ω_{i_k}) for an arbitrary index word (repeats allowed).
pub fn dense_correlator(
    rho: &DenseOperator,
    ops: &[DenseOperator],
    indices: &[usize],
) -> Result<Complex64> {
    let mut prod: DenseOperator = rho.clone();
    for &idx in indices {
        let op = ops.get(idx).ok_or(Error::IndexOutOfRange {
            index: idx,
            dim: ops.len(),
        })?;
        prod *= op;
    }
    Ok(prod.trace())
}

/// Extracts the correlation-matrix representative G from a dense state:
/// Γ_{jk} = ½Tr(ρ[ω_j, ω_k]) = i·G_{jk}.
pub fn dense_gamma(rho: &DenseOperator, ops: &[DenseOperator]) -> Result<RealAntisym> {
    let dim = ops.len();
    let mut g = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        for k in (j + 1)..dim {
            let a = (rho * &ops[j] * &ops[k]).trace();
            g[(j, k)] = a.im;
            g[(k, j)] = -a.im;
        }
    }
    RealAntisym::new(g)
}

fn divided_difference_exp(a: f64, b: f64) -> f64 {
    // (e^a − e^b)/(a − b) = e^{(a+b)/2} sinhc((a−b)/2)
    let mid = 0.5 * (a + b);
    let half = 0.5 * (a - b);
    mid.exp() * sinhc(half)
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// Divided difference of tanh(x/2):
/// (tanh(a/2) − tanh(b/2))/(a − b) = sinhc((a−b)/2) / (2 cosh(a/2) cosh(b/2)).
fn divided_difference_tanh_half(a: f64, b: f64) -> f64 {
    sinhc(0.5 * (a - b)) / (2.0 * (0.5 * a).cosh() * (0.5 * b).cosh())
}

/// Exact dense (ρ, ∂ρ) for a full-rank state along the tangent Γ̇ = i·Ġ,
/// obtained by differentiating the exponential form: Γ̇ is pulled back to
/// Ω̇ through the divided differences of tanh, then ∂exp(D) follows from
/// the divided differences of exp in D's eigenbasis.
pub fn dense_tangent(
    g: &CorrelationMatrix,
    gdot: &RealAntisym,
    ops: &[DenseOperator],
) -> Result<(DenseOperator, DenseOperator)> {
    let dim2n = g.rep().dim();
    if gdot.dim() != dim2n {
        return Err(Error::DimensionMismatch {
            left: gdot.dim(),
            right: dim2n,
        });
    }
    let eig = g.eig()?;
    let gammas = eig.values();
    if let Some(&gamma) = gammas.iter().find(|&&x| x.abs() > 1.0 - EPS_PURE) {
        return Err(Error::ExtremalState {
            gamma_abs: gamma.abs(),
        });
    }
    let v = eig.vectors();
    let h: Vec<f64> = gammas.iter().map(|&x| 2.0 * x.atanh()).collect();

    // Ω̇ in Γ's eigenbasis, then back to a real representative
    let mut hdot = v.adjoint() * gdot.to_hermitian() * v;
    for j in 0..dim2n {
        for k in 0..dim2n {
            hdot[(j, k)] /= Complex64::new(divided_difference_tanh_half(h[j], h[k]), 0.0);
        }
    }
    let hdot_dense = v * hdot * v.adjoint();
    let omega_dot = imag_rep(&hdot_dense)?;
    let omega = RealAntisym::new(
        (v * DMatrix::from_diagonal(
            &DVector::from_iterator(dim2n, h.iter().map(|&x| Complex64::new(x, 0.0))),
        ) * v.adjoint())
        .map(|z| z.im),
    )?;

    let d_op = dense_quadratic_generator(&omega, ops);
    let ddot_op = dense_quadratic_generator(&omega_dot, ops);

    let (u, dvals) = hermitian_eigen(&d_op)?;
    let shift = dvals.max();
    let dim = d_op.nrows();
    let weights: Vec<f64> = dvals.iter().map(|&x| (x - shift).exp()).collect();
    let z: f64 = weights.iter().sum();

    let rho = &u * DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        weights.iter().map(|&wv| Complex64::new(wv / z, 0.0)),
    )) * u.adjoint();

    // ∂exp(D−shift) through divided differences, then normalise
    let mut mid = u.adjoint() * &ddot_op * &u;
    for a in 0..dim {
        for b in 0..dim {
            mid[(a, b)] *= Complex64::new(
                divided_difference_exp(dvals[a] - shift, dvals[b] - shift),
                0.0,
            );
        }
    }
    let dexp = &u * mid * u.adjoint();
    let zdot: Complex64 = dexp.trace();
    let drho = &dexp / Complex64::new(z, 0.0) - &rho * (zdot / Complex64::new(z, 0.0));
    Ok((rho, drho))
}

/// Real representative of an (approximately) imaginary antisymmetric
/// dense matrix: entrywise imaginary part, antisymmetrised.
fn imag_rep(m: &DenseOperator) -> Result<RealAntisym> {
    RealAntisym::new(m.map(|z| z.im))
}

/// Random unitary basis: QR of a uniformly random complex matrix with the
/// R-diagonal phases folded into Q.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
    let m = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / Complex64::new(d.norm(), 0.0);
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Pfaffian operator expansion of Gaussian states:
/// ρ = 2^{−n} Σ_S (−i)^{|S|/2} Pf(G_S) ω_S over even index subsets.
///
/// Caches all subset operators ω_S, so it is limited to
/// n ≤ `N_MAX_EXPANSION`; in exchange, both the state and its exact
/// tangent are plain polynomials in (G, Ġ) — no eigenvectors anywhere.
pub struct SubsetOperators {
    modes: usize,
    by_mask: Vec<DenseOperator>,
}

impl SubsetOperators {
    pub fn new(ops: &[DenseOperator]) -> Result<Self> {
        let modes = ops.len() / 2;
        if modes == 0 || modes > N_MAX_EXPANSION {
            return Err(Error::ModeCount {
                n: modes,
                max: N_MAX_EXPANSION,
            });
        }
        let dim = fock_dim(ops);
        let nbits = 2 * modes;
        let mut by_mask: Vec<DenseOperator> = Vec::with_capacity(1 << nbits);
        by_mask.push(DMatrix::identity(dim, dim));
        for mask in 1usize..(1 << nbits) {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            by_mask.push(&ops[low] * &by_mask[rest]);
        }
        Ok(Self { modes, by_mask })
    }

    fn mask_indices(mask: usize) -> Vec<usize> {
        (0..usize::BITS as usize)
            .filter(|b| mask >> b & 1 == 1)
            .collect()
    }

    fn phase(p: usize) -> Complex64 {
        // (−i)^p
        [ONE, -I, -ONE, I][p % 4]
    }

    /// ρ from the expansion; exact for every physical Γ.
    pub fn state(&self, g: &CorrelationMatrix) -> Result<DenseOperator> {
        self.assemble(g.rep(), None)
    }

    /// ∂ρ along Γ̇ = i·Ġ, by differentiating each Pfaffian coefficient.
    pub fn state_tangent(
        &self,
        g: &CorrelationMatrix,
        gdot: &RealAntisym,
    ) -> Result<DenseOperator> {
        self.assemble(g.rep(), Some(gdot))
    }

    fn assemble(&self, grep: &RealAntisym, gdot: Option<&RealAntisym>) -> Result<DenseOperator> {
        let nbits = 2 * self.modes;
        if grep.dim() != nbits {
            return Err(Error::DimensionMismatch {
                left: grep.dim(),
                right: nbits,
            });
        }
        let dim = self.by_mask[0].nrows();
        let mut acc: DenseOperator = DMatrix::zeros(dim, dim);
        let norm = 2f64.powi(-(self.modes as i32));
        for mask in 0..(1usize << nbits) {
            let pop = mask.count_ones() as usize;
            if !pop.is_multiple_of(2) {
                continue;
            }
            let idx = Self::mask_indices(mask);
            let coeff = match gdot {
                None => {
                    if pop == 0 {
                        1.0
                    } else {
                        let sub = grep.matrix().select_rows(&idx).select_columns(&idx);
                        skewlin::pfaffian(&RealAntisym::new(sub)?)
                    }
                }
                Some(gd) => {
                    if pop == 0 {
                        0.0
                    } else {
                        let sub = grep.matrix().select_rows(&idx).select_columns(&idx);
                        let subdot = gd.matrix().select_rows(&idx).select_columns(&idx);
                        pfaffian_directional_derivative(&sub, &subdot)
                    }
                }
            };
            if coeff != 0.0 {
                acc += &self.by_mask[mask] * (Self::phase(pop / 2) * Complex64::new(norm * coeff, 0.0));
            }
        }
        Ok(acc)
    }
}

/// d Pf(M)[Ṁ] = Σ_{j<k} (−1)^{j+k+1} Pf(M with rows/cols j,k removed) Ṁ_{jk}.
fn pfaffian_directional_derivative(m: &DMatrix<f64>, mdot: &DMatrix<f64>) -> f64 {
    let dim = m.nrows();
    if dim == 2 {
        return mdot[(0, 1)];
    }
    let mut acc = 0.0;
    for j in 0..dim {
        for k in (j + 1)..dim {
            if mdot[(j, k)] == 0.0 {
                continue;
            }
            let keep: Vec<usize> = (0..dim).filter(|&i| i != j && i != k).collect();
            let minor = m.select_rows(&keep).select_columns(&keep);
            let pf_minor = if keep.is_empty() {
                1.0
            } else {
                skewlin::pfaffian(&RealAntisym::new(minor).expect("even minor"))
            };
            let sign = if (j + k + 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * pf_minor * mdot[(j, k)];
        }
    }
    acc
}
