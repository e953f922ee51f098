//! Structured linear algebra for real antisymmetric matrices: canonical
//! forms, Pfaffians, and matrix functions of iA.
//!
//! A real antisymmetric matrix A doubles as the real representative of the
//! imaginary antisymmetric (Hermitian) matrix M = i·A; every routine here
//! works on the real side and materialises complex matrices only for
//! eigendecompositions.

mod pfaffian;

pub use pfaffian::pfaffian;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::KERNEL_SNAP_REL;

/// Real antisymmetric matrix of even dimension 2n.
///
/// Construction symmetrises the input (A ← (A − Aᵀ)/2) so antisymmetry
/// holds exactly; all other invariants are preserved by the operations.
#[derive(Debug, Clone, PartialEq)]
pub struct RealAntisym {
    mat: DMatrix<f64>,
}

impl RealAntisym {
    /// Builds from an arbitrary square matrix, enforcing exact antisymmetry.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = mat.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 || rows % 2 != 0 {
            return Err(Error::BadDimension(rows));
        }
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let anti = (&mat - mat.transpose()) * 0.5;
        Ok(Self { mat: anti })
    }

    /// Zero matrix of the given even dimension.
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::BadDimension(dim));
        }
        Ok(Self {
            mat: DMatrix::zeros(dim, dim),
        })
    }

    /// Direct sum of 2×2 blocks [[0, a_k], [−a_k, 0]].
    pub fn from_block_angles(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::BadDimension(0));
        }
        let dim = 2 * angles.len();
        let mut mat = DMatrix::zeros(dim, dim);
        for (k, &a) in angles.iter().enumerate() {
            mat[(2 * k, 2 * k + 1)] = a;
            mat[(2 * k + 1, 2 * k)] = -a;
        }
        Ok(Self { mat })
    }

    /// Random antisymmetric matrix with independent N(0, scale²)-ish
    /// upper-triangle entries (uniform in [−scale, scale]).
    pub fn random<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::BadDimension(dim));
        }
        let mut mat = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for k in (j + 1)..dim {
                let x = rng.gen_range(-scale..scale);
                mat[(j, k)] = x;
                mat[(k, j)] = -x;
            }
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// The Hermitian matrix i·A.
    pub fn to_hermitian(&self) -> DMatrix<Complex64> {
        self.mat.map(|x| Complex64::new(0.0, x))
    }

    /// Entrywise linear combination a·self + b·other.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            mat: &self.mat * a + &other.mat * b,
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { mat: &self.mat * a }
    }
}

/// Wire format shared with the gaussian matrix types:
/// `{"modes": n, "rep": [[…]]}` with row-major real entries.
#[derive(Serialize, Deserialize)]
struct AntisymJson {
    modes: usize,
    rep: Vec<Vec<f64>>,
}

impl Serialize for RealAntisym {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.dim();
        AntisymJson {
            modes: dim / 2,
            rep: (0..dim)
                .map(|i| (0..dim).map(|j| self.mat[(i, j)]).collect())
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for RealAntisym {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = AntisymJson::deserialize(de)?;
        let dim = 2 * raw.modes;
        if raw.rep.len() != dim || raw.rep.iter().any(|r| r.len() != dim) {
            return Err(serde::de::Error::custom(format!(
                "rep must be a {dim}x{dim} matrix"
            )));
        }
        let mat = DMatrix::from_fn(dim, dim, |i, j| raw.rep[i][j]);
        RealAntisym::new(mat).map_err(serde::de::Error::custom)
    }
}

/// Canonical form of a real antisymmetric matrix:
/// A = Qᵀ (⊕_k [[0, Ω_k], [−Ω_k, 0]]) Q with Q real orthogonal.
///
/// Angles are sorted descending and non-negative; sign is absorbed into
/// the orientation of each plane.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    rotation: DMatrix<f64>,
    angles: Vec<f64>,
}

impl CanonicalForm {
    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Qᵀ (⊕ blocks(f(Ω_k))) Q — valid for odd functions f of iA/… on the
    /// real side; `map_angles(|a| a)` reconstructs the input.
    pub fn map_angles(&self, f: impl Fn(f64) -> f64) -> RealAntisym {
        let dim = self.rotation.nrows();
        let mut block = DMatrix::zeros(dim, dim);
        for (k, &a) in self.angles.iter().enumerate() {
            let v = f(a);
            block[(2 * k, 2 * k + 1)] = v;
            block[(2 * k + 1, 2 * k)] = -v;
        }
        let mat = self.rotation.transpose() * block * &self.rotation;
        // orthogonal conjugation of an antisymmetric matrix; resymmetrise
        // the floating-point residue
        RealAntisym::new(mat).expect("conjugation preserves shape")
    }

    pub fn reconstruct(&self) -> RealAntisym {
        self.map_angles(|a| a)
    }

    /// The orthogonal matrix exp(s·A) = Qᵀ (⊕ rotation blocks) Q.
    pub fn rotation_exp(&self, scale: f64) -> DMatrix<f64> {
        let dim = self.rotation.nrows();
        let mut block = DMatrix::zeros(dim, dim);
        for (k, &a) in self.angles.iter().enumerate() {
            let (s, c) = (scale * a).sin_cos();
            block[(2 * k, 2 * k)] = c;
            block[(2 * k, 2 * k + 1)] = s;
            block[(2 * k + 1, 2 * k)] = -s;
            block[(2 * k + 1, 2 * k + 1)] = c;
        }
        self.rotation.transpose() * block * &self.rotation
    }
}

/// Eigendecomposition of the Hermitian matrix iA: iA = V diag(values) V†.
/// Values are sorted descending; for real antisymmetric A they come in
/// ± pairs.
#[derive(Debug, Clone)]
pub struct HermitianEigensystem {
    vectors: DMatrix<Complex64>,
    values: DVector<f64>,
}

impl HermitianEigensystem {
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn values(&self) -> &[f64] {
        self.values.as_slice()
    }

    /// V diag(values) V† as a dense complex matrix.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&self.values.map(|x| Complex64::new(x, 0.0)));
        &self.vectors * d * self.vectors.adjoint()
    }
}

fn try_hermitian_eigen(h: DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DVector<f64>)> {
    let dim = h.nrows();
    let eig = h
        .try_symmetric_eigen(f64::EPSILON, 200 * dim.max(8))
        .ok_or(Error::EigenFailure)?;
    Ok((eig.eigenvectors, eig.eigenvalues))
}

/// Diagonalises the Hermitian matrix iA, eigenvalues sorted descending.
pub fn hermitian_eig(a: &RealAntisym) -> Result<HermitianEigensystem> {
    let (vecs, vals) = try_hermitian_eigen(a.to_hermitian())?;
    let dim = a.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).expect("finite eigenvalues"));
    let mut vectors = DMatrix::zeros(dim, dim);
    let mut values = DVector::zeros(dim);
    for (slot, &idx) in order.iter().enumerate() {
        vectors.set_column(slot, &vecs.column(idx));
        values[slot] = vals[idx];
    }
    Ok(HermitianEigensystem { vectors, values })
}

/// Canonical block-diagonalisation of a real antisymmetric matrix.
///
/// Diagonalises iA and folds each +Ω eigenvector v into the real plane
/// spanned by √2·Im(v), √2·Re(v); the conjugate v̄ is the matching −Ω
/// partner, so degenerate pairs never mix across planes. Angles below
/// `KERNEL_SNAP_REL·(1+‖A‖_F)` are treated as kernel planes with Ω_k = 0.
pub fn canonical_form(a: &RealAntisym) -> Result<CanonicalForm> {
    let dim = a.dim();
    let modes = dim / 2;
    let eig = hermitian_eig(a)?;
    let snap = KERNEL_SNAP_REL * (1.0 + a.frobenius_norm());

    // planes from positive eigenvalues, already sorted descending
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(dim);
    let mut angles: Vec<f64> = Vec::with_capacity(modes);
    let sqrt2 = std::f64::consts::SQRT_2;
    for j in 0..dim {
        let lambda = eig.values()[j];
        if lambda <= snap {
            break;
        }
        let v = eig.vectors().column(j);
        let y = DVector::from_iterator(dim, v.iter().map(|z| sqrt2 * z.im));
        let x = DVector::from_iterator(dim, v.iter().map(|z| sqrt2 * z.re));
        rows.push(y);
        rows.push(x);
        angles.push(lambda);
    }

    // kernel candidates: real and imaginary parts of |λ| ≤ snap eigenvectors,
    // then standard basis vectors as a completion fallback
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    for j in 0..dim {
        if eig.values()[j].abs() <= snap {
            let v = eig.vectors().column(j);
            candidates.push(DVector::from_iterator(dim, v.iter().map(|z| z.re)));
            candidates.push(DVector::from_iterator(dim, v.iter().map(|z| z.im)));
        }
    }
    for j in 0..dim {
        let mut e = DVector::zeros(dim);
        e[j] = 1.0;
        candidates.push(e);
    }

    // modified Gram-Schmidt over plane rows (cleanup) and kernel candidates
    let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for row in rows {
        ortho.push(mgs_step(&ortho, row).ok_or(Error::EigenFailure)?);
    }
    for cand in candidates {
        if ortho.len() == dim {
            break;
        }
        if let Some(v) = mgs_step(&ortho, cand) {
            ortho.push(v);
        }
    }
    debug_assert_eq!(ortho.len(), dim);
    while angles.len() < modes {
        angles.push(0.0);
    }

    let mut rotation = DMatrix::zeros(dim, dim);
    for (i, row) in ortho.iter().enumerate() {
        rotation.set_row(i, &row.transpose());
    }
    Ok(CanonicalForm { rotation, angles })
}

/// Projects `v` against the accepted rows and normalises; rejects vectors
/// whose residual collapses (linearly dependent candidates).
fn mgs_step(ortho: &[DVector<f64>], mut v: DVector<f64>) -> Option<DVector<f64>> {
    for _ in 0..2 {
        for u in ortho {
            let proj = u.dot(&v);
            v -= u * proj;
        }
    }
    let norm = v.norm();
    if norm < 1e-6 {
        return None;
    }
    Some(v / norm)
}

/// Real antisymmetric representative of Γ = tanh(iA/2) = i·G, computed
/// blockwise from the canonical form.
pub fn tanh_of_i_halved(a: &RealAntisym) -> Result<RealAntisym> {
    Ok(canonical_form(a)?.map_angles(|w| (0.5 * w).tanh()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::tolerances::{TOL_ORTH, TOL_PAIR, TOL_RECON};

    fn orth_defect(q: &DMatrix<f64>) -> f64 {
        let dim = q.nrows();
        (q * q.transpose() - DMatrix::<f64>::identity(dim, dim))
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn canonical_form_already_canonical_block() {
        let a = RealAntisym::from_block_angles(&[0.7]).unwrap();
        let cf = canonical_form(&a).unwrap();
        assert!((cf.angles()[0] - 0.7).abs() < 1e-14);
        assert!(orth_defect(cf.rotation()) < TOL_ORTH);
        let rec = cf.reconstruct();
        assert!((rec.matrix() - a.matrix()).norm() < 1e-13);
    }

    #[test]
    fn canonical_form_zero_matrix_returns_identity() {
        let a = RealAntisym::zeros(6).unwrap();
        let cf = canonical_form(&a).unwrap();
        assert!(cf.angles().iter().all(|&w| w == 0.0));
        assert_eq!(cf.rotation(), &DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn canonical_form_angles_match_generic_complex_eigensolver() {
        // oracle: eigenvalues of A as a plain real matrix are ±i·Ω_k
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = RealAntisym::random(6, 1.0, &mut rng).unwrap();
        let cf = canonical_form(&a).unwrap();

        let mut expected: Vec<f64> = a
            .matrix()
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.im)
            .filter(|&im| im > 0.0)
            .collect();
        expected.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert_eq!(expected.len(), 3);
        for (got, want) in cf.angles().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn canonical_form_handles_degenerate_angles() {
        let a = RealAntisym::from_block_angles(&[1.3, 1.3, 0.2]).unwrap();
        // rotate into a non-trivial basis first
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = RealAntisym::random(6, 1.0, &mut rng).unwrap();
        let o = canonical_form(&g).unwrap().rotation_exp(1.0);
        let rotated = RealAntisym::new(&o * a.matrix() * o.transpose()).unwrap();

        let cf = canonical_form(&rotated).unwrap();
        assert!(orth_defect(cf.rotation()) < TOL_ORTH);
        let err = (cf.reconstruct().matrix() - rotated.matrix()).norm();
        assert!(err < TOL_RECON * (1.0 + rotated.frobenius_norm()), "{err}");
    }

    #[test]
    fn canonical_form_near_degenerate_and_tiny_angles() {
        let a = RealAntisym::from_block_angles(&[1.3, 1.3 + 1e-13, 1e-11]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = RealAntisym::random(6, 1.0, &mut rng).unwrap();
        let o = canonical_form(&g).unwrap().rotation_exp(1.0);
        let rotated = RealAntisym::new(&o * a.matrix() * o.transpose()).unwrap();

        let cf = canonical_form(&rotated).unwrap();
        assert!(orth_defect(cf.rotation()) < TOL_ORTH);
        let err = (cf.reconstruct().matrix() - rotated.matrix()).norm();
        assert!(err < TOL_RECON * (1.0 + rotated.frobenius_norm()), "{err}");
    }

    #[test]
    fn pfaffian_two_by_two_is_upper_entry() {
        let a = RealAntisym::from_block_angles(&[3.25]).unwrap();
        assert_eq!(pfaffian(&a), 3.25);
    }

    #[test]
    fn pfaffian_block_diagonal_is_product() {
        let a = RealAntisym::from_block_angles(&[2.0, -0.5, 1.5]).unwrap();
        assert!((pfaffian(&a) - 2.0 * -0.5 * 1.5).abs() < 1e-14);
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = RealAntisym::random(8, 1.0, &mut rng).unwrap();
        let pf = pfaffian(&a);
        let det = a.matrix().determinant();
        assert!((pf * pf - det).abs() <= 1e-10 * det.abs());
    }

    #[test]
    fn tanh_zero_is_zero() {
        let a = RealAntisym::zeros(4).unwrap();
        let g = tanh_of_i_halved(&a).unwrap();
        assert_eq!(g.matrix().norm(), 0.0);
    }

    #[test]
    fn tanh_single_block_inverse_relation() {
        let a = RealAntisym::from_block_angles(&[2.0 * 0.5f64.atanh()]).unwrap();
        let g = tanh_of_i_halved(&a).unwrap();
        assert!((g.matrix()[(0, 1)] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn tanh_matches_dense_hermitian_function() {
        // oracle: generic Hermitian matrix function of iA/2
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = RealAntisym::random(6, 1.0, &mut rng).unwrap();
        let g = tanh_of_i_halved(&a).unwrap();

        let eig = hermitian_eig(&a).unwrap();
        let d = DMatrix::from_diagonal(
            &DVector::from_iterator(6, eig.values().iter().map(|&l| (0.5 * l).tanh()))
                .map(|x| Complex64::new(x, 0.0)),
        );
        let dense = eig.vectors() * d * eig.vectors().adjoint();
        let err = (g.to_hermitian() - dense).norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn hermitian_eig_single_block() {
        let a = RealAntisym::from_block_angles(&[1.0]).unwrap();
        let eig = hermitian_eig(&a).unwrap();
        assert!((eig.values()[0] - 1.0).abs() < 1e-14);
        assert!((eig.values()[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_eig_zero_matrix() {
        let a = RealAntisym::zeros(4).unwrap();
        let eig = hermitian_eig(&a).unwrap();
        assert!(eig.values().iter().all(|&v| v == 0.0));
        let defect = (eig.vectors() * eig.vectors().adjoint()
            - DMatrix::<Complex64>::identity(4, 4))
        .norm();
        assert!(defect < TOL_ORTH);
    }

    #[test]
    fn hermitian_eig_values_pair_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = RealAntisym::random(8, 1.0, &mut rng).unwrap();
        let eig = hermitian_eig(&a).unwrap();
        let vals = eig.values();
        for j in 0..4 {
            assert!(
                (vals[j] + vals[7 - j]).abs() < TOL_PAIR,
                "pair {j}: {} vs {}",
                vals[j],
                vals[7 - j]
            );
        }
    }

    #[test]
    fn constructor_rejects_odd_and_tiny_dims() {
        assert!(RealAntisym::new(DMatrix::zeros(3, 3)).is_err());
        assert!(RealAntisym::new(DMatrix::zeros(0, 0)).is_err());
        assert!(RealAntisym::new(DMatrix::zeros(2, 4)).is_err());
    }

    #[test]
    fn constructor_symmetrises() {
        let m = DMatrix::from_row_slice(2, 2, &[0.4, 1.0, 0.0, -0.4]);
        let a = RealAntisym::new(m).unwrap();
        assert_eq!(a.matrix()[(0, 0)], 0.0);
        assert_eq!(a.matrix()[(0, 1)], 0.5);
        assert_eq!(a.matrix()[(1, 0)], -0.5);
    }
}
