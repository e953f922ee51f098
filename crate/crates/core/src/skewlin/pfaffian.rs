//! Pfaffian via Parlett–Reid tridiagonalisation with partial pivoting.

use super::RealAntisym;

/// Computes Pf(A) in O(dim³); sign convention Pf(\[\[0,1\],\[−1,0\]\]) = +1.
///
/// Gaussian elimination on 2×2 pivots: each step permutes the largest
/// subdiagonal entry of the working column into the pivot slot (tracking
/// the permutation sign) and eliminates the trailing block, accumulating
/// the product of super-diagonal pivots. Overflow for huge entries is not
/// guarded; Pf² grows like det(A).
pub fn pfaffian(a: &RealAntisym) -> f64 {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut pf = 1.0f64;

    for k in (0..n - 1).step_by(2) {
        // pivot: largest |m[i, k]| for i > k
        let mut kp = k + 1;
        let mut best = m[(k + 1, k)].abs();
        for i in (k + 2)..n {
            let v = m[(i, k)].abs();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = m[(k + 1, k)];
        if pivot == 0.0 {
            // a fully zero column makes the matrix singular
            return 0.0;
        }
        pf *= m[(k, k + 1)];
        if k + 2 < n {
            let tau: Vec<f64> = ((k + 2)..n).map(|j| m[(k, j)] / m[(k, k + 1)]).collect();
            let col: Vec<f64> = ((k + 2)..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
    }
    pf
}
