//! Dense symmetric eigensolver services.
//!
//! The walk's limiting distribution is the normalized projection of the
//! start vector onto the minimal eigenspace of the grounded Laplacian, so
//! this module doubles as the oracle the walk and quantum pipelines are
//! checked against. The reference path is a cyclic Jacobi decomposition
//! (dependable orthonormality at desk scale); a shifted-inverse-iteration
//! fast path serves requests for the single smallest pair, falling back to
//! Jacobi if it stalls.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

const MAX_JACOBI_SWEEPS: usize = 100;
const MAX_INVERSE_ITERS: usize = 300;

/// Ascending eigenvalues with orthonormal eigenvectors and the residual
/// norms `‖H·v - λ·v‖₂` actually achieved.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Array1<f64>>,
    pub residual_norms: Vec<f64>,
}

/// Default clustering width for [`minimal_space_projection`]:
/// `1e-9 · max(1, λ_max)` separates exact multi-component kernels from
/// near-degenerate pairs at double precision.
pub fn default_degeneracy_tol(lambda_max: f64) -> f64 {
    1e-9 * lambda_max.abs().max(1.0)
}

fn check_symmetric(h: &Array2<f64>) -> Result<()> {
    let (r, c) = h.dim();
    if r != c {
        return Err(Error::InvalidInput {
            reason: format!("matrix is {r}x{c}, not square"),
        });
    }
    let scale = h.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let mut asym = 0.0f64;
    for i in 0..r {
        for j in (i + 1)..r {
            asym = asym.max((h[[i, j]] - h[[j, i]]).abs());
        }
    }
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    Ok(())
}

fn frobenius(h: &Array2<f64>) -> f64 {
    h.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Make the largest-magnitude entry positive; deterministic orientation,
/// and a vector that can be taken entrywise nonnegative comes out that way.
fn fix_sign(v: &mut Array1<f64>) {
    let mut best = 0usize;
    let mut mag = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > mag {
            mag = x.abs();
            best = i;
        }
    }
    if mag > 0.0 && v[best] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
}

fn residual_norm(h: &Array2<f64>, lambda: f64, v: &Array1<f64>) -> f64 {
    let hv = h.dot(v);
    (&hv - &(v * lambda)).iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Full cyclic-Jacobi decomposition; eigenvalues ascending, eigenvectors
/// as the columns of the returned matrix.
fn jacobi_decompose(h: &Array2<f64>, rel_tol: f64) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = Array2::<f64>::eye(n);
    let frob = frobenius(&a);
    let target = rel_tol.max(1e-15) * frob;

    let off_norm = |a: &Array2<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[[i, j]] * a[[i, j]];
            }
        }
        s.sqrt()
    };

    if frob > 0.0 {
        let mut converged = false;
        for _sweep in 0..MAX_JACOBI_SWEEPS {
            if off_norm(&a) <= target {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[[p, q]];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);

                    let app = a[[p, p]];
                    let aqq = a[[q, q]];
                    a[[p, p]] = app - t * apq;
                    a[[q, q]] = aqq + t * apq;
                    a[[p, q]] = 0.0;
                    a[[q, p]] = 0.0;
                    for j in 0..n {
                        if j != p && j != q {
                            let ajp = a[[j, p]];
                            let ajq = a[[j, q]];
                            a[[j, p]] = ajp - s * (ajq + tau * ajp);
                            a[[j, q]] = ajq + s * (ajp - tau * ajq);
                            a[[p, j]] = a[[j, p]];
                            a[[q, j]] = a[[j, q]];
                        }
                    }
                    for j in 0..n {
                        let vjp = v[[j, p]];
                        let vjq = v[[j, q]];
                        v[[j, p]] = vjp - s * (vjq + tau * vjp);
                        v[[j, q]] = vjq + s * (vjp - tau * vjq);
                    }
                }
            }
        }
        if !converged && off_norm(&a) > target {
            return Err(Error::EigensolverFailure {
                detail: format!(
                    "Jacobi off-diagonal norm {:e} above target {:e} after {} sweeps",
                    off_norm(&a),
                    target,
                    MAX_JACOBI_SWEEPS
                ),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].partial_cmp(&a[[j, j]]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        let mut vec = v.column(i).to_owned();
        fix_sign(&mut vec);
        vectors.column_mut(col).assign(&vec);
    }
    Ok((eigenvalues, vectors))
}

/// Cholesky factorization of a symmetric positive-definite matrix.
fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        for k in 0..i {
            let t = l[[i, k]] * y[k];
            y[i] -= t;
        }
        y[i] /= l[[i, i]];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let t = l[[k, i]] * y[k];
            y[i] -= t;
        }
        y[i] /= l[[i, i]];
    }
    y
}

/// Shifted inverse iteration for the algebraically smallest eigenpair.
/// Returns `None` when the shift fails to factor or iteration stalls.
fn smallest_pair_inverse_iteration(h: &Array2<f64>, tol: f64) -> Option<(f64, Array1<f64>)> {
    let n = h.nrows();
    let scale = frobenius(h).max(1.0);
    // Gershgorin lower bound keeps the shifted matrix positive definite.
    let mut lower = f64::INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        for j in 0..n {
            if i != j {
                radius += h[[i, j]].abs();
            }
        }
        lower = lower.min(h[[i, i]] - radius);
    }
    let shift = lower - 0.01 * scale;
    let mut shifted = h.clone();
    for i in 0..n {
        shifted[[i, i]] -= shift;
    }
    let l = cholesky(&shifted)?;

    let mut x = Array1::<f64>::from_elem(n, 1.0 / (n as f64).sqrt());
    let target = tol.max(1e-12) * scale;
    for _ in 0..MAX_INVERSE_ITERS {
        let y = cholesky_solve(&l, &x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        x = y / norm;
        let lambda = x.dot(&h.dot(&x));
        if residual_norm(h, lambda, &x) <= target {
            fix_sign(&mut x);
            let lambda = x.dot(&h.dot(&x));
            return Some((lambda, x));
        }
    }
    None
}

/// The `count` algebraically smallest eigenpairs of a symmetric matrix.
///
/// Non-symmetric input signals `invalid-matrix`; failure to reach the
/// residual target signals `eigensolver-failure`.
pub fn smallest_eigpairs(h: &Array2<f64>, count: usize, tol: f64) -> Result<EigenResult> {
    check_symmetric(h)?;
    let n = h.nrows();
    if count == 0 || count > n {
        return Err(Error::InvalidInput {
            reason: format!("count {count} out of range for dimension {n}"),
        });
    }

    if count == 1 {
        if let Some((lambda, v)) = smallest_pair_inverse_iteration(h, tol) {
            let res = residual_norm(h, lambda, &v);
            return Ok(EigenResult {
                eigenvalues: vec![lambda],
                eigenvectors: vec![v],
                residual_norms: vec![res],
            });
        }
        // fall through to the reference path
    }

    let (eigenvalues, vectors) = jacobi_decompose(h, tol.min(1e-12))?;
    let scale = frobenius(h).max(1.0);
    let mut kept_vals = Vec::with_capacity(count);
    let mut kept_vecs = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for i in 0..count {
        let v = vectors.column(i).to_owned();
        let res = residual_norm(h, eigenvalues[i], &v);
        if res > 1e-8 * scale {
            return Err(Error::EigensolverFailure {
                detail: format!("residual {res:e} exceeds 1e-8 * ||H|| for eigenvalue {i}"),
            });
        }
        kept_vals.push(eigenvalues[i]);
        kept_vecs.push(v);
        residuals.push(res);
    }
    Ok(EigenResult {
        eigenvalues: kept_vals,
        eigenvectors: kept_vecs,
        residual_norms: residuals,
    })
}

/// `λ₂ - λ₁` of the full spectrum.
pub fn spectral_gap(h: &Array2<f64>) -> Result<f64> {
    check_symmetric(h)?;
    if h.nrows() < 2 {
        return Err(Error::InvalidInput {
            reason: "spectral gap needs dimension >= 2".into(),
        });
    }
    let (vals, _) = jacobi_decompose(h, 1e-13)?;
    Ok(vals[1] - vals[0])
}

/// ℓ1-normalized projection of `start` onto the span of all eigenvectors
/// whose eigenvalue lies within `degeneracy_tol` of the smallest.
///
/// This is the walk's limiting distribution even when the minimal
/// eigenvalue is degenerate (several untouched components). A vanishing
/// projection signals `no-overlap`.
pub fn minimal_space_projection(
    h: &Array2<f64>,
    start: &Array1<f64>,
    degeneracy_tol: f64,
) -> Result<Array1<f64>> {
    check_symmetric(h)?;
    let n = h.nrows();
    if start.len() != n {
        return Err(Error::InvalidInput {
            reason: format!("start has length {}, matrix has dimension {n}", start.len()),
        });
    }
    let start_l1: f64 = start.iter().map(|x| x.abs()).sum();
    if start_l1 <= 0.0 {
        return Err(Error::InvalidInput {
            reason: "start vector has zero l1 norm".into(),
        });
    }
    if start.iter().any(|&x| x < -1e-12) {
        return Err(Error::InvalidInput {
            reason: "start vector must be entrywise nonnegative".into(),
        });
    }

    let (vals, vecs) = jacobi_decompose(h, 1e-13)?;
    let lambda_min = vals[0];
    let mut proj = Array1::<f64>::zeros(n);
    for (i, &lambda) in vals.iter().enumerate() {
        if lambda > lambda_min + degeneracy_tol {
            break;
        }
        let v = vecs.column(i);
        let coeff = start.dot(&v);
        proj = proj + &(&v * coeff);
    }
    let l1: f64 = proj.iter().map(|x| x.abs()).sum();
    if l1 <= 1e-12 * start_l1 {
        return Err(Error::NoOverlap);
    }
    Ok(proj / l1)
}

/// [`minimal_space_projection`] with the default degeneracy width derived
/// from the computed `λ_max`.
pub fn minimal_space_projection_auto(h: &Array2<f64>, start: &Array1<f64>) -> Result<Array1<f64>> {
    check_symmetric(h)?;
    let (vals, _) = jacobi_decompose(h, 1e-13)?;
    let lambda_max = *vals.last().expect("nonempty spectrum");
    minimal_space_projection(h, start, default_degeneracy_tol(lambda_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbitgraph;
    use crate::walk::GroundedLaplacian;
    use ndarray::array;

    fn uniform(n: usize) -> Array1<f64> {
        Array1::from_elem(n, 1.0 / n as f64)
    }

    #[test]
    fn laplacian_kernel_multiplicity_counts_components() {
        let g = orbitgraph::build(15, &[2]).unwrap();
        let l = g.laplacian();
        let r = smallest_eigpairs(&l, 14, 1e-12).unwrap();
        let zeros = r.eigenvalues.iter().filter(|&&v| v.abs() < 1e-9).count();
        assert_eq!(zeros, 4);
        for (i, v) in r.eigenvectors.iter().enumerate() {
            assert!(r.residual_norms[i] < 1e-8 * 14.0);
            for (j, w) in r.eigenvectors.iter().enumerate() {
                let dot = v.dot(w);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10, "({i},{j}) dot = {dot}");
            }
        }
    }

    #[test]
    fn grounded_kernel_is_spanned_by_untouched_components() {
        let g = orbitgraph::build(15, &[2, 7]).unwrap();
        let lp = GroundedLaplacian::build(&g, &[2, 11]).unwrap();
        let r = smallest_eigpairs(lp.matrix(), 3, 1e-12).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-10);
        assert!(r.eigenvalues[1].abs() < 1e-10);
        assert!(r.eigenvalues[2] > 1e-6);

        // indicators of {3,6,9,12} and {5,10} must lie in the kernel span
        for members in [vec![3u64, 6, 9, 12], vec![5, 10]] {
            let mut ind = Array1::<f64>::zeros(lp.dim());
            for v in members {
                ind[lp.row_of(v).unwrap()] = 1.0;
            }
            let c0 = ind.dot(&r.eigenvectors[0]);
            let c1 = ind.dot(&r.eigenvectors[1]);
            let recon = &r.eigenvectors[0] * c0 + &r.eigenvectors[1] * c1;
            let err: f64 = (&ind - &recon).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(err < 1e-8, "indicator not in kernel span, err = {err}");
        }
    }

    #[test]
    fn identity_matrix_single_pair() {
        let h = Array2::<f64>::eye(5);
        let r = smallest_eigpairs(&h, 1, 1e-12).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-10);
        let norm: f64 = r.eigenvectors[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_iteration_agrees_with_jacobi() {
        let g = orbitgraph::build(15, &[2]).unwrap();
        let lp = GroundedLaplacian::build(&g, &[1, 2, 3, 4, 5, 7, 8, 11, 13, 14]).unwrap();
        let fast = smallest_eigpairs(lp.matrix(), 1, 1e-12).unwrap();
        let full = smallest_eigpairs(lp.matrix(), lp.dim(), 1e-12).unwrap();
        assert!((fast.eigenvalues[0] - full.eigenvalues[0]).abs() < 1e-9);
        // minimal eigenvalue of the {6,9,12} path block is 2 - sqrt(2)
        assert!((fast.eigenvalues[0] - (2.0 - 2.0f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn gap_of_diagonal_matrix() {
        let h = array![[0.0, 0.0], [0.0, 3.0]];
        assert!((spectral_gap(&h).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gap_of_g35_instance_is_degenerate() {
        let g = orbitgraph::build(35, &[2]).unwrap();
        let lp = GroundedLaplacian::build(&g, &[1, 5, 17]).unwrap();
        assert!(spectral_gap(lp.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn gap_with_symmetric_marking_is_degenerate_but_positive_when_broken() {
        // marking one vertex in each black 4-cycle leaves two isomorphic
        // grounded path blocks: the two smallest eigenvalues coincide at
        // 2 - sqrt(2) and the gap vanishes
        let g = orbitgraph::build(15, &[2]).unwrap();
        let lp = GroundedLaplacian::build(&g, &[3, 6, 9, 12, 5, 10, 1, 14]).unwrap();
        let r = smallest_eigpairs(lp.matrix(), 2, 1e-12).unwrap();
        assert!((r.eigenvalues[0] - (2.0 - 2.0f64.sqrt())).abs() < 1e-9);
        assert!(spectral_gap(lp.matrix()).unwrap() < 1e-12);

        // breaking the symmetry (mark both of 1 and 2 in the same cycle)
        // leaves one component untouched: kernel plus a genuine gap
        let lp = GroundedLaplacian::build(&g, &[3, 6, 9, 12, 5, 10, 1, 2]).unwrap();
        assert!(spectral_gap(lp.matrix()).unwrap() > 0.1);
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let h = array![[1.0, 2.0], [0.0, 1.0]];
        assert!(matches!(smallest_eigpairs(&h, 1, 1e-10), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn projection_on_union_graph_limit() {
        let g = orbitgraph::build(15, &[2, 7]).unwrap();
        let lp = GroundedLaplacian::build(&g, &[2, 11]).unwrap();
        let proj = minimal_space_projection_auto(lp.matrix(), &uniform(lp.dim())).unwrap();
        for (row, &v) in lp.vertices().iter().enumerate() {
            let expect = if [3, 5, 6, 9, 10, 12].contains(&v) { 1.0 / 6.0 } else { 0.0 };
            assert!((proj[row] - expect).abs() < 1e-10, "vertex {v}: {}", proj[row]);
        }
    }

    #[test]
    fn projection_on_g35_limit() {
        let g = orbitgraph::build(35, &[2]).unwrap();
        let lp = GroundedLaplacian::build(&g, &[1, 5, 17]).unwrap();
        let proj = minimal_space_projection_auto(lp.matrix(), &uniform(lp.dim())).unwrap();
        for (row, &v) in lp.vertices().iter().enumerate() {
            let expect = if [7, 14, 15, 21, 25, 28, 30].contains(&v) { 1.0 / 7.0 } else { 0.0 };
            assert!((proj[row] - expect).abs() < 1e-10, "vertex {v}: {}", proj[row]);
        }
    }

    #[test]
    fn projection_of_eigenvector_is_itself() {
        let g = orbitgraph::build(15, &[2]).unwrap();
        let lp = GroundedLaplacian::build(&g, &[1, 2, 3, 4, 5, 7, 8, 11, 13, 14]).unwrap();
        let r = smallest_eigpairs(lp.matrix(), 1, 1e-12).unwrap();
        let vmin = &r.eigenvectors[0];
        let l1: f64 = vmin.iter().map(|x| x.abs()).sum();
        let proj = minimal_space_projection(lp.matrix(), vmin, 1e-9).unwrap();
        for i in 0..lp.dim() {
            assert!((proj[i] - vmin[i] / l1).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_without_overlap_errors() {
        // start orthogonal to the kernel of a 2-component edgeless Laplacian
        let h = array![[0.0, 0.0], [0.0, 2.0]];
        let start = array![0.0, 1.0];
        // kernel is e0; the projection of e1 onto it vanishes
        let r = minimal_space_projection(&h, &start, 1e-9);
        assert!(matches!(r, Err(Error::NoOverlap)));
    }
}
