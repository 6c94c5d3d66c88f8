//! The classical wormhole random walk.
//!
//! Marked vertices become absorbing "wormholes": one step moves mass along
//! edges via `E = I - L_p·Δt` (with `L_p` the grounded Laplacian, marked
//! rows and columns deleted), then redistributes the absorbed fraction
//! proportionally by ℓ1-renormalizing. Iterating drives the distribution to
//! the normalized projection of the start onto the minimal eigenspace of
//! `L_p`, which concentrates on fully-unmarked components; a `gcd` against
//! any vertex still carrying mass then reads off a factor.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::numtheory::{self, FactorPair};
use crate::orbitgraph::OrbitGraph;

/// Grounded Laplacian: `L = D - A` with the rows and columns of marked
/// vertices deleted. Diagonal entries keep the full-graph degree, so rows
/// adjacent to a wormhole leak mass.
#[derive(Debug, Clone)]
pub struct GroundedLaplacian {
    matrix: Array2<f64>,
    /// Unmarked vertex labels in ascending order; entry `r` labels row `r`.
    vertices: Vec<u64>,
    n: u64,
    max_diagonal: f64,
}

impl GroundedLaplacian {
    /// Delete the rows and columns of `marks` from the graph Laplacian.
    ///
    /// Marks must be distinct vertices in `1..N-1` and leave at least one
    /// vertex unmarked.
    pub fn build(g: &OrbitGraph, marks: &[u64]) -> Result<GroundedLaplacian> {
        let n_vertices = g.vertex_count();
        let mut marked = vec![false; n_vertices as usize];
        for &m in marks {
            if m == 0 || m >= g.n() {
                return Err(Error::InvalidMarks {
                    reason: format!("vertex {m} outside 1..{}", g.n() - 1),
                });
            }
            if marked[(m - 1) as usize] {
                return Err(Error::InvalidMarks {
                    reason: format!("vertex {m} marked twice"),
                });
            }
            marked[(m - 1) as usize] = true;
        }
        let k = marks.len() as u64;
        if k == 0 || k > n_vertices - 1 {
            return Err(Error::InvalidK { k, n_vertices });
        }

        let vertices: Vec<u64> = (1..g.n()).filter(|&v| !marked[(v - 1) as usize]).collect();
        let dim = vertices.len();
        let mut row_of = vec![usize::MAX; n_vertices as usize];
        for (r, &v) in vertices.iter().enumerate() {
            row_of[(v - 1) as usize] = r;
        }

        let mut matrix = Array2::<f64>::zeros((dim, dim));
        let mut max_diagonal = 0.0f64;
        for (r, &v) in vertices.iter().enumerate() {
            let deg = g.degree(v) as f64;
            matrix[[r, r]] = deg;
            max_diagonal = max_diagonal.max(deg);
            for &u in g.neighbors(v) {
                let c = row_of[(u - 1) as usize];
                if c != usize::MAX {
                    matrix[[r, c]] = -1.0;
                }
            }
        }

        Ok(GroundedLaplacian {
            matrix,
            vertices,
            n: g.n(),
            max_diagonal,
        })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Unmarked vertex labels in row order.
    pub fn vertices(&self) -> &[u64] {
        &self.vertices
    }

    /// Row index of vertex `v`, if unmarked.
    pub fn row_of(&self, v: u64) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    /// Dimension `N - 1 - k`.
    pub fn dim(&self) -> usize {
        self.vertices.len()
    }

    /// The semiprime the underlying graph was built for.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Gershgorin bound `λ_max <= 2·max(L_ii)`.
    pub fn lambda_max_bound(&self) -> f64 {
        2.0 * self.max_diagonal
    }
}

/// Default step size `1/(2·max_degree + 1)`: Gershgorin guarantees
/// `dt < 1/λ_max` without an eigensolve.
pub fn default_dt(g: &OrbitGraph) -> f64 {
    1.0 / (2.0 * g.max_degree() as f64 + 1.0)
}

/// Walking matrix `E = I - L_p·Δt`; entrywise nonnegative under the
/// stability bound.
///
/// `dt` must satisfy `dt·λ_max < 1`, enforced through the Gershgorin bound
/// `λ_max <= 2·max(L_ii)`; `dt = 0` is allowed and yields the identity.
pub fn walking_matrix(lp: &GroundedLaplacian, dt: f64) -> Result<Array2<f64>> {
    let bound = if lp.lambda_max_bound() > 0.0 {
        1.0 / lp.lambda_max_bound()
    } else {
        f64::INFINITY
    };
    if !dt.is_finite() || dt < 0.0 || dt >= bound {
        return Err(Error::InvalidDt { dt, bound });
    }
    let dim = lp.dim();
    let mut e = lp.matrix() * (-dt);
    for i in 0..dim {
        e[[i, i]] += 1.0;
    }
    Ok(e)
}

/// ℓ1-normalized nonnegative distribution over unmarked vertices.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub distribution: Array1<f64>,
    pub t: u64,
}

impl WalkState {
    /// Uniform start `1/(N-1-k)` on the unmarked vertices.
    pub fn uniform(dim: usize) -> WalkState {
        WalkState {
            distribution: Array1::from_elem(dim, 1.0 / dim as f64),
            t: 0,
        }
    }
}

/// One renormalized step: `P(t) = (1 + W/S)·E·P(t-1)` with
/// `S = ‖E·P‖₁`, `W = 1 - S`.
pub fn step(state: &WalkState, e: &Array2<f64>) -> Result<WalkState> {
    let v = e.dot(&state.distribution);
    let s: f64 = v.iter().map(|x| x.abs()).sum();
    if s <= 0.0 {
        return Err(Error::AbsorbedAll);
    }
    let w = 1.0 - s;
    let next = &v * (1.0 + w / s);
    // algebraic identity: (1 + W/S)·v = v/S
    for (a, b) in next.iter().zip(v.iter()) {
        debug_assert!((a - b / s).abs() <= 1e-12, "renormalization identity violated");
    }
    Ok(WalkState {
        distribution: next,
        t: state.t + 1,
    })
}

/// Full trajectory record of one walk run.
#[derive(Debug, Clone)]
pub struct WalkTrace {
    /// Unmarked vertex labels, in row order of every snapshot.
    pub vertices: Vec<u64>,
    /// `(t, distribution)` at the requested cadence plus start and end.
    pub snapshots: Vec<(u64, Array1<f64>)>,
    pub final_state: WalkState,
    pub converged: bool,
    pub iterations: u64,
}

/// Iterate the walk from the uniform start until the ℓ∞ change between
/// successive distributions drops below `tol` or `max_iters` is reached.
///
/// Snapshots are taken at `t = 0`, every `snapshot_cadence` steps, and at
/// the final step.
pub fn run(
    g: &OrbitGraph,
    marks: &[u64],
    dt: f64,
    max_iters: u64,
    tol: f64,
    snapshot_cadence: u64,
) -> Result<WalkTrace> {
    let lp = GroundedLaplacian::build(g, marks)?;
    run_on(&lp, dt, max_iters, tol, snapshot_cadence)
}

/// [`run`] on a prebuilt grounded Laplacian.
pub fn run_on(
    lp: &GroundedLaplacian,
    dt: f64,
    max_iters: u64,
    tol: f64,
    snapshot_cadence: u64,
) -> Result<WalkTrace> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput {
            reason: format!("tolerance {tol} must be positive"),
        });
    }
    let e = walking_matrix(lp, dt)?;
    let cadence = snapshot_cadence.max(1);

    let mut state = WalkState::uniform(lp.dim());
    let mut snapshots = vec![(0u64, state.distribution.clone())];
    let mut converged = false;
    while state.t < max_iters {
        let next = step(&state, &e)?;
        let linf = state
            .distribution
            .iter()
            .zip(next.distribution.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        state = next;
        if state.t % cadence == 0 {
            snapshots.push((state.t, state.distribution.clone()));
        }
        if linf < tol {
            converged = true;
            break;
        }
    }
    if snapshots.last().map(|(t, _)| *t) != Some(state.t) {
        snapshots.push((state.t, state.distribution.clone()));
    }
    Ok(WalkTrace {
        vertices: lp.vertices().to_vec(),
        snapshots,
        final_state: state.clone(),
        converged,
        iterations: state.t,
    })
}

/// Scan vertices with mass above `eps` for a nontrivial `gcd` with `N`.
pub fn extract_factor(state: &WalkState, lp: &GroundedLaplacian, eps: f64) -> Option<FactorPair> {
    for (row, &v) in lp.vertices().iter().enumerate() {
        if state.distribution[row] > eps {
            let g = numtheory::gcd(v, lp.n());
            if g != 1 && g != lp.n() {
                if let Ok(pair) = FactorPair::new(g, lp.n() / g) {
                    return Some(pair);
                }
            }
        }
    }
    None
}
