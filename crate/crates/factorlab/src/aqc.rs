//! Simulated adiabatic evolution of the marked orbit graph.
//!
//! The problem Hamiltonian is the grounded Laplacian; the initial
//! Hamiltonian `H_I = I - (1/n)·J` has the uniform state as its unique
//! ground state. Evolving `dψ/ds = -i·T·H(s)·ψ` with `H(s) = (1-s)H_I + sH_p`
//! under the constant schedule `s = t/T` and squaring the final amplitudes
//! gives the quantum counterpart of the classical walk's limit: the
//! ℓ1-normalized square roots of `|ψ(1)|²` are compared against the walk
//! distribution by cosine similarity.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::orbitgraph::OrbitGraph;
use crate::walk::GroundedLaplacian;

/// Maximum tolerated pre-renormalization norm drift per integrator step.
pub const MAX_STEP_DRIFT: f64 = 1e-6;

/// Interpolating Hamiltonian pair with the total evolution time.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    h_initial: Array2<f64>,
    h_problem: Array2<f64>,
    t_final: f64,
    /// Vertex label per row.
    vertices: Vec<u64>,
    /// Rows that carry amplitude at `s = 0` (all rows for the reduced
    /// system; unmarked rows for the full-dimension variant).
    active_rows: Vec<usize>,
    n: u64,
}

/// Complex amplitude vector at schedule coordinate `s`.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub amplitudes: Array1<Complex64>,
    pub s: f64,
}

impl QuantumState {
    pub fn l2_norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Everything one integration run produced.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    /// States at the snapshot cadence, starting with `s = 0`.
    pub snapshots: Vec<QuantumState>,
    pub final_state: QuantumState,
    /// Largest per-step pre-renormalization drift `|‖ψ‖₂ - 1|`.
    pub max_norm_drift: f64,
    pub steps: u64,
}

/// Measurement view of the final state: probabilities and ℓ1-normalized
/// amplitude magnitudes, indexed by vertex label.
#[derive(Debug, Clone)]
pub struct AmplitudeResult {
    pub vertices: Vec<u64>,
    pub probs: Vec<f64>,
    pub amps: Vec<f64>,
}

fn validate_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidTime { t });
    }
    Ok(())
}

/// `I - (1/n)·J`: eigenvalue 0 on the uniform vector, 1 elsewhere.
fn initial_hamiltonian(n: usize) -> Array2<f64> {
    let mut h = Array2::<f64>::from_elem((n, n), -1.0 / n as f64);
    for i in 0..n {
        h[[i, i]] += 1.0;
    }
    h
}

/// Reduced system of Definition 4.1: `H_p` with marked rows and columns
/// deleted, `H_I` at the matching dimension `n = N-1-k`.
pub fn build_system(g: &OrbitGraph, marks: &[u64], t_final: f64) -> Result<HamiltonianSystem> {
    validate_time(t_final)?;
    let lp = GroundedLaplacian::build(g, marks)?;
    let dim = lp.dim();
    Ok(HamiltonianSystem {
        h_initial: initial_hamiltonian(dim),
        h_problem: lp.matrix().clone(),
        t_final,
        vertices: lp.vertices().to_vec(),
        active_rows: (0..dim).collect(),
        n: g.n(),
    })
}

/// Full-dimension variant: instead of deleting marked rows and columns,
/// zero them and put 1 on the diagonal, in both Hamiltonians. Marked
/// amplitudes start at zero and provably stay there, so the unmarked block
/// evolves exactly like the reduced system.
pub fn build_full_system(g: &OrbitGraph, marks: &[u64], t_final: f64) -> Result<HamiltonianSystem> {
    validate_time(t_final)?;
    let lp = GroundedLaplacian::build(g, marks)?;
    let m = g.vertex_count() as usize;
    let unmarked = lp.vertices();
    let dim_reduced = unmarked.len();

    let mut h_problem = g.laplacian();
    let mut is_marked = vec![true; m];
    for &v in unmarked {
        is_marked[(v - 1) as usize] = false;
    }
    for i in 0..m {
        if is_marked[i] {
            for j in 0..m {
                h_problem[[i, j]] = 0.0;
                h_problem[[j, i]] = 0.0;
            }
            h_problem[[i, i]] = 1.0;
        }
    }

    let mut h_initial = Array2::<f64>::zeros((m, m));
    for (a, &u) in unmarked.iter().enumerate() {
        for (b, &v) in unmarked.iter().enumerate() {
            let base = if a == b { 1.0 } else { 0.0 };
            h_initial[[(u - 1) as usize, (v - 1) as usize]] = base - 1.0 / dim_reduced as f64;
        }
    }
    for i in 0..m {
        if is_marked[i] {
            h_initial[[i, i]] = 1.0;
        }
    }

    Ok(HamiltonianSystem {
        h_initial,
        h_problem,
        t_final,
        vertices: (1..g.n()).collect(),
        active_rows: unmarked.iter().map(|&v| (v - 1) as usize).collect(),
        n: g.n(),
    })
}

impl HamiltonianSystem {
    pub fn dim(&self) -> usize {
        self.vertices.len()
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn vertices(&self) -> &[u64] {
        &self.vertices
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn h_initial(&self) -> &Array2<f64> {
        &self.h_initial
    }

    pub fn h_problem(&self) -> &Array2<f64> {
        &self.h_problem
    }

    /// Ground state of `H_I` restricted to the active rows: `1/√n` on each.
    pub fn initial_state(&self) -> QuantumState {
        let mut amplitudes = Array1::<Complex64>::zeros(self.vertices.len());
        let a = 1.0 / (self.active_rows.len() as f64).sqrt();
        for &r in &self.active_rows {
            amplitudes[r] = Complex64::new(a, 0.0);
        }
        QuantumState { amplitudes, s: 0.0 }
    }
}

/// Uniform ground state `(1/√n, …, 1/√n)` of the reduced `H_I`.
pub fn ground_state_initial(n: usize) -> QuantumState {
    QuantumState {
        amplitudes: Array1::from_elem(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0)),
        s: 0.0,
    }
}

/// Default step count `max(1000, ceil(20·T·(2·max_degree + 1)))`, keeping
/// the local step size proportional to `1/(T·‖H‖)`.
pub fn default_steps(t_final: f64, max_degree: usize) -> u64 {
    let scaled = (20.0 * t_final * (2.0 * max_degree as f64 + 1.0)).ceil();
    (scaled as u64).max(1000)
}

/// Integrate `dψ/ds = -i·T·H(s)·ψ` over `s ∈ [0,1]` with classic
/// fixed-step RK4, renormalizing each step and recording the drift.
///
/// Snapshots are taken at `s = 0`, every `snapshot_cadence` steps, and at
/// `s = 1`. Per-step drift above [`MAX_STEP_DRIFT`] signals
/// `step-too-coarse`: the caller must raise `steps`.
pub fn evolve(
    sys: &HamiltonianSystem,
    psi0: &QuantumState,
    steps: u64,
    snapshot_cadence: u64,
) -> Result<EvolutionTrace> {
    let n = sys.dim();
    if psi0.amplitudes.len() != n {
        return Err(Error::InvalidInput {
            reason: format!("state has dimension {}, system {n}", psi0.amplitudes.len()),
        });
    }
    if steps == 0 {
        return Err(Error::InvalidInput {
            reason: "at least one integration step is required".into(),
        });
    }
    if (psi0.l2_norm() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput {
            reason: format!("initial state norm {} is not 1", psi0.l2_norm()),
        });
    }
    let cadence = snapshot_cadence.max(1);
    let t = sys.t_final;
    let h = 1.0 / steps as f64;

    let mut x: Array1<f64> = psi0.amplitudes.mapv(|a| a.re);
    let mut y: Array1<f64> = psi0.amplitudes.mapv(|a| a.im);

    let apply_h = |s: f64, z: &Array1<f64>| -> Array1<f64> {
        sys.h_initial.dot(z) * (1.0 - s) + sys.h_problem.dot(z) * s
    };
    // psi = x + iy and dpsi/ds = -iT·H·psi splits into
    // dx/ds = T·H·y, dy/ds = -T·H·x
    let deriv = |s: f64, x: &Array1<f64>, y: &Array1<f64>| -> (Array1<f64>, Array1<f64>) {
        (apply_h(s, y) * t, apply_h(s, x) * (-t))
    };

    let to_state = |x: &Array1<f64>, y: &Array1<f64>, s: f64| -> QuantumState {
        let mut amplitudes = Array1::<Complex64>::zeros(n);
        for i in 0..n {
            amplitudes[i] = Complex64::new(x[i], y[i]);
        }
        QuantumState { amplitudes, s }
    };

    let mut snapshots = vec![to_state(&x, &y, 0.0)];
    let mut max_drift = 0.0f64;

    for step in 0..steps {
        let s0 = step as f64 * h;
        let (k1x, k1y) = deriv(s0, &x, &y);
        let (k2x, k2y) = deriv(s0 + 0.5 * h, &(&x + &(&k1x * (0.5 * h))), &(&y + &(&k1y * (0.5 * h))));
        let (k3x, k3y) = deriv(s0 + 0.5 * h, &(&x + &(&k2x * (0.5 * h))), &(&y + &(&k2y * (0.5 * h))));
        let (k4x, k4y) = deriv(s0 + h, &(&x + &(&k3x * h)), &(&y + &(&k3y * h)));
        x = &x + &((k1x + &k2x * 2.0 + &k3x * 2.0 + k4x) * (h / 6.0));
        y = &y + &((k1y + &k2y * 2.0 + &k3y * 2.0 + k4y) * (h / 6.0));

        let norm = (x.iter().map(|v| v * v).sum::<f64>() + y.iter().map(|v| v * v).sum::<f64>())
            .sqrt();
        let drift = (norm - 1.0).abs();
        if !drift.is_finite() || drift > MAX_STEP_DRIFT {
            return Err(Error::StepTooCoarse {
                step: step + 1,
                drift,
            });
        }
        max_drift = max_drift.max(drift);
        x.mapv_inplace(|v| v / norm);
        y.mapv_inplace(|v| v / norm);

        let done = step + 1 == steps;
        if (step + 1) % cadence == 0 || done {
            let s = if done { 1.0 } else { (step + 1) as f64 * h };
            snapshots.push(to_state(&x, &y, s));
        }
    }

    let final_state = snapshots.last().expect("at least the initial snapshot").clone();
    Ok(EvolutionTrace {
        snapshots,
        final_state,
        max_norm_drift: max_drift,
        steps,
    })
}

/// Measurement probabilities `|ψ(1)|²` and their ℓ1-normalized square
/// roots, labeled by vertex.
pub fn amplitudes(sys: &HamiltonianSystem, final_state: &QuantumState) -> Result<AmplitudeResult> {
    if final_state.amplitudes.len() != sys.dim() {
        return Err(Error::InvalidInput {
            reason: "state dimension does not match system".into(),
        });
    }
    if (final_state.s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput {
            reason: format!("amplitudes are read at s = 1, state is at s = {}", final_state.s),
        });
    }
    let probs: Vec<f64> = final_state.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let mut amps: Vec<f64> = probs.iter().map(|p| p.sqrt()).collect();
    let l1: f64 = amps.iter().sum();
    if l1 <= 0.0 {
        return Err(Error::InvalidInput {
            reason: "zero state has no amplitude distribution".into(),
        });
    }
    for a in &mut amps {
        *a /= l1;
    }
    Ok(AmplitudeResult {
        vertices: sys.vertices.clone(),
        probs,
        amps,
    })
}

/// `⟨u,v⟩ / (‖u‖₂·‖v‖₂)` for nonnegative vectors.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput {
            reason: format!("length mismatch: {} vs {}", u.len(), v.len()),
        });
    }
    if u.iter().chain(v.iter()).any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidInput {
            reason: "cosine similarity expects finite nonnegative entries".into(),
        });
    }
    let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidInput {
            reason: "cosine similarity of a zero vector".into(),
        });
    }
    let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).min(1.0))
}
