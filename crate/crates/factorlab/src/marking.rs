//! Mark-set success conditions and `P(k)` estimation.
//!
//! A mark set succeeds *strictly* when every black component contains a mark
//! and some red or blue component contains none. The *weak* criterion asks
//! only that the walk's limiting distribution lives on non-black vertices,
//! which the spectral projection answers without running the walk. `P(k)` —
//! the probability that a uniform k-subset succeeds — is computed exactly by
//! subset enumeration where feasible and otherwise estimated by seeded,
//! reproducible Monte Carlo.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numtheory::{self, FactorPair};
use crate::orbitgraph::{CycleDecomposition, OrbitGraph, VertexClass};
use crate::spectral;
use crate::walk::GroundedLaplacian;

/// Default subset budget for exact enumeration.
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

/// Which success predicate a probability refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessMode {
    Strict,
    Weak,
}

/// Default threshold below which limiting mass counts as vanished:
/// `1/(2·(N-1))`, strictly below any plausible uniform share.
pub fn default_weak_eps(n: u64) -> f64 {
    1.0 / (2.0 * (n - 1) as f64)
}

/// Sorted distinct wormhole vertices; at least one vertex stays unmarked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkSet {
    vertices: Vec<u64>,
}

impl MarkSet {
    /// Validate and sort a mark list for a graph on `n_vertices` vertices.
    pub fn new(mut vertices: Vec<u64>, n_vertices: u64) -> Result<MarkSet> {
        let k = vertices.len() as u64;
        if k == 0 || k > n_vertices.saturating_sub(1) {
            return Err(Error::InvalidK { k, n_vertices });
        }
        vertices.sort_unstable();
        for pair in vertices.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidMarks {
                    reason: format!("vertex {} marked twice", pair[0]),
                });
            }
        }
        if vertices[0] == 0 || *vertices.last().unwrap() > n_vertices {
            return Err(Error::InvalidMarks {
                reason: format!("marks must lie in 1..={n_vertices}"),
            });
        }
        Ok(MarkSet { vertices })
    }

    pub fn vertices(&self) -> &[u64] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Deterministic per-trial RNG: one master seed, one ChaCha stream per
/// trial index, so results never depend on scheduling.
pub fn substream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniformly random k-subset of `{1, …, n_vertices}` without replacement.
pub fn sample_marks<R: Rng + ?Sized>(n_vertices: u64, k: u64, rng: &mut R) -> Result<MarkSet> {
    if k == 0 || k > n_vertices.saturating_sub(1) {
        return Err(Error::InvalidK { k, n_vertices });
    }
    let mut vertices: Vec<u64> = rand::seq::index::sample(rng, n_vertices as usize, k as usize)
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect();
    vertices.sort_unstable();
    Ok(MarkSet { vertices })
}

/// Strict success: every black component holds a mark and at least one red
/// or blue component holds none.
pub fn check_strict(decomp: &CycleDecomposition, marks: &MarkSet) -> bool {
    let mut hit = vec![false; decomp.component_count()];
    for &v in marks.vertices() {
        hit[decomp.component_index(v)] = true;
    }
    let mut all_black_hit = true;
    let mut some_rb_free = false;
    for (i, c) in decomp.components().iter().enumerate() {
        match c.class {
            VertexClass::Black => all_black_hit &= hit[i],
            VertexClass::Red | VertexClass::Blue => some_rb_free |= !hit[i],
        }
    }
    all_black_hit && some_rb_free
}

/// Weak success: every vertex carrying limiting mass above `eps` shares a
/// factor with `N`. The limit is the spectral projection of the uniform
/// start onto the minimal eigenspace of the grounded Laplacian.
pub fn check_weak(
    g: &OrbitGraph,
    factors: &FactorPair,
    marks: &MarkSet,
    eps: f64,
) -> Result<bool> {
    assert_eq!(factors.n(), g.n(), "factor pair does not match graph modulus");
    if !(eps > 0.0) {
        return Err(Error::InvalidInput {
            reason: format!("eps {eps} must be positive"),
        });
    }
    let lp = GroundedLaplacian::build(g, marks.vertices())?;
    let start = Array1::from_elem(lp.dim(), 1.0 / lp.dim() as f64);
    let limit = spectral::minimal_space_projection_auto(lp.matrix(), &start)?;
    for (row, &v) in lp.vertices().iter().enumerate() {
        if limit[row] > eps && numtheory::gcd(v, g.n()) == 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Monte Carlo estimate of a success probability.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SuccessEstimate {
    pub k: u64,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub std_err: f64,
}

/// `C(n, k)` capped at `cap` to keep the arithmetic honest for large inputs.
fn binomial_capped(n: u64, k: u64, cap: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // multiply first, divide by i+1: product of consecutive binomials stays integral
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return cap,
        };
        if acc >= cap {
            return cap;
        }
    }
    acc
}

struct StrictCounter<'a> {
    decomp: &'a CycleDecomposition,
    n_vertices: u64,
    comp_marks: Vec<u32>,
    covered_black: usize,
    black_total: usize,
    rb_unmarked: usize,
}

impl<'a> StrictCounter<'a> {
    fn new(decomp: &'a CycleDecomposition) -> Self {
        let black_total = decomp
            .components()
            .iter()
            .filter(|c| c.class == VertexClass::Black)
            .count();
        let rb_total = decomp.component_count() - black_total;
        StrictCounter {
            decomp,
            n_vertices: decomp.n() - 1,
            comp_marks: vec![0; decomp.component_count()],
            covered_black: 0,
            black_total,
            rb_unmarked: rb_total,
        }
    }

    fn mark(&mut self, v: u64) {
        let c = self.decomp.component_index(v);
        if self.comp_marks[c] == 0 {
            match self.decomp.components()[c].class {
                VertexClass::Black => self.covered_black += 1,
                _ => self.rb_unmarked -= 1,
            }
        }
        self.comp_marks[c] += 1;
    }

    fn unmark(&mut self, v: u64) {
        let c = self.decomp.component_index(v);
        self.comp_marks[c] -= 1;
        if self.comp_marks[c] == 0 {
            match self.decomp.components()[c].class {
                VertexClass::Black => self.covered_black -= 1,
                _ => self.rb_unmarked += 1,
            }
        }
    }

    /// Count successful completions choosing `remaining` more marks from
    /// `from..`. Prunes subtrees where no completion can succeed: marks only
    /// accumulate, so a dead condition 2 stays dead, and each new mark
    /// covers at most one uncovered black component.
    fn count(&mut self, from: u64, remaining: u64) -> u64 {
        if self.rb_unmarked == 0 {
            return 0;
        }
        if (self.black_total - self.covered_black) as u64 > remaining {
            return 0;
        }
        if remaining == 0 {
            return 1; // both conditions hold by the checks above
        }
        let mut total = 0;
        let last = self.n_vertices - remaining + 1;
        for v in from..=last {
            self.mark(v);
            total += self.count(v + 1, remaining - 1);
            self.unmark(v);
        }
        total
    }
}

/// Exact number of successful k-subsets plus the total subset count,
/// enumerated within `budget`.
pub fn exact_success_count_with_budget(
    g: &OrbitGraph,
    factors: &FactorPair,
    k: u64,
    mode: SuccessMode,
    budget: u64,
) -> Result<(u64, u128)> {
    let n_vertices = g.vertex_count();
    if k == 0 || k > n_vertices - 1 {
        return Err(Error::InvalidK { k, n_vertices });
    }
    let total = binomial_capped(n_vertices, k, budget as u128 + 1);
    if total > budget as u128 {
        return Err(Error::UseMonteCarlo {
            subsets: total,
            budget,
        });
    }
    let decomp = crate::orbitgraph::decompose(g, factors);
    match mode {
        SuccessMode::Strict => {
            let mut counter = StrictCounter::new(&decomp);
            Ok((counter.count(1, k), total))
        }
        SuccessMode::Weak => {
            let eps = default_weak_eps(g.n());
            let mut successes = 0u64;
            let mut subset: Vec<u64> = (1..=k).collect();
            loop {
                let marks = MarkSet {
                    vertices: subset.clone(),
                };
                if check_weak(g, factors, &marks, eps)? {
                    successes += 1;
                }
                // next k-subset in lexicographic order
                let mut i = k as usize;
                loop {
                    if i == 0 {
                        return Ok((successes, total));
                    }
                    i -= 1;
                    if subset[i] < n_vertices - (k - 1 - i as u64) {
                        subset[i] += 1;
                        for j in i + 1..k as usize {
                            subset[j] = subset[j - 1] + 1;
                        }
                        break;
                    }
                }
            }
        }
    }
}

/// Exact `P(k)` with the default enumeration budget.
pub fn exact_success_prob(
    g: &OrbitGraph,
    factors: &FactorPair,
    k: u64,
    mode: SuccessMode,
) -> Result<f64> {
    let (successes, total) =
        exact_success_count_with_budget(g, factors, k, mode, DEFAULT_ENUM_BUDGET)?;
    Ok(successes as f64 / total as f64)
}

/// Monte Carlo `P(k)` over `trials` independent uniform mark sets.
///
/// Trial `t` draws from ChaCha stream `t` of `seed`, so the estimate is
/// bit-identical however the trials are scheduled across threads.
pub fn estimate_success_prob(
    g: &OrbitGraph,
    factors: &FactorPair,
    k: u64,
    trials: u64,
    mode: SuccessMode,
    seed: u64,
) -> Result<SuccessEstimate> {
    let n_vertices = g.vertex_count();
    if trials == 0 {
        return Err(Error::InvalidInput {
            reason: "at least one trial is required".into(),
        });
    }
    if k == 0 || k > n_vertices - 1 {
        return Err(Error::InvalidK { k, n_vertices });
    }

    let successes = match mode {
        SuccessMode::Strict => {
            let decomp = crate::orbitgraph::decompose(g, factors);
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = substream_rng(seed, t);
                    let marks = sample_marks(n_vertices, k, &mut rng).expect("validated k");
                    check_strict(&decomp, &marks) as u64
                })
                .sum::<u64>()
        }
        SuccessMode::Weak => {
            let eps = default_weak_eps(g.n());
            (0..trials)
                .into_par_iter()
                .map(|t| -> Result<u64> {
                    let mut rng = substream_rng(seed, t);
                    let marks = sample_marks(n_vertices, k, &mut rng).expect("validated k");
                    Ok(check_weak(g, factors, &marks, eps)? as u64)
                })
                .try_reduce(|| 0, |a, b| Ok(a + b))?
        }
    };

    let p_hat = successes as f64 / trials as f64;
    let std_err = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    Ok(SuccessEstimate {
        k,
        trials,
        successes,
        p_hat,
        std_err,
    })
}
