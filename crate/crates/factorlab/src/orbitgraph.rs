//! Multiplicative orbit graphs `G_{N,α}` and their cycle structure.
//!
//! `G_{N,α}` lives on vertices `1..N-1` with an edge between `i` and
//! `α·i mod N`; unions over several `α` overlay their edge sets. Components
//! are monochromatic in the gcd coloring, and for a single `α` the component
//! count has a closed form in terms of multiplicative orders, checked here
//! against a union-find traversal.

use std::collections::BTreeSet;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{self, FactorPair};

/// gcd-based vertex coloring: coprime to `N`, multiple of the smaller
/// factor, multiple of the larger factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexClass {
    Black,
    Red,
    Blue,
}

impl VertexClass {
    /// Classify vertex `v` of the graph for `factors.n()`.
    pub fn of(v: u64, factors: &FactorPair) -> VertexClass {
        match numtheory::gcd(v, factors.n()) {
            1 => VertexClass::Black,
            g if g == factors.p() => VertexClass::Red,
            g if g == factors.q() => VertexClass::Blue,
            // v < N and N = pq leaves no other divisor
            g => unreachable!("gcd({v}, {}) = {g}", factors.n()),
        }
    }
}

/// Construction switches for [`build_with`].
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Verify `N` is a product of two distinct primes (on by default).
    /// Skippable for exploratory graphs on arbitrary moduli.
    pub validate_semiprime: bool,
    /// Permit `alpha = 1` and `alpha = N-1`, which contribute only
    /// self-loops and 2-cycles.
    pub allow_trivial_alpha: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            validate_semiprime: true,
            allow_trivial_alpha: false,
        }
    }
}

/// Simple undirected graph on vertices `1..N-1` induced by multiplication
/// by each `α` mod `N`. Self-loops are dropped and duplicate edges
/// collapsed, so 2-cycles appear as a single edge.
#[derive(Debug, Clone)]
pub struct OrbitGraph {
    n: u64,
    alphas: Vec<u64>,
    /// Sorted unique edges with `u < v`.
    edges: Vec<(u64, u64)>,
    /// Neighbor lists indexed by `vertex - 1`.
    neighbors: Vec<Vec<u64>>,
}

/// Build `G_{N,α₁} ∪ … ∪ G_{N,αₘ}` with default validation.
pub fn build(n: u64, alphas: &[u64]) -> Result<OrbitGraph> {
    build_with(n, alphas, BuildOptions::default())
}

/// Build with explicit [`BuildOptions`].
pub fn build_with(n: u64, alphas: &[u64], opts: BuildOptions) -> Result<OrbitGraph> {
    if opts.validate_semiprime {
        numtheory::factor_by_trial_division(n)?;
    } else if n < 3 {
        return Err(Error::InvalidInput {
            reason: format!("N={n} leaves no usable vertex set"),
        });
    }
    if alphas.is_empty() {
        return Err(Error::InvalidInput {
            reason: "at least one alpha is required".into(),
        });
    }
    for &alpha in alphas {
        if alpha == 0 || alpha >= n {
            return Err(Error::InvalidAlpha {
                alpha,
                n,
                reason: "alpha must lie in 1..N-1".into(),
            });
        }
        if !numtheory::is_totative(alpha, n) {
            return Err(Error::InvalidAlpha {
                alpha,
                n,
                reason: format!("gcd(alpha, N) = {} != 1", numtheory::gcd(alpha, n)),
            });
        }
        if !opts.allow_trivial_alpha && (alpha == 1 || alpha == n - 1) {
            return Err(Error::InvalidAlpha {
                alpha,
                n,
                reason: "alpha = 1 and alpha = N-1 give only self-loops and 2-cycles; \
                         pass allow_trivial_alpha to use them"
                    .into(),
            });
        }
    }

    let mut alphas = alphas.to_vec();
    alphas.sort_unstable();
    alphas.dedup();

    let mut edge_set: BTreeSet<(u64, u64)> = BTreeSet::new();
    for &alpha in &alphas {
        for i in 1..n {
            let j = numtheory::mul_mod(alpha, i, n);
            if i != j {
                edge_set.insert((i.min(j), i.max(j)));
            }
        }
    }
    let edges: Vec<(u64, u64)> = edge_set.into_iter().collect();
    let mut neighbors = vec![Vec::new(); (n - 1) as usize];
    for &(u, v) in &edges {
        neighbors[(u - 1) as usize].push(v);
        neighbors[(v - 1) as usize].push(u);
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }

    Ok(OrbitGraph {
        n,
        alphas,
        edges,
        neighbors,
    })
}

impl OrbitGraph {
    /// The modulus `N`; vertices are `1..N-1`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of vertices, `N - 1`.
    pub fn vertex_count(&self) -> u64 {
        self.n - 1
    }

    /// The multipliers the graph was built from, sorted and deduplicated.
    pub fn alphas(&self) -> &[u64] {
        &self.alphas
    }

    /// Sorted unique edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[(u64, u64)] {
        &self.edges
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: u64) -> &[u64] {
        &self.neighbors[(v - 1) as usize]
    }

    /// Degree of `v` in the simple graph.
    pub fn degree(&self, v: u64) -> usize {
        self.neighbors[(v - 1) as usize].len()
    }

    /// Maximum vertex degree; 0 for an edgeless graph.
    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Combinatorial Laplacian `L = D - A` of the simple graph,
    /// `(N-1) x (N-1)` with row/column `i` for vertex `i + 1`.
    pub fn laplacian(&self) -> Array2<f64> {
        let m = (self.n - 1) as usize;
        let mut l = Array2::<f64>::zeros((m, m));
        for v in 1..self.n {
            l[[(v - 1) as usize, (v - 1) as usize]] = self.degree(v) as f64;
        }
        for &(u, v) in &self.edges {
            l[[(u - 1) as usize, (v - 1) as usize]] = -1.0;
            l[[(v - 1) as usize, (u - 1) as usize]] = -1.0;
        }
        l
    }
}

/// One monochromatic connected component.
#[derive(Debug, Clone, Serialize)]
pub struct Component {
    pub class: VertexClass,
    /// Ascending vertex labels.
    pub vertices: Vec<u64>,
}

/// Connected components of an orbit graph with their color classes.
///
/// Components partition `1..N-1` and are ordered by smallest member.
#[derive(Debug, Clone)]
pub struct CycleDecomposition {
    n: u64,
    alphas: Vec<u64>,
    components: Vec<Component>,
    /// `vertex - 1` -> index into `components`.
    component_of: Vec<usize>,
}

/// Per-class component counts; for a single `α` each summand matches the
/// closed-form cycle count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CycleCountBreakdown {
    pub red_count: u64,
    pub blue_count: u64,
    pub black_count: u64,
    pub total: u64,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn unite(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Split the graph into connected components and label each with its color.
///
/// Panics if `factors` describes a different modulus than the graph, and if
/// any component turns out polychromatic — multiplication by a unit permutes
/// each gcd class, so that would mean the construction itself is broken.
pub fn decompose(g: &OrbitGraph, factors: &FactorPair) -> CycleDecomposition {
    assert_eq!(
        factors.n(),
        g.n(),
        "factor pair is for N={}, graph has N={}",
        factors.n(),
        g.n()
    );
    let m = (g.n - 1) as usize;
    let mut uf = UnionFind::new(m);
    for &(u, v) in &g.edges {
        uf.unite((u - 1) as usize, (v - 1) as usize);
    }

    let mut root_to_comp: Vec<usize> = vec![usize::MAX; m];
    let mut components: Vec<Component> = Vec::new();
    let mut component_of = vec![0usize; m];
    for v in 1..g.n {
        let idx = (v - 1) as usize;
        let root = uf.find(idx);
        let comp = if root_to_comp[root] == usize::MAX {
            let id = components.len();
            root_to_comp[root] = id;
            components.push(Component {
                class: VertexClass::of(v, factors),
                vertices: Vec::new(),
            });
            id
        } else {
            root_to_comp[root]
        };
        let class = VertexClass::of(v, factors);
        assert_eq!(
            components[comp].class, class,
            "component containing {v} is not monochromatic"
        );
        components[comp].vertices.push(v);
        component_of[idx] = comp;
    }

    CycleDecomposition {
        n: g.n,
        alphas: g.alphas.clone(),
        components,
        component_of,
    }
}

impl CycleDecomposition {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphas(&self) -> &[u64] {
        &self.alphas
    }

    /// Components ordered by smallest vertex.
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Index into [`components`](Self::components) for vertex `v`.
    pub fn component_index(&self, v: u64) -> usize {
        self.component_of[(v - 1) as usize]
    }

    /// Per-class counts from the traversal.
    pub fn counts(&self) -> CycleCountBreakdown {
        let mut red = 0;
        let mut blue = 0;
        let mut black = 0;
        for c in &self.components {
            match c.class {
                VertexClass::Red => red += 1,
                VertexClass::Blue => blue += 1,
                VertexClass::Black => black += 1,
            }
        }
        CycleCountBreakdown {
            red_count: red,
            blue_count: blue,
            black_count: black,
            total: red + blue + black,
        }
    }

    /// JSON document `{"N":…,"alphas":[…],"components":[…]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            #[serde(rename = "N")]
            n: u64,
            alphas: &'a [u64],
            components: &'a [Component],
        }
        serde_json::to_string_pretty(&Doc {
            n: self.n,
            alphas: &self.alphas,
            components: &self.components,
        })
        .expect("decomposition serializes")
    }
}

/// Closed-form component count for a single `α`:
/// `(q-1)/ord_q(α) + (p-1)/ord_p(α) + (p-1)(q-1)/lcm(ord_p(α), ord_q(α))`.
///
/// The orbit of a multiple of `p` has length `ord(α mod q)` (divide through
/// by `p`), and a coprime vertex orbits with period `lcm` of the two orders.
pub fn cycle_count_formula(factors: &FactorPair, alpha: u64) -> Result<CycleCountBreakdown> {
    let p = factors.p();
    let q = factors.q();
    let ord_mod_q = numtheory::multiplicative_order(alpha, q)?;
    let ord_mod_p = numtheory::multiplicative_order(alpha, p)?;
    let red_count = (q - 1) / ord_mod_q;
    let blue_count = (p - 1) / ord_mod_p;
    let black_count = (p - 1) * (q - 1) / numtheory::lcm(ord_mod_p, ord_mod_q);
    Ok(CycleCountBreakdown {
        red_count,
        blue_count,
        black_count,
        total: red_count + blue_count + black_count,
    })
}
