//! Event-driven continuous-time random walk on the tree.
//!
//! Unit-mean exponential holding at every vertex, then a jump to a uniformly
//! chosen neighbor. Local time is occupation time divided by degree. This is
//! the reference engine: a plain event loop with no variance reduction.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{domain, Result};
use crate::tree::{TreeParams, VertexRef};

/// Local time of every vertex, in heap order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeField {
    params: TreeParams,
    values: Vec<f64>,
}

impl LocalTimeField {
    pub fn get(&self, v: VertexRef) -> Result<f64> {
        Ok(self.values[self.params.heap_id(v)?])
    }

    pub fn root(&self) -> f64 {
        self.values[0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn leaves(&self) -> &[f64] {
        &self.values[(self.params.leaf_count() - 1) as usize..]
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    /// `Σ_v d_v L^v`, the total wall-clock time represented by the field.
    pub fn occupation_total(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(id, x)| {
                let level = VertexRef::from_heap_id(id).level;
                self.params.degree_unchecked(level) as f64 * x
            })
            .sum()
    }

    /// True when no zero vertex has a nonzero descendant.
    pub fn is_zero_shielded(&self) -> bool {
        (1..self.values.len()).all(|id| {
            let parent = (id - 1) / 2;
            self.values[parent] != 0.0 || self.values[id] == 0.0
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkOutcome {
    /// Wall-clock value of `τ(t)`; absent for cover-only runs.
    pub tau_t: Option<f64>,
    /// First time every vertex has been visited, when it happened within
    /// the run.
    pub cover_time: Option<f64>,
    pub covered_by_tau_t: bool,
    pub jump_count: u64,
    pub field: Option<LocalTimeField>,
}

fn check_depth(p: &TreeParams) -> Result<()> {
    if p.depth() < 1 {
        return domain("the walk needs depth >= 1 (the single-vertex tree has no moves)");
    }
    Ok(())
}

/// Neighbor of heap id `v` chosen uniformly.
#[inline]
fn step<R: Rng + ?Sized>(v: usize, first_leaf: usize, rng: &mut R) -> usize {
    if v == 0 {
        1 + rng.random_range(0..2usize)
    } else if v >= first_leaf {
        (v - 1) / 2
    } else {
        match rng.random_range(0..3u32) {
            0 => (v - 1) / 2,
            1 => 2 * v + 1,
            _ => 2 * v + 2,
        }
    }
}

/// Runs until the root's local time reaches `t`. The final holding interval
/// at the root is cut short so the root local time equals `t` exactly.
pub fn run_until_inverse_local_time<R: Rng + ?Sized>(
    p: &TreeParams,
    t: f64,
    rng: &mut R,
    keep_field: bool,
) -> Result<WalkOutcome> {
    check_depth(p)?;
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t = {t} must be positive and finite"));
    }
    let vertices = p.vertex_count() as usize;
    let first_leaf = (p.leaf_count() - 1) as usize;
    let mut local = vec![0.0f64; vertices];
    let mut visited = vec![false; vertices];
    visited[0] = true;
    let mut unvisited = vertices - 1;
    let mut clock = 0.0f64;
    let mut jumps = 0u64;
    let mut cover_time = None;
    let mut v = 0usize;

    let tau = loop {
        let hold: f64 = Exp1.sample(rng);
        if v == 0 {
            let gained = hold / 2.0;
            if local[0] + gained >= t {
                let tau = clock + 2.0 * (t - local[0]);
                local[0] = t;
                break tau;
            }
            local[0] += gained;
        } else if v >= first_leaf {
            local[v] += hold;
        } else {
            local[v] += hold / 3.0;
        }
        clock += hold;
        v = step(v, first_leaf, rng);
        jumps += 1;
        if !visited[v] {
            visited[v] = true;
            unvisited -= 1;
            if unvisited == 0 {
                cover_time = Some(clock);
            }
        }
    };

    Ok(WalkOutcome {
        tau_t: Some(tau),
        cover_time,
        covered_by_tau_t: unvisited == 0,
        jump_count: jumps,
        field: keep_field.then_some(LocalTimeField {
            params: *p,
            values: local,
        }),
    })
}

/// Runs until every vertex has been visited.
pub fn run_until_cover<R: Rng + ?Sized>(p: &TreeParams, rng: &mut R) -> Result<WalkOutcome> {
    check_depth(p)?;
    let vertices = p.vertex_count() as usize;
    let first_leaf = (p.leaf_count() - 1) as usize;
    let mut visited = vec![false; vertices];
    visited[0] = true;
    let mut unvisited = vertices - 1;
    let mut clock = 0.0f64;
    let mut jumps = 0u64;
    let mut v = 0usize;
    while unvisited > 0 {
        let hold: f64 = Exp1.sample(rng);
        clock += hold;
        v = step(v, first_leaf, rng);
        jumps += 1;
        if !visited[v] {
            visited[v] = true;
            unvisited -= 1;
        }
    }
    Ok(WalkOutcome {
        tau_t: None,
        cover_time: Some(clock),
        covered_by_tau_t: true,
        jump_count: jumps,
        field: None,
    })
}
