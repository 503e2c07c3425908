//! Vietoris-Rips persistent homology in degrees 0 and 1.
//!
//! H0 comes from Kruskal's scan of the sorted edges (each merge kills a
//! component). H1 pairs come from reducing the edge coboundary matrix over
//! GF(2) in reverse filtration order (persistent cohomology via the
//! anti-transpose correspondence), with clearing: columns of tree edges,
//! already paired in degree 0, reduce to zero and are skipped. This keeps
//! the column count at the edge count instead of the triangle count.
//! Columns claimed without any additions are not stored; their content is
//! the plain coboundary, regenerated on demand.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::PointCloud;

/// Row cap; larger clouds go through seeded farthest-point sampling.
pub const DEFAULT_RIPS_SUBSAMPLE: usize = 400;

/// One persistence bar. `dim` is 0 or 1; essential classes are truncated
/// at the filtration cap, so deaths are always finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
    pub dim: u8,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub bars: Vec<Bar>,
}

impl PersistenceDiagram {
    pub fn bars_in_dim(&self, dim: u8) -> Vec<(f64, f64)> {
        self.bars
            .iter()
            .filter(|b| b.dim == dim)
            .map(|b| (b.birth, b.death))
            .collect()
    }
}

/// Seeded farthest-point subsample: the start index is uniform, then each
/// round adds the point maximizing the distance to the chosen set (ties to
/// the lower index). Returns sorted indices.
pub fn farthest_point_indices(points: &Array2<f64>, target: usize, seed: u64) -> Vec<usize> {
    let n = points.nrows();
    if n <= target {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.gen_range(0..n);
    let dist2 = |a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for c in 0..points.ncols() {
            let d = points[[a, c]] - points[[b, c]];
            acc += d * d;
        }
        acc
    };
    let mut chosen = Vec::with_capacity(target);
    let mut min_d2 = vec![f64::INFINITY; n];
    chosen.push(start);
    for i in 0..n {
        min_d2[i] = dist2(i, start);
    }
    while chosen.len() < target {
        let mut best = 0;
        for i in 1..n {
            if min_d2[i] > min_d2[best] {
                best = i;
            }
        }
        chosen.push(best);
        for i in 0..n {
            let d = dist2(i, best);
            if d < min_d2[i] {
                min_d2[i] = d;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[rb.max(ra) as usize] = rb.min(ra);
        true
    }
}

/// GF(2) symmetric difference of two sorted key lists.
fn xor_columns(a: &[(u64, u32)], b: &[(u64, u32)], out: &mut Vec<(u64, u32)>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Rips persistence of a point cloud up to homology dimension 1.
///
/// `max_radius` defaults to the cloud diameter; classes still alive there
/// are truncated to die at it. Zero-persistence bars are dropped. Clouds
/// larger than `subsample_to` are reduced by farthest-point sampling.
pub fn rips_persistence(
    cloud: &PointCloud,
    max_radius: Option<f64>,
    subsample_to: usize,
    seed: u64,
) -> Result<PersistenceDiagram> {
    if cloud.len() < 3 {
        return Err(Error::insufficient(format!(
            "rips needs >= 3 points, got {}",
            cloud.len()
        )));
    }
    let idx = farthest_point_indices(cloud.points(), subsample_to.max(3), seed);
    let pts = cloud.points();
    let n = idx.len();
    let mut dist = vec![0.0_f64; n * n];
    let mut diameter = 0.0_f64;
    for a in 0..n {
        for b in (a + 1)..n {
            let mut acc = 0.0;
            for c in 0..pts.ncols() {
                let d = pts[[idx[a], c]] - pts[[idx[b], c]];
                acc += d * d;
            }
            let d = acc.sqrt();
            dist[a * n + b] = d;
            dist[b * n + a] = d;
            diameter = diameter.max(d);
        }
    }
    let cap = max_radius.unwrap_or(diameter);
    if !(cap > 0.0) {
        return Err(Error::degenerate("all points identical"));
    }

    // Edges within the cap, in filtration order (length, then lex).
    let mut edges: Vec<(f64, u32, u32)> = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let d = dist[a * n + b];
            if d <= cap {
                edges.push((d, a as u32, b as u32));
            }
        }
    }
    edges.sort_unstable_by(|x, y| x.partial_cmp(y).expect("finite distances"));

    let mut bars = Vec::new();

    // H0 by Kruskal: merging edges are component deaths. Tree edges are
    // the degree-0-paired columns cleared from the H1 reduction below.
    let mut uf = UnionFind::new(n);
    let mut components = n;
    let mut is_tree_edge = vec![false; edges.len()];
    for (r, &(d, a, b)) in edges.iter().enumerate() {
        if uf.union(a, b) {
            is_tree_edge[r] = true;
            components -= 1;
            if d > 0.0 {
                bars.push(Bar {
                    birth: 0.0,
                    death: d,
                    dim: 0,
                });
            }
        }
    }
    for _ in 0..components {
        // Essential components truncated at the cap.
        bars.push(Bar {
            birth: 0.0,
            death: cap,
            dim: 0,
        });
    }

    // H1 by persistent cohomology. Triangles are identified by a key
    // whose numeric order equals the filtration order (diameter, then
    // vertex-lexicographic); a column is the ascending key list of an
    // edge's cofacets and its pivot is the front (earliest) key.
    let pack = |a: u32, b: u32, c: u32| -> u32 { (a << 20) | (b << 10) | c };
    let tri_key = |a: usize, b: usize, c: usize| -> (u64, u32) {
        // a < b < c required.
        let diam = dist[a * n + b].max(dist[a * n + c]).max(dist[b * n + c]);
        (diam.to_bits(), pack(a as u32, b as u32, c as u32))
    };
    let cofacets = |edge: (u32, u32), out: &mut Vec<(u64, u32)>| {
        let (a, b) = (edge.0 as usize, edge.1 as usize);
        out.clear();
        for c in 0..n {
            if c == a || c == b {
                continue;
            }
            if dist[a * n + c] <= cap && dist[b * n + c] <= cap {
                let mut v = [a, b, c];
                v.sort_unstable();
                out.push(tri_key(v[0], v[1], v[2]));
            }
        }
        out.sort_unstable();
    };

    // Pivot state per claimed triangle key: either the claiming edge
    // whose untouched coboundary is regenerated on demand, or a
    // materialized column that needed additions before claiming.
    enum Stored {
        Fresh((u32, u32)),
        Column(Vec<(u64, u32)>),
    }
    let mut pivot: std::collections::HashMap<(u64, u32), Stored> = std::collections::HashMap::new();
    let mut paired_edge = vec![false; edges.len()];
    let mut column: Vec<(u64, u32)> = Vec::new();
    let mut other: Vec<(u64, u32)> = Vec::new();
    let mut scratch: Vec<(u64, u32)> = Vec::new();

    for r in (0..edges.len()).rev() {
        if is_tree_edge[r] {
            continue; // cleared: paired with a vertex in degree 0
        }
        let (edge_diam, ea, eb) = edges[r];
        cofacets((ea, eb), &mut column);
        let mut additions = 0usize;
        loop {
            let Some(&low) = column.first() else {
                break; // reduced to zero: no pair at this edge
            };
            match pivot.get(&low) {
                Some(Stored::Fresh(claimer)) => {
                    cofacets(*claimer, &mut other);
                    xor_columns(&column, &other, &mut scratch);
                    std::mem::swap(&mut column, &mut scratch);
                    additions += 1;
                }
                Some(Stored::Column(stored)) => {
                    xor_columns(&column, stored, &mut scratch);
                    std::mem::swap(&mut column, &mut scratch);
                    additions += 1;
                }
                None => {
                    let death = f64::from_bits(low.0);
                    if death > edge_diam {
                        bars.push(Bar {
                            birth: edge_diam,
                            death,
                            dim: 1,
                        });
                    }
                    let stored = if additions == 0 {
                        Stored::Fresh((ea, eb))
                    } else {
                        Stored::Column(std::mem::take(&mut column))
                    };
                    pivot.insert(low, stored);
                    paired_edge[r] = true;
                    break;
                }
            }
        }
    }

    // Cycle-creating edges never killed by a triangle are essential H1,
    // truncated at the cap. With the default cap (the diameter) the full
    // clique complex has no essential loops and this finds nothing.
    for (r, &(d, _, _)) in edges.iter().enumerate() {
        if !is_tree_edge[r] && !paired_edge[r] && cap > d {
            bars.push(Bar {
                birth: d,
                death: cap,
                dim: 1,
            });
        }
    }

    Ok(PersistenceDiagram { bars })
}
