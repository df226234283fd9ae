//! Deterministic geometric kernels: normalization, farthest point sampling,
//! exact k-nearest neighbors, interpolation upsampling and residual-target
//! construction.
//!
//! Everything in this module is a pure function of its inputs. Distance ties
//! are broken by the smaller point index throughout, which is what makes the
//! encoder- and decoder-side replicas of these computations bit-identical.

mod grid;

pub use grid::UniformGrid;

use crate::error::{Error, Result};

/// An ordered list of 3D positions. Ordering is significant: farthest point
/// sampling seeds from index 0 and all tie-breaks use indices, so two clouds
/// with the same points in different orders are different inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<[f32; 3]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f32; 3]>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f32; 3]] {
        &self.points
    }

    pub fn point(&self, i: usize) -> [f32; 3] {
        self.points[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, [f32; 3]> {
        self.points.iter()
    }

    /// Select a sub-cloud by indices, in the given order.
    pub fn select(&self, indices: &[u32]) -> PointCloud {
        PointCloud::new(indices.iter().map(|&i| self.points[i as usize]).collect())
    }

    pub fn all_finite(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.iter().all(|c| c.is_finite()))
    }

    /// Axis-aligned bounding box as (min, max); `None` for an empty cloud.
    pub fn bounds(&self) -> Option<([f32; 3], [f32; 3])> {
        let first = *self.points.first()?;
        let mut lo = first;
        let mut hi = first;
        for p in &self.points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        Some((lo, hi))
    }
}

impl From<Vec<[f32; 3]>> for PointCloud {
    fn from(points: Vec<[f32; 3]>) -> Self {
        PointCloud::new(points)
    }
}

/// Invertible map between a cloud's original frame and the unit cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationTransform {
    pub center: [f32; 3],
    pub scale: f32,
}

impl NormalizationTransform {
    pub fn normalize_point(&self, p: [f32; 3]) -> [f32; 3] {
        let mut q = [0.0f32; 3];
        for a in 0..3 {
            q[a] = ((p[a] - self.center[a]) * self.scale).clamp(-1.0, 1.0);
        }
        q
    }

    pub fn denormalize_point(&self, p: [f32; 3]) -> [f32; 3] {
        let mut q = [0.0f32; 3];
        for a in 0..3 {
            q[a] = p[a] / self.scale + self.center[a];
        }
        q
    }

    pub fn denormalize(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud::new(cloud.iter().map(|&p| self.denormalize_point(p)).collect())
    }
}

/// Exact nearest-neighbor lists for a batch of queries. Neighbors are stored
/// per query in ascending distance.
#[derive(Debug, Clone)]
pub struct NeighborList {
    k: usize,
    indices: Vec<u32>,
    distances: Vec<f32>,
}

impl NeighborList {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_queries(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.indices.len() / self.k
        }
    }

    pub fn neighbors(&self, query: usize) -> (&[u32], &[f32]) {
        let s = query * self.k;
        (&self.indices[s..s + self.k], &self.distances[s..s + self.k])
    }
}

/// Assignment of upsampled points to clusters: members of cluster `i` are the
/// `rate` interpolants generated from sparse point `centroid_index[i]`, stored
/// contiguously, with their offsets from the centroid.
#[derive(Debug, Clone)]
pub struct ClusterMap {
    pub m: usize,
    /// Members per cluster: the encoder-end rate r, or r' when rebuilt on the
    /// decoder at a different density.
    pub rate: usize,
    pub centroid_index: Vec<u32>,
    pub member_relpos: Vec<[f32; 3]>,
}

impl ClusterMap {
    /// Cluster index of a member, relying on contiguous member layout.
    pub fn cluster_of(&self, member: usize) -> usize {
        member / self.rate
    }

    pub fn num_members(&self) -> usize {
        self.m * self.rate
    }
}

/// Per-point target offsets produced by [`residual_targets`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub offsets: Vec<[f32; 3]>,
}

impl ResidualSet {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

#[inline(always)]
pub(crate) fn dist2(a: [f32; 3], b: [f32; 3]) -> f32 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Map a cloud into [-1, 1]^3 with a uniform scale centered at the bounding
/// box center. Zero-extent clouds map to the origin with scale 1.
pub fn normalize_unit_cube(cloud: &PointCloud) -> Result<(PointCloud, NormalizationTransform)> {
    if cloud.is_empty() {
        return Err(Error::InvalidInput("cannot normalize an empty cloud".into()));
    }
    if !cloud.all_finite() {
        return Err(Error::InvalidInput(
            "cloud contains non-finite coordinates".into(),
        ));
    }
    let (lo, hi) = cloud.bounds().expect("non-empty");
    let center = [
        (lo[0] + hi[0]) * 0.5,
        (lo[1] + hi[1]) * 0.5,
        (lo[2] + hi[2]) * 0.5,
    ];
    let half_extent = (0..3).fold(0.0f32, |acc, a| acc.max((hi[a] - lo[a]) * 0.5));
    let scale = if half_extent > 0.0 { 1.0 / half_extent } else { 1.0 };
    let tf = NormalizationTransform { center, scale };
    let normalized = PointCloud::new(cloud.iter().map(|&p| tf.normalize_point(p)).collect());
    Ok((normalized, tf))
}

/// Greedy farthest point sampling.
///
/// The seed is index 0 of the input ordering; each subsequent pick maximizes
/// the minimum distance to the already-selected set, ties broken by the
/// smallest index. Output order is selection order, so the result for m is a
/// prefix of the result for any m' > m.
pub fn farthest_point_sample(cloud: &PointCloud, m: usize) -> Result<Vec<u32>> {
    let n = cloud.len();
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!(
            "fps: need 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    // Structure-of-arrays copy keeps the min-distance update loop
    // vectorizable; this loop is the hot path of encoding.
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    for p in cloud.iter() {
        xs.push(p[0]);
        ys.push(p[1]);
        zs.push(p[2]);
    }

    let mut selected = Vec::with_capacity(m);
    let mut chosen = vec![false; n];
    let mut min_d2 = vec![f32::INFINITY; n];
    selected.push(0u32);
    chosen[0] = true;

    for _ in 1..m {
        let last = *selected.last().expect("non-empty") as usize;
        let (lx, ly, lz) = (xs[last], ys[last], zs[last]);
        for i in 0..n {
            let dx = xs[i] - lx;
            let dy = ys[i] - ly;
            let dz = zs[i] - lz;
            let d2 = dx * dx + dy * dy + dz * dz;
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
        }
        let mut best = usize::MAX;
        let mut best_d2 = f32::NEG_INFINITY;
        for i in 0..n {
            if !chosen[i] && min_d2[i] > best_d2 {
                best_d2 = min_d2[i];
                best = i;
            }
        }
        debug_assert!(best != usize::MAX);
        selected.push(best as u32);
        chosen[best] = true;
    }
    Ok(selected)
}

/// Exact k nearest neighbors of every query point among `refs`, ascending by
/// distance, distance ties broken by the smaller reference index.
pub fn knn(queries: &PointCloud, refs: &PointCloud, k: usize) -> Result<NeighborList> {
    if k == 0 || k > refs.len() {
        return Err(Error::InvalidInput(format!(
            "knn: need 1 <= k <= |refs|, got k={k}, |refs|={}",
            refs.len()
        )));
    }
    let grid = UniformGrid::build(refs.points());
    let mut indices = Vec::with_capacity(queries.len() * k);
    let mut distances = Vec::with_capacity(queries.len() * k);
    let mut scratch = Vec::new();
    for &q in queries.iter() {
        grid.knn_into(q, k, None, &mut scratch);
        for &(d2, idx) in scratch.iter() {
            indices.push(idx);
            distances.push(d2.sqrt());
        }
    }
    Ok(NeighborList { k, indices, distances })
}

/// Self-exclusive k nearest neighbors within one cloud: point `i` never lists
/// itself, but a coincident point with a different index is a valid neighbor.
pub fn knn_within(cloud: &PointCloud, k: usize) -> Result<NeighborList> {
    if k == 0 || k + 1 > cloud.len() {
        return Err(Error::InvalidInput(format!(
            "knn_within: need 1 <= k <= n-1, got k={k}, n={}",
            cloud.len()
        )));
    }
    let grid = UniformGrid::build(cloud.points());
    let mut indices = Vec::with_capacity(cloud.len() * k);
    let mut distances = Vec::with_capacity(cloud.len() * k);
    let mut scratch = Vec::new();
    for (qi, &q) in cloud.iter().enumerate() {
        grid.knn_into(q, k, Some(qi as u32), &mut scratch);
        for &(d2, idx) in scratch.iter() {
            indices.push(idx);
            distances.push(d2.sqrt());
        }
    }
    Ok(NeighborList { k, indices, distances })
}

fn golden_weight(j: usize) -> f32 {
    // One golden-section step toward the neighbor; distant neighbors (rank
    // above 8) get a penalized step to limit drift from the centroid.
    let base = (3.0 - 5.0f64.sqrt()) / 2.0;
    if j <= 8 {
        base as f32
    } else {
        (0.75 * base) as f32
    }
}

/// Densify a sparse cloud by interpolating each point toward its `r` nearest
/// self-exclusive neighbors with golden-ratio weights. Member (i, j) is
/// `p_i + u_j * (n_ij - p_i)` where `n_ij` is the j-th nearest neighbor of
/// `p_i` and `u_j` is the rank-dependent weight.
pub fn interpolate_upsample(sparse: &PointCloud, r: usize) -> Result<(PointCloud, ClusterMap)> {
    let m = sparse.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "upsample: need at least 2 sparse points, got {m}"
        )));
    }
    if r == 0 || r > m - 1 {
        return Err(Error::InvalidInput(format!(
            "upsample: need 1 <= r <= m-1, got r={r}, m={m}"
        )));
    }
    let neighbors = knn_within(sparse, r)?;
    let mut members = Vec::with_capacity(m * r);
    let mut relpos = Vec::with_capacity(m * r);
    for i in 0..m {
        let centroid = sparse.point(i);
        let (idx, _) = neighbors.neighbors(i);
        for (rank0, &nb) in idx.iter().enumerate() {
            let u = golden_weight(rank0 + 1);
            let nbp = sparse.point(nb as usize);
            let mut member = [0.0f32; 3];
            for a in 0..3 {
                member[a] = centroid[a] + u * (nbp[a] - centroid[a]);
            }
            // Recompute the offset from the rounded member position so the
            // stored relpos satisfies member == centroid + relpos exactly.
            let rel = [
                member[0] - centroid[0],
                member[1] - centroid[1],
                member[2] - centroid[2],
            ];
            members.push(member);
            relpos.push(rel);
        }
    }
    let map = ClusterMap {
        m,
        rate: r,
        centroid_index: (0..m as u32).collect(),
        member_relpos: relpos,
    };
    Ok((PointCloud::new(members), map))
}

/// For every base point, the offset to its nearest point in the original
/// cloud. These are the targets the refinement layer learns to predict.
pub fn residual_targets(original: &PointCloud, base: &PointCloud) -> Result<ResidualSet> {
    if original.is_empty() || base.is_empty() {
        return Err(Error::InvalidInput(
            "residual targets need non-empty clouds".into(),
        ));
    }
    let grid = UniformGrid::build(original.points());
    let offsets = base
        .iter()
        .map(|&b| {
            let (nn, _) = grid.nearest(b, None);
            let o = original.point(nn as usize);
            [o[0] - b[0], o[1] - b[1], o[2] - b[2]]
        })
        .collect();
    Ok(ResidualSet { offsets })
}
