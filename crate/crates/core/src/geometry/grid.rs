//! Uniform hash grid for exact nearest-neighbor queries.
//!
//! Cells are visited in expanding Chebyshev rings around the query cell; a
//! ring at distance rho cannot contain a point closer than (rho-1) * cell, so
//! expansion stops as soon as the current k-th best is strictly inside that
//! bound. Results are exact, including index tie-breaks on equal distances.

use super::dist2;

pub struct UniformGrid {
    points: Vec<[f32; 3]>,
    lo: [f32; 3],
    cell: f32,
    dims: [usize; 3],
    // CSR layout: order[start[c]..start[c+1]] are the point ids in cell c.
    start: Vec<u32>,
    order: Vec<u32>,
}

impl UniformGrid {
    pub fn build(points: &[[f32; 3]]) -> UniformGrid {
        assert!(!points.is_empty(), "grid over empty point set");
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let extent = (0..3).fold(0.0f32, |acc, a| acc.max(hi[a] - lo[a])).max(1e-12);
        // Aim for a handful of points per cell.
        let cells_per_axis = ((points.len() as f64 / 2.0).cbrt().ceil() as usize).clamp(1, 256);
        let cell = extent / cells_per_axis as f32;
        let mut dims = [1usize; 3];
        for a in 0..3 {
            dims[a] = (((hi[a] - lo[a]) / cell).floor() as usize + 1).clamp(1, cells_per_axis + 1);
        }

        let cell_of = |p: &[f32; 3]| -> usize {
            let mut c = [0usize; 3];
            for a in 0..3 {
                let x = ((p[a] - lo[a]) / cell).floor() as isize;
                c[a] = x.clamp(0, dims[a] as isize - 1) as usize;
            }
            (c[2] * dims[1] + c[1]) * dims[0] + c[0]
        };

        let ncells = dims[0] * dims[1] * dims[2];
        let mut counts = vec![0u32; ncells + 1];
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 0..ncells {
            counts[i + 1] += counts[i];
        }
        let start = counts;
        let mut cursor = start.clone();
        let mut order = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            order[cursor[c] as usize] = i as u32;
            cursor[c] += 1;
        }
        UniformGrid {
            points: points.to_vec(),
            lo,
            cell,
            dims,
            start,
            order,
        }
    }

    fn query_cell(&self, q: [f32; 3]) -> [isize; 3] {
        let mut c = [0isize; 3];
        for a in 0..3 {
            let x = ((q[a] - self.lo[a]) / self.cell).floor() as isize;
            c[a] = x.clamp(0, self.dims[a] as isize - 1);
        }
        c
    }

    /// Exact k nearest neighbors of `q`, optionally excluding one index.
    /// Output is (squared distance, index) ascending, ties by smaller index.
    pub fn knn_into(&self, q: [f32; 3], k: usize, exclude: Option<u32>, out: &mut Vec<(f32, u32)>) {
        out.clear();
        let n = self.points.len();
        debug_assert!(k <= n);
        // For large k the ring walk would visit most cells anyway.
        if k * 4 >= n {
            self.knn_brute(q, k, exclude, out);
            return;
        }

        let qc = self.query_cell(q);
        let max_ring = self.dims.iter().max().copied().unwrap_or(1) as isize + 1;
        let mut ring: isize = 0;
        while ring <= max_ring {
            self.visit_ring(qc, ring, |idx| {
                if Some(idx) == exclude {
                    return;
                }
                let d2 = dist2(q, self.points[idx as usize]);
                push_candidate(out, k, (d2, idx));
            });
            if out.len() == k {
                let bound = ring as f64 * self.cell as f64;
                if (out[k - 1].0 as f64) < bound * bound {
                    break;
                }
            }
            ring += 1;
        }
        debug_assert_eq!(out.len(), k);
    }

    /// Nearest neighbor of `q` (squared distance), optionally excluding one index.
    pub fn nearest(&self, q: [f32; 3], exclude: Option<u32>) -> (u32, f32) {
        let mut out = Vec::with_capacity(1);
        self.knn_into(q, 1, exclude, &mut out);
        (out[0].1, out[0].0)
    }

    fn knn_brute(&self, q: [f32; 3], k: usize, exclude: Option<u32>, out: &mut Vec<(f32, u32)>) {
        let mut all: Vec<(f32, u32)> = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i as u32) != exclude)
            .map(|(i, p)| (dist2(q, *p), i as u32))
            .collect();
        all.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        out.extend_from_slice(&all[..k]);
    }

    fn visit_ring(&self, center: [isize; 3], ring: isize, mut f: impl FnMut(u32)) {
        let (dx0, dx1) = (center[0] - ring, center[0] + ring);
        let (dy0, dy1) = (center[1] - ring, center[1] + ring);
        let (dz0, dz1) = (center[2] - ring, center[2] + ring);
        for z in dz0.max(0)..=dz1.min(self.dims[2] as isize - 1) {
            for y in dy0.max(0)..=dy1.min(self.dims[1] as isize - 1) {
                for x in dx0.max(0)..=dx1.min(self.dims[0] as isize - 1) {
                    // Only the shell of the cube, not its interior.
                    let on_shell = x == dx0 || x == dx1 || y == dy0 || y == dy1 || z == dz0 || z == dz1;
                    if ring > 0 && !on_shell {
                        continue;
                    }
                    let c = (z as usize * self.dims[1] + y as usize) * self.dims[0] + x as usize;
                    let s = self.start[c] as usize;
                    let e = self.start[c + 1] as usize;
                    for &idx in &self.order[s..e] {
                        f(idx);
                    }
                }
            }
        }
    }
}

/// Insert a candidate into a bounded best-k list kept sorted by
/// (distance, index).
fn push_candidate(best: &mut Vec<(f32, u32)>, k: usize, cand: (f32, u32)) {
    let worse = |a: &(f32, u32), b: &(f32, u32)| a.0 > b.0 || (a.0 == b.0 && a.1 > b.1);
    if best.len() == k && !worse(&best[k - 1], &cand) {
        return;
    }
    let pos = best.partition_point(|e| !worse(e, &cand));
    if best.len() == k {
        best.pop();
    }
    best.insert(pos, cand);
}
