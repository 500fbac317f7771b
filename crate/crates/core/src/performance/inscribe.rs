//! Largest similar box inscribed in a voxelized workspace.
//!
//! The workspace is sampled on a regular grid and each sample stands for a
//! cubic cell of side `spacing` centred on it. A box `T(μW₀)` is accepted when
//! it fits inside the union of inside cells, so every grid point it covers
//! satisfies the workspace predicate. `T` is restricted to translations.
//! Feasibility is monotone in `μ`, so the search is a dichotomy over the finite
//! set of breakpoints `μ = m·spacing / a₀`.
//!
//! Voxel files: one ASCII header line `VOXMASK nx ny nz ox oy oz spacing`,
//! then `nx·ny·nz` bytes (0 outside, 1 inside), x fastest.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::spatial::{Pose, Vector3};

#[derive(Clone, Debug, PartialEq)]
pub struct VoxelMask {
    pub dims: [usize; 3],
    /// Position of voxel (0, 0, 0), mm.
    pub origin: Vector3,
    pub spacing: f64,
    pub inside: Vec<bool>,
}

impl VoxelMask {
    pub fn new(dims: [usize; 3], origin: Vector3, spacing: f64, inside: Vec<bool>) -> Result<Self> {
        if dims.iter().any(|&n| n == 0) || !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidInput("voxel grid needs positive dimensions and spacing".into()));
        }
        if inside.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::DimensionMismatch(format!("{} voxels for a {:?} grid", inside.len(), dims)));
        }
        Ok(Self { dims, origin, spacing, inside })
    }

    /// Samples `pred` on the grid spanning `lo..=hi` with the given spacing.
    pub fn from_predicate<P>(lo: &Vector3, hi: &Vector3, spacing: f64, pred: P, exec: Exec) -> Result<Self>
    where
        P: Fn(&Vector3) -> bool + Sync + Send,
    {
        if !(spacing > 0.0) || (0..3).any(|a| !(hi[a] >= lo[a])) {
            return Err(Error::InvalidInput("search region must be non-empty with positive resolution".into()));
        }
        let dims = [0, 1, 2].map(|a| ((hi[a] - lo[a]) / spacing + 1e-9).floor() as usize + 1);
        let origin = *lo;
        let (nx, ny) = (dims[0], dims[1]);
        let inside = map_range(exec, dims[0] * dims[1] * dims[2], |k| {
            let (i, j, l) = (k % nx, (k / nx) % ny, k / (nx * ny));
            pred(&(origin + Vector3::new(i as f64, j as f64, l as f64) * spacing))
        });
        Self::new(dims, origin, spacing, inside)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vector3 {
        self.origin + Vector3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    pub fn count_inside(&self) -> usize {
        self.inside.iter().filter(|v| **v).count()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let [nx, ny, nz] = self.dims;
        let o = self.origin;
        writeln!(w, "VOXMASK {nx} {ny} {nz} {} {} {} {}", o.x, o.y, o.z, self.spacing)?;
        let bytes: Vec<u8> = self.inside.iter().map(|&b| b as u8).collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let bad = |m: &str| Error::InvalidInput(format!("voxel file: {m}"));
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 8 || f[0] != "VOXMASK" {
            return Err(bad("expected `VOXMASK nx ny nz ox oy oz spacing`"));
        }
        let mut dims = [0usize; 3];
        for a in 0..3 {
            dims[a] = f[1 + a].parse().map_err(|_| bad("bad dimension"))?;
        }
        let mut nums = [0f64; 4];
        for a in 0..4 {
            nums[a] = f[4 + a].parse().map_err(|_| bad("bad number"))?;
        }
        let n = dims.iter().product::<usize>();
        let mut data = Vec::with_capacity(n);
        r.read_to_end(&mut data)?;
        if data.len() != n {
            return Err(bad(&format!("expected {n} voxel bytes, found {}", data.len())));
        }
        if data.iter().any(|&b| b > 1) {
            return Err(bad("voxel bytes must be 0 or 1"));
        }
        Self::new(dims, Vector3::new(nums[0], nums[1], nums[2]), nums[3], data.into_iter().map(|b| b == 1).collect())
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceBox {
    /// μ
    pub scale: f64,
    /// Places the box centre; pure translation.
    pub transform: Pose,
    /// `(a₀, b₀, c₀)`, mm.
    pub base_size: [f64; 3],
}

impl WorkspaceBox {
    pub fn center(&self) -> Vector3 {
        self.transform.position
    }

    pub fn half_extents(&self) -> Vector3 {
        Vector3::from(self.base_size) * (0.5 * self.scale)
    }

    pub fn contains(&self, p: &Vector3) -> bool {
        let d = p - self.center();
        let h = self.half_extents();
        (0..3).all(|a| d[a].abs() <= h[a] * (1.0 + 1e-12) + 1e-12)
    }
}

/// Summed-volume table of outside voxels with a zero border.
struct Outside {
    dims: [usize; 3],
    table: Vec<u32>,
}

impl Outside {
    fn new(m: &VoxelMask) -> Self {
        let [nx, ny, nz] = m.dims;
        let (sx, sy) = (nx + 1, ny + 1);
        let mut table = vec![0u32; sx * sy * (nz + 1)];
        let at = |i: usize, j: usize, k: usize| i + sx * (j + sy * k);
        for k in 1..=nz {
            for j in 1..=ny {
                for i in 1..=nx {
                    let v = !m.inside[m.index(i - 1, j - 1, k - 1)] as u32;
                    table[at(i, j, k)] = v + table[at(i - 1, j, k)] + table[at(i, j - 1, k)] + table[at(i, j, k - 1)]
                        - table[at(i - 1, j - 1, k)]
                        - table[at(i - 1, j, k - 1)]
                        - table[at(i, j - 1, k - 1)]
                        + table[at(i - 1, j - 1, k - 1)];
                }
            }
        }
        Self { dims: m.dims, table }
    }

    /// Outside voxels in the inclusive index box `lo..=hi`.
    fn count(&self, lo: [usize; 3], hi: [usize; 3]) -> u32 {
        let (sx, sy) = (self.dims[0] + 1, self.dims[1] + 1);
        let t = |i: usize, j: usize, k: usize| self.table[i + sx * (j + sy * k)] as i64;
        let (a, b) = (lo, [hi[0] + 1, hi[1] + 1, hi[2] + 1]);
        let s = t(b[0], b[1], b[2]) - t(a[0], b[1], b[2]) - t(b[0], a[1], b[2]) - t(b[0], b[1], a[2])
            + t(a[0], a[1], b[2])
            + t(a[0], b[1], a[2])
            + t(b[0], a[1], a[2])
            - t(a[0], a[1], a[2]);
        s as u32
    }
}

/// Cells each box side must cover at scale `mu` (at least one).
fn cells(mu: f64, base: &[f64; 3], spacing: f64) -> [usize; 3] {
    base.map(|b| ((mu * b / spacing - 1e-9).ceil() as usize).max(1))
}

/// Lexicographically first lower corner (x, then y, then z) of an all-inside
/// block of `m` cells.
fn first_corner(out: &Outside, m: [usize; 3], exec: Exec) -> Option<[usize; 3]> {
    let d = out.dims;
    if (0..3).any(|a| m[a] > d[a]) {
        return None;
    }
    let free = [d[0] - m[0] + 1, d[1] - m[1] + 1, d[2] - m[2] + 1];
    let per_x = map_range(exec, free[0], |i| {
        for j in 0..free[1] {
            for k in 0..free[2] {
                if out.count([i, j, k], [i + m[0] - 1, j + m[1] - 1, k + m[2] - 1]) == 0 {
                    return Some([i, j, k]);
                }
            }
        }
        None
    });
    per_x.into_iter().flatten().next()
}

/// Largest `T(μW₀)` inside the sampled workspace, ties broken by the
/// lexicographically smallest centre.
pub fn inscribe_box(mask: &VoxelMask, base_size: [f64; 3], exec: Exec) -> Result<WorkspaceBox> {
    if base_size.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::InvalidParams("base box sides must be positive".into()));
    }
    let out = Outside::new(mask);
    let s = mask.spacing;
    let mut candidates: Vec<f64> = (0..3).flat_map(|a| (1..=mask.dims[a]).map(move |m| m as f64 * s / base_size[a])).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let feasible = |mu: f64| first_corner(&out, cells(mu, &base_size, s), exec);
    if feasible(candidates[0]).is_none() {
        return Err(Error::NoFeasibleBox);
    }
    // candidates[lo] feasible, candidates[hi] infeasible (or past the end)
    let (mut lo, mut hi) = (0usize, candidates.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = candidates[lo];
    let m = cells(mu, &base_size, s);
    let c = feasible(mu).expect("bisection keeps a feasible lower end");
    let mid = |a: usize| c[a] as f64 + (m[a] as f64 - 1.0) / 2.0;
    let center = mask.origin + Vector3::new(mid(0), mid(1), mid(2)) * s;
    Ok(WorkspaceBox { scale: mu, transform: Pose::from_translation(center), base_size })
}

/// Samples `pred` over `lo..=hi` at `resolution` and inscribes the box.
pub fn inscribe_predicate<P>(pred: P, base_size: [f64; 3], lo: &Vector3, hi: &Vector3, resolution: f64, exec: Exec) -> Result<WorkspaceBox>
where
    P: Fn(&Vector3) -> bool + Sync + Send,
{
    let mask = VoxelMask::from_predicate(lo, hi, resolution, pred, exec)?;
    inscribe_box(&mask, base_size, exec)
}
