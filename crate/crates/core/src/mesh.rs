//! Axisymmetric velocity-space meshes.
//!
//! Cells are leaves of a forest of quadtrees rooted on a uniform base grid
//! over `Ω = [0, L] × [-L, L]`. Every leaf carries the 9 nodes of a Q2
//! element. Adjacent leaves differ by at most one level; a fine edge next to
//! a coarse leaf has a hanging midpoint node that is interpolated from the
//! three coarse-edge nodes.

use std::collections::{BTreeSet, HashMap};

use crate::physics::Species;
use crate::{Error, Result};

/// Deepest supported refinement level below the base grid.
pub const MAX_LEVEL: u8 = 20;

/// Leaves smaller than this many thermal widths are not refined further by
/// [`adapt_for_species`].
pub const DEFAULT_MIN_SIZE_IN_SIGMA: f64 = 0.5;

/// Radius, in thermal widths, of the disk refined around each species.
pub const DEFAULT_RADIUS_IN_SIGMA: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainSpec {
    half_width: f64,
}

impl DomainSpec {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "domain half-width must be positive, got {half_width}"
            )));
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Area of the half-plane section, `2L²`.
    pub fn area(&self) -> f64 {
        2.0 * self.half_width * self.half_width
    }
}

/// Position of a leaf in the forest: refinement level and integer indices
/// at that level (`i` along `r`, `j` along `z`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub level: u8,
    pub i: u32,
    pub j: u32,
}

impl CellKey {
    fn children(self) -> [CellKey; 4] {
        let (l, i, j) = (self.level + 1, 2 * self.i, 2 * self.j);
        [
            CellKey { level: l, i, j },
            CellKey { level: l, i: i + 1, j },
            CellKey { level: l, i, j: j + 1 },
            CellKey {
                level: l,
                i: i + 1,
                j: j + 1,
            },
        ]
    }

    fn ancestor(self, level: u8) -> CellKey {
        let shift = self.level - level;
        CellKey {
            level,
            i: self.i >> shift,
            j: self.j >> shift,
        }
    }
}

/// Axis-aligned leaf cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub key: CellKey,
    pub r0: f64,
    pub z0: f64,
    pub dr: f64,
    pub dz: f64,
}

impl Cell {
    pub fn size(&self) -> f64 {
        self.dr.max(self.dz)
    }

    pub fn area(&self) -> f64 {
        self.dr * self.dz
    }

    /// Distance from `(r, z)` to the closest point of the cell.
    pub fn distance_to(&self, r: f64, z: f64) -> f64 {
        let cr = r.clamp(self.r0, self.r0 + self.dr);
        let cz = z.clamp(self.z0, self.z0 + self.dz);
        ((r - cr).powi(2) + (z - cz).powi(2)).sqrt()
    }
}

/// How a mesh node enters the discrete space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// Unconstrained; carries the given degree of freedom.
    Free(usize),
    /// Hanging; value given by the constraint with this index.
    Hanging(usize),
}

/// Interpolation of a hanging node from unconstrained degrees of freedom.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub node: usize,
    pub masters: Vec<(usize, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshStats {
    pub leaves: usize,
    pub nodes: usize,
    pub hanging: usize,
    pub dofs: usize,
    pub max_level: u8,
}

impl std::fmt::Display for MeshStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "leaves {}", self.leaves)?;
        writeln!(f, "nodes {}", self.nodes)?;
        writeln!(f, "hanging {}", self.hanging)?;
        writeln!(f, "dofs {}", self.dofs)?;
        write!(f, "max_level {}", self.max_level)
    }
}

/// Immutable Q2 quadtree mesh.
#[derive(Clone, Debug)]
pub struct VelocityMesh {
    domain: DomainSpec,
    base_nr: usize,
    base_nz: usize,
    cells: Vec<Cell>,
    nodes: Vec<[f64; 2]>,
    cell_nodes: Vec<[usize; 9]>,
    node_kind: Vec<NodeKind>,
    constraints: Vec<Constraint>,
    free_nodes: Vec<usize>,
    expansions: Vec<Vec<(usize, f64)>>,
}

// local Q2 node (a, b) ∈ {0,1,2}² has index 3b + a
#[inline]
pub fn local_node(a: usize, b: usize) -> usize {
    3 * b + a
}

fn quadratic_trace_weights(t: f64) -> [f64; 3] {
    [0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)]
}

impl VelocityMesh {
    /// Uniform `nr × nz` grid of Q2 cells.
    pub fn cartesian(domain: DomainSpec, nr: usize, nz: usize) -> Result<Self> {
        if nr == 0 || nz == 0 {
            return Err(Error::InvalidArgument(format!(
                "cartesian mesh needs positive cell counts, got {nr}×{nz}"
            )));
        }
        if nr > 1 << 10 || nz > 1 << 10 {
            return Err(Error::InvalidArgument(format!("base grid {nr}×{nz} too large")));
        }
        let keys = (0..nz as u32)
            .flat_map(|j| (0..nr as u32).map(move |i| CellKey { level: 0, i, j }))
            .collect();
        Ok(Self::from_leaves(domain, nr, nz, keys))
    }

    /// Splits every marked leaf into four and restores 2:1 balance.
    /// Out-of-range indices are ignored.
    pub fn refine(&self, marked: &[usize]) -> Result<Self> {
        let mut leaves: BTreeSet<CellKey> = self.cells.iter().map(|c| c.key).collect();
        for &m in marked {
            let Some(cell) = self.cells.get(m) else { continue };
            if cell.key.level >= MAX_LEVEL {
                return Err(Error::InvalidArgument(format!(
                    "cell {m} already at maximum level {MAX_LEVEL}"
                )));
            }
            if leaves.remove(&cell.key) {
                leaves.extend(cell.key.children());
            }
        }
        balance(&mut leaves, self.base_nr, self.base_nz);
        Ok(Self::from_leaves(
            self.domain,
            self.base_nr,
            self.base_nz,
            leaves.into_iter().collect(),
        ))
    }

    fn from_leaves(domain: DomainSpec, base_nr: usize, base_nz: usize, mut keys: Vec<CellKey>) -> Self {
        let l = domain.half_width();
        let hr0 = l / base_nr as f64;
        let hz0 = 2.0 * l / base_nz as f64;
        let unit_r = hr0 / f64::from(1u32 << (MAX_LEVEL + 1));
        let unit_z = hz0 / f64::from(1u32 << (MAX_LEVEL + 1));

        // lattice coordinates of local node (a, b) of a leaf
        let lattice = |k: &CellKey, a: usize, b: usize| -> (i64, i64) {
            let half = 1i64 << (MAX_LEVEL - k.level);
            (
                2 * half * i64::from(k.i) + half * a as i64,
                2 * half * i64::from(k.j) + half * b as i64,
            )
        };

        keys.sort_by_key(|k| {
            let (a, b) = lattice(k, 0, 0);
            (b, a)
        });

        let mut points: Vec<(i64, i64)> = Vec::with_capacity(keys.len() * 4);
        for k in &keys {
            for b in 0..3 {
                for a in 0..3 {
                    points.push(lattice(k, a, b));
                }
            }
        }
        points.sort_by_key(|&(a, b)| (b, a));
        points.dedup();
        let index: HashMap<(i64, i64), usize> = points.iter().enumerate().map(|(n, &p)| (p, n)).collect();
        let nodes: Vec<[f64; 2]> = points
            .iter()
            .map(|&(a, b)| [a as f64 * unit_r, -l + b as f64 * unit_z])
            .collect();

        let cells: Vec<Cell> = keys
            .iter()
            .map(|k| {
                let scale = f64::from(1u32 << k.level);
                let dr = hr0 / scale;
                let dz = hz0 / scale;
                Cell {
                    key: *k,
                    r0: f64::from(k.i) * dr,
                    z0: -l + f64::from(k.j) * dz,
                    dr,
                    dz,
                }
            })
            .collect();
        let cell_nodes: Vec<[usize; 9]> = keys
            .iter()
            .map(|k| {
                let mut ids = [0; 9];
                for b in 0..3 {
                    for a in 0..3 {
                        ids[local_node(a, b)] = index[&lattice(k, a, b)];
                    }
                }
                ids
            })
            .collect();

        // hanging nodes: midpoints of fine edges that face a coarser leaf
        let leaf_index: HashMap<CellKey, usize> = keys.iter().enumerate().map(|(n, k)| (*k, n)).collect();
        let mut raw: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
        for (c, k) in keys.iter().enumerate() {
            if k.level == 0 {
                continue;
            }
            let nr_l = (base_nr as i64) << k.level;
            let nz_l = (base_nz as i64) << k.level;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let ni = i64::from(k.i) + di;
                let nj = i64::from(k.j) + dj;
                if ni < 0 || nj < 0 || ni >= nr_l || nj >= nz_l {
                    continue;
                }
                let same = CellKey {
                    level: k.level,
                    i: ni as u32,
                    j: nj as u32,
                };
                if leaf_index.contains_key(&same) {
                    continue;
                }
                let coarse = same.ancestor(k.level - 1);
                let Some(&cc) = leaf_index.get(&coarse) else {
                    continue;
                };
                let coarse_nodes = &cell_nodes[cc];
                let (fine_local, edge, t) = match (di, dj) {
                    (-1, 0) => (local_node(0, 1), [(2, 0), (2, 1), (2, 2)], k.j),
                    (1, 0) => (local_node(2, 1), [(0, 0), (0, 1), (0, 2)], k.j),
                    (0, -1) => (local_node(1, 0), [(0, 2), (1, 2), (2, 2)], k.i),
                    _ => (local_node(1, 2), [(0, 0), (1, 0), (2, 0)], k.i),
                };
                let t = if t % 2 == 0 { -0.5 } else { 0.5 };
                let w = quadratic_trace_weights(t);
                let masters = edge
                    .iter()
                    .zip(w)
                    .map(|(&(a, b), wt)| (coarse_nodes[local_node(a, b)], wt))
                    .collect();
                raw.insert(cell_nodes[c][fine_local], masters);
            }
        }

        let mut node_kind = Vec::with_capacity(nodes.len());
        let mut free_nodes = Vec::new();
        let mut hanging_nodes: Vec<usize> = raw.keys().copied().collect();
        hanging_nodes.sort_unstable();
        let hanging_slot: HashMap<usize, usize> = hanging_nodes.iter().enumerate().map(|(h, &n)| (n, h)).collect();
        for n in 0..nodes.len() {
            if let Some(&h) = hanging_slot.get(&n) {
                node_kind.push(NodeKind::Hanging(h));
            } else {
                node_kind.push(NodeKind::Free(free_nodes.len()));
                free_nodes.push(n);
            }
        }

        // express masters in free dofs; chains are resolved by substitution
        let resolve = |start: &[(usize, f64)]| -> Vec<(usize, f64)> {
            let mut out: HashMap<usize, f64> = HashMap::new();
            let mut stack: Vec<(usize, f64, u32)> = start.iter().map(|&(n, w)| (n, w, 0)).collect();
            while let Some((n, w, depth)) = stack.pop() {
                assert!(depth <= MAX_LEVEL as u32, "cyclic hanging-node constraint");
                match node_kind[n] {
                    NodeKind::Free(d) => *out.entry(d).or_insert(0.0) += w,
                    NodeKind::Hanging(_) => {
                        for &(m, wm) in &raw[&n] {
                            stack.push((m, w * wm, depth + 1));
                        }
                    }
                }
            }
            let mut v: Vec<(usize, f64)> = out.into_iter().collect();
            v.sort_by_key(|&(d, _)| d);
            v
        };
        let constraints: Vec<Constraint> = hanging_nodes
            .iter()
            .map(|&n| Constraint {
                node: n,
                masters: resolve(&raw[&n]),
            })
            .collect();
        let expansions = (0..nodes.len())
            .map(|n| match node_kind[n] {
                NodeKind::Free(d) => vec![(d, 1.0)],
                NodeKind::Hanging(h) => constraints[h].masters.clone(),
            })
            .collect();

        Self {
            domain,
            base_nr,
            base_nz,
            cells,
            nodes,
            cell_nodes,
            node_kind,
            constraints,
            free_nodes,
            expansions,
        }
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn base_dims(&self) -> (usize, usize) {
        (self.base_nr, self.base_nz)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Physical `(r, z)` coordinates of every node.
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Global node index of each local Q2 node, per cell.
    pub fn cell_nodes(&self) -> &[[usize; 9]] {
        &self.cell_nodes
    }

    pub fn node_kind(&self, node: usize) -> NodeKind {
        self.node_kind[node]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Number of unconstrained degrees of freedom per species.
    pub fn num_dofs(&self) -> usize {
        self.free_nodes.len()
    }

    /// Node carrying each free degree of freedom.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    /// Node value as a combination of free dofs: `[(dof, weight)]`.
    pub fn expansion(&self, node: usize) -> &[(usize, f64)] {
        &self.expansions[node]
    }

    /// Nodal values at every node from free-dof values.
    pub fn resolve_nodal(&self, dofs: &[f64]) -> Vec<f64> {
        self.expansions
            .iter()
            .map(|e| e.iter().map(|&(d, w)| w * dofs[d]).sum())
            .collect()
    }

    /// Free-dof vector interpolating `g(r, z)`.
    pub fn interpolate<F: Fn(f64, f64) -> f64>(&self, g: F) -> Vec<f64> {
        self.free_nodes
            .iter()
            .map(|&n| g(self.nodes[n][0], self.nodes[n][1]))
            .collect()
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            leaves: self.cells.len(),
            nodes: self.nodes.len(),
            hanging: self.constraints.len(),
            dofs: self.free_nodes.len(),
            max_level: self.cells.iter().map(|c| c.key.level).max().unwrap_or(0),
        }
    }

    /// Largest level difference between leaves sharing an edge segment.
    pub fn max_level_jump(&self) -> u8 {
        let leaves: HashMap<CellKey, u8> = self.cells.iter().map(|c| (c.key, c.key.level)).collect();
        let mut worst = 0;
        for c in &self.cells {
            let k = c.key;
            let nr_l = (self.base_nr as i64) << k.level;
            let nz_l = (self.base_nz as i64) << k.level;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let ni = i64::from(k.i) + di;
                let nj = i64::from(k.j) + dj;
                if ni < 0 || nj < 0 || ni >= nr_l || nj >= nz_l {
                    continue;
                }
                let same = CellKey {
                    level: k.level,
                    i: ni as u32,
                    j: nj as u32,
                };
                for lc in (0..=k.level).rev() {
                    if leaves.contains_key(&same.ancestor(lc)) {
                        worst = worst.max(k.level - lc);
                        break;
                    }
                }
            }
        }
        worst
    }
}

/// Refines coarse neighbours until adjacent leaves differ by at most one level.
fn balance(leaves: &mut BTreeSet<CellKey>, base_nr: usize, base_nz: usize) {
    loop {
        let mut split = BTreeSet::new();
        for k in leaves.iter().filter(|k| k.level >= 2) {
            let nr_l = (base_nr as i64) << k.level;
            let nz_l = (base_nz as i64) << k.level;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let ni = i64::from(k.i) + di;
                let nj = i64::from(k.j) + dj;
                if ni < 0 || nj < 0 || ni >= nr_l || nj >= nz_l {
                    continue;
                }
                let same = CellKey {
                    level: k.level,
                    i: ni as u32,
                    j: nj as u32,
                };
                for lc in (0..=k.level).rev() {
                    let cand = same.ancestor(lc);
                    if leaves.contains(&cand) {
                        if lc + 1 < k.level {
                            split.insert(cand);
                        }
                        break;
                    }
                }
            }
        }
        if split.is_empty() {
            return;
        }
        for k in split {
            leaves.remove(&k);
            leaves.extend(k.children());
        }
    }
}

/// Refines every leaf that intersects a disk of `radii[k] · σ_α` around
/// `(0, s_α)` in round `k`, for each species, skipping leaves already smaller
/// than `min_size_in_sigma · σ_α`. Stops early when a round marks nothing.
pub fn adapt_with_schedule(
    domain: DomainSpec,
    base_nr: usize,
    base_nz: usize,
    species: &[Species],
    radii_in_sigma: &[f64],
    min_size_in_sigma: f64,
) -> Result<VelocityMesh> {
    let mut mesh = VelocityMesh::cartesian(domain, base_nr, base_nz)?;
    for &radius in radii_in_sigma {
        let marked: Vec<usize> = mesh
            .cells()
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                species.iter().any(|s| {
                    let sigma = s.thermal_width();
                    c.size() > min_size_in_sigma * sigma && c.distance_to(0.0, s.shift) <= radius * sigma
                })
            })
            .map(|(n, _)| n)
            .collect();
        if marked.is_empty() {
            break;
        }
        mesh = mesh.refine(&marked)?;
    }
    Ok(mesh)
}

/// Species-adapted mesh: up to `levels` rounds of the 3σ disk rule.
pub fn adapt_for_species(
    domain: DomainSpec,
    base_nr: usize,
    base_nz: usize,
    species: &[Species],
    levels: usize,
) -> Result<VelocityMesh> {
    adapt_with_schedule(
        domain,
        base_nr,
        base_nz,
        species,
        &vec![DEFAULT_RADIUS_IN_SIGMA; levels],
        DEFAULT_MIN_SIZE_IN_SIGMA,
    )
}
