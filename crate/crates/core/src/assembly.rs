//! Element transforms and global assembly of the collision matrices
//! `C_α[f]`, one sparse block per species on the free dofs.

use std::time::{Duration, Instant};

use crate::exec::Execution;
use crate::fem::{ElementGeometry, QuadPointData, ReferenceElement, StateVector, NB, NQ};
use crate::kernel::{axisym_tensor_pair, fused_inner_loop, Accumulators, CollisionParams};
use crate::mesh::VelocityMesh;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Per-species collision matrices on a shared sparsity pattern.
#[derive(Clone, Debug)]
pub struct CollisionMatrix {
    pub blocks: Vec<CsrMatrix>,
}

impl CollisionMatrix {
    pub fn zeros(mesh: &VelocityMesh, species: usize) -> Self {
        let proto = CsrMatrix::for_mesh(mesh);
        Self {
            blocks: (0..species).map(|_| proto.zeros_like()).collect(),
        }
    }

    pub fn species(&self) -> usize {
        self.blocks.len()
    }

    /// `C_α f_α` for every species.
    pub fn apply(&self, state: &StateVector) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(a, c)| c.mul_vec(state.species(a)))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(CsrMatrix::max_abs).fold(0.0, f64::max)
    }
}

/// Outer-point transform: `G2 = J⁻¹ K w`, `G3 = J⁻¹ D J⁻ᵀ w`.
pub fn transform_point(acc: &Accumulators, jinv: &[[f64; 2]; 2], w: f64) -> (Vec<[f64; 2]>, Vec<[[f64; 2]; 2]>) {
    let g2 = acc
        .k
        .iter()
        .map(|k| {
            [
                (jinv[0][0] * k[0] + jinv[0][1] * k[1]) * w,
                (jinv[1][0] * k[0] + jinv[1][1] * k[1]) * w,
            ]
        })
        .collect();
    let g3 = acc
        .d
        .iter()
        .map(|d| {
            let mut out = [[0.0; 2]; 2];
            for (a, row) in out.iter_mut().enumerate() {
                for (b, o) in row.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for c in 0..2 {
                        for e in 0..2 {
                            s += jinv[a][c] * d[c][e] * jinv[b][e];
                        }
                    }
                    *o = s * w;
                }
            }
            out
        })
        .collect();
    (g2, g3)
}

/// `elem[α][9i + j] += ∇̂ψ_i · (G2[α] ψ_j + G3[α] ∇̂ψ_j)` with reference
/// gradients; the geometric factors are already inside `G2`/`G3`.
pub fn element_accumulate(
    elem: &mut [[f64; 81]],
    g2: &[[f64; 2]],
    g3: &[[[f64; 2]; 2]],
    basis: &[f64; NB],
    grad: &[[f64; 2]; NB],
) {
    for (a, e) in elem.iter_mut().enumerate() {
        let k = g2[a];
        let d = g3[a];
        for j in 0..NB {
            let gj = grad[j];
            let flux = [
                k[0] * basis[j] + d[0][0] * gj[0] + d[0][1] * gj[1],
                k[1] * basis[j] + d[1][0] * gj[0] + d[1][1] * gj[1],
            ];
            for i in 0..NB {
                e[9 * i + j] += grad[i][0] * flux[0] + grad[i][1] * flux[1];
            }
        }
    }
}

/// Time spent in the assembly phases. `kernel` and `transform` are summed
/// over worker tasks and rescaled to the wall time of the parallel section.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AssemblyTimings {
    pub kernel: Duration,
    pub transform: Duration,
    pub scatter: Duration,
}

impl AssemblyTimings {
    pub fn total(&self) -> Duration {
        self.kernel + self.transform + self.scatter
    }
}

impl std::ops::AddAssign for AssemblyTimings {
    fn add_assign(&mut self, o: Self) {
        self.kernel += o.kernel;
        self.transform += o.transform;
        self.scatter += o.scatter;
    }
}

struct CellOutput {
    elems: Vec<[f64; 81]>,
    kernel: Duration,
    transform: Duration,
}

/// Element matrices of one cell, all species.
fn cell_matrices(
    cell_index: usize,
    mesh: &VelocityMesh,
    reference: &ReferenceElement,
    data: &QuadPointData,
    params: &CollisionParams,
) -> CellOutput {
    let s = params.species();
    let geom = ElementGeometry::new(&mesh.cells()[cell_index], reference);
    let mut out = CellOutput {
        elems: vec![[0.0; 81]; s],
        kernel: Duration::ZERO,
        transform: Duration::ZERO,
    };
    for q in 0..NQ {
        let n = NQ * cell_index + q;
        let t0 = Instant::now();
        let acc = fused_inner_loop(data.r()[n], data.z()[n], data, params);
        let t1 = Instant::now();
        let (g2, g3) = transform_point(&acc, &geom.jinv, data.w()[n]);
        element_accumulate(&mut out.elems, &g2, &g3, &reference.basis[q], &reference.grad[q]);
        out.kernel += t1 - t0;
        out.transform += t1.elapsed();
    }
    out
}

/// Collision matrices from freshly sampled quadrature data.
///
/// Cells are processed independently under `exec`; the global scatter runs
/// afterwards in cell order, so the result does not depend on the policy or
/// the worker count.
pub fn assemble_collision(
    mesh: &VelocityMesh,
    reference: &ReferenceElement,
    data: &QuadPointData,
    params: &CollisionParams,
    exec: Execution,
) -> Result<CollisionMatrix> {
    assemble_collision_timed(mesh, reference, data, params, exec).map(|(c, _)| c)
}

/// [`assemble_collision`] plus per-phase timings.
pub fn assemble_collision_timed(
    mesh: &VelocityMesh,
    reference: &ReferenceElement,
    data: &QuadPointData,
    params: &CollisionParams,
    exec: Execution,
) -> Result<(CollisionMatrix, AssemblyTimings)> {
    check_data(mesh, data, params)?;
    let t0 = Instant::now();
    let cells = exec.map_indexed(mesh.num_cells(), |c| cell_matrices(c, mesh, reference, data, params));
    let wall = t0.elapsed();
    let t1 = Instant::now();
    let mut out = CollisionMatrix::zeros(mesh, params.species());
    for (nodes, cell) in mesh.cell_nodes().iter().zip(&cells) {
        for (block, e) in out.blocks.iter_mut().zip(&cell.elems) {
            block.scatter_element(mesh, nodes, e);
        }
    }
    let scatter = t1.elapsed();

    let kernel: Duration = cells.iter().map(|c| c.kernel).sum();
    let transform: Duration = cells.iter().map(|c| c.transform).sum();
    let busy = (kernel + transform).as_secs_f64();
    let scale = if busy > 0.0 { wall.as_secs_f64() / busy } else { 0.0 };
    let timings = AssemblyTimings {
        kernel: kernel.mul_f64(scale),
        transform: transform.mul_f64(scale),
        scatter,
    };
    Ok((out, timings))
}

fn check_data(mesh: &VelocityMesh, data: &QuadPointData, params: &CollisionParams) -> Result<()> {
    if data.len() != NQ * mesh.num_cells() {
        return Err(Error::DimensionMismatch {
            what: "quadrature points",
            expected: NQ * mesh.num_cells(),
            got: data.len(),
        });
    }
    if data.species() != params.species() {
        return Err(Error::DimensionMismatch {
            what: "species",
            expected: params.species(),
            got: data.species(),
        });
    }
    Ok(())
}

/// Reference assembly with the six nested loops in their plain order
/// (outer cell, outer point, α, inner cell, inner point, β). Field values
/// and gradients are evaluated from the nodal coefficients at each inner
/// point and every pair is assembled in physical coordinates. Slow; meant
/// for checking [`assemble_collision`] on small meshes.
pub fn assemble_naive(
    mesh: &VelocityMesh,
    reference: &ReferenceElement,
    state: &StateVector,
    params: &CollisionParams,
) -> Result<CollisionMatrix> {
    let s = params.species();
    if state.num_species() != s || state.num_dofs() != mesh.num_dofs() {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: s * mesh.num_dofs(),
            got: state.num_species() * state.num_dofs(),
        });
    }
    let eps = crate::fem::EXCLUSION_RADIUS_REL * mesh.domain().half_width();
    let nodal: Vec<Vec<f64>> = (0..s).map(|a| mesh.resolve_nodal(state.species(a))).collect();
    let geoms: Vec<ElementGeometry> = mesh
        .cells()
        .iter()
        .map(|c| ElementGeometry::new(c, reference))
        .collect();

    // value and physical gradient of species b at point q of cell j
    let field = |b: usize, j: usize, q: usize| -> (f64, [f64; 2]) {
        let p = reference.qpts[q];
        let (basis, grad) = ReferenceElement::eval_at(p[0], p[1]);
        let g = &geoms[j];
        let mut v = 0.0;
        let mut d = [0.0; 2];
        for (i, &nd) in mesh.cell_nodes()[j].iter().enumerate() {
            let c = nodal[b][nd];
            let pg = g.physical_grad(grad[i]);
            v += basis[i] * c;
            d[0] += pg[0] * c;
            d[1] += pg[1] * c;
        }
        (v, d)
    };

    let mut out = CollisionMatrix::zeros(mesh, s);
    for (ci, gi) in geoms.iter().enumerate() {
        let mut elem = vec![[0.0; 81]; s];
        for qi in 0..NQ {
            let [ri, zi] = gi.coords[qi];
            let wi = gi.weight(reference, qi);
            let p = reference.qpts[qi];
            let (basis, grad) = ReferenceElement::eval_at(p[0], p[1]);
            let pgrad: Vec<[f64; 2]> = grad.iter().map(|&g| gi.physical_grad(g)).collect();
            for (a, e) in elem.iter_mut().enumerate() {
                for (cj, gj) in geoms.iter().enumerate() {
                    for qj in 0..NQ {
                        let [rj, zj] = gj.coords[qj];
                        if (ri - rj).powi(2) + (zi - zj).powi(2) < eps * eps {
                            continue;
                        }
                        let wj = gj.weight(reference, qj);
                        let t = axisym_tensor_pair(ri, zi, rj, zj);
                        for b in 0..s {
                            let (fb, dfb) = field(b, cj, qj);
                            let cf = params.friction_coeff(a, b) * wj;
                            let cd = -params.diffusion_coeff(a, b) * fb * wj;
                            let k = [
                                cf * (t.uk[0][0] * dfb[0] + t.uk[0][1] * dfb[1]),
                                cf * (t.uk[1][0] * dfb[0] + t.uk[1][1] * dfb[1]),
                            ];
                            let d = [[cd * t.ud[0][0], cd * t.ud[0][1]], [cd * t.ud[1][0], cd * t.ud[1][1]]];
                            for i in 0..NB {
                                for j in 0..NB {
                                    let flux = [
                                        k[0] * basis[j] + d[0][0] * pgrad[j][0] + d[0][1] * pgrad[j][1],
                                        k[1] * basis[j] + d[1][0] * pgrad[j][0] + d[1][1] * pgrad[j][1],
                                    ];
                                    e[9 * i + j] += wi * (pgrad[i][0] * flux[0] + pgrad[i][1] * flux[1]);
                                }
                            }
                        }
                    }
                }
            }
        }
        for (block, e) in out.blocks.iter_mut().zip(&elem) {
            block.scatter_element(mesh, &mesh.cell_nodes()[ci], e);
        }
    }
    Ok(out)
}
