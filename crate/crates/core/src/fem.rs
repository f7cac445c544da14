//! Q2 reference element, cell geometry, mass matrix, and the
//! structure-of-arrays sampling of the state at every quadrature point.

use crate::mesh::{Cell, VelocityMesh};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Quadrature points per cell (3×3 Gauss–Legendre).
pub const NQ: usize = 9;
/// Basis functions per cell.
pub const NB: usize = 9;

/// Relative radius (in units of `L`) inside which two quadrature points are
/// treated as coincident by the kernel.
pub const EXCLUSION_RADIUS_REL: f64 = 1e-14;

/// Three-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss3() -> ([f64; 3], [f64; 3]) {
    let a = (3.0_f64 / 5.0).sqrt();
    ([-a, 0.0, a], [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
}

/// Quadratic Lagrange basis on nodes `-1, 0, 1`.
#[inline]
pub fn lagrange(x: f64) -> [f64; 3] {
    [0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)]
}

#[inline]
pub fn lagrange_deriv(x: f64) -> [f64; 3] {
    [x - 0.5, -2.0 * x, x + 0.5]
}

/// Tensor-product Q2 element on `[-1, 1]²`. Basis `i = 3b + a` is
/// `l_a(ξ) l_b(η)`; quadrature point `q = 3 q_η + q_ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceElement {
    pub qpts: [[f64; 2]; NQ],
    pub qwts: [f64; NQ],
    /// `basis[q][i]`
    pub basis: [[f64; NB]; NQ],
    /// `grad[q][i]`, reference gradient `(∂ξ, ∂η)`
    pub grad: [[[f64; 2]; NB]; NQ],
}

impl Default for ReferenceElement {
    fn default() -> Self {
        build_reference_element()
    }
}

impl ReferenceElement {
    /// Basis values and reference gradients at an arbitrary reference point.
    pub fn eval_at(xi: f64, eta: f64) -> ([f64; NB], [[f64; 2]; NB]) {
        let (lx, ly) = (lagrange(xi), lagrange(eta));
        let (dx, dy) = (lagrange_deriv(xi), lagrange_deriv(eta));
        let mut b = [0.0; NB];
        let mut g = [[0.0; 2]; NB];
        for jb in 0..3 {
            for ia in 0..3 {
                let i = 3 * jb + ia;
                b[i] = lx[ia] * ly[jb];
                g[i] = [dx[ia] * ly[jb], lx[ia] * dy[jb]];
            }
        }
        (b, g)
    }
}

pub fn build_reference_element() -> ReferenceElement {
    let (x, w) = gauss3();
    let mut qpts = [[0.0; 2]; NQ];
    let mut qwts = [0.0; NQ];
    let mut basis = [[0.0; NB]; NQ];
    let mut grad = [[[0.0; 2]; NB]; NQ];
    for qy in 0..3 {
        for qx in 0..3 {
            let q = 3 * qy + qx;
            qpts[q] = [x[qx], x[qy]];
            qwts[q] = w[qx] * w[qy];
            let (b, g) = ReferenceElement::eval_at(x[qx], x[qy]);
            basis[q] = b;
            grad[q] = g;
        }
    }
    ReferenceElement {
        qpts,
        qwts,
        basis,
        grad,
    }
}

/// Affine map of an axis-aligned cell: `detJ`, `J⁻¹`, and the physical
/// coordinates of its quadrature points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry {
    pub det_j: f64,
    pub jinv: [[f64; 2]; 2],
    pub coords: [[f64; 2]; NQ],
}

impl ElementGeometry {
    pub fn new(cell: &Cell, reference: &ReferenceElement) -> Self {
        let hr = 0.5 * cell.dr;
        let hz = 0.5 * cell.dz;
        let mut coords = [[0.0; 2]; NQ];
        for (c, p) in coords.iter_mut().zip(&reference.qpts) {
            *c = [cell.r0 + hr * (p[0] + 1.0), cell.z0 + hz * (p[1] + 1.0)];
        }
        Self {
            det_j: hr * hz,
            jinv: [[1.0 / hr, 0.0], [0.0, 1.0 / hz]],
            coords,
        }
    }

    /// Axisymmetric quadrature weight `qwt · detJ · r` (the `2π` is omitted).
    pub fn weight(&self, reference: &ReferenceElement, q: usize) -> f64 {
        reference.qwts[q] * self.det_j * self.coords[q][0]
    }

    /// Physical gradient `J⁻ᵀ ∇_ξ`.
    pub fn physical_grad(&self, g: [f64; 2]) -> [f64; 2] {
        let ji = &self.jinv;
        [ji[0][0] * g[0] + ji[1][0] * g[1], ji[0][1] * g[0] + ji[1][1] * g[1]]
    }
}

/// Coefficients of every species on the free degrees of freedom, species-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    species: usize,
    dofs: usize,
    data: Vec<f64>,
}

impl StateVector {
    pub fn zeros(species: usize, dofs: usize) -> Self {
        Self {
            species,
            dofs,
            data: vec![0.0; species * dofs],
        }
    }

    pub fn from_species(values: Vec<Vec<f64>>) -> Result<Self> {
        let species = values.len();
        if species == 0 {
            return Err(Error::InvalidArgument("state needs at least one species".into()));
        }
        let dofs = values[0].len();
        for v in &values {
            if v.len() != dofs {
                return Err(Error::DimensionMismatch {
                    what: "species coefficient vector",
                    expected: dofs,
                    got: v.len(),
                });
            }
        }
        Ok(Self {
            species,
            dofs,
            data: values.concat(),
        })
    }

    pub fn num_species(&self) -> usize {
        self.species
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs
    }

    pub fn species(&self, alpha: usize) -> &[f64] {
        &self.data[alpha * self.dofs..(alpha + 1) * self.dofs]
    }

    pub fn species_mut(&mut self, alpha: usize) -> &mut [f64] {
        &mut self.data[alpha * self.dofs..(alpha + 1) * self.dofs]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &StateVector, b: f64) -> StateVector {
        assert_eq!((self.species, self.dofs), (other.species, other.dofs));
        StateVector {
            species: self.species,
            dofs: self.dofs,
            data: self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// State and geometry at all `N = 9·|G|` global quadrature points, one
/// contiguous array per field. Point `n = 9·cell + q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadPointData {
    r: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
    f: Vec<Vec<f64>>,
    df_r: Vec<Vec<f64>>,
    df_z: Vec<Vec<f64>>,
    exclusion_radius: f64,
}

impl QuadPointData {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn species(&self) -> usize {
        self.f.len()
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn f(&self, alpha: usize) -> &[f64] {
        &self.f[alpha]
    }

    pub fn df_r(&self, alpha: usize) -> &[f64] {
        &self.df_r[alpha]
    }

    pub fn df_z(&self, alpha: usize) -> &[f64] {
        &self.df_z[alpha]
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    /// Builds the arrays directly; used by tests that need hand-made point sets.
    pub fn from_parts(
        r: Vec<f64>,
        z: Vec<f64>,
        w: Vec<f64>,
        f: Vec<Vec<f64>>,
        df_r: Vec<Vec<f64>>,
        df_z: Vec<Vec<f64>>,
        exclusion_radius: f64,
    ) -> Result<Self> {
        let n = r.len();
        let lens_ok = z.len() == n
            && w.len() == n
            && f.len() == df_r.len()
            && f.len() == df_z.len()
            && f.iter().chain(&df_r).chain(&df_z).all(|v| v.len() == n);
        if !lens_ok {
            return Err(Error::InvalidArgument(
                "quadrature arrays have inconsistent lengths".into(),
            ));
        }
        Ok(Self {
            r,
            z,
            w,
            f,
            df_r,
            df_z,
            exclusion_radius,
        })
    }
}

/// Samples every species and its physical gradient at all quadrature points.
/// Hanging-node values are resolved through the mesh constraints first.
pub fn sample_state(mesh: &VelocityMesh, reference: &ReferenceElement, state: &StateVector) -> Result<QuadPointData> {
    if state.num_dofs() != mesh.num_dofs() {
        return Err(Error::DimensionMismatch {
            what: "state dofs",
            expected: mesh.num_dofs(),
            got: state.num_dofs(),
        });
    }
    let s = state.num_species();
    let n = NQ * mesh.num_cells();
    let mut out = QuadPointData {
        r: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        f: vec![Vec::with_capacity(n); s],
        df_r: vec![Vec::with_capacity(n); s],
        df_z: vec![Vec::with_capacity(n); s],
        exclusion_radius: EXCLUSION_RADIUS_REL * mesh.domain().half_width(),
    };
    let nodal: Vec<Vec<f64>> = (0..s).map(|a| mesh.resolve_nodal(state.species(a))).collect();
    for (cell, nodes) in mesh.cells().iter().zip(mesh.cell_nodes()) {
        let geom = ElementGeometry::new(cell, reference);
        for q in 0..NQ {
            out.r.push(geom.coords[q][0]);
            out.z.push(geom.coords[q][1]);
            out.w.push(geom.weight(reference, q));
            for a in 0..s {
                let mut v = 0.0;
                let mut g = [0.0; 2];
                for (i, &nd) in nodes.iter().enumerate() {
                    let c = nodal[a][nd];
                    v += reference.basis[q][i] * c;
                    g[0] += reference.grad[q][i][0] * c;
                    g[1] += reference.grad[q][i][1] * c;
                }
                let g = geom.physical_grad(g);
                out.f[a].push(v);
                out.df_r[a].push(g[0]);
                out.df_z[a].push(g[1]);
            }
        }
    }
    Ok(out)
}

/// Mass matrix `M_ij = ∫ ψ_i ψ_j r dr dz` on the free dofs.
pub fn mass_matrix(mesh: &VelocityMesh, reference: &ReferenceElement) -> CsrMatrix {
    let mut m = CsrMatrix::for_mesh(mesh);
    for (cell, nodes) in mesh.cells().iter().zip(mesh.cell_nodes()) {
        let geom = ElementGeometry::new(cell, reference);
        let mut elem = [0.0; 81];
        for q in 0..NQ {
            let wq = geom.weight(reference, q);
            let b = &reference.basis[q];
            for i in 0..NB {
                for j in 0..NB {
                    elem[9 * i + j] += wq * b[i] * b[j];
                }
            }
        }
        m.scatter_element(mesh, nodes, &elem);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{DomainSpec, VelocityMesh};

    #[test]
    fn gauss_rule_closed_form() {
        let (x, w) = gauss3();
        assert!((x[2] - 0.6_f64.sqrt()).abs() < 1e-16);
        assert_eq!(x[1], 0.0);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-16);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn reference_element_invariants() {
        let re = build_reference_element();
        assert!((re.qwts.iter().sum::<f64>() - 4.0).abs() < 1e-14);
        for q in 0..NQ {
            let s: f64 = re.basis[q].iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            let gs = re.grad[q].iter().fold([0.0, 0.0], |a, g| [a[0] + g[0], a[1] + g[1]]);
            assert!(gs[0].abs() < 1e-13 && gs[1].abs() < 1e-13);
        }
        // centre quadrature point is the centre node
        assert_eq!(re.qpts[4], [0.0, 0.0]);
        assert!((re.basis[4][4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rectangle_geometry() {
        let mesh = VelocityMesh::cartesian(DomainSpec::new(1.0).unwrap(), 2, 1).unwrap();
        let g = ElementGeometry::new(&mesh.cells()[0], &build_reference_element());
        // cell is 0.5 × 2
        assert!((g.jinv[0][0] - 4.0).abs() < 1e-15);
        assert!((g.jinv[1][1] - 1.0).abs() < 1e-15);
        assert_eq!(g.jinv[0][1], 0.0);
        assert!(g.det_j > 0.0);
    }

    #[test]
    fn unit_cell_mass_sum() {
        // a single cell [0,1] x [-1,1] split so one cell is [0,1]x[0,1]: use L = 1, 1x2
        let mesh = VelocityMesh::cartesian(DomainSpec::new(1.0).unwrap(), 1, 2).unwrap();
        let re = build_reference_element();
        let m = mass_matrix(&mesh, &re);
        let total: f64 = m.values().iter().sum();
        // ∫ r over [0,1] x [-1,1] = 1, i.e. 1/2 per unit cell
        assert!((total - 1.0).abs() < 1e-14);
        for (i, j, v) in m.entries() {
            assert!((v - m.get(j, i)).abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mesh = VelocityMesh::cartesian(DomainSpec::new(1.0).unwrap(), 1, 1).unwrap();
        let bad = StateVector::zeros(1, 3);
        assert!(sample_state(&mesh, &build_reference_element(), &bad).is_err());
    }
}
