"""Global matrices and load vectors of the coupled weak form.

Naming follows the block structure of the discrete system:

    M_f    fluid velocity mass (unweighted)
    M_p    head mass, weighted by g*S
    A_f    nu * (grad u, grad v) on the conduit
    A_bjsj alpha_bj * (u.tau, v.tau) on the interface
    A_p    g * (K grad phi, grad psi) on the matrix
    B      pressure rows, velocity columns: q^T B v = -(q, div v)
    C_fp   velocity rows, head columns: v^T C_fp phi = g (phi, v.n_f) on the interface
    N_f    gamma_f * (u.n_f, v.n_f) on the interface
    N_p    gamma_p * (phi, psi) on the interface

The head-row coupling block is ``-C_fp.T`` by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import (
    SCALAR_P1,
    SCALAR_P2,
    VECTOR_P2,
    DofMap,
    QuadRule,
    build_dof_map,
    edge_p2_eval,
    edge_quadrature,
    p1_eval,
    p2_eval,
    triangle_quadrature,
)
from .mesh import CoupledMesh, SubMesh, build_coupled_mesh
from .params import PhysicalParams


def _csr(rows, cols, vals, shape):
    A = sp.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=shape).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def _assemble_local(cell_rows, cell_cols, local, shape):
    nt, nr = cell_rows.shape
    nc = cell_cols.shape[1]
    rows = np.broadcast_to(cell_rows[:, :, None], (nt, nr, nc))
    cols = np.broadcast_to(cell_cols[:, None, :], (nt, nr, nc))
    return _csr(rows, cols, local, shape)


@dataclass(frozen=True)
class Geometry:
    """Affine maps of all triangles of a submesh."""

    origin: np.ndarray  # (nt, 2)
    jac: np.ndarray  # (nt, 2, 2), jac[t, i, j] = dx_i / dxi_j
    det: np.ndarray  # (nt,), positive
    inv: np.ndarray  # (nt, 2, 2)

    @classmethod
    def of(cls, mesh: SubMesh) -> "Geometry":
        p = mesh.vertices[mesh.triangles]
        jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        if np.any(det <= 0):
            raise ValueError("mesh contains non-positively oriented triangles")
        inv = np.empty_like(jac)
        inv[:, 0, 0] = jac[:, 1, 1] / det
        inv[:, 1, 1] = jac[:, 0, 0] / det
        inv[:, 0, 1] = -jac[:, 0, 1] / det
        inv[:, 1, 0] = -jac[:, 1, 0] / det
        return cls(p[:, 0], jac, det, inv)

    def map_points(self, ref_points):
        """Physical coordinates (nt, nq, 2) of reference points (nq, 2)."""
        return self.origin[:, None, :] + np.einsum("tij,qj->tqi", self.jac, ref_points)

    def phys_grads(self, ref_grads):
        """(nq, nloc, 2) reference gradients -> (nt, nq, nloc, 2) physical gradients."""
        return np.einsum("qlk,tkm->tqlm", ref_grads, self.inv)


def _basis(space):
    return p1_eval if space == SCALAR_P1 else p2_eval


def mass_matrix(mesh: SubMesh, dofmap: DofMap, quad: QuadRule, scale=1.0):
    geo = Geometry.of(mesh)
    vals, _ = _basis(dofmap.space)(quad.points)
    ref = np.einsum("q,qi,qj->ij", quad.weights, vals, vals)
    local = scale * geo.det[:, None, None] * ref[None]
    n = dofmap.n_dofs
    return _assemble_local(dofmap.cell_dofs, dofmap.cell_dofs, local, (n, n))


def stiffness_matrix(mesh: SubMesh, dofmap: DofMap, quad: QuadRule, K=None, scale=1.0):
    """scale * (K grad u, grad v) for a scalar space; K defaults to the identity."""
    geo = Geometry.of(mesh)
    _, ref_grads = _basis(dofmap.space)(quad.points)
    G = geo.phys_grads(ref_grads)
    KG = G if K is None else np.einsum("mn,tqjn->tqjm", np.asarray(K), G)
    local = np.einsum("q,t,tqim,tqjm->tij", quad.weights, geo.det, G, KG)
    n = dofmap.n_dofs
    return _assemble_local(dofmap.cell_dofs, dofmap.cell_dofs, scale * local, (n, n))


def divergence_matrix(mesh: SubMesh, vel: DofMap, pres: DofMap, quad: QuadRule):
    """B with q^T B v = -(q, div v)."""
    geo = Geometry.of(mesh)
    pv, _ = p1_eval(quad.points)
    _, ref_grads = p2_eval(quad.points)
    G = geo.phys_grads(ref_grads)  # (nt, nq, 6, 2)
    # local[t, k, c*6 + i] = -sum_q w det psi_k d_c phi_i
    local = -np.einsum("q,t,qk,tqic->tkci", quad.weights, geo.det, pv, G)
    local = local.reshape(len(geo.det), 3, 12)
    return _assemble_local(pres.cell_dofs, vel.cell_dofs, local, (pres.n_dofs, vel.n_dofs))


@dataclass(frozen=True)
class Spaces:
    velocity: DofMap  # vector P2 on the conduit
    pressure: DofMap  # P1 on the conduit
    head: DofMap  # P2 on the matrix
    fluid_scalar: DofMap  # scalar P2 on the conduit; one component of ``velocity``


def build_spaces(mesh: CoupledMesh) -> Spaces:
    return Spaces(
        velocity=build_dof_map(mesh.fluid, VECTOR_P2),
        pressure=build_dof_map(mesh.fluid, SCALAR_P1),
        head=build_dof_map(mesh.porous, SCALAR_P2),
        fluid_scalar=build_dof_map(mesh.fluid, SCALAR_P2),
    )


@dataclass(frozen=True)
class InterfaceGeometry:
    """Paired interface edges with a common parametrization t in [0, 1].

    ``fluid_dofs`` and ``porous_dofs`` are (ne, 3) scalar P2 ids of the
    trace nodes at t = 0, 1, 1/2.
    """

    fluid_dofs: np.ndarray
    porous_dofs: np.ndarray
    start: np.ndarray  # (ne, 2)
    length: np.ndarray  # (ne,)
    normal: np.ndarray  # (ne, 2), outward from the conduit
    tangent: np.ndarray  # (ne, 2)

    @classmethod
    def of(cls, mesh: CoupledMesh, tol=1e-12) -> "InterfaceGeometry":
        if len(mesh.interface_pairs) == 0:
            raise ValueError("mesh has no interface edges")
        fl, po = mesh.fluid, mesh.porous
        fd, pd, start, length, normal, tangent = [], [], [], [], [], []
        for ef, ep in mesh.interface_pairs:
            a, b = fl.edges[ef]
            c, d = po.edges[ep]
            xa, xb = fl.vertices[a], fl.vertices[b]
            if np.max(np.abs(po.vertices[c] - xa)) > tol:
                c, d = d, c
            if max(np.max(np.abs(po.vertices[c] - xa)), np.max(np.abs(po.vertices[d] - xb))) > tol:
                raise ValueError(f"interface edges {ef} (fluid) and {ep} (porous) do not coincide")
            fd.append([a, b, fl.n_vertices + ef])
            pd.append([c, d, po.n_vertices + ep])
            L = float(np.hypot(*(xb - xa)))
            tau = (xb - xa) / L
            nrm = np.array([tau[1], -tau[0]])
            tri = fl.triangles[fl.edge_tris[ef, 0]]
            inner = fl.vertices[tri].mean(axis=0)
            if np.dot(inner - xa, nrm) > 0:
                nrm = -nrm
            start.append(xa)
            length.append(L)
            normal.append(nrm)
            tangent.append(tau)
        return cls(np.array(fd), np.array(pd), np.array(start), np.array(length),
                   np.array(normal), np.array(tangent))

    def edge_mass(self, quad: QuadRule):
        """Per-edge 3x3 trace mass matrices (ne, 3, 3)."""
        E = edge_p2_eval(quad.points[:, 0])
        ref = np.einsum("q,qi,qj->ij", quad.weights, E, E)
        return self.length[:, None, None] * ref[None]

    def points(self, quad: QuadRule):
        """Physical quadrature points (ne, nq, 2)."""
        t = quad.points[:, 0]
        step = self.tangent * self.length[:, None]
        return self.start[:, None, :] + t[None, :, None] * step[:, None, :]


@dataclass(frozen=True)
class OperatorSet:
    M_f: sp.csr_matrix
    M_p: sp.csr_matrix
    A_f: sp.csr_matrix
    A_bjsj: sp.csr_matrix
    A_p: sp.csr_matrix
    B: sp.csr_matrix
    C_fp: sp.csr_matrix
    N_f: sp.csr_matrix
    N_p: sp.csr_matrix
    L_f: sp.csr_matrix  # unit gradient stiffness, vector P2
    L_p: sp.csr_matrix  # unit gradient stiffness, scalar P2

    @property
    def C_pf(self):
        """Head-row coupling block: psi^T C_pf u = -g (u.n_f, psi) on the interface."""
        return -self.C_fp.T.tocsr()

    @property
    def S_mass(self):
        """Mass of the stacked state [u, phi] in the weighted inner product."""
        return sp.block_diag((self.M_f, self.M_p), format="csr")


def _vector(A):
    return sp.block_diag((A, A), format="csr")


def assemble_masses(mesh: CoupledMesh, spaces: Spaces, params: PhysicalParams, quad=None):
    quad = quad or triangle_quadrature(5)
    M_f = _vector(mass_matrix(mesh.fluid, spaces.fluid_scalar, quad))
    M_p = mass_matrix(mesh.porous, spaces.head, quad, scale=params.g * params.S)
    return M_f, M_p


def assemble_stiffnesses(mesh: CoupledMesh, spaces: Spaces, params: PhysicalParams,
                         quad=None, edge_quad=None):
    quad = quad or triangle_quadrature(5)
    A_f = _vector(stiffness_matrix(mesh.fluid, spaces.fluid_scalar, quad, scale=params.nu))
    A_p = stiffness_matrix(mesh.porous, spaces.head, quad, K=params.K_matrix, scale=params.g)
    iface = InterfaceGeometry.of(mesh)
    A_bjsj = _fluid_trace_form(iface, spaces, edge_quad or edge_quadrature(5),
                               params.alpha_bj, iface.tangent)
    return A_f, A_bjsj, A_p


def assemble_divergence(mesh: CoupledMesh, spaces: Spaces, quad=None):
    return divergence_matrix(mesh.fluid, spaces.velocity, spaces.pressure,
                             quad or triangle_quadrature(5))


def _fluid_trace_form(iface, spaces, quad, coef, direction):
    """coef * ((u.d), (v.d)) on the interface for per-edge unit vectors d."""
    Me = iface.edge_mass(quad)
    ns = spaces.fluid_scalar.n_dofs
    dofs = np.hstack([iface.fluid_dofs, iface.fluid_dofs + ns])  # (ne, 6)
    dd = np.einsum("ec,ed->ecd", direction, direction)
    local = coef * np.einsum("ecd,eij->ecidj", dd, Me).reshape(len(Me), 6, 6)
    n = spaces.velocity.n_dofs
    return _assemble_local(dofs, dofs, local, (n, n))


def assemble_interface(mesh: CoupledMesh, spaces: Spaces, params: PhysicalParams, edge_quad=None):
    quad = edge_quad or edge_quadrature(5)
    iface = InterfaceGeometry.of(mesh)
    Me = iface.edge_mass(quad)
    ns = spaces.fluid_scalar.n_dofs
    fdofs = np.hstack([iface.fluid_dofs, iface.fluid_dofs + ns])
    local = params.g * np.einsum("ec,eij->ecij", iface.normal, Me).reshape(len(Me), 6, 3)
    C_fp = _assemble_local(fdofs, iface.porous_dofs, local,
                           (spaces.velocity.n_dofs, spaces.head.n_dofs))
    N_f = _fluid_trace_form(iface, spaces, quad, params.gamma_f, iface.normal)
    n = spaces.head.n_dofs
    N_p = _assemble_local(iface.porous_dofs, iface.porous_dofs, params.gamma_p * Me, (n, n))
    return C_fp, N_f, N_p


def assemble_operators(mesh: CoupledMesh, spaces: Spaces, params: PhysicalParams,
                       quad=None, edge_quad=None) -> OperatorSet:
    quad = quad or triangle_quadrature(5)
    edge_quad = edge_quad or edge_quadrature(5)
    M_f, M_p = assemble_masses(mesh, spaces, params, quad)
    A_f, A_bjsj, A_p = assemble_stiffnesses(mesh, spaces, params, quad, edge_quad)
    B = assemble_divergence(mesh, spaces, quad)
    C_fp, N_f, N_p = assemble_interface(mesh, spaces, params, edge_quad)
    L_f = _vector(stiffness_matrix(mesh.fluid, spaces.fluid_scalar, quad))
    L_p = stiffness_matrix(mesh.porous, spaces.head, quad)
    return OperatorSet(M_f, M_p, A_f, A_bjsj, A_p, B, C_fp, N_f, N_p, L_f, L_p)


def _quadrature_operator(mesh: SubMesh, dofmap: DofMap, quad: QuadRule):
    """Sparse W with (W @ f)[i] = sum over elements and points of w |J| phi_i f."""
    geo = Geometry.of(mesh)
    vals, _ = _basis(dofmap.space)(quad.points)
    nt, nq = len(geo.det), len(quad.weights)
    local = geo.det[:, None, None] * (quad.weights[:, None] * vals)[None]  # (nt, nq, nloc)
    rows = np.broadcast_to(dofmap.cell_dofs[:, None, :], local.shape)
    cols = np.broadcast_to(np.arange(nt * nq).reshape(nt, nq, 1), local.shape)
    W = _csr(rows, cols, local, (dofmap.n_dofs, nt * nq))
    pts = geo.map_points(quad.points).reshape(-1, 2)
    return W, pts


def _edge_operator(iface: InterfaceGeometry, dofs, n_dofs, quad: QuadRule):
    E = edge_p2_eval(quad.points[:, 0])  # (nq, 3)
    ne, nq = len(iface.length), len(quad.weights)
    local = iface.length[:, None, None] * (quad.weights[:, None] * E)[None]
    rows = np.broadcast_to(dofs[:, None, :], local.shape)
    cols = np.broadcast_to(np.arange(ne * nq).reshape(ne, nq, 1), local.shape)
    return _csr(rows, cols, local, (n_dofs, ne * nq))


class LoadAssembler:
    """Time-dependent right-hand sides for one case, with quadrature data cached.

    Calling the assembler at time ``t`` returns ``(F_f, F_p)``: the fluid
    load (f, v) and the head load g (f, psi), each including the natural
    interface terms that absorb the case's interface-condition defects.
    """

    def __init__(self, mesh: CoupledMesh, spaces: Spaces, case, params: PhysicalParams,
                 quad=None, edge_quad=None, interface_corrections=True):
        quad = quad or triangle_quadrature(5)
        edge_quad = edge_quad or edge_quadrature(5)
        self.case = case
        self.params = params
        self.n_scalar = spaces.fluid_scalar.n_dofs
        self.Wf, pf = _quadrature_operator(mesh.fluid, spaces.fluid_scalar, quad)
        self.Wp, pp = _quadrature_operator(mesh.porous, spaces.head, quad)
        self.xf, self.yf = pf[:, 0], pf[:, 1]
        self.xp, self.yp = pp[:, 0], pp[:, 1]
        self.interface_corrections = interface_corrections
        iface = InterfaceGeometry.of(mesh)
        nq = len(edge_quad.weights)
        self.Ef = _edge_operator(iface, iface.fluid_dofs, self.n_scalar, edge_quad)
        self.Ep = _edge_operator(iface, iface.porous_dofs, spaces.head.n_dofs, edge_quad)
        self.xe = iface.points(edge_quad)[:, :, 0].ravel()
        self.ne = np.repeat(iface.normal, nq, axis=0)
        self.te = np.repeat(iface.tangent, nq, axis=0)

    def __call__(self, t):
        case, prm = self.case, self.params
        f1, f2 = case.fluid_forcing(self.xf, self.yf, t, prm)
        fp = case.porous_forcing(self.xp, self.yp, t, prm)
        F1 = self.Wf @ np.broadcast_to(f1, self.xf.shape)
        F2 = self.Wf @ np.broadcast_to(f2, self.xf.shape)
        Fp = prm.g * (self.Wp @ np.broadcast_to(fp, self.xp.shape))
        if self.interface_corrections:
            mass, tang, norm = case.interface_residuals(self.xe, t, prm)
            tr = -(tang[:, None] * self.te + norm[:, None] * self.ne)
            F1 = F1 + self.Ef @ tr[:, 0]
            F2 = F2 + self.Ef @ tr[:, 1]
            Fp = Fp - prm.g * (self.Ep @ mass)
        return np.concatenate([F1, F2]), Fp


def assemble_load(mesh, spaces, case, t, params, quad=None, edge_quad=None):
    return LoadAssembler(mesh, spaces, case, params, quad, edge_quad)(t)


@dataclass(frozen=True)
class Discretization:
    """Mesh, spaces and time-independent operators for one parameter set."""

    mesh: CoupledMesh
    spaces: Spaces
    params: PhysicalParams
    ops: OperatorSet
    quad: QuadRule
    edge_quad: QuadRule

    @classmethod
    def build(cls, mesh, params: PhysicalParams | None = None,
              tri_degree: int = 5, edge_degree: int = 5) -> "Discretization":
        if not isinstance(mesh, CoupledMesh):
            mesh = build_coupled_mesh(int(mesh))
        params = params or PhysicalParams()
        quad = triangle_quadrature(tri_degree)
        edge_quad = edge_quadrature(edge_degree)
        spaces = build_spaces(mesh)
        ops = assemble_operators(mesh, spaces, params, quad, edge_quad)
        return cls(mesh, spaces, params, ops, quad, edge_quad)

    def load_assembler(self, case) -> LoadAssembler:
        return LoadAssembler(self.mesh, self.spaces, case, self.params, self.quad, self.edge_quad)


def dump_matrix(A, path) -> None:
    """Write ``i j value`` lines (0-based) for the stored entries of A."""
    C = sp.coo_matrix(A)
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        for i, j, v in zip(C.row[order], C.col[order], C.data[order]):
            fh.write(f"{i} {j} {v:.17g}\n")
