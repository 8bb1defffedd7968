"""Lagrange P1/P2 shape functions, quadrature rules and DOF numbering."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import OUTER, SubMesh

SCALAR_P1 = "ScalarP1"
SCALAR_P2 = "ScalarP2"
VECTOR_P2 = "VectorP2"


@dataclass(frozen=True)
class QuadRule:
    points: np.ndarray  # (nq, dim) reference coordinates
    weights: np.ndarray  # (nq,)
    degree: int


def p1_eval(ref_points):
    """Values (..., 3) and reference gradients (..., 3, 2) of the P1 basis."""
    pts = np.asarray(ref_points, dtype=float)
    x, y = pts[..., 0], pts[..., 1]
    vals = np.stack([1.0 - x - y, x, y], axis=-1)
    grads = np.broadcast_to(
        np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]), vals.shape + (2,)
    ).copy()
    return vals, grads


def p2_eval(ref_points):
    """Values (..., 6) and reference gradients (..., 6, 2) of the P2 basis.

    Local order: vertices 0, 1, 2, then midpoints of edges (0,1), (1,2), (2,0).
    """
    pts = np.asarray(ref_points, dtype=float)
    x, y = pts[..., 0], pts[..., 1]
    l0, l1, l2 = 1.0 - x - y, x, y
    vals = np.stack(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l0 * l1,
            4 * l1 * l2,
            4 * l2 * l0,
        ],
        axis=-1,
    )
    # d(lambda)/d(x,y): l0 -> (-1,-1), l1 -> (1,0), l2 -> (0,1)
    zero = np.zeros_like(x)
    gx = np.stack(
        [-(4 * l0 - 1), 4 * l1 - 1, zero, 4 * (l0 - l1), 4 * l2, -4 * l2], axis=-1
    )
    gy = np.stack(
        [-(4 * l0 - 1), zero, 4 * l2 - 1, -4 * l1, 4 * l1, 4 * (l0 - l2)], axis=-1
    )
    return vals, np.stack([gx, gy], axis=-1)


def _orbit3(a, w):
    b = 1.0 - 2.0 * a
    return [(a, a), (b, a), (a, b)], [w] * 3


def _orbit6(a, b, w):
    c = 1.0 - a - b
    pts = [(a, b), (b, a), (b, c), (c, b), (a, c), (c, a)]
    return pts, [w] * 6


def _triangle_rule(degree):
    # weights below are normalized to sum to one; scaled by the area 1/2 at the end
    if degree == 1:
        pts, w = [(1 / 3, 1 / 3)], [1.0]
    elif degree == 2:
        pts, w = _orbit3(1 / 6, 1 / 3)
    elif degree <= 4:
        p1, w1 = _orbit3(0.445948490915965, 0.223381589678011)
        p2, w2 = _orbit3(0.091576213509771, 0.109951743655322)
        pts, w = p1 + p2, w1 + w2
    elif degree == 5:
        r15 = np.sqrt(15.0)
        p1, w1 = _orbit3((6 - r15) / 21, (155 - r15) / 1200)
        p2, w2 = _orbit3((6 + r15) / 21, (155 + r15) / 1200)
        pts, w = [(1 / 3, 1 / 3)] + p1 + p2, [9 / 40] + w1 + w2
    else:
        p1, w1 = _orbit3(0.249286745170910, 0.116786275726379)
        p2, w2 = _orbit3(0.063089014491502, 0.050844906370207)
        p3, w3 = _orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374)
        pts, w = p1 + p2 + p3, w1 + w2 + w3
    w = np.asarray(w)
    return np.asarray(pts), 0.5 * w / w.sum()


def triangle_quadrature(min_degree: int = 5) -> QuadRule:
    """Symmetric rule on the reference triangle exact to ``min_degree`` (1..6)."""
    if not 1 <= min_degree <= 6:
        raise ValueError(f"unsupported triangle quadrature degree {min_degree}")
    pts, w = _triangle_rule(min_degree)
    return QuadRule(pts, w, min_degree)


def edge_quadrature(min_degree: int = 5) -> QuadRule:
    """Gauss-Legendre rule on [0, 1] exact to ``min_degree`` (1..9)."""
    if not 1 <= min_degree <= 9:
        raise ValueError(f"unsupported edge quadrature degree {min_degree}")
    m = (min_degree + 2) // 2
    x, w = np.polynomial.legendre.leggauss(m)
    return QuadRule(0.5 * (x + 1.0)[:, None], 0.5 * w, min_degree)


def edge_p2_eval(t):
    """1D quadratic Lagrange basis on [0,1] with nodes 0, 1, 1/2 (in that order)."""
    t = np.asarray(t, dtype=float)
    return np.stack([(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)], axis=-1)


def edge_p1_eval(t):
    t = np.asarray(t, dtype=float)
    return np.stack([1 - t, t], axis=-1)


@dataclass(frozen=True)
class DofMap:
    """Global numbering for one space on one submesh.

    Scalar P2 numbers vertices first, then one DOF per edge midpoint.  The
    vector space stacks two scalar copies: component ``c`` of scalar DOF ``s``
    is ``c * n_scalar + s``.
    """

    space: str
    cell_dofs: np.ndarray  # (nt, nloc)
    n_dofs: int
    dirichlet: np.ndarray  # sorted global ids
    nodes: np.ndarray  # (n_scalar, 2) coordinates of scalar nodes

    @property
    def n_scalar(self) -> int:
        return len(self.nodes)

    def interpolate(self, func):
        """Nodal interpolant; ``func(x, y)`` returns a value or a 2-tuple for vectors."""
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        vals = func(x, y)
        if self.space == VECTOR_P2:
            return np.concatenate([np.broadcast_to(vals[0], x.shape),
                                   np.broadcast_to(vals[1], x.shape)]).astype(float)
        return np.broadcast_to(vals, x.shape).astype(float)


def build_dof_map(mesh: SubMesh, space: str) -> DofMap:
    nv = mesh.n_vertices
    outer_edges = np.flatnonzero(mesh.edge_markers == OUTER)
    outer_vertices = np.unique(mesh.edges[outer_edges])
    if space == SCALAR_P1:
        return DofMap(space, mesh.triangles.copy(), nv, outer_vertices, mesh.vertices.copy())
    if space not in (SCALAR_P2, VECTOR_P2):
        raise ValueError(f"unknown space {space!r}")
    cell = np.hstack([mesh.triangles, nv + mesh.tri_edges])
    midpoints = mesh.vertices[mesh.edges].mean(axis=1)
    nodes = np.vstack([mesh.vertices, midpoints])
    ns = len(nodes)
    dirichlet = np.concatenate([outer_vertices, nv + outer_edges])
    dirichlet.sort()
    if space == SCALAR_P2:
        return DofMap(space, cell, ns, dirichlet, nodes)
    cell_v = np.hstack([cell, cell + ns])
    return DofMap(space, cell_v, 2 * ns, np.concatenate([dirichlet, dirichlet + ns]), nodes)
