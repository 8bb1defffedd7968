"""Structured triangulations of the porous block (0,1)x(0,1) and the conduit (0,1)x(1,2).

Each block is split into ``n x n`` squares and every square into two triangles
along the lower-left to upper-right diagonal.  The two submeshes keep separate
vertex numbering; the interface y=1 is described by a table of paired edges.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INTERIOR = 0
OUTER = 1
INTERFACE = 2

INTERFACE_Y = 1.0


@dataclass(frozen=True)
class SubMesh:
    """Triangulation of one rectangular block.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counter-clockwise
    edges : (ne, 2) int array, each row sorted ascending
    tri_edges : (nt, 3) int array
        Edge ids of local edges (v0,v1), (v1,v2), (v2,v0).
    edge_tris : (ne, 2) int array
        Adjacent triangles; second entry is -1 on boundary edges.
    edge_markers : (ne,) int array
        One of INTERIOR, OUTER, INTERFACE.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    tri_edges: np.ndarray
    edge_tris: np.ndarray
    edge_markers: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def interface_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_markers == INTERFACE)


@dataclass(frozen=True)
class CoupledMesh:
    fluid: SubMesh
    porous: SubMesh
    interface_pairs: np.ndarray  # (n, 2): fluid edge id, porous edge id
    n: int

    @property
    def h(self) -> float:
        return 1.0 / self.n


def _edge_table(triangles: np.ndarray):
    local = triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 3, 2)
    keys = np.sort(local.reshape(-1, 2), axis=1)
    edges, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    tri_edges = inverse.reshape(-1, 3)
    edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
    tri_of = np.repeat(np.arange(len(triangles)), 3)
    for e, t in zip(inverse, tri_of):
        if edge_tris[e, 0] < 0:
            edge_tris[e, 0] = t
        else:
            edge_tris[e, 1] = t
    return edges, tri_edges, edge_tris


def structured_block(n: int, y0: float, interface_y: float = INTERFACE_Y) -> SubMesh:
    """Triangulate (0,1)x(y0,y0+1) with ``2 n**2`` triangles."""
    if n < 1:
        raise ValueError(f"subdivision count must be >= 1, got {n}")
    s = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(s, y0 + s)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    # exact grid coordinates on the interface line
    vertices[np.isclose(vertices[:, 1], interface_y, atol=1e-12), 1] = interface_y

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    v00 = j * (n + 1) + i
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    edges, tri_edges, edge_tris = _edge_table(triangles)
    markers = np.full(len(edges), INTERIOR, dtype=np.int64)
    boundary = edge_tris[:, 1] < 0
    ey = vertices[edges][:, :, 1]
    on_gamma = np.all(np.abs(ey - interface_y) < 1e-12, axis=1)
    markers[boundary] = OUTER
    markers[boundary & on_gamma] = INTERFACE
    return SubMesh(vertices, triangles, edges, tri_edges, edge_tris, markers)


def build_coupled_mesh(n: int) -> CoupledMesh:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"subdivision count must be a positive integer, got {n!r}")
    porous = structured_block(n, 0.0)
    fluid = structured_block(n, 1.0)

    def keyed(mesh):
        ids = mesh.interface_edges()
        mid = mesh.vertices[mesh.edges[ids]].mean(axis=1)[:, 0]
        return ids[np.argsort(mid)]

    pairs = np.column_stack([keyed(fluid), keyed(porous)])
    ef = fluid.vertices[fluid.edges[pairs[:, 0]]]
    ep = porous.vertices[porous.edges[pairs[:, 1]]]
    if len(pairs) != n or np.max(np.abs(ef - ep)) > 1e-14:
        raise RuntimeError("interface edges of the two blocks do not match")
    return CoupledMesh(fluid=fluid, porous=porous, interface_pairs=pairs, n=int(n))


def outer_boundary_vertices(mesh: SubMesh) -> set[int]:
    """Vertices on the outer boundary; includes the two ends of the interface."""
    outer = mesh.edges[mesh.edge_markers == OUTER]
    return set(np.unique(outer).tolist())


def dump_mesh(mesh: CoupledMesh, path) -> None:
    """Debug dump: ``v x y``, ``t i j k`` per block, then ``g ef ep`` pairs."""
    with open(path, "w") as fh:
        for name, sub in (("fluid", mesh.fluid), ("porous", mesh.porous)):
            fh.write(f"# {name}\n")
            for x, y in sub.vertices:
                fh.write(f"v {x:.17g} {y:.17g}\n")
            for a, b, c in sub.triangles:
                fh.write(f"t {a} {b} {c}\n")
        for ef, ep in mesh.interface_pairs:
            fh.write(f"g {ef} {ep}\n")
