import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stokes_darcy.mesh import (INTERFACE, OUTER, build_coupled_mesh, dump_mesh,
                               outer_boundary_vertices)


@pytest.mark.parametrize("n, nv, nt", [(1, 4, 2), (2, 9, 8), (16, 289, 512)])
def test_counts(n, nv, nt):
    m = build_coupled_mesh(n)
    for sub in (m.fluid, m.porous):
        assert sub.n_vertices == nv
        assert sub.n_triangles == nt
    assert len(m.interface_pairs) == n
    assert m.h == pytest.approx(1.0 / n)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 64))
def test_areas_sum_to_one(n):
    m = build_coupled_mesh(n)
    for sub in (m.fluid, m.porous):
        a = sub.signed_areas()
        assert np.all(a > 0)
        assert abs(a.sum() - 1.0) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 40))
def test_interface_pairs_match(n):
    m = build_coupled_mesh(n)
    ef = m.fluid.vertices[m.fluid.edges[m.interface_pairs[:, 0]]]
    ep = m.porous.vertices[m.porous.edges[m.interface_pairs[:, 1]]]
    assert np.array_equal(np.sort(ef[..., 0], axis=1), np.sort(ep[..., 0], axis=1))
    lf = np.linalg.norm(ef[:, 1] - ef[:, 0], axis=1)
    lp = np.linalg.norm(ep[:, 1] - ep[:, 0], axis=1)
    assert np.allclose(lf, 1.0 / n, atol=1e-14) and np.allclose(lp, 1.0 / n, atol=1e-14)
    assert np.all(ef[..., 1] == 1.0)


def test_markers():
    m = build_coupled_mesh(3)
    assert np.sum(m.fluid.edge_markers == INTERFACE) == 3
    assert np.sum(m.fluid.edge_markers == OUTER) == 9
    assert np.all(m.fluid.edge_tris[m.fluid.edge_markers == 0, 1] >= 0)


def test_deterministic(tmp_path):
    dump_mesh(build_coupled_mesh(3), tmp_path / "a.txt")
    dump_mesh(build_coupled_mesh(3), tmp_path / "b.txt")
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


def test_outer_vertices():
    assert len(outer_boundary_vertices(build_coupled_mesh(1).fluid)) == 4
    # grid vertices minus interior ones minus interface vertices strictly inside (0, 1)
    porous2 = outer_boundary_vertices(build_coupled_mesh(2).porous)
    assert len(porous2) == 9 - 1 - 1
    porous4 = build_coupled_mesh(4).porous
    verts = outer_boundary_vertices(porous4)
    assert len(verts) == 25 - 9 - 3
    xy = porous4.vertices[sorted(verts)]
    on_gamma_inner = (xy[:, 1] == 1.0) & (xy[:, 0] > 0) & (xy[:, 0] < 1)
    assert not on_gamma_inner.any()


@pytest.mark.parametrize("bad", [0, -2, 1.5])
def test_invalid_n(bad):
    with pytest.raises(ValueError):
        build_coupled_mesh(bad)
