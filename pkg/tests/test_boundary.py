import io
from fractions import Fraction

import numpy as np
import pytest

from qtda.boundary import (
    apply_B,
    boundary_terms,
    dirac_operator,
    dump_dense,
    load_dense,
    project_complex_exact,
    project_order,
    restricted_boundary,
    restricted_laplacian,
    scale_laplacian,
)
from qtda.complex import Skeleton, popcounts

from conftest import random_skeleton


def basis(n, idx):
    v = np.zeros(1 << n, dtype=np.int64)
    v[idx] = 1
    return v


def test_terms():
    assert boundary_terms(1).terms == ("X",)
    assert boundary_terms(2).terms == ("XI", "ZX")
    assert boundary_terms(4).terms[3] == "ZZZX"
    with pytest.raises(ValueError):
        boundary_terms(0)


def test_apply_B_examples():
    out = apply_B(basis(2, 0b11), 2)
    np.testing.assert_array_equal(out, [0, 1, -1, 0])
    out = apply_B(basis(2, 0b00), boundary_terms(2))
    np.testing.assert_array_equal(out, [0, 1, 1, 0])
    with pytest.raises(ValueError):
        apply_B(np.zeros(5), 2)


def test_apply_B_matches_pauli_kron():
    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Z": np.diag([1, -1])}
    for n in range(1, 5):
        dense = sum(_kron([mats[c] for c in t]) for t in boundary_terms(n))
        np.testing.assert_array_equal(dirac_operator(n).dense(), dense)


def _kron(ms):
    out = np.eye(1)
    for m in ms:
        out = np.kron(out, m)
    return out


def test_B_squared():
    for n in range(1, 9):
        eye = np.eye(1 << n, dtype=np.int64)
        assert np.array_equal(apply_B(apply_B(eye, n), n), n * eye)


def test_object_dtype_is_exact():
    v = np.array([10**30, -1, 3, 7], dtype=object)
    out = apply_B(apply_B(v, 2), 2)
    assert all(int(a) == 2 * int(b) for a, b in zip(out, v))


def test_project_order_examples():
    u = np.full(4, 0.5)
    np.testing.assert_array_equal(project_order(u, 0), [0, 0.5, 0.5, 0])
    np.testing.assert_array_equal(project_order(basis(2, 3), 1), basis(2, 3))
    assert not project_order(basis(2, 3), 0).any()


def test_project_complex_examples(path3):
    u = np.random.default_rng(0).standard_normal(8)
    np.testing.assert_array_equal(project_complex_exact(u, Skeleton.complete(3)), u)
    w2 = (popcounts(3) == 2).astype(float)
    out = project_complex_exact(w2, path3)
    assert set(np.flatnonzero(out)) == {0b110, 0b011}
    assert not project_complex_exact(w2, Skeleton.empty(3)).any()


def test_projectors_idempotent_and_commute():
    rng = np.random.default_rng(1)
    g = random_skeleton(rng, 5)
    u = rng.standard_normal(32)
    for k in range(5):
        a = project_order(project_complex_exact(u, g), k)
        b = project_complex_exact(project_order(u, k), g)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(project_order(a, k), a)
        np.testing.assert_array_equal(project_complex_exact(a, g), a)


def test_laplacian_examples(square_c4):
    mat, idx = restricted_laplacian(Skeleton.complete(3), 1).restricted_dense()
    np.testing.assert_allclose(mat, 3 * np.eye(3))
    mat, _ = restricted_laplacian(square_c4, 1).restricted_dense()
    ev = np.linalg.eigvalsh(mat)
    assert mat.shape == (4, 4) and np.sum(np.abs(ev) < 1e-10) == 1
    assert not restricted_laplacian(Skeleton.empty(3), 1).dense().any()
    with pytest.raises(ValueError):
        restricted_laplacian(Skeleton.complete(3), 3)


def test_boundary_examples(k3):
    d1 = restricted_boundary(k3, 1)
    out = d1.apply(basis(3, 0b110))
    expect = basis(3, 0b010) - basis(3, 0b100)
    np.testing.assert_array_equal(out, expect)
    assert not restricted_boundary(Skeleton.empty(3), 1).dense().any()
    with pytest.raises(ValueError):
        restricted_boundary(k3, 0)


def test_boundary_squared_zero():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        g = random_skeleton(rng, n, 0.7)
        eye = np.eye(1 << n, dtype=np.int64)
        for k in range(1, n - 1):
            assert not restricted_boundary(g, k).apply(restricted_boundary(g, k + 1).apply(eye)).any()


def test_laplacian_is_dd_plus_dd():
    rng = np.random.default_rng(4)
    g = random_skeleton(rng, 6, 0.6)
    for k in range(1, 5):
        dk = restricted_boundary(g, k).dense()
        dk1 = restricted_boundary(g, k + 1).dense()
        lap = restricted_laplacian(g, k).dense()
        np.testing.assert_array_equal(lap, dk.T @ dk + dk1 @ dk1.T)


def test_scale_complete_k3():
    s = scale_laplacian(restricted_laplacian(Skeleton.complete(3), 1))
    assert isinstance(s.scale, Fraction)
    assert float(s.scale) == pytest.approx(1 / 3.03, rel=1e-6)
    ev = np.linalg.eigvalsh(float(s.scale) * restricted_laplacian(Skeleton.complete(3), 1).restricted_dense()[0])
    assert ev.max() <= 1
    assert s.delta == pytest.approx(3 * float(s.scale))


def test_scale_zero_operator():
    s = scale_laplacian(restricted_laplacian(Skeleton.empty(3), 1))
    assert s.scale == 1 and s.delta is None and "delta-undefined" in s.flags


def test_scale_c4_and_hint(square_c4):
    s = scale_laplacian(restricted_laplacian(square_c4, 1))
    assert 0 < s.delta < 1 and "delta-measured" in s.flags
    assert s.delta == pytest.approx(2 / (1.01 * 4), rel=1e-6)
    assert scale_laplacian(restricted_laplacian(square_c4, 1), 0.3).delta == 0.3


def test_dump_roundtrip(k3):
    op = restricted_laplacian(k3, 1)
    buf = io.StringIO()
    dump_dense(op, buf)
    buf.seek(0)
    np.testing.assert_array_equal(load_dense(buf), op.dense())


def test_dense_matches_apply():
    g = random_skeleton(np.random.default_rng(5), 5)
    op = restricted_laplacian(g, 1)
    dense = op.dense()
    v = np.random.default_rng(6).standard_normal(32)
    np.testing.assert_allclose(dense @ v, op.apply(v), atol=1e-12)
