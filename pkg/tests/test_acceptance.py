"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` to see the lines as
they are produced; they are also collected into the terminal summary.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from qtda.boundary import apply_B, restricted_boundary, restricted_laplacian, scale_laplacian, project_complex_exact
from qtda.chebyshev import (
    cheb_from_power,
    degree_bound,
    exact_chebyshev_moments,
    rank_step_series,
    recurrence_moments,
)
from qtda.cli import main as cli_main
from qtda.complex import (
    Skeleton,
    build_skeleton,
    complex_stats,
    pairwise_distances,
)
from qtda.oracle import exact_betti_laplacian, exact_betti_ranks
from qtda.simulator import (
    RngStream,
    build_trotter_circuit,
    hadamard_signs,
    project_complex_sampled,
    trotter_error,
    uniform_order_state,
)
from qtda.stochastic import EstimatorParams, estimate_betti

from conftest import ACCEPTANCE, SQUARE, octahedron, random_skeleton


@contextmanager
def criterion(num, title, limit=None):
    info = {"detail": ""}
    t0 = time.perf_counter()
    ok = False
    try:
        yield info
        elapsed = time.perf_counter() - t0
        assert limit is None or elapsed < limit, f"runtime {elapsed:.1f}s exceeds {limit}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {title} [{elapsed:.1f}s] {info['detail']}"
        ACCEPTANCE.append((num, line))
        print(line)


def skeletons(seed, count, n_max=8):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, n_max + 1))
        yield random_skeleton(rng, n, rng.uniform(0.2, 0.95))


def test_c01_boundary_algebra():
    with criterion(1, "boundary squares to zero, Delta_k Hermitian PSD", 60) as info:
        checked = 0
        worst_herm, worst_min = 0.0, math.inf
        for g in skeletons(101, 120):
            n = g.n
            eye = np.eye(1 << n, dtype=np.int64)
            for k in range(1, n - 1):
                dd = restricted_boundary(g, k).apply(restricted_boundary(g, k + 1).apply(eye))
                assert not dd.any()
            for k in range(n):
                mat, _ = restricted_laplacian(g, k).restricted_dense()
                if mat.size == 0:
                    continue
                herm = float(np.max(np.abs(mat - mat.conj().T)))
                assert herm <= 1e-12
                ev = np.linalg.eigvalsh(mat).min()
                assert ev >= -1e-10
                worst_herm, worst_min = max(worst_herm, herm), min(worst_min, ev)
            checked += 1
        assert checked >= 100
        info["detail"] = f"{checked} skeletons, max|L-L^T|={worst_herm:.1e}, min eig={worst_min:.1e}"


def test_c02_b_squared():
    with criterion(2, "B^2 = nI exactly, n = 1..10", 30) as info:
        for n in range(1, 11):
            eye = np.eye(1 << n, dtype=np.int64)
            assert np.array_equal(apply_B(apply_B(eye, n), n), n * eye)
        info["detail"] = "integer arithmetic on the full 2^n space"


def test_c03_circuit_counts():
    with criterion(3, "Trotter circuit tallies and depth, n = 1..20") as info:
        for n in range(1, 21):
            c = build_trotter_circuit(n, 1e-3)
            assert c.counts == {"CNOT": 2 * (2 * n - 1), "H": 2 * n, "RZ": n}
            assert c.depth <= 4 * n
        info["detail"] = "2(2n-1) CNOT, 2n H, n RZ; entangling depth 4n-2"


def test_c04_trotter_order():
    with criterion(4, "Trotter error ratio per halving of t in [3.2, 4.8]", 60) as info:
        ratios = []
        for n in (2, 3, 4):
            errs = [trotter_error(n, t) for t in (1e-2, 5e-3, 2.5e-3)]
            ratios += [errs[0] / errs[1], errs[1] / errs[2]]
        assert all(3.2 <= r <= 4.8 for r in ratios)
        info["detail"] = f"ratios {min(ratios):.3f}..{max(ratios):.3f}"


def test_c05_hodge():
    with criterion(5, "Laplacian kernel = rank formula", 300) as info:
        cases = 0
        for g in skeletons(505, 110):
            for k in range(g.n):
                assert exact_betti_laplacian(g, k)[0] == exact_betti_ranks(g, k)
                cases += 1
        info["detail"] = f"110 complexes, {cases} (complex, k) pairs"


def test_c06_projection_statistics():
    with criterion(6, "sampled complex projection succeeds with prob zeta_k", 120) as info:
        rng = np.random.default_rng(606)
        worst_z, worst_state = 0.0, 0.0
        done = 0
        while done < 10:
            n = int(rng.integers(3, 9))
            g = random_skeleton(rng, n, rng.uniform(0.3, 0.8))
            k = int(rng.integers(1, n))
            stats = complex_stats(g, k)
            if stats.count == 0 or stats.zeta == 1:
                continue
            s = uniform_order_state(n, k)
            exact = project_complex_exact(s.amps, g)
            exact = exact / np.linalg.norm(exact)
            stream = RngStream(606, done)
            hits = 0
            for _ in range(1000):
                res = project_complex_sampled(s, g, stream)
                if res.success:
                    hits += 1
                    worst_state = max(worst_state, float(np.max(np.abs(res.state.amps - exact))))
            sigma = math.sqrt(1000 * stats.zeta * (1 - stats.zeta))
            z = abs(hits - 1000 * stats.zeta) / sigma
            assert z <= 3
            assert worst_state <= 1e-10
            worst_z = max(worst_z, z)
            done += 1
        info["detail"] = f"10 skeletons x 1000 trials, max |z|={worst_z:.2f}, state err={worst_state:.1e}"


def test_c07_chebyshev_bound():
    with criterion(7, "step approximation error <= eps at m = degree_bound", 30) as info:
        worst = []
        for delta in (0.05, 0.1, 0.2):
            for eps in (0.05, 0.1):
                m = degree_bound(delta, eps)
                s = rank_step_series(m, delta)
                xs = np.concatenate([[0.0], np.linspace(delta, 1, 10_000)])
                err = np.max(np.abs(s(xs) - (xs >= delta)))
                assert err <= eps
                worst.append(err / eps)
        info["detail"] = f"max error/eps = {max(worst):.3f}"


def test_c08_trace_exactness():
    with criterion(8, "all-columns Hadamard average = trace/2^n", 30) as info:
        rng = np.random.default_rng(808)
        worst = 0.0
        for i in range(50):
            n = 1 + i % 6
            dim = 1 << n
            X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            A = X + X.conj().T
            H = np.stack([hadamard_signs(n, b) for b in range(dim)], axis=1) / math.sqrt(dim)
            avg = np.mean(np.real(np.einsum("ic,ij,jc->c", H, A, H)))
            err = abs(avg - np.trace(A).real / dim)
            assert err <= 1e-10
            worst = max(worst, err)
        info["detail"] = f"50 matrices, max error {worst:.1e}"


# -- criterion 9 -------------------------------------------------------------


def vr_clouds(seed=2024, count=20):
    """Seeded small VR complexes: noisy circles (loops likely) alternating with uniform clouds."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(5, 8))
        if len(out) % 2 == 0:
            ang = 2 * np.pi * np.arange(n) / n + rng.normal(0, 0.15, n)
            pts = np.c_[np.cos(ang), np.sin(ang)] * rng.uniform(0.9, 1.1, (n, 1))
        else:
            pts = rng.random((n, 2))
        d = pairwise_distances(pts)
        vals = np.unique(d.d[np.triu_indices(n, 1)])
        eps = float(rng.choice(vals[len(vals) // 4: 3 * len(vals) // 4]))
        g = build_skeleton(d, eps)
        if complex_stats(g, 1).count:
            out.append((f"cloud{len(out):02d}", g, 1))
    return out


def bne_instances():
    return [
        ("C4", build_skeleton(pairwise_distances(SQUARE), 1.1), 1),
        ("K3", Skeleton.complete(3), 1),
        ("octahedron", octahedron(), 2),
    ] + vr_clouds()


def run_bne(projection, runs=200, tol=0.2, eta=0.1):
    rows = []
    for idx, (name, g, k) in enumerate(bne_instances()):
        beta = exact_betti_ranks(g, k)
        count = complex_stats(g, k).count
        scaled = scale_laplacian(restricted_laplacian(g, k))
        params = EstimatorParams(epsilon=tol, eta=eta, projection=projection)
        cache = {}
        errs = []
        for r in range(runs):
            rep = estimate_betti(g, k, params, RngStream(r, idx), scaled=scaled, cache=cache,
                                 include_moments=False)
            assert "projection-failed" not in rep.flags
            errs.append(abs(rep.chi - beta / count))
        rows.append((name, beta, count, scaled.delta, rep.params["m"], float(np.mean(np.array(errs) <= tol)), max(errs)))
    return rows


@pytest.mark.parametrize("projection", ["exact", "sampled"])
def test_c09_end_to_end(projection):
    # the 30 minute budget covers both modes; allow each half of it
    with criterion(9, f"end-to-end BNE, {projection} projection", 900) as info:
        rows = run_bne(projection)
        assert len(rows) == 23
        worst = min(rows, key=lambda r: r[5])
        for name, beta, count, delta, m, rate, max_err in rows:
            assert rate >= 0.9, f"{name}: pass rate {rate}"
        info["detail"] = (f"23 instances x 200 runs, min pass rate {worst[5]:.3f} ({worst[0]}), "
                          f"max error {max(r[6] for r in rows):.3f}, m in {min(r[4] for r in rows)}..{max(r[4] for r in rows)}")


# -- criterion 10 ------------------------------------------------------------


def test_c10_moment_conversion():
    with criterion(10, "power-to-Chebyshev conversion = recurrence, j <= 20", 60) as info:
        rng = np.random.default_rng(1010)
        worst_exact = worst_float = worst_pipeline = 0.0
        for trial in range(12):
            dim = int(rng.integers(2, 65))
            G = rng.integers(-4, 5, (dim, dim))
            L = G @ G.T  # integer PSD
            lam = np.linalg.eigvalsh(L).max() or 1.0
            s = Fraction(int((1 << 24) / (1.01 * lam)), 1 << 24)
            u = rng.choice([-1, 1], dim)
            v = u / math.sqrt(dim)
            C = 2 * float(s) * L - np.eye(dim)
            ref = recurrence_moments(lambda x: C @ x, v, 20)
            scale0 = 1.0  # mu0 of a unit probe; |theta_j| <= mu0

            # exact rational power moments of C = 2 s L - I
            Cq = [[2 * s * int(L[i, j]) - (1 if i == j else 0) for j in range(dim)] for i in range(dim)]
            w = [Fraction(int(x)) for x in u]
            mu_q = []
            for _ in range(21):
                mu_q.append(sum(Fraction(int(a)) * b for a, b in zip(u, w)) / dim)
                w = [sum(row[j] * w[j] for j in range(dim)) for row in Cq]
            # float power moments of C
            mu_f, x = [], v.copy()
            for _ in range(21):
                mu_f.append(float(v @ x))
                x = C @ x
            # integer power moments of L through the pipeline conversion
            Lo, wo, M = L.astype(object), u.astype(object), np.empty((21, 1), dtype=object)
            for r in range(21):
                M[r, 0] = int(u.astype(object) @ wo)
                wo = Lo @ wo
            _, theta_pipe = exact_chebyshev_moments(M, s, 0)  # unnormalized probe u
            for j in range(21):
                e1 = abs(float(cheb_from_power(mu_q, j)) - ref[j]) / max(scale0, abs(ref[j]))
                e2 = abs(cheb_from_power(mu_f, j) - ref[j]) / max(scale0, abs(ref[j]))
                e3 = abs(theta_pipe[j, 0] / dim - ref[j]) / max(scale0, abs(ref[j]))
                worst_exact, worst_float, worst_pipeline = max(worst_exact, e1), max(worst_float, e2), max(worst_pipeline, e3)
        assert worst_exact <= 1e-8 and worst_float <= 1e-8 and worst_pipeline <= 1e-8
        info["detail"] = (f"12 matrices dim<=64, rel err: exact moments {worst_exact:.1e}, "
                          f"float moments {worst_float:.1e}, integer pipeline {worst_pipeline:.1e}")


def test_c11_determinism(tmp_path):
    with criterion(11, "CLI reruns with the same seed are byte-identical", 120) as info:
        src = tmp_path / "cloud.csv"
        rng = np.random.default_rng(1111)
        pts = np.r_[SQUARE, rng.random((2, 2)) * 2 - 0.5]
        src.write_text("".join(f"{float(x)!r},{float(y)!r}\n" for x, y in pts))
        files = 0
        for mode in ("exact", "sampled", "all-columns"):
            outs = []
            for rep in range(2):
                out = tmp_path / f"{mode}{rep}"
                rc = cli_main(["--input", str(src), "--epsilon", "0.6:1.6:3", "--orders", "all", "--mode", mode,
                               "--oracle", "--seed", "42", "--out", str(out)])
                assert rc == 0
                outs.append(out)
            for name in ("reports.jsonl", "summary.json", "betti_curve.csv"):
                assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
                files += 1
        info["detail"] = f"3 modes, {files} file pairs identical"
