"""Census counts, clustering, even-sector solving, and the scan driver."""

import math
import os

import numpy as np
import pytest

from todacensus.apparency import problem_m0
from todacensus.elliptic import compute_invariants
from todacensus.errors import (
    CriticalParametersError,
    EvenNonexistenceError,
    InconclusiveWarning,
    StructuralError,
)
from todacensus.solver import (
    SolverConfig,
    roots_univariate,
    scan_tau,
    solve_even,
    solve_m0,
    solve_m0_degenerate,
)

from conftest import random_taus

GENERIC_TAU = 0.21 + 1.13j


# ---------------------------------------------------------------------------
# univariate root finder

def test_roots_univariate_wilkinsonish():
    # (x-1)(x-2)(x-3)(x-4)
    coeffs = [24.0, -50.0, 35.0, -10.0, 1.0]
    roots = roots_univariate(coeffs)
    got = sorted(r.real for r, m in roots)
    assert all(m == 1 for _, m in roots)
    assert np.allclose(got, [1, 2, 3, 4], atol=1e-8)


def test_roots_univariate_triple_root():
    # (x-1)^3: the cluster must merge to a single multiplicity-3 root
    coeffs = [-1.0, 3.0, -3.0, 1.0]
    roots = roots_univariate(coeffs)
    assert len(roots) == 1
    z, m = roots[0]
    assert m == 3
    assert abs(z - 1.0) <= 1e-5


def test_roots_univariate_close_pair_stays_split():
    a, b = 1.0, 1.0 + 1e-4
    coeffs = [a * b, -(a + b), 1.0]
    roots = roots_univariate(coeffs)
    assert len(roots) == 2
    assert sorted(m for _, m in roots) == [1, 1]


def test_roots_univariate_leading_zeros_and_scaling():
    # 1e300 * (x - 2) with a padded zero leading coefficient
    roots = roots_univariate([-2e300, 1e300, 0.0])
    assert len(roots) == 1
    assert abs(roots[0][0] - 2.0) <= 1e-9


# ---------------------------------------------------------------------------
# m = 0 census

def test_census_01_basic():
    prob = problem_m0(GENERIC_TAU, 0, 1)
    rep = solve_m0(prob)
    assert rep.bound == 1
    assert rep.total == 1
    assert rep.even_total == 1
    c = rep.clusters[0]
    assert abs(c.B) + abs(c.D0) + abs(c.D) <= 1e-10
    assert c.residual <= 1e-10
    assert not c.degenerate


@pytest.mark.parametrize("n1,n2,bound", [(0, 1, 1), (0, 2, 2), (0, 4, 5),
                                         (1, 2, 5), (1, 3, 8), (2, 3, 14),
                                         (2, 4, 20)])
def test_census_reaches_bound_generic(n1, n2, bound):
    taus = random_taus(2, seed=1000 + 17 * n1 + n2)
    for tau in taus:
        prob = problem_m0(tau, n1, n2)
        rep = solve_m0(prob)
        assert rep.bound == bound
        assert rep.total == bound
        assert max(c.residual for c in rep.clusters) <= 1e-8


def test_census_02_root_identity():
    for tau in random_taus(3, seed=42):
        prob = problem_m0(tau, 0, 2)
        ctx = compute_invariants(prob.lattice)
        rep = solve_m0(prob, ctx)
        assert rep.total == 2 and rep.even_total == 2
        for c in rep.clusters:
            assert abs(3.0 * c.B ** 2 - ctx.g2) <= 1e-8 * (1 + abs(ctx.g2))
            assert abs(c.D0) <= 1e-8 and abs(c.D) <= 1e-8


def test_census_04_special_lattices():
    # square lattice: two pairs merge, all remaining roots even
    rep_i = solve_m0(problem_m0(1j, 0, 4))
    assert (rep_i.total, rep_i.even_total) == (3, 3)
    # hexagonal-adjacent zero of the weight-12 form: one double even root
    from todacensus.elliptic import find_form_zero

    tau0 = complex(find_form_zero("343g2^3-6561g3^2", 0.5 + 1.2j))
    rep_0 = solve_m0(problem_m0(tau0, 0, 4))
    assert (rep_0.total, rep_0.even_total) == (4, 2)
    # the square-lattice origin cluster (a triple collision) is flagged
    assert any(c.degenerate for c in rep_i.clusters)
    # tau0 is only a ~1e-12 zero of the form, so the colliding pair there
    # merely splits at the square-root scale: expect sigma_min to crater
    # relative to the simple clusters rather than to cross the hard flag
    smins = sorted(c.sigma_min for c in rep_0.clusters)
    assert smins[0] <= 1e-4 * smins[1]


def test_census_02_hexagonal_merge():
    rho = complex(0.5, math.sqrt(3.0) / 2.0)
    rep = solve_m0(problem_m0(rho, 0, 2))
    assert rep.total == 1
    assert abs(rep.clusters[0].B) <= 1e-6


def test_census_non_even_root_identity_04():
    for tau in random_taus(2, seed=9):
        prob = problem_m0(tau, 0, 4)
        ctx = compute_invariants(prob.lattice)
        rep = solve_m0(prob, ctx)
        non_even = [c for c in rep.clusters if not c.is_even]
        assert len(non_even) == 2
        for c in non_even:
            assert abs(c.B) <= 1e-8
            assert abs(27.0 * c.D ** 2 + 288.0 * ctx.g3) <= 1e-6 * (1 + abs(ctx.g3))


def test_census_determinism():
    prob = problem_m0(GENERIC_TAU, 1, 2)
    r1 = solve_m0(prob, config=SolverConfig(seed=5))
    r2 = solve_m0(prob, config=SolverConfig(seed=5))
    assert [(c.B, c.D0, c.D) for c in r1.clusters] == \
           [(c.B, c.D0, c.D) for c in r2.clusters]


def test_census_critical_refusal():
    with pytest.raises(CriticalParametersError):
        solve_m0(problem_m0(GENERIC_TAU, 1, 4))


def test_degenerate_probe():
    rep = solve_m0_degenerate(0, 2)
    assert rep.tau is None
    assert rep.total == 1
    c = rep.clusters[0]
    assert abs(c.B) + abs(c.D0) + abs(c.D) <= 1e-8
    assert c.degenerate  # the origin root of the cone is always singular
    rep1 = solve_m0_degenerate(0, 1)
    assert rep1.total == 1


# ---------------------------------------------------------------------------
# even sector

def test_solve_even_matches_census_labels():
    for (n1, n2) in [(0, 2), (0, 4), (2, 3), (2, 4)]:
        prob = problem_m0(GENERIC_TAU, n1, n2)
        ctx = compute_invariants(prob.lattice)
        census = solve_m0(prob, ctx)
        ev = solve_even(prob, ctx)
        census_B = sorted(
            (c.B for c in census.clusters if c.is_even),
            key=lambda z: (round(z.real, 6), round(z.imag, 6)),
        )
        poly_B = sorted(
            (r.B for r in ev.roots for _ in range(r.multiplicity)),
            key=lambda z: (round(z.real, 6), round(z.imag, 6)),
        )
        assert len(census_B) == len(poly_B)
        for a, b in zip(census_B, poly_B):
            assert abs(a - b) <= 1e-6 * (1 + abs(b))


def test_solve_even_reports_poly_text():
    rep = solve_even(problem_m0(GENERIC_TAU, 0, 2))
    assert "B" in rep.poly_text
    assert rep.Ne == 2
    assert all(r.residual <= 1e-8 for r in rep.roots)


def test_solve_even_refusals():
    with pytest.raises(EvenNonexistenceError):
        solve_even(problem_m0(GENERIC_TAU, 1, 3))


# ---------------------------------------------------------------------------
# scans

def test_scan_grid_and_clipping():
    grid = {"re0": -0.1, "re1": 0.1, "nre": 3, "im0": -0.5, "im1": 1.0, "nim": 4}
    rows = scan_tau(0, 1, grid)
    # rows with im <= 0 are clipped away; im grid is {-0.5, 0, 0.5, 1.0}
    assert all(r["tau_im"] > 0 for r in rows)
    assert len(rows) == 6
    # row-major ordering: imaginary part varies slowest
    ims = [r["tau_im"] for r in rows]
    assert ims == sorted(ims)
    assert all(r["total"] == 1 for r in rows)
    assert all(r["error"] is None for r in rows)


def test_scan_requires_valid_pair():
    with pytest.raises(CriticalParametersError):
        scan_tau(2, 2, {"re0": 0, "re1": 0, "nre": 1, "im0": 1, "im1": 1, "nim": 1})


def test_scan_worker_env(monkeypatch):
    monkeypatch.setenv("TODA_CENSUS_WORKERS", "2")
    grid = {"re0": -0.1, "re1": 0.1, "nre": 2, "im0": 0.9, "im1": 1.1, "nim": 2}
    rows = scan_tau(0, 2, grid)
    assert len(rows) == 4
    assert all(r["total"] == 2 for r in rows)


# ---------------------------------------------------------------------------
# config plumbing

def test_config_resolution_scales_with_invariants():
    cfg = SolverConfig()
    r1 = cfg.resolved(g2=0.0, g3=0.0, bound=5)
    r2 = cfg.resolved(g2=1600.0, g3=0.0, bound=5)
    assert r2.box_radius > r1.box_radius
    assert r1.starts == 5 * 200
    cfg2 = SolverConfig(box_radius=7.5, starts=123)
    r3 = cfg2.resolved(g2=1e6, g3=1e6, bound=3)
    assert r3.box_radius == 7.5 and r3.starts == 123
