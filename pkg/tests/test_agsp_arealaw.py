"""Spectral filters, ground-state tails, and the boundary area-law chain."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from entspec import (
    DegenerateError,
    GapClosedError,
    area_law_constants,
    boundary_adiabatic_experiment,
    build_agsp,
    build_long_range_ising,
    build_nearest_neighbor_chain,
    ground_tail_experiment,
    make_coupled_qudit_family,
    op_norm_power,
    random_gapped_instance,
    se_lower_search,
)
from entspec.agsp_arealaw import c_kappa_1, c_kappa_2
from entspec.se_strength import BipartiteOperator, best_upper

from helpers import random_hermitian


def test_op_norm_power_matches_svd(rng):
    for shape in ((5, 5), (4, 7)):
        m = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        assert op_norm_power(m) == pytest.approx(
            np.linalg.norm(m, 2), rel=1e-10
        )
    assert op_norm_power(np.zeros((3, 3))) == 0.0


def test_agsp_two_level_defects():
    """On diag(0, 1) the filtered ground weight is the erf of the window
    half-width in Gaussian units."""
    h = np.diag([0.0, 1.0]).astype(complex)
    beta = 4.0
    k = build_agsp(h, beta)
    from scipy.special import erf

    assert k.delta == pytest.approx(1.0, abs=1e-12)
    assert k.defect_ground == pytest.approx(1.0 - erf(2.0), abs=1e-9)
    assert k.defect_ground == pytest.approx(0.004677734981047266, abs=1e-9)
    assert k.defect_ground <= k.defect_bound
    assert k.defect_excited <= 2.0 * k.defect_bound
    assert k.quad_diff <= 1e-10
    assert k.strength_cap(0.5) == pytest.approx(math.exp(2.0 * beta * 0.5), rel=1e-12)


def test_agsp_filter_matches_direct_quadrature(rng):
    """Cosine-window values against an independent adaptive integration."""
    h = random_hermitian(rng, 5)
    beta = 2.0
    k = build_agsp(h, beta)
    for lam, got in zip(k.eigvals[:3], k.filter_vals[:3]):
        ref, _ = quad(
            lambda t: math.cos(lam * t) * math.exp(-(t ** 2) / (4.0 * beta)),
            -k.t_c,
            k.t_c,
            epsabs=1e-13,
        )
        ref /= math.sqrt(4.0 * math.pi * beta)
        assert got == pytest.approx(ref, abs=1e-9)


def test_agsp_rejects_degenerate_ground():
    with pytest.raises(DegenerateError):
        build_agsp(np.diag([0.0, 0.0, 1.0]).astype(complex), 2.0)


def test_agsp_defect_shrinks_with_beta(rng):
    h = random_hermitian(rng, 6)
    defects = [build_agsp(h, b).defect_ground for b in (0.5, 2.0, 8.0)]
    assert defects[0] > defects[1] > defects[2]


def test_random_gapped_instances_protect_gap(rng):
    for _ in range(10):
        h, v, (da, db) = random_gapped_instance(rng)
        w = np.linalg.eigvalsh(h)
        assert w[1] - w[0] >= 0.3
        assert best_upper(v) <= 0.6 + 1e-9


def test_agsp_strength_inequality_on_random_instances(rng):
    """Filtered-propagator cut strength never beats exp(2 beta gap J)."""
    beta = 1.5
    for _ in range(5):
        h, v, (da, db) = random_gapped_instance(rng, max_local=4)
        k = build_agsp(h, beta)
        op = BipartiteOperator((da,), (db,), k.matrix)
        est = se_lower_search(op, seeds=3, iterations=60)
        cap = k.strength_cap(best_upper(v))
        assert est.lower <= cap + 1e-8


def test_ground_tail_experiment_reports_decay():
    chain = build_long_range_ising(6, d=2, j0=1.0, eta=3.0, hx=0.6, hz=0.2)
    out = ground_tail_experiment(chain, 3, [1, 2, 4, 8])
    assert out["gap"] > 0
    assert out["j_tilde"] == pytest.approx(3.0, abs=1e-12)
    assert all(r["ok"] for r in out["rows"])
    tails = [r["tail2"] for r in out["rows"]]
    assert all(a >= b - 1e-15 for a, b in zip(tails, tails[1:]))
    assert not out["small_gap_warning"]


def test_area_law_constant_values():
    # hand-evaluated at kappa = 1/6
    assert c_kappa_1(1.0 / 6.0) == pytest.approx(35.0839326111784, abs=1e-6)
    assert c_kappa_2(1.0 / 6.0) == pytest.approx(103.148179153628, abs=1e-6)
    consts = area_law_constants(g_tilde=1.0, delta=1.0, s0=2.0, c0_tilde=1.0)
    assert consts.kappa == pytest.approx(1.0 / 6.0, abs=1e-12)
    assert consts.entropy_bound == pytest.approx(
        consts.ck1 * consts.log_c + consts.ck2, abs=1e-12
    )
    # log-space tail cap agrees with the direct expression when it fits
    small = area_law_constants(g_tilde=0.2, delta=2.0, s0=1.0, c0_tilde=0.1)
    d = 64
    assert small.tail_cap(d) == pytest.approx(
        small.c * d ** (-small.kappa), rel=1e-9
    )


def test_area_law_constants_survive_huge_exponents():
    consts = area_law_constants(g_tilde=50.0, delta=0.1, s0=8.0, c0_tilde=3.0)
    assert consts.c == math.inf
    assert consts.tail_cap(2) == math.inf
    assert math.isfinite(consts.entropy_bound)


def test_boundary_adiabatic_chain_holds_together():
    family = make_coupled_qudit_family(delta=1.0, coupling=0.3)
    out = boundary_adiabatic_experiment(family, epsilon=0.1, beta=3.0, d_grid=[1, 2])
    assert out["adiabatic_ok"]
    assert out["adiabatic_error"] <= out["adiabatic_cap"] + 1e-9
    assert out["agsp_defect_ground"] <= out["agsp_defect_bound"] + 1e-9
    assert out["entropy_ok"]
    assert out["entropy_target"] <= out["entropy_bound"] + 1e-9
    rows = out["rows"]
    assert all(r["ok"] for r in rows)
    # full rank reproduces the target state up to discretization error
    assert rows[-1]["err"] < 1e-3


def test_boundary_adiabatic_rejects_closed_gap():
    family = make_coupled_qudit_family(delta=1e-9, coupling=0.0)
    with pytest.raises((GapClosedError, DegenerateError)):
        boundary_adiabatic_experiment(family, epsilon=0.1, beta=2.0, d_grid=[1])
