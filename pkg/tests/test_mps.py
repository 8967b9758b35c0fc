"""MPS factorization, arithmetic, compression accounting, and scaling."""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entspec import (
    Cut,
    LocalTerm,
    MatrixProductState,
    MismatchError,
    PureState,
    TooLargeError,
    UnsupportedLocalityError,
    add,
    apply_local_term,
    compress,
    from_dense,
    local_expectation,
    mps_from_json,
    mps_inner,
    mps_norm,
    mps_to_json,
    product_mps,
    schmidt_decompose,
    to_dense,
)

from helpers import random_state

X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def _rand_mps(rng, n, d, bond):
    """Random MPS with (approximately) uniform internal bond dimension."""
    ts = []
    left = 1
    for i in range(n):
        right = bond if i < n - 1 else 1
        t = rng.standard_normal((left, d, right)) + 1j * rng.standard_normal(
            (left, d, right)
        )
        ts.append(t / np.linalg.norm(t))
        left = right
    return MatrixProductState(tensors=tuple(ts))


def test_mps_validation():
    with pytest.raises(ValueError):
        MatrixProductState(tensors=())
    good = np.zeros((1, 2, 1))
    with pytest.raises(ValueError):
        MatrixProductState(tensors=(np.zeros((2, 2, 1)), good))
    with pytest.raises(ValueError):
        MatrixProductState(tensors=(np.zeros((1, 2, 3)), np.zeros((2, 2, 1))))


@given(st.integers(2, 8), st.integers(0, 10 ** 6))
@settings(max_examples=20, deadline=None)
def test_round_trip_dense(n, seed):
    rng = np.random.default_rng(seed)
    state = random_state(rng, (2,) * n)
    mps, rec = from_dense(state)
    assert rec.sum_delta2 == pytest.approx(0.0, abs=1e-20)
    back = to_dense(mps)
    assert np.linalg.norm(back.amps - state.amps) < 1e-10
    assert mps_norm(mps) == pytest.approx(1.0, abs=1e-10)


def test_from_dense_truncation_records_schmidt_data(rng):
    state = random_state(rng, (2,) * 6)
    mps, rec = from_dense(state, d_max=3)
    # bond 2 is the first bond the cap bites, so its record carries the exact
    # Schmidt data of the input state; later bonds see a perturbed state
    spec = schmidt_decompose(state, Cut.of(range(2), 6))
    first = rec.bonds[1]
    assert np.allclose(first.kept, spec.coeffs[:3], atol=1e-10)
    assert first.delta2 == pytest.approx(float(np.sum(spec.coeffs[3:] ** 2)), abs=1e-10)
    assert first.zeta == pytest.approx(float(np.sum(spec.coeffs[:3])), abs=1e-10)
    later = schmidt_decompose(state, Cut.of(range(3), 6))
    assert rec.bonds[2].delta2 <= float(np.sum(later.coeffs[3:] ** 2)) + 1e-9
    err2 = np.linalg.norm(to_dense(mps).amps - state.amps) ** 2
    assert err2 <= rec.stitching_bound() ** 2 + 1e-10


def test_from_dense_requires_uniform_dimension(rng):
    state = random_state(rng, (2, 3, 2))
    with pytest.raises(MismatchError):
        from_dense(state)


def test_to_dense_cap():
    mps = product_mps(30, d=2)
    with pytest.raises(TooLargeError):
        to_dense(mps, cap=2 ** 10)


def test_product_mps_and_norm():
    v = np.array([1.0, 1.0]) / math.sqrt(2.0)
    mps = product_mps(4, d=2, local_vectors=[v] * 4)
    assert mps.max_bond == 1
    assert mps_norm(mps) == pytest.approx(1.0, abs=1e-12)
    dense = to_dense(mps)
    assert dense.amps[0] == pytest.approx(0.25, abs=1e-12)


def test_add_matches_dense(rng):
    a = random_state(rng, (2,) * 5)
    b = random_state(rng, (2,) * 5)
    ma, _ = from_dense(a)
    mb, _ = from_dense(b)
    combo = add(ma, mb, 1.0, -0.5j)
    assert np.linalg.norm(
        to_dense(combo).amps - (a.amps - 0.5j * b.amps)
    ) < 1e-10
    assert combo.max_bond <= ma.max_bond + mb.max_bond


def test_apply_local_term_matches_dense(rng):
    state = random_state(rng, (2,) * 5)
    mps, _ = from_dense(state)
    one = LocalTerm(support=(2,), matrix=0.7 * X)
    got = to_dense(apply_local_term(mps, one)).amps
    want = np.kron(np.kron(np.eye(4), 0.7 * X), np.eye(4)) @ state.amps
    assert np.linalg.norm(got - want) < 1e-10
    # non-adjacent two-site term
    two = LocalTerm(support=(1, 3), matrix=0.3 * np.kron(Z, X))
    got2 = to_dense(apply_local_term(mps, two)).amps
    embed = np.kron(
        np.kron(np.kron(np.eye(2), 0.3 * Z), np.eye(2)), np.kron(X, np.eye(2))
    )
    assert np.linalg.norm(got2 - embed @ state.amps) < 1e-10


def test_apply_local_term_validation(rng):
    state = random_state(rng, (2,) * 4)
    mps, _ = from_dense(state)
    with pytest.raises(UnsupportedLocalityError):
        apply_local_term(
            mps, LocalTerm(support=(0, 1, 2), matrix=np.eye(8))
        )
    with pytest.raises(MismatchError):
        apply_local_term(mps, LocalTerm(support=(5,), matrix=X))


def test_compress_is_optimal_per_bond(rng):
    """Truncation error against the dense Schmidt tails it must match."""
    state = random_state(rng, (2,) * 7)
    mps, _ = from_dense(state)
    out, rec = compress(mps, 4)
    assert out.max_bond <= 4
    for bond in rec.bonds:
        spec = schmidt_decompose(state, Cut.of(range(bond.bond), 7))
        keep = min(4, spec.coeffs.size)
        # compression happens in sequence, so later bonds see a slightly
        # perturbed state; tails still agree to the truncation scale
        assert bond.delta2 <= float(np.sum(spec.coeffs[keep:] ** 2)) + 1e-9
    err = np.linalg.norm(to_dense(out).amps - state.amps)
    assert err <= rec.stitching_bound() + 1e-9
    assert rec.max_zeta <= math.sqrt(4.0) + 1e-9  # zeta <= sqrt(D) at unit norm


def test_compress_idempotent_zeta_monotone(rng):
    state = random_state(rng, (2,) * 6)
    mps, _ = from_dense(state)
    once, rec1 = compress(mps, 3)
    twice, rec2 = compress(once, 3)
    assert rec2.sum_delta2 <= 1e-16
    assert rec2.max_zeta <= rec1.max_zeta + 1e-10
    assert np.linalg.norm(to_dense(twice).amps - to_dense(once).amps) < 1e-10


def test_mps_inner_and_expectation(rng):
    a = random_state(rng, (2,) * 5)
    b = random_state(rng, (2,) * 5)
    ma, _ = from_dense(a)
    mb, _ = from_dense(b)
    assert mps_inner(ma, mb) == pytest.approx(np.vdot(a.amps, b.amps), abs=1e-10)
    term = LocalTerm(support=(1, 2), matrix=np.kron(X, Z))
    embed = np.kron(np.kron(np.eye(2), np.kron(X, Z)), np.eye(4))
    want = np.vdot(a.amps, embed @ a.amps)
    assert local_expectation(ma, term) == pytest.approx(want, abs=1e-10)


def test_mps_json_round_trip(rng):
    state = random_state(rng, (2,) * 4)
    mps, _ = from_dense(state, d_max=2)
    back = mps_from_json(mps_to_json(mps))
    assert back.n_sites == mps.n_sites
    assert np.linalg.norm(to_dense(back).amps - to_dense(mps).amps) < 1e-12


def _saturated_mps(rng, n, bond):
    """Qubit MPS whose central bonds genuinely reach the requested dimension."""
    ts = []
    left = 1
    for i in range(n):
        right = min(bond, 2 ** (i + 1), 2 ** (n - i - 1)) if i < n - 1 else 1
        t = rng.standard_normal((left, 2, right)) + 1j * rng.standard_normal(
            (left, 2, right)
        )
        ts.append(t / np.linalg.norm(t))
        left = right
    return MatrixProductState(tensors=tuple(ts))


def test_compress_work_scales_like_cubed_bond(rng, monkeypatch):
    """Counted factorization work grows with a log-log slope near 3.

    Wall-clock exponents at these sizes are polluted by BLAS efficiency
    ramps, so the fit runs on m*n*min(m,n) work units per SVD/QR call.
    """
    real_svd, real_qr = np.linalg.svd, np.linalg.qr
    work = [0.0]

    def svd_counting(a, *args, **kw):
        m, n = a.shape[-2:]
        work[0] += m * n * min(m, n)
        return real_svd(a, *args, **kw)

    def qr_counting(a, *args, **kw):
        m, n = a.shape[-2:]
        work[0] += m * n * min(m, n)
        return real_qr(a, *args, **kw)

    monkeypatch.setattr(np.linalg, "svd", svd_counting)
    monkeypatch.setattr(np.linalg, "qr", qr_counting)
    dims = (16, 32, 64, 128)
    totals = []
    for bond in dims:
        mps = _saturated_mps(rng, 20, bond)
        work[0] = 0.0
        compress(mps, bond)
        totals.append(work[0])
    slope = np.polyfit(np.log(dims), np.log(totals), 1)[0]
    assert 2.5 <= slope <= 3.5
