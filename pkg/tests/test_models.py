"""Chain Hamiltonians and the three analytic protocol families."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from entspec import (
    BadAlphaError,
    ChainHamiltonian,
    Cut,
    LocalTerm,
    PureState,
    TimeTooLongError,
    TooLargeError,
    basis_product_state,
    build_long_range_ising,
    build_nearest_neighbor_chain,
    build_saturation_dynamics,
    build_toy_two_qubit,
    build_unbounded_dynamics,
    chain_from_json,
    chain_to_json,
    random_dense_instance,
    random_product_state,
    renyi_entropy,
    schmidt_decompose,
    split_at_cut,
)

X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def test_local_term_validation():
    t = LocalTerm(support=(3, 1), matrix=np.kron(Z, Z))
    assert t.support == (1, 3)
    assert t.diameter == 2
    assert t.norm == pytest.approx(1.0)
    with pytest.raises(ValueError):
        LocalTerm(support=(0, 0), matrix=np.kron(Z, Z))
    with pytest.raises(ValueError):
        LocalTerm(support=(0,), matrix=np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_chain_metadata_and_dense():
    terms = (
        LocalTerm(support=(0, 1), matrix=0.5 * np.kron(Z, Z)),
        LocalTerm(support=(1, 2), matrix=0.5 * np.kron(Z, Z)),
        LocalTerm(support=(1,), matrix=0.3 * X),
    )
    chain = ChainHamiltonian(n=3, dims=(2, 2, 2), terms=terms)
    assert chain.k == 2
    assert chain.g == pytest.approx(1.3)  # site 1 touches all three terms
    h = chain.dense()
    assert np.allclose(h, h.conj().T)
    assert np.allclose(chain.sparse().toarray(), h)
    manual = (
        0.5 * np.kron(np.kron(Z, Z), np.eye(2))
        + 0.5 * np.kron(np.eye(2), np.kron(Z, Z))
        + 0.3 * np.kron(np.kron(np.eye(2), X), np.eye(2))
    )
    assert np.allclose(h, manual)


def test_chain_validation_errors():
    bad = (LocalTerm(support=(0, 3), matrix=np.kron(Z, Z)),)
    with pytest.raises(ValueError):
        ChainHamiltonian(n=3, dims=(2, 2, 2), terms=bad)
    with pytest.raises(ValueError):
        ChainHamiltonian(n=2, dims=(2,), terms=())
    # declared power decay must actually hold
    strong = (LocalTerm(support=(0, 2), matrix=np.kron(Z, Z)),)
    with pytest.raises(ValueError):
        ChainHamiltonian(
            n=3, dims=(2, 2, 2), terms=strong, decay=("power", 1.0, 3.0)
        )
    with pytest.raises(TooLargeError):
        build_nearest_neighbor_chain(30, d=2, j=1.0).dense(cap=2 ** 10)


def test_chain_json_roundtrip():
    chain = build_long_range_ising(4, d=2, j0=1.0, eta=3.0, hx=0.3, hz=0.1)
    back = chain_from_json(chain_to_json(chain))
    assert back.n == chain.n and back.dims == chain.dims
    assert back.decay == chain.decay
    assert np.allclose(back.dense(), chain.dense())


def test_long_range_ising_shape():
    n = 5
    chain = build_long_range_ising(n, d=2, j0=1.0, eta=3.0, hx=0.4, hz=0.2)
    pair_terms = [t for t in chain.terms if len(t.support) == 2]
    assert len(pair_terms) == n * (n - 1) // 2
    assert chain.decay == ("power", 1.0, 3.0)
    assert chain.boundary_strength_cap() == pytest.approx(3.0, abs=1e-12)
    from entspec import EtaTooSmallError

    with pytest.raises(EtaTooSmallError):
        build_long_range_ising(4, eta=1.5)


def test_split_at_cut_reconstructs():
    chain = build_long_range_ising(4, d=2, j0=1.0, eta=3.0, hx=0.4, hz=0.2)
    for s in (1, 2, 3):
        parts = split_at_cut(chain, s)
        assert np.allclose(parts.dense_full(), chain.dense())
        # the boundary operator carries a valid unit-norm decomposition
        v = parts.v_ab
        assert v.decomposition is not None
        total = sum(abs(j) for j, _, _ in v.decomposition)
        assert total >= parts.boundary_norm_sum - 1e-9
        assert total <= chain.boundary_strength_cap() * 4 + 1e-9


def test_saturation_state_matches_direct_exponential():
    """Closed-form pulse state against expm(-i V x) |00>."""
    dyn = build_saturation_dynamics(m_levels=3, j=0.7, n_pairs=2)
    d = 4
    psi0 = basis_product_state((d, d), (0, 0)).amps
    for x in (0.1, 0.45):
        direct = expm(-1j * dyn.v.matrix * x) @ psi0
        closed = dyn.per_pair_state(x).amps
        assert np.linalg.norm(direct - closed) < 1e-12
        spec = schmidt_decompose(dyn.per_pair_state(x), Cut.of([0], 2))
        assert np.allclose(spec.coeffs, dyn.per_pair_spectrum(x).coeffs, atol=1e-12)


def test_saturation_protocol_entropy():
    dyn = build_saturation_dynamics(m_levels=4, j=1.0, n_pairs=10)
    t = 1.0
    e = dyn.protocol_entropy_half(t)
    # hand-evaluated closed form 2 n ln(cos z + sqrt(M) sin z)
    assert e == pytest.approx(6.404029359546116, abs=1e-12)
    assert dyn.protocol_entropy(0.5, t) == pytest.approx(e, abs=1e-10)
    assert dyn.in_window(t)
    assert dyn.average_rate(t) >= dyn.rate_lower_bound(t) - 1e-12
    assert dyn.rate_lower_bound(t) == pytest.approx(4.8, abs=1e-12)
    with pytest.raises(ValueError):
        dyn.average_rate(0.0)


def test_saturation_rate_approaches_strength():
    dyn = build_saturation_dynamics(m_levels=4, j=1.0, n_pairs=1000)
    ratio = dyn.average_rate(1.0) / (2.0 * dyn.se_strength_exact)
    assert ratio == pytest.approx(0.997506645074399, abs=1e-12)
    assert abs(ratio - 1.0) < 0.02


def test_saturation_stage_list():
    dyn = build_saturation_dynamics(m_levels=2, j=1.0, n_pairs=3)
    stages = dyn.stage_list(0.3)
    assert [s[0] for s in stages] == ["pulse", "swap", "pulse", "swap", "pulse"]
    assert sum(s[2] for s in stages if s[0] == "pulse") == pytest.approx(0.3)


def test_unbounded_spectrum_is_normalized():
    for d0 in (2, 16, 64):
        dyn = build_unbounded_dynamics(d0, 1.0, 1.0)
        lam = dyn.spectrum().coeffs
        assert float(np.sum(lam ** 2)) == pytest.approx(1.0, abs=1e-12)


def test_unbounded_entropy_values_and_bound():
    dyn = build_unbounded_dynamics(16, 1.0, 1.0)
    assert dyn.entropy(0.25) == pytest.approx(2.133600597822918, abs=1e-12)
    assert dyn.entropy_lower_bound(0.25) == pytest.approx(
        -0.462098120373297, abs=1e-12
    )
    for d0 in (16, 256):
        dyn = build_unbounded_dynamics(d0, 1.0, 1.0)
        for alpha in (0.1, 0.25, 0.4):
            assert dyn.entropy(alpha) >= dyn.entropy_lower_bound(alpha) - 1e-9
        # half-order entropy stays within twice the strength budget
        assert dyn.entropy(0.5) <= 2.0 * dyn.strength_budget() + 1e-9


def test_unbounded_validation():
    with pytest.raises(TimeTooLongError):
        build_unbounded_dynamics(16, 1.0, 1.5)
    with pytest.raises(ValueError):
        build_unbounded_dynamics(1, 1.0, 0.5)
    with pytest.raises(BadAlphaError):
        build_unbounded_dynamics(16, 1.0, 1.0).entropy_lower_bound(0.6)


def test_toy_state_matches_direct_exponential():
    toy = build_toy_two_qubit()
    psi0 = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    for t in (0.2, 0.7, 1.3):
        direct = expm(-1j * toy.hamiltonian * t) @ psi0
        assert np.linalg.norm(direct - toy.state(t).amps) < 1e-12


def test_toy_rates_match_finite_differences():
    toy = build_toy_two_qubit()
    h = 1e-6
    for alpha in (0.5, 0.75, 1.0, 2.0):
        for t in (0.3, 0.6, 1.1):
            fd = (toy.entropy(alpha, t + h) - toy.entropy(alpha, t - h)) / (2 * h)
            assert toy.rate(alpha, t) == pytest.approx(fd, abs=1e-5)
    # frozen closed-form values
    assert toy.rate(0.5, 0.3) == pytest.approx(1.054983012341249, abs=1e-12)
    assert toy.rate(1.0, 0.3) == pytest.approx(1.325019849425193, abs=1e-12)
    assert toy.rate(math.inf, 0.2) == pytest.approx(0.405420071017345, abs=1e-12)


def test_toy_rate_trichotomy():
    toy = build_toy_two_qubit()
    assert toy.rate_limit_zero(0.25) == math.inf
    assert toy.rate_limit_zero(0.5) == 2.0
    assert toy.rate_limit_zero(0.75) == 0.0
    assert toy.rate_limit_zero(math.inf) == 0.0
    # small-t behavior backs the trichotomy numerically
    assert toy.rate(0.25, 1e-4) > 50.0
    assert toy.rate(0.5, 1e-4) == pytest.approx(2.0, abs=1e-3)
    assert abs(toy.rate(0.75, 1e-4)) < 0.1


def test_product_state_helpers(rng):
    st = basis_product_state((2, 3, 2), (1, 2, 0))
    assert st.amps[1 * 6 + 2 * 2 + 0] == pytest.approx(1.0)
    assert st.norm == pytest.approx(1.0)
    rnd = random_product_state((2, 2, 2), rng)
    assert rnd.norm == pytest.approx(1.0, abs=1e-12)
    spec = schmidt_decompose(rnd, Cut.of([0], 3))
    assert spec.rank == 1


def test_random_dense_instance_structure(rng):
    for _ in range(5):
        h, v, state = random_dense_instance(rng)
        da, db = v.dim_a, v.dim_b
        assert da * db <= 256
        assert np.allclose(h, h.conj().T)
        assert v.decomposition is not None
        assert state.norm == pytest.approx(1.0, abs=1e-12)
        assert state.dims == (da, db)
