import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from choilab import RunConfig
from choilab.choi import LinearMap, ad_v_choi, max_entangled_projection, max_entangled_vector, trace_map
from choilab.errors import BadK, NotHermitian, UnsupportedCone
from choilab.norms import (Cone, ky_fan_proj, ky_fan_sq, map_cone_norm, sampling_oracle, schmidt_info,
                           schmidt_op_norm, schmidt_vector_norm, seesaw_max)

from conftest import crandn, random_unit

CFG = RunConfig(restarts=16)


def product_grid_max(a, steps=24):
    """Brute force over real-parametrized product vectors in C^2 (x) C^2 on a grid of angles and phases."""
    thetas = np.linspace(0, np.pi, steps)
    phases = np.linspace(0, 2 * np.pi, steps, endpoint=False)
    best = -np.inf
    for t1, p1, t2, p2 in itertools.product(thetas, phases, thetas, phases):
        x = np.array([np.cos(t1 / 2), np.exp(1j * p1) * np.sin(t1 / 2)])
        y = np.array([np.cos(t2 / 2), np.exp(1j * p2) * np.sin(t2 / 2)])
        psi = np.kron(x, y)
        best = max(best, float(np.real(np.vdot(psi, a @ psi))))
    return best


def test_ky_fan_examples():
    assert ky_fan_sq(np.eye(4), 2).value == pytest.approx(2, abs=1e-12)
    d12 = np.diag([1.0, 2.0])
    assert ky_fan_sq(d12, 1).value == pytest.approx(4, abs=1e-12)
    assert ky_fan_sq(d12, 2).value == pytest.approx(5, abs=1e-12)


def test_ky_fan_bad_k():
    with pytest.raises(BadK):
        ky_fan_sq(np.eye(3), 4)
    with pytest.raises(BadK):
        ky_fan_sq(np.eye(3), 0)


def test_ky_fan_proj_examples():
    u = np.linalg.qr(crandn(np.random.default_rng(1), 4, 4))[0]
    assert ky_fan_proj(u, 3).value == pytest.approx(3, abs=1e-10)
    res = ky_fan_proj(np.diag([3.0, 0, 0]), 1)
    assert res.value == pytest.approx(9)
    np.testing.assert_allclose(res.maximizer, np.diag([1.0, 0, 0]), atol=1e-12)


def test_ky_fan_proj_dominates_random_projections(rng):
    v = crandn(rng, 4, 4)
    best = ky_fan_proj(v, 2).value
    assert best == pytest.approx(ky_fan_sq(v, 2).value, rel=1e-10)
    vvs = v @ v.conj().T
    for _ in range(200):
        q = np.linalg.qr(crandn(rng, 4, 2))[0]
        assert np.trace(q @ q.conj().T @ vvs).real <= best + 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5))
def test_ky_fan_monotone_and_bounded(seed, d):
    v = crandn(np.random.default_rng(seed), d, d)
    vals = [ky_fan_sq(v, k).value for k in range(1, d + 1)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(np.linalg.norm(v) ** 2, rel=1e-10)


def test_schmidt_info_examples():
    prod = np.kron([1, 0], [0, 1.0])
    assert schmidt_info(prod, 2, 2).schmidt_rank == 1
    psi = max_entangled_vector(3)
    info = schmidt_info(psi, 3, 3)
    assert info.schmidt_rank == 3
    np.testing.assert_allclose(info.singular_values, np.full(3, 1 / np.sqrt(3)), atol=1e-14)


def test_schmidt_vector_norm_examples():
    psi = max_entangled_vector(4)
    for k in range(1, 5):
        assert schmidt_vector_norm(psi, 4, 4, k).value ** 2 == pytest.approx(k / 4)
    prod = np.kron(random_unit(np.random.default_rng(3), 3), random_unit(np.random.default_rng(4), 2))
    assert schmidt_vector_norm(prod, 3, 2, 1).value == pytest.approx(1, abs=1e-12)


def test_schmidt_norm_full_rank_is_spectral(rng):
    b = crandn(rng, 6, 6)
    a = b + b.conj().T
    res = schmidt_op_norm(a, 2, 3, 2, CFG)
    assert res.certified == "exact"
    assert res.value == pytest.approx(np.abs(np.linalg.eigvalsh(a)).max(), rel=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_ad_v_schmidt_norm_equals_ky_fan(rng, d):
    v = crandn(rng, d, d)
    for k in range(1, d + 1):
        res = schmidt_op_norm(ad_v_choi(v).choi, d, d, k, CFG)
        kf = ky_fan_sq(v, k).value
        assert kf - 1e-6 * kf <= res.value <= kf * (1 + 1e-9)


def test_max_entangled_product_norm_d3():
    p = max_entangled_projection(3)
    res = schmidt_op_norm(p, 3, 3, 1, CFG)
    assert res.value == pytest.approx(1 / 3, abs=1e-9)
    # independent oracle: random product vectors never beat the see-saw and come close
    rng = np.random.default_rng(7)
    samples = []
    for _ in range(4000):
        psi = np.kron(random_unit(rng, 3), random_unit(rng, 3))
        samples.append(float(np.real(np.vdot(psi, p @ psi))))
    assert max(samples) <= res.value + 1e-12
    assert max(samples) >= res.value - 0.05


def test_product_grid_oracle_d2():
    p = max_entangled_projection(2)
    res = schmidt_op_norm(p, 2, 2, 1, CFG)
    grid = product_grid_max(p)
    assert res.value == pytest.approx(0.5, abs=1e-9)
    assert grid <= res.value + 1e-12 and grid >= res.value - 1e-3


def test_random_operator_against_product_grid(rng):
    b = crandn(rng, 4, 4)
    a = b + b.conj().T
    sup = seesaw_max(a, 2, 2, 1, CFG).value
    grid = product_grid_max(a, steps=20)
    assert grid <= sup + 1e-9
    assert sup - grid <= 0.05 * np.linalg.norm(a, 2)


def test_absolute_value_reading():
    p = max_entangled_projection(3)
    res = schmidt_op_norm(-p, 3, 3, 1, CFG)
    assert res.value == pytest.approx(1 / 3, abs=1e-9)
    assert res.signed_sup == pytest.approx(0, abs=1e-9)


def test_schmidt_norm_monotone_in_k_and_below_spectral(rng):
    b = crandn(rng, 9, 9)
    a = b + b.conj().T
    vals = [schmidt_op_norm(a, 3, 3, k, CFG).value for k in (1, 2, 3)]
    assert vals[0] <= vals[1] + 1e-9 <= vals[2] + 2e-9
    assert vals[2] == pytest.approx(np.abs(np.linalg.eigvalsh(a)).max(), rel=1e-12)


def test_seesaw_history_monotone(rng):
    b = crandn(rng, 16, 16)
    a = b + b.conj().T
    res = seesaw_max(a, 4, 4, 2, CFG)
    assert all(y >= x - 1e-12 for x, y in zip(res.history, res.history[1:]))
    assert res.value <= np.linalg.eigvalsh(a)[-1] + 1e-9
    assert schmidt_info(res.psi, 4, 4, 1e-8).schmidt_rank <= 2


def test_seesaw_is_deterministic(rng):
    b = crandn(rng, 9, 9)
    a = b + b.conj().T
    r1, r2 = seesaw_max(a, 3, 3, 1, CFG), seesaw_max(a, 3, 3, 1, CFG)
    assert r1.value == r2.value
    np.testing.assert_array_equal(r1.psi, r2.psi)


def test_oracle_agrees_with_seesaw(rng):
    b = crandn(rng, 9, 9)
    a = b + b.conj().T
    ss = seesaw_max(a, 3, 3, 1, CFG).value
    oracle, psi = sampling_oracle(a, 3, 3, 1)
    assert abs(ss - oracle) <= 1e-6
    assert schmidt_info(psi, 3, 3, 1e-8).schmidt_rank == 1


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        schmidt_op_norm(np.triu(np.ones((4, 4))), 2, 2, 1, CFG)


def test_map_cone_norms(rng):
    v = crandn(rng, 3, 3)
    phi = ad_v_choi(v)
    assert map_cone_norm(phi, Cone("CP"), CFG).value == pytest.approx(np.linalg.norm(v) ** 2, rel=1e-12)
    assert map_cone_norm(phi, Cone("Pk", 2), CFG).value == pytest.approx(ky_fan_sq(v, 2).value, rel=1e-6)
    assert map_cone_norm(phi, Cone("P"), CFG).value == pytest.approx(ky_fan_sq(v, 1).value, rel=1e-6)
    tr = trace_map(3)
    for cone in (Cone("P"), Cone("Pk", 2), Cone("CP")):
        assert map_cone_norm(tr, cone, CFG).value == pytest.approx(1, abs=1e-9)
    with pytest.raises(UnsupportedCone):
        map_cone_norm(tr, Cone("SP"), CFG)


def test_cone_parse():
    assert Cone.parse("Pk(2)") == Cone("Pk", 2)
    assert Cone.parse("Pk", 3) == Cone("Pk", 3)
    assert Cone.parse("CP") == Cone("CP")
    with pytest.raises(UnsupportedCone):
        Cone.parse("XYZ")
