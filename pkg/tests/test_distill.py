import numpy as np
import pytest

from choilab import RunConfig, linalg
from choilab.choi import (LinearMap, ad_v_choi, choi_of_map, max_entangled_vector, phi_lambda, trace_map)
from choilab.distill import (NOT_TWO_POS, TWO_POS_CERTIFIED, cor7_check, distill_report, max_entangled_family,
                             prop5_check, prop6_check, product_vector_singular_values, regroup_operator,
                             regroup_vector, tensor_power_map)
from choilab.errors import DimensionOverflow, NegativeLambda, NotNormalized
from choilab.norms import schmidt_info

from conftest import crandn, random_unit

CFG = RunConfig(restarts=16)


def unit_hs(rng, d):
    v = crandn(rng, d, d)
    return v / np.linalg.norm(v)


def test_tensor_power_trivial():
    phi = trace_map(2)
    assert tensor_power_map(phi, 1) is phi
    np.testing.assert_array_equal(tensor_power_map(phi, 2).choi, np.eye(16))


def test_tensor_power_matches_matrix_unit_construction(rng):
    v = crandn(rng, 2, 2)
    vv = np.kron(v, v)
    direct = choi_of_map(lambda x: vv @ x @ vv.conj().T, 4, 4)
    assert tensor_power_map(ad_v_choi(v), 2).allclose(direct, 1e-12)


def test_tensor_power_of_general_map_matches_matrix_units(rng):
    phi = LinearMap(2, 2, crandn(rng, 4, 4))

    def two_copy(x):
        # (phi (x) phi)(a (x) b) = phi(a) (x) phi(b), extended linearly over matrix units
        out = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        coeff = x[i * 2 + k, j * 2 + l]
                        out += coeff * np.kron(phi(linalg.matrix_unit(i, j, 2)), phi(linalg.matrix_unit(k, l, 2)))
        return out

    assert tensor_power_map(phi, 2).allclose(choi_of_map(two_copy, 4, 4), 1e-12)


def test_tensor_power_is_regrouped_kron(rng):
    phi = LinearMap(2, 3, crandn(rng, 6, 6))
    two = tensor_power_map(phi, 2)
    np.testing.assert_allclose(two.choi, regroup_operator(np.kron(phi.choi, phi.choi), 2, 3), atol=1e-12)


def test_tensor_power_cap():
    with pytest.raises(DimensionOverflow):
        tensor_power_map(trace_map(3), 2, cap=50)


def test_expectation_factorizes(rng):
    c = LinearMap(3, 3, crandn(rng, 9, 9)).choi
    c = c + c.conj().T
    big = tensor_power_map(LinearMap(3, 3, c), 2).choi
    a, b = random_unit(rng, 9), random_unit(rng, 9)
    joint = regroup_vector(np.kron(a, b), 3, 3)
    lhs = np.vdot(joint, big @ joint)
    rhs = np.vdot(a, c @ a) * np.vdot(b, c @ b)
    assert abs(lhs - rhs) <= 1e-10 * max(1, abs(rhs))


def test_product_singular_values_examples(rng):
    prod = np.kron(random_unit(rng, 2), random_unit(rng, 3))
    info = product_vector_singular_values(prod, prod, (2, 3))
    assert info.schmidt_rank == 1
    psi = max_entangled_vector(2)
    np.testing.assert_allclose(product_vector_singular_values(psi, psi, (2, 2)).singular_values,
                               np.full(4, 0.5), atol=1e-14)
    a, b = random_unit(rng, 9), random_unit(rng, 9)
    sa = np.linalg.svd(a.reshape(3, 3), compute_uv=False)
    sb = np.linalg.svd(b.reshape(3, 3), compute_uv=False)
    got = product_vector_singular_values(a, b, (3, 3)).singular_values
    np.testing.assert_allclose(got, np.sort(np.outer(sa, sb).ravel())[::-1], atol=1e-10)


def test_regrouped_max_entangled_pair():
    d = 3
    psi = max_entangled_vector(d)
    info = schmidt_info(regroup_vector(np.kron(psi, psi), d, d), d * d, d * d)
    np.testing.assert_allclose(info.singular_values, np.full(d * d, 1 / d), atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_prop6_max_entangled(d):
    v = max_entangled_family(d)
    assert prop6_check(v, d / 4).fires
    assert not prop6_check(v, d / 4 * (1 + 1e-6)).fires
    assert cor7_check(v, d / 4).fires
    assert not cor7_check(v, d / 4 * (1 + 1e-6)).fires


def test_prop6_boundary_d4_and_d2():
    assert prop6_check(max_entangled_family(4), 1.0).fires
    v2 = max_entangled_family(2)
    # at d = 2 the criterion stops firing at 1/2, long before the non-CP region starts at 1
    for lam in (0.51, 0.75, 1.5):
        assert not prop6_check(v2, lam).fires
    assert is_cp_family(v2, 1.0) and not is_cp_family(v2, 1.01)


def is_cp_family(v, lam):
    return np.linalg.eigvalsh(phi_lambda(ad_v_choi(v), lam).choi).min() >= -1e-12


def test_prop6_cor7_agree_random(rng):
    for _ in range(100):
        v = unit_hs(rng, int(rng.integers(2, 6)))
        lam = rng.uniform(0, 2)
        assert prop6_check(v, lam).fires == cor7_check(v, lam).fires


def test_criteria_need_normalized_v():
    with pytest.raises(NotNormalized):
        prop6_check(np.eye(2), 0.1)
    with pytest.raises(NotNormalized):
        cor7_check(np.eye(2), 0.1)
    with pytest.raises(NegativeLambda):
        prop6_check(max_entangled_family(2), -1)


def test_prop5_examples():
    cfg = RunConfig(restarts=8)
    v = max_entangled_family(3)
    small = prop5_check(v, 1e-6, cfg)
    assert small.fires and small.certified
    big = prop5_check(v, 30.0, cfg)
    assert not big.fires
    # the norm never exceeds the coarser bound 4 ||V||_(1)^2
    assert big.value <= 4 / 3 + 1e-9


def test_distill_one_copy_transition():
    for d in (2, 3, 4):
        v = max_entangled_family(d)
        assert distill_report(v, d / 2, 1).overall == TWO_POS_CERTIFIED
        assert distill_report(v, d / 2 * (1 + 1e-6), 1).overall == NOT_TWO_POS


def test_distill_two_copies_examples():
    cfg = RunConfig(restarts=8)
    v = max_entangled_family(3)
    fired = distill_report(v, 0.75, 2, cfg, run_prop5=False)
    assert fired.overall == TWO_POS_CERTIFIED
    assert fired.criterion("prop6").fires and fired.criterion("cor7").fires
    assert fired.block_check.positive
    beyond = distill_report(v, 3.5, 2, cfg, run_prop5=False)
    assert beyond.overall == NOT_TWO_POS
    w = beyond.block_check.witness
    assert schmidt_info(w, 9, 9, 1e-8).schmidt_rank <= 2


def test_distill_caps_dimension():
    with pytest.raises(DimensionOverflow):
        distill_report(max_entangled_family(7), 1.0, 2)
