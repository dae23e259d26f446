import numpy as np
import pytest

from choilab import RunConfig, linalg
from choilab.choi import LinearMap, ad_v_choi, max_entangled_projection, phi_lambda
from choilab.entanglement import (build_witness, check_support_bound, hankel_complement_projection,
                                  is_completely_entangled, mu_of_projection)
from choilab.errors import ConeContainsCP, Degenerate, NotProjection
from choilab.norms import Cone, schmidt_info

from conftest import crandn, random_unit

CFG = RunConfig(restarts=16)


def projection_on(vectors):
    return linalg.projection_onto(np.column_stack(vectors))


def singlet():
    e0, e1 = np.eye(2)
    return (np.kron(e0, e1) - np.kron(e1, e0)) / np.sqrt(2)


def test_mu_examples():
    assert mu_of_projection(max_entangled_projection(3), 3, 3, Cone("P"), CFG).value == pytest.approx(1 / 3)
    assert mu_of_projection(max_entangled_projection(3), 3, 3, Cone("Pk", 2), CFG).value == pytest.approx(2 / 3)
    s = singlet()
    assert mu_of_projection(np.outer(s, s), 2, 2, Cone("P"), CFG).value == pytest.approx(0.5)


def test_mu_is_one_for_product_range(rng):
    psi = np.kron(random_unit(rng, 2), random_unit(rng, 3))
    res = mu_of_projection(np.outer(psi, psi.conj()), 2, 3, Cone("P"), CFG)
    assert res.value == pytest.approx(1, abs=1e-9)


def test_cone_restrictions():
    e = max_entangled_projection(2)
    with pytest.raises(ConeContainsCP):
        mu_of_projection(e, 2, 2, Cone("CP"), CFG)
    with pytest.raises(ConeContainsCP):
        mu_of_projection(e, 2, 2, Cone("Pk", 2), CFG)
    with pytest.raises(NotProjection):
        mu_of_projection(2 * e, 2, 2, Cone("P"), CFG)


def test_singlet_witness():
    s = singlet()
    rep = build_witness(np.outer(s, s), 2, 2, Cone("P"), CFG, samples=100)
    assert rep.mu == pytest.approx(0.5, abs=1e-9)
    assert rep.lam == pytest.approx(2, abs=1e-8)
    assert rep.support_matches and rep.rank_e == 1 and rep.bound_ok
    assert all(abs(c["expectation"] + 1) <= 1e-10 for c in rep.certificates)
    assert rep.block_check.verdict == "certified_yes"
    np.testing.assert_allclose(rep.witness_choi, np.eye(4) - 2 * np.outer(s, s), atol=1e-8)


def test_witness_degenerate_for_product_vector():
    psi = np.kron([1.0, 0], [0, 1.0])
    with pytest.raises(Degenerate):
        build_witness(np.outer(psi, psi), 2, 2, Cone("P"), CFG)


def test_witness_for_schmidt_rank_two_cone():
    e = max_entangled_projection(3)
    rep = build_witness(e, 3, 3, Cone("Pk", 2), CFG, samples=20)
    assert rep.mu == pytest.approx(2 / 3, abs=1e-8)
    assert all(c["violates"] for c in rep.certificates)
    assert rep.block_check.positive


def test_witness_is_phi_lambda_of_its_projection():
    # for e = |psi+><psi+| the witness is Tr - d Ad_{1/sqrt d}: k-positive exactly at the boundary
    d = 3
    rep = build_witness(max_entangled_projection(d), d, d, Cone("P"), CFG, samples=5)
    expected = phi_lambda(ad_v_choi(np.eye(d) / np.sqrt(d)), d).choi
    np.testing.assert_allclose(rep.witness_choi, expected, atol=1e-8)


def test_hankel_complement_is_completely_entangled():
    e = hankel_complement_projection(3, 3)
    assert round(np.trace(e).real) == 4
    ev = is_completely_entangled(e, 3, 3, CFG)
    assert ev.completely_entangled and ev.mu < 1
    rep = build_witness(e, 3, 3, Cone("P"), CFG, samples=20)
    assert rep.bound_ok and rep.support_matches


def test_antisymmetric_span_entangled():
    e1, e2, e3 = np.eye(3)
    vecs = [np.kron(e1, e2) - np.kron(e2, e1), np.kron(e1, e3) - np.kron(e3, e1)]
    ev = is_completely_entangled(projection_on(vecs), 3, 3, CFG)
    assert ev.completely_entangled
    assert ev.mu == pytest.approx(0.5, abs=1e-8)


def test_large_subspace_contains_product_vector(rng):
    q = np.linalg.qr(crandn(rng, 9, 5))[0]
    ev = is_completely_entangled(q @ q.conj().T, 3, 3, CFG)
    assert not ev.completely_entangled
    assert schmidt_info(ev.best_product_vector, 3, 3, 1e-6).schmidt_rank == 1


def test_support_bound_examples(rng):
    d = 3
    v = np.eye(d) / np.sqrt(d)
    holds, rank_neg, bound = check_support_bound(phi_lambda(ad_v_choi(v), 1.4), 2)
    assert (holds, rank_neg, bound) == (True, 1, 1)
    for _ in range(20):
        w = crandn(rng, 4, 4)
        for k in range(1, 4):
            holds, rank_neg, _ = check_support_bound(phi_lambda(ad_v_choi(w), 0.99 / np.sum(
                np.linalg.svd(w, compute_uv=False)[:k] ** 2)), k)
            assert holds and rank_neg <= 1
