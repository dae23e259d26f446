import json

import numpy as np
import pytest

from choilab import RunConfig, io
from choilab.choi import LinearMap, ad_v_choi
from choilab.distill import distill_report, max_entangled_family
from choilab.errors import ShapeMismatch
from choilab.norms import schmidt_op_norm
from choilab.positivity import is_k_positive_phi_lambda

from conftest import crandn


def test_matrix_round_trip_is_bit_exact(rng):
    a = crandn(rng, 3, 4) * 1e-7 + 1 / 3
    back = io.matrix_from_json(json.loads(io.dumps(io.matrix_to_json(a))))
    np.testing.assert_array_equal(back, a)


def test_matrix_json_layout():
    obj = io.matrix_to_json(np.array([[1, 2j], [3, 4]]))
    assert obj == {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]}


def test_matrix_json_size_check():
    with pytest.raises(ShapeMismatch):
        io.matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(ShapeMismatch):
        io.matrix_from_json({"rows": 2})


def test_map_round_trip(rng, tmp_path):
    phi = LinearMap(2, 3, crandn(rng, 6, 6))
    path = tmp_path / "phi.json"
    io.save_json(path, io.map_to_json(phi))
    back = io.load_map(path)
    assert (back.m, back.n) == (2, 3)
    np.testing.assert_array_equal(back.choi, phi.choi)
    np.testing.assert_array_equal(io.load_matrix(path), phi.choi)


def test_certificate_round_trip():
    v = np.eye(3) / np.sqrt(3)
    cert = is_k_positive_phi_lambda(v, 2.0, 2)
    back = io.certificate_from_json(json.loads(io.dumps(io.certificate_to_json(cert))))
    assert back.verdict == cert.verdict and back.margin == cert.margin and back.k == cert.k
    np.testing.assert_array_equal(back.witness, cert.witness)
    inf = is_k_positive_phi_lambda(v, 0.0, 1)
    back = io.certificate_from_json(json.loads(io.dumps(io.certificate_to_json(inf))))
    assert back.margin == np.inf


def test_reports_serialize_without_nan(rng):
    res = schmidt_op_norm(ad_v_choi(crandn(rng, 2, 2)).choi, 2, 2, 1, RunConfig(restarts=4))
    json.loads(io.dumps(io.norm_result_to_json(res)))
    rep = distill_report(max_entangled_family(2), 0.3, 2, RunConfig(restarts=4))
    text = io.dumps(io.distill_report_to_json(rep))
    assert json.loads(text)["overall"] == rep.overall


def test_config_defaults_and_validation():
    cfg = RunConfig()
    assert (cfg.restarts, cfg.max_sweeps, cfg.improve_tol, cfg.oracle_cap, cfg.oracle_tol) == (32, 500, 1e-10, 16, 1e-6)
    assert (cfg.degeneracy_tol, cfg.safety_margin, cfg.max_d) == (1e-7, 1e-4, 6)
    with pytest.raises(ValueError):
        RunConfig(oracle_tol=0)
    with pytest.raises(ValueError):
        RunConfig.from_dict({"bogus": 1})
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_config_load(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"restarts": 5}))
    assert RunConfig.load(path, env={}).restarts == 5
    assert RunConfig.load(None, env={"CHOI_LAB_SEED": "17"}).seed == 17
    path.write_text(json.dumps({"seed": 3}))
    assert RunConfig.load(path, env={"CHOI_LAB_SEED": "17"}).seed == 3
