import json

import numpy as np
import pytest

import qruler


def basis(n=41, s=1.0):
    return qruler.build_mode_basis(qruler.RulerConfig(n, s))


def test_modes_are_orthonormal():
    b = basis(11, 0.0)
    u = b.u_matrix
    assert u.shape == (10, 11)
    assert np.allclose(u @ u.T, np.eye(10), atol=1e-12)
    assert np.allclose(u.sum(axis=1), 0.0, atol=1e-12)
    assert np.all(np.diff(b.omegas) > 0)


def test_coherence_and_response():
    b = basis()
    model = qruler.build_dimensionless_model(b, 2.0)
    c = qruler.coherence_longtime(-1, 1, model, b)
    assert 0.0 < c < 1.0
    p = qruler.response_single(0, model, b)
    assert abs(p.mean.sum()) < 1e-10
    assert np.argmax(p.mean) == b.half


def test_cstar():
    b = basis()
    r = qruler.cstar(-1, 1, 0.1, qruler.build_dimensionless_model(b, 2.0), b)
    assert r.cstar == pytest.approx(0.891753, rel=1e-5)
    assert "log_cstar" in json.loads(r.to_json())
    free = qruler.cstar(-1, 1, 0.1, qruler.build_dimensionless_model(b, 0.0), b)
    assert free.cstar == pytest.approx(1.0, rel=1e-10)


def test_run_presets():
    text = qruler.run("cstar-sweep", preset="fig6", threads=2)
    lines = text.strip().splitlines()
    assert lines[0] == "N,lambda,c,separation,cstar"
    assert len(lines) == 8
    assert text == qruler.run("cstar-sweep", preset="fig6", threads=1)
    doc = json.loads(qruler.run("modes", preset="modes41", format="json"))
    assert doc["columns"] == ["alpha", "n", "u", "omega"]
    assert "fig3a" in qruler.preset_names()


def test_errors():
    with pytest.raises(qruler.ConfigError):
        qruler.build_mode_basis(qruler.RulerConfig(4))
    with pytest.raises(qruler.ConfigError):
        qruler.run("response", preset="fig6")
    with pytest.raises(qruler.ConfigError):
        qruler.run("cstar-sweep", preset="fig6", config="separations = 0")
    with pytest.raises(qruler.DomainError):
        b = basis()
        qruler.cstar(1, 1, 0.1, qruler.build_dimensionless_model(b, 2.0), b)
