from __future__ import annotations

import numpy as np
import pytest

from ramanadual._config import Tolerances, get_tolerances
from ramanadual.duals import embed_classical_dual_point, verify_ramana
from ramanadual.fixtures import example_1_1


def test_defaults(monkeypatch):
    monkeypatch.delenv("RAMANA_TOL", raising=False)
    assert get_tolerances() == Tolerances()


def test_single_value(monkeypatch):
    monkeypatch.setenv("RAMANA_TOL", "1e-5")
    tol = get_tolerances()
    assert (tol.tol_eq, tol.tol_cone) == (1e-5, 1e-5)
    assert tol.tol_fr == Tolerances().tol_fr


def test_named_values(monkeypatch):
    monkeypatch.setenv("RAMANA_TOL", "tol_eq=1e-7, tol_fr=1e-5")
    tol = get_tolerances()
    assert (tol.tol_eq, tol.tol_fr) == (1e-7, 1e-5)


def test_unknown_name(monkeypatch):
    monkeypatch.setenv("RAMANA_TOL", "tol_bogus=1")
    with pytest.raises(ValueError, match="tol_bogus"):
        get_tolerances()


def test_override_reaches_verifiers(monkeypatch):
    # psd point whose equation residual is about 6e-7
    Y = np.array([[1.0, 1.0 + 1e-6], [1.0 + 1e-6, 2.0]])
    sol = embed_classical_dual_point(Y)
    monkeypatch.delenv("RAMANA_TOL", raising=False)
    assert not verify_ramana(example_1_1(), sol)
    monkeypatch.setenv("RAMANA_TOL", "1e-5")
    assert verify_ramana(example_1_1(), sol)
