"""JSON documents for certificates, Ramana points and analysis reports.

Every document carries ``schema_version`` and ``kind`` and is validated
against the schemas shipped in ``ramanadual/schemas``. Floats are written
with Python's shortest round-trip repr, so parsing gives back the same
bits; non-finite values are the strings ``"Infinity"``, ``"-Infinity"`` and
``"NaN"``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from .duals import GapReport, RamanaSolution
from .facial import FacialCertificate, verify_certificate
from .model import RescalingTransform, SdpInstance
from .tangent import TangentWitness

__all__ = [
    "SCHEMA_VERSION",
    "SchemaError",
    "AnalysisReport",
    "instance_digest",
    "load_schema",
    "validate",
    "certificate_to_json",
    "certificate_from_json",
    "ramana_solution_to_json",
    "ramana_solution_from_json",
    "analysis_report_to_json",
    "analysis_report_from_json",
]

SCHEMA_VERSION = 1
SIGN_CONVENTION = ("(P): sup c'x s.t. sum_i x_i A_i <= B; (D): inf <B, Y> s.t. A* Y = c, Y psd."
                   " SDPA files hold F0 = -B, Fi = -A_i and objective -c.")
_NONFINITE = {"Infinity": math.inf, "-Infinity": -math.inf, "NaN": math.nan}


class SchemaError(ValueError):
    """A document does not match its schema or kind."""


@lru_cache(maxsize=None)
def load_schema(kind: str) -> dict:
    """The published schema for ``kind`` (``certificate``, ``ramana-solution``, ``analysis-report``)."""
    path = resources.files("ramanadual") / "schemas" / f"{kind}.json"
    return json.loads(path.read_text())


def validate(doc: dict, kind: str | None = None) -> None:
    """Raise :class:`SchemaError` unless ``doc`` validates against the schema of its kind."""
    kind = kind or doc.get("kind")
    if kind is None or doc.get("kind") != kind:
        raise SchemaError(f"expected a {kind!r} document, got kind {doc.get('kind')!r}")
    try:
        jsonschema.validate(doc, load_schema(kind))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{kind} document invalid at {where}: {exc.message}") from None


def instance_digest(inst: SdpInstance) -> str:
    """SHA-256 of the instance data (order, matrices and ``c`` as float64); the name is ignored."""
    h = hashlib.sha256(b"ramanadual-instance-v1")
    h.update(np.array([inst.n, inst.m], dtype="<i8").tobytes())
    # adding 0.0 maps -0.0 to 0.0
    for M in (inst.B, *inst.A, inst.c):
        h.update((np.ascontiguousarray(M, dtype="<f8") + 0.0).tobytes())
    return h.hexdigest()


def _real(v) -> float | str:
    v = float(v)
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return v


def _from_real(v) -> float:
    return _NONFINITE[v] if isinstance(v, str) else float(v)


def _mat(M) -> list:
    return [[_real(v) for v in row] for row in np.asarray(M, dtype=float)]


def _from_mat(rows) -> np.ndarray:
    return np.array([[_from_real(v) for v in row] for row in rows], dtype=float)


def _plain(obj):
    """JSON-compatible copy of free-form evidence."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _real(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _loads(text: str, kind: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("top-level JSON value must be an object")
    validate(doc, kind)
    return doc


def _check_digest(doc: dict, inst: SdpInstance | None) -> None:
    dig = doc.get("instance_digest")
    if inst is not None and dig is not None and dig != instance_digest(inst):
        raise SchemaError("document was produced for a different instance (digest mismatch)")


# Certificates

def certificate_to_json(cert: FacialCertificate, inst: SdpInstance | None = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "certificate",
        "instance_digest": instance_digest(inst) if inst is not None else None,
        "n": cert.n,
        "face_rank": cert.face_rank,
        "block_sizes": [int(b) for b in cert.block_sizes],
        "accumulated_T": _mat(cert.accumulated_T.T),
        "transform_factors": list(cert.accumulated_T.factors),
        "certificates": [_mat(Y) for Y in cert.Ys],
    }
    validate(doc)
    return _dumps(doc)


def certificate_from_json(text: str, inst: SdpInstance | None = None) -> FacialCertificate:
    """Parse a certificate document; with ``inst``, its digest must match."""
    doc = _loads(text, "certificate")
    _check_digest(doc, inst)
    n = doc["n"]
    Ys = tuple(_from_mat(Y) for Y in doc["certificates"])
    if len(Ys) != len(doc["block_sizes"]) or any(Y.shape != (n, n) for Y in Ys):
        raise SchemaError("certificate list does not match block_sizes or order n")
    T = _from_mat(doc["accumulated_T"])
    if T.shape != (n, n):
        raise SchemaError("accumulated_T has the wrong shape")
    return FacialCertificate(Ys, tuple(doc["block_sizes"]), doc["face_rank"],
                             RescalingTransform(T, tuple(doc.get("transform_factors", ()))))


# Ramana solutions

def ramana_solution_to_json(sol: RamanaSolution, inst: SdpInstance | None = None) -> str:
    levels = [{"level": i, "U": _mat(sol.U[i]), "V": _mat(sol.V[i]),
               "W": _mat(sol.witnesses[i - 1].W), "beta": _real(sol.witnesses[i - 1].beta)}
              for i in range(1, len(sol.U))]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "ramana-solution",
        "instance_digest": instance_digest(inst) if inst is not None else None,
        "n": sol.n,
        "levels": levels,
    }
    validate(doc)
    return _dumps(doc)


def ramana_solution_from_json(text: str, inst: SdpInstance | None = None) -> RamanaSolution:
    """Parse a Ramana point; level 0 is zero and levels must run ``1..n+1``."""
    doc = _loads(text, "ramana-solution")
    _check_digest(doc, inst)
    n = doc["n"]
    levels = sorted(doc["levels"], key=lambda d: d["level"])
    if [d["level"] for d in levels] != list(range(1, n + 2)):
        raise SchemaError(f"levels must be exactly 1..{n + 1}")
    Z = np.zeros((n, n))
    U, V, wits = [Z], [Z], []
    for d in levels:
        Ui, Vi, Wi = _from_mat(d["U"]), _from_mat(d["V"]), _from_mat(d["W"])
        if not (Ui.shape == Vi.shape == Wi.shape == (n, n)):
            raise SchemaError(f"level {d['level']}: matrices must be {n} x {n}")
        U.append(Ui)
        V.append(Vi)
        wits.append(TangentWitness(Wi, _from_real(d["beta"])))
    if inst is not None and inst.n != n:
        raise SchemaError(f"solution has order {n}, instance has order {inst.n}")
    return RamanaSolution(tuple(U), tuple(V), tuple(wits))


# Analysis reports

_VALUE_FIELDS = {
    "primal": "primal_value",
    "classical_dual": "classical_dual_value",
    "strong_dual": "strong_dual_value",
    "ramana": "ramana_value",
    "gap": "gap",
    "ramana_solver": "ramana_solver_value",
    "classical_solver": "classical_solver_value",
}


@dataclass
class AnalysisReport:
    """Serializable summary of a :class:`~ramanadual.duals.GapReport`."""

    name: str
    digest: str
    n: int
    m: int
    face_rank: int | None
    certificate: dict | None
    values: dict
    attainment: dict
    ramana_verified: bool
    transform_condition_numbers: dict = field(default_factory=dict)
    statuses: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    evidence: dict = field(default_factory=dict)
    sign_convention: str = SIGN_CONVENTION

    @classmethod
    def from_gap_report(cls, rep: GapReport, inst: SdpInstance) -> "AnalysisReport":
        cert = None
        cond = {}
        if rep.certificate is not None:
            check = verify_certificate(inst, rep.certificate)
            cert = {"k": rep.certificate.k,
                    "block_sizes": [int(b) for b in rep.certificate.block_sizes],
                    "residuals": [_real(v) for v in check.equation_residuals],
                    "valid": bool(check.valid)}
            cond["accumulated"] = _real(rep.certificate.accumulated_T.condition_number())
        values = {k: _real(getattr(rep, attr)) for k, attr in _VALUE_FIELDS.items()}
        att = {"primal": rep.primal_attained, "classical_dual": rep.classical_dual_attained,
               "ramana": rep.ramana_attained}
        return cls(inst.name, instance_digest(inst), inst.n, inst.m, rep.face_rank, cert, values,
                   {k: None if v is None else bool(v) for k, v in att.items()},
                   bool(rep.ramana_verified), cond, dict(rep.statuses), list(rep.errors),
                   _plain(rep.evidence))

    def value(self, key: str) -> float:
        """A value as a float (``"NaN"`` and friends decoded)."""
        return _from_real(self.values[key])

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "analysis-report",
            "instance": {"name": self.name, "digest": self.digest, "n": self.n, "m": self.m},
            "face_rank": self.face_rank,
            "certificate": self.certificate,
            "values": dict(self.values),
            "attainment": dict(self.attainment),
            "ramana_verified": self.ramana_verified,
            "transform_condition_numbers": dict(self.transform_condition_numbers),
            "sign_convention": self.sign_convention,
            "statuses": dict(self.statuses),
            "errors": list(self.errors),
            "evidence": self.evidence,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AnalysisReport":
        validate(doc, "analysis-report")
        inst = doc["instance"]
        return cls(inst["name"], inst["digest"], inst["n"], inst["m"], doc["face_rank"],
                   doc["certificate"], doc["values"], doc["attainment"], doc["ramana_verified"],
                   doc["transform_condition_numbers"], doc["statuses"], doc["errors"],
                   doc["evidence"], doc["sign_convention"])


def analysis_report_to_json(rep: AnalysisReport | GapReport, inst: SdpInstance | None = None) -> str:
    if isinstance(rep, GapReport):
        if inst is None:
            raise ValueError("converting a GapReport needs its instance")
        rep = AnalysisReport.from_gap_report(rep, inst)
    doc = rep.to_dict()
    validate(doc)
    return _dumps(doc)


def analysis_report_from_json(text: str) -> AnalysisReport:
    return AnalysisReport.from_dict(_loads(text, "analysis-report"))
