"""Default numerical tolerances.

``RAMANA_TOL`` overrides them whenever :func:`get_tolerances` is called: a float
(applied to ``tol_eq`` and ``tol_cone``) or ``name=value`` pairs separated by
commas, e.g. ``RAMANA_TOL="tol_eq=1e-7,tol_fr=1e-5"``.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    eps_rank: float = 1e-9      # relative eigenvalue threshold for rank decisions
    tol_eq: float = 1e-8        # equality residuals
    tol_cone: float = 1e-8      # cone membership (relative eigenvalue slack)
    tol_fr: float = 1e-6        # "positive value" threshold of the auxiliary sup
    tol_clean: float = 1e-6     # relative size of entries snapped to zero in certificates
    tol_cert_rank: float = 1e-5  # relative eigenvalue threshold for certificate ranks
    eps_det: float = 1e-12      # invertibility threshold for rescaling matrices
    cond_warn: float = 1e8      # condition number above which rescalings warn
    norm_blowup: float = 1e4    # iterate norm signalling non-attainment


def get_tolerances() -> Tolerances:
    """Return defaults, applying the ``RAMANA_TOL`` override if set."""
    raw = os.environ.get("RAMANA_TOL", "").strip()
    if not raw:
        return Tolerances()
    try:
        value = float(raw)
    except ValueError:
        pass
    else:
        return Tolerances(tol_eq=value, tol_cone=value)
    names = {f.name for f in dataclasses.fields(Tolerances)}
    updates = {}
    for item in raw.split(","):
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in names:
            raise ValueError(f"RAMANA_TOL: unknown tolerance {key!r}")
        updates[key] = float(val)
    return Tolerances(**updates)
