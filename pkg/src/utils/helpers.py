"""
Serialization helpers for reports, specs and sampled grids.
"""

import csv
import json
import math
from typing import Any, Dict, IO, Iterable, List, Optional, Sequence

from src.core.classifier import SingularityReport
from src.core.devmap import DevelopingMapSpec, LogMap, LogSeriesMap, MonodromyResult, PowerMap, SeriesMap
from src.core.metrics import GRID_COLUMNS
from src.core.mobius import IsometryClass, MobiusTransform
from src.core.series import TruncatedSeries


def _real(x: float) -> Optional[float]:
    """JSON has no NaN or infinity; those become null."""
    x = float(x)
    return x if math.isfinite(x) else None


def complex_pair(z: complex) -> List[Optional[float]]:
    z = complex(z)
    return [_real(z.real), _real(z.imag)]


def series_to_dict(s: TruncatedSeries) -> Dict[str, Any]:
    return {"lead": _real(s.lead_exponent), "coeffs": [complex_pair(c) for c in s.coeffs]}


def mobius_to_dict(L: MobiusTransform) -> Dict[str, Any]:
    return {"model": L.model.value, "mat": [complex_pair(x) for x in (L.a, L.b, L.c, L.d)]}


def isometry_to_dict(cls: IsometryClass) -> Dict[str, Any]:
    return {
        "kind": cls.kind.value,
        "parameter": _real(cls.parameter),
        "conjugator": mobius_to_dict(cls.conjugator),
    }


def monodromy_to_dict(result: MonodromyResult) -> Dict[str, Any]:
    return {
        "transform": mobius_to_dict(result.transform),
        "classification": isometry_to_dict(result.classification),
        "fit_residual": _real(result.fit_residual),
    }


def map_spec_to_dict(F: DevelopingMapSpec) -> Dict[str, Any]:
    """Inverse of the JSON map-spec parser in src.api.models."""
    core = F.core
    if isinstance(core, PowerMap):
        out: Dict[str, Any] = {"kind": "power", "alpha": core.alpha}
    elif isinstance(core, LogMap):
        out = {"kind": "log"}
    elif isinstance(core, SeriesMap):
        out = {"kind": "series", **series_to_dict(core.series)}
    elif isinstance(core, LogSeriesMap):
        out = {"kind": "logseries", "coeffs": series_to_dict(core.series)["coeffs"]}
    else:
        raise TypeError(f"unknown developing map core {type(core).__name__}")
    out["chart"] = F.chart.value if F.chart is not None else None
    out["post"] = mobius_to_dict(F.post) if F.post is not None else None
    return out


def report_to_dict(report: SingularityReport) -> Dict[str, Any]:
    out: Dict[str, Any] = {"kind": report.kind.value}
    if report.theta is not None:
        out["theta"] = _real(report.theta)
        k, alpha = report.cone_split()
        out["cone_split"] = {"k": k, "alpha": _real(alpha)}
    out["k"] = report.k
    out["monodromy"] = monodromy_to_dict(report.monodromy)
    out["fourier"] = series_to_dict(report.fourier)
    out["xi"] = series_to_dict(report.xi_series)
    out["diagnostics"] = {name: _real(value) for name, value in sorted(report.diagnostics.items())}
    return out


def checks_to_dict(results: Sequence) -> Dict[str, Any]:
    """Pass/fail table of CheckResult rows plus an overall verdict."""
    return {
        "passed": all(r.passed for r in results),
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "worst_residual": _real(r.worst_residual),
                "tolerance": _real(r.tolerance),
            }
            for r in results
        ],
    }


def to_json(data: Any) -> str:
    """Canonical JSON: sorted keys, fixed indent, shortest round-trip floats."""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(data: Any, stream: IO[str]):
    stream.write(to_json(data))


def write_grid_csv(rows: Iterable[Dict[str, float]], stream: IO[str]):
    writer = csv.DictWriter(stream, fieldnames=list(GRID_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({name: repr(float(row[name])) for name in GRID_COLUMNS})
