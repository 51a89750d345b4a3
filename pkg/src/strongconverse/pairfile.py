"""State-pair files, bundled fixtures and CSV emission.

A pair file is JSON with ``name``, ``dim`` and either

* ``rho`` and ``eta``: ``dim x dim`` nested lists of ``[re, im]`` pairs, or
* ``classical``: ``{"p": [...], "q": [...]}`` probability vectors.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from strongconverse.errors import MalformedPairFile, MissingInput, NotDensity
from strongconverse.operators import DensityOperator, StatePair
from strongconverse.pinching import ClassicalPair

FIXTURE_PACKAGE = "strongconverse.fixtures"
CLASSICAL_SUM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PairFile:
    name: str
    dim: int
    pair: Union[StatePair, ClassicalPair]

    @property
    def is_classical(self) -> bool:
        return isinstance(self.pair, ClassicalPair)

    def state_pair(self) -> StatePair:
        return self.pair.to_state_pair() if self.is_classical else self.pair


def _parse_matrix(raw, dim: int, label: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise MalformedPairFile(f"{label}: entries must be [re, im] numbers") from exc
    if arr.shape != (dim, dim, 2):
        raise MalformedPairFile(f"{label}: expected shape ({dim}, {dim}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def parse_pair(data: dict) -> PairFile:
    """Validate a decoded pair-file object."""
    if not isinstance(data, dict):
        raise MalformedPairFile("pair file must hold a JSON object")
    name = str(data.get("name", ""))
    dim = data.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise MalformedPairFile(f"dim must be a positive integer, got {dim!r}")
    has_matrices = "rho" in data or "eta" in data
    has_classical = "classical" in data
    if has_matrices == has_classical:
        raise MalformedPairFile("give either rho and eta matrices or classical vectors, not both")
    if has_classical:
        cl = data["classical"]
        try:
            p = np.asarray(cl["p"], dtype=np.float64)
            q = np.asarray(cl["q"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedPairFile("classical needs numeric vectors p and q") from exc
        if p.shape != (dim,) or q.shape != (dim,):
            raise MalformedPairFile(f"classical vectors must have length {dim}")
        for label, v in (("p", p), ("q", q)):
            if abs(math.fsum(v) - 1.0) > CLASSICAL_SUM_TOL:
                raise NotDensity(f"{label} sums to {math.fsum(v)!r}, not 1")
        return PairFile(name, dim, ClassicalPair.from_probabilities(p, q))
    if "rho" not in data or "eta" not in data:
        raise MalformedPairFile("both rho and eta are required")
    rho = DensityOperator.from_matrix(_parse_matrix(data["rho"], dim, "rho"))
    eta = DensityOperator.from_matrix(_parse_matrix(data["eta"], dim, "eta"))
    return PairFile(name, dim, StatePair(rho, eta))


def pair_to_dict(pf: PairFile) -> dict:
    out = {"name": pf.name, "dim": pf.dim}
    if pf.is_classical:
        out["classical"] = {"p": pf.pair.p.tolist(), "q": pf.pair.q.tolist()}
    else:
        out["rho"] = _encode_matrix(pf.pair.rho.matrix)
        out["eta"] = _encode_matrix(pf.pair.eta.matrix)
    return out


def save_pair(pf: PairFile, path) -> None:
    Path(path).write_text(json.dumps(pair_to_dict(pf), indent=1) + "\n")


def fixture_names() -> list[str]:
    files = resources.files(FIXTURE_PACKAGE).iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def load_fixture(name: str) -> PairFile:
    res = resources.files(FIXTURE_PACKAGE) / f"{name}.json"
    if not res.is_file():
        raise MissingInput(f"no fixture named {name!r}; available: {', '.join(fixture_names())}")
    return parse_pair(json.loads(res.read_text()))


def load_pair(source) -> PairFile:
    """Read a pair file by path, falling back to a bundled fixture name."""
    path = Path(source)
    if path.is_file():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise MalformedPairFile(f"{path}: invalid JSON ({exc})") from exc
        return parse_pair(data)
    if str(source) in fixture_names():
        return load_fixture(str(source))
    raise MissingInput(f"pair file not found: {source}")


# ---------------------------------------------------------------------------
# CSV


def fmt(x) -> str:
    """12 significant digits, scientific notation; strings pass through."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.11e}"


def write_csv(stream, header, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
