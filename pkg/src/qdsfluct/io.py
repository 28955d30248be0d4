"""Model files, matrices in JSON, CSV tables and run manifests.

A matrix is stored as ``{"dim": d, "re": [[...]], "im": [[...]]}``; ``im`` may be
omitted for real matrices and ``dim`` is checked when present. Model files::

    {"system": {"H_S": matrix},
     "reservoirs": [{"beta": b, "couplings": [matrix, ...],
                     "h": {"omega_values": [...], "matrices": [matrix, ...]}
                          | {"form": "flat", "gamma": g},
                     "s": {"omega_values": [...], "matrices": [...]}}]}

Scalars are accepted wherever a 1x1 matrix is expected.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from pathlib import Path

import numpy as np

from .config import DEFAULT, Tolerances
from .davies import ReservoirSpec, SystemSpec, WeakCouplingModel, assemble, build_sub
from .errors import InputOutputError, ValidationError


# --- matrices ------------------------------------------------------------------


def matrix_to_json(A) -> dict:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    out = {"dim": int(A.shape[0]), "re": A.real.tolist()}
    if np.any(A.imag != 0):
        out["im"] = A.imag.tolist()
    return out


def _grid(obj, path):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"expected a numeric 2-D array ({exc})", path) from None
    return arr


def matrix_from_json(obj, path: str = "matrix") -> np.ndarray:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return np.array([[obj]], dtype=complex)
    if isinstance(obj, list):
        re = _grid(obj, path)
        im = np.zeros_like(re)
    elif isinstance(obj, dict):
        if "re" not in obj:
            raise ValidationError("matrix needs a 're' field", path)
        re = _grid(obj["re"], f"{path}.re")
        im = _grid(obj["im"], f"{path}.im") if "im" in obj else np.zeros_like(re)
        if im.shape != re.shape:
            raise ValidationError("'re' and 'im' shapes differ", path)
    else:
        raise ValidationError("expected a matrix object", path)
    if re.ndim != 2 or re.shape[0] != re.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {re.shape}", path)
    if isinstance(obj, dict) and "dim" in obj and obj["dim"] != re.shape[0]:
        raise ValidationError(f"'dim' is {obj['dim']} but the matrix is {re.shape[0]}x{re.shape[0]}",
                              path)
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise ValidationError("matrix entries must be finite", path)
    return re + 1j * im


# --- model files -----------------------------------------------------------------


def _table(obj, path) -> dict:
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", path)
    ws = obj.get("omega_values")
    ms = obj.get("matrices")
    if not isinstance(ws, list) or not isinstance(ms, list):
        raise ValidationError("table needs 'omega_values' and 'matrices' lists", path)
    if len(ws) != len(ms):
        raise ValidationError("'omega_values' and 'matrices' have different lengths", path)
    out = {}
    for i, (w, m) in enumerate(zip(ws, ms)):
        if not isinstance(w, (int, float)) or isinstance(w, bool) or not math.isfinite(w):
            raise ValidationError("frequency must be a finite number", f"{path}.omega_values[{i}]")
        out[float(w)] = matrix_from_json(m, f"{path}.matrices[{i}]")
    return out


def _reservoir(obj, path) -> ReservoirSpec:
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", path)
    if "beta" not in obj:
        raise ValidationError("missing field 'beta'", path)
    beta = obj["beta"]
    if not isinstance(beta, (int, float)) or isinstance(beta, bool) or not math.isfinite(beta) or beta <= 0:
        raise ValidationError(f"inverse temperature must be a positive number, got {beta!r}",
                              f"{path}.beta")
    Qs = obj.get("couplings")
    if not isinstance(Qs, list) or not Qs:
        raise ValidationError("'couplings' must be a non-empty list", f"{path}.couplings")
    Qs = [matrix_from_json(q, f"{path}.couplings[{k}]") for k, q in enumerate(Qs)]
    hobj = obj.get("h", {"form": "flat", "gamma": 1.0})
    if isinstance(hobj, dict) and "form" in hobj:
        if hobj["form"] != "flat":
            raise ValidationError(f"unknown spectral form {hobj['form']!r}", f"{path}.h.form")
        g = hobj.get("gamma")
        if not isinstance(g, (int, float)) or isinstance(g, bool) or not math.isfinite(g) or g < 0:
            raise ValidationError("'gamma' must be a non-negative number", f"{path}.h.gamma")
        h = float(g)
    else:
        h = _table(hobj, f"{path}.h")
    s = _table(obj["s"], f"{path}.s") if obj.get("s") is not None else None
    try:
        return ReservoirSpec(float(beta), tuple(Qs), h, s)
    except ValidationError as exc:
        raise ValidationError(str(exc).split(": ", 1)[-1], f"{path}.{exc.path}") from None


def parse_model(doc) -> tuple[SystemSpec, list]:
    if not isinstance(doc, dict):
        raise ValidationError("model file must contain a JSON object", "$")
    sysobj = doc.get("system")
    if not isinstance(sysobj, dict) or "H_S" not in sysobj:
        raise ValidationError("missing 'system.H_S'", "system")
    H = matrix_from_json(sysobj["H_S"], "system.H_S")
    try:
        system = SystemSpec(H)
    except ValidationError as exc:
        raise ValidationError(str(exc).split(": ", 1)[-1], "system.H_S") from None
    res = doc.get("reservoirs")
    if not isinstance(res, list) or not res:
        raise ValidationError("'reservoirs' must be a non-empty list", "reservoirs")
    reservoirs = [_reservoir(r, f"reservoirs[{j}]") for j, r in enumerate(res)]
    for j, r in enumerate(reservoirs):
        for k, Q in enumerate(r.couplings):
            if Q.shape != H.shape:
                raise ValidationError(f"coupling is {Q.shape[0]}x{Q.shape[0]} but H_S is "
                                      f"{H.shape[0]}x{H.shape[0]}", f"reservoirs[{j}].couplings[{k}]")
    return system, reservoirs


def build_model(system, reservoirs, tol: Tolerances = DEFAULT) -> WeakCouplingModel:
    # build each reservoir once on its own so builder errors carry a full field path
    for j, r in enumerate(reservoirs):
        try:
            build_sub(system, r, tol)
        except ValidationError as exc:
            raise ValidationError(str(exc).split(": ", 1)[-1], f"reservoirs[{j}].{exc.path}") from None
    return assemble(system, reservoirs, tol)


def read_json(path) -> object:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputOutputError(f"cannot read {p}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                              str(p)) from None


def load_model(path, tol: Tolerances = DEFAULT) -> WeakCouplingModel:
    system, reservoirs = parse_model(read_json(path))
    return build_model(system, reservoirs, tol)


def model_to_json(system: SystemSpec, reservoirs) -> dict:
    def table(t):
        ws = sorted(t)
        return {"omega_values": ws, "matrices": [matrix_to_json(t[w]) for w in ws]}

    res = []
    for r in reservoirs:
        item = {"beta": r.beta, "couplings": [matrix_to_json(Q) for Q in r.couplings]}
        item["h"] = {"form": "flat", "gamma": float(r.h)} if isinstance(r.h, (int, float)) else table(r.h)
        if r.s is not None:
            item["s"] = table(r.s)
        res.append(item)
    return {"system": {"H_S": matrix_to_json(system.H_S)}, "reservoirs": res}


# --- tables and manifests --------------------------------------------------------


def fmt(x) -> str:
    """Round-trip text for numbers; infinities as ``inf``/``-inf``."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def write_csv(path, header, rows) -> Path:
    p = Path(path)
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return p


def read_csv(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) if v not in ("true", "false") else v == "true" for v in r]
                     for r in rows[1:]]


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else fmt(x)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    p = Path(path)
    p.write_text(dumps(obj))
    return p


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(_plain(config), sort_keys=True).encode()).hexdigest()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> dict:
    import numba
    import scipy

    from . import __version__

    return {"qdsfluct": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__}


def write_manifest(outdir, config: dict, files, tol: Tolerances) -> Path:
    outdir = Path(outdir)
    entries = {Path(f).name: file_digest(f) for f in sorted(map(str, files))}
    manifest = {"config": config, "config_hash": config_hash(config), "versions": versions(),
                "tolerances": tol.as_dict(), "files": entries}
    return write_json(outdir / "manifest.json", manifest)


def ensure_dir(path) -> Path:
    p = Path(path)
    try:
        os.makedirs(p, exist_ok=True)
    except OSError as exc:
        raise InputOutputError(f"cannot create output directory {p}: {exc.strerror or exc}") from None
    return p
