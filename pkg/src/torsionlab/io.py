"""JSON persistence for complexes, length spectra, model data and spectra.

Complex numbers are written as [re, im] pairs and matrices as nested lists of
such pairs. Floats are written with 17 significant digits so a save/load
round trip is bit-exact.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .complexes import ComplexError, GradedComplex
from .model import ModelError, ModelSpectralData
from .spectral import Spectrum, SpectralError
from .zeta import LengthSpectrum, PrimitiveClass


class SchemaError(ValueError):
    """Malformed input; the message starts with the JSON path of the problem."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# --------------------------------------------------------------------------
# text encoding


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x}")
    text = f"{x:.17g}"
    if all(c not in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj: Any, indent: int = 1, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep number pairs and flat number rows on one line
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        if all(isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(u, (float, np.floating)) for u in v) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[encode_complex(z) for z in row] for row in M]


def decode_complex(obj, path: str) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if (
        not isinstance(obj, list)
        or len(obj) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
    ):
        raise SchemaError(path, f"expected [re, im] pair, got {obj!r}")
    return complex(obj[0], obj[1])


def decode_matrix(obj, path: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    if not isinstance(obj, list):
        raise SchemaError(path, "expected a matrix (list of rows)")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise SchemaError(f"{path}[{i}]", "expected a row (list of [re, im] pairs)")
        rows.append([decode_complex(z, f"{path}[{i}][{j}]") for j, z in enumerate(row)])
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise SchemaError(path, "rows have different lengths")
    M = np.array(rows, dtype=complex)
    if shape is not None:
        if M.size == 0:
            M = M.reshape(shape) if 0 in shape else M
        if M.shape != shape:
            raise SchemaError(path, f"expected shape {shape}, got {M.shape}")
    return M


def decode_vector(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list):
        raise SchemaError(path, "expected a list of [re, im] pairs")
    return np.array([decode_complex(z, f"{path}[{i}]") for i, z in enumerate(obj)], dtype=complex)


def _field(obj: dict, key: str, path: str, kind=None):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required field")
    v = obj[key]
    if kind is int and (not isinstance(v, int) or isinstance(v, bool)):
        raise SchemaError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if kind is float and (not isinstance(v, (int, float)) or isinstance(v, bool)):
        raise SchemaError(f"{path}.{key}", f"expected a number, got {v!r}")
    if kind is list and not isinstance(v, list):
        raise SchemaError(f"{path}.{key}", "expected a list")
    return v


# --------------------------------------------------------------------------
# GradedComplex


def complex_to_dict(cx: GradedComplex) -> dict:
    out = {
        "type": "graded-complex",
        "d": cx.d,
        "dims": list(cx.dims),
        "partial": [encode_matrix(p) for p in cx.partial],
    }
    if cx.gamma is not None:
        out["gamma"] = [encode_matrix(g) for g in cx.gamma]
    return out


def complex_from_dict(obj: dict, path: str = "$") -> GradedComplex:
    d = _field(obj, "d", path, int)
    dims = _field(obj, "dims", path, list)
    if len(dims) != d + 1 or not all(isinstance(n, int) and n >= 0 for n in dims):
        raise SchemaError(f"{path}.dims", f"expected d+1={d + 1} nonnegative integers")
    partial = _field(obj, "partial", path, list)
    if len(partial) not in (d, d + 1):
        raise SchemaError(f"{path}.partial", f"expected {d} matrices, got {len(partial)}")
    blocks = [
        decode_matrix(p, f"{path}.partial[{j}]", (dims[j + 1], dims[j]))
        for j, p in enumerate(partial[:d])
    ]
    gamma = None
    if "gamma" in obj:
        graw = _field(obj, "gamma", path, list)
        if len(graw) != d + 1:
            raise SchemaError(f"{path}.gamma", f"expected {d + 1} matrices, got {len(graw)}")
        gamma = tuple(
            decode_matrix(g, f"{path}.gamma[{j}]", (dims[d - j], dims[j])) for j, g in enumerate(graw)
        )
    try:
        return GradedComplex(d, tuple(dims), tuple(blocks), gamma)
    except ComplexError as exc:
        raise SchemaError(path, str(exc)) from exc


# --------------------------------------------------------------------------
# LengthSpectrum


def spectrum_to_dict(spec: LengthSpectrum) -> dict:
    return {
        "type": "length-spectrum",
        "d": spec.d,
        "growth_abscissa": float(spec.growth_abscissa),
        "classes": [
            {
                "length": float(c.length),
                "holonomy_angles": [float(a) for a in c.holonomy_angles],
                "chi": encode_matrix(c.chi),
                "sigma_m_eigs": [encode_complex(z) for z in c.sigma_m_eigs],
            }
            for c in spec.classes
        ],
    }


def spectrum_from_dict(obj: dict, path: str = "$") -> LengthSpectrum:
    d = _field(obj, "d", path, int)
    g = float(_field(obj, "growth_abscissa", path, float))
    raw = _field(obj, "classes", path, list)
    classes = []
    for i, c in enumerate(raw):
        p = f"{path}.classes[{i}]"
        length = float(_field(c, "length", p, float))
        angles = _field(c, "holonomy_angles", p, list)
        for j, a in enumerate(angles):
            if not isinstance(a, (int, float)) or isinstance(a, bool):
                raise SchemaError(f"{p}.holonomy_angles[{j}]", f"expected a number, got {a!r}")
        chi = decode_matrix(_field(c, "chi", p, list), f"{p}.chi")
        sig = decode_vector(c["sigma_m_eigs"], f"{p}.sigma_m_eigs") if "sigma_m_eigs" in c else [1 + 0j]
        try:
            classes.append(PrimitiveClass(length, tuple(float(a) for a in angles), chi, tuple(sig)))
        except ValueError as exc:
            raise SchemaError(p, str(exc)) from exc
    try:
        return LengthSpectrum(d, tuple(classes), g)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


# --------------------------------------------------------------------------
# ModelSpectralData and Spectrum


def model_to_dict(model: ModelSpectralData) -> dict:
    return {
        "type": "model-spectral-data",
        "d": model.d,
        "eigenvalues": [[encode_complex(z) for z in e] for e in model.eigenvalues],
        "dim_V_chi": model.dim_V_chi,
        "vol_ratio": float(model.vol_ratio),
        "d_chi": list(model.d_chi),
    }


def model_from_dict(obj: dict, path: str = "$") -> ModelSpectralData:
    d = _field(obj, "d", path, int)
    raw = _field(obj, "eigenvalues", path, list)
    eigs = tuple(decode_vector(e, f"{path}.eigenvalues[{k}]") for k, e in enumerate(raw))
    dim_v = int(obj.get("dim_V_chi", 1))
    if "vol_ratio" in obj:
        vol = float(_field(obj, "vol_ratio", path, float))
    elif "volume" in obj:
        from .model import vol_sphere

        vol = float(_field(obj, "volume", path, float)) / vol_sphere(d)
    else:
        vol = 1.0
    d_chi = obj.get("d_chi")
    try:
        return ModelSpectralData(d, eigs, dim_v, vol, None if d_chi is None else tuple(d_chi))
    except ModelError as exc:
        raise SchemaError(path, str(exc)) from exc


def eigen_spectrum_to_dict(spec: Spectrum) -> dict:
    return {
        "type": "spectrum",
        "entries": [{"lambda": encode_complex(lam), "mult": m} for lam, m in spec.entries],
    }


def eigen_spectrum_from_dict(obj: dict, path: str = "$") -> Spectrum:
    raw = _field(obj, "entries", path, list)
    entries = []
    for i, e in enumerate(raw):
        p = f"{path}.entries[{i}]"
        lam = decode_complex(_field(e, "lambda", p), f"{p}.lambda")
        entries.append((lam, _field(e, "mult", p, int)))
    try:
        return Spectrum(tuple(entries))
    except SpectralError as exc:
        raise SchemaError(path, str(exc)) from exc


# --------------------------------------------------------------------------
# files

_DECODERS = {
    "graded-complex": complex_from_dict,
    "length-spectrum": spectrum_from_dict,
    "model-spectral-data": model_from_dict,
    "spectrum": eigen_spectrum_from_dict,
}


def to_dict(obj) -> dict:
    if isinstance(obj, GradedComplex):
        return complex_to_dict(obj)
    if isinstance(obj, LengthSpectrum):
        return spectrum_to_dict(obj)
    if isinstance(obj, ModelSpectralData):
        return model_to_dict(obj)
    if isinstance(obj, Spectrum):
        return eigen_spectrum_to_dict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def save(obj, path) -> None:
    Path(path).write_text(dumps(to_dict(obj)) + "\n")


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError("$", f"cannot read {path}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("$", "top level must be an object")
    return obj


def load(path, expect: str | None = None):
    """Load any supported object; ``expect`` names the required type."""
    obj = read_json(path)
    kind = obj.get("type", expect)
    if expect is not None and kind != expect:
        raise SchemaError("$.type", f"expected {expect!r}, got {kind!r}")
    if kind not in _DECODERS:
        raise SchemaError("$.type", f"unknown or missing type {kind!r}")
    return _DECODERS[kind](obj)
