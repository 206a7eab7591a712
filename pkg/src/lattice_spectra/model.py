"""Lattice models, their matrix realization and the model file format.

A model describes the chain

    H = sum_j (t_j |j><j+1| + t'_j |j+1><j|) + i sum_j gamma_j |j><j|

with sites numbered 1..N.  Closed chains add the wrap-around pair
``H[N, 1] = t_N`` and ``H[1, N] = t'_N``.
"""

from __future__ import annotations

import cmath
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = [
    "Boundary",
    "ComplexMatrix",
    "InvalidModelError",
    "LatticeModel",
    "ModelFileError",
    "Structure",
    "ValidationResult",
    "build_hamiltonian",
    "hermiticity_check",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "save_model",
    "validate",
]


class Boundary(str, enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


class Structure(str, enum.Enum):
    TRIDIAGONAL = "tridiagonal"
    TRIDIAGONAL_PLUS_CORNERS = "tridiagonal+corners"
    DENSE = "dense"


class InvalidModelError(ValueError):
    """A model violates one or more of its invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid model: " + "; ".join(self.violations))


class ModelFileError(ValueError):
    """A model file could not be parsed."""

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


def _as_complex_tuple(values: Iterable[Any]) -> tuple[complex, ...]:
    return tuple(complex(v) for v in values)


def _as_real_tuple(values: Iterable[Any]) -> tuple[float, ...]:
    out = []
    for v in values:
        if isinstance(v, complex):
            if v.imag != 0:
                raise TypeError(f"gains must be real, got {v!r}")
            v = v.real
        out.append(float(v))
    return tuple(out)


@dataclass(frozen=True)
class LatticeModel:
    """Immutable description of a 1D chain.

    Hop and gain sequences are 0-based tuples internally, so
    ``forward_hops[0]`` is ``t_1``.  Construction does not validate; call
    :func:`validate` (or any solver) for that.
    """

    n_sites: int
    forward_hops: tuple[complex, ...]
    backward_hops: tuple[complex, ...]
    gains: tuple[float, ...]
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self) -> None:
        object.__setattr__(self, "forward_hops", _as_complex_tuple(self.forward_hops))
        object.__setattr__(self, "backward_hops", _as_complex_tuple(self.backward_hops))
        object.__setattr__(self, "gains", _as_real_tuple(self.gains))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @classmethod
    def uniform(
        cls,
        n_sites: int,
        t: complex,
        tp: complex,
        gamma: float = 0.0,
        boundary: Boundary | str = Boundary.OPEN,
    ) -> "LatticeModel":
        boundary = Boundary(boundary)
        n_hops = n_sites if boundary is Boundary.CLOSED else n_sites - 1
        return cls(
            n_sites=n_sites,
            forward_hops=(t,) * n_hops,
            backward_hops=(tp,) * n_hops,
            gains=(gamma,) * n_sites,
            boundary=boundary,
        )

    def replace(self, **changes: Any) -> "LatticeModel":
        values = {
            "n_sites": self.n_sites,
            "forward_hops": self.forward_hops,
            "backward_hops": self.backward_hops,
            "gains": self.gains,
            "boundary": self.boundary,
        }
        values.update(changes)
        return LatticeModel(**values)

    @property
    def t(self) -> np.ndarray:
        return np.array(self.forward_hops, dtype=complex)

    @property
    def tp(self) -> np.ndarray:
        return np.array(self.backward_hops, dtype=complex)

    @property
    def gamma(self) -> np.ndarray:
        return np.array(self.gains, dtype=float)

    @property
    def is_open(self) -> bool:
        return self.boundary is Boundary.OPEN

    @property
    def has_gain_loss(self) -> bool:
        return any(g != 0.0 for g in self.gains)


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def raise_if_invalid(self) -> None:
        if self.violations:
            raise InvalidModelError(self.violations)


def validate(model: LatticeModel) -> ValidationResult:
    """Collect every violated invariant of ``model``."""
    problems: list[str] = []
    n = model.n_sites
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        return ValidationResult((f"n_sites must be an integer, got {n!r}",))
    if n < 2:
        problems.append(f"n_sites must be >= 2, got {n}")
    # N = 2 would make the periodic corners land on the nearest-neighbour slots
    if model.boundary is Boundary.CLOSED and n < 3:
        problems.append(f"closed chains need n_sites >= 3, got {n}")

    expected = n if model.boundary is Boundary.CLOSED else n - 1
    label = "N" if model.boundary is Boundary.CLOSED else "N-1"
    for name, hops in (("forward_hops", model.forward_hops), ("backward_hops", model.backward_hops)):
        if len(hops) != expected:
            problems.append(f"{name}: hop length {len(hops)} != {label} = {expected}")
    if len(model.gains) != n:
        problems.append(f"gains: length {len(model.gains)} != N = {n}")

    for name, seq in (
        ("forward_hops", model.forward_hops),
        ("backward_hops", model.backward_hops),
        ("gains", model.gains),
    ):
        for i, v in enumerate(seq, start=1):
            if not cmath.isfinite(v):
                problems.append(f"{name}[{i}]: non-finite entry {v!r}")
    return ValidationResult(tuple(problems))


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    """Dense complex square matrix plus a tag describing its zero pattern."""

    entries: np.ndarray
    structure: Structure = field(default=Structure.DENSE)

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "structure", Structure(self.structure))

    @classmethod
    def from_array(cls, a: np.ndarray) -> "ComplexMatrix":
        a = np.asarray(a, dtype=complex)
        return cls(a, structure_of(a))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)


def structure_of(a: np.ndarray) -> Structure:
    """Smallest structure tag compatible with the nonzero pattern of ``a``."""
    n = a.shape[0]
    i, j = np.nonzero(a)
    band = np.abs(i - j) <= 1
    if band.all():
        return Structure.TRIDIAGONAL
    corners = ((i == 0) & (j == n - 1)) | ((i == n - 1) & (j == 0))
    if (band | corners).all():
        return Structure.TRIDIAGONAL_PLUS_CORNERS
    return Structure.DENSE


def build_hamiltonian(model: LatticeModel) -> ComplexMatrix:
    validate(model).raise_if_invalid()
    n = model.n_sites
    h = np.zeros((n, n), dtype=complex)
    h[np.arange(n), np.arange(n)] = 1j * model.gamma
    t, tp = model.t, model.tp
    idx = np.arange(n - 1)
    h[idx, idx + 1] = t[: n - 1]
    h[idx + 1, idx] = tp[: n - 1]
    if model.boundary is Boundary.CLOSED:
        h[n - 1, 0] = t[n - 1]
        h[0, n - 1] = tp[n - 1]
        tag = Structure.TRIDIAGONAL_PLUS_CORNERS
    else:
        tag = Structure.TRIDIAGONAL
    return ComplexMatrix(h, tag)


def model_from_matrix(h: ComplexMatrix, boundary: Boundary | str = Boundary.OPEN) -> LatticeModel:
    """Read the structured slots of ``h`` back into a model (inverse of build)."""
    a = h.entries
    n = a.shape[0]
    boundary = Boundary(boundary)
    idx = np.arange(n - 1)
    t = list(a[idx, idx + 1])
    tp = list(a[idx + 1, idx])
    if boundary is Boundary.CLOSED:
        t.append(a[n - 1, 0])
        tp.append(a[0, n - 1])
    return LatticeModel(n, tuple(t), tuple(tp), tuple(np.diag(a).imag), boundary)


def hermiticity_check(model: LatticeModel, tol: float = 1e-12) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    h = build_hamiltonian(model).entries
    return bool(np.max(np.abs(h - h.conj().T)) <= tol)


# -- model files ------------------------------------------------------------

_REQUIRED = ("n_sites", "boundary", "forward_hops", "backward_hops", "gains")
_SHORTHAND = {"forward_hops": "uniform_t", "backward_hops": "uniform_tp", "gains": "uniform_gamma"}


def _encode_real(x: float) -> str:
    return repr(float(x))


def _encode_complex(z: complex) -> dict[str, str]:
    return {"re": _encode_real(z.real), "im": _encode_real(z.imag)}


def _decode_real(value: Any, where: str) -> float:
    if isinstance(value, bool):
        raise ModelFileError(f"expected a number, got {value!r}", field=where)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ModelFileError(f"expected a decimal number, got {value!r}", field=where)


def _decode_complex(value: Any, where: str) -> complex:
    if isinstance(value, dict):
        unknown = set(value) - {"re", "im"}
        if unknown:
            raise ModelFileError(f"unexpected keys {sorted(unknown)}", field=where)
        if "re" not in value:
            raise ModelFileError("missing 're'", field=where)
        re = _decode_real(value["re"], where + ".re")
        im = _decode_real(value.get("im", "0.0"), where + ".im")
        return complex(re, im)
    return complex(_decode_real(value, where), 0.0)


def model_to_dict(model: LatticeModel) -> dict[str, Any]:
    return {
        "n_sites": model.n_sites,
        "boundary": model.boundary.value,
        "forward_hops": [_encode_complex(z) for z in model.forward_hops],
        "backward_hops": [_encode_complex(z) for z in model.backward_hops],
        "gains": [_encode_real(g) for g in model.gains],
    }


def model_from_dict(data: Any, *, check: bool = True) -> LatticeModel:
    """Decode the model document.  Raises ModelFileError or InvalidModelError."""
    if not isinstance(data, dict):
        raise ModelFileError("top level must be an object")
    if "n_sites" not in data:
        raise ModelFileError("missing required field", field="n_sites")
    n = data["n_sites"]
    if isinstance(n, str) and n.strip().isdigit():
        n = int(n)
    if not isinstance(n, int) or isinstance(n, bool):
        raise ModelFileError(f"expected an integer, got {n!r}", field="n_sites")

    boundary = data.get("boundary")
    if boundary is None:
        raise ModelFileError("missing required field", field="boundary")
    try:
        boundary = Boundary(str(boundary).lower())
    except ValueError:
        raise ModelFileError(f"expected 'open' or 'closed', got {boundary!r}", field="boundary") from None
    n_hops = n if boundary is Boundary.CLOSED else n - 1

    seqs: dict[str, list] = {}
    for name in ("forward_hops", "backward_hops", "gains"):
        short = _SHORTHAND[name]
        if name in data and short in data:
            raise ModelFileError(f"give either {name!r} or {short!r}, not both", field=name)
        if name in data:
            raw = data[name]
            if not isinstance(raw, list):
                raise ModelFileError("expected an array", field=name)
            decode = _decode_real if name == "gains" else _decode_complex
            seqs[name] = [decode(v, f"{name}[{i}]") for i, v in enumerate(raw, start=1)]
        elif short in data:
            count = n if name == "gains" else n_hops
            decode = _decode_real if name == "gains" else _decode_complex
            seqs[name] = [decode(data[short], short)] * max(count, 0)
        else:
            raise ModelFileError("missing required field", field=name)

    known = set(_REQUIRED) | set(_SHORTHAND.values()) | {"comment"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ModelFileError(f"unknown fields {unknown}")

    model = LatticeModel(n, tuple(seqs["forward_hops"]), tuple(seqs["backward_hops"]), tuple(seqs["gains"]), boundary)
    if check:
        validate(model).raise_if_invalid()
    return model


def dumps_model(model: LatticeModel) -> str:
    """JSON text with one array element per line, so files diff cleanly."""
    data = model_to_dict(model)
    lines = ["{"]
    items = list(data.items())
    for i, (key, value) in enumerate(items):
        comma = "," if i < len(items) - 1 else ""
        if isinstance(value, list):
            body = ",\n".join("    " + json.dumps(v) for v in value)
            lines.append(f'  "{key}": [\n{body}\n  ]{comma}' if value else f'  "{key}": []{comma}')
        else:
            lines.append(f'  "{key}": {json.dumps(value)}{comma}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> LatticeModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(exc.msg + f" (column {exc.colno})", line=exc.lineno) from None
    return model_from_dict(data)


def save_model(model: LatticeModel, path: str | Path) -> None:
    validate(model).raise_if_invalid()
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path: str | Path) -> LatticeModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))
