"""Fidelity, chiral pairing, density curves and exceptional-point checks."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .model import InvalidModelError, LatticeModel
from .spectral import SolverError, Spectrum, _link_clusters, eigs

__all__ = [
    "CurveCount",
    "EPReport",
    "TRIANGLE_MATRIX",
    "FidelityMatrix",
    "HermitianDemoCase",
    "PairingReport",
    "TrendPoint",
    "clustering_trend",
    "count_distinct_curves",
    "density_curves",
    "ep_diagnostics",
    "f12_closed_form",
    "fidelity",
    "fidelity_matrix",
    "hermitian_demo",
    "pairing_check",
    "pairwise_fidelity_extremes",
]

# all-to-all hopping on three sites; eigenvalues -1 (twice) and 2
TRIANGLE_MATRIX = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)

DEFAULT_CURVE_TOL = 1e-8
DEFAULT_COALESCENCE = 1e-7
RANK_CUTOFF = 1e-8


def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _none_if_nan(x: float | None) -> float | None:
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else float(x)


# -- fidelity ----------------------------------------------------------------


def fidelity(u, v) -> float:
    """|<u|v>|^2 / (<u|u> <v|v>); invariant under rescaling either vector."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.size} vs {v.size}")
    if not (np.any(u) and np.any(v)):
        raise ValueError("fidelity is undefined for a zero vector")
    # power-of-two rescaling is exact, so orthogonal integer vectors still give 0
    u = np.ldexp(u.real, -_exponent(u)) + 1j * np.ldexp(u.imag, -_exponent(u))
    v = np.ldexp(v.real, -_exponent(v)) + 1j * np.ldexp(v.imag, -_exponent(v))
    num = abs(np.vdot(u, v)) ** 2
    return float(min(1.0, num / (np.vdot(u, u).real * np.vdot(v, v).real)))


def _exponent(x: np.ndarray) -> int:
    return int(np.frexp(np.max(np.abs(x)))[1])


def _fidelity_table(vectors: np.ndarray) -> np.ndarray:
    x = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    f = np.abs(x.conj() @ x.T) ** 2
    f = np.minimum(f, 1.0)
    np.fill_diagonal(f, 1.0)
    return 0.5 * (f + f.T)


@dataclass(frozen=True, eq=False)
class FidelityMatrix:
    values: np.ndarray
    labels: np.ndarray
    indices: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "labels": [_cplx(z) for z in self.labels],
            "indices": list(self.indices),
            "values": [[float(x) for x in row] for row in self.values],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FidelityMatrix":
        return cls(
            values=np.array(data["values"], dtype=float),
            labels=np.array([complex(*z) for z in data["labels"]], dtype=complex),
            indices=tuple(data["indices"]),
        )


def fidelity_matrix(spectrum: Spectrum, radius: float = 1e-9) -> FidelityMatrix:
    """Pairwise fidelities over deduplicated eigenpairs.

    Two eigenpairs count once when their eigenvalues coincide within
    ``radius`` and their vectors are parallel; degenerate but independent
    vectors are kept.
    """
    full = _fidelity_table(spectrum.vectors)
    keep: list[int] = []
    for k, e in enumerate(spectrum.eigenvalues):
        if any(abs(e - spectrum.eigenvalues[j]) < radius and full[j, k] > 1 - 1e-12 for j in keep):
            continue
        keep.append(k)
    sub = full[np.ix_(keep, keep)]
    return FidelityMatrix(sub, spectrum.eigenvalues[keep].copy(), tuple(keep))


def pairwise_fidelity_extremes(spectrum: Spectrum) -> tuple[float, float]:
    """(min, max) fidelity over all pairs j != k."""
    n = len(spectrum)
    if n < 2:
        return math.nan, math.nan
    f = _fidelity_table(spectrum.vectors)
    off = f[~np.eye(n, dtype=bool)]
    return float(off.min()), float(off.max())


# -- Hermitian 3x3 counterexample --------------------------------------------


def f12_closed_form(xi: float) -> float:
    return 3 * (xi + 2) ** 2 / (4 * (xi * xi + 3 * xi + 3))


@dataclass(frozen=True, eq=False)
class HermitianDemoCase:
    """Two eigenvectors of TRIANGLE_MATRIX at E = -1, parallel only when xi = 0."""

    xi: float
    v1: np.ndarray
    v2: np.ndarray

    @classmethod
    def build(cls, xi: float) -> "HermitianDemoCase":
        xi = float(xi)
        return cls(xi, np.array([1.0, 1.0, -2.0]), np.array([1.0 + xi, 1.0, -2.0 - xi]))

    @property
    def eigenvalue(self) -> float:
        return -1.0

    def residuals(self) -> tuple[float, float]:
        return tuple(float(np.linalg.norm(TRIANGLE_MATRIX @ v + v)) for v in (self.v1, self.v2))

    @property
    def linearly_independent(self) -> bool:
        return bool(np.linalg.matrix_rank(np.column_stack([self.v1, self.v2])) == 2)


def hermitian_demo(xi: float) -> tuple[HermitianDemoCase, float]:
    case = HermitianDemoCase.build(xi)
    for v, r in zip((case.v1, case.v2), case.residuals()):
        if r > 1e-12 * np.linalg.norm(v):
            raise RuntimeError(f"demo vector is not an eigenvector (residual {r:.3e})")
    return case, fidelity(case.v1, case.v2)


# -- chiral pairing -----------------------------------------------------------


@dataclass(frozen=True)
class PairingReport:
    """Matching of the spectrum into E, -E partners.

    ``alternation_defect[i]`` is max_n |psi_{n,k'} - s (-1)^n psi_{n,k}| for
    ``pairs[i] = (k, k')`` with the unit phase s chosen optimally.
    """

    pairs: tuple[tuple[int, int], ...]
    energy_mismatch: tuple[float, ...]
    alternation_defect: tuple[float, ...]
    zero_mode_index: int | None
    zero_mode_defect: float | None
    unpaired: tuple[int, ...]
    tol: float
    verdict: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "pairs": [list(p) for p in self.pairs],
            "energy_mismatch": list(self.energy_mismatch),
            "alternation_defect": list(self.alternation_defect),
            "zero_mode_index": self.zero_mode_index,
            "zero_mode_defect": self.zero_mode_defect,
            "unpaired": list(self.unpaired),
            "tol": self.tol,
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PairingReport":
        return cls(
            pairs=tuple(tuple(p) for p in data["pairs"]),
            energy_mismatch=tuple(data["energy_mismatch"]),
            alternation_defect=tuple(data["alternation_defect"]),
            zero_mode_index=data["zero_mode_index"],
            zero_mode_defect=data["zero_mode_defect"],
            unpaired=tuple(data["unpaired"]),
            tol=data["tol"],
            verdict=data["verdict"],
        )


def _alternation_defect(psi: np.ndarray, partner: np.ndarray) -> float:
    stagger = np.where(np.arange(1, len(psi) + 1) % 2 == 0, 1.0, -1.0)
    u = stagger * psi
    overlap = np.vdot(u, partner)
    s = overlap / abs(overlap) if overlap != 0 else 1.0
    return float(np.max(np.abs(partner - s * u)))


def pairing_check(spectrum: Spectrum, tol: float = 1e-8) -> PairingReport:
    """Match eigenvalues into (E, -E) pairs and test psi(-E) = (-1)^n psi(E).

    For odd N the eigenvalue of smallest modulus is set aside as the zero
    mode; the rest are paired greedily by smallest |E_k + E_k'|.
    """
    model = spectrum.model
    if model is not None and model.has_gain_loss:
        raise ValueError("pairing needs gamma = 0 on every site")
    e = spectrum.eigenvalues
    vecs = spectrum.vectors
    n = len(e)
    pool = list(range(n))
    zero = None
    unpaired: list[int] = []
    if n % 2 == 1:
        zero = int(np.argmin(np.abs(e)))
        pool.remove(zero)
        if abs(e[zero]) > tol:
            unpaired.append(zero)
            zero = None

    candidates = sorted(
        ((abs(e[a] + e[b]), a, b) for i, a in enumerate(pool) for b in pool[i + 1 :]),
        key=lambda c: (c[0], c[1], c[2]),
    )
    used: set[int] = set()
    pairs, mismatch, defects = [], [], []
    for gap, a, b in candidates:
        if a in used or b in used:
            continue
        used.update((a, b))
        lo, hi = (a, b) if (e[a].real, e[a].imag) <= (e[b].real, e[b].imag) else (b, a)
        pairs.append((lo, hi))
        mismatch.append(float(gap))
        defects.append(_alternation_defect(vecs[lo], vecs[hi]))
    unpaired.extend(k for k in pool if k not in used)

    zero_defect = None if zero is None else _alternation_defect(vecs[zero], vecs[zero])
    verdict = (
        not unpaired
        and all(m <= tol for m in mismatch)
        and all(d <= tol for d in defects)
        and (zero_defect is None or zero_defect <= tol)
    )
    order = sorted(range(len(pairs)), key=lambda i: pairs[i])
    return PairingReport(
        pairs=tuple(pairs[i] for i in order),
        energy_mismatch=tuple(mismatch[i] for i in order),
        alternation_defect=tuple(defects[i] for i in order),
        zero_mode_index=zero,
        zero_mode_defect=zero_defect,
        unpaired=tuple(sorted(unpaired)),
        tol=tol,
        verdict=bool(verdict),
    )


# -- density curves -----------------------------------------------------------


def density_curves(spectrum: Spectrum) -> np.ndarray:
    """Row k holds |psi_{nk}|^2 over sites n = 1..N."""
    d = np.abs(spectrum.vectors) ** 2
    return d / d.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class CurveCount:
    n_distinct: int
    groups: tuple[tuple[int, ...], ...]
    tol: float

    def to_dict(self) -> dict[str, Any]:
        tol = self.tol if math.isfinite(self.tol) else "inf"
        return {"n_distinct": self.n_distinct, "groups": [list(g) for g in self.groups], "tol": tol}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CurveCount":
        return cls(data["n_distinct"], tuple(tuple(g) for g in data["groups"]), float(data["tol"]))


def count_distinct_curves(densities, tol: float = DEFAULT_CURVE_TOL) -> CurveCount:
    """Group density rows whose max-norm distance is within ``tol``.

    Groups are connected components of the "within tol" relation.
    """
    d = np.asarray(densities, dtype=float)
    n = d.shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.max(np.abs(d[i] - d[j])) <= tol:
                parent[find(i)] = find(j)
    by_root: dict[int, list[int]] = {}
    for i in range(n):
        by_root.setdefault(find(i), []).append(i)
    groups = tuple(sorted(tuple(g) for g in by_root.values()))
    return CurveCount(len(groups), groups, float(tol))


# -- exceptional points --------------------------------------------------------


@dataclass(frozen=True)
class EPReport:
    """Eigenvalue clusters and the eigenvector rank inside each.

    A cluster whose eigenvectors span fewer dimensions than its size is an
    exceptional point; equal rank means an ordinary degeneracy.
    """

    clusters: tuple[tuple[int, ...], ...]
    centers: tuple[complex, ...]
    geometric_multiplicity: tuple[int, ...]
    singular_values: tuple[tuple[float, ...], ...]
    min_pairwise_fidelity: float
    max_pairwise_fidelity: float
    radius: float
    ep_suspected: bool

    @property
    def algebraic_multiplicity(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.clusters)

    def to_dict(self) -> dict[str, Any]:
        return {
            "clusters": [list(c) for c in self.clusters],
            "centers": [_cplx(z) for z in self.centers],
            "geometric_multiplicity": list(self.geometric_multiplicity),
            "singular_values": [list(s) for s in self.singular_values],
            "min_pairwise_fidelity": _none_if_nan(self.min_pairwise_fidelity),
            "max_pairwise_fidelity": _none_if_nan(self.max_pairwise_fidelity),
            "radius": self.radius,
            "ep_suspected": self.ep_suspected,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EPReport":
        nan_if_none = lambda x: math.nan if x is None else x  # noqa: E731
        return cls(
            clusters=tuple(tuple(c) for c in data["clusters"]),
            centers=tuple(complex(*z) for z in data["centers"]),
            geometric_multiplicity=tuple(data["geometric_multiplicity"]),
            singular_values=tuple(tuple(s) for s in data["singular_values"]),
            min_pairwise_fidelity=nan_if_none(data["min_pairwise_fidelity"]),
            max_pairwise_fidelity=nan_if_none(data["max_pairwise_fidelity"]),
            radius=data["radius"],
            ep_suspected=data["ep_suspected"],
        )


def ep_diagnostics(spectrum: Spectrum, coalescence: float = DEFAULT_COALESCENCE) -> EPReport:
    e = spectrum.eigenvalues
    spread = float(np.max(np.abs(e[:, None] - e[None, :]))) if len(e) else 0.0
    radius = coalescence * max(1.0, spread)
    clusters, centers, geo, svals = [], [], [], []
    for grp in _link_clusters(e, radius):
        if len(grp) < 2:
            continue
        block = spectrum.vectors[grp]
        s = np.linalg.svd(block, compute_uv=False)
        clusters.append(tuple(grp))
        centers.append(complex(np.mean(e[grp])))
        geo.append(int(np.count_nonzero(s > RANK_CUTOFF * s[0])))
        svals.append(tuple(float(x) for x in s))
    lo, hi = pairwise_fidelity_extremes(spectrum)
    return EPReport(
        clusters=tuple(clusters),
        centers=tuple(centers),
        geometric_multiplicity=tuple(geo),
        singular_values=tuple(svals),
        min_pairwise_fidelity=lo,
        max_pairwise_fidelity=hi,
        radius=radius,
        ep_suspected=any(g < len(c) for g, c in zip(geo, clusters)),
    )


# -- parameter sweeps -----------------------------------------------------------


@dataclass(frozen=True)
class TrendPoint:
    min_fidelity: float
    max_fidelity: float
    ep_suspected: bool | None = None
    error: str | None = None


def _trend_point(model: LatticeModel) -> TrendPoint:
    try:
        spec = eigs(model)
    except (SolverError, InvalidModelError) as exc:
        return TrendPoint(math.nan, math.nan, None, f"{type(exc).__name__}: {exc}")
    rep = ep_diagnostics(spec)
    return TrendPoint(rep.min_pairwise_fidelity, rep.max_pairwise_fidelity, rep.ep_suspected)


def clustering_trend(models: Sequence[LatticeModel], max_workers: int = 1) -> list[TrendPoint]:
    """Fidelity extremes for each model, in input order.

    A model whose solve fails yields a point carrying the error text.
    """
    models = list(models)
    if not models:
        return []
    if len({(m.n_sites, m.boundary) for m in models}) > 1:
        raise ValueError("all models in a family must share n_sites and boundary")
    if max_workers <= 1:
        return [_trend_point(m) for m in models]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_trend_point, models))
