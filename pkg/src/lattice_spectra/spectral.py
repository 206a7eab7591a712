"""Eigenvalues and unit-norm eigenvectors of lattice Hamiltonians.

Three routes, picked by :func:`eigs`:

* gauge-certified open chains are mapped onto a real symmetric tridiagonal
  matrix, solved by Sturm bisection plus inverse iteration, and the
  eigenvectors carried back through ``psi_n = Q_n c_n``;
* exactly Hermitian models go to a dense Hermitian solver;
* everything else goes through simultaneous (Aberth-Ehrlich) refinement
  of all roots of ``det(H - E)``.

Every returned pair is re-checked against the dense Hamiltonian.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np
import scipy.linalg as sla

from .model import Boundary, LatticeModel, build_hamiltonian, hermiticity_check, model_from_dict, model_to_dict, validate
from .symmetrize import gauge_sequence

__all__ = [
    "CharPolyValue",
    "SolverError",
    "SolverPath",
    "Spectrum",
    "char_poly",
    "eigs",
    "eigs_general",
    "eigs_symmetric_tridiagonal",
    "exact_constant_hopping",
]

RESIDUAL_TOL = 1e-8
MULTIPLE_ROOT_RESIDUAL_TOL = 1e-7
MULTIPLICITY_RADIUS = 1e-9
NORM_TOL = 1e-12
PHASE_CUTOFF = 1e-8

ABERTH_TOL = 1e-13
ABERTH_MAX_ITER = 500
INVERSE_ITERATION_RESTARTS = 3


class SolverPath(str, enum.Enum):
    SYMMETRIC_TRIDIAGONAL = "symmetric_tridiagonal"
    DENSE_HERMITIAN = "dense_hermitian"
    GENERAL_COMPLEX = "general_complex"
    CLOSED_FORM = "closed_form"


class SolverError(RuntimeError):
    """An eigensolver failed to meet its accuracy contract."""

    def __init__(self, message: str, *, worst_residual: float = math.nan, estimates: Any = None):
        self.worst_residual = worst_residual
        self.estimates = [] if estimates is None else list(np.atleast_1d(estimates))
        super().__init__(f"{message} (worst residual {worst_residual:.3e})")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenpairs sorted by (Re E, Im E).

    ``vectors[k]`` is the coefficient vector psi_{1k}..psi_{Nk} belonging to
    ``eigenvalues[k]``; it has unit Euclidean norm and its first coefficient
    of non-negligible modulus is real and positive.  ``groups`` lists index
    sets the solver treated as one multiple eigenvalue.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    path: SolverPath
    residual_bounds: np.ndarray
    groups: tuple[tuple[int, ...], ...] = ()
    model: LatticeModel | None = None

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def n_distinct(self) -> int:
        """Number M of distinct eigenvalues, merged at the multiplicity radius."""
        return len(_link_clusters(self.eigenvalues, MULTIPLICITY_RADIUS))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.eigenvalues.imag == 0))

    def to_dict(self) -> dict[str, Any]:
        return {
            "path": self.path.value,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "residual_bounds": [float(r) for r in self.residual_bounds],
            "vectors": [[[float(z.real), float(z.imag)] for z in row] for row in self.vectors],
            "groups": [list(g) for g in self.groups],
            "model": None if self.model is None else model_to_dict(self.model),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Spectrum":
        def cplx(pairs):
            return np.array([complex(re, im) for re, im in pairs], dtype=complex)

        return cls(
            eigenvalues=cplx(data["eigenvalues"]),
            vectors=np.array([cplx(row) for row in data["vectors"]], dtype=complex).reshape(len(data["eigenvalues"]), -1),
            residuals=np.array(data["residuals"], dtype=float),
            path=SolverPath(data["path"]),
            residual_bounds=np.array(data["residual_bounds"], dtype=float),
            groups=tuple(tuple(g) for g in data.get("groups", [])),
            model=None if data.get("model") is None else model_from_dict(data["model"]),
        )


@dataclass(frozen=True)
class CharPolyValue:
    """``det(H - e I) = value * exp(log_scale)``; derivative shares the scale.

    No extra sign is applied: the value is the determinant of ``H - e I``
    itself, which for an N-site chain behaves like ``(-e)**N`` at large e.
    """

    value: complex
    derivative: complex
    log_scale: float = 0.0

    @property
    def determinant(self) -> complex:
        return self.value * math.exp(self.log_scale)

    @property
    def determinant_derivative(self) -> complex:
        return self.derivative * math.exp(self.log_scale)


# -- characteristic polynomial ----------------------------------------------


def _open_recurrence(t: np.ndarray, tp: np.ndarray, gamma: np.ndarray, e: np.ndarray):
    """Vectorized D_n = (i g_n - e) D_{n-1} - t_{n-1} t'_{n-1} D_{n-2} with derivative."""
    e = np.asarray(e, dtype=complex)
    d_prev = np.zeros_like(e)
    d_cur = np.ones_like(e)
    dd_prev = np.zeros_like(e)
    dd_cur = np.zeros_like(e)
    log_scale = np.zeros(e.shape)
    prod = t * tp
    for n in range(len(gamma)):
        a = 1j * gamma[n] - e
        b = prod[n - 1] if n > 0 else 0.0
        d_new = a * d_cur - b * d_prev
        dd_new = -d_cur + a * dd_cur - b * dd_prev
        d_prev, d_cur = d_cur, d_new
        dd_prev, dd_cur = dd_cur, dd_new
        s = np.maximum.reduce([np.abs(d_prev), np.abs(d_cur), np.abs(dd_prev), np.abs(dd_cur)])
        s = np.where(s > 0, s, 1.0)
        d_prev, d_cur, dd_prev, dd_cur = d_prev / s, d_cur / s, dd_prev / s, dd_cur / s
        log_scale = log_scale + np.log(s)
    return d_cur, dd_cur, log_scale


def _lu_det(a: np.ndarray):
    """(phase, log|det|, lu, piv); phase is 0 when a pivot vanishes."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    u = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    if np.any(u == 0):
        return 0.0, 0.0, lu, piv
    mag = np.abs(u)
    phase = (-1.0) ** swaps * np.prod(u / mag)
    return phase, float(np.sum(np.log(mag))), lu, piv


def _dense_char_poly(h: np.ndarray, e: complex) -> tuple[complex, complex, float]:
    n = h.shape[0]
    a = h - e * np.eye(n)
    phase, log_scale, lu, piv = _lu_det(a)
    if phase != 0:
        # d det(A - eI)/de = -det * tr((A - eI)^-1)
        trace_inv = np.trace(sla.lu_solve((lu, piv), np.eye(n), check_finite=False))
        return phase, -phase * trace_inv, log_scale
    # exact singularity: derivative from two perturbed factorizations
    step = 1e-7 * max(1.0, float(np.max(np.abs(h))))
    vals = []
    for s in (step, -step):
        p, lg, _, _ = _lu_det(a - s * np.eye(n))
        vals.append(p * math.exp(lg))
    return 0.0, (vals[0] - vals[1]) / (2 * step), 0.0


def char_poly(model: LatticeModel, e: complex) -> CharPolyValue:
    """Evaluate ``det(H - e I)`` and its e-derivative without overflow.

    Open chains use the three-term determinant recurrence, renormalized to
    unit modulus at every step.  Closed chains use an LU factorization of
    the dense matrix.
    """
    validate(model).raise_if_invalid()
    if model.is_open:
        v, d, lg = _open_recurrence(model.t, model.tp, model.gamma, np.array([e]))
        return CharPolyValue(complex(v[0]), complex(d[0]), float(lg[0]))
    v, d, lg = _dense_char_poly(build_hamiltonian(model).entries, complex(e))
    return CharPolyValue(complex(v), complex(d), float(lg))


def _log_ratio_evaluator(model: LatticeModel, h: np.ndarray) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Return f(z) -> (p, p') mantissas sharing one scale per point."""
    if model.is_open:
        t, tp, g = model.t, model.tp, model.gamma

        def f(z):
            v, d, _ = _open_recurrence(t, tp, g, z)
            return v, d

        return f

    def f(z):
        out = [_dense_char_poly(h, zi) for zi in z]
        return np.array([o[0] for o in out], dtype=complex), np.array([o[1] for o in out], dtype=complex)

    return f


# -- generic helpers ----------------------------------------------------------


def _link_clusters(values: np.ndarray, radius: float) -> list[list[int]]:
    """Single-linkage groups of points closer than ``radius``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    mag = np.abs(v)
    j = int(np.argmax(mag > PHASE_CUTOFF * mag.max()))
    v = v * (np.conj(v[j]) / mag[j])
    v[j] = mag[j]
    return v


def _sort_key(value: complex, vec: np.ndarray):
    return (value.real, value.imag, tuple(np.column_stack([vec.real, vec.imag]).ravel()))


def _finalize(
    values: np.ndarray,
    vectors: np.ndarray,
    h: np.ndarray,
    path: SolverPath,
    bounds: np.ndarray,
    groups: list[list[int]] = (),
    model: LatticeModel | None = None,
) -> Spectrum:
    values = np.asarray(values, dtype=complex)
    vectors = np.array([_fix_phase(v) for v in np.asarray(vectors, dtype=complex)])
    order = sorted(range(len(values)), key=lambda k: _sort_key(values[k], vectors[k]))
    rank = {old: new for new, old in enumerate(order)}
    values, vectors, bounds = values[order], vectors[order], np.asarray(bounds, dtype=float)[order]
    residuals = np.linalg.norm(vectors @ h.T - values[:, None] * vectors, axis=1)
    bad = residuals > bounds
    if np.any(bad):
        raise SolverError(
            f"{int(bad.sum())} eigenpair(s) exceed their residual bound on path {path.value}",
            worst_residual=float(residuals.max()),
            estimates=values[bad],
        )
    norms = np.linalg.norm(vectors, axis=1)
    assert np.all(np.abs(norms - 1) <= NORM_TOL)
    new_groups = tuple(sorted(tuple(sorted(rank[i] for i in g)) for g in groups if len(g) > 1))
    for a in (values, vectors, residuals, bounds):
        a.setflags(write=False)
    return Spectrum(values, vectors, residuals, path, bounds, new_groups, model)


# -- symmetric tridiagonal path ----------------------------------------------


def _sturm_count(d: np.ndarray, e2: np.ndarray, x: np.ndarray, pivmin: float) -> np.ndarray:
    """Number of eigenvalues strictly below each shift in ``x``."""
    q = d[0] - x
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(int)
    for i in range(1, len(d)):
        q = d[i] - x - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def _bisect_all(d: np.ndarray, e: np.ndarray, tol: float) -> np.ndarray:
    n = len(d)
    ae = np.abs(e)
    radius = np.zeros(n)
    radius[:-1] += ae
    radius[1:] += ae
    lo0 = float(np.min(d - radius)) - tol
    hi0 = float(np.max(d + radius)) + tol
    e2 = e * e
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(e2, initial=0.0)))
    k = np.arange(n)
    lo = np.full(n, lo0)
    hi = np.full(n, hi0)
    for _ in range(200):
        active = hi - lo > tol
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        c = _sturm_count(d, e2, mid[active], pivmin)
        upper = c >= k[active] + 1
        idx = np.flatnonzero(active)
        hi[idx[upper]] = mid[active][upper]
        lo[idx[~upper]] = mid[active][~upper]
    return 0.5 * (lo + hi)


def _tridiagonal_seeds(d: np.ndarray, e: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Forward three-term recurrence c_1 = 1 at every eigenvalue (rows)."""
    n = len(d)
    c = np.zeros((len(lam), n))
    c[:, 0] = 1.0
    if n > 1 and np.all(e != 0):
        for i in range(n - 1):
            prev = c[:, i - 1] if i > 0 else 0.0
            back = e[i - 1] if i > 0 else 0.0
            c[:, i + 1] = ((lam - d[i]) * c[:, i] - back * prev) / e[i]
            s = np.max(np.abs(c[:, : i + 2]), axis=1, keepdims=True)
            c[:, : i + 2] /= np.where(s > 0, s, 1.0)
    bad = ~np.all(np.isfinite(c), axis=1)
    c[bad] = 1.0
    return c


def _banded_solve(d: np.ndarray, e: np.ndarray, shift: float, b: np.ndarray, scale: float) -> np.ndarray:
    n = len(d)
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[1] = d - shift
    ab[2, :-1] = e
    for attempt in range(5):
        try:
            x = sla.solve_banded((1, 1), ab, b, check_finite=False)
            if np.all(np.isfinite(x)):
                return x
        except np.linalg.LinAlgError:
            pass
        ab[1] -= np.finfo(float).eps * scale * 4.0 ** (attempt + 1)
    raise SolverError("inverse iteration hit a singular shift", estimates=[shift])


def eigs_symmetric_tridiagonal(diag, offdiag) -> Spectrum:
    """Solve a real symmetric tridiagonal matrix.

    Eigenvalues come from Sturm-count bisection, eigenvectors from inverse
    iteration seeded with the three-term recurrence; vectors in a tight
    cluster are re-orthogonalized against each other.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    n = len(d)
    if n < 1 or len(e) != n - 1:
        raise ValueError("offdiag must have exactly len(diag) - 1 entries")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
        raise ValueError("non-finite matrix entry")
    t_mat = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    norm = float(np.max(np.sum(np.abs(t_mat), axis=1)))
    scale = max(1.0, norm)
    lam = _bisect_all(d, e, 1e-13 * scale)

    seeds = _tridiagonal_seeds(d, e, lam)
    rng = np.random.default_rng(0)
    cluster_gap = 1e-3 * scale
    vectors = np.zeros((n, n))
    for k in range(n):
        block = [j for j in range(k) if abs(lam[k] - lam[j]) <= cluster_gap]
        x = seeds[k] / np.linalg.norm(seeds[k])
        for restart in range(INVERSE_ITERATION_RESTARTS + 1):
            for _ in range(3):
                x = _banded_solve(d, e, lam[k], x, scale)
                size = np.linalg.norm(x)
                for j in block:
                    x -= (vectors[j] @ x) * vectors[j]
                # a seed lying inside the span of earlier cluster vectors
                # (e.g. decoupled blocks) projects to nothing: reseed randomly
                while not np.linalg.norm(x) > 1e-8 * size:
                    x = rng.standard_normal(n)
                    size = np.linalg.norm(x)
                    for j in block:
                        x -= (vectors[j] @ x) * vectors[j]
                x /= np.linalg.norm(x)
            res = np.linalg.norm(t_mat @ x - lam[k] * x)
            if res <= RESIDUAL_TOL:
                break
            x = rng.standard_normal(n)
        else:
            raise SolverError("inverse iteration did not converge", worst_residual=float(res), estimates=[lam[k]])
        vectors[k] = x
    return _finalize(lam, vectors, t_mat, SolverPath.SYMMETRIC_TRIDIAGONAL, np.full(n, RESIDUAL_TOL))


# -- general complex path ----------------------------------------------------


def _aberth(f, n: int, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Simultaneous root refinement; returns (roots, converged mask)."""
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)
    done = np.zeros(n, dtype=bool)
    for _ in range(ABERTH_MAX_ITER):
        p, dp = f(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = dp / p
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        denom = w - inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = np.where((p == 0) | ~np.isfinite(denom) | (denom == 0), 0.0, 1.0 / denom)
        delta = np.where(done, 0.0, delta)
        z = z - delta
        done |= np.abs(delta) < ABERTH_TOL * np.maximum(1.0, np.abs(z))
        if done.all():
            break
    return z, done


def _log_abs(p: np.ndarray, lg: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(p)) + lg


def _newton_polish(model: LatticeModel, h: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    z = z.copy()
    if len(z) < 2:
        return z

    def evaluate(x):
        if model.is_open:
            return _open_recurrence(model.t, model.tp, model.gamma, x)
        out = [_dense_char_poly(h, xi) for xi in x]
        return tuple(np.array([o[i] for o in out]) for i in range(3))

    for _ in range(steps):
        p, dp, lg = evaluate(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where((p == 0) | (dp == 0), 0.0, p / dp)
        gaps = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(gaps, np.inf)
        # never let a step jump into a neighbour's basin
        step = np.where(np.abs(step) < 0.1 * gaps.min(axis=1), step, 0.0)
        cand = z - step
        p2, _, lg2 = evaluate(cand)
        better = _log_abs(p2, lg2) < _log_abs(p, lg)
        z = np.where(better, cand, z)
    return z


def _null_space(a: np.ndarray, m: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Up to ``m`` right singular vectors with sigma <= tol (at least one), as rows."""
    _, s, vh = np.linalg.svd(a)
    k = int(np.clip(np.count_nonzero(s <= tol), 1, m))
    return vh[-k:][::-1].conj(), s


def _semisimple_polish(h: np.ndarray, z: np.ndarray, scale: float) -> np.ndarray:
    """Sharpen roots of semisimple multiple eigenvalues by Rayleigh-Ritz.

    Determinant-based root finding only pins an m-fold root to about
    eps**(1/m).  When the m smallest singular values of ``H - zbar`` are all
    small the cluster spans a genuine m-dimensional eigenspace; refine that
    subspace by inverse iteration and take the Ritz values instead.
    Jordan-type clusters (exceptional points) fail the test and are kept.
    """
    z = z.copy()
    n = h.shape[0]
    for grp in _link_clusters(z, 1e-6 * scale):
        m = len(grp)
        if m < 2:
            continue
        zbar = complex(np.mean(z[grp]))
        a = h - zbar * np.eye(n)
        _, s, vh = np.linalg.svd(a)
        if s[-m] > 1e-6 * scale:
            continue
        v = vh[-m:].conj().T
        phase, _, lu, piv = _lu_det(a)
        if phase != 0:
            for _ in range(2):
                v, _ = np.linalg.qr(sla.lu_solve((lu, piv), v, check_finite=False))
        theta, y = np.linalg.eig(v.conj().T @ h @ v)
        x = v @ y
        x /= np.linalg.norm(x, axis=0)
        res = np.linalg.norm(h @ x - x * theta, axis=0)
        independent = np.linalg.svd(x, compute_uv=False)[-1] > 1e-3
        if independent and np.all(res <= 1e-12 * scale) and np.all(np.abs(theta - zbar) <= 1e-6 * scale):
            z[grp] = np.sort_complex(theta)
    return z


def _inverse_iteration(h: np.ndarray, z: complex, seed: np.ndarray, scale: float, steps: int = 3) -> np.ndarray:
    n = h.shape[0]
    shift = z
    for attempt in range(6):
        phase, _, lu, piv = _lu_det(h - shift * np.eye(n))
        if phase != 0:
            break
        shift = z + np.finfo(float).eps * scale * 4.0 ** (attempt + 1) * (1 + 1j)
    x = seed / np.linalg.norm(seed)
    for _ in range(steps):
        x = sla.lu_solve((lu, piv), x, check_finite=False)
        if not np.all(np.isfinite(x)):
            break
        x /= np.linalg.norm(x)
    return x


def _recurrence_vector(model: LatticeModel, e: complex) -> np.ndarray | None:
    """psi_1 = 1 propagated through the secular recurrence; None if a t_n is 0."""
    t, tp, g = model.t, model.tp, model.gamma
    n = model.n_sites
    if not model.is_open or np.any(t == 0):
        return None
    psi = np.zeros(n, dtype=complex)
    psi[0] = 1.0
    for i in range(n - 1):
        back = tp[i - 1] * psi[i - 1] if i > 0 else 0.0
        psi[i + 1] = ((e - 1j * g[i]) * psi[i] - back) / t[i]
        s = np.max(np.abs(psi[: i + 2]))
        if not np.isfinite(s):
            return None
        if s > 0:
            psi[: i + 2] /= s
    return psi


def eigs_general(model: LatticeModel) -> Spectrum:
    """All N roots of ``det(H - E)`` by Aberth-Ehrlich refinement, with eigenvectors.

    Roots closer than 1e-9 form one multiple eigenvalue.  Such a group gets
    the null vectors of ``H - E``; a group with fewer null vectors than
    members (an exceptional point) repeats the ones it has, and its
    residual bound is relaxed to 1e-7.
    """
    validate(model).raise_if_invalid()
    h = build_hamiltonian(model).entries
    n = model.n_sites
    row_norm = float(np.max(np.sum(np.abs(h), axis=1)))
    scale = max(1.0, row_norm)
    f = _log_ratio_evaluator(model, h)

    z, done = _aberth(f, n, 1.0 + row_norm)
    if not done.all():
        backward = np.array([np.linalg.svd(h - zi * np.eye(n), compute_uv=False)[-1] for zi in z[~done]])
        if np.any(backward > MULTIPLE_ROOT_RESIDUAL_TOL * scale):
            raise SolverError(
                "root refinement did not converge",
                worst_residual=float(backward.max()),
                estimates=z[~done],
            )
    z = _newton_polish(model, h, z)
    z = _semisimple_polish(h, z, scale)

    groups = _link_clusters(z, MULTIPLICITY_RADIUS * scale)
    vectors = np.zeros((n, n), dtype=complex)
    bounds = np.full(n, RESIDUAL_TOL)
    for grp in groups:
        if len(grp) == 1:
            k = grp[0]
            vectors[k] = _simple_vector(model, h, z[k], scale)
            continue
        zbar = complex(np.mean(z[grp]))
        null, _ = _null_space(h - zbar * np.eye(n), len(grp), RESIDUAL_TOL * scale)
        for i, k in enumerate(grp):
            vectors[k] = null[i % len(null)]
            bounds[k] = MULTIPLE_ROOT_RESIDUAL_TOL
    return _finalize(z, vectors, h, SolverPath.GENERAL_COMPLEX, bounds, groups, model)


def _simple_vector(model: LatticeModel, h: np.ndarray, e: complex, scale: float) -> np.ndarray:
    n = h.shape[0]
    best, best_res = None, np.inf
    psi = _recurrence_vector(model, e)
    if psi is not None:
        psi = psi / np.linalg.norm(psi)
        best, best_res = psi, np.linalg.norm(h @ psi - e * psi)
        if best_res <= 1e-3 * RESIDUAL_TOL:
            return best
    seed = psi if psi is not None else np.ones(n, dtype=complex)
    for restart in range(INVERSE_ITERATION_RESTARTS):
        x = _inverse_iteration(h, e, seed, scale)
        if np.all(np.isfinite(x)):
            res = np.linalg.norm(h @ x - e * x)
            if res < best_res:
                best, best_res = x, res
            if res <= RESIDUAL_TOL:
                break
        seed = np.random.default_rng(restart).standard_normal(n) + 0j
    if best is None:
        raise SolverError("no eigenvector found", estimates=[e])
    return best


# -- dispatcher and closed form ---------------------------------------------


def eigs(model: LatticeModel) -> Spectrum:
    validate(model).raise_if_invalid()
    h = build_hamiltonian(model).entries
    n = model.n_sites
    cert = gauge_sequence(model)
    if cert.applicable:
        s = cert.symmetrized.entries.real
        off = 0.5 * (np.diag(s, 1) + np.diag(s, -1))
        sym = eigs_symmetric_tridiagonal(np.diag(s), off)
        psi = cert.transport(sym.vectors)
        return _finalize(sym.eigenvalues.real, psi, h, SolverPath.SYMMETRIC_TRIDIAGONAL, np.full(n, RESIDUAL_TOL), model=model)
    if hermiticity_check(model, 1e-12):
        hh = 0.5 * (h + h.conj().T)
        w, v = np.linalg.eigh(hh)
        groups = [g for g in _link_clusters(w.astype(complex), MULTIPLICITY_RADIUS * max(1.0, np.abs(w).max()))]
        return _finalize(w, v.T, h, SolverPath.DENSE_HERMITIAN, np.full(n, RESIDUAL_TOL), groups, model)
    return eigs_general(model)


def exact_constant_hopping(n_sites: int, t: float, tp: float) -> Spectrum:
    """Closed-form spectrum of the uniform open chain with ``t * tp > 0``.

    E_k = 2 sqrt(t tp) cos(k pi / (N + 1)) and
    psi_nk ~ (sqrt(tp / t))**n sin(n k pi / (N + 1)).  With both hops
    negative the level carrying sin(n k pi / (N + 1)) is -E_k instead.
    """
    t = float(np.real_if_close(t))
    tp = float(np.real_if_close(tp))
    if not t * tp > 0:
        raise ValueError(f"closed form needs t * tp > 0, got t={t}, tp={tp}")
    model = LatticeModel.uniform(n_sites, t, tp, 0.0, Boundary.OPEN)
    validate(model).raise_if_invalid()
    n = n_sites
    sign = math.copysign(1.0, t)
    k = np.arange(1, n + 1)
    # cos(k pi/(N+1)) written as a sine so the middle level is exactly 0 for odd N
    energies = 2 * sign * math.sqrt(t * tp) * np.sin((n + 1 - 2 * k) * np.pi / (2 * (n + 1)))
    sites = np.arange(1, n + 1)
    c = np.sin(np.outer(k, sites) * np.pi / (n + 1))
    log_q = (sites - 1) * 0.5 * math.log(tp / t)
    with np.errstate(divide="ignore"):
        log_mag = np.log(np.abs(c)) + log_q
    shift = log_mag.max(axis=1, keepdims=True)
    psi = np.sign(c) * np.exp(log_mag - shift)
    h = build_hamiltonian(model).entries
    return _finalize(energies, psi, h, SolverPath.CLOSED_FORM, np.full(n, RESIDUAL_TOL), model=model)
