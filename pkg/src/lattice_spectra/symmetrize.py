"""Diagonal gauge transform of an open chain onto a real symmetric one.

Substituting ``psi_n = Q_n c_n`` turns the hop pair (t_n, t'_n) into
(t_n Q_{n+1}/Q_n, t'_n Q_n/Q_{n+1}).  The result is symmetric when
``t_n Q_{n+1}**2 == t'_n Q_n**2``, i.e. ``Q_{n+1}/Q_n = sqrt(t'_n/t_n)``,
which needs real hops of equal sign.  Both hops then become
``sign(t_n) * sqrt(t_n t'_n)`` and the open chain is similar to a real
symmetric tridiagonal matrix, so its spectrum is real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ComplexMatrix, LatticeModel, Structure, build_hamiltonian, validate

__all__ = ["GaugeCertificate", "gauge_sequence", "reality_certificate"]


@dataclass(frozen=True, eq=False)
class GaugeCertificate:
    """Outcome of :func:`gauge_sequence`.

    ``q`` and ``log_q`` hold Q_1..Q_N (with Q_1 = 1) when the transform
    applies; ``q`` may under/overflow for long strongly asymmetric chains,
    ``log_q`` never does.  Everything except ``applicable`` and ``reason``
    is None when the transform does not apply.
    """

    applicable: bool
    reason: str | None = None
    q: np.ndarray | None = None
    log_q: np.ndarray | None = None
    symmetrized: ComplexMatrix | None = None
    max_asymmetry: float | None = None

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.symmetrized.entries).real.copy()

    @property
    def offdiag(self) -> np.ndarray:
        s = self.symmetrized.entries
        return np.diag(s, 1).real.copy()

    def to_dict(self) -> dict:
        if not self.applicable:
            return {"applicable": False, "reason": self.reason}
        return {
            "applicable": True,
            "reason": None,
            "q": [float(x) for x in self.q],
            "log_q": [float(x) for x in self.log_q],
            "symmetrized": [[float(x) for x in row] for row in self.symmetrized.entries.real],
            "max_asymmetry": self.max_asymmetry,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaugeCertificate":
        if not data["applicable"]:
            return cls(applicable=False, reason=data["reason"])
        return cls(
            applicable=True,
            q=np.array(data["q"], dtype=float),
            log_q=np.array(data["log_q"], dtype=float),
            symmetrized=ComplexMatrix(np.array(data["symmetrized"], dtype=float), Structure.TRIDIAGONAL),
            max_asymmetry=data["max_asymmetry"],
        )

    def transport(self, c: np.ndarray) -> np.ndarray:
        """Map symmetric-chain vectors ``c`` (rows) to ``psi_n = Q_n c_n``.

        Each row is rescaled to unit max modulus in the process, so the
        output never under/overflows; renormalize afterwards as needed.
        """
        c = np.atleast_2d(np.asarray(c))
        with np.errstate(divide="ignore"):
            log_mag = np.log(np.abs(c)) + self.log_q
        shift = np.max(log_mag, axis=1, keepdims=True)
        shift = np.where(np.isfinite(shift), shift, 0.0)
        scale = np.exp(log_mag - shift)
        return np.where(c == 0, 0.0, scale * np.exp(1j * np.angle(c)))


def _first_failure(model: LatticeModel) -> str | None:
    if model.has_gain_loss:
        return "gain/loss present"
    if not model.is_open:
        return "closed chain"
    for n, (t, tp) in enumerate(zip(model.forward_hops, model.backward_hops), start=1):
        if t.imag != 0 or tp.imag != 0:
            return f"complex hop at n={n}"
        if t.real * tp.real <= 0:
            return f"t_n t'_n <= 0 at n={n}"
    return None


def gauge_sequence(model: LatticeModel) -> GaugeCertificate:
    validate(model).raise_if_invalid()
    reason = _first_failure(model)
    if reason is not None:
        return GaugeCertificate(applicable=False, reason=reason)

    t = model.t.real
    tp = model.tp.real
    # log Q_{n+1} - log Q_n = log|sqrt(t'_n / t_n)|; both hops share a sign
    log_ratio = 0.5 * (np.log(np.abs(tp)) - np.log(np.abs(t)))
    log_q = np.concatenate([[0.0], np.cumsum(log_ratio)])
    ratio = np.exp(log_ratio)

    n = model.n_sites
    s = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    s[idx, idx + 1] = t * ratio
    s[idx + 1, idx] = tp / ratio
    asym = float(np.max(np.abs(s - s.T)))
    return GaugeCertificate(
        applicable=True,
        q=np.exp(log_q),
        log_q=log_q,
        symmetrized=ComplexMatrix(s, Structure.TRIDIAGONAL),
        max_asymmetry=asym,
    )


def reality_certificate(model: LatticeModel) -> bool:
    """True when the open chain is provably similar to a real symmetric one."""
    return gauge_sequence(model).applicable


def similarity_check(model: LatticeModel, cert: GaugeCertificate) -> np.ndarray:
    """Explicit ``D^-1 H D`` with ``D = diag(Q)``; for small, well-scaled chains."""
    h = build_hamiltonian(model).entries
    q = cert.q
    return (h * q[None, :]) / q[:, None]
