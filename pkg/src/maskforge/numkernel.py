"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` complex arrays.  The Hermitian eigensolver is a
cyclic Jacobi method with a round-robin (parallel) pair ordering so that each
round of disjoint rotations is applied as one vectorized update.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

OFFDIAG_TOL = 1e-13
MAX_SWEEPS = 100
EIG_ZERO = 1e-12


@dataclass(frozen=True)
class HermitianEigen:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # unitary, columns are eigenvectors

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def adjoint(x: np.ndarray) -> np.ndarray:
    return np.conj(x).T


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: n-1 rounds of n/2 disjoint pairs (n even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


_SCHEDULES: dict[int, list[tuple[np.ndarray, np.ndarray]]] = {}


def _schedule(n: int):
    if n not in _SCHEDULES:
        _SCHEDULES[n] = _round_robin(n)
    return _SCHEDULES[n]


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eigensystem(h, tol: float = 1e-10) -> HermitianEigen:
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix.
    tol : float
        Allowed sup-norm deviation from Hermiticity.

    Returns
    -------
    HermitianEigen
        Eigenvalues sorted descending and the unitary of column eigenvectors.
    """
    a = as_matrix(h)
    n, m = a.shape
    if n != m:
        raise ValueError(f"matrix is not square: {a.shape}")
    dev = float(np.max(np.abs(a - adjoint(a)))) if n else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (deviation {dev:.3e} > {tol:.1e})")
    a = 0.5 * (a + adjoint(a))

    # pad to even size with a decoupled zero row/column
    size = n + (n % 2)
    # work (top) and accumulated eigenvectors (bottom) share column updates
    stack = np.zeros((2 * size, size), dtype=complex)
    stack[:n, :n] = a
    stack[size:] = np.eye(size)
    work = stack[:size]
    scale = max(1.0, float(np.linalg.norm(a)))

    if size > 1:
        rounds = _schedule(size)
        for _ in range(MAX_SWEEPS):
            if _offdiag_norm(work) <= OFFDIAG_TOL * scale:
                break
            for p, q in rounds:
                apq = work[p, q]
                r = np.abs(apq)
                active = r > 0.0
                if not active.all():
                    # zero pairs (including the padding index) stay untouched
                    if not active.any():
                        continue
                    p, q, apq, r = p[active], q[active], apq[active], r[active]
                h = p.size
                theta = 0.5 * np.arctan2(2.0 * r, work[p, p].real - work[q, q].real)
                c = np.cos(theta)
                s = np.sin(theta)
                conj_phase = np.conj(apq) / r  # e^{-i phi}
                # disjoint 2x2 blocks U = [[c, -s], [s e^{-i phi}, c e^{-i phi}]]
                rot = np.empty((h, 2, 2), dtype=complex)
                rot[:, 0, 0] = c
                rot[:, 0, 1] = -s
                rot[:, 1, 0] = s * conj_phase
                rot[:, 1, 1] = c * conj_phase
                idx = np.concatenate([p, q])
                # columns: X <- X U for both work and v
                cols = stack[:, idx].reshape(2 * size, 2, h).transpose(2, 0, 1)
                stack[:, idx] = (cols @ rot).transpose(1, 2, 0).reshape(2 * size, 2 * h)
                # rows of work: X <- U^dagger X
                rows = work[idx].reshape(2, h, size).transpose(1, 0, 2)
                rot_h = np.conj(rot.transpose(0, 2, 1))
                work[idx] = (rot_h @ rows).transpose(1, 0, 2).reshape(2 * h, size)
                work[p, q] = 0.0
                work[q, p] = 0.0

    evals = np.real(np.diag(work))[:n]
    vecs = stack[size:][:n, :n]
    order = np.argsort(-evals, kind="stable")
    return HermitianEigen(evals[order], vecs[:, order])


def eigvalsh(h, tol: float = 1e-10) -> np.ndarray:
    return hermitian_eigensystem(h, tol).eigenvalues


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors)."""
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def partial_trace(x, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the subsystems with indices in ``traced``.

    ``dims`` lists subsystem dimensions in tensor order; the kept subsystems
    stay in their original order.
    """
    a = as_matrix(x)
    dims = [int(d) for d in dims]
    traced = sorted(set(int(t) for t in traced))
    total = int(np.prod(dims)) if dims else 1
    if a.shape != (total, total):
        raise ValueError(f"dims {dims} do not match matrix shape {a.shape}")
    for t in traced:
        if not 0 <= t < len(dims):
            raise ValueError(f"invalid subsystem index {t} for {len(dims)} subsystems")
    keep = [i for i in range(len(dims)) if i not in traced]
    n = len(dims)
    t = a.reshape(dims + dims)
    # einsum: trace indices share a letter across row and column
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValueError("too many subsystems")
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in traced:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(kd, kd)


def is_isometry(m, tol: float = 1e-10) -> bool:
    m = as_matrix(m)
    return bool(np.max(np.abs(adjoint(m) @ m - np.eye(m.shape[1]))) <= tol)


def matrix_function(h, func, tol: float = 1e-10) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    eig = hermitian_eigensystem(h, tol)
    v = eig.eigenvectors
    return (v * func(eig.eigenvalues)) @ adjoint(v)


def entropy_of_spectrum(evals: np.ndarray, cutoff: float = EIG_ZERO) -> float:
    lam = np.asarray(evals, dtype=float)
    lam = lam[lam > cutoff]
    return 0.0 - float(np.sum(lam * np.log2(lam)))


# ---- shared matrix JSON format: {rows, cols, data: [[re, im], ...]} ----

def matrix_to_json(x) -> dict:
    a = np.asarray(x, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in a.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise ValueError(f"matrix JSON has {len(data)} entries, expected {rows * cols}")
    flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    return flat.reshape(rows, cols)
