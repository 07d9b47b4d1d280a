"""Constructive falsification of the phase-disk picture of maskable states.

For the masker that hands one qudit of a d^2-dimensional input to each party,
every maximally entangled input is maskable.  A candidate basis {|M_k>} could
only confine the maskable set to a fixed-magnitude "disk" if the diagonal
``|<M_k|psi_theta>|^2`` of every such state were the same.  Two maximally
entangled states with different diagonals are therefore a witness against
that basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .numkernel import adjoint
from .states import PureState, haar_random_unitary, schmidt_decompose

GAP_THRESHOLD = 0.05
GRID_POINTS = 64
SCHMIDT_CUTOFF = 1e-6
ORTHO_TOL = 1e-10


class RecipeFailure(RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def _check_orthonormal(cols: np.ndarray, what: str) -> None:
    g = adjoint(cols) @ cols
    if np.max(np.abs(g - np.eye(cols.shape[1]))) > ORTHO_TOL:
        raise ValueError(f"{what} is not orthonormal")


@dataclass(frozen=True)
class CandidateBasis:
    d: int
    vectors: np.ndarray  # (d*d, d*d), columns are |M_k>

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.shape != (self.d**2, self.d**2):
            raise ValueError(f"candidate basis for d={self.d} needs shape ({self.d**2}, {self.d**2})")
        _check_orthonormal(v, "candidate basis")
        object.__setattr__(self, "vectors", v)

    @classmethod
    def computational(cls, d: int) -> "CandidateBasis":
        return cls(d, np.eye(d * d, dtype=complex))

    @classmethod
    def bell(cls) -> "CandidateBasis":
        s = 1 / np.sqrt(2)
        v = np.array([[s, 0, 0, s], [s, 0, 0, -s], [0, s, s, 0], [0, s, -s, 0]], dtype=complex).T
        return cls(2, v)

    @classmethod
    def haar(cls, d: int, seed) -> "CandidateBasis":
        return cls(d, haar_random_unitary(d * d, seed))


def fourier_local_basis(basis, d: int | None = None) -> np.ndarray:
    """|a~_j> = d^-1/2 sum_k exp(2 pi i j k / d) |a_k>, columns in and out."""
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[1] if d is None else d
    if basis.shape[1] != d:
        raise ValueError(f"expected {d} basis vectors, got {basis.shape[1]}")
    _check_orthonormal(basis, "local basis")
    k = np.arange(d)
    f = np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)
    return basis @ f


def family_state(local_a: np.ndarray, local_b: np.ndarray, phases) -> np.ndarray:
    """d^-1/2 sum_j exp(i theta_j) |a_j> (x) |b_j>."""
    d = local_a.shape[1]
    ph = np.exp(1j * np.asarray(phases, dtype=float))
    return np.einsum("j,aj,bj->ab", ph, local_a, local_b).ravel() / np.sqrt(d)


def diagonal(basis: CandidateBasis, psi: np.ndarray) -> np.ndarray:
    return np.abs(adjoint(basis.vectors) @ psi) ** 2


@dataclass(frozen=True)
class _Scan:
    gap: float
    k: int
    phases1: np.ndarray
    phases2: np.ndarray


def _scan(basis: CandidateBasis, local_a, local_b, phases, grid: int, refine: bool) -> _Scan:
    d = basis.d
    _check_orthonormal(local_a, "local basis A")
    _check_orthonormal(local_b, "local basis B")
    base = np.zeros(d) if phases is None else np.asarray(phases, dtype=float)
    # overlaps c[k, j] = <M_k| a_j b_j> / sqrt(d)
    prod = np.einsum("aj,bj->abj", local_a, local_b).reshape(d * d, d)
    c = adjoint(basis.vectors) @ prod / np.sqrt(d)

    def diag_at(theta):
        return np.abs(c @ np.exp(1j * theta)) ** 2

    ts = 2 * np.pi * np.arange(grid) / grid - np.pi
    settings = [base.copy()]
    for j in range(1, d):
        for t in ts:
            th = base.copy()
            th[j] += t
            settings.append(th)
    settings = np.array(settings)
    diags = np.abs(np.exp(1j * settings) @ c.T) ** 2
    spread = diags.max(axis=0) - diags.min(axis=0)
    k = int(np.argmax(spread))
    hi = settings[int(np.argmax(diags[:, k]))].copy()
    lo = settings[int(np.argmin(diags[:, k]))].copy()

    if refine:
        width = 2 * np.pi / grid
        for target, sign in ((hi, -1.0), (lo, 1.0)):
            for j in range(1, d):
                def f(t, j=j, target=target, sign=sign):
                    th = target.copy()
                    th[j] = t
                    return sign * diag_at(th)[k]
                r = minimize_scalar(f, bounds=(target[j] - width, target[j] + width),
                                    method="bounded", options={"xatol": 1e-10})
                if r.fun < f(target[j]):
                    target[j] = r.x
    gap = float(np.max(np.abs(diag_at(hi) - diag_at(lo))))
    return _Scan(gap, k, hi, lo)


def disk_deviation(basis: CandidateBasis, local_a, local_b, phases=None,
                   grid: int = GRID_POINTS, refine: bool = True) -> float:
    """Largest sup-norm change of the candidate-basis diagonal as the phases vary.

    Each relative phase theta_j (j >= 1) is swept over ``grid`` points around
    ``phases``.  Zero means the tested family looks like a disk in this basis.
    """
    return _scan(basis, np.asarray(local_a, complex), np.asarray(local_b, complex),
                 phases, grid, refine).gap


@dataclass(frozen=True)
class ViolationWitness:
    state1: PureState
    state2: PureState
    k: int
    diagonal_gap: float
    branch: str
    phases1: np.ndarray
    phases2: np.ndarray

    def marginal_deviation(self) -> float:
        d = self.state1.dims[0]
        worst = 0.0
        for s in (self.state1, self.state2):
            for lab in s.labels:
                worst = max(worst, float(np.max(np.abs(s.reduce([lab]).matrix - np.eye(d) / d))))
        return worst

    def to_json(self) -> dict:
        return {
            "branch": self.branch,
            "k": self.k,
            "diagonal_gap": self.diagonal_gap,
            "phases1": list(map(float, self.phases1)),
            "phases2": list(map(float, self.phases2)),
            "marginal_deviation": self.marginal_deviation(),
            "state1": self.state1.to_json(),
            "state2": self.state2.to_json(),
        }


def _product_factors(basis: CandidateBasis) -> tuple[np.ndarray, np.ndarray] | None:
    """Recover local bases {alpha_i}, {beta_j} of a product basis, if it is one."""
    d = basis.d
    lefts, rights = [], []
    for k in range(d * d):
        psi = PureState(basis.vectors[:, k], (d, d), ("A", "B"))
        sd = schmidt_decompose(psi, ["A"])
        lefts.append(sd.left[:, 0])
        rights.append(sd.right[:, 0])

    def cluster(vecs):
        reps = []
        for v in vecs:
            if all(abs(np.vdot(r, v)) < 0.5 for r in reps):
                reps.append(v)
        if len(reps) != d:
            return None
        mat = np.array(reps).T
        if np.max(np.abs(adjoint(mat) @ mat - np.eye(d))) > 1e-6:
            return None
        q, r = np.linalg.qr(mat)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    a, b = cluster(lefts), cluster(rights)
    if a is None or b is None:
        return None
    return a, b


def _witness(basis, local_a, local_b, branch, grid) -> ViolationWitness:
    scan = _scan(basis, local_a, local_b, None, grid, refine=True)
    d = basis.d
    s1 = PureState(family_state(local_a, local_b, scan.phases1), (d, d), ("A", "B"))
    s2 = PureState(family_state(local_a, local_b, scan.phases2), (d, d), ("A", "B"))
    return ViolationWitness(s1, s2, scan.k, scan.gap, branch, scan.phases1, scan.phases2)


def find_violation(basis: CandidateBasis, threshold: float = GAP_THRESHOLD,
                   grid: int = GRID_POINTS) -> ViolationWitness:
    """Two maskable states whose candidate-basis diagonals differ by >= threshold.

    If some basis vector is entangled, its Schmidt bases give the family;
    otherwise the basis is a product of local bases and their Fourier
    transforms give it.
    """
    d = basis.d
    schmidt = []
    for k in range(d * d):
        sd = schmidt_decompose(PureState(basis.vectors[:, k], (d, d), ("A", "B")), ["A"])
        second = sd.coefficients[1] if sd.coefficients.size > 1 else 0.0
        schmidt.append((second, k, sd))
    schmidt.sort(key=lambda x: (-x[0], x[1]))
    second, k, sd = schmidt[0]

    candidates = []
    if second > SCHMIDT_CUTOFF:
        # <M_k|a_j b_j> = sqrt(lam_j) when a, b are the Schmidt bases of M_k
        candidates.append(("schmidt", sd.left, sd.right))
    factors = _product_factors(basis)
    if factors is not None:
        a, b = factors
        candidates.append(("fourier", fourier_local_basis(a), fourier_local_basis(b)))
    if second <= SCHMIDT_CUTOFF or factors is None:
        candidates.append(("fourier-schmidt", fourier_local_basis(sd.left), fourier_local_basis(sd.right)))

    best = None
    for branch, la, lb in candidates:
        w = _witness(basis, la, lb, branch, grid)
        if best is None or w.diagonal_gap > best.diagonal_gap:
            best = w
        if w.diagonal_gap >= threshold:
            return w
    raise RecipeFailure(
        f"best diagonal gap {best.diagonal_gap:.4g} below threshold {threshold}", best
    )
