"""Quantum states, entropies, mutual information and random sampling.

All entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .numkernel import (
    EIG_ZERO,
    adjoint,
    hermitian_eigensystem,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
)

STATE_TOL = 1e-10
NEG_TOL = 1e-10


def _check_labels(dims, labels):
    dims = tuple(int(d) for d in dims)
    if labels is None:
        labels = tuple(f"X{i}" for i in range(len(dims)))
    labels = tuple(labels)
    if len(labels) != len(dims):
        raise ValueError(f"{len(labels)} labels for {len(dims)} subsystems")
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate labels {labels}")
    return dims, labels


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dims, labels = _check_labels(self.dims, self.labels)
        n = int(np.prod(dims))
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        if np.max(np.abs(m - adjoint(m))) > STATE_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > STATE_TOL:
            raise ValueError(f"density matrix has trace {np.trace(m).real:.12g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_matrix(cls, matrix, dims=None, labels=None) -> "DensityMatrix":
        matrix = np.asarray(matrix, dtype=complex)
        if dims is None:
            dims = (matrix.shape[0],)
        return cls(matrix, tuple(dims), labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        """Eigenvalues with the entropy cutoffs applied.

        Values in (-1e-10, 1e-12) become 0; anything below -1e-10 is treated as
        a genuinely non-positive operator and raises.
        """
        lam = hermitian_eigensystem(self.matrix, STATE_TOL).eigenvalues
        if lam.size and lam[-1] < -NEG_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lam[-1]:.3e}")
        return np.where(lam < EIG_ZERO, 0.0, lam)

    def reduce(self, keep: Iterable[str]) -> "DensityMatrix":
        keep = list(keep)
        idx = [self._index(k) for k in keep]
        traced = [i for i in range(len(self.dims)) if i not in idx]
        kept_in_order = sorted(idx)
        m = partial_trace(self.matrix, self.dims, traced)
        return DensityMatrix(
            m,
            tuple(self.dims[i] for i in kept_in_order),
            tuple(self.labels[i] for i in kept_in_order),
        )

    def _index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def to_json(self) -> dict:
        out = matrix_to_json(self.matrix)
        out["dims"] = list(self.dims)
        out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DensityMatrix":
        return cls(matrix_from_json(obj), tuple(obj["dims"]), tuple(obj["labels"]))


@dataclass(frozen=True)
class PureState:
    vector: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).ravel()
        dims, labels = _check_labels(self.dims, self.labels)
        if v.size != int(np.prod(dims)):
            raise ValueError(f"vector length {v.size} does not match dims {dims}")
        if abs(np.linalg.norm(v) - 1.0) > STATE_TOL:
            raise ValueError(f"state has norm {np.linalg.norm(v):.12g}")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vector, self.vector.conj()), self.dims, self.labels)

    def reduce(self, keep: Iterable[str]) -> DensityMatrix:
        """Reduced state on ``keep`` computed straight from the amplitudes."""
        idx = sorted(self._index(k) for k in keep)
        rest = [i for i in range(len(self.dims)) if i not in idx]
        t = self.vector.reshape(self.dims).transpose(idx + rest)
        dk = int(np.prod([self.dims[i] for i in idx])) if idx else 1
        mat = t.reshape(dk, -1)
        return DensityMatrix(
            mat @ adjoint(mat),
            tuple(self.dims[i] for i in idx),
            tuple(self.labels[i] for i in idx),
        )

    def _index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def to_json(self) -> dict:
        out = matrix_to_json(self.vector.reshape(-1, 1))
        out["dims"] = list(self.dims)
        out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PureState":
        return cls(matrix_from_json(obj).ravel(), tuple(obj["dims"]), tuple(obj["labels"]))


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits."""
    if isinstance(rho, PureState):
        return 0.0
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix.from_matrix(rho)
    lam = rho.spectrum()
    lam = lam[lam > 0.0]
    return 0.0 - float(np.sum(lam * np.log2(lam)))


def shannon_entropy(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0.0]
    return 0.0 - float(np.sum(p * np.log2(p)))


def _subsystem_entropy(state, labels) -> float:
    labels = list(labels)
    if isinstance(state, PureState):
        # S(X) = S(complement) on pure states; diagonalize the smaller side
        rest = [l for l in state.labels if l not in labels]
        if not rest:
            return 0.0
        size = int(np.prod([state.dims[state.labels.index(l)] for l in labels]))
        other = int(np.prod([state.dims[state.labels.index(l)] for l in rest]))
        if other < size:
            labels = rest
    return von_neumann_entropy(state.reduce(labels))


def mutual_information(state, part_a, part_b) -> float:
    """I(A:B) = S(A) + S(B) - S(AB) in bits for label groups of ``state``."""
    part_a = [part_a] if isinstance(part_a, str) else list(part_a)
    part_b = [part_b] if isinstance(part_b, str) else list(part_b)
    if set(part_a) & set(part_b):
        raise ValueError(f"overlapping parts {part_a} and {part_b}")
    for lab in part_a + part_b:
        if lab not in state.labels:
            raise ValueError(f"unknown subsystem label {lab!r}")
    sa = _subsystem_entropy(state, part_a)
    sb = _subsystem_entropy(state, part_b)
    sab = _subsystem_entropy(state, part_a + part_b)
    return sa + sb - sab


def maximally_entangled(d: int, labels=("R", "I")) -> PureState:
    if d < 2:
        raise ValueError("maximally entangled state needs d >= 2")
    v = np.eye(d, dtype=complex).ravel() / np.sqrt(d)
    return PureState(v, (d, d), tuple(labels))


def purify(sigma: DensityMatrix, new_label: str = "K") -> PureState:
    """Purification sum_i sqrt(lam_i) |e_i> |i> with a rank-sized purifier."""
    eig = hermitian_eigensystem(sigma.matrix, STATE_TOL)
    lam = eig.eigenvalues
    if lam.size and lam[-1] < -NEG_TOL:
        raise ValueError("cannot purify a non-positive operator")
    keep = lam > EIG_ZERO
    lam = lam[keep]
    vecs = eig.eigenvectors[:, keep]
    rank = lam.size
    psi = (vecs * np.sqrt(lam)).reshape(sigma.dim, rank)
    psi = psi / np.linalg.norm(psi)
    return PureState(psi.ravel(), sigma.dims + (rank,), sigma.labels + (new_label,))


def haar_random_unitary(d: int, seed) -> np.ndarray:
    """Haar unitary from the phase-corrected QR of a complex Ginibre matrix."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_random_isometry(d_in: int, d_out: int, seed) -> np.ndarray:
    if d_out < d_in:
        raise ValueError("isometry needs d_out >= d_in")
    return haar_random_unitary(d_out, seed)[:, :d_in]


def random_pure_state(dims: Sequence[int], labels, seed) -> PureState:
    n = int(np.prod(dims))
    return PureState(haar_random_unitary(n, seed)[:, 0], tuple(dims), tuple(labels))


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray  # lam_i, descending, summing to 1
    left: np.ndarray  # columns |u_i>, full orthonormal basis of the left factor
    right: np.ndarray  # columns |v_i>, full orthonormal basis of the right factor
    left_dims: tuple[int, ...] = field(default=())
    right_dims: tuple[int, ...] = field(default=())

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > EIG_ZERO))

    def reconstruct(self) -> np.ndarray:
        r = self.coefficients.size
        amps = np.sqrt(self.coefficients)
        return np.einsum("i,ai,bi->ab", amps, self.left[:, :r], self.right[:, :r]).ravel()


def _complete_basis(cols: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a full orthonormal basis of C^dim."""
    k = cols.shape[1]
    if k == dim:
        return cols
    proj = np.eye(dim, dtype=complex) - cols @ adjoint(cols)
    eig = hermitian_eigensystem(proj, 1e-8)
    return np.hstack([cols, eig.eigenvectors[:, : dim - k]])


def schmidt_decompose(psi: PureState, cut: Iterable[str]) -> SchmidtDecomposition:
    """Schmidt decomposition of ``psi`` across ``cut`` | rest.

    The left factor is ordered as the labels appear in ``psi``.
    """
    cut = list(cut)
    for lab in cut:
        if lab not in psi.labels:
            raise ValueError(f"unknown subsystem label {lab!r}")
    idx = sorted(psi.labels.index(l) for l in cut)
    rest = [i for i in range(len(psi.dims)) if i not in idx]
    if not idx or not rest:
        raise ValueError("cut must be a proper nonempty subset of the labels")
    dl = int(np.prod([psi.dims[i] for i in idx]))
    dr = int(np.prod([psi.dims[i] for i in rest]))
    mat = psi.vector.reshape(psi.dims).transpose(idx + rest).reshape(dl, dr)

    eig = hermitian_eigensystem(mat @ adjoint(mat), STATE_TOL)
    lam = np.clip(eig.eigenvalues, 0.0, None)
    left = eig.eigenvectors
    r = int(np.sum(lam > EIG_ZERO))
    lam = lam[:r]
    right = (mat.T @ left[:, :r].conj()) / np.sqrt(lam)
    lam = lam / lam.sum()
    right = _complete_basis(right, dr)
    return SchmidtDecomposition(
        lam,
        left,
        right,
        tuple(psi.dims[i] for i in idx),
        tuple(psi.dims[i] for i in rest),
    )
