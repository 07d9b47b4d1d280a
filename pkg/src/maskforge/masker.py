"""The masker abstraction: an isometry M : I (x) S -> A (x) B plus a safe state.

Applying a masker means ``rho -> M (rho (x) sigma_S) M^dagger``.  Spectral
decomposition of the safe state splits it into a probabilistic mixture of
bipartite embeddings ``M_i = M (1 (x) |e_i>)`` with orthogonal images.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numkernel import adjoint, as_matrix, hermitian_eigensystem, matrix_from_json, matrix_to_json
from .states import (
    DensityMatrix,
    PureState,
    maximally_entangled,
    mutual_information,
    purify,
    von_neumann_entropy,
)

ISOMETRY_TOL = 1e-10
UNIVERSAL_TOL = 1e-10
PROB_CUTOFF = 1e-12


class NotUniversalError(ValueError):
    """Raised when an operation requires a universal masker."""


@dataclass(frozen=True)
class Masker:
    isometry: np.ndarray
    safe_state: DensityMatrix
    dI: int
    dS: int
    dA: int
    dB: int

    def __post_init__(self):
        m = as_matrix(self.isometry)
        for name in ("dI", "dS", "dA", "dB"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.dA * self.dB < self.dI * self.dS:
            raise ValueError("output space smaller than input space: dA*dB < dI*dS")
        if m.shape != (self.dA * self.dB, self.dI * self.dS):
            raise ValueError(
                f"isometry shape {m.shape} does not match "
                f"({self.dA}*{self.dB}, {self.dI}*{self.dS})"
            )
        dev = float(np.max(np.abs(adjoint(m) @ m - np.eye(m.shape[1]))))
        if dev > ISOMETRY_TOL:
            raise ValueError(f"M is not an isometry (deviation {dev:.3e})")
        if self.safe_state.dim != self.dS:
            raise ValueError(f"safe state dimension {self.safe_state.dim} != dS={self.dS}")
        m.setflags(write=False)
        object.__setattr__(self, "isometry", m)

    @classmethod
    def from_embeddings(cls, embeddings, dA: int, dB: int) -> "Masker":
        """Assemble M = sum_i M_i (x) <i|_S with a diagonal safe state."""
        dI = embeddings[0].isometry.shape[1]
        dS = len(embeddings)
        m = np.zeros((dA * dB, dI * dS), dtype=complex)
        for i, e in enumerate(embeddings):
            m[:, i::dS] = e.isometry
        probs = np.array([e.probability for e in embeddings])
        sigma = DensityMatrix(np.diag(probs).astype(complex), (dS,), ("S",))
        return cls(m, sigma, dI, dS, dA, dB)

    def to_json(self) -> dict:
        return {
            "dI": self.dI,
            "dS": self.dS,
            "dA": self.dA,
            "dB": self.dB,
            "isometry": matrix_to_json(self.isometry),
            "safe_state": matrix_to_json(self.safe_state.matrix),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Masker":
        sigma = DensityMatrix(matrix_from_json(obj["safe_state"]), (int(obj["dS"]),), ("S",))
        return cls(matrix_from_json(obj["isometry"]), sigma, obj["dI"], obj["dS"], obj["dA"], obj["dB"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "Masker":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class BipartiteEmbedding:
    isometry: np.ndarray  # (dA*dB, dI)
    probability: float
    dA: int
    dB: int
    name: str = ""

    @property
    def dI(self) -> int:
        return self.isometry.shape[1]

    def is_isometry(self, tol: float = ISOMETRY_TOL) -> bool:
        m = self.isometry
        return bool(np.max(np.abs(adjoint(m) @ m - np.eye(m.shape[1]))) <= tol)


@dataclass(frozen=True)
class MaskerReport:
    is_universal: bool
    marginal_deviation: float
    sigmaA: DensityMatrix
    sigmaB: DensityMatrix
    randomness_cost: float
    embedding_count: int
    tolerance: float = UNIVERSAL_TOL

    def to_json(self) -> dict:
        return {
            "universal": self.is_universal,
            "marginal_deviation": self.marginal_deviation,
            "tolerance": self.tolerance,
            "R": self.randomness_cost,
            "embedding_count": self.embedding_count,
            "S_sigmaA": von_neumann_entropy(self.sigmaA),
            "S_sigmaB": von_neumann_entropy(self.sigmaB),
        }


def _tensor(m: Masker) -> np.ndarray:
    return m.isometry.reshape(m.dA, m.dB, m.dI, m.dS)


def apply_operator(m: Masker, x) -> np.ndarray:
    """Linear extension: M (X (x) sigma_S) M^dagger for any dI x dI operator X."""
    x = as_matrix(x)
    if x.shape != (m.dI, m.dI):
        raise ValueError(f"input has shape {x.shape}, masker expects ({m.dI}, {m.dI})")
    big = np.kron(x, m.safe_state.matrix)
    return m.isometry @ big @ adjoint(m.isometry)


def apply(m: Masker, rho) -> DensityMatrix:
    mat = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    return DensityMatrix(apply_operator(m, mat), (m.dA, m.dB), ("A", "B"))


def decompose_embeddings(m: Masker) -> list[BipartiteEmbedding]:
    """Random-isometry form sum_i p_i M_i rho M_i^dagger.

    The eigenbasis of a degenerate safe state is whatever the Jacobi solver
    returns; for diagonal safe states that is the computational basis.
    """
    eig = hermitian_eigensystem(m.safe_state.matrix, ISOMETRY_TOL)
    t = m.isometry.reshape(m.dA * m.dB, m.dI, m.dS)
    out = []
    for idx, (p, e) in enumerate(zip(eig.eigenvalues, eig.eigenvectors.T)):
        if p <= PROB_CUTOFF:
            continue
        mi = t @ e  # contracts S with |e_i>
        out.append(BipartiteEmbedding(mi, float(p), m.dA, m.dB, name=str(idx)))
    return out


def marginal_units(m: Masker) -> tuple[np.ndarray, np.ndarray]:
    """Tr_B and Tr_A of the masker output for every matrix unit E_kl.

    Returns arrays indexed ``[k, l, :, :]``.
    """
    t = _tensor(m)
    sig = m.safe_state.matrix
    ts = np.einsum("abks,st->abkt", t, sig)
    a_units = np.einsum("abkt,cblt->klac", ts, t.conj())
    b_units = np.einsum("abkt,aclt->klbc", ts, t.conj())
    return a_units, b_units


def verify_universal(m: Masker, tol: float = UNIVERSAL_TOL) -> MaskerReport:
    """Check that both marginals are input independent.

    By linearity it suffices to check Tr_B Phi(E_kl) = delta_kl sigma_A (and
    the same for B) on all matrix units; the reference marginals are the
    images of the maximally mixed input.
    """
    a_units, b_units = marginal_units(m)
    eye = np.eye(m.dI)
    sigma_a = np.einsum("kkac->ac", a_units) / m.dI
    sigma_b = np.einsum("kkbc->bc", b_units) / m.dI
    dev_a = np.abs(a_units - eye[:, :, None, None] * sigma_a[None, None])
    dev_b = np.abs(b_units - eye[:, :, None, None] * sigma_b[None, None])
    deviation = float(max(dev_a.max(), dev_b.max()))
    embeddings = decompose_embeddings(m)
    return MaskerReport(
        is_universal=deviation <= tol,
        marginal_deviation=deviation,
        sigmaA=DensityMatrix(0.5 * (sigma_a + adjoint(sigma_a)), (m.dA,), ("A",)),
        sigmaB=DensityMatrix(0.5 * (sigma_b + adjoint(sigma_b)), (m.dB,), ("B",)),
        randomness_cost=randomness_cost(m),
        embedding_count=len(embeddings),
        tolerance=tol,
    )


def verify_orthogonal_images(embeddings, tol: float = 1e-10) -> bool:
    for i, ei in enumerate(embeddings):
        for ej in embeddings[i + 1:]:
            if np.max(np.abs(adjoint(ei.isometry) @ ej.isometry)) >= tol:
                return False
    return True


def randomness_cost(m: Masker) -> float:
    """Entropy of the safe state, in bits."""
    return von_neumann_entropy(m.safe_state)


def check_fact1(m: Masker, report: MaskerReport | None = None) -> bool:
    """min{S(sigma_A), S(sigma_B), S(sigma_S)} >= log2 dI for a universal masker."""
    report = report or verify_universal(m)
    if not report.is_universal:
        raise NotUniversalError(
            f"masker is not universal (deviation {report.marginal_deviation:.3e})"
        )
    lowest = min(
        von_neumann_entropy(report.sigmaA),
        von_neumann_entropy(report.sigmaB),
        report.randomness_cost,
    )
    return lowest >= np.log2(m.dI) - 1e-9


@dataclass(frozen=True)
class ShareReport:
    I_RA: float
    I_RB: float
    I_RK: float
    I_RAK: float
    I_RBK: float
    full: float  # 2 log2 dI
    universal: bool

    @property
    def secure(self) -> bool:
        """Single parties learn nothing and both pairs AK, BK recover the secret."""
        tol = 1e-9
        return (
            max(self.I_RA, self.I_RB, self.I_RK) < tol
            and abs(self.I_RAK - self.full) < tol
            and abs(self.I_RBK - self.full) < tol
        )

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.I_RA, self.I_RB, self.I_RK, self.I_RAK, self.I_RBK)

    def to_json(self) -> dict:
        return {
            "I_RA": self.I_RA,
            "I_RB": self.I_RB,
            "I_RK": self.I_RK,
            "I_RAK": self.I_RAK,
            "I_RBK": self.I_RBK,
            "full": self.full,
            "universal": self.universal,
            "secure": self.secure,
        }


def global_share_state(m: Masker) -> PureState:
    """Pure state on (R, A, B, K): M applied to |Gamma>_RI (x) |Sigma>_SK."""
    gamma = maximally_entangled(m.dI)
    sigma = purify(m.safe_state, "K")
    dK = sigma.dims[1]
    g = gamma.vector.reshape(m.dI, m.dI)
    s = sigma.vector.reshape(m.dS, dK)
    t = _tensor(m)
    psi = np.einsum("ri,sk,abis->rabk", g, s, t)
    return PureState(psi.ravel(), (m.dI, m.dA, m.dB, dK), ("R", "A", "B", "K"))


def verify_threshold_shares(m: Masker, tol: float = UNIVERSAL_TOL) -> ShareReport:
    """Mutual informations of the reference with A, B, K, AK and BK.

    A non-universal masker still gets a report; its ``secure`` flag is false.
    """
    universal = verify_universal(m, tol).is_universal
    psi = global_share_state(m)
    return ShareReport(
        I_RA=mutual_information(psi, ["R"], ["A"]),
        I_RB=mutual_information(psi, ["R"], ["B"]),
        I_RK=mutual_information(psi, ["R"], ["K"]),
        I_RAK=mutual_information(psi, ["R"], ["A", "K"]),
        I_RBK=mutual_information(psi, ["R"], ["B", "K"]),
        full=2 * float(np.log2(m.dI)),
        universal=universal,
    )
