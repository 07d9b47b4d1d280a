"""Entanglement-assisted classical capacity and the subchannel trade-off.

The capacity of a channel N with isometric dilation V is the maximum over
inputs rho of the quantum mutual information
``I(rho) = S(rho) + S(N(rho)) - S(N^c(rho))``, a concave function.  It is
maximized by exponentiated-gradient ascent
``rho <- exp(log rho + s * grad I) / Z`` with backtracking on ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import FlowProfile, min_subset_entropy
from .masker import Masker, decompose_embeddings
from .numkernel import adjoint, hermitian_eigensystem
from .states import DensityMatrix, haar_random_isometry

LN2 = np.log(2.0)
REGULARIZE = 1e-12
LOG_FLOOR = 1e-300
MAX_ITER = 5000


@dataclass(frozen=True)
class ChannelOp:
    """Channel rho -> Tr_env V rho V^dagger, rows of V ordered (out, env)."""

    V: np.ndarray
    din: int
    dout: int
    denv: int

    def __post_init__(self):
        v = np.asarray(self.V, dtype=complex)
        if v.shape != (self.dout * self.denv, self.din):
            raise ValueError(f"dilation shape {v.shape} != ({self.dout}*{self.denv}, {self.din})")
        dev = float(np.max(np.abs(adjoint(v) @ v - np.eye(self.din))))
        if dev > 1e-10:
            raise ValueError(f"dilation is not an isometry (deviation {dev:.3e})")
        object.__setattr__(self, "V", v)

    def _t(self) -> np.ndarray:
        return self.V.reshape(self.dout, self.denv, self.din)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        t = self._t()
        return np.einsum("oei,ij,pej->op", t, rho, t.conj())

    def complement(self, rho: np.ndarray) -> np.ndarray:
        t = self._t()
        return np.einsum("oei,ij,ofj->ef", t, rho, t.conj())

    def adjoint_apply(self, x: np.ndarray) -> np.ndarray:
        t = self._t()
        return np.einsum("oei,op,pej->ij", t.conj(), x, t)

    def adjoint_complement(self, y: np.ndarray) -> np.ndarray:
        t = self._t()
        return np.einsum("oei,ef,ofj->ij", t.conj(), y, t)

    def choi(self) -> np.ndarray:
        """sum_ij |i><j| (x) N(|i><j|), shape (din*dout, din*dout)."""
        t = self._t()
        c = np.einsum("oei,pej->iojp", t, t.conj())
        return c.reshape(self.din * self.dout, self.din * self.dout)

    def compressed(self) -> "ChannelOp":
        """Equivalent dilation whose environment has the Choi rank.

        The complementary channel changes only by an isometry on the
        environment, so every entropy used by the solver is unchanged.
        """
        eig = hermitian_eigensystem(self.choi(), 1e-9)
        keep = eig.eigenvalues > 1e-14
        mu = eig.eigenvalues[keep]
        vecs = eig.eigenvectors[:, keep]
        r = mu.size
        if r >= self.denv:
            return self
        # Kraus K_k[o, i] = sqrt(mu_k) * vec_k[i, o]
        kraus = (vecs * np.sqrt(mu)).reshape(self.din, self.dout, r).transpose(1, 2, 0)
        v = kraus.reshape(self.dout * r, self.din)
        # absorb the tiny trace defect from discarded eigenvalues
        g = adjoint(v) @ v
        ge = hermitian_eigensystem(g)
        v = v @ (ge.eigenvectors * ge.eigenvalues ** -0.5) @ adjoint(ge.eigenvectors)
        return ChannelOp(v, self.din, self.dout, r)


def channel_from_isometry(iso, d1: int, d2: int, keep: int = 0) -> ChannelOp:
    """Channel keeping factor ``keep`` (0 or 1) of an isometry into d1 (x) d2."""
    iso = np.asarray(iso, dtype=complex)
    if keep == 0:
        return ChannelOp(iso, iso.shape[1], d1, d2)
    t = iso.reshape(d1, d2, -1).transpose(1, 0, 2).reshape(d1 * d2, -1)
    return ChannelOp(t, iso.shape[1], d2, d1)


def identity_channel(d: int) -> ChannelOp:
    return ChannelOp(np.eye(d, dtype=complex), d, d, 1)


def replacement_channel(d: int, state=None) -> ChannelOp:
    """Trace-and-replace: discard the input, output a fixed pure state."""
    out = np.zeros(d, dtype=complex) if state is None else np.asarray(state, dtype=complex)
    if state is None:
        out[0] = 1.0
    v = np.kron(out.reshape(-1, 1), np.eye(d, dtype=complex))
    return ChannelOp(v, d, out.size, d)


def random_channel(din: int, dout: int, denv: int, seed) -> ChannelOp:
    return ChannelOp(haar_random_isometry(din, dout * denv, seed), din, dout, denv)


def _side_index(side: str) -> int:
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return 0 if side == "A" else 1


def embedding_channel(emb, side: str) -> ChannelOp:
    """rho -> Tr_{other side} M_i rho M_i^dagger."""
    return channel_from_isometry(emb.isometry, emb.dA, emb.dB, _side_index(side))


def masker_channel(m: Masker, side: str) -> ChannelOp:
    """rho -> Tr_{other side} Phi_M(rho), dilated through the safe-state spectrum."""
    keep = _side_index(side)
    blocks = []
    for emb in decompose_embeddings(m):
        ch = embedding_channel(emb, side)
        blocks.append(np.sqrt(emb.probability) * ch.V.reshape(ch.dout, ch.denv, ch.din))
    t = np.concatenate(blocks, axis=1)
    dout = m.dA if keep == 0 else m.dB
    # sum of p_k over kept embeddings is 1 only up to the dropped tiny branches
    v = t.reshape(dout * t.shape[1], m.dI)
    g = adjoint(v) @ v
    ge = hermitian_eigensystem(g)
    v = v @ (ge.eigenvectors * ge.eigenvalues ** -0.5) @ adjoint(ge.eigenvectors)
    return ChannelOp(v, m.dI, dout, t.shape[1])


# ---------------------------------------------------------------- solver

def _spectral(mat: np.ndarray):
    eig = hermitian_eigensystem(0.5 * (mat + adjoint(mat)), 1e-8)
    return np.clip(eig.eigenvalues, 0.0, None), eig.eigenvectors


def _entropy_and_log(mat: np.ndarray) -> tuple[float, np.ndarray]:
    """Entropy in bits and the natural matrix logarithm (eigenvalues floored)."""
    lam, v = _spectral(mat)
    pos = lam[lam > 1e-300]
    s = 0.0 - float(np.sum(pos * np.log2(pos)))
    log = (v * np.log(np.maximum(lam, LOG_FLOOR))) @ adjoint(v)
    return s, log


def _entropy(mat: np.ndarray) -> float:
    lam, _ = _spectral(mat)
    lam = lam[lam > 1e-300]
    return 0.0 - float(np.sum(lam * np.log2(lam)))


def mutual_information_objective(ch: ChannelOp, rho: np.ndarray) -> float:
    """S(rho) + S(N(rho)) - S(N^c(rho)) in bits."""
    return _entropy(rho) + _entropy(ch.apply(rho)) - _entropy(ch.complement(rho))


def _regularize(rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    return (1.0 - REGULARIZE) * rho + REGULARIZE * np.eye(d) / d


def _value_and_gradient(ch: ChannelOp, rho: np.ndarray):
    """Objective (bits) and its gradient in natural-log units, modulo identity."""
    r = _regularize(rho)
    s0, log0 = _entropy_and_log(r)
    s1, log1 = _entropy_and_log(ch.apply(r))
    s2, log2 = _entropy_and_log(ch.complement(r))
    grad = -log0 - ch.adjoint_apply(log1) + ch.adjoint_complement(log2)
    return s0 + s1 - s2, 0.5 * (grad + adjoint(grad)), log0


def _exp_normalized(h: np.ndarray) -> np.ndarray:
    eig = hermitian_eigensystem(0.5 * (h + adjoint(h)), 1e-8)
    lam, v = eig.eigenvalues, eig.eigenvectors
    w = np.exp(lam - lam.max())
    w = w / w.sum()
    out = (v * w) @ adjoint(v)
    return 0.5 * (out + adjoint(out))


@dataclass(frozen=True)
class CapacityResult:
    value: float
    rho: DensityMatrix
    iterations: int
    residual: float  # duality gap lambda_max(grad) - <grad>_rho, in bits
    converged: bool
    method: str = "ascent"
    history: tuple[float, ...] = field(default=(), repr=False)


def cea_capacity(ch: ChannelOp, tol: float = 1e-6, max_iter: int = MAX_ITER,
                 rho0=None) -> CapacityResult:
    """Entanglement-assisted classical capacity in bits.

    Stops when successive objective values differ by less than ``tol``.  On
    hitting ``max_iter`` the best iterate is returned with ``converged=False``.
    """
    ch = ch.compressed()
    d = ch.din
    rho = np.eye(d, dtype=complex) / d if rho0 is None else np.asarray(rho0, dtype=complex)
    value, grad, log0 = _value_and_gradient(ch, rho)
    history = [value]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        while True:
            trial = _exp_normalized(log0 + step * grad)
            t_value, t_grad, t_log = _value_and_gradient(ch, trial)
            if t_value >= value - 1e-12 or step < 1e-10:
                break
            step *= 0.5
        if t_value < value - 1e-12:
            converged = True  # no ascent direction left at machine precision
            break
        delta = t_value - value
        rho, value, grad, log0 = trial, t_value, t_grad, t_log
        history.append(value)
        step = min(step * 2.0, 64.0)
        if delta < tol:
            converged = True
            break
    lam = hermitian_eigensystem(grad, 1e-8).eigenvalues
    gap = float((lam[0] - np.real(np.trace(_regularize(rho) @ grad))) / LN2)
    rho_dm = DensityMatrix(0.5 * (rho + adjoint(rho)), (d,), ("in",))
    return CapacityResult(value, rho_dm, it, max(gap, 0.0), converged, "ascent", tuple(history))


def sampled_capacity(ch: ChannelOp, samples: int, seed) -> float:
    """Brute-force maximum of the objective over seeded random input states.

    Inputs are marginals of Haar-random pure states on in (x) in.  Uses
    numpy's batched LAPACK eigensolver, independent of the ascent path.
    """
    rng = np.random.default_rng(seed)
    d = ch.din
    t = ch._t()
    best = -np.inf
    chunk = 2000
    for start in range(0, samples, chunk):
        n = min(chunk, samples - start)
        z = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
        z /= np.linalg.norm(z.reshape(n, -1), axis=1)[:, None, None]
        rho = z @ np.conj(np.swapaxes(z, 1, 2))
        out = np.einsum("oei,nij,pej->nop", t, rho, t.conj())
        env = np.einsum("oei,nij,ofj->nef", t, rho, t.conj())

        def ent(batch):
            lam = np.clip(np.linalg.eigvalsh(batch), 1e-300, None)
            return -np.sum(np.where(lam > 1e-15, lam * np.log2(lam), 0.0), axis=1)

        vals = ent(rho) + ent(out) - ent(env)
        best = max(best, float(vals.max()))
    return best


# ---------------------------------------------------------------- masker-level

def erasure_capacity(m: Masker, side: str = "A", tol: float = 1e-6) -> float:
    """C_EA of rho -> Tr_{other} Phi_M(rho); zero for exact universal maskers."""
    return cea_capacity(masker_channel(m, side), tol).value


@dataclass(frozen=True)
class Theorem2Row:
    name: str
    side: str
    p: float
    capacity: float
    e: float
    bound: float  # -log2 p
    slack_tol: float

    @property
    def slack(self) -> float:
        return self.bound - (self.capacity - self.e)

    @property
    def ok(self) -> bool:
        return self.capacity - self.e <= self.bound + self.slack_tol

    @property
    def saturated(self) -> bool:
        return abs(self.slack) <= self.slack_tol

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "side": self.side,
            "p": self.p,
            "C_EA": self.capacity,
            "e": self.e,
            "minus_log_p": self.bound,
            "slack": self.slack,
            "ok": self.ok,
            "saturated": self.saturated,
        }


def theorem2_check(m: Masker, tol: float = 1e-6, sides=("A", "B"),
                   slack_tol: float = 1e-3) -> list[Theorem2Row]:
    """C_EA(N_i^X) - e_X <= -log2 p_i for every embedding i and side X."""
    embeddings = decompose_embeddings(m)
    rows = []
    for side in sides:
        e = erasure_capacity(m, side, tol)
        cache: dict[bytes, float] = {}
        for emb in embeddings:
            ch = embedding_channel(emb, side)
            key = np.round(ch.choi(), 12).tobytes()
            if key not in cache:
                cache[key] = cea_capacity(ch, tol).value
            rows.append(Theorem2Row(emb.name, side, emb.probability, cache[key], e,
                                    float(-np.log2(emb.probability)), slack_tol))
    return rows


@dataclass(frozen=True)
class RobustBounds:
    e: float
    theorem1: float
    theorem3: float
    min_embedding: float
    I1: float
    subset: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "e": self.e,
            "theorem1": self.theorem1,
            "theorem3": self.theorem3,
            "min_embedding": self.min_embedding,
            "I1": self.I1,
            "subset": list(self.subset),
        }


def robust_bounds(profile: FlowProfile, e: float) -> RobustBounds:
    """Bounds with every flow I_i lowered to max(I_i - e, 0).

    The entropy-asymmetry bound keeps its log2 d floor and lowers the excess
    |S(A)_i - S(B)_i| = I_i - log2 d instead.
    """
    if e < 0:
        raise ValueError("e must be nonnegative")
    p = profile.p
    adj = lambda x: np.maximum(x - e, 0.0)  # noqa: E731
    excess = adj(np.abs(profile.S_A - profile.S_B))
    sol = min_subset_entropy(adj(profile.I))
    return RobustBounds(
        e=e,
        theorem1=float(max(p @ adj(profile.I_RA), p @ adj(profile.I_RB))),
        theorem3=float(np.log2(profile.d) + p @ excess),
        min_embedding=float(np.min(adj(profile.I))),
        I1=sol.value,
        subset=sol.subset,
    )
