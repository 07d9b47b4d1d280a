"""Constructors for the concrete maskers used throughout the package."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .masker import BipartiteEmbedding, Masker
from .numkernel import adjoint, hermitian_eigensystem
from .states import DensityMatrix


def shift(d: int) -> np.ndarray:
    """Cyclic shift X|k> = |k+1 mod d>."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock(d: int) -> np.ndarray:
    """Clock matrix Z|k> = exp(2 pi i k / d)|k>."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def ket(d: int, k: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


def _data_on_a(op: np.ndarray, dA: int, flag: np.ndarray) -> np.ndarray:
    """Isometry |psi> -> (op|psi> padded into A) (x) |flag>_B."""
    d = op.shape[1]
    padded = np.zeros((dA, d), dtype=complex)
    padded[: op.shape[0]] = op
    return np.kron(padded, flag.reshape(-1, 1))


def _data_on_b(op: np.ndarray, dB: int, flag: np.ndarray) -> np.ndarray:
    d = op.shape[1]
    padded = np.zeros((dB, d), dtype=complex)
    padded[: op.shape[0]] = op
    return np.kron(flag.reshape(-1, 1), padded)


def qotp_embeddings(d: int) -> list[BipartiteEmbedding]:
    x, z = shift(d), clock(d)
    out = []
    for a in range(d):
        for b in range(d):
            op = np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
            iso = _data_on_a(op, d, ket(d * d, a * d + b))
            out.append(BipartiteEmbedding(iso, 1.0 / d**2, d, d * d, name=f"{a}{b}"))
    return out


def build_qotp(d: int) -> Masker:
    """Quantum one-time pad: X^a Z^b on A with the key (a, b) written to B."""
    if d < 2:
        raise ValueError("QOTP needs d >= 2")
    return Masker.from_embeddings(qotp_embeddings(d), d, d * d)


def build_coinflip_otp(d: int) -> Masker:
    """Fair coin decides whether the one-time pad lands in A or in B.

    Each side has d data levels followed by d^2 flag levels.
    """
    if d < 2:
        raise ValueError("coin-flip OTP needs d >= 2")
    x, z = shift(d), clock(d)
    dim = d + d * d
    p = 1.0 / (2 * d * d)
    to_a, to_b = [], []
    for a in range(d):
        for b in range(d):
            op = np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
            flag = ket(dim, d + a * d + b)
            to_a.append(BipartiteEmbedding(_data_on_a(op, dim, flag), p, dim, dim, f"A{a}{b}"))
            to_b.append(BipartiteEmbedding(_data_on_b(op, dim, flag), p, dim, dim, f"B{a}{b}"))
    return Masker.from_embeddings(to_a + to_b, dim, dim)


def odd_d_embeddings(d: int) -> list[BipartiteEmbedding]:
    """Embeddings of the odd-dimension family.

    Data lives on levels 0..d-1 of A and B, flags on d..2d-1.  Uneven
    embeddings send Z^i|psi> to one side with flag i on the other; even ones
    send |i> to |i+j>_A |i+2j>_B.
    """
    dim = 2 * d
    z = clock(d)
    uneven_p = 1.0 / (d * (d + 1))
    even_p = 1.0 / (d + 1)
    to_a, to_b, even = [], [], []
    for i in range(d):
        op = np.linalg.matrix_power(z, i)
        flag = ket(dim, d + i)
        to_a.append(BipartiteEmbedding(_data_on_a(op, dim, flag), uneven_p, dim, dim, f"A{i}"))
        to_b.append(BipartiteEmbedding(_data_on_b(op, dim, flag), uneven_p, dim, dim, f"B{i}"))
    for j in range(1, d):
        iso = np.zeros((dim * dim, d), dtype=complex)
        for i in range(d):
            iso[((i + j) % d) * dim + (i + 2 * j) % d, i] = 1.0
        even.append(BipartiteEmbedding(iso, even_p, dim, dim, f"E{j}"))
    return to_a + to_b + even


def build_odd_d(d: int) -> Masker:
    if d < 3 or d % 2 == 0:
        raise ValueError("odd-d masker needs an odd d >= 3")
    return Masker.from_embeddings(odd_d_embeddings(d), 2 * d, 2 * d)


def build_distribution_masker(d: int) -> Masker:
    """Hand one qudit of a d^2-dimensional input to each party; no randomness."""
    if d < 2:
        raise ValueError("distribution masker needs d >= 2")
    sigma = DensityMatrix(np.ones((1, 1), dtype=complex), (1,), ("S",))
    return Masker(np.eye(d * d, dtype=complex), sigma, d * d, 1, d, d)


def build_identity(d: int) -> Masker:
    """A keeps the input untouched, B is trivial.  Not a masker at all."""
    if d < 2:
        raise ValueError("identity embedding needs d >= 2")
    sigma = DensityMatrix(np.ones((1, 1), dtype=complex), (1,), ("S",))
    return Masker(np.eye(d, dtype=complex), sigma, d, 1, d, 1)


def random_hermitian(n: int, seed) -> np.ndarray:
    """Seeded random Hermitian matrix with spectral norm 1."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (g + adjoint(g))
    return h / np.max(np.abs(hermitian_eigensystem(h).eigenvalues))


def perturb(m: Masker, eps: float, seed=0) -> Masker:
    """Compose the isometry with exp(i eps H) on the output space."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if eps == 0.0:
        return m
    n = m.dA * m.dB
    eig = hermitian_eigensystem(random_hermitian(n, seed))
    v = eig.eigenvectors
    u = (v * np.exp(1j * eps * eig.eigenvalues)) @ adjoint(v)
    return Masker(u @ m.isometry, m.safe_state, m.dI, m.dS, m.dA, m.dB)


def odd_d_cost(d: int) -> float:
    return float(np.log2(d + 1) + 2.0 / (d + 1) * np.log2(d))


@dataclass(frozen=True)
class ZooEntry:
    name: str
    d: int
    masker: Masker
    expected_R: float
    expected_universal: bool
    eps: float = 0.0
    notes: dict = field(default_factory=dict)


BUILDERS = {
    "qotp": build_qotp,
    "coinflip": build_coinflip_otp,
    "odd_d": build_odd_d,
    "distribution": build_distribution_masker,
    "identity": build_identity,
}


def expected_cost(name: str, d: int) -> float:
    return {
        "qotp": lambda: 2 * np.log2(d),
        "coinflip": lambda: 2 * np.log2(d) + 1,
        "odd_d": lambda: odd_d_cost(d),
        "distribution": lambda: 0.0,
        "identity": lambda: 0.0,
    }[name]()


def entry(name: str, d: int, eps: float = 0.0, seed=0) -> ZooEntry:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown zoo masker {name!r}; choose from {sorted(BUILDERS)}") from None
    m = builder(d)
    if eps:
        m = perturb(m, eps, seed)
    universal = name in ("qotp", "coinflip", "odd_d") and eps == 0.0
    return ZooEntry(name, d, m, float(expected_cost(name, d)), universal, eps)


def build(name: str, d: int, eps: float = 0.0, seed=0) -> Masker:
    return entry(name, d, eps, seed).masker


def universal_entries(max_d: int = 5) -> list[ZooEntry]:
    """Every exact universal zoo masker with d <= max_d."""
    out = []
    for d in range(2, max_d + 1):
        out.append(entry("qotp", d))
        out.append(entry("coinflip", d))
        if d % 2 == 1:
            out.append(entry("odd_d", d))
    return out
