"""Entropic lower bounds on the randomness cost of a masker.

Every bound here is computed from a :class:`FlowProfile`: the entropies and
mutual informations produced by each bipartite embedding acting on half of a
probe state |Gamma>_RI.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .masker import BipartiteEmbedding
from .numkernel import adjoint
from .states import (
    DensityMatrix,
    PureState,
    haar_random_unitary,
    maximally_entangled,
    von_neumann_entropy,
)

ENTROPY_TOL = 1e-9
EXACT_LIMIT = 24
GROUP_TOL = 1e-9


@dataclass(frozen=True)
class FlowProfile:
    p: np.ndarray
    S_A: np.ndarray
    S_B: np.ndarray
    I_RA: np.ndarray
    I_RB: np.ndarray
    S_R: float
    d: int
    gamma: PureState
    names: tuple = ()

    @property
    def I(self) -> np.ndarray:
        return np.maximum(self.I_RA, self.I_RB)

    def __len__(self) -> int:
        return self.p.size

    def rows(self) -> list[dict]:
        return [
            {
                "name": self.names[i] if self.names else str(i),
                "p": float(self.p[i]),
                "S_A": float(self.S_A[i]),
                "S_B": float(self.S_B[i]),
                "I_RA": float(self.I_RA[i]),
                "I_RB": float(self.I_RB[i]),
                "I": float(self.I[i]),
            }
            for i in range(len(self))
        ]


def _output_state(m: BipartiteEmbedding, gamma: PureState) -> np.ndarray:
    dR, dI = gamma.dims
    if dI != m.dI:
        raise ValueError(f"probe has I-dimension {dI}, embedding expects {m.dI}")
    g = gamma.vector.reshape(dR, dI)
    return (g @ m.isometry.T).reshape(dR, m.dA, m.dB)


def _entropy_of(mat: np.ndarray) -> float:
    return von_neumann_entropy(DensityMatrix(mat, (mat.shape[0],), ("X",)))


def _pure_entropies(psi: np.ndarray) -> tuple[float, float, float]:
    """S(R), S(A), S(B) of a pure state with amplitudes psi[r, a, b]."""
    dR, dA, dB = psi.shape
    rho_r = np.einsum("rab,sab->rs", psi, psi.conj())
    rho_a = np.einsum("rab,rcb->ac", psi, psi.conj())
    rho_b = np.einsum("rab,rac->bc", psi, psi.conj())
    if dR * dB < dA:
        flat = psi.transpose(0, 2, 1).reshape(dR * dB, dA)
        s_a = _entropy_of(flat @ adjoint(flat))
    else:
        s_a = _entropy_of(rho_a)
    if dR * dA < dB:
        flat = psi.reshape(dR * dA, dB)
        s_b = _entropy_of(flat @ adjoint(flat))
    else:
        s_b = _entropy_of(rho_b)
    return _entropy_of(rho_r), s_a, s_b


def flow_profile(embeddings, gamma: PureState | None = None) -> FlowProfile:
    """Per-embedding entropies at the probe |Gamma>_RI (maximally entangled by default)."""
    embeddings = list(embeddings)
    if gamma is None:
        gamma = maximally_entangled(embeddings[0].dI)
    s_r = None
    rows = []
    for m in embeddings:
        sr, sa, sb = _pure_entropies(_output_state(m, gamma))
        s_r = sr if s_r is None else s_r
        # pure RAB: S(RA) = S(B), S(RB) = S(A)
        rows.append((m.probability, sa, sb, sr + sa - sb, sr + sb - sa))
    arr = np.array(rows, dtype=float)
    return FlowProfile(
        p=arr[:, 0],
        S_A=arr[:, 1],
        S_B=arr[:, 2],
        I_RA=arr[:, 3],
        I_RB=arr[:, 4],
        S_R=float(s_r),
        d=embeddings[0].dI,
        gamma=gamma,
        names=tuple(m.name for m in embeddings),
    )


def theorem1_bound(profile: FlowProfile) -> float:
    """max over X in {A, B} of the average information flow sum_i p_i I(R:X)_i."""
    return float(max(profile.p @ profile.I_RA, profile.p @ profile.I_RB))


def theorem3_bound(profile: FlowProfile) -> float:
    """log2 d + sum_i p_i |S(A)_i - S(B)_i|."""
    return float(np.log2(profile.d) + profile.p @ np.abs(profile.S_A - profile.S_B))


def min_embedding_bound(profile: FlowProfile) -> float:
    return float(np.min(profile.I))


def max_embedding_flow(profile: FlowProfile) -> float:
    """Largest single-embedding flow.  Not a lower bound on the cost in general."""
    return float(np.max(profile.I))


# ---------------------------------------------------------------- subset search

@dataclass(frozen=True)
class SubsetSolution:
    value: float
    subset: tuple[int, ...]
    method: str


def _weights(I_values) -> tuple[np.ndarray, np.ndarray]:
    I = np.maximum(np.asarray(I_values, dtype=float), 0.0)
    return I, np.exp2(-I)


def subset_is_admissible(I_values, subset, tol: float = ENTROPY_TOL) -> bool:
    """sum_S 2^-I_i >= 1 and removing some i0 in S leaves at most 1."""
    _, w = _weights(I_values)
    subset = list(subset)
    if not subset:
        return False
    total = float(np.sum(w[subset]))
    return total >= 1.0 - tol and total - float(np.max(w[subset])) <= 1.0 + tol


def formal_entropy(I_values, subset) -> float:
    """H({2^-I_i}_{i in S}) = sum_S 2^-I_i * I_i."""
    I, w = _weights(I_values)
    subset = list(subset)
    return float(np.sum(w[subset] * I[subset]))


def _check_total(w: np.ndarray, tol: float) -> None:
    if float(np.sum(w)) < 1.0 - tol:
        raise ValueError(
            f"no admissible subset: sum of 2^-I_i is {np.sum(w):.6g} < 1 "
            "(malformed decomposition)"
        )


def greedy_subset(I_values, tol: float = ENTROPY_TOL) -> SubsetSolution:
    """Take indices in ascending I_i (ties by index) until the weights reach 1."""
    I, w = _weights(I_values)
    _check_total(w, tol)
    order = sorted(range(I.size), key=lambda i: (I[i], i))
    chosen, total = [], 0.0
    for i in order:
        chosen.append(i)
        total += w[i]
        if total >= 1.0 - tol:
            break
    return SubsetSolution(formal_entropy(I, chosen), tuple(sorted(chosen)), "greedy")


def exact_subset(I_values, tol: float = ENTROPY_TOL) -> SubsetSolution:
    """Branch and bound over subsets.

    Indices whose I_i agree within GROUP_TOL are interchangeable, so the
    search runs over how many members of each group to take.  A branch stops
    as soon as its weights reach 1: supersets only add nonnegative terms, and
    groups are visited by descending weight so the removable element of a
    feasible set is always its first member.
    """
    I, w = _weights(I_values)
    _check_total(w, tol)
    order = sorted(range(I.size), key=lambda i: (I[i], i))
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(I[i] - I[groups[-1][0]]) <= GROUP_TOL:
            groups[-1].append(i)
        else:
            groups.append([i])
    gw = [w[g] for g in groups]
    gc = [w[g] * I[g] for g in groups]
    suffix_weight = np.concatenate([np.cumsum([x.sum() for x in gw][::-1])[::-1], [0.0]])

    best = [np.inf, ()]

    def visit(g: int, total: float, cost: float, wmax: float, picked: list[int]) -> None:
        if total >= 1.0 - tol:
            if total - wmax <= 1.0 + tol and cost < best[0] - 1e-15:
                best[0], best[1] = cost, tuple(picked)
            return
        if g == len(groups) or total + suffix_weight[g] < 1.0 - tol:
            return
        # every further unit of weight costs at least the smallest remaining I
        if cost + (1.0 - total) * I[groups[g][0]] >= best[0] - 1e-15:
            return
        members = groups[g]
        t, c = total, cost
        for k in range(1, len(members) + 1):
            t += gw[g][k - 1]
            c += gc[g][k - 1]
            visit(g + 1, t, c, wmax if picked else gw[g][0], picked + members[:k])
            if t >= 1.0 - tol:
                break
        visit(g + 1, total, cost, wmax, picked)

    visit(0, 0.0, 0.0, 0.0, [])
    if not best[1]:
        raise ValueError("no admissible subset found")
    return SubsetSolution(float(best[0]), tuple(sorted(best[1])), "exact-subset")


def min_subset_entropy(I_values, method: str = "auto") -> SubsetSolution:
    n = len(I_values)
    if method == "auto":
        method = "exact" if n <= EXACT_LIMIT else "greedy"
    if method == "exact":
        return exact_subset(I_values)
    if method == "greedy":
        return greedy_subset(I_values)
    raise ValueError(f"unknown subset method {method!r}")


# ---------------------------------------------------------------- unevenness

@dataclass(frozen=True)
class UnevennessResult:
    value: float
    chosen_subset: tuple[int, ...]
    input_state_descriptor: str
    method: str
    gamma_search: str
    I_values: np.ndarray = field(repr=False)
    maxent_value: float = float("nan")

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "subset": list(self.chosen_subset),
            "input_state": self.input_state_descriptor,
            "method": self.method,
            "gamma_search": self.gamma_search,
            "maxent_value": self.maxent_value,
        }


def schmidt_probe(coeffs, unitary: np.ndarray) -> PureState:
    """sum_k sqrt(lam_k) |k>_R (x) U|k>_I."""
    lam = np.asarray(coeffs, dtype=float)
    lam = lam / lam.sum()
    mat = np.diag(np.sqrt(lam)).astype(complex) @ unitary.T
    return PureState(mat.ravel(), (lam.size, lam.size), ("R", "I"))


def _I1_at(embeddings, gamma, method) -> tuple[SubsetSolution, np.ndarray]:
    prof = flow_profile(embeddings, gamma)
    return min_subset_entropy(prof.I, method), prof.I


def unevenness_I1(
    embeddings,
    gamma: str = "maxent",
    method: str = "auto",
    seed: int = 42,
    restarts: int = 20,
    maxiter: int = 500,
    xatol: float = 1e-7,
) -> UnevennessResult:
    """Unevenness measure: subset-minimized formal entropy of {2^-I_i}.

    ``gamma="maxent"`` evaluates at the maximally entangled probe.
    ``gamma="search"`` additionally maximizes over Schmidt coefficients with
    Nelder-Mead from seeded random local unitaries; the reported value is the
    best found, which is a certified lower bound on the true maximum.
    """
    embeddings = list(embeddings)
    d = embeddings[0].dI
    sol, I_vals = _I1_at(embeddings, maximally_entangled(d), method)
    maxent = sol.value
    if gamma == "maxent":
        return UnevennessResult(sol.value, sol.subset, "maxent", sol.method, "fixed", I_vals, maxent)
    if gamma != "search":
        raise ValueError(f"unknown gamma mode {gamma!r}")

    rng = np.random.default_rng(seed)
    best = (sol, I_vals, "maxent")
    for r in range(restarts):
        u = haar_random_unitary(d, rng)
        x0 = rng.normal(scale=0.5, size=d)

        def neg(x, u=u):
            coeffs = np.exp(x - np.max(x))
            s, _ = _I1_at(embeddings, schmidt_probe(coeffs, u), method)
            return -s.value

        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": xatol, "fatol": xatol})
        if -res.fun > best[0].value:
            coeffs = np.exp(res.x - np.max(res.x))
            s, iv = _I1_at(embeddings, schmidt_probe(coeffs, u), method)
            lam = coeffs / coeffs.sum()
            best = (s, iv, f"search restart {r}: schmidt={np.round(lam, 6).tolist()}")
    s, iv, desc = best
    return UnevennessResult(s.value, s.subset, desc, s.method, "optimized", iv, maxent)


def tensor_embeddings(embeddings, n: int) -> list[BipartiteEmbedding]:
    """n-fold tensor powers M_i (x) M_j (x) ... regrouped as (A...A)(B...B)."""
    out = list(embeddings)
    for _ in range(n - 1):
        nxt = []
        for e1 in out:
            for e2 in embeddings:
                iso = np.kron(e1.isometry, e2.isometry)
                t = iso.reshape(e1.dA, e1.dB, e2.dA, e2.dB, e1.dI * e2.dI)
                t = t.transpose(0, 2, 1, 3, 4).reshape(e1.dA * e2.dA * e1.dB * e2.dB, -1)
                nxt.append(BipartiteEmbedding(
                    t, e1.probability * e2.probability, e1.dA * e2.dA, e1.dB * e2.dB,
                    name=f"{e1.name}|{e2.name}",
                ))
        out = nxt
    return out


@dataclass(frozen=True)
class IinfEstimate:
    value: float
    n: int
    band: tuple[float, float]
    result: UnevennessResult

    @property
    def in_band(self) -> bool:
        lo, hi = self.band
        return lo - ENTROPY_TOL <= self.value <= hi + ENTROPY_TOL


def unevenness_Iinf_estimate(embeddings, n: int = 1, **kwargs) -> IinfEstimate:
    """(1/n) times the unevenness of the n-fold tensored family (n in {1, 2})."""
    if n not in (1, 2):
        raise ValueError("only n = 1 or n = 2 is supported")
    embeddings = list(embeddings)
    d = embeddings[0].dI
    res = unevenness_I1(tensor_embeddings(embeddings, n), **kwargs)
    band = (float(np.log2(d)), float(2 * np.log2(d)))
    return IinfEstimate(res.value / n, n, band, res)


# ---------------------------------------------------------------- misc checks

def conservation_check(isometry, gamma: PureState, dA: int, dB: int) -> float:
    """|2 S(R) - I(R:A) - I(R:B)| for (1 (x) V)|Gamma>.

    Every entropy comes from its own reduced density matrix, so the identity
    is tested rather than assumed.
    """
    v = np.asarray(isometry, dtype=complex)
    if v.shape[0] != dA * dB:
        raise ValueError(f"isometry has {v.shape[0]} rows, expected {dA}*{dB}")
    if np.max(np.abs(adjoint(v) @ v - np.eye(v.shape[1]))) > 1e-10:
        raise ValueError("input is not an isometry")
    emb = BipartiteEmbedding(v, 1.0, dA, dB)
    psi = _output_state(emb, gamma)
    dR = psi.shape[0]
    state = PureState(psi.ravel(), (dR, dA, dB), ("R", "A", "B"))
    s = {k: von_neumann_entropy(state.reduce(k)) for k in ("R", "A", "B", "RA", "RB")}
    i_ra = s["R"] + s["A"] - s["RA"]
    i_rb = s["R"] + s["B"] - s["RB"]
    return abs(2 * s["R"] - i_ra - i_rb)


def scrambling_consistency(I_inf_lower: float, c: float, S_T: float) -> bool:
    """True iff the information lower bound fits in the participating fraction c of S_T."""
    return I_inf_lower <= c * S_T
