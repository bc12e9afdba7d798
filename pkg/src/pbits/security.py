"""ccq states, security and uniformity criteria, and the bounds relating them.

Every ``eps`` below is measured in the unnormalized trace norm and every
entropy is in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DensityMatrix,
    LayoutError,
    PureState,
    binary_entropy,
    fidelity,
    purify,
    relative_entropy,
    trace_norm,
    von_neumann_entropy,
)
from .states import max_entangled_matrix
from .twisting import key_blocks, split_key


@dataclass(frozen=True, eq=False)
class CcqEnsemble:
    """Outcome probabilities ``p[i, j]`` and Eve's normalized conditional states.

    Outcomes with ``p[i, j] <= tol`` carry no Eve state.
    """

    p: np.ndarray
    eve: dict[tuple[int, int], np.ndarray]
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"p must be a square d x d table, got shape {p.shape}")
        if abs(p.sum() - 1) > max(self.tol, 1e-12) * 10 or (p < -self.tol).any():
            raise ValueError(f"p must be a probability table, sums to {p.sum():.12g}")
        eve = {tuple(k): np.asarray(v, dtype=complex) for k, v in self.eve.items()}
        object.__setattr__(self, "eve", eve)
        missing = [o for o in self.outcomes() if o not in eve]
        if missing:
            raise ValueError(f"missing Eve states for outcomes {missing}")
        shapes = {eve[o].shape for o in self.outcomes()}
        if len(shapes) > 1:
            raise ValueError(f"Eve states have different shapes {sorted(shapes)}")

    @property
    def d(self) -> int:
        return self.p.shape[0]

    @property
    def eve_dim(self) -> int:
        return self.eve[self.outcomes()[0]].shape[0]

    def outcomes(self) -> list[tuple[int, int]]:
        d = self.p.shape[0]
        return [(i, j) for i in range(d) for j in range(d) if self.p[i, j] > self.tol]

    def rho_E(self) -> np.ndarray:
        return sum(self.p[o] * self.eve[o] for o in self.outcomes())

    def matrix(self) -> np.ndarray:
        """The full block-diagonal ccq density matrix on A, B, E."""
        d, e = self.d, self.eve_dim
        out = np.zeros((d * d * e, d * d * e), dtype=complex)
        for i, j in self.outcomes():
            a = (i * d + j) * e
            out[a : a + e, a : a + e] = self.p[i, j] * self.eve[(i, j)]
        return out


def ideal_ccq(d: int, rho_e: np.ndarray) -> CcqEnsemble:
    p = np.eye(d) / d
    return CcqEnsemble(p, {(i, i): np.asarray(rho_e, dtype=complex) for i in range(d)})


def ccq_from_pure(psi: PureState, env=None) -> CcqEnsemble:
    """Measure the key of a pure state and keep Eve's conditional states.

    The key is the leading A, B pair; ``env`` defaults to every subsystem
    whose label starts with ``E``; everything else is traced out.
    """
    layout = psi.layout
    d_a, d_b, _ = split_key(layout)
    if d_a != d_b:
        raise LayoutError("ccq extraction needs equal key dimensions")
    env_idx = layout.party_indices("E") if env is None else layout.indices(env)
    if not env_idx:
        raise LayoutError("pure state has no environment subsystem")
    shield_idx = [i for i in range(2, len(layout)) if i not in env_idx]
    t = psi.amplitudes.reshape(layout.dims).transpose([0, 1] + shield_idx + env_idx)
    de = math.prod(layout.dims[i] for i in env_idx)
    t = t.reshape(d_a, d_b, -1, de)
    p = np.einsum("ijse,ijse->ij", t, t.conj()).real
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    eve = {}
    for i in range(d_a):
        for j in range(d_b):
            if p[i, j] > psi.tol:
                m = t[i, j]
                r = m.T @ m.conj()
                eve[(i, j)] = r / np.trace(r).real
    return CcqEnsemble(p, eve, psi.tol)


def ccq_of(rho: DensityMatrix, purification: PureState | None = None) -> CcqEnsemble:
    psi = purify(rho) if purification is None else purification
    return ccq_from_pure(psi)


def security_norm(c: CcqEnsemble) -> float:
    """Average deviation sum_ij p_ij ||rho_E - rho_ij||."""
    r = c.rho_E()
    return float(sum(c.p[o] * trace_norm(r - c.eve[o]) for o in c.outcomes()))


def uniformity(c: CcqEnsemble) -> float:
    """l1 distance of the key distribution from the uniform diagonal one."""
    return float(np.abs(c.p - np.eye(c.d) / c.d).sum())


def joint_distance(c: CcqEnsemble) -> float:
    """||rho_ccq - rho_ideal|| with the ideal Eve state fixed to the average."""
    r, d = c.rho_E(), c.d
    support = set(c.outcomes())
    total = 0.0
    for i in range(d):
        for j in range(d):
            real = c.p[i, j] * c.eve[(i, j)] if (i, j) in support else np.zeros_like(r)
            total += trace_norm(real - r / d) if i == j else trace_norm(real)
    return float(total)


def max_deviation(c: CcqEnsemble) -> float:
    r = c.rho_E()
    return max(trace_norm(c.eve[o] - r) for o in c.outcomes())


def is_B_secure(c: CcqEnsemble, eps: float) -> bool:
    return max_deviation(c) <= eps


def has_B_key(c: CcqEnsemble, eps: float) -> bool:
    return is_B_secure(c, eps) and uniformity(c) <= eps


def holevo(c: CcqEnsemble) -> float:
    chi = von_neumann_entropy(c.rho_E(), c.tol) - sum(
        c.p[o] * von_neumann_entropy(c.eve[o], c.tol) for o in c.outcomes()
    )
    return max(0.0, float(chi))


def holevo_relative(c: CcqEnsemble) -> float:
    """Holevo quantity as the average relative entropy to the mean state."""
    r = c.rho_E()
    return float(sum(c.p[o] * relative_entropy(c.eve[o], r, c.tol) for o in c.outcomes()))


def average_fidelity(c: CcqEnsemble) -> float:
    r = c.rho_E()
    return float(sum(c.p[o] * fidelity(c.eve[o], r) for o in c.outcomes()))


def product_distance(c: CcqEnsemble) -> float:
    """||sum p_k |k><k| (x) rho_k - (sum p_k |k><k|) (x) rho||, block by block."""
    r = c.rho_E()
    return float(sum(trace_norm(c.p[o] * (c.eve[o] - r)) for o in c.outcomes()))


def _h_ext(x: float) -> float:
    """Binary entropy, extended by 0 beyond 1 (only used inside max(h, 2x))."""
    return binary_entropy(x) if x <= 1 else 0.0


def _h_up(x: float) -> float:
    """Smallest nondecreasing majorant of the binary entropy."""
    return binary_entropy(x) if x <= 0.5 else 1.0


@dataclass(frozen=True)
class Implication:
    """One ``premise <= eps  =>  lhs <= rhs`` check, evaluated at the tightest eps.

    ``kind`` is ``"proof"`` when the constant follows from the argument as
    written, ``"printed"`` when it is the constant in the displayed claim,
    and ``"resolved"`` for the bits-base Pinsker constant.
    """

    name: str
    kind: str
    eps: float
    lhs: float
    rhs: float
    applicable: bool
    tol: float = 1e-10

    @property
    def satisfied(self) -> bool:
        return (not self.applicable) or self.lhs <= self.rhs + self.tol

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class CriteriaReport:
    implications: list[Implication] = field(default_factory=list)

    def by_name(self, name: str) -> Implication:
        for imp in self.implications:
            if imp.name == name:
                return imp
        raise KeyError(name)

    def violations(self, kinds=("proof", "resolved")) -> list[Implication]:
        return [i for i in self.implications if i.kind in kinds and not i.satisfied]

    def all_hold(self, kinds=("proof", "resolved")) -> bool:
        return not self.violations(kinds)


def criteria_bounds(c: CcqEnsemble, tol: float = 1e-10) -> CriteriaReport:
    chi = holevo(c)
    unif = uniformity(c)
    joint = joint_distance(c)
    avg_norm = security_norm(c)
    prod_norm = product_distance(c)
    avg_fid = average_fidelity(c)
    log_d = math.log2(c.d)
    log_e = math.log2(c.eve_dim) if c.eve_dim > 1 else 0.0
    out: list[Implication] = []

    def add(name, kind, eps, lhs, rhs, applicable=True):
        out.append(Implication(name, kind, float(eps), float(lhs), float(rhs) if applicable else math.nan, applicable, tol))

    # uniformity and Holevo together bound the joint distance
    e1 = max(unif, chi)
    add("joint_from_unif_holevo.printed", "printed", e1, joint, e1 + math.sqrt(e1))
    add("joint_from_unif_holevo.proof", "proof", e1, joint, e1 + math.sqrt(2 * e1))

    # the joint distance bounds uniformity and Holevo
    e2 = joint
    add("unif_from_joint", "proof", e2, unif, e2)
    add("holevo_from_joint.printed", "printed", e2, chi, 4 * e2 * log_d + binary_entropy(e2) if e2 <= 1 else 0, e2 <= 1)
    s = 2 * math.sqrt(e2)
    add("holevo_from_joint.proof_text", "printed", e2, chi, 4 * math.sqrt(e2) * log_d + binary_entropy(s) if s <= 1 else 0, s <= 1)
    # Fannes on the d^2-dimensional key system, as the proof chain needs
    add("holevo_from_joint.proof", "proof", e2, chi, 8 * math.sqrt(e2) * log_d + _h_up(s) if s <= 1 else 0, s <= 1)

    # product distance, average fidelity and average norm
    e3 = prod_norm
    add("fidelity_from_product", "proof", e3, 1 - avg_fid, e3 / 2, e3 <= 0.5)
    e4 = max(0.0, 1 - avg_fid)
    add("norm_from_fidelity.printed", "printed", e4, avg_norm, 8 * e4, e4 <= 0.5)
    add("norm_from_fidelity.proof", "proof", e4, avg_norm, 2 * math.sqrt(max(0.0, 2 * e4 - e4 * e4)), e4 <= 0.5)
    e5 = avg_norm
    add("product_from_norm", "proof", e5, prod_norm, e5, e5 <= 0.5)

    # Holevo versus average norm
    e6 = chi
    add("norm_from_holevo", "proof", e6, avg_norm, math.sqrt(2 * e6))
    add("norm_from_holevo.bits", "resolved", e6, avg_norm, math.sqrt(2 * math.log(2) * e6))
    e7 = avg_norm
    add("holevo_from_norm", "proof", e7, chi, 3 * e7 * log_e + max(_h_ext(e7), 2 * e7))
    add("product_from_holevo", "proof", e6, prod_norm, math.sqrt(2 * e6))
    return CriteriaReport(out)


def block_norm_key_quality(rho: DensityMatrix) -> float:
    d_a, d_b, _ = split_key(rho.layout)
    if (d_a, d_b) != (2, 2):
        raise LayoutError("block norm needs a two-qubit key")
    return trace_norm(key_blocks(rho)[0, 0, 1, 1])


def delta_of_eps(eps: float) -> float:
    if not 0 < eps < 1 / 8:
        raise ValueError(f"delta(eps) is defined for 0 < eps < 1/8, got {eps}")
    r = math.sqrt(2 * eps)
    return 2 * math.sqrt(8 * r + binary_entropy(2 * r)) + 2 * r


@dataclass(frozen=True)
class CoherenceReport:
    overlap: float
    coherence: float
    fidelity_implies_coherence: bool
    coherence_implies_fidelity: bool


def coherence_overlap_bounds(rho: DensityMatrix, tol: float = 1e-12) -> CoherenceReport:
    """Singlet overlap versus the real part of the |00><11| coherence.

    Both implications are checked at the tightest admissible eps, where the
    strict inequality of the first one becomes non-strict.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if m.shape != (4, 4):
        raise LayoutError("coherence bounds need a two-qubit state")
    overlap = float(np.trace(m @ max_entangled_matrix(2)).real)
    coh = float(m[0, 3].real)
    eps1 = 1 - overlap
    first = coh >= 0.5 - eps1 - tol
    eps2 = 0.5 - coh
    second = overlap >= 1 - 2 * eps2 - tol
    return CoherenceReport(overlap, coh, bool(first), bool(second))


@dataclass(frozen=True)
class EveBlockReport:
    pairs: list[tuple[tuple[int, int], tuple[int, int], float, float]]

    @property
    def max_discrepancy(self) -> float:
        return max(abs(a - b) for _, _, a, b in self.pairs)

    def get(self, a, b) -> tuple[float, float]:
        for x, y, n, f in self.pairs:
            if x == tuple(a) and y == tuple(b):
                return n, f
        raise KeyError((a, b))


def eve_block_representation(rho: DensityMatrix) -> EveBlockReport:
    """Pairs (||A_ij,kl||, sqrt(p_ij p_kl) F(rho_E^ij, rho_E^kl)) over all key labels."""
    c = ccq_of(rho)
    blocks = key_blocks(rho)
    d_a, d_b = blocks.shape[0], blocks.shape[1]
    labels = [(i, j) for i in range(d_a) for j in range(d_b)]
    pairs = []
    for a in labels:
        for b in labels:
            n = trace_norm(blocks[a[0], a[1], b[0], b[1]])
            if a in c.eve and b in c.eve:
                f = math.sqrt(c.p[a] * c.p[b]) * fidelity(c.eve[a], c.eve[b])
            else:
                f = 0.0
            pairs.append((a, b, n, f))
    return EveBlockReport(pairs)
