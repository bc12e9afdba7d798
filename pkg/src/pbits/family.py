"""The PPT key family, its recurrence distillation, the NPT candidate and the
controlled private channel demo.

Family states carry a two-qubit key and ``k`` hiding factors, each a pair of
d-dimensional shield subsystems. Every single-copy block is a polynomial in
the per-factor projectors (P_sym, P_asym) and, after partial transposition,
(P+, P+_perp). That makes traces, trace norms and partial-transpose spectra
computable by enumerating joint eigenspaces, which is what the ``structured_``
functions do for parameters far beyond dense reach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_MAX_DIM,
    DEFAULT_TOL,
    DensityMatrix,
    LayoutError,
    SystemLayout,
    check_dim,
    fidelity,
    min_eigenvalue,
    partial_transpose,
    proj,
    ptrace_matrix,
    tensor,
    tensor_power,
)
from .states import (
    KEY2,
    bell_vectors,
    hiding_pair,
    key_block_matrix,
    max_entangled_matrix,
    relabel_shield,
    shield_layout,
)
from .twisting import key_blocks, split_key


@dataclass(frozen=True)
class FamilyParams:
    p: float
    d: int
    k: int
    m: int = 1

    def __post_init__(self):
        if not 0 < self.p <= 0.5:
            raise ValueError(f"p must lie in (0, 1/2], got {self.p}")
        if self.d < 2 or self.k < 1 or self.m < 1:
            raise ValueError(f"need d >= 2, k >= 1, m >= 1, got d={self.d}, k={self.k}, m={self.m}")

    @property
    def shield_dim(self) -> int:
        return self.d ** (2 * self.k * self.m)

    @property
    def total_dim(self) -> int:
        return 4 * self.shield_dim


def family_blocks(p: float, d: int, k: int, max_dim: int = DEFAULT_MAX_DIM):
    """Single-copy blocks (corner diagonal, corner off-diagonal, middle)."""
    FamilyParams(p, d, k)
    t1, t2 = hiding_pair(d, k, max_dim)
    t1, t2 = t1.matrix, t2.matrix
    return p * (t1 + t2) / 2, p * (t1 - t2) / 2, (0.5 - p) * t2


def _state_from_blocks(diag, off, mid, shield: SystemLayout, tol: float = DEFAULT_TOL) -> DensityMatrix:
    # off is Hermitian, so the lower-left corner equals the upper-right one
    blocks = {(0, 0): diag, (0, 3): off, (3, 0): off.conj().T, (3, 3): diag, (1, 1): mid, (2, 2): mid}
    return DensityMatrix(key_block_matrix(blocks, 4, shield.dim), KEY2 + shield, tol)


def family_state(p: float, d: int, k: int, max_dim: int = DEFAULT_MAX_DIM) -> DensityMatrix:
    check_dim(4 * d ** (2 * k), max_dim)
    diag, off, mid = family_blocks(p, d, k, max_dim)
    return _state_from_blocks(diag, off, mid, shield_layout([d] * k))


def ppt_condition(p: float, d: int, k: int) -> bool:
    """Analytic PPT test: p <= 1/3 and (1-p)/p >= (d/(d-1))^k."""
    FamilyParams(p, d, k)
    rel = 1e-12  # absorbs rounding at exact boundary points such as p = 1/3
    return p <= 1 / 3 * (1 + rel) and (1 - p) / p >= (d / (d - 1)) ** k * (1 - rel)


def recurrence_norm(p: float, m: int) -> float:
    """Probability that m copies survive m-1 rounds: 2p^m + 2(1/2 - p)^m."""
    return 2 * p**m + 2 * (0.5 - p) ** m


def recurrence_block_norm(p: float, d: int, k: int, m: int) -> float:
    FamilyParams(p, d, k, m)
    return 0.5 * (1 - 2.0**-k) ** m / (1 + ((1 - 2 * p) / (2 * p)) ** m)


def recurrence_output(p: float, d: int, k: int, m: int, max_dim: int = DEFAULT_MAX_DIM) -> DensityMatrix:
    """State surviving m-1 recurrence rounds, built from m-fold block tensor powers."""
    params = FamilyParams(p, d, k, m)
    check_dim(params.total_dim, max_dim)
    diag, off, mid = family_blocks(p, d, k, max_dim)
    n = recurrence_norm(p, m)
    shield = shield_layout([d] * (k * m))
    out = _state_from_blocks(
        tensor_power(diag, m) / n, tensor_power(off, m) / n, tensor_power(mid, m) / n, shield
    )
    return DensityMatrix(out.matrix, out.layout, out.tol, {"success_prob": n})


_FLIP = {0: [0, 1], 1: [1, 0]}


def recurrence_round(source: DensityMatrix, target: DensityMatrix, accept: str = "zero"):
    """One bilateral-CNOT recurrence step on two key-plus-shield states.

    The source key controls CNOTs onto the target key, which is then
    measured. ``accept="zero"`` keeps only the outcome 00, while
    ``accept="equal"`` keeps 00 and 11. Returns (normalized survivor,
    success probability). The survivor's shield is the source shield
    followed by the target shield.
    """
    if split_key(source.layout)[:2] != (2, 2) or split_key(target.layout)[:2] != (2, 2):
        raise LayoutError("recurrence needs two-qubit keys")
    if accept not in ("zero", "equal"):
        raise ValueError(f"accept must be 'zero' or 'equal', got {accept!r}")
    bs, bt = key_blocks(source), key_blocks(target)
    s1, s2 = bs.shape[-1], bt.shape[-1]
    out = np.zeros((2, 2, 2, 2, s1 * s2, s1 * s2), dtype=complex)
    for a in ([0] if accept == "zero" else [0, 1]):
        f = _FLIP[a]
        # target outcome (a, a) leaves target key i^a, j^a alongside source key i, j
        shifted = bt[np.ix_(f, f, f, f)]
        out += np.einsum("ijklpq,ijklrs->ijklprqs", bs, shifted).reshape(2, 2, 2, 2, s1 * s2, s1 * s2)
    matrix = out.transpose(0, 1, 4, 2, 3, 5).reshape(4 * s1 * s2, 4 * s1 * s2)
    prob = float(np.trace(matrix).real)
    if prob <= 0:
        raise ValueError("recurrence round has zero success probability")
    dims = source.layout.dims[2:] + target.layout.dims[2:]
    labels = source.layout.labels[2:] + target.layout.labels[2:]
    layout = KEY2 + relabel_shield(dims, labels) if dims else KEY2
    return DensityMatrix(matrix / prob, layout, source.tol), prob


def iterate_recurrence(state: DensityMatrix, m: int, accept: str = "zero"):
    """Run m-1 rounds, each consuming a fresh copy of ``state`` as target."""
    out, total = state, 1.0
    for _ in range(m - 1):
        out, prob = recurrence_round(out, state, accept)
        total *= prob
    return out, total


# structured spectral evaluation ------------------------------------------------


@dataclass(frozen=True)
class _CopySpectrum:
    """Per-copy eigen-classes: multiplicity and block eigenvalues for each class."""

    mult: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    mid: np.ndarray


def _copy_spectrum(p: float, d: int, k: int, transposed: bool) -> _CopySpectrum:
    j = np.arange(k + 1)
    binom = np.array([math.comb(k, x) for x in j], dtype=float)
    if transposed:
        # j factors in P+, the rest in P+_perp
        mult = binom * float(d * d - 1) ** (k - j)
        t1 = np.where(j == 0, (1 / (d * d - 1)) ** k, 0.0)
        t2 = (1 / d) ** j * (1 / (d * d + d)) ** (k - j)
    else:
        # j factors antisymmetric, the rest symmetric
        s, a = (d * d + d) / 2, (d * d - d) / 2
        mult = binom * s ** (k - j) * a**j
        t1 = (1 / (d * d + d)) ** (k - j) * (1 / (d * d - d)) ** j
        t2 = np.where(j == 0, (2 / (d * d + d)) ** k, 0.0)
    return _CopySpectrum(mult, p * (t1 + t2) / 2, p * (t1 - t2) / 2, (0.5 - p) * t2)


def _min_product_gap(a: np.ndarray, b: np.ndarray, m: int) -> float:
    """min over class multisets of prod(a) - prod(b), for m copies.

    Classes j >= 1 share a common ratio a_j / b_j, so once the number n0 of
    class-0 copies is fixed the sign of the gap is fixed too, and the extreme
    value uses the largest or smallest b_j for the remaining copies.
    """
    if len(a) == 1:
        return float(a[0] ** m - b[0] ** m)
    rest_a, rest_b = a[1:], b[1:]
    rho = rest_a / rest_b
    if np.ptp(rho) > 1e-9 * np.abs(rho).max():
        raise ValueError("classes j >= 1 do not share a common eigenvalue ratio")
    rho = float(rho[0])
    best = math.inf
    for n0 in range(m + 1):
        coef = a[0] ** n0 * rho ** (m - n0) - b[0] ** n0
        scale = (rest_b.max() if coef < 0 else rest_b.min()) ** (m - n0)
        best = min(best, float(coef * scale))
    return best


def _ppt_classes(a: np.ndarray, b: np.ndarray, m: int, tol: float) -> bool:
    """prod(a) >= prod(b) for every multiset, up to a relative tolerance."""
    rho = float(a[1] / b[1]) if len(a) > 1 else 1.0
    for n0 in range(m + 1):
        if len(a) == 1 and n0 < m:
            continue
        lhs, rhs = a[0] ** n0 * rho ** (m - n0), b[0] ** n0
        if lhs - rhs < -tol * max(lhs, rhs):
            return False
    return True


@dataclass(frozen=True)
class StructuredRecurrence:
    params: FamilyParams
    success_prob: float
    block_norm: float
    corner_trace: float
    middle_trace: float
    min_eig: float
    min_eig_pt: float
    ppt: bool

    def squeezed_state(self) -> np.ndarray:
        """Two-qubit state left by privacy squeezing (diagonal twisting of A_0011)."""
        a, b, c = self.corner_trace, self.middle_trace, self.block_norm
        return np.array([[a, 0, 0, c], [0, b, 0, 0], [0, 0, b, 0], [c, 0, 0, a]], dtype=complex)


def structured_recurrence(p: float, d: int, k: int, m: int = 1, tol: float = DEFAULT_TOL) -> StructuredRecurrence:
    """Exact block traces, block norm and spectra without building matrices."""
    params = FamilyParams(p, d, k, m)
    n = recurrence_norm(p, m)
    plain = _copy_spectrum(p, d, k, transposed=False)
    gam = _copy_spectrum(p, d, k, transposed=True)
    corner_trace = float((plain.mult * plain.diag).sum()) ** m / n
    middle_trace = float((plain.mult * plain.mid).sum()) ** m / n
    block_norm = float((plain.mult * np.abs(plain.off)).sum()) ** m / n
    # untransposed: corners pair diag with off, middle is mid alone
    lo = min(_min_product_gap(plain.diag, np.abs(plain.off), m), float(plain.mid.min()) ** m) / n
    # transposed: corners keep diag, middle pairs mid with off
    gap = _min_product_gap(gam.mid, np.abs(gam.off), m)
    lo_pt = min(float(gam.diag.min()) ** m, gap) / n
    ppt = _ppt_classes(gam.mid, np.abs(gam.off), m, tol)
    return StructuredRecurrence(params, n, block_norm, corner_trace, middle_trace, lo, lo_pt, ppt)


# NPT candidate -------------------------------------------------------------------


def npt_candidate(d: int, k: int, weights=(0.25, 0.25, 0.25, 0.25), max_dim: int = DEFAULT_MAX_DIM) -> DensityMatrix:
    """Bell-diagonal key with flags tau_i (x) tau_j: weights ordered p11, p12, p21, p22."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or (w < 0).any() or abs(w.sum() - 1) > 1e-12:
        raise ValueError(f"weights must be a probability 4-vector, got {weights}")
    check_dim(4 * d ** (4 * k), max_dim)
    t1, t2 = hiding_pair(d, k, max_dim)
    b = bell_vectors()
    flags = {1: t1.matrix, 2: t2.matrix}
    terms = [("phi+", 1, 1), ("phi-", 1, 2), ("psi+", 2, 1), ("psi-", 2, 2)]
    m = sum(wi * tensor(proj(b[name]), flags[i], flags[j]) for wi, (name, i, j) in zip(w, terms) if wi > 0)
    return DensityMatrix(m, KEY2 + shield_layout([d] * (2 * k)))


def perp_projector_power(d: int, k: int) -> np.ndarray:
    return tensor_power(np.eye(d * d) - max_entangled_matrix(d), k)


def npt_witness_value(d: int, k: int, max_dim: int = DEFAULT_MAX_DIM) -> float:
    """Tr[W (tau2^G (x) (tau1^G - tau2^G))] - Tr[W (tau1^G (x) (tau1^G + tau2^G))],
    W = Q (x) P_perp^{(x)k}, Q = I - P_perp^{(x)k}; each trace factorizes."""
    t1, t2 = hiding_pair(d, k, max_dim)
    cut = t1.layout.party_indices("B")
    g1 = partial_transpose(t1.matrix, t1.layout, cut)
    g2 = partial_transpose(t2.matrix, t2.layout, cut)
    perp = perp_projector_power(d, k)
    q = np.eye(perp.shape[0]) - perp

    def tr(a, b):
        return float(np.trace(a @ b).real)

    return tr(q, g2) * tr(perp, g1 - g2) - tr(q, g1) * tr(perp, g1 + g2)


def npt_witness_trace_r(d: int, k: int) -> float:
    """Tr R = 1 - ((d-1)/d)^k, the weight of tau2^G outside P_perp^{(x)k}."""
    return 1 - ((d - 1) / d) ** k


def npt_witness_closed_form_printed(d: int, k: int) -> float:
    return npt_witness_trace_r(d, k) * (1 / (d * d - 1) ** k - 1 / (d * d + d) ** k)


def npt_witness_closed_form(d: int, k: int) -> float:
    """Closed form including Tr P_perp^{(x)k} = (d^2 - 1)^k."""
    return npt_witness_trace_r(d, k) * (1 - ((d - 1) / d) ** k)


# controlled private quantum channel ------------------------------------------------


@dataclass(frozen=True)
class CpqcReport:
    d: int
    k: int
    probabilities: tuple[float, float]
    fidelities: tuple[float, float]
    controller_overlap: float
    amplitude_overlap: float
    ab_before: np.ndarray
    ab_before_pt_min_eig: float
    hiding_overlap: float


def _purification_columns(rho: np.ndarray, tol: float) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    keep = w > tol
    return v[:, keep] * np.sqrt(w[keep])


def cpqc_demo(d: int, k: int, max_dim: int = DEFAULT_MAX_DIM, tol: float = DEFAULT_TOL) -> CpqcReport:
    """Purify the hiding-flag state onto a controller C and simulate her measurement.

    |psi> = (|psi+>|phi_1> + |psi->|phi_2>)/sqrt 2 with psi+- = (|00> +- |11>)/sqrt 2
    and Tr_C phi_i = tau_i. The two purifications occupy orthogonal
    subspaces of C, so the controller's reduced states are orthogonal even
    though tau_1 and tau_2 overlap slightly.
    """
    t1, t2 = hiding_pair(d, k, max_dim)
    c1 = _purification_columns(t1.matrix, tol)
    c2 = _purification_columns(t2.matrix, tol)
    s, r1, r2 = t1.dim, c1.shape[1], c2.shape[1]
    dc = r1 + r2
    check_dim(4 * s * dc, max_dim)
    phi1 = np.zeros((s, dc), dtype=complex)
    phi2 = np.zeros((s, dc), dtype=complex)
    phi1[:, :r1] = c1
    phi2[:, r1:] = c2
    b = bell_vectors()
    psi = (np.einsum("a,sc->asc", b["phi+"], phi1) + np.einsum("a,sc->asc", b["phi-"], phi2)) / math.sqrt(2)
    full = psi.reshape(-1)
    dims = [4, s, dc]
    rho_ab = ptrace_matrix(proj(full), dims, [0])
    probs, fids = [], []
    for sl, target in ((slice(0, r1), b["phi+"]), (slice(r1, dc), b["phi-"])):
        part = np.zeros_like(psi)
        part[:, :, sl] = psi[:, :, sl]
        pr = float(np.vdot(part, part).real)
        ab = ptrace_matrix(proj(part.reshape(-1)), dims, [0]) / pr
        probs.append(pr)
        fids.append(fidelity(ab, proj(target)) ** 2)
    sigma1 = phi1.T @ phi1.conj()
    sigma2 = phi2.T @ phi2.conj()
    layout = SystemLayout((2, 2), ("A", "B"))
    return CpqcReport(
        d,
        k,
        (probs[0], probs[1]),
        (fids[0], fids[1]),
        float(np.trace(sigma1 @ sigma2).real),
        abs(complex(np.vdot(phi1.reshape(-1), phi2.reshape(-1)))),
        rho_ab,
        min_eigenvalue(partial_transpose(rho_ab, layout, ["B"])),
        float(np.trace(t1.matrix @ t2.matrix).real),
    )
