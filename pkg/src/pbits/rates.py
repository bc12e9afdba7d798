"""Key-rate lower bounds and entanglement upper bounds, all in bits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .family import FamilyParams, ppt_condition, structured_recurrence
from .linalg import (
    DEFAULT_TOL,
    DensityMatrix,
    binary_entropy,
    min_eigenvalue,
    partial_transpose,
    psd_sqrt,
    random_pure_vector,
    relative_entropy,
    shannon_entropy,
    trace_norm,
    von_neumann_entropy,
)
from .security import CcqEnsemble, ccq_of
from .states import KEY2, XFormPbit, max_entangled_matrix
from .twisting import Twisting, key_blocks, split_key


def mutual_information_ab(c: CcqEnsemble) -> float:
    p = c.p
    return shannon_entropy(p.sum(1)) + shannon_entropy(p.sum(0)) - shannon_entropy(p)


def mutual_information_ae(c: CcqEnsemble) -> float:
    """I(A:E) = S(rho_E) - sum_i p_i S(rho_E | A = i)."""
    pa = c.p.sum(1)
    cond = 0.0
    for i in range(c.d):
        if pa[i] <= c.tol:
            continue
        parts = [c.p[i, j] * c.eve[(i, j)] for j in range(c.d) if (i, j) in c.eve and c.p[i, j] > c.tol]
        cond += pa[i] * von_neumann_entropy(sum(parts) / pa[i], c.tol)
    return von_neumann_entropy(c.rho_E(), c.tol) - cond


def dw_rate(c: CcqEnsemble) -> float:
    """I(A:B) - I(A:E) on the ccq data; negative values are returned as is."""
    return float(mutual_information_ab(c) - mutual_information_ae(c))


def log_negativity(rho: DensityMatrix, cut=None) -> float:
    cut = rho.layout.party_indices("B") if cut is None else cut
    return math.log2(trace_norm(partial_transpose(rho.matrix, rho.layout, cut)))


@dataclass(frozen=True)
class PbitNegativity:
    value: float
    precondition_holds: bool
    min_eig_pt: float


def pbit_log_negativity(x: XFormPbit, tol: float = DEFAULT_TOL) -> PbitNegativity:
    """log2(1 + ||X^G||), valid when sqrt(XX^dag) and sqrt(X^dag X) are PPT."""
    X = x.X
    layout, cut = x.layout, [1]
    lo = min(
        min_eigenvalue(partial_transpose(psd_sqrt(X @ X.conj().T), layout, cut), 1e-8),
        min_eigenvalue(partial_transpose(psd_sqrt(X.conj().T @ X), layout, cut), 1e-8),
    )
    value = math.log2(1 + trace_norm(partial_transpose(X, layout, cut)))
    return PbitNegativity(value, lo >= -tol, lo)


def shield_conditionals(gamma: DensityMatrix) -> list[DensityMatrix]:
    """Normalized shield states conditioned on key outcomes ii."""
    d_a, d_b, _ = split_key(gamma.layout)
    blocks = key_blocks(gamma)
    shield = gamma.layout.sub(range(2, len(gamma.layout)))
    out = []
    for i in range(min(d_a, d_b)):
        b = blocks[i, i, i, i]
        out.append(DensityMatrix(b / np.trace(b).real, shield, gamma.tol))
    return out


def certify_separable(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> bool:
    """Sufficient separability tests between the A- and B-labelled parties.

    Diagonal in the product basis means classical, hence separable; for
    total dimension at most 6 PPT is also sufficient. Returns False when
    neither test applies.
    """
    m = rho.matrix
    if float(np.max(np.abs(m - np.diag(np.diag(m))))) <= tol:
        return True
    parties = {rho.layout.party(i) for i in range(len(rho.layout))}
    if rho.dim <= 6 and len(parties) == 2:
        return min_eigenvalue(rho.pt()) >= -tol
    return False


@dataclass(frozen=True)
class ErBound:
    value: float
    irreducible: bool


def er_upper_bound_pdit(gamma: DensityMatrix, shield_conditionals_: list, conditional_er_bounds: list) -> ErBound:
    """log2 d + mean of the supplied bounds on the conditional shield states."""
    d = split_key(gamma.layout)[0]
    if len(shield_conditionals_) != d or len(conditional_er_bounds) != d:
        raise ValueError(f"need {d} conditionals and bounds, got {len(shield_conditionals_)}, {len(conditional_er_bounds)}")
    bounds = [float(b) for b in conditional_er_bounds]
    return ErBound(math.log2(d) + sum(bounds) / d, all(b == 0 for b in bounds))


def certified_er_upper_bound(gamma: DensityMatrix) -> ErBound | None:
    """Upper bound using zero for conditionals certified separable, else None."""
    conds = shield_conditionals(gamma)
    if not all(certify_separable(c) for c in conds):
        return None
    return er_upper_bound_pdit(gamma, conds, [0.0] * len(conds))


@dataclass(frozen=True, eq=False)
class WitnessResult:
    max_overlap: float
    best_sigma: np.ndarray
    samples: int

    @property
    def relative_entropy_to_best(self) -> float:
        d = math.isqrt(self.best_sigma.shape[0])
        return relative_entropy(max_entangled_matrix(d), self.best_sigma)


def er_lower_witness(
    samples: int,
    twisting: Twisting,
    seed: int = 0,
    shield_dims: tuple[int, int] | None = None,
    batch: int = 1024,
) -> WitnessResult:
    """Max singlet overlap of twisted product states, shield traced out.

    Alice's part lives on A A' and Bob's on B B'; each is a Haar-random
    pure vector, so the sampled states are product across the parties.
    """
    d = twisting.d_A
    s = twisting.shield_dim
    if shield_dims is None:
        r = math.isqrt(s)
        shield_dims = (r, r) if r * r == s else (s, 1)
    da, db = shield_dims
    rng = np.random.default_rng(seed)
    u = twisting.stacked().reshape(d, d, s, s)
    best, best_vec = -1.0, None
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        alice = np.stack([random_pure_vector(d * da, rng) for _ in range(n)]).reshape(n, d, da)
        bob = np.stack([random_pure_vector(d * db, rng) for _ in range(n)]).reshape(n, d, db)
        psi = np.einsum("nax,nby->nabxy", alice, bob).reshape(n, d, d, s)
        psi = np.einsum("abst,nabt->nabs", u, psi)
        diag = psi[:, np.arange(d), np.arange(d), :].sum(axis=1) / math.sqrt(d)
        overlaps = np.einsum("ns,ns->n", diag, diag.conj()).real
        i = int(np.argmax(overlaps))
        if overlaps[i] > best:
            best, best_vec = float(overlaps[i]), psi[i]
        done += n
    flat = best_vec.reshape(d * d, s)
    sigma = flat @ flat.conj().T
    return WitnessResult(best, sigma, samples)


def near_pbit_rate_bound(eps: float) -> float:
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    return max(0.0, 1 - 16 * eps)


@dataclass(frozen=True)
class NearPbitDiagnostics:
    eps: float
    i_ab: float
    i_ae: float
    entropy_ab: float
    i_ab_lower: float
    i_ae_upper_printed: float
    i_ae_upper_fannes: float

    @property
    def first_holds(self) -> bool:
        return self.i_ab >= self.i_ab_lower - 1e-12

    @property
    def printed_second_holds(self) -> bool:
        return self.entropy_ab <= self.i_ae_upper_printed + 1e-12

    @property
    def fannes_second_holds(self) -> bool:
        return self.entropy_ab <= self.i_ae_upper_fannes + 1e-12


def near_pbit_diagnostics(squeezed: DensityMatrix) -> NearPbitDiagnostics:
    """Continuity bounds on I(A:B) and I(A:E) for a two-qubit state near P+.

    eps is the trace distance to P+; h(eps) is only defined for eps <= 1, so
    the h terms are dropped (set to nan bounds) beyond that.
    """
    eps = trace_norm(squeezed.matrix - max_entangled_matrix(2))
    c = ccq_of(squeezed)
    h = binary_entropy(eps) if eps <= 1 else math.nan
    return NearPbitDiagnostics(
        eps,
        mutual_information_ab(c),
        mutual_information_ae(c),
        von_neumann_entropy(squeezed),
        1 - 4 * eps * 2 - h,
        8 * eps - h,
        8 * eps + h,
    )


@dataclass(frozen=True)
class BeKeyCertificate:
    """Key from a PPT input, evaluated through the structured spectra."""

    params: FamilyParams
    ppt_analytic: bool
    ppt_numeric: bool
    input_min_eig_pt: float
    block_norm: float
    eps: float
    rate_bound: float
    dw_rate: float

    @property
    def holds(self) -> bool:
        return self.ppt_numeric and self.rate_bound > 0 and self.dw_rate >= self.rate_bound


def be_key_certificate(p: float, d: int, k: int, m: int, tol: float = DEFAULT_TOL) -> BeKeyCertificate:
    params = FamilyParams(p, d, k, m)
    single = structured_recurrence(p, d, k, 1, tol)
    out = structured_recurrence(p, d, k, m, tol)
    squeezed = DensityMatrix(out.squeezed_state(), KEY2)
    eps = 0.5 - out.block_norm
    return BeKeyCertificate(
        params,
        ppt_condition(p, d, k),
        single.ppt,
        single.min_eig_pt,
        out.block_norm,
        eps,
        near_pbit_rate_bound(eps),
        dw_rate(ccq_of(squeezed)),
    )


def smallest_key_cell(
    p: float, m: int, min_norm: float, d_max: int = 64, k_max: int = 40
) -> tuple[int, int] | None:
    """Smallest shield (by d^(2k)) with a PPT input and block norm >= min_norm.

    The block norm does not depend on d, so it is evaluated once per k at
    d = 2 and d is then the smallest value passing the PPT condition.
    """
    best = None
    for k in range(1, k_max + 1):
        if structured_recurrence(p, 2, k, m).block_norm < min_norm:
            continue
        d = next((d for d in range(2, d_max + 1) if ppt_condition(p, d, k)), None)
        if d is None:
            continue
        size = 2 * k * math.log(d)
        if best is None or size < best[0]:
            best = (size, d, k)
    return None if best is None else (best[1], best[2])


@dataclass
class RateReport:
    dw_rate: float
    log_negativity: float
    er_upper: float | None
    er_lower_witness: float
    notes: list[str] = field(default_factory=list)
