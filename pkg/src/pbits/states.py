"""Constructors for the named states: maximally entangled, Werner, hiding
pairs, basic pdits, twisted pdits, X-form and flags-form pbits, and the
two worked pbit examples (swap-based and flower)."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_MAX_DIM,
    DEFAULT_TOL,
    DensityMatrix,
    InvalidStateError,
    SystemLayout,
    check_dim,
    is_unitary,
    proj,
    psd_sqrt,
    tensor,
    tensor_power,
    trace_norm,
)

KEY2 = SystemLayout((2, 2), ("A", "B"))


def key_layout(d: int) -> SystemLayout:
    return SystemLayout((d, d), ("A", "B"))


def shield_layout(dims_a: Sequence[int], dims_b: Sequence[int] | None = None, start: int = 1) -> SystemLayout:
    """Interleaved shield layout ``A'1, B'1, A'2, B'2, ...``.

    With a single factor per party the labels are the plain ``A'``, ``B'``.
    """
    dims_b = dims_a if dims_b is None else dims_b
    if len(dims_a) != len(dims_b):
        raise ValueError("both parties need the same number of shield factors")
    if len(dims_a) == 1 and start == 1:
        return SystemLayout((dims_a[0], dims_b[0]), ("A'", "B'"))
    dims, labels = [], []
    for j, (da, db) in enumerate(zip(dims_a, dims_b), start=start):
        dims += [da, db]
        labels += [f"A'{j}", f"B'{j}"]
    return SystemLayout(tuple(dims), tuple(labels))


def relabel_shield(dims: Sequence[int], labels: Sequence[str]) -> SystemLayout:
    """Renumber shield subsystems ``A'1, B'1, ...`` in order, keeping parties."""
    counts: dict[str, int] = {}
    out = []
    for lab in labels:
        party = lab[0]
        counts[party] = counts.get(party, 0) + 1
        out.append(f"{party}'{counts[party]}")
    return SystemLayout(tuple(dims), tuple(out))


def swap_operator(d: int) -> np.ndarray:
    v = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            v[j * d + i, i * d + j] = 1
    return v


def max_entangled_vector(d: int) -> np.ndarray:
    v = np.zeros(d * d, dtype=complex)
    v[[i * d + i for i in range(d)]] = 1 / math.sqrt(d)
    return v


def max_entangled_matrix(d: int) -> np.ndarray:
    return proj(max_entangled_vector(d))


def max_entangled(d: int) -> DensityMatrix:
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    return DensityMatrix(max_entangled_matrix(d), key_layout(d))


def bell_vectors() -> dict[str, np.ndarray]:
    s = 1 / math.sqrt(2)
    return {
        "phi+": np.array([s, 0, 0, s], dtype=complex),
        "phi-": np.array([s, 0, 0, -s], dtype=complex),
        "psi+": np.array([0, s, s, 0], dtype=complex),
        "psi-": np.array([0, s, -s, 0], dtype=complex),
    }


def _werner_layout(d: int) -> SystemLayout:
    return SystemLayout((d, d), ("A'", "B'"))


def sym_projector(d: int) -> np.ndarray:
    return (np.eye(d * d) + swap_operator(d)) / 2


def asym_projector(d: int) -> np.ndarray:
    return (np.eye(d * d) - swap_operator(d)) / 2


def werner_sym(d: int) -> DensityMatrix:
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    return DensityMatrix(2 * sym_projector(d) / (d * d + d), _werner_layout(d))


def werner_asym(d: int) -> DensityMatrix:
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    return DensityMatrix(2 * asym_projector(d) / (d * d - d), _werner_layout(d))


def hiding_pair(d: int, k: int, max_dim: int = DEFAULT_MAX_DIM) -> tuple[DensityMatrix, DensityMatrix]:
    """tau1 = ((rho_s + rho_a)/2)^{(x)k}, tau2 = rho_s^{(x)k} on k pairs of d-dim shields."""
    if d < 2 or k < 1:
        raise ValueError(f"need d >= 2 and k >= 1, got d={d}, k={k}")
    check_dim(d ** (2 * k), max_dim)
    rs, ra = werner_sym(d).matrix, werner_asym(d).matrix
    layout = shield_layout([d] * k)
    return (
        DensityMatrix(tensor_power((rs + ra) / 2, k), layout),
        DensityMatrix(tensor_power(rs, k), layout),
    )


def key_block_matrix(blocks: Mapping[tuple[int, int], np.ndarray], key_dim: int, shield_dim: int) -> np.ndarray:
    """Assemble a matrix from shield blocks indexed by joint key labels."""
    n = key_dim * shield_dim
    m = np.zeros((n, n), dtype=complex)
    s = shield_dim
    for (a, b), blk in blocks.items():
        m[a * s : (a + 1) * s, b * s : (b + 1) * s] = blk
    return m


def basic_pdit(d: int, sigma: DensityMatrix) -> DensityMatrix:
    """P+ on the key tensored with the shield state sigma."""
    if sigma.dim == 1:
        return max_entangled(d)
    return DensityMatrix(tensor(max_entangled_matrix(d), sigma.matrix), key_layout(d) + sigma.layout, sigma.tol)


@dataclass(frozen=True, eq=False)
class PditSpec:
    d: int
    sigma: DensityMatrix
    unitaries: Sequence[np.ndarray]

    def __post_init__(self):
        if len(self.unitaries) != self.d:
            raise ValueError(f"need {self.d} shield unitaries, got {len(self.unitaries)}")
        for i, u in enumerate(self.unitaries):
            if np.shape(u) != (self.sigma.dim, self.sigma.dim):
                raise ValueError(f"unitary {i} has shape {np.shape(u)}, shield is {self.sigma.dim}")
            if not is_unitary(u, self.sigma.tol):
                raise InvalidStateError(f"shield operator {i} is not unitary")

    def twisting(self):
        from .twisting import Twisting

        eye = np.eye(self.sigma.dim, dtype=complex)
        blocks = {(k, l): (self.unitaries[k] if k == l else eye) for k in range(self.d) for l in range(self.d)}
        return Twisting(self.d, self.d, blocks)


def pdit_from_spec(spec: PditSpec) -> DensityMatrix:
    d, s = spec.d, spec.sigma.dim
    sig = spec.sigma.matrix
    blocks = {}
    for i in range(d):
        for j in range(d):
            blocks[(i * d + i, j * d + j)] = spec.unitaries[i] @ sig @ spec.unitaries[j].conj().T / d
    m = key_block_matrix(blocks, d * d, s)
    return DensityMatrix(m, key_layout(d) + spec.sigma.layout, spec.sigma.tol)


@dataclass(frozen=True, eq=False)
class XFormPbit:
    """Pbit given by an operator X with unit trace norm acting on the shield."""

    X: np.ndarray
    shield_dims: tuple[int, int] | None = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        x = np.asarray(self.X, dtype=complex)
        object.__setattr__(self, "X", x)
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise ValueError(f"X must be square, got {x.shape}")
        dims = self.shield_dims
        if dims is None:
            r = math.isqrt(x.shape[0])
            if r * r != x.shape[0]:
                raise ValueError("cannot infer shield dims from a non-square dimension; pass shield_dims")
            dims = (r, r)
        object.__setattr__(self, "shield_dims", tuple(int(v) for v in dims))
        if math.prod(self.shield_dims) != x.shape[0]:
            raise ValueError(f"shield dims {self.shield_dims} do not match X of size {x.shape[0]}")

    @property
    def layout(self) -> SystemLayout:
        return SystemLayout(self.shield_dims, ("A'", "B'"))


def pbit_from_X(x: XFormPbit) -> DensityMatrix:
    X = x.X
    norm = trace_norm(X)
    if abs(norm - 1) > x.tol * 100:
        raise InvalidStateError(f"X must have unit trace norm, got {norm:.12g}")
    s = X.shape[0]
    blocks = {
        (0, 0): psd_sqrt(X @ X.conj().T) / 2,
        (0, 3): X / 2,
        (3, 0): X.conj().T / 2,
        (3, 3): psd_sqrt(X.conj().T @ X) / 2,
    }
    return DensityMatrix(key_block_matrix(blocks, 4, s), KEY2 + x.layout, x.tol)


def flags_form(p: float, rho_plus: DensityMatrix, rho_minus: DensityMatrix) -> DensityMatrix:
    """p psi+ (x) rho_plus + (1-p) psi- (x) rho_minus with psi+- = (|00> +- |11>)/sqrt 2.

    ``meta['flags_orthogonal']`` records whether Tr(rho_plus rho_minus) is
    within tolerance of zero, which is what makes the result an exact pbit.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p must be a probability, got {p}")
    if rho_plus.dim != rho_minus.dim:
        raise ValueError("flags must act on the same shield")
    b = bell_vectors()
    m = p * tensor(proj(b["phi+"]), rho_plus.matrix) + (1 - p) * tensor(proj(b["phi-"]), rho_minus.matrix)
    overlap = float(np.trace(rho_plus.matrix @ rho_minus.matrix).real)
    meta = {"flag_overlap": overlap, "flags_orthogonal": abs(overlap) <= rho_plus.tol}
    return DensityMatrix(m, KEY2 + rho_plus.layout, rho_plus.tol, meta)


def gamma_V(d: int) -> DensityMatrix:
    """The swap-based pbit: corner blocks I/(2d^2) and V/(2d^2)."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    n = d * d
    eye, v = np.eye(n) / n, swap_operator(d) / n
    blocks = {(0, 0): eye / 2, (0, 3): v / 2, (3, 0): v / 2, (3, 3): eye / 2}
    return DensityMatrix(key_block_matrix(blocks, 4, n), KEY2 + _werner_layout(d))


def hadamard_power(d: int) -> np.ndarray:
    n = round(math.log2(d)) if d >= 1 else -1
    if d < 2 or 2**n != d:
        raise ValueError(f"d must be a power of 2, got {d}")
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    return tensor_power(h, n)


def flower_unitary_part(d: int) -> np.ndarray:
    """U = sum_ij w_ij |ii><jj| on the d x d shield, W the Hadamard power."""
    w = hadamard_power(d)
    u = np.zeros((d * d, d * d), dtype=complex)
    diag = [i * d + i for i in range(d)]
    u[np.ix_(diag, diag)] = w
    return u


def flower(d: int) -> DensityMatrix:
    """Flower pbit with shield parties of dimension d each (|ii> lives on A'B')."""
    u = flower_unitary_part(d)
    sigma = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        sigma[i * d + i, i * d + i] = 1 / d
    blocks = {(0, 0): sigma / 2, (0, 3): u.T / (2 * d), (3, 0): u.conj() / (2 * d), (3, 3): sigma / 2}
    return DensityMatrix(key_block_matrix(blocks, 4, d * d), KEY2 + _werner_layout(d))
