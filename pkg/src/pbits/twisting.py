"""Key-controlled shield unitaries (twistings) and privacy squeezing."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DensityMatrix,
    LayoutError,
    SystemLayout,
    is_unitary,
    random_unitary,
)


def split_key(layout: SystemLayout) -> tuple[int, int, int]:
    """Return (d_A, d_B, shield dimension); the key is the first two subsystems."""
    if len(layout) < 2 or layout.labels[0][0] != "A" or layout.labels[1][0] != "B":
        raise LayoutError(f"layout {layout.labels} does not start with an A,B key")
    d_a, d_b = layout.dims[0], layout.dims[1]
    return d_a, d_b, layout.dim // (d_a * d_b)


def key_blocks(rho: DensityMatrix) -> np.ndarray:
    """Blocks A_{ij,kl} as an array indexed ``[i, j, k, l, shield_row, shield_col]``."""
    d_a, d_b, s = split_key(rho.layout)
    return rho.matrix.reshape(d_a, d_b, s, d_a, d_b, s).transpose(0, 1, 3, 4, 2, 5)


def _flat_blocks(rho: DensityMatrix) -> np.ndarray:
    d_a, d_b, s = split_key(rho.layout)
    return rho.matrix.reshape(d_a * d_b, s, d_a * d_b, s)


@dataclass(frozen=True, eq=False)
class Twisting:
    """Controlled unitary sum_kl |kl><kl| (x) U^{kl} on key AB and shield."""

    d_A: int
    d_B: int
    blocks: Mapping[tuple[int, int], np.ndarray]
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        blocks = {tuple(key): np.asarray(u, dtype=complex) for key, u in self.blocks.items()}
        object.__setattr__(self, "blocks", blocks)
        shapes = {u.shape for u in blocks.values()}
        if len(shapes) > 1:
            raise ValueError(f"shield unitaries have different shapes: {sorted(shapes)}")
        for key, u in blocks.items():
            if not is_unitary(u, max(self.tol, 1e-12)):
                raise ValueError(f"block {key} is not unitary")

    @property
    def shield_dim(self) -> int:
        return next(iter(self.blocks.values())).shape[0]

    def stacked(self) -> np.ndarray:
        """Unitaries stacked along the joint key index k*d_B + l."""
        out = []
        for k in range(self.d_A):
            for l in range(self.d_B):
                if (k, l) not in self.blocks:
                    raise KeyError(f"twisting is missing block {(k, l)}")
                out.append(self.blocks[(k, l)])
        return np.stack(out)

    def inverse(self) -> Twisting:
        return Twisting(self.d_A, self.d_B, {k: u.conj().T for k, u in self.blocks.items()}, self.tol)


def identity_twisting(d_a: int, d_b: int, shield_dim: int) -> Twisting:
    eye = np.eye(shield_dim, dtype=complex)
    return Twisting(d_a, d_b, {(k, l): eye for k in range(d_a) for l in range(d_b)})


def random_twisting(d_a: int, d_b: int, shield_dim: int, rng: np.random.Generator) -> Twisting:
    return Twisting(d_a, d_b, {(k, l): random_unitary(shield_dim, rng) for k in range(d_a) for l in range(d_b)})


def abelian_twisting(phases: np.ndarray, shield_dim: int = 1) -> Twisting:
    """Key-controlled phases e^{i phi_kl}, acting trivially on the shield."""
    phases = np.asarray(phases, dtype=float)
    eye = np.eye(shield_dim, dtype=complex)
    d_a, d_b = phases.shape
    return Twisting(d_a, d_b, {(k, l): np.exp(1j * phases[k, l]) * eye for k in range(d_a) for l in range(d_b)})


def assemble(t: Twisting) -> np.ndarray:
    u = t.stacked()
    n, s = u.shape[0], u.shape[1]
    out = np.zeros((n * s, n * s), dtype=complex)
    for a in range(n):
        out[a * s : (a + 1) * s, a * s : (a + 1) * s] = u[a]
    return out


def apply_twisting(rho: DensityMatrix, t: Twisting) -> DensityMatrix:
    d_a, d_b, s = split_key(rho.layout)
    if (t.d_A, t.d_B, t.shield_dim) != (d_a, d_b, s):
        raise LayoutError(
            f"twisting acts on key {t.d_A}x{t.d_B} with shield {t.shield_dim}, state has {d_a}x{d_b}, {s}"
        )
    u = t.stacked()
    r = _flat_blocks(rho)
    out = np.einsum("aij,ajbk,blk->aibl", u, r, u.conj(), optimize=True)
    return rho.with_matrix(out.reshape(rho.dim, rho.dim))


def dephase_key(rho: DensityMatrix) -> DensityMatrix:
    """Measure the key in the computational basis without reading the outcome."""
    r = _flat_blocks(rho)
    n = r.shape[0]
    out = np.zeros_like(r)
    for a in range(n):
        out[a, :, a, :] = r[a, :, a, :]
    return rho.with_matrix(out.reshape(rho.dim, rho.dim))


def _svd_pair(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # block = V R W with R >= 0; conjugating by (V^dag, W^dag) leaves R behind
    v, _, w = np.linalg.svd(block)
    return v.conj().T, w


def psq_twisting(rho: DensityMatrix, full: bool = False) -> Twisting:
    """Twisting that turns A_0011 into its singular-value matrix.

    With ``full=True`` the block A_0110 is diagonalized the same way.
    """
    d_a, d_b, s = split_key(rho.layout)
    if (d_a, d_b) != (2, 2):
        raise LayoutError("privacy squeezing needs a two-qubit key")
    r = _flat_blocks(rho)
    eye = np.eye(s, dtype=complex)
    blocks = {(0, 0): eye, (0, 1): eye, (1, 0): eye, (1, 1): eye}
    blocks[(0, 0)], blocks[(1, 1)] = _svd_pair(r[0, :, 3, :])
    if full:
        blocks[(0, 1)], blocks[(1, 0)] = _svd_pair(r[1, :, 2, :])
    return Twisting(2, 2, blocks)


def reduced_key_state(rho: DensityMatrix, t: Twisting) -> DensityMatrix:
    """Tr_shield of the twisted state, without forming the twisted matrix."""
    u = t.stacked()
    r = _flat_blocks(rho)
    out = np.einsum("aij,ajbk,bik->ab", u, r, u.conj(), optimize=True)
    return DensityMatrix(out, rho.layout.sub([0, 1]), rho.tol)


def privacy_squeeze(rho: DensityMatrix, full: bool = False) -> DensityMatrix:
    return reduced_key_state(rho, psq_twisting(rho, full))
