"""Dense linear-algebra kernels over multi-subsystem Hilbert spaces.

Conventions used throughout the package:

* trace norms are unnormalized, so two states are at most distance 2 apart;
* entropies and relative entropies are in bits;
* a matrix index runs over subsystems in layout order, first subsystem most
  significant (numpy ``kron`` order).
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-10
DEFAULT_MAX_DIM = 2**14

# Relative cutoff used when taking square roots of PSD matrices, so that
# eigensolver noise around exact zeros does not leak in as sqrt(1e-17).
_SQRT_RCUT = 1e-13


class LayoutError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


class ResourceLimitError(ValueError):
    pass


def check_dim(dim: int, max_dim: int = DEFAULT_MAX_DIM) -> None:
    if dim > max_dim:
        raise ResourceLimitError(f"total dimension {dim} exceeds the cap {max_dim}")


@dataclass(frozen=True)
class SystemLayout:
    """Ordered subsystem dimensions with unique labels.

    The party owning a subsystem is the first character of its label
    (``A``, ``B`` or ``E``), so ``A'`` and ``A'3`` belong to Alice.
    """

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)
        if len(dims) != len(labels):
            raise LayoutError("dims and labels differ in length")
        if not dims:
            raise LayoutError("layout needs at least one subsystem")
        if any(x < 1 for x in dims):
            raise LayoutError(f"subsystem dimensions must be positive, got {dims}")
        if len(set(labels)) != len(labels):
            raise LayoutError(f"labels must be unique, got {labels}")

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __add__(self, other: SystemLayout) -> SystemLayout:
        return SystemLayout(self.dims + other.dims, self.labels + other.labels)

    def index(self, sub: int | str) -> int:
        if isinstance(sub, str):
            try:
                return self.labels.index(sub)
            except ValueError:
                raise LayoutError(f"unknown subsystem label {sub!r}") from None
        i = int(sub)
        if not 0 <= i < len(self.dims):
            raise LayoutError(f"subsystem index {i} out of range")
        return i

    def indices(self, subs: Iterable[int | str]) -> list[int]:
        out = sorted({self.index(s) for s in subs})
        return out

    def party(self, sub: int | str) -> str:
        return self.labels[self.index(sub)][0]

    def party_indices(self, party: str) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab[0] == party]

    def sub(self, subs: Iterable[int | str]) -> SystemLayout:
        idx = self.indices(subs)
        return SystemLayout(tuple(self.dims[i] for i in idx), tuple(self.labels[i] for i in idx))


def _as_layout(layout: SystemLayout | Sequence[int]) -> SystemLayout:
    if isinstance(layout, SystemLayout):
        return layout
    dims = tuple(layout)
    return SystemLayout(dims, tuple(f"S{i}" for i in range(len(dims))))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A square matrix tagged with its subsystem layout.

    Construction checks only shapes; :meth:`validate` runs the full
    Hermiticity, trace and positivity checks against ``tol``.
    """

    matrix: np.ndarray
    layout: SystemLayout
    tol: float = DEFAULT_TOL
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise LayoutError(f"density matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.layout.dim:
            raise LayoutError(
                f"matrix dimension {m.shape[0]} does not match layout product {self.layout.dim}"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    def residuals(self) -> dict[str, float]:
        m = self.matrix
        herm = float(np.max(np.abs(m - m.conj().T)))
        w = np.linalg.eigvalsh((m + m.conj().T) / 2)
        return {
            "hermiticity": herm,
            "trace": float(np.trace(m).real),
            "min_eigenvalue": float(w[0]),
        }

    def validate(self, tol: float | None = None) -> DensityMatrix:
        tol = self.tol if tol is None else tol
        r = self.residuals()
        problems = []
        if r["hermiticity"] > tol:
            problems.append(f"hermiticity residual {r['hermiticity']:.3e}")
        if abs(r["trace"] - 1) > tol:
            problems.append(f"trace {r['trace']:.12g}")
        if r["min_eigenvalue"] < -tol:
            problems.append(f"min eigenvalue {r['min_eigenvalue']:.3e}")
        if problems:
            raise InvalidStateError("invalid density matrix: " + ", ".join(problems))
        return self

    def is_valid(self, tol: float | None = None) -> bool:
        try:
            self.validate(tol)
        except InvalidStateError:
            return False
        return True

    def with_matrix(self, matrix: np.ndarray, layout: SystemLayout | None = None) -> DensityMatrix:
        return DensityMatrix(matrix, self.layout if layout is None else layout, self.tol)

    def ptrace(self, keep) -> DensityMatrix:
        return partial_trace(self, keep)

    def pt(self, transposed=None) -> np.ndarray:
        if transposed is None:
            transposed = self.layout.party_indices("B")
        return partial_transpose(self.matrix, self.layout, transposed)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    layout: SystemLayout
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", v)
        if v.size != self.layout.dim:
            raise LayoutError(f"amplitude count {v.size} does not match layout {self.layout.dim}")

    def norm_residual(self) -> float:
        return abs(float(np.vdot(self.amplitudes, self.amplitudes).real) - 1)

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.layout, self.tol)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def tensor(*mats: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, np.asarray(m))
    return out


def tensor_states(*states: DensityMatrix) -> DensityMatrix:
    layout = states[0].layout
    for s in states[1:]:
        layout = layout + s.layout
    return DensityMatrix(tensor(*(s.matrix for s in states)), layout, states[0].tol)


def tensor_power(m: np.ndarray, n: int) -> np.ndarray:
    return tensor(*([m] * n))


def ptrace_matrix(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw matrix; ``keep`` are subsystem indices."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(set(keep))
    drop = [i for i in range(n) if i not in keep]
    t = np.asarray(m).reshape(dims + dims)
    perm = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    dk = math.prod(dims[i] for i in keep)
    dd = math.prod(dims[i] for i in drop)
    t = t.transpose(perm).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def partial_trace(rho: DensityMatrix, keep: Iterable[int | str]) -> DensityMatrix:
    idx = rho.layout.indices(keep)
    if not idx:
        raise LayoutError("keep must name at least one subsystem")
    out = ptrace_matrix(rho.matrix, rho.layout.dims, idx)
    return DensityMatrix(out, rho.layout.sub(idx), rho.tol)


def partial_transpose(
    m: np.ndarray, layout: SystemLayout | Sequence[int], transposed: Iterable[int | str]
) -> np.ndarray:
    layout = _as_layout(layout)
    idx = layout.indices(transposed)
    dims = list(layout.dims)
    n = len(dims)
    t = np.asarray(m).reshape(dims + dims)
    perm = list(range(2 * n))
    for i in idx:
        perm[i], perm[n + i] = n + i, i
    return t.transpose(perm).reshape(layout.dim, layout.dim)


def trace_norm(m: np.ndarray) -> float:
    return float(np.linalg.svd(np.asarray(m), compute_uv=False).sum())


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hermitian_part(np.asarray(m, dtype=complex)))
    cut = _SQRT_RCUT * max(float(w[-1]), 0.0)
    w = np.where(w > cut, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityMatrix) else np.asarray(x, dtype=complex)


def fidelity(rho, sigma) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``, computed as ``||sqrt(rho) sqrt(sigma)||_1``."""
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise LayoutError(f"dimension mismatch {a.shape} vs {b.shape}")
    return trace_norm(psd_sqrt(a) @ psd_sqrt(b))


def _eigvals(rho) -> np.ndarray:
    return np.linalg.eigvalsh(hermitian_part(_mat(rho)))


def entropy_of_spectrum(w: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > tol]
    return float(-(w * np.log2(w)).sum()) + 0.0


def von_neumann_entropy(rho, tol: float = DEFAULT_TOL) -> float:
    return max(0.0, entropy_of_spectrum(_eigvals(rho), tol))


def shannon_entropy(p, tol: float = 0.0) -> float:
    return entropy_of_spectrum(np.asarray(p, dtype=float).ravel(), tol)


def binary_entropy(x: float) -> float:
    if not -1e-15 <= x <= 1 + 1e-15:
        raise ValueError(f"binary entropy needs 0 <= x <= 1, got {x}")
    x = min(max(x, 0.0), 1.0)
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def relative_entropy(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    """S(rho||sigma) in bits; ``math.inf`` when supp(rho) is not inside supp(sigma)."""
    a, b = hermitian_part(_mat(rho)), hermitian_part(_mat(sigma))
    if a.shape != b.shape:
        raise LayoutError(f"dimension mismatch {a.shape} vs {b.shape}")
    ws, vs = np.linalg.eigh(b)
    support = ws > tol
    # weight of rho in each eigenvector of sigma
    weights = np.einsum("ik,ij,jk->k", vs.conj(), a, vs).real
    if weights[~support].sum() > tol:
        return math.inf
    cross = float((weights[support] * np.log2(ws[support])).sum())
    return max(0.0, -von_neumann_entropy(a, tol) - cross)


def purify(rho: DensityMatrix, env_label: str = "E") -> PureState:
    """Purification with environment dimension equal to the numerical rank."""
    w, v = np.linalg.eigh(hermitian_part(rho.matrix))
    keep = w > rho.tol
    if not keep.any():
        raise InvalidStateError("cannot purify a numerically zero matrix")
    w, v = w[keep][::-1], v[:, keep][:, ::-1]
    amps = v * np.sqrt(w)  # amps[x, k]: system index x, environment index k
    label = env_label
    while label in rho.layout.labels:
        label += "'"
    layout = rho.layout + SystemLayout((w.size,), (label,))
    return PureState(amps.reshape(-1), layout, rho.tol)


def min_eigenvalue(h: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    h = _mat(h)
    scale = max(1.0, float(np.max(np.abs(h))))
    if float(np.max(np.abs(h - h.conj().T))) > tol * scale:
        raise ValueError("min_eigenvalue needs a Hermitian matrix")
    return float(np.linalg.eigvalsh(hermitian_part(h))[0])


def is_unitary(u: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))) <= tol


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from the induced (Ginibre) measure."""
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_state(
    layout: SystemLayout | Sequence[int], rng: np.random.Generator, rank: int | None = None
) -> DensityMatrix:
    layout = _as_layout(layout)
    return DensityMatrix(random_density(layout.dim, rng, rank), layout)
