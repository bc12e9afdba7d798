"""Invariant groups run by ``pbits verify``.

Each check takes a seeded generator and a tolerance and returns True on
pass. Residual-style checks compare against ``tol`` directly, so a tiny
tolerance (well below double precision) makes them fail on purpose.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from . import family, linalg, rates, security, states, twisting
from .linalg import DensityMatrix, SystemLayout


@dataclass(frozen=True)
class GroupResult:
    name: str
    passed: int
    total: int
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.passed == self.total


Check = Callable[[np.random.Generator, float], bool]

_L4 = SystemLayout((2, 2, 2, 2), ("A", "B", "A'", "B'"))


def _random_keyed(rng, shield=(2, 2)) -> DensityMatrix:
    return linalg.random_state(SystemLayout((2, 2) + shield, ("A", "B", "A'", "B'")), rng)


def _ccq_distance(a: security.CcqEnsemble, b: security.CcqEnsemble) -> float:
    # compare through Eve-basis-independent quantities: p and the pairwise fidelities
    dp = float(np.abs(a.p - b.p).sum())
    gaps = [abs(linalg.fidelity(a.eve[x], a.eve[y]) - linalg.fidelity(b.eve[x], b.eve[y]))
            for x in a.outcomes() for y in a.outcomes()]
    return dp + max(gaps, default=0.0)


# linalg ------------------------------------------------------------------------


def _ptrace_product(rng, tol):
    a, b = linalg.random_density(2, rng), linalg.random_density(3, rng)
    return float(np.abs(linalg.ptrace_matrix(np.kron(a, b), [2, 3], [0]) - a).max()) <= tol


def _trace_norm_oracle(rng, tol):
    h = linalg.hermitian_part(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    return abs(linalg.trace_norm(h) - float(np.abs(np.linalg.eigvalsh(h)).sum())) <= tol


def _pt_involution(rng, tol):
    rho = linalg.random_state(_L4, rng)
    twice = linalg.partial_transpose(rho.pt(), _L4, [1, 3])
    return float(np.abs(twice - rho.matrix).max()) <= tol


def _purify_roundtrip(rng, tol):
    rho = linalg.random_state((2, 3), rng, rank=2)
    psi = linalg.purify(rho)
    back = linalg.ptrace_matrix(linalg.proj(psi.amplitudes), psi.layout.dims, [0, 1])
    return psi.layout.dims[-1] == 2 and float(np.abs(back - rho.matrix).max()) <= tol


def _entropy_max_mixed(rng, tol):
    return abs(linalg.von_neumann_entropy(np.eye(8) / 8) - 3) <= tol


# states --------------------------------------------------------------------------


def _named_states_valid(rng, tol):
    cands = [states.gamma_V(2), states.flower(2), states.werner_sym(3), states.werner_asym(3),
             family.family_state(0.3, 2, 1)]
    return all(s.is_valid(tol) for s in cands)


def _max_entangled_pt(rng, tol):
    return all(abs(linalg.min_eigenvalue(states.max_entangled(d).pt()) + 1 / d) <= tol for d in (2, 3))


def _x_form_matches(rng, tol):
    a = states.gamma_V(2).matrix
    b = states.pbit_from_X(states.XFormPbit(states.swap_operator(2) / 4)).matrix
    return float(np.abs(a - b).max()) <= tol


# twisting -----------------------------------------------------------------------


def _ccq_invariance(rng, tol):
    rho = _random_keyed(rng)
    t = twisting.random_twisting(2, 2, 4, rng)
    return _ccq_distance(security.ccq_of(rho), security.ccq_of(twisting.apply_twisting(rho, t))) <= tol


def _twist_inverse(rng, tol):
    rho = _random_keyed(rng)
    t = twisting.random_twisting(2, 2, 4, rng)
    back = twisting.apply_twisting(twisting.apply_twisting(rho, t), t.inverse())
    return float(np.abs(back.matrix - rho.matrix).max()) <= tol


def _squeeze_block_norm(rng, tol):
    rho = _random_keyed(rng)
    sq = twisting.privacy_squeeze(rho)
    return abs(abs(sq.matrix[0, 3]) - security.block_norm_key_quality(rho)) <= tol


# security -----------------------------------------------------------------------


def _pdit_has_key(rng, tol):
    sigma = linalg.random_state(SystemLayout((2, 2), ("A'", "B'")), rng)
    spec = states.PditSpec(2, sigma, [linalg.random_unitary(4, rng) for _ in range(2)])
    c = security.ccq_of(states.pdit_from_spec(spec))
    return security.has_B_key(c, tol)


def _criteria_hold(rng, tol):
    e = int(rng.integers(1, 5))
    lay = SystemLayout((2, 2, e), ("A", "B", "E"))
    c = security.ccq_from_pure(linalg.PureState(linalg.random_pure_vector(lay.dim, rng), lay))
    return security.criteria_bounds(c, tol).all_hold()


def _eve_block_identity(rng, tol):
    rho = _random_keyed(rng, (2, 1))
    return security.eve_block_representation(rho).max_discrepancy <= tol


# family -------------------------------------------------------------------------


def _recurrence_exact(rng, tol):
    fs = family.family_state(0.3, 2, 1)
    got, prob = family.recurrence_round(fs, fs)
    ref = family.recurrence_output(0.3, 2, 1, 2)
    return float(np.abs(got.matrix - ref.matrix).max()) <= tol and abs(prob - 0.26) <= tol


def _structured_matches_dense(rng, tol):
    p = float(rng.uniform(0.05, 0.5))
    out = family.recurrence_output(p, 2, 1, 2)
    sr = family.structured_recurrence(p, 2, 1, 2)
    sq = twisting.privacy_squeeze(out).matrix
    return (abs(security.block_norm_key_quality(out) - sr.block_norm) <= tol
            and float(np.abs(sq - sr.squeezed_state()).max()) <= tol)


def _ppt_agreement(rng, tol):
    ok = True
    for p, d, k in ((0.3, 2, 1), (0.3, 2, 2), (0.1, 3, 1), (0.33, 2, 1)):
        numeric = linalg.min_eigenvalue(family.family_state(p, d, k).pt()) >= -tol
        ok &= numeric == family.ppt_condition(p, d, k)
    return bool(ok)


# rates --------------------------------------------------------------------------


def _dw_basic_pdit(rng, tol):
    sigma = linalg.random_state(SystemLayout((2, 2), ("A'", "B'")), rng)
    return abs(rates.dw_rate(security.ccq_of(states.basic_pdit(2, sigma))) - 1) <= tol


def _log_negativity_gamma(rng, tol):
    return abs(rates.log_negativity(states.gamma_V(2)) - math.log2(1.5)) <= tol


def _er_gamma(rng, tol):
    b = rates.certified_er_upper_bound(states.gamma_V(2))
    return b is not None and abs(b.value - 1) <= tol and b.irreducible


GROUPS: dict[str, list[tuple[str, Check, int]]] = {
    "linalg": [
        ("ptrace_product", _ptrace_product, 5),
        ("trace_norm_oracle", _trace_norm_oracle, 5),
        ("pt_involution", _pt_involution, 5),
        ("purify_roundtrip", _purify_roundtrip, 5),
        ("entropy_max_mixed", _entropy_max_mixed, 1),
    ],
    "states": [
        ("named_states_valid", _named_states_valid, 1),
        ("max_entangled_pt", _max_entangled_pt, 1),
        ("x_form_matches", _x_form_matches, 1),
    ],
    "twisting": [
        ("ccq_invariance", _ccq_invariance, 10),
        ("twist_inverse", _twist_inverse, 5),
        ("squeeze_block_norm", _squeeze_block_norm, 5),
    ],
    "security": [
        ("pdit_has_key", _pdit_has_key, 5),
        ("criteria_hold", _criteria_hold, 20),
        ("eve_block_identity", _eve_block_identity, 5),
    ],
    "family": [
        ("recurrence_exact", _recurrence_exact, 1),
        ("structured_matches_dense", _structured_matches_dense, 3),
        ("ppt_agreement", _ppt_agreement, 1),
    ],
    "rates": [
        ("dw_basic_pdit", _dw_basic_pdit, 3),
        ("log_negativity_gamma", _log_negativity_gamma, 1),
        ("er_gamma", _er_gamma, 1),
    ],
}


def run_group(name: str, seed: int = 0, tol: float = linalg.DEFAULT_TOL) -> GroupResult:
    rng = np.random.default_rng([seed, sorted(GROUPS).index(name)])
    passed, total, failures = 0, 0, []
    for label, check, reps in GROUPS[name]:
        for r in range(reps):
            total += 1
            note = ""
            try:
                ok = bool(check(rng, tol))
            except (ValueError, ArithmeticError) as exc:
                ok, note = False, f" ({type(exc).__name__}: {exc})"
            if ok:
                passed += 1
            else:
                failures.append(f"{label}#{r}{note}")
    return GroupResult(name, passed, total, tuple(failures))


def run_all(seed: int = 0, tol: float = linalg.DEFAULT_TOL) -> list[GroupResult]:
    return [run_group(name, seed, tol) for name in GROUPS]
