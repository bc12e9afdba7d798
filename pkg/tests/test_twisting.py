import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from pbits.linalg import (
    LayoutError,
    PureState,
    SystemLayout,
    is_unitary,
    min_eigenvalue,
    ptrace_matrix,
    purify,
    random_state,
    trace_norm,
)
from pbits.security import block_norm_key_quality, ccq_from_pure
from pbits.states import gamma_V
from pbits.twisting import (
    Twisting,
    abelian_twisting,
    apply_twisting,
    assemble,
    dephase_key,
    identity_twisting,
    key_blocks,
    privacy_squeeze,
    psq_twisting,
    random_twisting,
    reduced_key_state,
)

L4 = SystemLayout((2, 2, 2, 2), ("A", "B", "A'", "B'"))
seeds = st.integers(0, 2**32 - 1)


def _twist_pure(psi: PureState, t: Twisting) -> PureState:
    """Apply the twisting to the ABA'B' factor of a purification."""
    env = psi.layout.dims[-1]
    u = np.kron(assemble(t), np.eye(env))
    return PureState(u @ psi.amplitudes, psi.layout)


class TestTwisting:
    def test_assemble_is_unitary(self):
        t = random_twisting(2, 2, 4, np.random.default_rng(0))
        assert is_unitary(assemble(t))

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            Twisting(1, 1, {(0, 0): 2 * np.eye(2)})

    def test_apply_matches_dense(self):
        rng = np.random.default_rng(1)
        rho = random_state(L4, rng)
        t = random_twisting(2, 2, 4, rng)
        u = assemble(t)
        assert_allclose(apply_twisting(rho, t).matrix, u @ rho.matrix @ u.conj().T, atol=1e-13)

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(2)
        rho = random_state(L4, rng)
        t = random_twisting(2, 2, 4, rng)
        back = apply_twisting(apply_twisting(rho, t), t.inverse())
        assert_allclose(back.matrix, rho.matrix, atol=1e-13)

    def test_layout_mismatch(self):
        rho = random_state(L4, np.random.default_rng(3))
        with pytest.raises(LayoutError):
            apply_twisting(rho, identity_twisting(2, 2, 2))

    def test_abelian_twisting_phases(self):
        t = abelian_twisting(np.array([[0.0, 1.0], [2.0, 3.0]]))
        assert t.stacked()[3, 0, 0] == pytest.approx(np.exp(3j))


class TestCcqInvariance:
    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_fixed_purification(self, seed):
        # twisting the purification leaves the key distribution and Eve's states untouched
        rng = np.random.default_rng(seed)
        rho = random_state(L4, rng)
        t = random_twisting(2, 2, 4, rng)
        psi = purify(rho)
        a, b = ccq_from_pure(psi), ccq_from_pure(_twist_pure(psi, t))
        assert_allclose(a.p, b.p, atol=1e-12)
        assert trace_norm(a.matrix() - b.matrix()) <= 1e-10

    def test_dephased_key_unchanged_by_twisting(self):
        rng = np.random.default_rng(4)
        rho = random_state(L4, rng)
        t = random_twisting(2, 2, 4, rng)
        a = ptrace_matrix(dephase_key(rho).matrix, rho.layout.dims, [0, 1])
        b = ptrace_matrix(dephase_key(apply_twisting(rho, t)).matrix, rho.layout.dims, [0, 1])
        assert_allclose(a, b, atol=1e-13)


class TestPrivacySqueezing:
    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_corner_becomes_block_norm(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_state(L4, rng)
        t = psq_twisting(rho)
        blk = key_blocks(apply_twisting(rho, t))[0, 0, 1, 1]
        assert min_eigenvalue((blk + blk.conj().T) / 2) >= -1e-12
        assert_allclose(blk, blk.conj().T, atol=1e-12)
        sq = privacy_squeeze(rho)
        assert sq.matrix[0, 3].real == pytest.approx(block_norm_key_quality(rho), abs=1e-12)
        assert sq.is_valid(1e-10)

    def test_reduced_key_state_matches_dense(self):
        rng = np.random.default_rng(5)
        rho = random_state(L4, rng)
        t = random_twisting(2, 2, 4, rng)
        dense = ptrace_matrix(apply_twisting(rho, t).matrix, rho.layout.dims, [0, 1])
        assert_allclose(reduced_key_state(rho, t).matrix, dense, atol=1e-13)

    def test_full_mode_squeezes_second_block(self):
        rho = random_state(L4, np.random.default_rng(6))
        sq = privacy_squeeze(rho, full=True)
        blk = key_blocks(rho)[0, 1, 1, 0]
        assert abs(sq.matrix[1, 2]) == pytest.approx(trace_norm(blk), abs=1e-12)

    def test_gamma_v_squeezes_to_singlet(self):
        sq = privacy_squeeze(gamma_V(2)).matrix
        assert sq[0, 3].real == pytest.approx(0.5)
        assert sq[0, 0].real == pytest.approx(0.5)

    def test_needs_qubit_key(self):
        rho = random_state(SystemLayout((3, 3, 2), ("A", "B", "A'")), np.random.default_rng(7))
        with pytest.raises(LayoutError):
            psq_twisting(rho)
