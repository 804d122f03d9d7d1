"""Brute-force reference solver.

Pinned against hand-diagonalized one- and two-site problems plus the
momentum-space closed form for uniform rings, so the larger fixtures it
certifies elsewhere rest on something checked by hand.
"""

import math

import numpy as np
import pytest

from cavising.oracle import DenseSpinProblem, exact_expectations, exact_ground


def two_site_grounds(Om0, Om1, J0, J1):
    """Hand result: the two-site ring couples the pair twice.

    Even sector mixes |up,up> and |down,down>:  -sqrt((Om0+Om1)^2 + Jt^2).
    Odd sector mixes the single-flip states:    -sqrt((Om0-Om1)^2 + Jt^2).
    """
    Jt = J0 + J1
    even = -math.sqrt((Om0 + Om1) ** 2 + Jt**2)
    odd = -math.sqrt((Om0 - Om1) ** 2 + Jt**2)
    return even, odd


class TestGroundEnergies:
    def test_single_site(self):
        e, state = exact_ground(DenseSpinProblem(Omega=[0.7], J=[0.0]))
        assert e == pytest.approx(-0.7, abs=1e-14)
        np.testing.assert_allclose(np.abs(state), [1.0, 0.0], atol=1e-14)

    def test_two_sites_by_hand(self):
        rng = np.random.default_rng(2)
        for _ in range(8):
            Om = rng.uniform(0.1, 1.0, 2)
            J = rng.uniform(0.0, 1.0, 2)
            problem = DenseSpinProblem(Omega=Om, J=J)
            even, odd = two_site_grounds(*Om, *J)
            assert exact_ground(problem)[0] == pytest.approx(even, abs=1e-13)
            assert exact_ground(problem, parity=+1)[0] == pytest.approx(even, abs=1e-13)
            assert exact_ground(problem, parity=-1)[0] == pytest.approx(odd, abs=1e-13)

    def test_sparse_path_uniform_ring(self):
        # 11 sites forces the Lanczos branch; the ground energy of a
        # uniform ring is -sum_k sqrt(Om^2 + J^2 - 2 Om J cos k) over the
        # antiperiodic momenta
        N, Om, J = 11, 0.5, 0.3
        k = (2.0 * np.arange(N) + 1.0) * math.pi / N
        expected = -np.sum(np.sqrt(Om**2 + J**2 - 2.0 * Om * J * np.cos(k)))
        e, _ = exact_ground(DenseSpinProblem(Omega=np.full(N, Om), J=np.full(N, J)))
        assert e == pytest.approx(expected, abs=1e-8)

    def test_size_cap(self):
        with pytest.raises(ValueError):
            DenseSpinProblem(Omega=np.ones(15), J=np.ones(15))


class TestParityProjection:
    def test_projected_states_are_parity_eigenstates(self):
        # deep ferromagnet: the lowest doublet is nearly degenerate and a
        # generic eigensolver may hand back arbitrary mixtures
        problem = DenseSpinProblem(Omega=np.full(4, 0.1), J=np.full(4, 2.0))
        basis = np.arange(1 << 4)
        counts = sum((basis >> j) & 1 for j in range(4))
        pvec = np.where(counts % 2 == 0, 1.0, -1.0)
        e_glob, _ = exact_ground(problem)
        for parity in (+1, -1):
            e, state = exact_ground(problem, parity=parity)
            assert np.sum(state * state * pvec) == pytest.approx(parity, abs=1e-10)
            assert np.linalg.norm(state) == pytest.approx(1.0, abs=1e-12)
            assert e >= e_glob - 1e-12
        assert min(
            exact_ground(problem, parity=+1)[0], exact_ground(problem, parity=-1)[0]
        ) == pytest.approx(e_glob, abs=1e-11)

    def test_bad_parity_value(self):
        with pytest.raises(ValueError):
            exact_ground(DenseSpinProblem(Omega=[0.5, 0.5], J=[0.1, 0.1]), parity=2)


class TestExpectations:
    def test_polarized_state(self):
        problem = DenseSpinProblem(Omega=[0.5, 0.5, 0.5], J=[0.0, 0.0, 0.0])
        _, state = exact_ground(problem)
        out = exact_expectations(problem, state, pairs=[(0, 1), (1, 2)])
        np.testing.assert_allclose(out["sigma_z"], 1.0, atol=1e-12)
        np.testing.assert_allclose(out["sigma_x"], 0.0, atol=1e-12)
        # <s^y s^y> factorizes to <s^y><s^y> = 0 in a product state
        assert out["yy"][(0, 1)] == pytest.approx(0.0, abs=1e-12)

    def test_transverse_expectation_vanishes_by_parity(self):
        rng = np.random.default_rng(13)
        problem = DenseSpinProblem(Omega=rng.uniform(0.4, 1.0, 6), J=rng.uniform(0.0, 0.3, 6))
        _, state = exact_ground(problem)
        out = exact_expectations(problem, state)
        np.testing.assert_allclose(out["sigma_x"], 0.0, atol=1e-10)

    def test_yy_is_symmetric_in_the_pair(self):
        rng = np.random.default_rng(17)
        N = 6
        problem = DenseSpinProblem(Omega=rng.uniform(0.1, 1.0, N), J=rng.uniform(0.0, 1.0, N))
        _, state = exact_ground(problem)
        pairs = [(j, n) for j in range(N) for n in range(1, N)]
        out = exact_expectations(problem, state, pairs=pairs)
        for j, n in pairs:
            assert out["yy"][(j, n)] == pytest.approx(
                out["yy"][((j + n) % N, N - n)], abs=1e-12
            )

    def test_lab_frame_rotation(self):
        problem = DenseSpinProblem(Omega=[0.5, 0.5], J=[0.1, 0.1])
        _, state = exact_ground(problem)
        theta = np.array([0.0, math.pi / 2])
        out = exact_expectations(problem, state, theta=theta)
        assert out["sigma_z_lab"][0] == pytest.approx(out["sigma_z"][0], abs=1e-12)
        assert out["sigma_x_lab"][1] == pytest.approx(out["sigma_z"][1], abs=1e-12)

    def test_state_dimension_checked(self):
        problem = DenseSpinProblem(Omega=[0.5, 0.5], J=[0.1, 0.1])
        with pytest.raises(ValueError):
            exact_expectations(problem, np.ones(3))
