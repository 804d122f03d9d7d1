"""Energy surface and amplitude search."""

import numpy as np
import pytest

from cavising.meanfield import (
    SearchSpec,
    energy_per_particle,
    minimize_phi,
    order_parameter_residual,
    stationary_points,
)
from cavising.model import ChainSpec, IsingProfile, ModeSet, effective_field
from cavising.oracle import DenseSpinProblem, exact_ground


def desk_chain(J_max=0.026, J_min=0.001):
    return ChainSpec(
        N=40, E_z=0.1, E_c=8.0, ising=IsingProfile.rectangular(J_max, J_min, 2)
    )


# located during calibration of the 40-site configuration above, mode 2
DESK_LAMBDA_C = 0.22544

QUICK = SearchSpec(coarse_points=61)


class TestEnergy:
    def test_decoupled_value(self):
        chain = ChainSpec(N=12, E_z=0.8, E_c=8.0, ising=IsingProfile.uniform(0.0))
        ms = ModeSet(modes=(1,), lambda0=0.0, N=12, E_c=8.0)
        assert energy_per_particle(chain, ms, [0.0]) == pytest.approx(-0.4, abs=1e-14)

    def test_field_part_is_quadratic(self):
        chain = ChainSpec(N=10, E_z=0.6, E_c=8.0, ising=IsingProfile.uniform(0.0))
        ms = ModeSet(modes=(2,), lambda0=0.0, N=10, E_c=8.0)
        # with lambda0 = 0 the chain term is phi-independent
        e0 = energy_per_particle(chain, ms, [0.0])
        for phi in (0.3, 0.7):
            expected = e0 + (ms.frequencies[0] + 4.0 * ms.D[0]) * phi**2
            assert energy_per_particle(chain, ms, [phi]) == pytest.approx(expected, abs=1e-13)

    def test_against_brute_force(self):
        # e_g must equal the field quadratic plus the exact even-sector
        # spin energy per site
        rng = np.random.default_rng(41)
        for _ in range(5):
            N = int(rng.integers(3, 8))
            chain = ChainSpec(
                N=N,
                E_z=rng.uniform(0.3, 1.0),
                E_c=8.0,
                ising=IsingProfile.explicit(rng.uniform(0.0, 0.6, N)),
            )
            ms = ModeSet(modes=(1,), lambda0=rng.uniform(0.0, 0.7), N=N, E_c=8.0)
            phi = rng.uniform(0.0, 0.8, 1)
            fld = effective_field(chain, ms, phi)
            e_spin, _ = exact_ground(DenseSpinProblem(Omega=fld.Omega, J=chain.bonds()), parity=+1)
            field_part = float(np.sum((ms.frequencies + 4.0 * ms.D) * phi * phi))
            assert energy_per_particle(chain, ms, phi) == pytest.approx(
                field_part + e_spin / N, abs=1e-12
            )


class TestMinimize:
    def test_zero_coupling_stays_normal(self):
        chain = desk_chain()
        ms = ModeSet(modes=(2,), lambda0=0.0, N=40, E_c=8.0)
        state = minimize_phi(chain, ms, QUICK)
        assert state.phi[0] == 0.0
        assert not state.degenerate

    def test_below_onset(self):
        chain = desk_chain()
        ms = ModeSet(modes=(2,), lambda0=DESK_LAMBDA_C - 0.06, N=40, E_c=8.0)
        state = minimize_phi(chain, ms, QUICK)
        assert state.phi[0] == 0.0
        np.testing.assert_array_equal(state.Sigma_x, 0.0)

    def test_above_onset(self):
        chain = desk_chain()
        ms = ModeSet(modes=(2,), lambda0=DESK_LAMBDA_C + 0.06, N=40, E_c=8.0)
        state = minimize_phi(chain, ms, QUICK)
        assert state.phi[0] > 0.02
        assert state.e_g < energy_per_particle(chain, ms, [0.0]) - 1e-8
        np.testing.assert_allclose(
            state.Sigma_x, state.phi * (ms.frequencies + 4.0 * ms.D), atol=1e-14
        )

    def test_minimizer_is_self_consistent(self):
        chain = desk_chain()
        ms = ModeSet(modes=(2,), lambda0=DESK_LAMBDA_C + 0.06, N=40, E_c=8.0)
        state = minimize_phi(chain, ms, QUICK)
        resid = order_parameter_residual(chain, ms, state.phi)
        assert float(np.max(resid)) < 1e-4

    def test_residual_nonzero_off_stationarity(self):
        chain = desk_chain()
        ms = ModeSet(modes=(2,), lambda0=DESK_LAMBDA_C + 0.06, N=40, E_c=8.0)
        resid = order_parameter_residual(chain, ms, [0.4])
        assert float(np.max(resid)) > 1e-3

    def test_multimode_joint_condensate(self):
        # just above the mode-2 onset the joint minimizer is mode-2
        # dominated, but the neighbors pick up real admixture through the
        # profile overlaps (the cos(l pi j / N) rows are not orthogonal
        # under the ring sum), so the joint state undercuts every
        # single-channel energy and must still be stationary
        chain = desk_chain()
        lam = DESK_LAMBDA_C + 0.003
        single = minimize_phi(chain, ModeSet(modes=(2,), lambda0=lam, N=40, E_c=8.0), QUICK)
        multi_search = SearchSpec(multi_coarse_points=7, line_points=21, n_seeds=2)
        ms = ModeSet(modes=(1, 2, 3), lambda0=lam, N=40, E_c=8.0)
        multi = minimize_phi(chain, ms, multi_search)
        assert single.phi[0] > 0.01
        assert int(np.argmax(np.abs(multi.phi))) == 1
        assert multi.phi[1] > 0.01
        assert multi.e_g <= single.e_g + 1e-12
        resid = order_parameter_residual(chain, ms, multi.phi)
        assert float(np.max(resid)) < 1e-4
        again = minimize_phi(chain, ms, multi_search)
        np.testing.assert_array_equal(again.phi, multi.phi)

    def test_multimode_zero_coupling(self):
        chain = ChainSpec(N=8, E_z=0.8, E_c=8.0, ising=IsingProfile.uniform(0.1))
        ms = ModeSet(modes=(1, 2), lambda0=0.0, N=8, E_c=8.0)
        search = SearchSpec(multi_coarse_points=5, line_points=11, n_seeds=2)
        state = minimize_phi(chain, ms, search)
        np.testing.assert_array_equal(state.phi, 0.0)

    def test_boundary_warning(self):
        chain = desk_chain()
        ms = ModeSet(modes=(2,), lambda0=DESK_LAMBDA_C + 0.08, N=40, E_c=8.0)
        tight = SearchSpec(phi_max=0.02, coarse_points=21)
        with pytest.warns(RuntimeWarning):
            state = minimize_phi(chain, ms, tight)
        assert state.phi[0] >= 0.015


class TestStationaryPoints:
    def test_below_onset_single_minimum(self):
        chain = desk_chain()
        ms = ModeSet(modes=(2,), lambda0=DESK_LAMBDA_C - 0.06, N=40, E_c=8.0)
        pts = stationary_points(chain, ms, QUICK)
        minima = [p for p in pts if p.kind == "minimum"]
        assert len(minima) == 1
        assert minima[0].phi == 0.0
        assert minima[0].is_global

    def test_above_onset_origin_destabilizes(self):
        chain = desk_chain()
        ms = ModeSet(modes=(2,), lambda0=DESK_LAMBDA_C + 0.06, N=40, E_c=8.0)
        pts = stationary_points(chain, ms, QUICK)
        at_zero = [p for p in pts if p.phi == 0.0]
        assert at_zero and at_zero[0].kind == "maximum"
        winners = [p for p in pts if p.is_global]
        assert len(winners) == 1
        assert winners[0].phi > 0.02
        assert winners[0].kind == "minimum"

    def test_multimode_rejected(self):
        chain = desk_chain()
        ms = ModeSet(modes=(1, 2), lambda0=0.2, N=40, E_c=8.0)
        with pytest.raises(ValueError):
            stationary_points(chain, ms)


class TestSearchSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SearchSpec(phi_max=0.0)
        with pytest.raises(ValueError):
            SearchSpec(coarse_points=2)
        with pytest.raises(ValueError):
            SearchSpec(line_points=1)
