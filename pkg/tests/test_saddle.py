import numpy as np
import pytest
from scipy.integrate import quad

from recollide import fields as fl
from recollide import saddle as sd
from recollide.constants import au_to_fs, omega_from_wavelength_nm
from recollide.errors import NoReturn


def wavelength_field(lam):
    return fl.LaserField(e0=0.065, omega=omega_from_wavelength_nm(lam),
                         n_cycles=2)


class TestReturnTime:
    def test_crest_birth_returns_full_cycle(self, f800):
        tc = sd.return_time(f800, 0.0)
        assert tc * f800.omega == pytest.approx(2 * np.pi, abs=1e-10)

    def test_no_return_at_quarter_cycle(self, f800):
        with pytest.raises(NoReturn):
            sd.return_time(f800, 0.5 * np.pi / f800.omega)

    def test_residual_of_return_condition(self, f800):
        w = f800.omega
        for theta_b in (0.05, 0.3, 0.8, 1.3):
            tc = sd.return_time(f800, theta_b / w)
            theta_c = tc * w
            res = (np.cos(theta_b) - np.cos(theta_c)
                   - (theta_c - theta_b) * np.sin(theta_b))
            assert abs(res) < 1e-10

    def test_later_half_cycle(self, f800):
        w = f800.omega
        t_b = np.pi / w + 0.2 / w
        tc = sd.return_time(f800, t_b)
        theta_c = tc * w - np.pi
        theta_b = 0.2
        res = (np.cos(theta_b) - np.cos(theta_c)
               - (theta_c - theta_b) * np.sin(theta_b))
        assert abs(res) < 1e-10


class TestPlateau:
    @pytest.mark.parametrize("lam", [800.0, 1200.0, 1530.0, 1850.0])
    def test_max_return_energy(self, lam):
        f = wavelength_field(lam)
        up = fl.ponderomotive(f)
        ratio = sd.max_return_energy(f) / up
        assert 3.15 <= ratio <= 3.19

    def test_peak_momentum(self, f800):
        p = sd.peak_recollision_momentum(f800)
        assert p == pytest.approx(1.44, abs=0.01)

    def test_dominant_travel_time(self, f800):
        tau = sd.dominant_travel_time(f800, 0.58)
        assert au_to_fs(tau) == pytest.approx(2.0, abs=0.2)
        assert 0.7 <= tau / f800.period <= 0.8


class TestSolveFinalState:
    def test_forbidden_state_empty(self, f800, molecular):
        ev = fl.half_cycle_events(f800)[0]
        e_total = molecular.total_energy(1.2)
        out = sd.solve_final_state(f800, ev, np.array([2.5, 0.0, 0.0]),
                                   e_total, 0, molecular)
        assert out == []

    def test_two_branches_and_residuals(self, f800, molecular):
        ev = fl.half_cycle_events(f800)[0]
        e_total = molecular.total_energy(0.45)
        kf = np.array([-0.9, 0.3, 0.0])
        trajs = sd.solve_final_state(f800, ev, kf, e_total, 2, molecular)
        assert len(trajs) == 2
        assert {t.branch for t in trajs} == {sd.Branch.SHORT, sd.Branch.LONG}
        short = next(t for t in trajs if t.branch is sd.Branch.SHORT)
        long_ = next(t for t in trajs if t.branch is sd.Branch.LONG)
        assert short.travel < long_.travel
        w = f800.omega
        a = f800.e0 / w
        for t in trajs:
            assert t.t_birth < t.t_return
            th_b, th_c = t.t_birth * w, t.t_return * w
            # birth momentum equals -A(t_birth) exactly
            assert t.k_birth[0] == pytest.approx(a * np.sin(th_b), abs=1e-13)
            res_ret = (np.cos(th_b) - np.cos(th_c)
                       - (th_c - th_b) * np.sin(th_b))
            assert abs(res_ret) < 1e-10
            lhs = 0.5 * ((kf[0] - a * np.sin(th_c)) ** 2 + kf[1] ** 2)
            rhs = t.return_energy - molecular.dissociation_energy(e_total, 2)
            assert abs(lhs - rhs) < 1e-10

    def test_count_matches_dense_scan(self, f800, molecular):
        # oracle: count sign changes of the deposit curve on a dense scan
        rmap = sd.return_map()
        ev = fl.half_cycle_events(f800)[0]
        a = f800.e0 / f800.omega
        theta_hi = rmap.theta_travel_cut(sd.TRAVEL_CUT_CYCLES * 2 * np.pi)
        thetas = np.linspace(1e-6, theta_hi, 6000)
        tc = rmap.theta_c(thetas)
        u = a * np.sin(tc)
        for e_rel, kx, kp, n in [(0.25, -0.5, 0.2, 0), (0.45, -1.2, 0.1, 3),
                                 (0.9, 0.5, 0.4, 1), (0.15, -0.2, 0.8, 5)]:
            e_total = molecular.total_energy(e_rel)
            c = (molecular.dissociation_energy(e_total, n) + 0.5 * kp**2)
            f_vals = (0.5 * (a * np.sin(thetas) - u) ** 2
                      - 0.5 * (kx - u) ** 2 - c)
            crossings = int(np.sum(np.sign(f_vals[1:]) * np.sign(f_vals[:-1]) < 0))
            got = len(sd.solve_final_state(
                f800, ev, np.array([kx, kp, 0.0]), e_total, n, molecular))
            assert got == min(crossings, 2)

    def test_branch_coalescence(self, f800, molecular):
        # approaching the deposit maximum the two branches merge; at the
        # turning point they agree to 1e-6 in phase
        rmap = sd.return_map()
        ev = fl.half_cycle_events(f800)[0]
        a = f800.e0 / f800.omega
        kf = np.array([-0.4, 0.0, 0.0])
        theta_hi = rmap.theta_travel_cut(sd.TRAVEL_CUT_CYCLES * 2 * np.pi)
        thetas = np.linspace(1e-6, theta_hi, 4_000_000)
        tc = rmap.theta_c(thetas)
        u = a * np.sin(tc)
        dep = 0.5 * (a * np.sin(thetas) - u) ** 2 - 0.5 * (kf[0] - u) ** 2
        i = int(np.argmax(dep))
        y0, y1, y2 = dep[i - 1], dep[i], dep[i + 1]
        c_max = y1 + 0.125 * (y0 - y2) ** 2 / (2 * y1 - y0 - y2)
        e_n0 = molecular.ion_states[0].energy
        w = f800.omega
        gaps = []
        for eps, n_scan in ((1e-9, 400_000), (1e-11, 2_000_000),
                            (1e-13, 4_000_000)):
            e_total = e_n0 + (c_max - eps)
            trajs = sd.solve_final_state(f800, ev, kf, e_total, 0, molecular,
                                         n_scan=n_scan)
            assert len(trajs) == 2
            gaps.append(abs(trajs[0].t_birth - trajs[1].t_birth) * w)
            gap_c = abs(trajs[0].t_return - trajs[1].t_return) * w
        assert gaps == sorted(gaps, reverse=True)  # branches approach
        assert gaps[-1] < 1e-6
        assert gap_c < 1e-6


class TestVolkovPhase:
    def test_zero_field_zero_momentum(self):
        f = fl.LaserField(e0=1e-12 + 1e-13, omega=0.05, n_cycles=1)
        # tiny amplitude: phase from A is negligible, k = 0 gives zero
        val = sd.volkov_phase(np.zeros(3), 0.0, 50.0, f)
        assert abs(val) < 1e-15

    def test_closed_form_vs_quadrature(self, f800):
        ints = fl.FieldIntegrals(f800)
        k = np.array([0.37, -0.21, 0.1])

        def integrand(t):
            kk = k + fl.vector_potential(f800, t)
            return 0.5 * float(kk @ kk)

        got = sd.volkov_phase(k, 2.0, 2.0 + f800.period, f800, ints)
        ref = quad(integrand, 2.0, 2.0 + f800.period,
                   epsabs=1e-13, epsrel=1e-13, limit=300)[0]
        assert got == pytest.approx(ref, abs=1e-10)

    def test_cycle_average_is_ponderomotive(self, f800):
        val = sd.volkov_phase(np.zeros(3), 0.0, f800.period, f800)
        assert val == pytest.approx(fl.ponderomotive(f800) * f800.period,
                                    rel=1e-12)


class TestTotalPhase:
    def _pair(self, f800, molecular):
        f = fl.LaserField(e0=0.065, omega=f800.omega, n_cycles=3)
        events = fl.half_cycle_events(f)
        e_total = molecular.total_energy(0.4)
        kf = np.array([-0.8, 0.2, 0.0])
        t0 = sd.solve_final_state(f, events[0], kf, e_total, 1, molecular)
        t2 = sd.solve_final_state(f, events[2], kf, e_total, 1, molecular)
        return f, e_total, kf, t0, t2

    def test_phase_difference_observation_time_independent(self, f800, molecular):
        f, e_total, kf, t0, t2 = self._pair(f800, molecular)
        ints = fl.FieldIntegrals(f)
        diffs = []
        for t_obs in (f.duration, 0.8 * f.duration):
            p0 = sd.total_phase(t0[0], kf, e_total, 1, t_obs, 0.0, f,
                                molecular, ints)
            p2 = sd.total_phase(t2[0], kf, e_total, 1, t_obs, 0.0, f,
                                molecular, ints)
            diffs.append(p0 - p2)
        assert diffs[0] == pytest.approx(diffs[1], abs=1e-9)

    def test_single_event_magnitude_unchanged(self, f800, molecular):
        # a pure phase: changing t rotates but never rescales
        f, e_total, kf, t0, _ = self._pair(f800, molecular)
        ints = fl.FieldIntegrals(f)
        vals = [np.exp(1j * sd.total_phase(t0[0], kf, e_total, 1, t_obs, 0.0,
                                           f, molecular, ints))
                for t_obs in (f.duration, 0.6 * f.duration)]
        assert abs(vals[0]) == pytest.approx(abs(vals[1]), rel=1e-12)

    def test_branch_phase_difference_stable_under_tolerance(self, f800,
                                                            molecular):
        ev = fl.half_cycle_events(f800)[0]
        e_total = molecular.total_energy(0.4)
        kf = np.array([-0.9, 0.25, 0.0])
        ints = fl.FieldIntegrals(f800)
        diffs = []
        for xtol in (1e-10, 1e-13):
            trajs = sd.solve_final_state(f800, ev, kf, e_total, 1, molecular,
                                         xtol=xtol)
            ph = [sd.total_phase(t, kf, e_total, 1, f800.duration, 0.0,
                                 f800, molecular, ints) for t in trajs]
            diffs.append(ph[0] - ph[1])
        assert diffs[0] == pytest.approx(diffs[1], abs=1e-8)
