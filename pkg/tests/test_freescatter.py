import numpy as np
import pytest

from recollide import freescatter as fs
from recollide import impact as imp
from recollide import sfa
from recollide import spectra as sp
from recollide.constants import M_ION_D2P, fs_to_au
from recollide.errors import ClosedChannel


@pytest.fixture(scope="module")
def channels(molecular):
    return sfa.select_channels(molecular)


@pytest.fixture(scope="module")
def engine(molecular, model, channels):
    grids = sp.SpectrumGrids.default(n_e=40, n_par=48, n_perp=24)
    return fs.FieldFreeEngine(molecular, model, grids, channels=channels)


def make_spec(frame, coeffs, channels, tau=0.0, **kw):
    defaults = dict(rel_center=1.5, rel_width=0.5, com_center=0.0,
                    com_width=1.0)
    defaults.update(kw)
    return fs.WavePacketSpec(frame, defaults["rel_center"],
                             defaults["rel_width"], defaults["com_center"],
                             defaults["com_width"], coeffs, tuple(channels),
                             tau)


class TestFrameTransforms:
    def test_trivial_points(self):
        big_k, k = fs.lab_to_relative(0.0, 0.0)
        assert big_k == 0.0 and k == 0.0
        big_k, k = fs.lab_to_relative(1.5, -1.5, m_ion=1234.5)
        assert big_k == pytest.approx(0.0)
        assert k == pytest.approx(1.5, rel=1e-3)

    def test_round_trip(self, rng):
        p = rng.normal(size=(64,))
        P = rng.normal(size=(64,))
        big_k, k = fs.lab_to_relative(p, P)
        p2, P2 = fs.relative_to_lab(big_k, k)
        np.testing.assert_allclose(p2, p, rtol=0, atol=1e-14)
        np.testing.assert_allclose(P2, P, rtol=0, atol=1e-14)

    def test_rejects_bad_mass(self):
        with pytest.raises(ValueError):
            fs.lab_to_relative(1.0, 1.0, m_ion=0.0)


class TestVibCoeffs:
    def test_zero_delay_real_nonnegative(self, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, 0.0, channels=channels)
        assert np.all(np.abs(a.imag) < 1e-14)
        assert np.all(a.real >= 0)

    def test_tunneling_suppression_ordering(self, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, 0.0, channels=channels)
        fc = molecular.fc_matrix[channels, 0]
        ratio = np.abs(a) / np.abs(fc)
        assert np.all(np.diff(ratio) < 0)

    def test_beat_period_restores_relative_phase(self, molecular, channels):
        e = molecular.ion_energies
        period = 2 * np.pi / (e[1] - e[0])
        a1, _ = fs.vib_coeffs_recollision(molecular, 3.0, channels=channels)
        a2, _ = fs.vib_coeffs_recollision(molecular, 3.0 + period,
                                          channels=channels)
        r1 = a1[1] / a1[0]
        r2 = a2[1] / a2[0]
        assert r1 == pytest.approx(r2, rel=1e-9)

    def test_normalized(self, molecular, channels):
        a, norm2 = fs.vib_coeffs_recollision(molecular, 1.0, channels=channels)
        assert np.sum(np.abs(a) ** 2) == pytest.approx(1.0)
        assert norm2 > 0


class TestWavePacketSpec:
    def test_peak_value(self, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, 0.0, channels=channels)
        spec = make_spec(fs.Frame.RELATIVE_COM, a, channels)
        peak = fs.initial_projection(spec, 0, 1.5, 0.0)
        expect = spec.vib_coeffs[0] / np.sqrt(np.pi * 0.5 * 1.0)
        assert peak == pytest.approx(expect, rel=1e-12)

    def test_gaussian_tails(self, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, 0.0, channels=channels)
        spec = make_spec(fs.Frame.RELATIVE_COM, a, channels)
        peak = abs(fs.initial_projection(spec, 1, 1.5, 0.0))
        far = abs(fs.initial_projection(spec, 1, 1.5 + 5 * 0.5, 0.0))
        assert far < 1e-5 * peak

    def test_lab_frame_moments_against_quadrature(self, molecular, channels):
        # the analytic lab->relative Gaussian matches brute-force 2-d
        # quadrature moments of |psi|^2 through the exact Jacobian map
        a, _ = fs.vib_coeffs_recollision(molecular, 0.0, channels=channels)
        spec = make_spec(fs.Frame.LAB, a, channels, rel_center=1.5,
                         rel_width=0.5, com_center=0.0, com_width=1.0)
        k = np.linspace(-2.0, 5.0, 401)
        big_k = np.linspace(-6.0, 9.0, 401)
        kk, bb = np.meshgrid(k, big_k, indexing="ij")
        w = np.abs(spec.psi(kk, bb)) ** 2
        norm = np.trapezoid(np.trapezoid(w, big_k, axis=1), k)
        mean_k = np.trapezoid(np.trapezoid(w * kk, big_k, axis=1), k) / norm
        var_k = np.trapezoid(np.trapezoid(w * (kk - mean_k) ** 2, big_k,
                                          axis=1), k) / norm
        c, width = spec.relative_marginal
        assert norm == pytest.approx(1.0, rel=1e-6)
        assert mean_k == pytest.approx(c, abs=1e-6)
        # |psi|^2 width is sigma/sqrt(2) for the e^{-x^2/sigma^2} profile
        assert np.sqrt(var_k) == pytest.approx(width / np.sqrt(2), rel=1e-6)

    def test_width_validation(self, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, 0.0, channels=channels)
        with pytest.raises(ValueError):
            make_spec(fs.Frame.LAB, a, channels, rel_width=-0.5)


class TestOnShellMomentum:
    def test_identities(self, molecular):
        e0 = molecular.ion_states[0].energy
        val = fs.k_i0(molecular, e0, 0, np.array([1.0, 0.0, 0.0]))
        assert val == pytest.approx(1.0)
        # deposit equal to the outgoing kinetic energy: sqrt(2) scaling
        kf = np.array([0.8, 0.0, 0.0])
        e_total = e0 + 0.5 * float(kf @ kf)
        assert fs.k_i0(molecular, e_total, 0, kf) == \
            pytest.approx(np.sqrt(2.0) * 0.8)

    def test_channel_threshold(self, molecular):
        e0 = molecular.ion_states[0].energy
        kf = np.zeros(3)
        with pytest.raises(ClosedChannel):
            fs.k_i0(molecular, e0 - 1e-6, 0, kf)


class TestScatteredProjection:
    def test_single_channel_proportionality(self, molecular, model, channels):
        coeffs = np.zeros(len(channels), dtype=complex)
        coeffs[2] = 1.0
        spec = make_spec(fs.Frame.RELATIVE_COM, coeffs, channels)
        kf = np.array([0.5, 0.3, 0.0])
        e_rel = 0.4
        got = fs.scattered_projection(spec, molecular, model, e_rel, 1, kf, 0.0)
        e_total = molecular.total_energy(e_rel)
        ki = fs.k_i0(molecular, e_total, channels[2], kf)
        m = imp.vee_matrix_element(model, molecular, e_rel, 1, channels[2],
                                   np.array([ki, 0, 0]), kf)
        expect = (2 * np.pi / ki) * m * fs.initial_projection(spec, 2, ki, 0.0)
        assert got == pytest.approx(expect, rel=1e-12)

    def test_two_channel_interference(self, molecular, model, channels):
        kf = np.array([0.45, 0.25, 0.0])
        e_rel = 0.42
        outs = {}
        for sign in (1.0, -1.0):
            coeffs = np.zeros(len(channels), dtype=complex)
            coeffs[0] = 1.0
            coeffs[1] = sign
            spec = make_spec(fs.Frame.RELATIVE_COM, coeffs, channels)
            outs[sign] = fs.scattered_projection(spec, molecular, model,
                                                 e_rel, 1, kf, 0.0)
        assert abs(outs[1.0]) != pytest.approx(abs(outs[-1.0]), rel=1e-3)
        # the sign-independent incoherent sum: |a+b|^2 + |a-b|^2 = 2(|a|^2+|b|^2)
        singles = []
        for idx in (0, 1):
            coeffs = np.zeros(len(channels), dtype=complex)
            coeffs[idx] = 1.0
            spec = make_spec(fs.Frame.RELATIVE_COM, coeffs, channels)
            singles.append(fs.scattered_projection(spec, molecular, model,
                                                   e_rel, 1, kf, 0.0))
        lhs = abs(outs[1.0]) ** 2 + abs(outs[-1.0]) ** 2
        rhs = abs(singles[0]) ** 2 + abs(singles[1]) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_degenerate_pathways_share_final_cell(self, molecular, model,
                                                  channels):
        # both channels contribute on-shell to the same (E, J, k_f) cell
        kf = np.array([0.45, 0.25, 0.0])
        e_rel = 0.42
        for idx in (0, 1):
            coeffs = np.zeros(len(channels), dtype=complex)
            coeffs[idx] = 1.0
            spec = make_spec(fs.Frame.RELATIVE_COM, coeffs, channels)
            val = fs.scattered_projection(spec, molecular, model, e_rel, 1,
                                          kf, 0.0)
            assert abs(val) > 0

    def test_com_diagonality(self, molecular, model, channels):
        # the scattered amplitude carries the initial COM profile untouched
        a, _ = fs.vib_coeffs_recollision(molecular, 2.0, channels=channels)
        spec = make_spec(fs.Frame.RELATIVE_COM, a, channels)
        kf = np.array([0.5, 0.2, 0.0])
        v1 = fs.scattered_projection(spec, molecular, model, 0.4, 1, kf, 0.3)
        v2 = fs.scattered_projection(spec, molecular, model, 0.4, 1, kf, -0.8)
        ratio = spec.psi(1.0, 0.3) / spec.psi(1.0, -0.8)  # k-part cancels
        assert v1 / v2 == pytest.approx(ratio, rel=1e-12)


class TestYields:
    def test_com_parameters_do_not_matter(self, engine, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, fs_to_au(2.0),
                                         channels=channels)
        r1 = engine.yields(make_spec(fs.Frame.RELATIVE_COM, a, channels))
        r2 = engine.yields(make_spec(fs.Frame.RELATIVE_COM, a, channels,
                                     com_center=4.0, com_width=0.25))
        np.testing.assert_allclose(r1.w_e, r2.w_e, rtol=1e-12)

    def test_member_columns_match_yields(self, engine, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, fs_to_au(2.0),
                                         channels=channels)
        spec = make_spec(fs.Frame.RELATIVE_COM, a, channels)
        res = engine.yields(spec)
        cols = engine.member_columns(spec, a[:, None])
        dens = np.abs(cols[0]) ** 2
        w_e = np.einsum("ejkp,kp->e", dens, engine.grids.kf.weights)
        np.testing.assert_allclose(w_e, res.w_e, rtol=1e-12)

    def test_lab_vs_relative_peak_positions(self, engine, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, fs_to_au(2.0),
                                         channels=channels)
        r_rel = engine.yields(make_spec(fs.Frame.RELATIVE_COM, a, channels))
        r_lab = engine.yields(make_spec(fs.Frame.LAB, a, channels))
        cell = r_rel.e_d_ev[1] - r_rel.e_d_ev[0]
        assert abs(r_rel.peak_e_d_ev() - r_lab.peak_e_d_ev()) < cell

    def test_matched_marginals(self, molecular, channels):
        a, _ = fs.vib_coeffs_recollision(molecular, 0.0, channels=channels)
        lab = make_spec(fs.Frame.LAB, a, channels)
        c, width = lab.relative_marginal
        assert c == pytest.approx(1.5, rel=1e-3)
        assert width == pytest.approx(0.5, rel=1e-3)
