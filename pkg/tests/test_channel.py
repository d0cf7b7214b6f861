import csv
import math
from dataclasses import replace

import numpy as np
import pytest
import scipy.special

from chanpred.channel import (
    corrupt_to_ls,
    draw_sos_parameters,
    generate_trace,
    jakes_acf,
    jakes_spectrum,
    write_trace_csv,
)
from chanpred.numerics import DomainError, mean_power
from chanpred.wiener import sample_acf


@pytest.fixture(scope="module")
def long_trace():
    return generate_trace(draw_sos_parameters(200, 11), 100.0, 1e-3, 100_000)


class TestSosParameters:
    def test_deterministic(self):
        a, b = draw_sos_parameters(200, 7), draw_sos_parameters(200, 7)
        for name in ("attenuation_i", "attenuation_q", "arrival_angle", "phase", "stationarity_phase"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_gain_moments(self):
        p = draw_sos_parameters(100_000, 1)
        assert abs(p.attenuation_i.mean()) < 0.02
        assert abs(p.attenuation_i.var() - 1.0) < 0.05
        assert abs(p.attenuation_q.var() - 1.0) < 0.05

    def test_angle_uniformity(self):
        p = draw_sos_parameters(100_000, 2)
        assert abs(np.mean(p.arrival_angle < 0) - 0.5) < 0.01
        for arr in (p.arrival_angle, p.phase, p.stationarity_phase):
            assert arr.min() >= -math.pi and arr.max() < math.pi

    def test_zero_paths(self):
        with pytest.raises(DomainError):
            draw_sos_parameters(0, 1)


class TestGenerateTrace:
    def test_zero_doppler_freezes(self):
        tr = generate_trace(draw_sos_parameters(50, 3), 0.0, 1e-3, 64)
        np.testing.assert_array_equal(tr.samples, np.full(64, tr.samples[0]))

    def test_unit_power(self):
        # Realization power is (1/M) sum (A^2 + B^2)/2, so average over seeds.
        powers = [mean_power(generate_trace(draw_sos_parameters(200, s), 100.0, 1e-3, 100_000).samples)
                  for s in range(20)]
        assert np.mean(powers) == pytest.approx(1.0, abs=0.05)
        assert np.std(powers) == pytest.approx(1 / math.sqrt(200), rel=0.5)

    def test_pure(self):
        p = draw_sos_parameters(200, 5)
        a = generate_trace(p, 100, 1e-3, 500).samples
        b = generate_trace(p, 100, 1e-3, 500).samples
        assert a.tobytes() == b.tobytes()

    def test_matches_path_formula(self):
        p = draw_sos_parameters(3, 9)
        tr = generate_trace(p, 40.0, 2e-3, 5)
        n = 4
        total = 0j
        for m in range(3):
            arg = (2 * math.pi * 40.0 * n * 2e-3 + p.stationarity_phase[m]) * math.cos(p.arrival_angle[m]) + p.phase[m]
            total += p.attenuation_i[m] * math.cos(arg) + 1j * p.attenuation_q[m] * math.sin(arg)
        assert tr.samples[n] == pytest.approx(total / math.sqrt(3), abs=1e-14)

    def test_metadata(self):
        tr = generate_trace(draw_sos_parameters(10, 4), 100, 1e-3, 20)
        assert (len(tr), tr.symbol_period, tr.max_doppler, tr.num_sinusoids, tr.seed) == (20, 1e-3, 100, 10, 4)

    @pytest.mark.parametrize("kwargs", [dict(length=0), dict(ts=0.0), dict(fd_max=-1.0)])
    def test_preconditions(self, kwargs):
        args = dict(fd_max=100.0, ts=1e-3, length=10) | kwargs
        with pytest.raises(DomainError):
            generate_trace(draw_sos_parameters(5, 1), **args)

    def test_zero_mean(self, long_trace):
        assert abs(long_trace.samples.mean()) < 0.05

    def test_halves_share_acf(self, long_trace):
        half = len(long_trace) // 2
        a = sample_acf(long_trace.samples[:half], 10).values
        b = sample_acf(long_trace.samples[half:], 10).values
        assert np.max(np.abs(a - b)) < 0.1

    def test_spectrum_support(self):
        seg = 4096
        psd = np.zeros(seg)
        win = np.hanning(seg)
        for seed in range(4):
            h = generate_trace(draw_sos_parameters(200, seed), 100.0, 1e-3, 8 * seg).samples
            for k in range(8):
                psd += np.abs(np.fft.fft(win * h[k * seg : (k + 1) * seg])) ** 2
        f = np.fft.fftfreq(seg, d=1e-3)
        inside = psd[np.abs(f) <= 1.05 * 100.0].sum()
        assert inside / psd.sum() >= 0.99

    def test_negated_phases_keep_power(self):
        powers, flipped = [], []
        for seed in range(20):
            p = draw_sos_parameters(200, seed)
            q = replace(p, phase=-p.phase)
            powers.append(mean_power(generate_trace(p, 100, 1e-3, 5000).samples))
            flipped.append(mean_power(generate_trace(q, 100, 1e-3, 5000).samples))
        assert np.mean(flipped) == pytest.approx(np.mean(powers), abs=0.05)


class TestJakes:
    def test_lag_zero(self):
        assert jakes_acf(0, 100, 1e-3) == 1.0

    def test_lag_one(self):
        assert jakes_acf(1, 100, 1e-3) == pytest.approx(0.9037, abs=1e-4)

    def test_lag_four_negative(self):
        value = jakes_acf(4, 100, 1e-3)
        assert value < 0
        assert value == pytest.approx(scipy.special.j0(2 * math.pi * 0.4), abs=1e-12)

    def test_symmetric_in_lag(self):
        assert jakes_acf(-3, 100, 1e-3) == jakes_acf(3, 100, 1e-3)

    def test_spectrum_values(self):
        assert jakes_spectrum(0, 100) == pytest.approx(1 / (100 * math.pi), rel=1e-12)
        assert jakes_spectrum(50, 100) == pytest.approx(3.6755e-3, abs=1e-7)

    @pytest.mark.parametrize("f", [100.0, -100.0, 150.0])
    def test_spectrum_support_edge(self, f):
        with pytest.raises(DomainError):
            jakes_spectrum(f, 100)

    def test_spectrum_integrates_to_one(self):
        from scipy.integrate import quad

        total, _ = quad(lambda f: jakes_spectrum(f, 100.0), -100, 100, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)


class TestCorruptToLs:
    def test_noiseless(self):
        tr = generate_trace(draw_sos_parameters(50, 1), 100, 1e-3, 100)
        ls = corrupt_to_ls(tr, math.inf, 3)
        np.testing.assert_array_equal(ls.estimates, tr.samples)
        assert ls.noise_variance == 0.0

    def test_unit_power_zero_db(self):
        tr = generate_trace(draw_sos_parameters(50, 1), 100, 1e-3, 100)
        ls = corrupt_to_ls(tr, 0.0, 3)
        assert ls.noise_variance == pytest.approx(mean_power(tr.samples), rel=1e-15)

    def test_noise_power(self, long_trace):
        ls = corrupt_to_ls(long_trace, 10.0, 8)
        noise = ls.estimates - long_trace.samples
        target = 0.1 * mean_power(long_trace.samples)
        assert mean_power(noise) == pytest.approx(target, rel=0.05)
        # circular: both quadratures carry half
        assert np.var(noise.real) == pytest.approx(target / 2, rel=0.05)
        assert np.var(noise.imag) == pytest.approx(target / 2, rel=0.05)

    def test_deterministic(self):
        tr = generate_trace(draw_sos_parameters(50, 1), 100, 1e-3, 100)
        a, b = corrupt_to_ls(tr, 5.0, 2), corrupt_to_ls(tr, 5.0, 2)
        assert a.estimates.tobytes() == b.estimates.tobytes()
        assert corrupt_to_ls(tr, 5.0, 3).estimates.tobytes() != a.estimates.tobytes()


def test_trace_csv_export(tmp_path):
    tr = generate_trace(draw_sos_parameters(10, 1), 100, 1e-3, 4)
    ls = corrupt_to_ls(tr, 10.0, 1)
    write_trace_csv(tmp_path / "a.csv", tr)
    write_trace_csv(tmp_path / "b.csv", tr, ls)
    rows = list(csv.reader(open(tmp_path / "b.csv")))
    assert rows[0] == ["n", "re", "im", "ls_re", "ls_im"]
    assert float(rows[2][1]) == tr.samples[1].real
    assert float(rows[4][4]) == ls.estimates[3].imag
    assert open(tmp_path / "a.csv").readline() == "n,re,im\n"
