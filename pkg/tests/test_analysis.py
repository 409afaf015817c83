import numpy as np
import pytest

from singletsim.analysis import (
    FitInputError,
    NoOscillationError,
    estimate_frequency,
    evaluate_model,
    finite_difference_jacobian,
    fit_exponential,
    fit_lorentzian,
    fit_rabi,
    fit_ramsey,
    spectral_bin_width,
)


def rabi_model(t, amp, freq, off, t_decay, mode="sin2"):
    osc = np.sin(np.pi * freq * t) ** 2 if mode == "sin2" else np.cos(np.pi * freq * t) ** 2
    return amp * (osc + off) * np.exp(-t / t_decay)


def ramsey_model(t, amp, freq, phi, off, t2, ts, sign=1):
    return amp * (sign * np.cos(2 * np.pi * freq * t - phi) * np.exp(-t / t2) + off) * np.exp(-t / ts)


class TestEstimateFrequency:
    def test_pure_cosine(self):
        t = np.arange(0.0, 4.0, 0.02)  # 50 Hz sampling for 4 s
        y = np.cos(2 * np.pi * 2.57 * t + 0.3)
        assert abs(estimate_frequency((t, y)) - 2.57) < 0.02

    def test_constant_trace(self):
        t = np.linspace(0, 1, 64)
        with pytest.raises(NoOscillationError):
            estimate_frequency((t, np.full(64, 0.7)))

    def test_sin_squared_peaks_at_f_not_2f(self):
        t = np.arange(0.0, 4.0, 0.02)
        y = np.sin(np.pi * 2.0 * t) ** 2
        assert abs(estimate_frequency((t, y)) - 2.0) < 0.02

    def test_needs_uniform_sampling(self):
        t = np.array([0.0, 0.1, 0.15, 0.4, 0.5, 0.6, 0.7, 0.8])
        with pytest.raises(FitInputError, match="uniform"):
            estimate_frequency((t, np.sin(t)))

    def test_too_few_samples(self):
        t = np.linspace(0, 1, 5)
        with pytest.raises(FitInputError):
            estimate_frequency((t, np.sin(t)))


class TestNoiselessRoundTrips:
    def test_rabi(self):
        t = np.linspace(0.01, 3.0, 200)
        truth = dict(amp=1.0, freq=2.57, off=0.1, t_decay=1.6)
        y = rabi_model(t, **truth)
        fit = fit_rabi((t, y))
        assert fit.converged
        assert abs(fit.params["amplitude"] - 1.0) < 1e-6
        assert abs(fit.params["frequency_hz"] / 2.57 - 1) < 1e-6
        assert abs(fit.params["offset"] / 0.1 - 1) < 1e-6
        assert abs(fit.params["t_rabi_s"] / 1.6 - 1) < 1e-6

    def test_rabi_cos2_mode(self):
        t = np.linspace(0.01, 3.0, 200)
        y = rabi_model(t, 0.8, 2.0, 0.05, 2.5, mode="cos2")
        fit = fit_rabi((t, y), mode="cos2")
        assert abs(fit.params["frequency_hz"] / 2.0 - 1) < 1e-6

    def test_ramsey(self):
        # parameter point matching the documented coherence measurement
        t = np.linspace(0.01, 8.0, 400)
        y = ramsey_model(t, 1.0, 2.33, np.deg2rad(20.0), 0.2, 1.3, 4.4)
        fit = fit_ramsey((t, y), sign=1)
        assert fit.converged
        for key, value in [
            ("amplitude", 1.0),
            ("frequency_hz", 2.33),
            ("phase_rad", np.deg2rad(20.0)),
            ("offset", 0.2),
            ("t2s_star_s", 1.3),
            ("t_s_s", 4.4),
        ]:
            assert abs(fit.params[key] / value - 1) < 1e-6, key

    def test_ramsey_sign_variants_agree_in_frequency(self):
        t = np.linspace(0.01, 6.0, 300)
        y_plus = ramsey_model(t, 0.9, 2.3, 0.2, 0.1, 1.3, 4.4, sign=1)
        y_minus = ramsey_model(t, 0.9, 2.3, 0.2, 0.1, 1.3, 4.4, sign=-1)
        f_plus = fit_ramsey((t, y_plus), sign=1).params["frequency_hz"]
        f_minus = fit_ramsey((t, y_minus), sign=-1).params["frequency_hz"]
        assert abs(f_plus - f_minus) < 1e-9

    def test_lorentzian(self):
        x = np.linspace(-8.0, 12.0, 81)
        g = (4.3 / 2) ** 2
        y = 0.03 + 0.9 * g / ((x - 2.25) ** 2 + g)
        fit = fit_lorentzian((x, y))
        assert abs(fit.params["center"] / 2.25 - 1) < 1e-6
        assert abs(fit.params["fwhm"] / 4.3 - 1) < 1e-6
        assert abs(fit.params["height"] / 0.9 - 1) < 1e-6

    def test_lorentzian_symmetric_data_centers_midpoint(self):
        x = np.linspace(-5.0, 5.0, 41)
        y = 1.0 / (x**2 + 1.0)
        fit = fit_lorentzian((x, y))
        assert abs(fit.params["center"]) < 1e-9

    def test_exponential(self):
        t = np.linspace(0.0, 1.0, 100)
        y = 1.0 * np.exp(-t / 0.205) + 0.1
        fit = fit_exponential((t, y))
        assert abs(fit.params["t_s"] / 0.205 - 1) < 1e-6
        assert abs(fit.params["amplitude"] / 1.0 - 1) < 1e-6

    def test_two_level_contrast_curve_is_lorentzian(self):
        # transfer contrast vs detuning is exactly Lorentzian with FWHM 4C
        from singletsim.hamiltonian import effective_two_level

        c = 1.285
        detunings = np.linspace(-12.0, 12.0, 97)
        contrast = np.array(
            [effective_two_level(de / 2, -de / 2, c).transfer_contrast for de in detunings]
        )
        fit = fit_lorentzian((detunings, contrast))
        assert abs(fit.params["fwhm"] / (4 * c) - 1) < 1e-6
        assert abs(fit.params["center"]) < 1e-9
        assert abs(fit.params["height"] - 1.0) < 1e-6

    def test_randomized_round_trips(self):
        # every model recovers its own noiseless data over random
        # physical-range parameter draws
        rng = np.random.default_rng(11)
        t = np.linspace(0.01, 4.0, 300)
        for _ in range(10):
            truth = dict(
                amp=rng.uniform(0.3, 2.0),
                freq=rng.uniform(0.8, 6.0),
                off=rng.uniform(0.0, 0.4),
                t_decay=rng.uniform(0.8, 6.0),
            )
            fit = fit_rabi((t, rabi_model(t, **truth)))
            assert abs(fit.params["frequency_hz"] / truth["freq"] - 1) < 1e-6
            assert abs(fit.params["t_rabi_s"] / truth["t_decay"] - 1) < 1e-6
        for _ in range(10):
            amp = rng.uniform(0.3, 2.0)
            freq = rng.uniform(0.8, 4.0)
            phi = rng.uniform(-1.0, 1.0)
            off = rng.uniform(0.0, 0.4)
            t2 = rng.uniform(0.8, 3.0)
            ts = rng.uniform(2.0, 8.0)
            fit = fit_ramsey((t, ramsey_model(t, amp, freq, phi, off, t2, ts)))
            assert abs(fit.params["frequency_hz"] / freq - 1) < 1e-6
            assert abs(fit.params["t2s_star_s"] / t2 - 1) < 1e-6
            assert abs(fit.params["t_s_s"] / ts - 1) < 1e-6
        x = np.linspace(-10.0, 14.0, 97)
        for _ in range(10):
            center = rng.uniform(-2.0, 5.0)
            fwhm = rng.uniform(1.0, 6.0)
            height = rng.uniform(0.3, 2.0)
            base = rng.uniform(-0.2, 0.3)
            y = base + height * (fwhm / 2) ** 2 / ((x - center) ** 2 + (fwhm / 2) ** 2)
            fit = fit_lorentzian((x, y))
            assert abs(fit.params["center"] - center) < 1e-6 * max(1, abs(center))
            assert abs(fit.params["fwhm"] / fwhm - 1) < 1e-6
        te = np.linspace(0.0, 2.0, 200)
        for _ in range(10):
            amp = rng.uniform(0.3, 2.0)
            t_const = rng.uniform(0.1, 1.5)
            off = rng.uniform(-0.2, 0.4)
            fit = fit_exponential((te, amp * np.exp(-te / t_const) + off))
            assert abs(fit.params["t_s"] / t_const - 1) < 1e-6
            assert abs(fit.params["amplitude"] / amp - 1) < 1e-6


class TestDegenerateData:
    def test_flat_rabi_reports_zero_amplitude(self):
        t = np.linspace(0, 1, 50)
        fit = fit_rabi((t, np.full(50, 0.3)))
        assert fit.params["amplitude"] == 0.0
        assert fit.converged

    def test_constant_exponential_reports_zero_amplitude(self):
        t = np.linspace(0, 1, 50)
        fit = fit_exponential((t, np.full(50, 0.4)))
        assert fit.params["amplitude"] == 0.0
        assert abs(fit.params["offset"] - 0.4) < 1e-12

    def test_sample_count_preconditions(self):
        t = np.linspace(0, 1, 6)
        y = np.sin(t)
        with pytest.raises(FitInputError):
            fit_rabi((t, y))
        with pytest.raises(FitInputError):
            fit_ramsey((np.linspace(0, 1, 10), np.sin(np.linspace(0, 1, 10))))
        with pytest.raises(FitInputError):
            fit_lorentzian((t[:4], y[:4]))


class TestAnalyticJacobians:
    # finite differences as the oracle for the analytic Jacobians
    def test_rabi_jacobian(self):
        t = np.linspace(0.01, 3.0, 60)
        p = np.array([0.9, 2.4, 0.15, 0.6])

        def model(x, q):
            return q[0] * (np.sin(np.pi * q[1] * x) ** 2 + q[2]) * np.exp(-q[3] * x)

        def model_and_jac(x, q):
            amp, freq, off, rate = q
            phase = np.pi * freq * x
            osc = np.sin(phase) ** 2
            decay = np.exp(-rate * x)
            m = amp * (osc + off) * decay
            jac = np.column_stack(
                [(osc + off) * decay, amp * np.pi * x * np.sin(2 * phase) * decay, amp * decay, -x * m]
            )
            return m, jac

        _, analytic = model_and_jac(t, p)
        numeric = finite_difference_jacobian(model, t, p)
        assert np.max(np.abs(analytic - numeric)) < 1e-6

    def test_fitted_jacobians_match_finite_differences(self):
        # drive each fitter once and compare its internal model against a
        # finite-difference evaluation through evaluate_model
        t = np.linspace(0.01, 5.0, 200)
        y = ramsey_model(t, 0.7, 1.9, 0.4, 0.1, 1.1, 3.0)
        fit = fit_ramsey((t, y))
        curve = evaluate_model(fit, t)
        assert np.max(np.abs(curve - y)) < 1e-6

        x = np.linspace(-4, 8, 61)
        yl = 0.1 + 0.5 * 1.0 / ((x - 1.5) ** 2 + 1.0)
        fl = fit_lorentzian((x, yl))
        assert np.max(np.abs(evaluate_model(fl, x) - yl)) < 1e-6


class TestFitProperties:
    def test_vertical_scaling_leaves_shape_parameters(self):
        t = np.linspace(0.01, 3.0, 200)
        y = rabi_model(t, 1.0, 2.57, 0.1, 1.6)
        a = fit_rabi((t, y))
        b = fit_rabi((t, 7.3 * y))
        assert abs(a.params["frequency_hz"] - b.params["frequency_hz"]) < 1e-9
        assert abs(a.params["t_rabi_s"] - b.params["t_rabi_s"]) < 1e-7
        assert abs(b.params["amplitude"] / a.params["amplitude"] - 7.3) < 1e-6

    def test_fit_agrees_with_spectral_estimate(self):
        t = np.linspace(0.0, 4.0, 240)
        y = rabi_model(t, 1.0, 2.57, 0.1, 100.0)
        fit = fit_rabi((t, y))
        est = estimate_frequency((t, y))
        assert abs(fit.params["frequency_hz"] - est) <= spectral_bin_width((t, y))

    def test_uncertainty_scales_inversely_with_snr(self):
        t = np.linspace(0.01, 3.2, 240)
        y0 = rabi_model(t, 1.0, 2.57, 0.1, 1.6)
        sigmas = {}
        for snr in (5, 100):
            errs = []
            for seed in range(12):
                noise = np.random.default_rng(seed).normal(0, 1.0 / snr, t.size)
                fit = fit_rabi((t, y0 + noise))
                errs.append(fit.params["frequency_hz"] - 2.57)
            sigmas[snr] = np.std(errs)
        ratio = sigmas[5] / sigmas[100]
        assert 10.0 < ratio < 40.0  # 20x within a factor of 2

    def test_phase_unbiased_at_high_snr(self):
        t = np.linspace(0.01, 6.0, 400)
        y0 = ramsey_model(t, 1.0, 2.33, 0.0, 0.2, 1.3, 4.4)
        for seed in range(5):
            y = y0 + np.random.default_rng(seed).normal(0, 1.0 / 50, t.size)
            fit = fit_ramsey((t, y))
            assert abs(np.rad2deg(fit.params["phase_rad"])) < 2.0

    def test_reported_uncertainty_tracks_ensemble_scatter(self):
        t = np.linspace(0.01, 3.2, 240)
        y0 = rabi_model(t, 1.0, 2.57, 0.1, 1.6)
        reported, observed = [], []
        for seed in range(20):
            y = y0 + np.random.default_rng(seed).normal(0, 0.05, t.size)
            fit = fit_rabi((t, y))
            reported.append(fit.uncertainties["frequency_hz"])
            observed.append(fit.params["frequency_hz"] - 2.57)
        assert 0.3 < np.mean(reported) / np.std(observed) < 3.0
