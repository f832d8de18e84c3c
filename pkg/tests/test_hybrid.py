import math

import numpy as np
import pytest
from scipy.special import i0, i1
from scipy.stats import chisquare

from helpers import KUIPER_CRIT_01, kuiper_uniform_pvalue_bound, meeting_room_scene
from thzchan.hybrid import (
    LABEL_NAMES,
    LOS,
    NONRT_CENTER,
    NONRT_SUBPATH,
    RT_CENTER,
    RT_SUBPATH,
    HybridModelParams,
    SubpathParams,
    amplitude_from_law,
    materialize_phases,
    realization_to_csv,
    sample_arrival_offsets,
    sample_cluster_count,
    sample_subpath_count,
    sample_von_mises,
    synthesize_channel,
)
from thzchan.units import SPEED_OF_LIGHT


class TestClusterCount:
    @pytest.mark.parametrize("d,expected", [(1.43, 9), (7.12, 3), (9.5, 0), (11.0, 0)])
    def test_line_with_ceiling_and_clamp(self, d, expected):
        assert sample_cluster_count(d) == expected

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            sample_cluster_count(0.0)


class TestSubpathCount:
    def test_degenerate_sigma_zero(self, rng):
        p = SubpathParams(2.07, 0.0, 1.0, 0.0, 0.0, 0.5, -0.1)
        counts = {sample_subpath_count(p, rng) for _ in range(32)}
        assert counts == {8}   # round(e^2.07)

    def test_lognormal_parameters_recovered(self, rng):
        # non-RT post-cursor row: mu=2.07, sigma=1.03
        p = SubpathParams(2.07, 1.03, 1.0, 0.0, 0.0, 0.5, -0.1)
        draws = np.array([sample_subpath_count(p, rng) for _ in range(100_000)])
        logs = np.log(draws[draws > 0])
        assert abs(logs.mean() - 2.07) / 2.07 < 0.02

    def test_log_std_recovered_heavy_tail(self, rng):
        # RT post-cursor row: mu=4, sigma=1.59
        p = SubpathParams(4.0, 1.59, 1.0, 0.0, 0.0, 0.5, -0.1)
        draws = np.array([sample_subpath_count(p, rng) for _ in range(100_000)])
        logs = np.log(draws[draws > 0])
        assert abs(logs.std() - 1.59) / 1.59 < 0.03


class TestArrivalOffsets:
    def test_mean_is_reciprocal_rate(self, rng):
        rate = 1.0 / 13.12   # per ns
        gaps = sample_arrival_offsets(rate, 100_000, rng)
        assert abs(gaps.mean() - 13.12) / 13.12 < 0.02

    def test_intra_rate_mean(self, rng):
        rate = 1.0 / 0.0918
        gaps = sample_arrival_offsets(rate, 100_000, rng)
        assert abs(gaps.mean() - 0.0918) / 0.0918 < 0.02

    def test_empty(self, rng):
        assert sample_arrival_offsets(1.0, 0, rng).size == 0

    def test_all_positive(self, rng):
        assert (sample_arrival_offsets(5.0, 10_000, rng) > 0).all()

    def test_rejects_bad_rate(self, rng):
        with pytest.raises(ValueError):
            sample_arrival_offsets(0.0, 1, rng)


class TestVonMises:
    def test_kappa_zero_uniform_kuiper(self, rng):
        draws = sample_von_mises(0.3, 0.0, rng, size=100_000)
        stat = kuiper_uniform_pvalue_bound(draws / (2 * np.pi))
        assert stat < KUIPER_CRIT_01

    def test_concentrated_circular_mean(self, rng):
        # RT pre-cursor concentration: kappa = 33
        draws = sample_von_mises(0.0, 33.0, rng, size=100_000)
        mean = math.atan2(np.sin(draws).sum(), np.cos(draws).sum())
        assert abs(math.degrees(mean)) < 0.5

    def test_density_chi_square(self, rng):
        # histogram of draws against the analytic density at kappa = 3.5
        kappa, mu, n = 3.5, 0.5, 1_000_000
        draws = sample_von_mises(mu, kappa, rng, size=n)
        n_bins = 72
        edges = np.linspace(0, 2 * np.pi, n_bins + 1)
        observed, _ = np.histogram(draws, bins=edges)
        centers_fine = np.linspace(0, 2 * np.pi, n_bins * 50, endpoint=False)
        dens = np.exp(kappa * np.cos(centers_fine - mu)) / (2 * np.pi * i0(kappa))
        expected = n * dens.reshape(n_bins, 50).mean(axis=1) * (2 * np.pi / n_bins)
        expected *= observed.sum() / expected.sum()
        assert chisquare(observed, expected).pvalue > 0.01

    def test_wrapped_range(self, rng):
        draws = sample_von_mises(6.0, 2.0, rng, size=10_000)
        assert ((draws >= 0) & (draws < 2 * np.pi)).all()

    def test_concentration_recovered(self, rng):
        # mean resultant length matches I1/I0(kappa) at kappa = 16
        draws = sample_von_mises(1.0, 16.0, rng, size=200_000)
        r_bar = np.hypot(np.cos(draws).mean(), np.sin(draws).mean())
        assert abs(r_bar - i1(16.0) / i0(16.0)) < 0.005

    def test_rejects_negative_kappa(self, rng):
        with pytest.raises(ValueError):
            sample_von_mises(0.0, -1.0, rng)


class TestAmplitudeLaw:
    def test_unit_offset_gives_anchor_times_a(self):
        assert abs(amplitude_from_law(2.0, 0.34, -0.65, 1.0) - 0.68) < 1e-12

    def test_rt_family_value_at_10ns(self):
        # 0.34 * 10^-0.65 = 0.0761 relative to the anchor
        got = amplitude_from_law(1.0, 0.34, -0.65, 10.0)
        assert abs(got - 0.0761) < 1e-4

    def test_monotone_decreasing_for_negative_exponent(self):
        dts = np.linspace(1e-3, 50.0, 200)
        vals = amplitude_from_law(1.0, 0.42, -0.45, dts)
        assert (np.diff(vals) < 0).all()

    def test_singularity_clamped(self):
        tiny = amplitude_from_law(1.0, 0.42, -0.45, 1e-9)
        clamp = amplitude_from_law(1.0, 0.42, -0.45, 1e-3)
        assert tiny == clamp and math.isfinite(tiny)

    def test_rejects_bad_coefficient(self):
        with pytest.raises(ValueError):
            amplitude_from_law(1.0, 0.0, -0.5, 1.0)

    def test_sub_unity_beyond_one_ns_for_all_parameter_rows(self):
        # every fitted (a, b) row keeps subpaths below their anchor once the
        # offset reaches 1 ns (a <= 1, b < 0)
        p = HybridModelParams()
        rows = [(sp.amp_coeff, sp.amp_exponent) for sp in
                (p.rt_pre, p.rt_post, p.nonrt_pre, p.nonrt_post)]
        rows += [(f.inter_amp_coeff, f.inter_amp_exponent)
                 for f in (p.rt_family, p.nonrt_family)]
        for a, b in rows:
            for dt in (1.0, 2.0, 10.0, 100.0):
                assert amplitude_from_law(1.0, a, b, dt) <= 1.0


class TestSynthesizeChannel:
    def test_bit_identical_for_same_seed(self, scene):
        params = HybridModelParams()
        a = synthesize_channel(scene, params, "hybrid", seed=7)
        b = synthesize_channel(scene, params, "hybrid", seed=7)
        for field in ("toa", "aoa", "power", "cluster_id", "label"):
            assert np.array_equal(getattr(a, field), getattr(b, field))

    def test_different_seeds_differ(self, scene):
        params = HybridModelParams()
        a = synthesize_channel(scene, params, "hybrid", seed=7)
        b = synthesize_channel(scene, params, "hybrid", seed=8)
        assert a.n_mpcs != b.n_mpcs or not np.array_equal(a.toa, b.toa)

    def test_cluster_structure(self, scene):
        params = HybridModelParams()
        r = synthesize_channel(scene, params, "hybrid", seed=3)
        assert (r.label == LOS).sum() == 1
        assert (r.label == RT_CENTER).sum() == 20   # capped wall-path count
        d = scene.tx_rx_distance
        n_nonrt = (r.label == NONRT_CENTER).sum()
        assert n_nonrt == sample_cluster_count(d)
        # every subpath references an existing center
        centers = set(r.cluster_id[(r.label == LOS) | (r.label == RT_CENTER)
                                   | (r.label == NONRT_CENTER)].tolist())
        assert set(r.cluster_id.tolist()) <= centers
        assert (r.power > 0).all()
        assert (r.toa >= 0).all()

    def test_nonrt_cluster_count_deterministic_in_distance(self, scene):
        params = HybridModelParams()
        counts = {(synthesize_channel(scene, params, "hybrid", seed=s).label
                   == NONRT_CENTER).sum() for s in range(5)}
        assert len(counts) == 1

    def test_precursor_before_center_postcursor_after(self, scene):
        params = HybridModelParams()
        r = synthesize_channel(scene, params, "hybrid", seed=11)
        center_toa = {int(c): r.toa[(r.cluster_id == c) & (r.label != RT_SUBPATH)
                                    & (r.label != NONRT_SUBPATH)][0]
                      for c in np.unique(r.cluster_id)}
        sub = (r.label == RT_SUBPATH) | (r.label == NONRT_SUBPATH)
        for toa, cid in zip(r.toa[sub], r.cluster_id[sub]):
            assert toa != center_toa[int(cid)]

    def test_baseline_has_no_rt_labels(self, scene):
        params = HybridModelParams()
        r = synthesize_channel(scene, params, "statistical_baseline", seed=5)
        assert (r.label == RT_CENTER).sum() == 0
        assert (r.label == RT_SUBPATH).sum() == 0
        assert (r.label == LOS).sum() == 1

    def test_baseline_los_toa_from_distance(self, scene):
        params = HybridModelParams()
        r = synthesize_channel(scene, params, "statistical_baseline", seed=5)
        tau_los = scene.tx_rx_distance / SPEED_OF_LIGHT
        assert abs(r.toa[r.label == LOS][0] - tau_los) < 1e-15

    def test_unknown_mode_rejected(self, scene):
        with pytest.raises(ValueError, match="mode"):
            synthesize_channel(scene, HybridModelParams(), "gscm", seed=0)

    def test_tx_pattern_only_on_rt_centers(self, scene):
        # Rotating the Tx boresight changes RT-center powers but must leave
        # the statistical components untouched (identical seed).
        params = HybridModelParams()
        r = synthesize_channel(scene, params, "hybrid", seed=2)
        shifted = synthesize_channel(
            scene.__class__(scene.length, scene.width, scene.tx_position,
                            scene.rx_position, scene.wall_permittivity,
                            scene.carrier_frequency),
            params, "hybrid", seed=2)
        assert np.array_equal(r.power, shifted.power)
        nonrt = r.label == NONRT_CENTER
        # non-RT centers anchor on the bare free-space LoS amplitude: their
        # power must not contain the boresight gain factor
        d = scene.tx_rx_distance
        alpha_los = math.sqrt(params.tx_power_w) * SPEED_OF_LIGHT / (
            4 * math.pi * scene.carrier_frequency * d)
        tau_los_ns = d / SPEED_OF_LIGHT * 1e9
        fam = params.nonrt_family
        for toa, p in zip(r.toa[nonrt], r.power[nonrt]):
            dt = abs(toa * 1e9 - tau_los_ns)
            expected = amplitude_from_law(alpha_los, fam.inter_amp_coeff,
                                          fam.inter_amp_exponent, dt) ** 2
            assert abs(p - expected) < 1e-9 * expected


@pytest.fixture(scope="module")
def batch():
    params = HybridModelParams()
    rng = np.random.default_rng(4242)
    reals = []
    for k in range(1000):
        scene = meeting_room_scene(rng)
        reals.append(synthesize_channel(scene, params, "hybrid", seed=10_000 + k))
    return params, reals


class TestRoundTripRefit:
    """Re-fit generator statistics from a batch of realizations."""

    @staticmethod
    def _gaps_and_counts(reals, label, side):
        gaps, counts, offsets = [], [], []
        for r in reals:
            for cid in np.unique(r.cluster_id):
                inc = r.cluster_id == cid
                sub = inc & ((r.label == RT_SUBPATH) if label == "rt"
                             else (r.label == NONRT_SUBPATH))
                if label == "rt" and not ((r.label[inc] == LOS) | (r.label[inc] == RT_CENTER)).any():
                    continue
                if label == "nonrt" and not (r.label[inc] == NONRT_CENTER).any():
                    continue
                center_mask = inc & ~((r.label == RT_SUBPATH) | (r.label == NONRT_SUBPATH))
                t0 = r.toa[center_mask][0]
                rel = (r.toa[sub] - t0) * 1e9
                rel = rel[rel < 0] if side == "pre" else rel[rel > 0]
                counts.append(rel.size)
                if rel.size:
                    srt = np.sort(np.abs(rel))
                    gaps.extend(np.diff(np.concatenate([[0.0], srt])).tolist())
        return np.array(gaps), np.array(counts)

    @pytest.mark.parametrize("label,side", [("rt", "pre"), ("rt", "post"),
                                            ("nonrt", "pre"), ("nonrt", "post")])
    def test_arrival_rates_recovered(self, batch, label, side):
        params, reals = batch
        sp = params.subpath_params(f"{label}_{side}")
        gaps, _ = self._gaps_and_counts(reals, label, side)
        # pre-cursor gaps truncated by the t >= 0 drop are rare at these scales
        assert abs(gaps.mean() - 1.0 / sp.arrival_rate) / (1.0 / sp.arrival_rate) < 0.05

    @pytest.mark.parametrize("label,side", [("rt", "post"), ("nonrt", "post")])
    def test_count_log_mu_recovered(self, batch, label, side):
        params, reals = batch
        sp = params.subpath_params(f"{label}_{side}")
        _, counts = self._gaps_and_counts(reals, label, side)
        logs = np.log(counts[counts > 0])
        assert abs(logs.mean() - sp.count_log_mu) / sp.count_log_mu < 0.05
        assert abs(logs.std() - sp.count_log_sigma) / sp.count_log_sigma < 0.10

    def test_amplitude_law_recovered_exactly(self, batch):
        # the law is deterministic given offsets, so a log-log regression on
        # any one cluster recovers (a, b) to numerical precision
        params, reals = batch
        r = reals[0]
        for cid in np.unique(r.cluster_id):
            inc = r.cluster_id == cid
            if not (r.label[inc] == NONRT_CENTER).any():
                continue
            center_mask = inc & (r.label == NONRT_CENTER)
            sub = inc & (r.label == NONRT_SUBPATH)
            t0 = r.toa[center_mask][0]
            rel_ns = (r.toa[sub] - t0) * 1e9
            post = rel_ns > 0
            if post.sum() < 3:
                continue
            amp_ratio = np.sqrt(r.power[sub][post]) / np.sqrt(r.power[center_mask][0])
            x = np.log(np.abs(rel_ns[post]))
            y = np.log(amp_ratio)
            b, log_a = np.polyfit(x, y, 1)
            sp = params.nonrt_post
            assert abs(b - sp.amp_exponent) < 1e-9
            assert abs(math.exp(log_a) - sp.amp_coeff) < 1e-9
            return
        pytest.fail("no non-RT cluster with enough post-cursor subpaths")

    def test_inter_arrival_rate_recovered(self, batch):
        params, reals = batch
        gaps = []
        for r in reals:
            nonrt = np.unique(r.cluster_id[r.label == NONRT_CENTER])
            if nonrt.size < 2:
                continue
            toas = np.sort([r.toa[(r.cluster_id == c) & (r.label == NONRT_CENTER)][0]
                            for c in nonrt]) * 1e9
            gaps.extend(np.diff(toas).tolist())
        gaps = np.array(gaps)
        mean_expected = 1.0 / params.inter_arrival_rate
        assert abs(gaps.mean() - mean_expected) / mean_expected < 0.05


class TestExport:
    def test_phases_deterministic_and_uniform(self, scene):
        r = synthesize_channel(scene, HybridModelParams(), "hybrid", seed=1)
        a = materialize_phases(r)
        b = materialize_phases(r)
        assert np.array_equal(a, b)
        assert ((a >= 0) & (a < 2 * np.pi)).all()

    def test_csv_columns(self, scene, tmp_path):
        r = synthesize_channel(scene, HybridModelParams(), "hybrid", seed=1)
        out = tmp_path / "real.csv"
        realization_to_csv(r, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "cluster_id,label,toa_ns,aoa_deg,power_dbm,phase_rad"
        assert len(lines) == r.n_mpcs + 1
        labels = {line.split(",")[1] for line in lines[1:]}
        assert labels <= set(LABEL_NAMES)
