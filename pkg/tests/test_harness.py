import json
import math
import sys

import numpy as np
import pytest

from greenladder.core import ConfigSpace, Representation, Resolution
from greenladder.harness import (
    BITRATE_BASE_KBPS,
    BITRATE_PIXEL_EXPONENT,
    BITRATE_QP_DECAY,
    DEC_PIXEL_EXPONENT_FACTOR,
    DEC_QP_DECAY_FACTOR,
    DEC_TIME_FRACTION,
    NOISE_FLOOR,
    PSNR_CEILING,
    PSNR_COMPLEXITY_WEIGHT,
    PSNR_QP_EXPONENT,
    PSNR_QP_WEIGHT,
    PSNR_RES_WEIGHT,
    CommandFailed,
    NegativeTime,
    ParseFailure,
    PowerModel,
    SyntheticProvider,
    SyntheticWorldParams,
    Timeout,
    energy_from_time,
    external_measure,
    fit_power_model,
    run_anchor,
    synth_generate,
    synth_video_ids,
)

SPACE = ConfigSpace.of([360, 720, 2160], [17, 32, 47])


def oracle_records(params, space):
    """Independent replay of the documented RNG protocol and formulas."""
    rng = np.random.Generator(np.random.PCG64(params.seed))
    cs = rng.uniform(0.5, 2.0, params.n_videos)
    pmin = space.resolutions[0].pixels
    pmax = space.resolutions[-1].pixels
    qp_min, qp_max = space.qps[0], space.qps[-1]
    out = {}
    for i, video_id in enumerate(synth_video_ids(params.n_videos)):
        c = cs[i]
        for res in space.resolutions:
            for qp in space.qps:
                eps = rng.normal(0.0, params.noise_sd, 3)
                f_enc = max(1.0 + eps[0], NOISE_FLOOR)
                f_dec = max(1.0 + eps[1], NOISE_FLOOR)
                f_br = max(1.0 + eps[2], NOISE_FLOOR)
                pr = res.pixels / pmin
                enc_t = (params.base_enc_time * c * pr**params.pixel_exponent
                         * math.exp(-params.qp_decay * (qp - qp_max)) * f_enc)
                dec_t = (params.base_enc_time * DEC_TIME_FRACTION * c
                         * pr ** (DEC_PIXEL_EXPONENT_FACTOR * params.pixel_exponent)
                         * math.exp(-DEC_QP_DECAY_FACTOR * params.qp_decay * (qp - qp_max))
                         * f_dec)
                br = (BITRATE_BASE_KBPS * c * pr**BITRATE_PIXEL_EXPONENT
                      * math.exp(-BITRATE_QP_DECAY * (qp - qp_min)) * f_br)
                vmaf = (params.quality_ceiling * (1 - 0.9 * (qp / 63) ** 2)
                        * (1 - 0.25 * (1 - res.pixels / pmax)))
                psnr = (PSNR_CEILING - PSNR_QP_WEIGHT * (qp / 63) ** PSNR_QP_EXPONENT
                        - PSNR_RES_WEIGHT * (1 - res.pixels / pmax)
                        - PSNR_COMPLEXITY_WEIGHT * (c - 0.5))
                out[(video_id, res.height, qp)] = dict(
                    enc_time=enc_t,
                    enc_energy=params.power_enc * enc_t / 3600.0,
                    dec_time=dec_t,
                    dec_energy=params.power_dec * dec_t / 3600.0,
                    bitrate=br,
                    psnr=psnr,
                    vmaf=min(max(vmaf, 0.0), 100.0),
                    complexity=c,
                )
    return out


class TestSyntheticLaws:
    def test_oracle_recomputes_every_field_exactly(self):
        params = SyntheticWorldParams(n_videos=4, noise_sd=0.1, seed=99)
        ds = synth_generate(params, SPACE)
        oracle = oracle_records(params, SPACE)
        assert len(ds) == len(oracle)
        for rec in ds.records:
            want = oracle[(rec.video_id, rec.rep.height, rec.rep.qp)]
            assert rec.enc_time == pytest.approx(want["enc_time"], rel=1e-12)
            assert rec.enc_energy == pytest.approx(want["enc_energy"], rel=1e-12)
            assert rec.dec_time == pytest.approx(want["dec_time"], rel=1e-12)
            assert rec.dec_energy == pytest.approx(want["dec_energy"], rel=1e-12)
            assert rec.bitrate == pytest.approx(want["bitrate"], rel=1e-12)
            assert rec.psnr == pytest.approx(want["psnr"], rel=1e-12)
            assert rec.vmaf == pytest.approx(want["vmaf"], rel=1e-12)

    def test_noiseless_anchor_collapses_to_base_times_complexity(self):
        params = SyntheticWorldParams(n_videos=3, noise_sd=0.0, seed=5)
        ds = synth_generate(params, SPACE)
        cs = np.random.Generator(np.random.PCG64(5)).uniform(0.5, 2.0, 3)
        for i, video_id in enumerate(synth_video_ids(3)):
            rec = ds.record_at(video_id, SPACE.anchor_rep)
            assert rec.enc_time == pytest.approx(params.base_enc_time * cs[i], rel=1e-12)

    def test_noiseless_monotonicity_over_grid(self):
        params = SyntheticWorldParams(n_videos=2, noise_sd=0.0, seed=8)
        ds = synth_generate(params, SPACE)
        heights = [r.height for r in SPACE.resolutions]
        for video_id in ds.video_ids:
            for qp in SPACE.qps:
                times = [ds.record_at(video_id, Representation(Resolution.from_height(h), qp)).enc_time
                         for h in heights]
                energies = [ds.record_at(video_id, Representation(Resolution.from_height(h), qp)).enc_energy
                            for h in heights]
                assert all(a < b for a, b in zip(times, times[1:]))
                assert all(a < b for a, b in zip(energies, energies[1:]))
            for h in heights:
                recs = [ds.record_at(video_id, Representation(Resolution.from_height(h), qp))
                        for qp in SPACE.qps]
                assert all(a.enc_time > b.enc_time for a, b in zip(recs, recs[1:]))
                assert all(a.vmaf > b.vmaf for a, b in zip(recs, recs[1:]))
                assert all(a.psnr > b.psnr for a, b in zip(recs, recs[1:]))
                assert all(a.bitrate > b.bitrate for a, b in zip(recs, recs[1:]))

    def test_determinism(self):
        params = SyntheticWorldParams(n_videos=3, seed=21)
        assert synth_generate(params, SPACE) == synth_generate(params, SPACE)

    def test_param_validation(self):
        with pytest.raises(Exception):
            SyntheticWorldParams(n_videos=0)
        with pytest.raises(Exception):
            SyntheticWorldParams(n_videos=1, noise_sd=0.3)


class TestEnergyProxy:
    def test_zero_time_zero_energy(self):
        assert energy_from_time(0.0, PowerModel(avg_power=50.0)) == 0.0

    def test_one_hour_at_50w_is_50wh(self):
        assert energy_from_time(3600.0, PowerModel(avg_power=50.0)) == pytest.approx(50.0)

    def test_negative_time_rejected(self):
        with pytest.raises(NegativeTime):
            energy_from_time(-1.0, PowerModel(avg_power=50.0))

    def test_linearity(self):
        pm = PowerModel(avg_power=75.0, intercept=0.4)
        rng = np.random.default_rng(0)
        for _ in range(50):
            t, a = rng.uniform(0, 5000), rng.uniform(0.1, 10)
            lhs = energy_from_time(a * t, pm) - pm.intercept
            rhs = a * (energy_from_time(t, pm) - pm.intercept)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_fit_recovers_synthetic_energy_within_noise(self):
        params = SyntheticWorldParams(n_videos=10, noise_sd=0.05, seed=3)
        ds = synth_generate(params, SPACE)
        times = [r.enc_time for r in ds.records]
        energies = [r.enc_energy for r in ds.records]
        pm = fit_power_model(times, energies)
        # Oracle: normal equations on the same pairs.
        A = np.vstack([np.asarray(times) / 3600.0, np.ones(len(times))]).T
        slope, intercept = np.linalg.lstsq(A, np.asarray(energies), rcond=None)[0]
        assert pm.avg_power == pytest.approx(slope, rel=1e-9, abs=1e-12)
        assert pm.intercept == pytest.approx(intercept, rel=1e-6, abs=1e-9)
        # Synthetic energy is exactly power * time / 3600.
        assert pm.avg_power == pytest.approx(params.power_enc, rel=1e-9)
        predicted = [energy_from_time(t, pm) for t in times]
        assert np.allclose(predicted, energies, rtol=1e-9, atol=1e-12)


class CountingProvider:
    def __init__(self, inner):
        self.inner = inner
        self.calls = []

    def measure(self, video_id, rep):
        self.calls.append((video_id, rep.height, rep.qp))
        return self.inner.measure(video_id, rep)


class TestRunAnchor:
    def test_invokes_anchor_rep_exactly_once(self):
        params = SyntheticWorldParams(n_videos=2, seed=1)
        provider = CountingProvider(SyntheticProvider(params, SPACE))
        run_anchor(provider, "v0001", SPACE)
        assert provider.calls == [("v0001", 360, 47)]

    def test_noiseless_anchor_value(self):
        params = SyntheticWorldParams(n_videos=2, noise_sd=0.0, seed=13)
        provider = SyntheticProvider(params, SPACE)
        anchor = run_anchor(provider, "v0000", SPACE)
        c0 = np.random.Generator(np.random.PCG64(13)).uniform(0.5, 2.0, 2)[0]
        assert anchor.enc_time == pytest.approx(params.base_enc_time * c0, rel=1e-12)


def write_stub(tmp_path, name, body):
    script = tmp_path / name
    script.write_text("import json, sys, time\n" + body)
    return f"{sys.executable} {script}"


class TestExternalMeasure:
    REP = Representation(Resolution.from_height(360), 47)

    def encode_stub(self, tmp_path, sidecar_fields, sleep=0.0):
        body = (
            f"time.sleep({sleep})\n"
            "out = sys.argv[1]\n"
            "open(out, 'w').write('x')\n"
            f"json.dump({sidecar_fields!r}, open(out + '.json', 'w'))\n"
        )
        return write_stub(tmp_path, "enc.py", body) + " {output} --in {input} {width}x{height} q{qp}"

    def test_wall_clock_times_sleeping_stub(self, tmp_path):
        sidecar = {"bitrate_kbps": 900.0, "psnr_db": 31.0, "vmaf": 55.0,
                   "enc_energy_wh": 0.02, "dec_energy_wh": 0.001}
        cmd = self.encode_stub(tmp_path, sidecar, sleep=1.0)
        rec = external_measure(cmd, tmp_path / "in.yuv", self.REP, video_id="clip")
        assert 1.0 <= rec.enc_time <= 1.5
        assert rec.enc_energy == 0.02
        assert rec.bitrate == 900.0

    def test_nonzero_exit_raises_command_failed(self, tmp_path):
        cmd = write_stub(tmp_path, "bad.py", "sys.exit(9)\n") + \
            " {output} --in {input} {width}x{height} q{qp}"
        with pytest.raises(CommandFailed) as err:
            external_measure(cmd, tmp_path / "in.yuv", self.REP)
        assert err.value.exit_code == 9

    def test_missing_vmaf_names_field(self, tmp_path):
        sidecar = {"bitrate_kbps": 900.0, "psnr_db": 31.0, "enc_energy_wh": 0.1,
                   "dec_energy_wh": 0.01}
        cmd = self.encode_stub(tmp_path, sidecar)
        with pytest.raises(ParseFailure) as err:
            external_measure(cmd, tmp_path / "in.yuv", self.REP)
        assert err.value.field == "vmaf"

    def test_timeout(self, tmp_path):
        sidecar = {"bitrate_kbps": 1.0, "psnr_db": 1.0, "vmaf": 1.0}
        cmd = self.encode_stub(tmp_path, sidecar, sleep=5.0)
        with pytest.raises(Timeout):
            external_measure(cmd, tmp_path / "in.yuv", self.REP, timeout=0.3)

    def test_missing_energy_falls_back_to_power_model(self, tmp_path):
        sidecar = {"bitrate_kbps": 900.0, "psnr_db": 31.0, "vmaf": 55.0,
                   "dec_time_s": 0.5}
        cmd = self.encode_stub(tmp_path, sidecar)
        pm = PowerModel(avg_power=3600.0)  # 1 Wh per second
        rec = external_measure(cmd, tmp_path / "in.yuv", self.REP, power_model=pm)
        assert rec.enc_energy == pytest.approx(rec.enc_time, rel=1e-9)
        assert rec.dec_time == 0.5

    def test_missing_energy_without_power_model(self, tmp_path):
        sidecar = {"bitrate_kbps": 900.0, "psnr_db": 31.0, "vmaf": 55.0}
        cmd = self.encode_stub(tmp_path, sidecar)
        with pytest.raises(ParseFailure) as err:
            external_measure(cmd, tmp_path / "in.yuv", self.REP)
        assert err.value.field == "enc_energy_wh"

    def test_decode_template_timed_separately(self, tmp_path):
        sidecar = {"bitrate_kbps": 900.0, "psnr_db": 31.0, "vmaf": 55.0,
                   "enc_energy_wh": 0.1, "dec_energy_wh": 0.01}
        enc = self.encode_stub(tmp_path, sidecar)
        dec = write_stub(tmp_path, "dec.py", "time.sleep(0.2)\n") + \
            " {output} --in {input} {width}x{height} q{qp}"
        rec = external_measure(enc, tmp_path / "in.yuv", self.REP, decode_template=dec)
        assert rec.dec_time >= 0.2

    def test_template_placeholder_validation(self, tmp_path):
        with pytest.raises(ValueError):
            external_measure("encode {input}", tmp_path / "x", self.REP)
