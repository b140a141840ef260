"""Measurement providers: a synthetic world with documented closed-form laws,
a generic external-command adapter, and the time-to-energy linear proxy."""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .core import (
    AnchorMeasurement,
    ConfigSpace,
    Dataset,
    GreenLadderError,
    InvariantViolation,
    MeasurementRecord,
    Representation,
)


class NegativeTime(GreenLadderError):
    pass


class CommandFailed(GreenLadderError):
    def __init__(self, exit_code: int, command: str):
        self.exit_code = exit_code
        super().__init__(f"command exited with {exit_code}: {command}")


class ParseFailure(GreenLadderError):
    def __init__(self, field_name: str, detail: str = ""):
        self.field = field_name
        suffix = f" ({detail})" if detail else ""
        super().__init__(f"sidecar is missing or invalid for '{field_name}'{suffix}")


class Timeout(GreenLadderError):
    def __init__(self, seconds: float, command: str):
        self.seconds = seconds
        super().__init__(f"command exceeded {seconds} s: {command}")


@dataclass(frozen=True)
class PowerModel:
    """Linear time-to-energy proxy: energy = avg_power * t / 3600 + intercept."""

    avg_power: float  # watts
    intercept: float = 0.0  # watt-hours

    def __post_init__(self):
        if self.avg_power <= 0:
            raise InvariantViolation("avg_power", "must be > 0")


def energy_from_time(t: float, pm: PowerModel) -> float:
    """Watt-hours consumed over `t` seconds under the linear power proxy."""
    if t < 0:
        raise NegativeTime(f"time must be >= 0, got {t}")
    return pm.avg_power * t / 3600.0 + pm.intercept


def fit_power_model(times, energies) -> PowerModel:
    """Least-squares fit of the linear proxy from (seconds, watt-hours) pairs."""
    t = np.asarray(times, dtype=float)
    e = np.asarray(energies, dtype=float)
    if t.size != e.size or t.size < 2:
        raise ValueError("need at least two (time, energy) pairs of equal length")
    if np.ptp(t) == 0:
        raise InvariantViolation("times", "must not be constant")
    hours = t / 3600.0
    slope, intercept = np.polyfit(hours, e, 1)
    return PowerModel(avg_power=float(slope), intercept=float(intercept))


class MeasurementProvider(Protocol):
    """Behavioral contract: produce one record per (video, representation)."""

    def measure(self, video_id: str, rep: Representation) -> MeasurementRecord: ...


# ---------------------------------------------------------------------------
# Synthetic world
#
# The laws below are normative: tests recompute them independently from the
# documented RNG protocol. All draws come from numpy PCG64(seed) in this
# exact order:
#   1. complexities c_v ~ Uniform(0.5, 2.0), one per video, in video order;
#   2. per video (ascending id), per resolution (ascending), per qp
#      (ascending): three Normal(0, noise_sd) draws, in order
#      (eps_enc, eps_dec, eps_bitrate).
# Noise enters as a multiplicative factor max(1 + eps, NOISE_FLOOR).
#
# With px(r) the pixel count, pmin/pmax the space's extreme pixel counts and
# qp_max/qp_min its extreme QPs:
#   enc_time   = base_enc_time * c_v * (px/pmin)^pixel_exponent
#                * exp(-qp_decay * (qp - qp_max)) * f_enc
#   enc_energy = power_enc * enc_time / 3600
#   dec_time   = base_enc_time * DEC_TIME_FRACTION * c_v
#                * (px/pmin)^(DEC_PIXEL_EXPONENT_FACTOR * pixel_exponent)
#                * exp(-DEC_QP_DECAY_FACTOR * qp_decay * (qp - qp_max)) * f_dec
#   dec_energy = power_dec * dec_time / 3600
#   bitrate    = BITRATE_BASE_KBPS * c_v * (px/pmin)^BITRATE_PIXEL_EXPONENT
#                * exp(-BITRATE_QP_DECAY * (qp - qp_min)) * f_br
#   vmaf       = clip(quality_ceiling * (1 - 0.9 * (qp/63)^2)
#                * (1 - 0.25 * (1 - px/pmax)), 0, 100)
#   psnr       = PSNR_CEILING - PSNR_QP_WEIGHT * (qp/63)^PSNR_QP_EXPONENT
#                - PSNR_RES_WEIGHT * (1 - px/pmax)
#                - PSNR_COMPLEXITY_WEIGHT * (c_v - 0.5)
# ---------------------------------------------------------------------------

DEC_TIME_FRACTION = 0.05
DEC_PIXEL_EXPONENT_FACTOR = 0.8
DEC_QP_DECAY_FACTOR = 0.5
BITRATE_BASE_KBPS = 1500.0
BITRATE_PIXEL_EXPONENT = 0.9
BITRATE_QP_DECAY = 0.1
PSNR_CEILING = 50.0
PSNR_QP_WEIGHT = 22.0
PSNR_QP_EXPONENT = 1.2
PSNR_RES_WEIGHT = 6.0
PSNR_COMPLEXITY_WEIGHT = 2.0
NOISE_FLOOR = 0.05


@dataclass(frozen=True)
class SyntheticWorldParams:
    """Knobs of the synthetic measurement world.

    Defaults reproduce the qualitative shape of real ladder measurements:
    encoding energy spans roughly two orders of magnitude between the
    (min resolution, max qp) and (max resolution, min qp) corners, and the
    mean anchor encode sits near ten seconds.
    """

    n_videos: int
    base_enc_time: float = 7.6  # seconds at the (min res, max qp) corner
    pixel_exponent: float = 0.75
    qp_decay: float = 0.09
    power_enc: float = 90.0  # watts
    power_dec: float = 35.0  # watts
    quality_ceiling: float = 90.0
    noise_sd: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n_videos < 1:
            raise InvariantViolation("n_videos", "must be >= 1")
        for name in ("base_enc_time", "pixel_exponent", "qp_decay", "power_enc",
                     "power_dec", "quality_ceiling"):
            if getattr(self, name) <= 0:
                raise InvariantViolation(name, "must be > 0")
        if not 0 <= self.noise_sd < 0.2:
            raise InvariantViolation("noise_sd", "must lie in [0, 0.2)")


def synth_video_ids(n_videos: int) -> list[str]:
    return [f"v{i:04d}" for i in range(n_videos)]


def synth_generate(params: SyntheticWorldParams, space: ConfigSpace) -> Dataset:
    """Generate one record per (video, representation) under the module laws."""
    rng = np.random.Generator(np.random.PCG64(params.seed))
    complexities = rng.uniform(0.5, 2.0, params.n_videos)
    pmin = space.resolutions[0].pixels
    pmax = space.resolutions[-1].pixels
    qp_min, qp_max = space.qps[0], space.qps[-1]
    records = []
    for video_id, c in zip(synth_video_ids(params.n_videos), complexities):
        for res in space.resolutions:
            px_min_ratio = res.pixels / pmin
            px_max_ratio = res.pixels / pmax
            for qp in space.qps:
                eps = rng.normal(0.0, params.noise_sd, 3)
                f_enc, f_dec, f_br = np.maximum(1.0 + eps, NOISE_FLOOR)
                enc_time = (
                    params.base_enc_time
                    * c
                    * px_min_ratio**params.pixel_exponent
                    * math.exp(-params.qp_decay * (qp - qp_max))
                    * f_enc
                )
                dec_time = (
                    params.base_enc_time
                    * DEC_TIME_FRACTION
                    * c
                    * px_min_ratio ** (DEC_PIXEL_EXPONENT_FACTOR * params.pixel_exponent)
                    * math.exp(-DEC_QP_DECAY_FACTOR * params.qp_decay * (qp - qp_max))
                    * f_dec
                )
                bitrate = (
                    BITRATE_BASE_KBPS
                    * c
                    * px_min_ratio**BITRATE_PIXEL_EXPONENT
                    * math.exp(-BITRATE_QP_DECAY * (qp - qp_min))
                    * f_br
                )
                vmaf = params.quality_ceiling * (1 - 0.9 * (qp / 63) ** 2)
                vmaf *= 1 - 0.25 * (1 - px_max_ratio)
                psnr = (
                    PSNR_CEILING
                    - PSNR_QP_WEIGHT * (qp / 63) ** PSNR_QP_EXPONENT
                    - PSNR_RES_WEIGHT * (1 - px_max_ratio)
                    - PSNR_COMPLEXITY_WEIGHT * (c - 0.5)
                )
                records.append(
                    MeasurementRecord(
                        video_id=video_id,
                        rep=Representation(res, qp),
                        enc_time=float(enc_time),
                        enc_energy=float(params.power_enc * enc_time / 3600.0),
                        dec_time=float(dec_time),
                        dec_energy=float(params.power_dec * dec_time / 3600.0),
                        bitrate=float(bitrate),
                        psnr=float(psnr),
                        vmaf=float(np.clip(vmaf, 0.0, 100.0)),
                    )
                )
    return Dataset(records=tuple(records))


class SyntheticProvider:
    """Pure, reentrant provider backed by a lazily generated synthetic world."""

    def __init__(self, params: SyntheticWorldParams, space: ConfigSpace):
        self.params = params
        self.space = space
        self._dataset: Dataset | None = None

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            self._dataset = synth_generate(self.params, self.space)
        return self._dataset

    def measure(self, video_id: str, rep: Representation) -> MeasurementRecord:
        rec = self.dataset.record_at(video_id, rep)
        if rec is None:
            raise ValueError(f"no synthetic record for ({video_id}, {rep.height}p, qp={rep.qp})")
        return rec


PLACEHOLDERS = ("{input}", "{width}", "{height}", "{qp}", "{output}")

# Sidecar fields the commands must report; energies may be absent and are
# then filled through the time-to-energy proxy.
SIDECAR_REQUIRED = ("bitrate_kbps", "psnr_db", "vmaf")


def _run_timed(command: str, timeout: float | None) -> float:
    try:
        started = time.perf_counter()
        proc = subprocess.run(
            shlex.split(command),
            capture_output=True,
            timeout=timeout,
        )
        elapsed = time.perf_counter() - started
    except subprocess.TimeoutExpired as exc:
        raise Timeout(timeout, command) from exc
    except OSError as exc:
        raise CommandFailed(127, f"{command} ({exc})") from exc
    if proc.returncode != 0:
        raise CommandFailed(proc.returncode, command)
    return elapsed


def external_measure(
    cmd_template: str,
    video_path,
    rep: Representation,
    *,
    decode_template: str | None = None,
    power_model: PowerModel | None = None,
    timeout: float | None = None,
    video_id: str | None = None,
    workdir=None,
) -> MeasurementRecord:
    """Measure one representation by shelling out to encode/decode commands.

    Templates are formatted with {input}, {width}, {height}, {qp} and
    {output}. Wall-clock runtimes are authoritative for enc/dec times; the
    encode command must leave a sidecar JSON at `<output>.json` carrying at
    least bitrate_kbps, psnr_db and vmaf. Sidecar enc_energy_wh /
    dec_energy_wh are used when present, otherwise derived from the wall
    clock through `power_model`. When no decode command runs, dec time falls
    back to the sidecar's dec_time_s (0.0 if absent).
    """
    for placeholder in PLACEHOLDERS:
        if placeholder not in cmd_template:
            raise ValueError(f"command template lacks placeholder {placeholder}")
    if video_id is None:
        video_id = Path(video_path).stem

    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        enc_out = str(Path(tmp) / "encoded.bin")
        dec_out = str(Path(tmp) / "decoded.yuv")
        fmt = dict(
            input=str(video_path),
            width=rep.resolution.width,
            height=rep.resolution.height,
            qp=rep.qp,
        )
        enc_wall = _run_timed(cmd_template.format(output=enc_out, **fmt), timeout)
        dec_wall = None
        if decode_template is not None:
            dec_cmd = decode_template.format(**{**fmt, "input": enc_out, "output": dec_out})
            dec_wall = _run_timed(dec_cmd, timeout)

        sidecar_path = Path(enc_out + ".json")
        if not sidecar_path.exists():
            raise ParseFailure("sidecar", f"expected JSON at {sidecar_path}")
        try:
            sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseFailure("sidecar", str(exc)) from exc
        for field_name in SIDECAR_REQUIRED:
            if field_name not in sidecar:
                raise ParseFailure(field_name)

        dec_time = dec_wall if dec_wall is not None else float(sidecar.get("dec_time_s", 0.0))

        def _energy(key: str, seconds: float) -> float:
            if key in sidecar:
                return float(sidecar[key])
            if power_model is None:
                raise ParseFailure(key, "absent and no power model given")
            return energy_from_time(seconds, power_model)

        return MeasurementRecord(
            video_id=video_id,
            rep=rep,
            enc_time=enc_wall,
            enc_energy=_energy("enc_energy_wh", enc_wall),
            dec_time=dec_time,
            dec_energy=_energy("dec_energy_wh", dec_time),
            bitrate=float(sidecar["bitrate_kbps"]),
            psnr=float(sidecar["psnr_db"]),
            vmaf=float(sidecar["vmaf"]),
        )


class ExternalCommandProvider:
    """MeasurementProvider adapter around :func:`external_measure`.

    Measurements are serialized per provider instance: wall-clock timing is
    the energy proxy, so concurrent encodes on one host would corrupt it.
    """

    def __init__(
        self,
        cmd_template: str,
        video_paths: dict[str, str],
        *,
        decode_template: str | None = None,
        power_model: PowerModel | None = None,
        timeout: float | None = None,
    ):
        self.cmd_template = cmd_template
        self.video_paths = dict(video_paths)
        self.decode_template = decode_template
        self.power_model = power_model
        self.timeout = timeout
        self._token = threading.Lock()

    def measure(self, video_id: str, rep: Representation) -> MeasurementRecord:
        path = self.video_paths.get(video_id)
        if path is None:
            raise ValueError(f"no source path registered for video '{video_id}'")
        with self._token:
            return external_measure(
                self.cmd_template,
                path,
                rep,
                decode_template=self.decode_template,
                power_model=self.power_model,
                timeout=self.timeout,
                video_id=video_id,
            )


def run_anchor(provider: MeasurementProvider, video_id: str, space: ConfigSpace) -> AnchorMeasurement:
    """Measure exactly the anchor representation and return its triple."""
    rec = provider.measure(video_id, space.anchor_rep)
    return AnchorMeasurement(
        video_id=rec.video_id,
        enc_time=rec.enc_time,
        dec_time=rec.dec_time,
        psnr=rec.psnr,
        vmaf=rec.vmaf,
    )
