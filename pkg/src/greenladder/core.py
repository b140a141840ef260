"""Domain types, the measurement dataset, CSV persistence, and video-level splits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

CSV_HEADER = (
    "video_id,height,qp,enc_time_s,enc_energy_wh,dec_time_s,dec_energy_wh,"
    "bitrate_kbps,psnr_db,vmaf"
)


class GreenLadderError(Exception):
    """Base class for every error raised by this package."""


class InvariantViolation(GreenLadderError):
    """A domain-type invariant failed validation; `field` names the offender."""

    def __init__(self, field_name: str, message: str = ""):
        self.field = field_name
        detail = f": {message}" if message else ""
        super().__init__(f"invariant violated for '{field_name}'{detail}")


class MissingHeader(GreenLadderError):
    pass


class MalformedRow(GreenLadderError):
    def __init__(self, line_no: int, message: str = ""):
        self.line_no = line_no
        detail = f": {message}" if message else ""
        super().__init__(f"malformed row at line {line_no}{detail}")


class DuplicateKey(GreenLadderError):
    def __init__(self, video_id: str, height: int, qp: int):
        self.key = (video_id, height, qp)
        super().__init__(f"duplicate record for ({video_id}, {height}p, qp={qp})")


class IoFailure(GreenLadderError):
    pass


class TooFewVideos(GreenLadderError):
    pass


class MissingAnchorRecord(GreenLadderError):
    def __init__(self, video_id: str, height: int, qp: int):
        self.video_id = video_id
        super().__init__(f"no anchor record ({height}p, qp={qp}) for video '{video_id}'")


@dataclass(frozen=True, order=True)
class Resolution:
    """A frame geometry identified by its vertical line count."""

    height: int
    width: int

    def __post_init__(self):
        if self.height < 1:
            raise InvariantViolation("height", "must be >= 1")
        if self.width < 1:
            raise InvariantViolation("width", "must be >= 1")

    @classmethod
    def from_height(cls, height: int) -> "Resolution":
        # 16:9 with even-rounded width; sources in the target ladder are 3840x2160.
        return cls(height=height, width=2 * round(height * 8 / 9))

    @property
    def pixels(self) -> int:
        return self.height * self.width


@dataclass(frozen=True, order=True)
class Representation:
    """One encoded variant: a resolution paired with a quantization parameter."""

    resolution: Resolution
    qp: int

    def __post_init__(self):
        if not 0 <= self.qp <= 63:
            raise InvariantViolation("qp", "must lie in [0, 63]")

    @property
    def height(self) -> int:
        return self.resolution.height


@dataclass(frozen=True)
class ConfigSpace:
    """The candidate ladder: ascending resolutions crossed with ascending QPs."""

    resolutions: tuple[Resolution, ...]
    qps: tuple[int, ...]

    def __post_init__(self):
        if not self.resolutions:
            raise InvariantViolation("resolutions", "must be non-empty")
        if not self.qps:
            raise InvariantViolation("qps", "must be non-empty")
        heights = [r.height for r in self.resolutions]
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise InvariantViolation("resolutions", "must be strictly ascending")
        if any(b <= a for a, b in zip(self.qps, self.qps[1:])):
            raise InvariantViolation("qps", "must be strictly ascending")

    @classmethod
    def of(cls, heights, qps) -> "ConfigSpace":
        return cls(
            resolutions=tuple(Resolution.from_height(h) for h in sorted(set(heights))),
            qps=tuple(sorted(set(int(q) for q in qps))),
        )

    @classmethod
    def from_dataset(cls, ds: "Dataset") -> "ConfigSpace":
        return cls.of(
            heights={r.rep.height for r in ds.records},
            qps={r.rep.qp for r in ds.records},
        )

    @property
    def anchor_rep(self) -> Representation:
        """The cheapest representation: lowest resolution at the highest QP."""
        return Representation(self.resolutions[0], self.qps[-1])

    def grid(self):
        """All representations in row-major order (resolution asc, qp asc)."""
        for r in self.resolutions:
            for qp in self.qps:
                yield Representation(r, qp)

    @property
    def size(self) -> int:
        return len(self.resolutions) * len(self.qps)


# Default ladder used by the CLI and demos.
DEFAULT_HEIGHTS = (360, 540, 720, 1080, 1440, 2160)
DEFAULT_QPS = (17, 22, 27, 32, 37, 42, 47)


def default_space() -> ConfigSpace:
    return ConfigSpace.of(DEFAULT_HEIGHTS, DEFAULT_QPS)


@dataclass(frozen=True)
class MeasurementRecord:
    """One observed (video, representation) measurement."""

    video_id: str
    rep: Representation
    enc_time: float  # seconds
    enc_energy: float  # watt-hours
    dec_time: float  # seconds
    dec_energy: float  # watt-hours
    bitrate: float  # kilobits per second
    psnr: float  # decibels
    vmaf: float  # score in [0, 100]

    def __post_init__(self):
        for name in ("enc_time", "enc_energy", "dec_time", "dec_energy", "bitrate"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvariantViolation(name, "must be finite and >= 0")
        if not math.isfinite(self.vmaf) or not 0 <= self.vmaf <= 100:
            raise InvariantViolation("vmaf", "must lie in [0, 100]")
        if not math.isfinite(self.psnr) or self.psnr <= 0:
            raise InvariantViolation("psnr", "must be > 0")


@dataclass(frozen=True)
class AnchorMeasurement:
    """The anchor representation's measured times and quality scores."""

    video_id: str
    enc_time: float
    dec_time: float
    psnr: float
    vmaf: float

    def __post_init__(self):
        if self.enc_time <= 0:
            raise InvariantViolation("enc_time", "must be > 0")
        if self.dec_time <= 0:
            raise InvariantViolation("dec_time", "must be > 0")

    def quality(self, metric: str) -> float:
        if metric == "vmaf":
            return self.vmaf
        if metric == "psnr":
            return self.psnr
        raise ValueError(f"unknown quality metric '{metric}'")


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of measurement records, unique per (video, rep)."""

    records: tuple[MeasurementRecord, ...]
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        index: dict[tuple[str, int, int], MeasurementRecord] = {}
        per_video: dict[str, list[Representation]] = {}
        for rec in self.records:
            key = (rec.video_id, rec.rep.height, rec.rep.qp)
            if key in index:
                raise DuplicateKey(*key)
            index[key] = rec
            per_video.setdefault(rec.video_id, []).append(rec.rep)
        # Each video must carry its own cheapest row (min height, max qp).
        for video_id, reps in per_video.items():
            h = min(r.height for r in reps)
            qp = max(r.qp for r in reps)
            if (video_id, h, qp) not in index:
                raise InvariantViolation(
                    "records", f"video '{video_id}' lacks its ({h}p, qp={qp}) anchor row"
                )
        object.__setattr__(self, "_index", index)

    @property
    def video_ids(self) -> tuple[str, ...]:
        return tuple(sorted({r.video_id for r in self.records}))

    def record_at(self, video_id: str, rep: Representation) -> MeasurementRecord | None:
        return self._index.get((video_id, rep.height, rep.qp))

    def records_for(self, video_id: str) -> tuple[MeasurementRecord, ...]:
        return tuple(r for r in self.records if r.video_id == video_id)

    def __len__(self) -> int:
        return len(self.records)


def _format_float(x: float) -> str:
    # repr() gives the shortest round-tripping decimal form.
    return repr(float(x))


def save_dataset(ds: Dataset, path) -> None:
    """Write the canonical CSV, rows sorted by (video_id, height, qp)."""
    rows = sorted(ds.records, key=lambda r: (r.video_id, r.rep.height, r.rep.qp))
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.video_id,
                    str(r.rep.height),
                    str(r.rep.qp),
                    _format_float(r.enc_time),
                    _format_float(r.enc_energy),
                    _format_float(r.dec_time),
                    _format_float(r.dec_energy),
                    _format_float(r.bitrate),
                    _format_float(r.psnr),
                    _format_float(r.vmaf),
                ]
            )
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(f"cannot write dataset to '{path}': {exc}") from exc


def load_dataset(path) -> Dataset:
    """Parse and validate the canonical CSV produced by :func:`save_dataset`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read dataset from '{path}': {exc}") from exc
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise MissingHeader(f"first line must be exactly '{CSV_HEADER}'")
    records = []
    seen: set[tuple[str, int, int]] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 10:
            raise MalformedRow(line_no, f"expected 10 fields, got {len(parts)}")
        try:
            video_id = parts[0]
            height = int(parts[1])
            qp = int(parts[2])
            floats = [float(p) for p in parts[3:]]
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from exc
        key = (video_id, height, qp)
        if key in seen:
            raise DuplicateKey(*key)
        seen.add(key)
        records.append(
            MeasurementRecord(
                video_id=video_id,
                rep=Representation(Resolution.from_height(height), qp),
                enc_time=floats[0],
                enc_energy=floats[1],
                dec_time=floats[2],
                dec_energy=floats[3],
                bitrate=floats[4],
                psnr=floats[5],
                vmaf=floats[6],
            )
        )
    return Dataset(records=tuple(records))


def _floor_fraction(n: int, fraction: float) -> int:
    # floor(n * fraction) on the real product; snap float artifacts like
    # 100 * 0.29 = 28.999999999999996 back to the intended integer.
    t = n * fraction
    k = math.floor(t)
    if (k + 1) - t < 1e-9:
        k += 1
    return k


def split_by_video(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic video-level split; no video appears on both sides.

    Distinct video ids are sorted, shuffled with numpy's PCG64 stream for
    `seed`, and the first floor(n * train_fraction) ids become the train side.
    """
    if not 0 < train_fraction < 1:
        raise InvariantViolation("train_fraction", "must lie strictly in (0, 1)")
    ids = ds.video_ids
    if len(ids) < 2:
        raise TooFewVideos(f"need at least 2 distinct videos, got {len(ids)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(ids))
    n_train = _floor_fraction(len(ids), train_fraction)
    train_ids = {ids[i] for i in order[:n_train]}
    train = tuple(r for r in ds.records if r.video_id in train_ids)
    test = tuple(r for r in ds.records if r.video_id not in train_ids)
    return Dataset(records=train), Dataset(records=test)


def anchor_of(ds: Dataset, video_id: str, space: ConfigSpace) -> AnchorMeasurement:
    """The video's measured anchor: the space's (min resolution, max qp) row."""
    rep = space.anchor_rep
    rec = ds.record_at(video_id, rep)
    if rec is None:
        raise MissingAnchorRecord(video_id, rep.height, rep.qp)
    return AnchorMeasurement(
        video_id=video_id,
        enc_time=rec.enc_time,
        dec_time=rec.dec_time,
        psnr=rec.psnr,
        vmaf=rec.vmaf,
    )
