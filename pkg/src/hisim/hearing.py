"""Audiogram handling, cochlear IO functions, and the active/passive loss split.

A listener's total hearing loss at each frequency is decomposed into an
active part (reduced level-dependent gain, controlled by the compression
health ``alpha``) and a passive part (constant attenuation).  The cochlear
IO function maps input SPL to output level re the normal-hearing absolute
threshold; its inverse drives both the split and the loss-field analysis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .erbscale import hz_to_erb_rate
from .filters import GcParams, erb_bandwidth

AUDIOMETRIC_FREQS = (125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0)

# Cochlear-input SPL corresponding to 0 dB HL per audiometric frequency.
# Placeholder for the middle-ear/threshold transfer of the average listener;
# configurable, and calibrated at 250 Hz against the expected compensated
# compression-health values.
DEFAULT_THRESHOLD_TABLE = {
    125.0: 30.0,
    250.0: 25.0,
    500.0: 12.0,
    1000.0: 7.0,
    2000.0: 9.0,
    4000.0: 12.0,
    8000.0: 16.0,
}

IO_GRID_MIN = -30.0
IO_GRID_MAX = 130.0
IO_GRID_STEP = 0.1


class AudiogramError(ValueError):
    """Raised for malformed audiogram or threshold-table definitions."""


class IoFunctionError(ValueError):
    """Raised when an IO tabulation is unusable (non-monotone or out of range)."""


@dataclass(frozen=True)
class ThresholdReference:
    """HL-0-dB reference: cochlear-input SPL per frequency, log-f interpolated."""

    freqs_hz: tuple = tuple(DEFAULT_THRESHOLD_TABLE)
    spl_db: tuple = tuple(DEFAULT_THRESHOLD_TABLE.values())

    def __post_init__(self):
        if len(self.freqs_hz) != len(self.spl_db) or len(self.freqs_hz) < 2:
            raise AudiogramError("threshold table needs matching freq/value lists (>= 2 points)")
        if any(b <= a for a, b in zip(self.freqs_hz, self.freqs_hz[1:])):
            raise AudiogramError("threshold table frequencies must be strictly increasing")

    def level(self, freq_hz):
        """dB SPL at the cochlear input for 0 dB HL at ``freq_hz``.

        Linear interpolation on a log-frequency axis; table endpoints are
        held constant outside the tabulated range.  Frequencies outside
        [20, 16000] Hz are rejected.
        """
        f = np.asarray(freq_hz, dtype=float)
        if np.any(f < 20.0) or np.any(f > 16000.0):
            raise AudiogramError("threshold reference is defined for 20 Hz .. 16 kHz")
        out = np.interp(np.log10(f), np.log10(self.freqs_hz), self.spl_db)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Audiogram:
    """Hearing level in dB HL at standard audiometric frequencies."""

    freqs_hz: tuple
    hl_db: tuple
    name: str = ""

    def __post_init__(self):
        if len(self.freqs_hz) != len(self.hl_db) or not self.freqs_hz:
            raise AudiogramError("audiogram needs matching, nonempty freq/level lists")
        for f in self.freqs_hz:
            if f not in AUDIOMETRIC_FREQS:
                raise AudiogramError(
                    f"audiogram frequency {f} Hz is not one of {sorted(AUDIOMETRIC_FREQS)}")
        if any(b <= a for a, b in zip(self.freqs_hz, self.freqs_hz[1:])):
            raise AudiogramError("audiogram frequencies must be strictly increasing")
        for v in self.hl_db:
            if not (-10.0 <= v <= 120.0) or not math.isfinite(v):
                raise AudiogramError("hearing levels must lie within [-10, 120] dB HL")

    def level(self, freq_hz):
        """Hearing level interpolated on the ERB-rate axis, ends held constant."""
        e = hz_to_erb_rate(np.asarray(freq_hz, dtype=float))
        out = np.interp(e, hz_to_erb_rate(np.asarray(self.freqs_hz)), self.hl_db)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class AlphaProfile:
    """Compression health per audiogram frequency; a scalar broadcasts."""

    values: tuple
    freqs_hz: tuple = AUDIOMETRIC_FREQS

    def __post_init__(self):
        if len(self.values) not in (1, len(self.freqs_hz)):
            raise AudiogramError("alpha profile must be scalar or match the frequency list")
        for v in self.values:
            if not (0.0 <= v <= 1.0):
                raise AudiogramError("alpha values must lie within [0, 1]")

    @classmethod
    def constant(cls, alpha: float, freqs_hz=AUDIOMETRIC_FREQS) -> "AlphaProfile":
        return cls((float(alpha),), tuple(freqs_hz))

    def value(self, freq_hz):
        if len(self.values) == 1:
            out = np.full(np.shape(freq_hz) or (), self.values[0])
            return out if out.ndim else float(out)
        e = hz_to_erb_rate(np.asarray(freq_hz, dtype=float))
        out = np.interp(e, hz_to_erb_rate(np.asarray(self.freqs_hz)), self.values)
        return out if np.ndim(out) else float(out)


def parse_audiogram_json(obj: dict) -> tuple[Audiogram, AlphaProfile | None]:
    """Validate the on-disk audiogram schema and build the domain objects.

    Expected shape: ``{"name": str, "freqs_hz": [...], "hl_db": [...],
    "alpha": number | [...]}`` with ``alpha`` optional.
    """
    if not isinstance(obj, dict):
        raise AudiogramError("audiogram JSON must be an object")
    for key in ("freqs_hz", "hl_db"):
        if key not in obj:
            raise AudiogramError(f"audiogram JSON is missing the '{key}' field")
        if not isinstance(obj[key], (list, tuple)):
            raise AudiogramError(f"audiogram field '{key}' must be a list of numbers")
    name = obj.get("name", "")
    if not isinstance(name, str):
        raise AudiogramError("audiogram field 'name' must be a string")
    try:
        freqs = tuple(float(v) for v in obj["freqs_hz"])
        levels = tuple(float(v) for v in obj["hl_db"])
    except (TypeError, ValueError) as exc:
        raise AudiogramError(f"audiogram lists must contain numbers: {exc}") from None
    audiogram = Audiogram(freqs, levels, name=name)

    alpha = None
    if "alpha" in obj and obj["alpha"] is not None:
        raw = obj["alpha"]
        if isinstance(raw, (int, float)):
            alpha = AlphaProfile.constant(float(raw), freqs)
        elif isinstance(raw, (list, tuple)):
            alpha = AlphaProfile(tuple(float(v) for v in raw), freqs)
        else:
            raise AudiogramError("audiogram field 'alpha' must be a number or list")
    return audiogram, alpha


def load_audiogram(path) -> tuple[Audiogram, AlphaProfile | None]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise AudiogramError(f"invalid JSON in {path}: {exc}") from None
    return parse_audiogram_json(obj)


@dataclass
class IoCurve:
    """Tabulated monotone cochlear input -> output level map with inverse lookup."""

    p_in: np.ndarray
    p_out: np.ndarray
    fp1: float
    alpha: float

    def forward(self, p_in):
        p = np.clip(np.asarray(p_in, dtype=float), self.p_in[0], self.p_in[-1])
        out = np.interp(p, self.p_in, self.p_out)
        return out if out.ndim else float(out)

    def inverse(self, p_out, with_flag: bool = False):
        """Piecewise-linear inverse; values outside the range clamp to the ends."""
        y = np.asarray(p_out, dtype=float)
        saturated = (y < self.p_out[0]) | (y > self.p_out[-1])
        out = np.interp(y, self.p_out, self.p_in)
        out = out if out.ndim else float(out)
        if with_flag:
            return out, (saturated if np.ndim(saturated) else bool(saturated))
        return out

    def zero_cross(self) -> float:
        """Input level at which the output crosses 0 dB."""
        return float(np.interp(0.0, self.p_out, self.p_in))


def io_inverse(curve: IoCurve, p_out):
    """Module-level convenience wrapper for :meth:`IoCurve.inverse`."""
    return curve.inverse(p_out)


def nh_active_gain_db(fp1: float, levels, params: GcParams = GcParams(),
                      p_gain0: float = 100.0) -> np.ndarray:
    """Normal-hearing active gain (dB) at the channel peak for given input levels.

    The HP-AF log-gain evaluated at the passive peak, referenced to the gain
    at ``p_gain0`` so the value reaches 0 dB at high levels.  Scaling this by
    ``alpha`` gives the impaired listener's active gain.
    """
    levels = np.asarray(levels, dtype=float)

    def log_gain(level):
        fr2 = (params.frat0 + params.frat1 * level) * fp1
        theta = np.arctan((fp1 - fr2) / (params.b2 * erb_bandwidth(fr2)))
        return (20.0 / np.log(10.0)) * params.c2_nh * theta

    return log_gain(levels) - log_gain(np.asarray(p_gain0, dtype=float))


class ChannelIoModel:
    """IO-function machinery for one filterbank channel.

    Tabulates the normal-hearing active gain on a dense level grid, derives
    the per-channel output normalization (0 dB output at the normal-hearing
    absolute threshold), and provides IO curves for any compression health.
    """

    def __init__(self, fp1: float, threshold_spl: float,
                 params: GcParams = GcParams(), p_gain0: float = 100.0):
        self.fp1 = float(fp1)
        self.p_at = float(threshold_spl)
        self.p_gain0 = float(p_gain0)
        n = int(round((IO_GRID_MAX - IO_GRID_MIN) / IO_GRID_STEP)) + 1
        self.grid = np.linspace(IO_GRID_MIN, IO_GRID_MAX, n)
        self.gain_db = nh_active_gain_db(self.fp1, self.grid, params, p_gain0)
        if not (IO_GRID_MIN <= self.p_at <= IO_GRID_MAX):
            raise IoFunctionError("absolute-threshold level lies outside the IO grid")
        self.k_const = float(np.interp(self.p_at, self.grid, self.gain_db) + self.p_at)

    def active_gain(self, pc_db, alpha: float):
        """Level-dependent gain in dB for compression health ``alpha``."""
        pc = np.clip(np.asarray(pc_db, dtype=float), self.grid[0], self.grid[-1])
        out = alpha * np.interp(pc, self.grid, self.gain_db)
        return out if out.ndim else float(out)

    def curve(self, alpha: float) -> IoCurve:
        """Passive-free IO curve: output = active gain + input, re-referenced."""
        if not 0.0 <= alpha <= 1.0:
            raise IoFunctionError("alpha must lie within [0, 1]")
        p_out = alpha * self.gain_db + self.grid - self.k_const
        if np.any(np.diff(p_out) <= 0.0):
            raise IoFunctionError(
                f"IO tabulation is not strictly increasing at fp1={self.fp1:.1f} Hz, "
                f"alpha={alpha}; rejecting parameter set")
        return IoCurve(self.grid.copy(), p_out, self.fp1, alpha)

    def threshold_input(self, alpha: float) -> float:
        """Input level where the passive-free curve crosses 0 dB output."""
        return self.curve(alpha).zero_cross()

    def hl_act(self, alpha: float) -> float:
        return self.threshold_input(alpha) - self.threshold_input(1.0)


@dataclass
class HlSplit:
    hl_total: float
    hl_act: float
    hl_pas: float
    alpha_requested: float
    alpha: float          # compensated value actually used
    l_pas: float          # vertical curve shift realizing hl_pas


def split_hearing_loss(hl_total: float, requested_alpha: float,
                       io_model: ChannelIoModel,
                       alpha_tol: float = 1e-3, max_iter: int = 40) -> HlSplit:
    """Split a total loss into active and passive parts at a given health.

    If the requested ``alpha`` implies more active loss than the audiogram
    allows, the health is raised (bisection) to the smallest value whose
    active loss fits; the passive remainder keeps the identity
    ``hl_act + hl_pas == hl_total`` exact.
    """
    if hl_total < 0:
        raise ValueError("hl_total must be >= 0")
    if not 0.0 <= requested_alpha <= 1.0:
        raise ValueError("alpha must lie within [0, 1]")
    if io_model.p_at + hl_total > IO_GRID_MAX:
        raise IoFunctionError(
            f"hl_total={hl_total:.1f} dB exceeds the representable IO range "
            f"for fp1={io_model.fp1:.1f} Hz")

    def act(alpha):
        return io_model.hl_act(alpha)

    alpha = requested_alpha
    if act(alpha) > hl_total:
        lo, hi = requested_alpha, 1.0
        for _ in range(max_iter):
            if hi - lo <= alpha_tol:
                break
            mid = 0.5 * (lo + hi)
            if act(mid) <= hl_total:
                hi = mid
            else:
                lo = mid
        alpha = hi
    hl_act = min(act(alpha), hl_total)
    hl_pas = hl_total - hl_act
    # Vertical shift chosen so the shifted curve crosses 0 dB exactly at the
    # listener's threshold input (HL-0-dB level plus the total loss).
    l_pas = io_model.curve(alpha).forward(io_model.p_at + hl_total)
    return HlSplit(hl_total=float(hl_total), hl_act=float(hl_act), hl_pas=float(hl_pas),
                   alpha_requested=float(requested_alpha), alpha=float(alpha),
                   l_pas=float(l_pas))


@dataclass
class HearingSpec:
    """Per-channel hearing description resolved onto the filterbank axis."""

    fp1: np.ndarray
    hl_total: np.ndarray
    alpha_requested: np.ndarray
    alpha: np.ndarray
    hl_act: np.ndarray
    hl_pas: np.ndarray
    l_pas: np.ndarray
    name: str = ""

    def __post_init__(self):
        n = len(self.fp1)
        for attr in ("hl_total", "alpha_requested", "alpha", "hl_act", "hl_pas", "l_pas"):
            arr = np.asarray(getattr(self, attr), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{attr} must have one value per channel")
            setattr(self, attr, arr)

    @property
    def n_ch(self) -> int:
        return len(self.fp1)

    @classmethod
    def normal(cls, fp1) -> "HearingSpec":
        fp1 = np.asarray(fp1, dtype=float)
        z = np.zeros_like(fp1)
        return cls(fp1=fp1, hl_total=z.copy(), alpha_requested=np.ones_like(fp1),
                   alpha=np.ones_like(fp1), hl_act=z.copy(), hl_pas=z.copy(),
                   l_pas=z.copy(), name="normal-hearing")


def resolve_hearing_spec(audiogram: Audiogram, alpha: AlphaProfile | float,
                         fp1, io_models) -> HearingSpec:
    """Interpolate an audiogram and health profile to channels and split each.

    Interpolation runs on the ERB-rate axis with constant extrapolation.
    Errors from individual channels are re-raised with the channel index.
    """
    if isinstance(alpha, (int, float)):
        alpha = AlphaProfile.constant(float(alpha), audiogram.freqs_hz)
    fp1 = np.asarray(fp1, dtype=float)
    if len(io_models) != len(fp1):
        raise ValueError("io_models must match the channel list")
    hl_ch = np.atleast_1d(audiogram.level(fp1))
    alpha_ch = np.atleast_1d(alpha.value(fp1))

    rows = []
    for idx, (model, hl, a_req) in enumerate(zip(io_models, hl_ch, alpha_ch)):
        try:
            rows.append(split_hearing_loss(float(hl), float(a_req), model))
        except (ValueError, IoFunctionError) as exc:
            raise type(exc)(f"channel {idx} (fp1={model.fp1:.1f} Hz): {exc}") from None
    return HearingSpec(
        fp1=fp1,
        hl_total=np.array([r.hl_total for r in rows]),
        alpha_requested=np.array([r.alpha_requested for r in rows]),
        alpha=np.array([r.alpha for r in rows]),
        hl_act=np.array([r.hl_act for r in rows]),
        hl_pas=np.array([r.hl_pas for r in rows]),
        l_pas=np.array([r.l_pas for r in rows]),
        name=audiogram.name,
    )
