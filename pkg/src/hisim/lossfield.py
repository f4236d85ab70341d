"""Input-referred loss field: the frame-by-frame attenuation that makes a
normal-hearing listener's excitation approximate the impaired listener's.

The active part comes from the composite of the impaired IO function and
the inverse normal-hearing IO function; the constant passive part is added
on top.  Both synthesis back ends consume this field.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .filterbank import ChannelTable
from .framing import FrameSeries, resample_gain
from .hearing import HearingSpec


@dataclass
class LossField:
    """Channel x frame attenuation in dB, split into active and passive parts."""

    l_total: np.ndarray
    l_act: np.ndarray
    hl_pas: np.ndarray          # constant per channel
    fp1: np.ndarray
    frame_shift: float
    frame_len: float
    t0: float = 0.0
    clamped_frames: int = 0     # count of entries where l_act was clipped to 0

    @property
    def n_ch(self) -> int:
        return self.l_total.shape[0]

    @property
    def n_frames(self) -> int:
        return self.l_total.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_frames) * self.frame_shift

    def to_csv(self, fileobj=None) -> str | None:
        own = fileobj is None
        buf = io.StringIO() if own else fileobj
        writer = csv.writer(buf)
        writer.writerow(["fp1_hz"] + [f"{t:.6f}" for t in self.times])
        for k in range(self.n_ch):
            writer.writerow([f"{self.fp1[k]:.3f}"] + [f"{v:.3f}" for v in self.l_total[k]])
        if own:
            return buf.getvalue()
        return None


def compute_loss_field(pc: np.ndarray, spec: HearingSpec,
                       table: ChannelTable) -> LossField:
    """Frame-based input-referred loss from estimated levels.

    Per entry the active loss is the level minus the normal-hearing input
    that would produce the impaired listener's output at that level; tiny
    negative values from interpolation near curve crossings are clipped.
    """
    if spec.n_ch != table.n_ch or pc.shape[0] != table.n_ch:
        raise ValueError("level matrix, hearing spec, and table must agree on channels")
    cfg = table.config
    l_act = np.empty_like(pc)
    clamped = 0
    for k in range(table.n_ch):
        model = table.io_models[k]
        grid = model.grid
        f_hl = float(spec.alpha[k]) * model.gain_db + grid - model.k_const
        f_nh = model.gain_db + grid - model.k_const
        # composite: input minus the NH input giving the same output
        composite = grid - np.interp(f_hl, f_nh, grid)
        vals = np.interp(np.clip(pc[k], grid[0], grid[-1]), grid, composite)
        clamped += int(np.count_nonzero(vals < 0))
        l_act[k] = np.maximum(vals, 0.0)
    l_total = l_act + spec.hl_pas[:, None]
    return LossField(l_total=l_total, l_act=l_act, hl_pas=spec.hl_pas.copy(),
                     fp1=table.fp1.copy(), frame_shift=cfg.frame_shift,
                     frame_len=cfg.frame_len, clamped_frames=clamped)


def attenuated_channels(signal_samples: np.ndarray, table: ChannelTable,
                        spec: HearingSpec, loss: LossField,
                        cascade_outputs: np.ndarray | None = None) -> np.ndarray:
    """Per-channel cascade outputs scaled sample-wise by the loss field."""
    cfg = table.config
    x = np.asarray(signal_samples, dtype=float)
    if cascade_outputs is None:
        cascade_outputs = table.filter_channels(x, spec.alpha)
    n = cascade_outputs.shape[1]
    out = np.empty_like(cascade_outputs)
    for k in range(table.n_ch):
        series = FrameSeries(-loss.l_total[k], loss.frame_shift, loss.frame_len, loss.t0)
        out[k] = cascade_outputs[k] * resample_gain(series, cfg.fs, n)
    return out
