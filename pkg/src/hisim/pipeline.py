"""End-to-end simulation pipeline shared by the CLI and the HTTP service."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import CalibratedSignal
from .config import AppConfig
from .filterbank import (ChannelTable, ExcitationPattern, analyze, build_filterbank,
                         estimate_level)
from .hearing import AlphaProfile, Audiogram, HearingSpec, resolve_hearing_spec
from .lossfield import LossField, attenuated_channels, compute_loss_field
from .synthesis import DtvfConfig, SmearConfig, synth_dtvf, synth_fbas, temporal_smear

METHODS = ("dtvf", "fbas")


@dataclass
class SimulationResult:
    output: CalibratedSignal
    loss: LossField
    spec: HearingSpec
    method: str


_TABLE_CACHE: dict = {}


def filterbank_for(config: AppConfig) -> ChannelTable:
    """Build (or reuse) the channel table for an app configuration."""
    key = (config.fs, config.n_ch, config.f_lo, config.f_hi, config.p_gain0,
           config.workers, config.params, config.threshold.freqs_hz,
           config.threshold.spl_db)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = build_filterbank(config.gcfb(), config.params,
                                             config.threshold)
    return _TABLE_CACHE[key]


def resolve_listener(audiogram: Audiogram, alpha, table: ChannelTable) -> HearingSpec:
    return resolve_hearing_spec(audiogram, alpha, table.fp1, table.io_models)


def simulate(signal: CalibratedSignal, audiogram: Audiogram, alpha,
             table: ChannelTable, method: str = "dtvf",
             smear_cutoff_hz: float | None = None) -> SimulationResult:
    """Transform audio so a normal-hearing listener approximates the target
    impaired listener's excitation."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    spec = resolve_listener(audiogram, alpha, table)
    x = signal.samples

    cascade_outputs = table.filter_channels(x, spec.alpha)
    pc = estimate_level(x, table, signal.spl_ref, spec.alpha, cascade_outputs)
    loss = compute_loss_field(pc, spec, table)

    if method == "dtvf":
        if smear_cutoff_hz is not None:
            raise ValueError("temporal smearing is only available with the fbas method")
        out = synth_dtvf(x, loss, table)
    else:
        channels = attenuated_channels(x, table, spec, loss, cascade_outputs)
        if smear_cutoff_hz is not None:
            cfg = SmearConfig(cutoff_hz=float(smear_cutoff_hz))
            for k in range(channels.shape[0]):
                channels[k] = temporal_smear(channels[k], cfg, table.config.fs)
        out = synth_fbas(channels, table)

    return SimulationResult(output=signal.with_samples(out), loss=loss,
                            spec=spec, method=method)


def analyze_signal(signal: CalibratedSignal, table: ChannelTable,
                   audiogram: Audiogram | None = None,
                   alpha=1.0) -> ExcitationPattern:
    """Excitation pattern under a normal or impaired hearing setting."""
    hearing = None
    if audiogram is not None:
        hearing = resolve_listener(audiogram, alpha, table)
    return analyze(signal, table, hearing)
