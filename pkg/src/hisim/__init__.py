"""Hearing impairment simulation toolkit.

Analysis: a frame-based compressive-gammachirp filterbank producing
excitation patterns under normal or impaired hearing settings.
Simulation: loss-field synthesis through a direct time-varying filter or a
filterbank resynthesis, with built-in quantitative evaluation.
"""

from .audio_io import CalibratedSignal, load_wav, save_wav, set_leq
from .config import AppConfig, load_config
from .erbscale import erb_bandwidth, erb_rate_to_hz, hz_to_erb_rate
from .evaluate import (DistanceResult, IoSweepResult, make_tone, measure_bandwidth,
                       pink_noise_mix, spectral_distance, sweep_io)
from .filterbank import (ChannelTable, ExcitationPattern, GcfbConfig, analyze,
                         build_filterbank, estimate_level)
from .filters import GcParams, MagnitudeSpectrum, MinPhaseKernel, design_minphase
from .hearing import (AlphaProfile, Audiogram, HearingSpec, ThresholdReference,
                      load_audiogram, resolve_hearing_spec, split_hearing_loss)
from .lossfield import LossField, attenuated_channels, compute_loss_field
from .pipeline import SimulationResult, analyze_signal, filterbank_for, simulate
from .presets import PRESET_AUDIOGRAMS, get_preset
from .synthesis import (DtvfConfig, SmearConfig, loss_to_spectrum, synth_dtvf,
                        synth_fbas, temporal_smear)

__version__ = "0.1.0"
