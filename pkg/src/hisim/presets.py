"""Built-in audiograms and the default threshold reference."""

from __future__ import annotations

from .hearing import AUDIOMETRIC_FREQS, Audiogram

PRESET_AUDIOGRAMS = {
    "flat-0": Audiogram(AUDIOMETRIC_FREQS, (0.0,) * 7, name="flat-0"),
    "80yr-male": Audiogram(AUDIOMETRIC_FREQS,
                           (23.5, 24.3, 26.8, 27.9, 32.9, 48.3, 68.5),
                           name="80yr-male"),
    "mild-sloping": Audiogram(AUDIOMETRIC_FREQS,
                              (10.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0),
                              name="mild-sloping"),
}


def get_preset(name: str) -> Audiogram:
    try:
        return PRESET_AUDIOGRAMS[name]
    except KeyError:
        raise KeyError(
            f"unknown audiogram preset '{name}'; available: "
            f"{sorted(PRESET_AUDIOGRAMS)}") from None
