"""Command-line interface: simulate, analyze, iofunc, bandwidth, distance,
noisy, and serve subcommands.

Exit codes: 0 on success, 2 on usage errors (argparse default), 1 on
processing errors.  All processing is deterministic for fixed seeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .audio_io import AudioIoError, load_wav, save_wav, set_leq
from .config import AppConfig, load_config
from .evaluate import measure_bandwidth, pink_noise_mix, spectral_distance, sweep_io
from .hearing import AlphaProfile, AudiogramError, load_audiogram
from .pipeline import METHODS, analyze_signal, filterbank_for, simulate
from .presets import PRESET_AUDIOGRAMS, get_preset

DEFAULT_PORT_ENV = "HISIM_PORT"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--spl-ref", type=float, default=None,
                        help="dB SPL of digital RMS 1.0 (default 94)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hisim",
                                     description="Hearing impairment simulation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="transform audio toward an impaired listener's excitation")
    sim.add_argument("--in", dest="infile", required=True)
    sim.add_argument("--out", dest="outfile", required=True)
    sim.add_argument("--audiogram", required=True,
                     help="preset name or audiogram JSON file")
    sim.add_argument("--alpha", type=float, default=None,
                     help="compression health in [0,1]; overrides the audiogram file")
    sim.add_argument("--method", choices=METHODS, default="dtvf")
    sim.add_argument("--spl", type=float, default=None,
                     help="normalize input to this Leq (dB SPL) before processing")
    sim.add_argument("--smear-cutoff", type=float, default=None,
                     help="temporal smearing lowpass cutoff in Hz (fbas only)")
    _add_common(sim)

    ana = sub.add_parser("analyze", help="export the excitation pattern as CSV")
    ana.add_argument("--in", dest="infile", required=True)
    ana.add_argument("--out", dest="outfile", required=True, help="CSV destination")
    ana.add_argument("--audiogram", default=None, help="optional impaired setting")
    ana.add_argument("--alpha", type=float, default=None)
    ana.add_argument("--spl", type=float, default=None)
    _add_common(ana)

    iof = sub.add_parser("iofunc", help="tabulate IO curves (gnuplot-friendly columns)")
    iof.add_argument("--freqs", required=True, help="comma-separated Hz list")
    iof.add_argument("--alphas", required=True, help="comma-separated health list")
    iof.add_argument("--audiogram", default=None)
    iof.add_argument("--out", default="-", help="CSV destination, '-' for stdout")
    _add_common(iof)

    bw = sub.add_parser("bandwidth", help="cascade bandwidth vs compression health")
    bw.add_argument("--freqs", required=True)
    bw.add_argument("--alphas", required=True)
    bw.add_argument("--out", default="-")
    _add_common(bw)

    dist = sub.add_parser("distance", help="spectral distance between two recordings")
    dist.add_argument("--test", required=True)
    dist.add_argument("--ref", required=True)
    dist.add_argument("--spl", type=float, default=None,
                      help="normalize both inputs to this Leq first")
    _add_common(dist)

    noisy = sub.add_parser("noisy", help="add pink noise at an SNR")
    noisy.add_argument("--in", dest="infile", required=True)
    noisy.add_argument("--out", dest="outfile", required=True)
    noisy.add_argument("--snr", type=float, required=True)
    noisy.add_argument("--seed", type=int, default=0)
    _add_common(noisy)

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--port", type=int,
                     default=int(os.environ.get(DEFAULT_PORT_ENV, "8750")))
    srv.add_argument("--bind", default="127.0.0.1")
    _add_common(srv)
    return parser


def _app_config(args) -> AppConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else AppConfig()
    if getattr(args, "spl_ref", None) is not None:
        cfg.spl_ref = args.spl_ref
    return cfg


def _load_listener(ref: str, alpha_flag):
    """Audiogram from a preset name or JSON file, plus the health profile."""
    alpha = None
    if ref in PRESET_AUDIOGRAMS:
        audiogram = get_preset(ref)
    else:
        audiogram, alpha = load_audiogram(ref)
    if alpha_flag is not None:
        alpha = AlphaProfile.constant(alpha_flag, audiogram.freqs_hz)
    if alpha is None:
        alpha = AlphaProfile.constant(1.0, audiogram.freqs_hz)
    return audiogram, alpha


def _parse_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise AudiogramError(f"expected a comma-separated number list, got {text!r}") from None


def _cmd_simulate(args) -> int:
    cfg = _app_config(args)
    signal = load_wav(args.infile, cfg.spl_ref)
    if args.spl is not None:
        signal = set_leq(signal, args.spl)
    cfg.fs = signal.fs
    audiogram, alpha = _load_listener(args.audiogram, args.alpha)
    table = filterbank_for(cfg)
    result = simulate(signal, audiogram, alpha, table, method=args.method,
                      smear_cutoff_hz=args.smear_cutoff)
    save_wav(result.output, args.outfile)
    return 0


def _cmd_analyze(args) -> int:
    cfg = _app_config(args)
    signal = load_wav(args.infile, cfg.spl_ref)
    if args.spl is not None:
        signal = set_leq(signal, args.spl)
    cfg.fs = signal.fs
    table = filterbank_for(cfg)
    audiogram = alpha = None
    if args.audiogram:
        audiogram, alpha = _load_listener(args.audiogram, args.alpha)
    ep = analyze_signal(signal, table, audiogram, alpha if alpha is not None else 1.0)
    with open(args.outfile, "w", encoding="utf-8", newline="") as fh:
        ep.to_csv(fh)
    return 0


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _cmd_iofunc(args) -> int:
    cfg = _app_config(args)
    table = filterbank_for(cfg)
    freqs = _parse_list(args.freqs)
    alphas = _parse_list(args.alphas)
    audiogram = None
    if args.audiogram:
        audiogram, _ = _load_listener(args.audiogram, None)

    fh, close = _open_out(args.out)
    try:
        fh.write("# p_in_db" + "".join(
            f",{f:g}Hz_a{a:g}" for f in freqs for a in alphas) + "\n")
        models = [table.io_models[int(np.argmin(np.abs(table.fp1 - f)))] for f in freqs]
        curves = []
        for f, model in zip(freqs, models):
            for a in alphas:
                if audiogram is None:
                    curves.append(model.curve(a))
                else:
                    from .hearing import split_hearing_loss
                    split = split_hearing_loss(float(audiogram.level(f)), a, model)
                    base = model.curve(split.alpha)
                    base.p_out = base.p_out - split.l_pas
                    curves.append(base)
        grid = models[0].grid
        for i, p in enumerate(grid):
            fh.write(f"{p:.1f}" + "".join(f",{c.p_out[i]:.3f}" for c in curves) + "\n")
    finally:
        if close:
            fh.close()
    return 0


def _cmd_bandwidth(args) -> int:
    cfg = _app_config(args)
    table = filterbank_for(cfg)
    fh, close = _open_out(args.out)
    try:
        fh.write("# freq_hz,alpha,erb_hz,ratio_vs_alpha1,ratio_vs_erbn\n")
        for f in _parse_list(args.freqs):
            for a in _parse_list(args.alphas):
                r = measure_bandwidth(f, a, table)
                fh.write(f"{f:g},{a:g},{r.erb_hz:.2f},{r.ratio_vs_alpha1:.4f},"
                         f"{r.ratio_vs_erbn:.4f}\n")
    finally:
        if close:
            fh.close()
    return 0


def _cmd_distance(args) -> int:
    cfg = _app_config(args)
    test = load_wav(args.test, cfg.spl_ref)
    ref = load_wav(args.ref, cfg.spl_ref)
    if args.spl is not None:
        test, ref = set_leq(test, args.spl), set_leq(ref, args.spl)
    if test.fs != ref.fs:
        raise AudioIoError("test and reference must share a sampling rate")
    cfg.fs = test.fs
    table = filterbank_for(cfg)
    result = spectral_distance(analyze_signal(test, table), analyze_signal(ref, table))
    print(json.dumps({"d_sp_db": result.d_sp, "shift_frames": result.shift_frames}))
    return 0


def _cmd_noisy(args) -> int:
    cfg = _app_config(args)
    signal = load_wav(args.infile, cfg.spl_ref)
    noisy = signal.with_samples(pink_noise_mix(signal.samples, args.snr, args.seed))
    save_wav(noisy, args.outfile)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = _app_config(args)
    uvicorn.run(create_app(cfg), host=args.bind, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "iofunc": _cmd_iofunc,
    "bandwidth": _cmd_bandwidth,
    "distance": _cmd_distance,
    "noisy": _cmd_noisy,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (AudioIoError, AudiogramError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
