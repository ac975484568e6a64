"""Command-line front end: spectra, synth, analyze, certify, fit.

Exit codes: 0 success (an entanglement verdict of "separable" is data, not
an error), 1 usage/validation problems, 2 data or configuration
infeasibility.
"""

import argparse
import dataclasses
import hashlib
import json
import sys

import numpy as np

from . import dsp, fileio, model, synth
from .config import SchemaError, load_config
from .errors import TwinbeamError
from .fit import FitProblem, fit_spectra

TRACE_CHANNELS = ("xminus", "xplus", "yplus", "yminus",
                  "amp_signal", "phase_signal", "snl", "enl")


class UsageError(TwinbeamError):
    """Bad command-line arguments or value ranges; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    parser = _Parser(prog="twinbeam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    spectra = sub.add_parser("spectra", help="evaluate the analytic noise spectra to CSV")
    spectra.add_argument("--config", required=True)
    spectra.add_argument("--f-min", type=float, default=0.0)
    spectra.add_argument("--f-max", type=float, default=100e6)
    spectra.add_argument("--num-points", type=int, default=1001)
    spectra.add_argument("--out", required=True)
    spectra.add_argument("--json", action="store_true")

    synth_cmd = sub.add_parser("synth", help="synthesize a measurement-chain trace file")
    synth_cmd.add_argument("--config", required=True)
    synth_cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
    synth_cmd.add_argument("--out", required=True)
    synth_cmd.add_argument("--json", action="store_true")

    analyze = sub.add_parser("analyze", help="spectrum-analyzer readings from a trace file")
    analyze.add_argument("trace")
    analyze.add_argument("--config", required=True)
    analyze.add_argument("--f0", type=float, default=None,
                         help="readout frequency (default: config analysis frequency)")
    analyze.add_argument("--out", default=None)
    analyze.add_argument("--json", action="store_true")

    certify = sub.add_parser("certify", help="correct readings and apply the Duan test")
    certify.add_argument("analysis", nargs="?", default=None,
                         help="analysis JSON from the analyze step")
    certify.add_argument("--vx", type=float, default=None,
                         help="already-corrected amplitude-difference variance (linear)")
    certify.add_argument("--vy", type=float, default=None,
                         help="already-corrected phase-sum variance (linear)")
    certify.add_argument("--enl-db", type=float, default=None,
                         help="electronics floor in dB relative to the SNL (negative)")
    certify.add_argument("--mode-match", type=float, default=None,
                         help="de-embed this mode-matching efficiency from the phase channel")
    certify.add_argument("--out", default=None)
    certify.add_argument("--json", action="store_true")

    fit_cmd = sub.add_parser("fit", help="fit model parameters to a spectrum CSV")
    fit_cmd.add_argument("spectrum")
    fit_cmd.add_argument("--out", default=None)
    fit_cmd.add_argument("--json", action="store_true")
    return parser


def _emit(payload, out_path, as_json):
    if out_path:
        fileio.write_json(out_path, payload)
    if as_json or not out_path:
        print(json.dumps(payload, indent=2, sort_keys=True))


def _cmd_spectra(args):
    cfg = load_config(args.config)
    if args.f_min < 0 or args.f_max < args.f_min or args.num_points < 1:
        raise UsageError(
            f"invalid frequency range [{args.f_min}, {args.f_max}] / {args.num_points} points")
    if args.f_min == args.f_max:
        freqs = np.array([args.f_min])
    else:
        freqs = np.linspace(args.f_min, args.f_max, args.num_points)
    s_i = np.atleast_1d(model.intensity_diff_spectrum(cfg.nopo, freqs))
    s_p = np.atleast_1d(model.phase_sum_spectrum(cfg.nopo, freqs))
    fileio.write_spectrum_csv(args.out, freqs, amplitude=s_i, phase=s_p)
    if args.json:
        print(json.dumps({"out": args.out, "num_points": len(freqs),
                          "config_hash": cfg.hash}, sort_keys=True))
    return 0


def _synthesize_channels(cfg):
    params = cfg.nopo
    if cfg.eta_placement == "explicit":
        params = dataclasses.replace(params, detection_efficiency=1.0)
    traces = synth.synthesize_twin_beams(params, cfg.synth)
    seed = cfg.synth.seed
    if cfg.eta_placement == "explicit":
        eta = cfg.explicit_detection_efficiency
        detected = {
            name: synth.apply_detection(getattr(traces, name), eta, seed, source=f"detect:{name}")
            for name in ("xminus", "xplus", "yplus", "yminus")
        }
        traces = synth.TraceSet(
            sample_rate=traces.sample_rate,
            x1=synth.combine_channels(detected["xplus"], detected["xminus"], "sum"),
            x2=synth.combine_channels(detected["xplus"], detected["xminus"], "difference"),
            y1=synth.combine_channels(detected["yplus"], detected["yminus"], "sum"),
            y2=synth.combine_channels(detected["yplus"], detected["yminus"], "difference"),
            snl_reference=traces.snl_reference,
            **detected,
        )
    amp = synth.mz_measure(traces, "amplitude", cfg.interferometer, cfg.amplitude_chain, seed)
    phase = synth.mz_measure(traces, "phase", cfg.interferometer, cfg.phase_chain, seed)
    enl_trace = synth.electronics_floor_series(cfg.enl, cfg.synth.num_samples, seed)
    return {
        "xminus": traces.xminus, "xplus": traces.xplus,
        "yplus": traces.yplus, "yminus": traces.yminus,
        "amp_signal": amp.signal_channel, "phase_signal": phase.signal_channel,
        "snl": amp.snl_channel, "enl": enl_trace,
    }


def _cmd_synth(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, synth=dataclasses.replace(cfg.synth, seed=args.seed))
    channels = _synthesize_channels(cfg)
    payload = fileio.encode_trace(cfg.synth.sample_rate, channels)
    fileio.atomic_write_bytes(args.out, payload)
    checksum = hashlib.sha256(payload).hexdigest()
    summary = {"out": args.out, "seed": cfg.synth.seed, "sha256": checksum,
               "channels": list(channels), "num_samples": cfg.synth.num_samples,
               "config_hash": cfg.hash}
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"seed {cfg.synth.seed}")
        print(f"sha256 {checksum}")
    return 0


def _cmd_analyze(args):
    cfg = load_config(args.config)
    f0 = args.f0 if args.f0 is not None else cfg.interferometer.analysis_frequency
    sample_rate, channels = fileio.read_trace(args.trace)
    if not 0 < f0 < sample_rate / 2.0:
        raise UsageError(f"f0 {f0:.6g} Hz outside (0, Nyquist {sample_rate / 2:.6g} Hz)")
    for name in ("amp_signal", "phase_signal", "snl", "enl"):
        if name not in channels:
            raise UsageError(f"trace file lacks required channel {name!r}")
    settings = dsp.AnalyzerSettings(**cfg.analyzer)
    estimates = {name: dsp.welch_psd(channels[name], sample_rate, settings)
                 for name in ("amp_signal", "phase_signal", "snl", "enl")}
    reference = estimates["snl"]
    with open(args.trace, "rb") as handle:
        trace_hash = hashlib.sha256(handle.read()).hexdigest()
    payload = {
        "f0_hz": f0,
        "amplitude_db": dsp.band_power_rel_snl(estimates["amp_signal"], reference, f0),
        "phase_db": dsp.band_power_rel_snl(estimates["phase_signal"], reference, f0),
        "enl_db": dsp.band_power_rel_snl(estimates["enl"], reference, f0),
        "num_averages": reference.num_averages,
        "rbw_hz": settings.rbw,
        "vbw_hz": settings.vbw,
        "config_hash": cfg.hash,
        "trace_sha256": trace_hash,
    }
    _emit(payload, args.out, args.json)
    return 0


def _cmd_certify(args):
    corrections = []

    def record(channel, name, before, after):
        corrections.append({"channel": channel, "correction": name,
                            "before": before, "after": after})

    if args.vx is not None or args.vy is not None:
        if args.vx is None or args.vy is None:
            raise UsageError("--vx and --vy must be given together")
        amp, phase = args.vx, args.vy
        raw = {"amplitude": amp, "phase": phase}
    else:
        if args.analysis is None:
            raise UsageError("provide an analysis JSON or --vx/--vy")
        with open(args.analysis) as handle:
            analysis = json.load(handle)
        for key in ("amplitude_db", "phase_db"):
            if key not in analysis:
                raise UsageError(f"analysis JSON lacks {key!r}")
        amp = model.from_db(analysis["amplitude_db"])
        phase = model.from_db(analysis["phase_db"])
        raw = {"amplitude": amp, "phase": phase}
        enl_db = args.enl_db if args.enl_db is not None else analysis.get("enl_db")
        if enl_db is not None:
            enl = model.from_db(enl_db)
            corrected = model.correct_for_electronic_noise(amp, enl)
            record("amplitude", "electronic_noise", amp, corrected)
            amp = corrected
            corrected = model.correct_for_electronic_noise(phase, enl)
            record("phase", "electronic_noise", phase, corrected)
            phase = corrected

    if args.mode_match is not None:
        corrected = model.remove_mode_match_penalty(phase, args.mode_match)
        record("phase", "mode_match", phase, corrected)
        phase = corrected

    verdict = model.duan_certify(model.QuadratureVariancePair(amp, phase))
    payload = {
        "raw": raw,
        "corrections": corrections,
        "amplitude_diff_variance": amp,
        "phase_sum_variance": phase,
        "duan_sum": verdict.total,
        "entangled": verdict.entangled,
        "snl_bound": 2.0,
    }
    _emit(payload, args.out, args.json)
    return 0


def _cmd_fit(args):
    freqs, amplitude, phase = fileio.read_spectrum_csv(args.spectrum)
    problem = FitProblem(frequencies=freqs, amplitude_observed=amplitude,
                         phase_observed=phase)
    result = fit_spectra(problem)
    payload = {
        "efficiency_product": result.efficiency_product,
        "bandwidth_hz": result.bandwidth,
        "pump_ratio": result.pump_ratio,
        "residual_norm": result.residual_norm,
        "covariance": np.asarray(result.covariance).tolist(),
        "converged": result.converged,
        "iterations": result.iterations,
        "unidentifiable": list(result.unidentifiable),
    }
    _emit(payload, args.out, args.json)
    return 0


_COMMANDS = {
    "spectra": _cmd_spectra,
    "synth": _cmd_synth,
    "analyze": _cmd_analyze,
    "certify": _cmd_certify,
    "fit": _cmd_fit,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except (UsageError, SchemaError) as exc:
        print(f"twinbeam: error: {exc}", file=sys.stderr)
        return 1
    except TwinbeamError as exc:
        offset = getattr(exc, "byte_offset", None)
        suffix = f" (byte offset {offset})" if offset is not None else ""
        print(f"twinbeam: infeasible: {exc}{suffix}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"twinbeam: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
