"""Command line interface.

Subcommands: ingest, calibrate, detect, simulate, pump-calc, serve,
report, synth-corpus. Recordings come from a CHB-MIT style corpus
directory (``--data`` or $CSEIZ_CORPUS_DIR); ``synth-corpus`` generates
a surrogate corpus when the real one is unavailable.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from cseiz import (calibration, chbmit, closed_loop, configfile, detector,
                   edf, kernels, metrics, micropump, pipeline, preprocess,
                   service, synthetic)


def _data_dir(args):
    root = args.data or os.environ.get("CSEIZ_CORPUS_DIR")
    if not root:
        sys.exit("no corpus directory: pass --data or set CSEIZ_CORPUS_DIR "
                 "(see `cseiz synth-corpus` to generate a surrogate)")
    return Path(root)


def _load_loop_config(path):
    if path:
        return configfile.load_loop_config(path)
    return closed_loop.LoopConfig()


def _write_events_jsonl(events, path):
    with open(path, "w") as f:
        for e in events:
            f.write(json.dumps({"time_s": e.time_s,
                                "frame_index": e.frame_index,
                                "latency_s": e.latency_s},
                               sort_keys=True) + "\n")


def _write_metrics_csv(rows, path):
    fields = ["record_id", "tp", "fn", "fp", "tn",
              "sensitivity", "specificity", "mean_latency_s"]
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for record_id, m in rows:
            writer.writerow({"record_id": record_id, **{
                k: ("" if v is None else v) for k, v in m.as_dict().items()}})


def cmd_ingest(args):
    rec = edf.parse_edf(args.edf, channel=args.channel)
    info = {
        "subject_id": rec.subject_id,
        "channels": rec.channel_labels,
        "sample_rate_hz": rec.sample_rate_hz,
        "duration_s": rec.duration_s,
        "n_samples": rec.n_samples,
    }
    if args.summary:
        anns = chbmit.parse_summary(Path(args.summary).read_text())
        stem = Path(args.edf).stem
        info["seizures"] = [
            {"onset_s": a.onset_s, "offset_s": a.offset_s}
            for a in anns if a.record_id == stem]
    print(json.dumps(info, indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{Path(args.edf).stem}_{args.channel or 'all'}.csv"
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["time_s"] + [c for c in rec.channel_labels])
            t = np.arange(rec.n_samples) / rec.sample_rate_hz
            for i in range(rec.n_samples):
                writer.writerow([f"{t[i]:.6f}"]
                                + [f"{rec.samples[c, i]:.3f}"
                                   for c in range(len(rec.channel_labels))])
        print(f"wrote {path}")


def _subject_recordings(data_dir, subject_id, channel, record_ids=None):
    sub = chbmit.load_subject(data_dir, subject_id)
    wanted = record_ids if record_ids is not None else sub.record_ids
    recs = []
    for rid in wanted:
        rec = edf.parse_edf(sub.edf_path(rid), channel=channel)
        recs.append(pipeline.LabeledRecording(
            record_id=rid,
            samples_uv=rec.samples[0],
            sample_rate_hz=rec.sample_rate_hz,
            annotations=sub.annotations_for(rid)))
    return sub, recs


def cmd_calibrate(args):
    data = _data_dir(args)
    base_cfg = _load_loop_config(args.config)
    channel = args.channel or base_cfg.channel
    sub, recs = _subject_recordings(data, args.subject, channel)
    result = calibration.calibrate(
        recs, base=base_cfg.detector,
        lo_hz=base_cfg.band_lo_hz, hi_hz=base_cfg.band_hi_hz)
    out_cfg = closed_loop.LoopConfig(
        detector=result.config,
        pump_geometry=base_cfg.pump_geometry,
        pump_drive=base_cfg.pump_drive,
        dose_duration_s=base_cfg.dose_duration_s,
        initial_reservoir_ml=base_cfg.initial_reservoir_ml,
        channel=channel,
        band_lo_hz=base_cfg.band_lo_hz,
        band_hi_hz=base_cfg.band_hi_hz)
    print(f"calibrated on {len(result.calibration_instances)} seizure "
          f"instance(s): {result.calibration_instances}")
    print(f"held out for evaluation: {result.evaluation_instances}")
    print(f"calibration metrics: {result.calibration_metrics.as_dict()}")
    d = result.config
    print(f"v_min={d.v_min_mv:.1f} mV v_max={d.v_max_mv:.1f} mV "
          f"gain={d.gain:.4f} pulses>={d.pulse_threshold} "
          f"energy>={d.energy_threshold:.1f} mV^2")
    if args.out:
        configfile.save_loop_config(out_cfg, args.out)
        print(f"wrote {args.out}")


def cmd_detect(args):
    cfg = _load_loop_config(args.config)
    channel = args.channel or cfg.channel
    rows = []
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for path in args.edf:
        rec = edf.parse_edf(path, channel=channel)
        stem = Path(path).stem
        raw = rec.samples[0]
        fs = rec.sample_rate_hz
        events, flags = pipeline.run_detection(
            raw, fs, cfg.detector, cfg.band_lo_hz, cfg.band_hi_hz)
        anns = []
        if args.summary:
            anns = [a for a in chbmit.parse_summary(
                        Path(args.summary).read_text())
                    if a.record_id == stem]
            events = metrics.attach_latencies(events, anns)
        for e in events:
            print(json.dumps({"record_id": stem, "time_s": e.time_s,
                              "frame_index": e.frame_index,
                              "latency_s": e.latency_s}, sort_keys=True))
        t_f_s = pipeline.frame_seconds(cfg.detector, fs)
        if anns:
            m = metrics.evaluate(events, anns, flags, t_f_s)
            rows.append((stem, m))
            print(f"{stem}: {m.as_dict()}")
        if out:
            _write_events_jsonl(events, out / f"{stem}_events.jsonl")
            v_mod = preprocess.preprocess_channel(
                raw, fs, cfg.detector.gain, cfg.band_lo_hz, cfg.band_hi_hz)
            spf = int(round(t_f_s * fs))
            counts = kernels.frame_pulse_counts(
                np.ascontiguousarray(v_mod.samples), spf,
                cfg.detector.v_min_mv, cfg.detector.v_max_mv,
                cfg.detector.sra_total_iters_n)
            energies = kernels.frame_mean_square(
                np.ascontiguousarray(v_mod.samples), spf)
            with open(out / f"{stem}_frames.csv", "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(["frame_index", "start_s", "pulse_count",
                                 "energy_mv2", "fired"])
                for i in range(len(flags)):
                    writer.writerow([i, f"{i * t_f_s:.6f}", int(counts[i]),
                                     f"{energies[i]:.6f}", int(flags[i])])
            if args.plot_window:
                _write_plot_csv(out / f"{stem}_plot.csv", v_mod.samples, fs,
                                cfg.detector, args.plot_window)
            (out / f"{stem}_meta.json").write_text(json.dumps(
                {"record_id": stem, "t_f_s": t_f_s, "sample_rate_hz": fs},
                sort_keys=True))
    if out and rows:
        _write_metrics_csv(rows, out / "metrics.csv")


def _write_plot_csv(path, v_mod, fs, dcfg, window):
    """Time vs V_mod plus pulse trains, ready for plotting."""
    lo = max(0, int(window[0] * fs))
    hi = min(len(v_mod), int(window[1] * fs))
    seg = np.ascontiguousarray(v_mod[lo:hi])
    vld = kernels.vld_bits(seg, dcfg.v_min_mv, dcfg.v_max_mv)
    final, onset = kernels.sra_reduce(
        vld, dcfg.sra_total_iters_n,
        dcfg.sra_total_iters_n - dcfg.sra_onset_stage_k)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["time_s", "v_mod_mv", "vld", "sra_onset_stage",
                         "sra_final"])
        for i in range(len(seg)):
            writer.writerow([f"{(lo + i) / fs:.6f}", f"{seg[i]:.4f}",
                             int(vld[i]), int(onset[i]), int(final[i])])


def cmd_simulate(args):
    cfg = _load_loop_config(args.config)
    if args.channel:
        from dataclasses import replace

        cfg = replace(cfg, channel=args.channel)
    rec = edf.parse_edf(args.edf, channel=cfg.channel)
    telemetry = None
    prescriptions = None
    if args.service:
        client = service.WireClient(args.service, channel=args.service_channel)
        telemetry = client
        prescriptions = client.get_latest_prescription
    if args.streaming:
        trace = closed_loop.run_streaming(
            rec, cfg, prescription_source=prescriptions, telemetry=telemetry,
            telemetry_frame_stride=args.frame_stride)
    else:
        trace = closed_loop.run(rec, cfg, prescription_source=prescriptions,
                                telemetry=telemetry)
    sys.stdout.write(trace.to_jsonl())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{Path(args.edf).stem}_trace.jsonl"
        path.write_text(trace.to_jsonl())
        print(f"wrote {path}", file=sys.stderr)


def cmd_pump_calc(args):
    cfg = _load_loop_config(args.config)
    geom, drive = cfg.pump_geometry, cfg.pump_drive
    q = micropump.flow_rate_ml_min(geom, drive)
    x = micropump.deflection_mm(geom, micropump.force_from_drive(drive))
    v_str = micropump.stroke_volume_mm3(x, geom.diaphragm_radius_mm)
    print(f"deflection: {x * 1000:.3f} um")
    print(f"stroke volume: {v_str:.4f} mm^3")
    print(f"diodicity: {geom.diodicity:.3f}")
    print(f"net flow: {q:.4f} ml/min at {drive.frequency_hz:.0f} Hz")
    if args.sweep_out:
        freqs = np.arange(10.0, 301.0, 10.0)
        diams = np.arange(4.0, 14.5, 0.5)
        with open(args.sweep_out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["sweep", "value", "flow_ml_min"])
            for fr, flow in micropump.frequency_sweep(geom, drive, freqs):
                writer.writerow(["frequency_hz", fr, f"{flow:.6f}"])
            for d, flow in micropump.diameter_sweep(geom, drive, diams):
                writer.writerow(["diameter_mm", d, f"{flow:.6f}"])
        print(f"wrote {args.sweep_out}")


def cmd_serve(args):
    store = service.EventStore(root_dir=args.log_dir)
    server = service.make_server(store, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} "
          f"(log dir: {args.log_dir or 'none, in-memory'})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


def cmd_report(args):
    anns = chbmit.parse_summary(Path(args.summary).read_text())
    rows = []
    total = metrics.Metrics()
    for meta_path in sorted(Path(args.results).glob("*_meta.json")):
        meta = json.loads(meta_path.read_text())
        stem = meta["record_id"]
        events = []
        events_path = Path(args.results) / f"{stem}_events.jsonl"
        for line in events_path.read_text().splitlines():
            obj = json.loads(line)
            events.append(detector.DetectionEvent(
                time_s=obj["time_s"], frame_index=obj["frame_index"],
                latency_s=obj.get("latency_s")))
        flags = []
        with open(Path(args.results) / f"{stem}_frames.csv") as f:
            for row in csv.DictReader(f):
                flags.append(int(row["fired"]))
        record_anns = [a for a in anns if a.record_id == stem]
        m = metrics.evaluate(events, record_anns, np.array(flags),
                             meta["t_f_s"])
        rows.append((stem, m))
        total.merge(m)
    rows.append(("overall", total))
    for record_id, m in rows:
        print(f"{record_id}: {m.as_dict()}")
    if args.out:
        _write_metrics_csv(rows, args.out)
        print(f"wrote {args.out}")


def cmd_synth_corpus(args):
    path = synthetic.generate_subject(args.out, subject_id=args.subject,
                                      seed=args.seed)
    print(f"surrogate corpus at {path}")


def build_parser():
    p = argparse.ArgumentParser(
        prog="cseiz",
        description="EEG seizure detection and closed-loop dosing simulator")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="parse an EDF file and show/export it")
    sp.add_argument("edf")
    sp.add_argument("--channel")
    sp.add_argument("--summary")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("calibrate",
                        help="fit detector thresholds on half a subject's "
                             "seizures")
    sp.add_argument("--data")
    sp.add_argument("--subject", required=True)
    sp.add_argument("--channel")
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("detect", help="run detection over EDF files")
    sp.add_argument("edf", nargs="+")
    sp.add_argument("--config")
    sp.add_argument("--channel")
    sp.add_argument("--summary")
    sp.add_argument("--out")
    sp.add_argument("--plot-window", nargs=2, type=float,
                    metavar=("START_S", "END_S"))
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("simulate",
                        help="closed loop: detection plus pump dosing")
    sp.add_argument("edf")
    sp.add_argument("--config")
    sp.add_argument("--channel")
    sp.add_argument("--service", help="base URL of a running telemetry "
                                      "service")
    sp.add_argument("--service-channel", default="cseiz")
    sp.add_argument("--streaming", action="store_true",
                    help="use the frame-by-frame path instead of batch")
    sp.add_argument("--frame-stride", type=int, default=0,
                    help="telemetry frame-summary stride (streaming only)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("pump-calc",
                        help="micro-pump flow at the configured operating "
                             "point, plus sweep CSV")
    sp.add_argument("--config")
    sp.add_argument("--sweep-out")
    sp.set_defaults(func=cmd_pump_calc)

    sp = sub.add_parser("serve", help="run the local telemetry service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8787)
    sp.add_argument("--log-dir")
    sp.set_defaults(func=cmd_serve)

    sp = sub.add_parser("report",
                        help="score a detect output directory against a "
                             "summary file")
    sp.add_argument("--results", required=True)
    sp.add_argument("--summary", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("synth-corpus",
                        help="generate a deterministic surrogate corpus")
    sp.add_argument("--out", required=True)
    sp.add_argument("--subject", default="chb01")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_synth_corpus)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    main()
