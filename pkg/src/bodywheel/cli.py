"""Command-line interface: synth, calibrate, replay, score, curve, serve."""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

from .calibration import fit_calibration, save_calibration
from .errors import BodywheelError, ConfigError
from .gestures import resolve_script
from .kinematics import world_sha256
from .metrics import area_error
from .recordings import Recording, read_recording, write_recording
from .sensors import ChannelLayout, SignalModelParams, SignalSynthesizer
from .session import SessionConfig, learning_curve, run_session_trial
from .trial import TrialRecord
from .worlds import resolve_world

EXIT_CODES = {"generic": 1, "format": 3, "validation": 4, "protocol": 5}


def _data_dir(args) -> str:
    if getattr(args, "data_dir", None):
        return args.data_dir
    return os.environ.get("BODYWHEEL_DATA_DIR", "")


def _load_params(path) -> SignalModelParams:
    if not path:
        return SignalModelParams()
    return SignalModelParams.from_dict(json.loads(Path(path).read_text()))


def _parse_window(text):
    if not text:
        return None
    try:
        t0, t1 = text.split(":")
        return (float(t0), float(t1))
    except ValueError as e:
        raise ConfigError(f"window must be t0:t1, got {text!r}") from e


def cmd_synth(args) -> int:
    params = _load_params(args.params)
    layout = ChannelLayout()
    script = resolve_script(args.script, seed=args.seed, duration=args.duration,
                            sample_rate=params.sample_rate)
    synth = SignalSynthesizer(params, layout, seed=args.seed)
    frames = synth.synthesize(script.events)
    rec = Recording(layout=layout, sample_rate=params.sample_rate, frames=frames,
                    params_hash=params.content_hash(layout))
    write_recording(args.out, rec)
    print(f"wrote {len(frames)} frames to {args.out}")
    return 0


def cmd_calibrate(args) -> int:
    rec = read_recording(args.recording)
    model = fit_calibration(rec, window=_parse_window(args.window),
                            reference_segment=_parse_window(args.reference))
    save_calibration(args.out, model)
    for name, g in model.groups.items():
        flag = " (unstable)" if g.unstable else ""
        print(f"{name}: explained variance ratio "
              f"{g.explained_variance_ratio:.4f}{flag}")
    print(f"wrote {args.out}")
    return 0


def cmd_replay(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.recording:
        overrides.update(recording=args.recording, mode="replay")
    cfg = SessionConfig.from_file(args.config, **overrides)
    record = run_session_trial(cfg, trial_id=args.trial_id)
    record.save(args.out)
    print(f"trial {record.trial_id}: stop={record.stop_reason} "
          f"dist={record.metrics.dist:.6g} e_diff={record.metrics.e_diff:.6g}")
    print(f"wrote {args.out}")
    return 0


def cmd_score(args) -> int:
    record = TrialRecord.load(args.trial)
    world = resolve_world(args.world)
    if record.world_sha256 and record.world_sha256 != world_sha256(world):
        raise ConfigError("trial was recorded against a different world "
                          f"(id {record.world_id!r})")
    report = area_error(world.path_array(), record.trajectory_xy())
    doc = {"trial_id": record.trial_id, "world_id": world.id}
    doc.update(report.to_dict())
    text = json.dumps(doc, indent=1, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    if args.plot_data:
        plot = {
            "prescribed": [list(p) for p in world.path],
            "actual": [[x, y] for x, y in record.trajectory_xy()],
            "segments": [
                {"start": list(s.start), "end": list(s.end), "area": s.area,
                 "polygon": [list(p) for p in s.ring]}
                for s in report.segments
            ],
            "intersection_points": [list(p) for p in report.intersection_points],
        }
        Path(args.plot_data).write_text(json.dumps(plot, indent=1, sort_keys=True),
                                        encoding="utf-8")
    return 0


def cmd_curve(args) -> int:
    records = [TrialRecord.load(p) for p in args.trials]
    series = learning_curve(records)
    lines = ["trial_id,dist,e_diff"]
    lines += [f"{tid},{dist!r},{e!r}" for tid, dist, e in series]
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def cmd_serve(args) -> int:
    from .server import SessionHost

    cfg = SessionConfig.from_file(args.config, **(
        {"seed": args.seed} if args.seed is not None else {}))
    host_addr, port = args.listen.rsplit(":", 1)

    async def main():
        host = SessionHost(cfg, data_dir=_data_dir(args) or None,
                           drop_prob=args.drop_prob)
        server = await host.serve_tcp(host_addr, int(port))
        bound = server.sockets[0].getsockname()
        extra = ""
        if args.ws_listen:
            ws_host, ws_port = args.ws_listen.rsplit(":", 1)
            ws_server = await host.serve_ws(ws_host, int(ws_port))
            ws_bound = next(iter(ws_server.sockets)).getsockname()
            extra = f", ws on {ws_bound[0]}:{ws_bound[1]}"
        print(f"session host on {bound[0]}:{bound[1]}{extra} "
              f"(world {host.world.id}, pacing {cfg.pacing})", flush=True)
        async with server:
            await server.serve_forever()

    asyncio.run(main())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bodywheel",
        description="Body-machine-interface wheelchair training simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a shirt recording from a gesture script")
    p.add_argument("--script", required=True,
                   help="builtin:<name> or a .bgest file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--params", default="", help="signal model params JSON file")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("calibrate", help="fit per-joint PCA from a recording")
    p.add_argument("--recording", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", default="", help="fit window t0:t1 (default: all)")
    p.add_argument("--reference", default="",
                   help="reference gesture segment t0:t1 for the sign convention")
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("replay", help="run a trial from a config (scripted or replay mode)")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--recording", default="",
                   help="override: replay this .bsr recording")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trial-id", default="trial")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("score", help="recompute metrics for a stored trial")
    p.add_argument("--trial", required=True)
    p.add_argument("--world", required=True, help="builtin:<name> or .bworld file")
    p.add_argument("--out", default="")
    p.add_argument("--plot-data", default="",
                   help="write polylines + segment areas for external plotting")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("curve", help="per-trial (dist, e_diff) series")
    p.add_argument("trials", nargs="+")
    p.add_argument("--out", default="")
    p.set_defaults(fn=cmd_curve)

    p = sub.add_parser("serve", help="host a live session")
    p.add_argument("--config", required=True)
    p.add_argument("--listen", default="127.0.0.1:8765")
    p.add_argument("--ws-listen", default="",
                   help="also serve WebSocket clients on host:port")
    p.add_argument("--data-dir", default="")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--drop-prob", type=float, default=0.0,
                   help="simulate a lossy telemetry link")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BodywheelError as e:
        print(f"error ({e.category}): {e}", file=sys.stderr)
        return EXIT_CODES.get(e.category, 1)
    except FileNotFoundError as e:
        print(f"error (format): {e}", file=sys.stderr)
        return EXIT_CODES["format"]


if __name__ == "__main__":
    sys.exit(main())
