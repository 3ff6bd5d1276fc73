"""Command-line entry point.

Subcommands::

    rspsim sweep --channel dephasing --p 0.7 --set 1 --out fig4b.csv
    rspsim compare-channels --p 0,0.25,0.5,0.75,1 --resolution 21 --out cmp.csv
    rspsim tomography --state bloch --bloch 1,0,0 --n-counts 10000 --seed 3
    rspsim fixture

Angles on the command line are in degrees. A JSON file passed with
``--config`` may supply any option under its long name with dashes replaced
by underscores (``n_counts``, ``set``, ``points`` ...); explicit flags win.

Exit status: 0 success, 1 usage error, 2 numeric or convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import channels, metrics, states, sweeps, tomography
from .errors import DomainError, NonConvergenceError, RspError
from .states import BlochVector

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

DEFAULTS = {
    "sweep": {
        "channel": "dephasing",
        "p": "0.9",
        "set": None,
        "point": None,
        "resolution": 37,
        "mode": "exact",
        "n_counts": 1e4,
        "seed": 0,
        "out": None,
    },
    "compare-channels": {"p": "0,0.25,0.5,0.75,1", "resolution": 21, "out": None},
    "tomography": {
        "state": "bloch",
        "bloch": "1,0,0",
        "p": "0.9",
        "n_counts": 1e4,
        "seed": 0,
        "exact": False,
        "direct": False,
        "minimal": False,
        "out": None,
        "record_out": None,
    },
    "fixture": {"raw": False},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rspsim", description="Remote state preparation over noisy entanglement")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--out", help="output path (default: standard output)")

    sw = sub.add_parser("sweep", help="fidelity along a pre-agreed state set")
    common(sw)
    sw.add_argument("--channel", choices=sweeps.CHANNELS)
    sw.add_argument("--p", help="channel parameter in [0, 1]")
    sw.add_argument("--set", help="named state set 1-7")
    sw.add_argument(
        "--point", action="append",
        help="explicit target r,theta_deg,phi_deg (repeatable; overrides --set)",
    )
    sw.add_argument("--resolution", type=int, help="samples along the swept parameter")
    sw.add_argument("--mode", choices=sweeps.MODES)
    sw.add_argument("--n-counts", type=float, help="counts per setting (monte-carlo mode)")
    sw.add_argument("--seed", type=int)

    cc = sub.add_parser("compare-channels", help="dephasing vs depolarizing on an (r, theta) grid")
    common(cc)
    cc.add_argument("--p", help="comma-separated channel parameters")
    cc.add_argument("--resolution", type=int, help="grid points per axis")

    tm = sub.add_parser("tomography", help="simulate counts and reconstruct a state")
    common(tm)
    tm.add_argument("--state", choices=("bloch", "ideal", "depolarizing", "dephasing", "fixture"))
    tm.add_argument("--bloch", help="r,theta_deg,phi_deg for --state bloch")
    tm.add_argument("--p", help="channel parameter for channel states")
    tm.add_argument("--n-counts", type=float)
    tm.add_argument("--seed", type=int)
    tm.add_argument("--exact", action="store_true", default=None, help="noiseless expected counts")
    tm.add_argument(
        "--direct", action="store_true", default=None,
        help="no simulation: fidelity of the published fixture to dephased_bell(p)",
    )
    tm.add_argument("--minimal", action="store_true", default=None, help="use the 4**n setting set")
    tm.add_argument("--record-out", help="write the simulated count record here")

    fx = sub.add_parser("fixture", help="print the published source density matrix")
    fx.add_argument("--raw", action="store_true", default=None, help="as printed, before projection")
    return parser


def _resolve(args) -> dict:
    """Merge hard defaults < config file < explicit flags."""
    opts = dict(DEFAULTS[args.command])
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            cfg = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if key == "state_set":
                key = "set"
            if key == "points":
                key = "point"
            if key not in opts:
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            opts[key] = value
    for key in opts:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    return opts


def _float(text, name) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise UsageError(f"{name} must be a number, got {text!r}") from None


def _unit(text, name) -> float:
    x = _float(text, name)
    if not 0.0 <= x <= 1.0:
        raise UsageError(f"{name}={x} outside [0, 1]")
    return x


def _bloch_point(item) -> tuple:
    """Accept 'r,theta_deg,phi_deg' or a 3-element list (degrees)."""
    parts = item.split(",") if isinstance(item, str) else list(item)
    if len(parts) != 3:
        raise UsageError(f"target needs r,theta,phi; got {item!r}")
    r, theta, phi = (_float(x, "target coordinate") for x in parts)
    if abs(r) > 1.0:
        raise UsageError(f"|r|={abs(r)} exceeds 1")
    return r, math.radians(theta), math.radians(phi)


def _open_out(path):
    if path is None:
        return None
    p = Path(path)
    parent = p.parent if str(p.parent) else Path(".")
    writable = os.access(p, os.W_OK) if p.exists() else os.access(parent, os.W_OK)
    if p.is_dir() or not parent.is_dir() or not writable:
        raise UsageError(f"cannot write {path}")
    return p


def _emit_csv(path, rows, fields):
    if path is None:
        w = csv.writer(sys.stdout)
        w.writerow(fields)
        for row in rows:
            d = asdict(row)
            w.writerow([sweeps.format_number(d[k]) for k in fields])
    else:
        sweeps.write_csv(path, rows, fields)


def cmd_sweep(opts) -> int:
    p = _unit(opts["p"], "p")
    points = opts["point"]
    if isinstance(points, str):
        points = [points]
    pts = tuple(_bloch_point(x) for x in points) if points else ()
    state_set = opts["set"]
    if not pts and state_set is None:
        state_set = "1"
    if state_set is not None and str(state_set) not in sweeps.STATE_SETS:
        raise UsageError(f"unknown state set {state_set!r}; choose 1-7")
    if int(opts["resolution"]) < 1:
        raise UsageError("resolution must be positive")
    out = _open_out(opts["out"])
    try:
        spec = sweeps.SweepSpec(
            channel=opts["channel"], p=p,
            state_set=None if state_set is None else str(state_set),
            points=pts, resolution=int(opts["resolution"]), mode=opts["mode"],
            n_counts=float(opts["n_counts"]), seed=int(opts["seed"]),
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    rows = sweeps.run_sweep(spec)
    _emit_csv(out, rows, sweeps.SWEEP_FIELDS)
    stats = sweeps.summarize([r.simulated_fidelity for r in rows])
    print(
        f"{len(rows)} points, channel={spec.channel} p={p:g} mode={spec.mode}: "
        f"fidelity min={stats['min']:.6f} max={stats['max']:.6f} mean={stats['mean']:.6f}",
        file=sys.stderr if out is None else sys.stdout,
    )
    return EXIT_OK


def cmd_compare_channels(opts) -> int:
    raw = opts["p"]
    items = raw if isinstance(raw, list) else str(raw).split(",")
    p_list = [_unit(x, "p") for x in items if str(x).strip()]
    if not p_list:
        raise UsageError("need at least one p")
    resolution = int(opts["resolution"])
    if resolution < 2:
        raise UsageError("resolution must be at least 2")
    out = _open_out(opts["out"])
    rows = sweeps.compare_channels(p_list, resolution)
    _emit_csv(out, rows, sweeps.COMPARISON_FIELDS)
    bad = sweeps.dominance_violations(rows)
    stream = sys.stderr if out is None else sys.stdout
    print(f"{len(rows)} grid points, {len(bad)} dominance violations", file=stream)
    for row in bad[:10]:
        print(f"  violation r={row.r:g} theta={row.theta:g} p={row.p:g} diff={row.difference:.3e}", file=stream)
    return EXIT_NUMERIC if bad else EXIT_OK


def _tomography_target(opts):
    state = opts["state"]
    if state == "bloch":
        r, theta, phi = _bloch_point(opts["bloch"])
        return states.bloch_to_rho(BlochVector(r, theta, phi))
    if state == "fixture":
        return channels.spdc_fixture()
    return sweeps.channel_state(state, _unit(opts["p"], "p"))


def _matrix_json(m) -> dict:
    m = np.asarray(m)
    return {"real": np.real(m).tolist(), "imag": np.imag(m).tolist()}


def cmd_tomography(opts) -> int:
    out = _open_out(opts["out"])
    report = {"state": opts["state"]}
    if opts["direct"]:
        if opts["state"] != "fixture":
            raise UsageError("--direct only applies to --state fixture")
        p = _unit(opts["p"], "p")
        fixture = channels.spdc_fixture()
        report.update(
            mode="direct",
            reference=f"dephased_bell({p:g})",
            fidelity=metrics.fidelity(fixture, channels.dephased_bell(p)),
            reconstructed=_matrix_json(fixture),
        )
    else:
        target = _tomography_target(opts)
        n_qubits = int(round(math.log2(target.shape[0])))
        settings = tomography.standard_settings(n_qubits, minimal=bool(opts["minimal"]))
        n_counts = _float(opts["n_counts"], "n-counts")
        if n_counts <= 0:
            raise UsageError("n-counts must be positive")
        if opts["exact"]:
            record = tomography.expected_counts(target, settings, n_counts)
        else:
            record = tomography.simulate_counts(target, settings, n_counts, int(opts["seed"]))
        if opts["record_out"]:
            record.save(_open_out(opts["record_out"]))
        try:
            rho_hat = tomography.mle_reconstruct(record)
        except NonConvergenceError as exc:
            fid = metrics.fidelity(exc.best, target)
            print(f"MLE did not converge; best iterate fidelity {fid:.6f}", file=sys.stderr)
            return EXIT_NUMERIC
        report.update(
            mode="exact" if opts["exact"] else "monte-carlo",
            n_counts=n_counts,
            seed=None if opts["exact"] else int(opts["seed"]),
            generator=record.generator,
            settings=len(settings),
            fidelity=metrics.fidelity(rho_hat, target),
            reconstructed=_matrix_json(rho_hat),
            target=_matrix_json(target),
        )
    text = json.dumps(report, indent=2)
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n", encoding="utf-8")
        print(f"fidelity {report['fidelity']:.6f}")
    return EXIT_OK


def cmd_fixture(opts) -> int:
    m = channels.spdc_fixture(raw=bool(opts["raw"]))
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        print(m)
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "compare-channels": cmd_compare_channels,
    "tomography": cmd_tomography,
    "fixture": cmd_fixture,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](_resolve(args))
    except UsageError as exc:
        print(f"rspsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RspError as exc:
        print(f"rspsim: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
