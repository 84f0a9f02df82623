"""Command-line interface.

Subcommands::

    depthks test FILE_A FILE_B        two-sample test of two point patterns
    depthks players SHOTS_CSV         per-player made-vs-missed tests
    depthks simulate --config FILE    null-calibration / power experiments
    depthks classify SHOTS_CSV        benchmark-relative player grouping

Reports are tab-separated tables preceded by a commented run manifest
(command, argument snapshot, seed, version, input digests).  The
manifest's timestamp goes to stderr only, so seeded runs are
byte-identical.  Exit codes: 0 = result computed, 1 = usage error,
2 = data error.  Statistical decisions never affect the exit code.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .classify import group_by_benchmark
from .geometry import PointPattern, Rect
from .hyptest import METHODS, TestResult, run_method
from .ppsim import (
    ExperimentConfig,
    NoiseSpec,
    PowerRow,
    Type1Row,
    load_grid,
    read_flat_config,
    run_power_experiment,
    run_type1_experiment,
)
from .ppsim import _DATA_DIR as _PPSIM_DATA
from .shotdata import (
    build_charts,
    filter_players,
    format_rejection_report,
    load_shot_csv,
    read_exclusions,
)

__all__ = ["main", "RunManifest"]

_METHOD_COORDS = {
    "M1": "cartesian",
    "M2": "polar",
    "M3": "cartesian",
    "M4": "polar",
    "M5": "cartesian",
    "M6": "polar",
}
_FAMILIES = {
    "liu-singh": ("M1", "M2"),
    "ks2d": ("M3", "M4"),
    "depth-ks2d": ("M5", "M6"),
}
_FAMILY_DEFAULT = {"liu-singh": "M1", "ks2d": "M3", "depth-ks2d": "M6"}


class UsageError(Exception):
    """Bad flag combination detected after argparse."""


@dataclass(frozen=True)
class RunManifest:
    """Provenance header embedded in every report.

    The timestamp is kept on the object (and logged to stderr) but is
    deliberately left out of `header_lines` so that reruns with the
    same seed produce byte-identical reports.
    """

    command: str
    args: tuple[tuple[str, str], ...]
    seed: int | None
    version: str
    inputs: tuple[tuple[str, str], ...]
    timestamp: str

    def header_lines(self) -> list[str]:
        lines = [f"# command: {self.command}"]
        lines += [f"# arg {k}: {v}" for k, v in self.args]
        lines.append(f"# seed: {self.seed}")
        lines.append(f"# version: {self.version}")
        lines += [f"# input {p}: sha256:{d}" for p, d in self.inputs]
        return lines


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _build_manifest(command: str, args: argparse.Namespace, inputs) -> RunManifest:
    snapshot = tuple(
        (k, "" if v is None else str(v))
        for k, v in sorted(vars(args).items())
        if k != "func"
    )
    digests = tuple((str(p), _sha256(p)) for p in inputs)
    return RunManifest(
        command=command,
        args=snapshot,
        seed=getattr(args, "seed", None),
        version=__version__,
        inputs=digests,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _write_report(manifest: RunManifest, columns, rows, out=None, trailer=()) -> None:
    lines = manifest.header_lines()
    lines.append("\t".join(columns))
    lines += ["\t".join(_fmt(v) for v in row) for row in rows]
    lines += list(trailer)
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    print(f"# run at {manifest.timestamp}", file=sys.stderr)


def _parse_columns(spec: str | None) -> dict[str, str] | None:
    if not spec:
        return None
    out = {}
    for item in spec.split(","):
        key, sep, value = item.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise UsageError(f"--columns entries must look like field=NAME, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _bbox_region(pts: np.ndarray) -> Rect:
    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    pad_x = max(1.0, 0.01 * (xmax - xmin))
    pad_y = max(1.0, 0.01 * (ymax - ymin))
    return Rect(xmin - pad_x, xmax + pad_x, ymin - pad_y, ymax + pad_y)


def _load_coordinate_file(path) -> PointPattern:
    pts = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.split("#", 1)[0].strip()
            if not s:
                continue
            parts = s.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two coordinates per line")
            try:
                pts.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric coordinates") from exc
    if not pts:
        raise ValueError(f"{path}: no points")
    arr = np.asarray(pts, dtype=float)
    return PointPattern(arr, _bbox_region(arr))


def _load_pattern(path, select: str | None, columns) -> PointPattern:
    """A pattern from a two-column file, or from a shot CSV via ``ID:which``."""
    if select is None:
        return _load_coordinate_file(path)
    pid, _, which = select.partition(":")
    which = which or "all"
    if which not in ("made", "missed", "all"):
        raise UsageError("pattern selector must be PLAYER_ID[:made|missed|all]")
    records, _rejected = load_shot_csv(path, columns)
    rows = [r for r in records if r.player_id == pid]
    if not rows:
        raise ValueError(f"{path}: no accepted rows for player {pid!r}")
    if which == "made":
        rows = [r for r in rows if r.made]
    elif which == "missed":
        rows = [r for r in rows if not r.made]
    if not rows:
        raise ValueError(f"{path}: player {pid!r} has no {which} shots")
    arr = np.asarray([(r.x, r.y) for r in rows], dtype=float)
    return PointPattern(arr, _bbox_region(arr))


def _resolve_method(method: str, coords: str | None) -> str:
    if method in METHODS:
        if coords and coords != _METHOD_COORDS[method]:
            raise UsageError(
                f"method {method} works on {_METHOD_COORDS[method]} coordinates; "
                f"--coords {coords} conflicts"
            )
        return method
    if method in _FAMILIES:
        if coords is None:
            return _FAMILY_DEFAULT[method]
        cartesian, polar = _FAMILIES[method]
        return cartesian if coords == "cartesian" else polar
    raise UsageError(
        f"unknown method {method!r}; expected one of "
        f"{', '.join(METHODS + tuple(_FAMILIES))}"
    )


_TEST_COLUMNS = (
    "method",
    "statistic",
    "p_value",
    "n1",
    "n2",
    "n_eff",
    "corr",
    "reject",
    "flags",
)


def _result_row(res: TestResult) -> tuple:
    return (
        res.method,
        res.statistic,
        res.p_value,
        res.n1,
        res.n2,
        res.n_eff,
        res.corr,
        res.reject,
        ",".join(res.flags),
    )


def cmd_test(args: argparse.Namespace) -> int:
    method = _resolve_method(args.method, args.coords)
    columns = _parse_columns(args.columns)
    a = _load_pattern(args.file_a, args.select_a, columns)
    b = _load_pattern(args.file_b, args.select_b, columns)
    res = run_method(method, a, b, alpha=args.alpha)
    manifest = _build_manifest("test", args, [args.file_a, args.file_b])
    _write_report(manifest, _TEST_COLUMNS, [_result_row(res)], out=args.out)
    return 0


def cmd_players(args: argparse.Namespace) -> int:
    columns = _parse_columns(args.columns)
    records, rejected = load_shot_csv(args.shots_csv, columns)
    if rejected:
        report = format_rejection_report(rejected)
        if args.reject_report:
            Path(args.reject_report).write_text(report + "\n", encoding="utf-8")
            print(f"{len(rejected)} row(s) rejected; see {args.reject_report}", file=sys.stderr)
        else:
            print(f"{len(rejected)} row(s) rejected:", file=sys.stderr)
            print(report, file=sys.stderr)
    exclusions = read_exclusions(args.exclusions) if args.exclusions else frozenset()
    eligible = filter_players(
        build_charts(records),
        min_attempts=args.min_attempts,
        exclusions=exclusions,
        count_basis=args.count_basis,
    )
    inputs = [args.shots_csv] + ([args.exclusions] if args.exclusions else [])
    manifest = _build_manifest("players", args, inputs)
    if not eligible:
        print("warning: no eligible players after filtering", file=sys.stderr)
    cols = ("player_id", "player_name", "n_made", "n_missed",
            "statistic", "p_value", "reject", "note")
    rows = []
    n_reject = n_keep = n_untestable = 0
    for chart in eligible:
        try:
            res = run_method(args.method, chart.made, chart.missed, alpha=args.alpha)
        except ValueError as exc:
            n_untestable += 1
            rows.append((chart.player_id, chart.player_name, len(chart.made),
                         len(chart.missed), None, None, None, f"untestable: {exc}"))
            continue
        n_reject += res.reject
        n_keep += not res.reject
        rows.append((chart.player_id, chart.player_name, len(chart.made),
                     len(chart.missed), res.statistic, res.p_value, res.reject, ""))
    trailer = [
        f"# summary: eligible={len(eligible)} rejected={n_reject} "
        f"not_rejected={n_keep} untestable={n_untestable}"
    ]
    _write_report(manifest, cols, rows, out=args.out, trailer=trailer)
    return 0


def _resolve_design(token: str) -> tuple[str, Path]:
    token = token.strip()
    name = token[len("builtin:"):] if token.startswith("builtin:") else token
    builtin = _PPSIM_DATA / f"{name}.grid.txt"
    if ("/" not in token) and ("\\" not in token) and builtin.exists():
        return name, builtin
    path = Path(token)
    label = path.name
    for suffix in (".txt", ".grid"):
        if label.endswith(suffix):
            label = label[: -len(suffix)]
    return label, path


def _experiment_from_config(raw: dict[str, str], seed_override: int | None):
    kind = raw.get("experiment", "type1").strip().lower()
    if kind not in ("type1", "power"):
        raise ValueError(f"config: experiment must be 'type1' or 'power', got {kind!r}")
    design_tokens = [t for t in raw.get("designs", "design1,design2").split(",") if t.strip()]
    resolved = [_resolve_design(t) for t in design_tokens]
    designs = tuple((label, load_grid(path)) for label, path in resolved)
    default_methods = "M1,M2,M3,M4,M5,M6" if kind == "type1" else "M3,M4,M6"
    methods = tuple(m.strip() for m in raw.get("methods", default_methods).split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"config: unknown method {m!r}")
    cfg = ExperimentConfig(
        designs=designs,
        n_realizations=int(raw.get("realizations", "100")),
        n_pairs=int(raw.get("pairs", "200")),
        n_tests=int(raw.get("tests", "100")),
        alpha=float(raw.get("alpha", "0.05")),
        seed=seed_override if seed_override is not None else int(raw.get("seed", "0")),
        methods=methods,
    )
    noise = None
    magnitudes: list[float] = []
    if kind == "power":
        noise = NoiseSpec(kind=raw.get("noise", "location_jitter").strip())
        mags_raw = raw.get("magnitudes", "")
        if not mags_raw.strip():
            raise ValueError("config: power experiments need a 'magnitudes' list")
        magnitudes = [float(v) for v in mags_raw.split(",") if v.strip()]
    grid_paths = [path for _, path in resolved]
    return kind, cfg, noise, magnitudes, grid_paths


def _plot_power(rows: list[PowerRow], path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_rej, ax_p) = plt.subplots(1, 2, figsize=(9, 3.5))
    series: dict[tuple[str, str], list[PowerRow]] = {}
    for row in rows:
        series.setdefault((row.design, row.method), []).append(row)
    for (design, method), entries in sorted(series.items()):
        entries.sort(key=lambda r: r.magnitude)
        mags = [r.magnitude for r in entries]
        label = f"{design}/{method}"
        ax_rej.plot(mags, [r.n_reject for r in entries], marker="o", label=label)
        ax_p.plot(mags, [r.mean_p for r in entries], marker="o", label=label)
    ax_rej.set_xlabel("noise magnitude")
    ax_rej.set_ylabel("rejections")
    ax_p.set_xlabel("noise magnitude")
    ax_p.set_ylabel("mean p-value")
    ax_p.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_simulate(args: argparse.Namespace) -> int:
    raw = read_flat_config(args.config)
    kind, cfg, noise, magnitudes, grid_paths = _experiment_from_config(raw, args.seed)
    manifest = _build_manifest("simulate", args, [args.config] + grid_paths)
    if kind == "type1":
        rows = run_type1_experiment(cfg)
        cols = ("design", "method", "n_tests", "n_reject", "rate", "ci_low", "ci_high")
        table = [
            (r.design, r.method, r.n_tests, r.n_reject, r.rate, r.ci_low, r.ci_high)
            for r in rows
        ]
        _write_report(manifest, cols, table, out=args.out)
        return 0
    rows = run_power_experiment(cfg, noise, magnitudes)
    cols = ("design", "noise", "magnitude", "method", "n_tests", "n_reject", "mean_p")
    table = [
        (r.design, r.noise, r.magnitude, r.method, r.n_tests, r.n_reject, r.mean_p)
        for r in rows
    ]
    _write_report(manifest, cols, table, out=args.out)
    if args.plot:
        _plot_power(rows, args.plot)
        print(f"wrote {args.plot}", file=sys.stderr)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    columns = _parse_columns(args.columns)
    records, rejected = load_shot_csv(args.shots_csv, columns)
    if rejected:
        print(f"{len(rejected)} row(s) rejected during load", file=sys.stderr)
    exclusions = read_exclusions(args.exclusions) if args.exclusions else frozenset()
    eligible = filter_players(
        build_charts(records), min_attempts=args.min_attempts, exclusions=exclusions
    )
    by_id = {c.player_id: c for c in eligible}
    if args.benchmark not in by_id:
        raise ValueError(
            f"unknown benchmark {args.benchmark!r}: not among the "
            f"{len(eligible)} eligible player(s)"
        )
    inputs = [args.shots_csv] + ([args.exclusions] if args.exclusions else [])
    manifest = _build_manifest("classify", args, inputs)
    cols = ("benchmark", "member", "p_made", "p_missed")
    if args.alpha == 0.0:
        # Demanding infinite evidence of sameness: the group is empty.
        _write_report(manifest, cols, [], out=args.out,
                      trailer=["# summary: members=0 (alpha=0)"])
        return 0
    benchmark = by_id[args.benchmark]
    others = [c for c in eligible if c.player_id != args.benchmark]
    group = group_by_benchmark(
        benchmark, others, method=args.method, alpha=args.alpha
    )
    rows = [
        (group.benchmark_id, r.other_id, r.p_made, r.p_missed)
        for r in group.results
        if r.in_group
    ]
    n_untestable = sum(not r.testable for r in group.results)
    trailer = [
        f"# alpha_adj: {_fmt(group.alpha_adj)}",
        f"# summary: candidates={len(others)} members={len(rows)} untestable={n_untestable}",
    ]
    _write_report(manifest, cols, rows, out=args.out, trailer=trailer)
    for r in group.results:
        if not r.testable:
            print(f"untestable candidate {r.other_id}: {r.reason}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depthks",
        description="Depth-based two-sample tests for planar point patterns.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, methods=True):
        if methods:
            p.add_argument("--method", default="M6",
                           help="M1..M6 or a family name (liu-singh, ks2d, depth-ks2d)")
        p.add_argument("--alpha", type=float, default=0.05)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="write the report here instead of stdout")

    p_test = sub.add_parser("test", help="two-sample test of two point patterns")
    p_test.add_argument("file_a")
    p_test.add_argument("file_b")
    p_test.add_argument("--coords", choices=("cartesian", "polar"), default=None)
    p_test.add_argument("--select-a", default=None, metavar="PLAYER[:made|missed|all]",
                        help="treat file_a as a shot CSV and select this pattern")
    p_test.add_argument("--select-b", default=None, metavar="PLAYER[:made|missed|all]")
    p_test.add_argument("--columns", default=None,
                        help="comma list of field=NAME shot-CSV column remaps")
    add_common(p_test)
    p_test.set_defaults(func=cmd_test)

    p_players = sub.add_parser("players", help="made-vs-missed test per player")
    p_players.add_argument("shots_csv")
    p_players.add_argument("--min-attempts", type=int, default=400)
    p_players.add_argument("--count-basis", choices=("attempts", "made"), default="attempts")
    p_players.add_argument("--exclusions", default=None, help="file of player ids to skip")
    p_players.add_argument("--columns", default=None)
    p_players.add_argument("--reject-report", default=None,
                           help="write rejected input rows here")
    add_common(p_players)
    p_players.set_defaults(func=cmd_players)

    p_sim = sub.add_parser("simulate", help="run a configured experiment")
    p_sim.add_argument("--config", required=True, help="flat key=value experiment config")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the config's seed")
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--plot", default=None, help="write a power-curve figure (svg/pdf)")
    p_sim.set_defaults(func=cmd_simulate)

    p_cls = sub.add_parser("classify", help="group players against a benchmark")
    p_cls.add_argument("shots_csv")
    p_cls.add_argument("--benchmark", required=True, help="benchmark player id")
    p_cls.add_argument("--method", required=True,
                       help="M1..M6 (explicit by design for grouping runs)")
    p_cls.add_argument("--min-attempts", type=int, default=400)
    p_cls.add_argument("--exclusions", default=None)
    p_cls.add_argument("--columns", default=None)
    p_cls.add_argument("--alpha", type=float, default=0.05)
    p_cls.add_argument("--seed", type=int, default=0)
    p_cls.add_argument("--out", default=None)
    p_cls.set_defaults(func=cmd_classify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        if getattr(args, "method", None) is not None and args.subcommand != "test":
            if args.method not in METHODS:
                raise UsageError(
                    f"unknown method {args.method!r}; expected one of {', '.join(METHODS)}"
                )
        return int(args.func(args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
