"""``stripes`` command line: validate, invariants, graph, verify, leaves.

Exit status is 0 on success, 1 when the atlas is invalid or a check fails,
and 2 on unreadable or unparsable input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional, TextIO

from .atlas import AtlasError, ExpandedAtlas, expand
from .dsl import StripeSyntaxError, parse_file
from .foliation import singular_report
from .graph import build_graph, graph_invariants, orientable, to_dot
from .vankampen import verify_phi_iso

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

COMMANDS = ("validate", "invariants", "graph", "verify", "leaves")


@dataclass(frozen=True)
class CliConfig:
    command: str
    path: str
    window: int = 3
    max_word_len: int = 8
    format: str = "text"
    dot: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.window < 0:
            raise ValueError("window must be >= 0")
        if self.max_word_len < 1:
            raise ValueError("max word length must be >= 1")
        if self.format not in ("text", "json"):
            raise ValueError("format must be text or json")


class _Out:
    def __init__(self, stream: TextIO):
        self.stream = stream
        self.color = not os.environ.get("STRIPES_NO_COLOR") and getattr(stream, "isatty", lambda: False)()

    def status(self, ok: bool) -> str:
        word = "PASS" if ok else "FAIL"
        if not self.color:
            return word
        return f"\033[{32 if ok else 31}m{word}\033[0m"

    def line(self, text: str = "") -> None:
        print(text, file=self.stream)


def _dump(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2)


def _violations(expanded: ExpandedAtlas) -> list[dict]:
    return [v.as_dict() for v in expanded.report.violations]


def _print_violations(cfg: CliConfig, expanded: ExpandedAtlas, err: _Out) -> None:
    for v in expanded.report.violations:
        where = f"{cfg.path}:{v.span.line}:{v.span.column}: " if v.span else f"{cfg.path}: "
        err.line(f"{where}{v.code}: {v.message}")


def _report_invalid(cfg: CliConfig, expanded: ExpandedAtlas, out: _Out, err: _Out) -> int:
    if cfg.format == "json":
        out.line(_dump({"valid": False, "violations": _violations(expanded)}))
    _print_violations(cfg, expanded, err)
    return EXIT_FAIL


def _validate(cfg, expanded, out, err) -> int:
    if cfg.format == "json":
        out.line(_dump({
            "valid": expanded.report.valid,
            "window": cfg.window,
            "violations": _violations(expanded),
            "dropped": [{"gluing": d.gluing, "n": d.n, "missing": d.missing} for d in expanded.dropped],
        }))
    else:
        out.line(f"{cfg.path}: {out.status(expanded.report.valid)} "
                 f"({len(expanded.strips)} strips, {len(expanded.gluings)} seams, window {cfg.window})")
        for d in expanded.dropped:
            out.line(f"  dropped {d.gluing} at n={d.n}: {d.missing} is outside the window")
    if not expanded.report.valid:
        _print_violations(cfg, expanded, err)
        return EXIT_FAIL
    return EXIT_OK


def _invariants(cfg, expanded, out, err) -> int:
    g = build_graph(expanded)
    inv = graph_invariants(g)
    data = inv.as_dict()
    data.update({
        "vertices": len(g.vertices),
        "edges": len(g.edges),
        "orientable": orientable(expanded),
        "window": cfg.window,
    })
    if cfg.format == "json":
        out.line(_dump(data))
        return EXIT_OK
    out.line(f"vertices {data['vertices']}, edges {data['edges']}, "
             f"euler characteristic {data['euler_characteristic']}")
    out.line(f"components {len(inv.components)}, ranks {inv.ranks}, total rank {inv.rank}")
    out.line("orientable" if data["orientable"] else "non-orientable")
    return EXIT_OK


def _graph(cfg, expanded, out, err) -> int:
    text = to_dot(build_graph(expanded))
    if cfg.dot and cfg.dot != "-":
        try:
            with open(cfg.dot, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            err.line(f"{cfg.dot}: {exc.strerror or exc}")
            return EXIT_INPUT
        if cfg.format == "json":
            out.line(_dump({"dot": cfg.dot}))
        else:
            out.line(f"wrote {cfg.dot}")
    else:
        out.stream.write(text)
    return EXIT_OK


def _verify(cfg, expanded, out, err) -> int:
    report = verify_phi_iso(expanded, cfg.max_word_len)
    if cfg.format == "json":
        out.line(_dump(json.loads(report.to_json())))
    else:
        out.line(f"groupoid isomorphism: {out.status(report.confirmed)}")
        out.line(f"objects {len(report.objects)}, ranks graph {report.ranks_g}, surface {report.ranks_z}")
        for name, ok in sorted(report.checks.items()):
            out.line(f"  {name:12} {out.status(ok)}")
        out.line(f"  words checked {report.words_checked} (length <= {report.max_word_len}), "
                 f"composable pairs {report.pairs_checked}")
        for w in report.witnesses:
            out.line(f"  witness: {w}")
    return EXIT_OK if report.confirmed else EXIT_FAIL


def _leaves(cfg, expanded, out, err) -> int:
    report = singular_report(expanded)
    cert = report.certificate
    if cfg.format == "json":
        out.line(_dump(report.as_dict()))
    else:
        out.line(f"singular leaves: {len(report.leaves)}")
        for leaf, cls in report.leaves:
            out.line(f"  {leaf}: {cls}")
        out.line(f"locally finite: {out.status(cert.locally_finite)}")
        for o in cert.obstructions:
            out.line(f"  {o}")
    return EXIT_OK if cert.locally_finite else EXIT_FAIL


_HANDLERS = {
    "validate": _validate,
    "invariants": _invariants,
    "graph": _graph,
    "verify": _verify,
    "leaves": _leaves,
}


def run(cfg: CliConfig, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    out, err = _Out(stdout or sys.stdout), _Out(stderr or sys.stderr)
    try:
        atlas = parse_file(cfg.path)
    except OSError as exc:
        err.line(f"{cfg.path}: {exc.strerror or exc}")
        return EXIT_INPUT
    except StripeSyntaxError as exc:
        for e in exc.errors:
            err.line(f"{cfg.path}:{e.span.line}:{e.span.column}: {e.message}")
        return EXIT_INPUT
    try:
        expanded = expand(atlas, cfg.window)
    except AtlasError as exc:
        err.line(f"{cfg.path}: {exc}")
        return EXIT_FAIL
    if cfg.command == "validate":
        return _validate(cfg, expanded, out, err)
    if cfg.command == "leaves" and not expanded.report.valid:
        # the certificate reads the symbolic families, so report it anyway
        _leaves(cfg, expanded, out, err)
        _print_violations(cfg, expanded, err)
        return EXIT_FAIL
    if not expanded.report.valid:
        return _report_invalid(cfg, expanded, out, err)
    return _HANDLERS[cfg.command](cfg, expanded, out, err)


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("path", help=".stripe input file")
    common.add_argument("--window", type=_non_negative, default=3,
                        help="instantiate families at -W <= n < W (default 3)")
    common.add_argument("--max-word-len", type=_positive, default=8,
                        help="longest word checked by verify (default 8)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(prog="stripes", description="Striped surfaces and their graphs.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="parse, expand and validate")
    sub.add_parser("invariants", parents=[common], help="components, Euler characteristic, ranks")
    g = sub.add_parser("graph", parents=[common], help="export the graph of the atlas as DOT")
    g.add_argument("--dot", metavar="PATH", help="write DOT here (default stdout)")
    sub.add_parser("verify", parents=[common], help="check the groupoid isomorphism")
    sub.add_parser("leaves", parents=[common], help="singular leaves and local finiteness")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = CliConfig(
        args.command, args.path, args.window, args.max_word_len, args.format, getattr(args, "dot", None)
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
