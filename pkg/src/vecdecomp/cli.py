"""Command line interface.

Exit codes: 0 success, 2 infeasible host, 3 I/O error, 4 bad configuration,
5 interrupted search (a checkpoint has been written).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from fractions import Fraction
from math import comb
from pathlib import Path

from . import __version__
from .decomp import (
    DecompositionError,
    asymptotic_bound,
    dstar,
    integer_optimum,
    random_graph_lp,
)
from .hosts import (
    BlowupSpec,
    HostError,
    blowup_cyclic,
    complete_bipartite_bicolored,
    enumerate_nonisomorphic_tournaments,
    edge_host,
    graph_to_bicolored,
    random_host,
    tournament_class_count,
    transitive_tournament,
)
from .io import (
    CheckpointError,
    FormatError,
    certificate_hash,
    decode_digraph6,
    decode_graph6,
    encode_digraph6,
    encode_graph6,
    fmt_rational,
    host_to_graph6,
    parse_rational,
    parse_vector,
    read_base_catalog,
    write_csv,
    write_jsonl,
)
from .patterns import ANTISYMMETRIC, BICOLORED, UNDIRECTED, PatternError, build_catalog, parse_kind
from .search import (
    SearchError,
    SearchInterrupted,
    SearchReport,
    checkpoint_info,
    run_pipeline,
    threshold_schedule,
)

EXIT_OK, EXIT_INFEASIBLE, EXIT_IO, EXIT_CONFIG, EXIT_INTERRUPTED = 0, 2, 3, 4, 5

log = logging.getLogger("vecdecomp")


class ConfigError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except FormatError as exc:
        raise ConfigError(str(exc)) from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# hosts and vectors from arguments

def _add_host_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("host")
    g.add_argument("--blowup", help="cyclic blow-up part sizes, e.g. 5,5,4")
    g.add_argument("--inner", default="transitive", choices=["transitive", "random"],
                   help="orientation inside blow-up parts")
    g.add_argument("--digraph6", help="a digraph6 tournament string")
    g.add_argument("--graph6", help="a graph6 string, coloured blue/red")
    g.add_argument("--bipartite", help="complete bipartite graph a,b coloured blue/red")
    g.add_argument("--transitive", type=int, help="transitive tournament of this order")
    g.add_argument("--random", type=int, metavar="N", help="seeded random host of order N")
    g.add_argument("--kind", default="tournament", help="kind for --random: tournament, undirected, colored:a,b,...")
    g.add_argument("--p", default="1/2", help="edge probability for --random")
    g.add_argument("--as-graph", action="store_true",
                   help="read graph6 input as a graph whose non-edges are absent, not as a 2-colouring")
    g.add_argument("--host-file", help="file of digraph6/graph6 lines")
    g.add_argument("--line", type=int, default=1, help="line of --host-file to use (1-based)")


def _host_from_args(args):
    chosen = [a for a in ("blowup", "digraph6", "graph6", "bipartite", "transitive", "random", "host_file")
              if getattr(args, a) is not None]
    if len(chosen) != 1:
        raise ConfigError("give exactly one host source (--blowup, --digraph6, --graph6, --bipartite, "
                          "--transitive, --random, --host-file)")
    src = chosen[0]
    try:
        if src == "blowup":
            spec = BlowupSpec(tuple(_ints(args.blowup)), args.inner, args.seed if args.inner == "random" else None)
            return blowup_cyclic(spec)
        if src == "digraph6":
            return decode_digraph6(args.digraph6).to_host(f"digraph6:{args.digraph6}")
        if src == "graph6":
            n, edges = decode_graph6(args.graph6)
            make = edge_host if args.as_graph else graph_to_bicolored
            return make(n, edges, f"graph6:{args.graph6}")
        if src == "bipartite":
            a, b = _ints(args.bipartite)
            return complete_bipartite_bicolored(a, b)
        if src == "transitive":
            return transitive_tournament(args.transitive)
        if src == "random":
            kind = parse_kind(args.kind)
            return random_host(kind, args.random, _rational(args.p), args.seed)
        lines = [ln.strip() for ln in Path(args.host_file).read_bytes().splitlines() if ln.strip()]
        lines = [ln for ln in lines if not ln.startswith(b">>")]
        if not (1 <= args.line <= len(lines)):
            raise ConfigError(f"{args.host_file} has no line {args.line}")
        raw = lines[args.line - 1]
        name = f"{args.host_file}:{args.line}"
        if raw.startswith(b"&"):
            return decode_digraph6(raw, args.line).to_host(name)
        n, edges = decode_graph6(raw)
        return (edge_host if args.as_graph else graph_to_bicolored)(n, edges, name)
    except (HostError, PatternError, FormatError, ValueError) as exc:
        if isinstance(exc, OSError):
            raise
        raise ConfigError(str(exc)) from None


def _vector(text: str | None, k: int, kind):
    if text is None:
        raise ConfigError("--vector is required")
    try:
        catalog = build_catalog(k, kind)
    except (PatternError, RuntimeError) as exc:
        raise ConfigError(str(exc)) from None
    if os.path.exists(text):
        try:
            body = Path(text).read_text()
        except OSError:
            raise
    else:
        body = text
    try:
        return parse_vector(body, catalog)
    except FormatError as exc:
        raise ConfigError(f"bad weight vector: {exc}") from None


# ---------------------------------------------------------------------------
# output helpers

class Output:
    def __init__(self, args):
        self.args = args
        self.records: list[dict] = []

    def line(self, text: str):
        sys.stdout.write(text + "\n")

    def record(self, rec: dict):
        self.records.append(rec)
        if self.args.format == "jsonl":
            self.line(json.dumps(rec, sort_keys=True))
        elif self.args.format == "csv":
            keys = sorted(rec)
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(keys)
            w.writerow([rec[k] if not isinstance(rec[k], (list, dict)) else json.dumps(rec[k]) for k in keys])

    def finish(self, name: str):
        out = self.args.out
        if out:
            path = Path(out)
            if path.suffix == "":
                path.mkdir(parents=True, exist_ok=True)
                path = path / f"{name}.jsonl"
            write_jsonl(path, [self.echo()] + self.records)

    def echo(self) -> dict:
        return {"record": "config", "version": __version__, "argv": self.args.argv}


def _emit_echo(args):
    rec = {"record": "config", "version": __version__, "argv": args.argv}
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands

def cmd_dstar(args, normalized: bool = False) -> int:
    host = _host_from_args(args)
    v = _vector(args.vector, args.k, host.kind)
    out = Output(args)
    t0 = time.perf_counter()
    try:
        res = dstar(host, args.k, v, packing=args.packing, hint=not args.no_hint,
                    zero_if_infeasible=args.zero_if_infeasible)
    except DecompositionError as exc:
        raise ConfigError(str(exc)) from None
    wall = time.perf_counter() - t0
    value = res.value
    if normalized and value is not None:
        value = value * comb(args.k, 2) / host.num_present
    rec = {
        "record": "nustar" if normalized else "dstar",
        "host": host.name,
        "n": host.n,
        "k": args.k,
        "vector": v.digest(),
        "status": res.status,
        "value": None if value is None else fmt_rational(value),
        "certificate": certificate_hash(res.solution),
        "method": None if res.solution is None else res.solution.method,
        "wall_time": round(wall, 6),
    }
    if args.format == "text":
        out.line(fmt_rational(value) if value is not None else res.status)
        if res.solution is not None and res.status == "optimal":
            out.line(f"status=optimal certificate=verified method={res.solution.method}")
    out.record(rec)
    out.finish(rec["record"])
    return EXIT_OK if res.status == "optimal" or (value is not None and args.zero_if_infeasible) else EXIT_INFEASIBLE


def cmd_nustar(args) -> int:
    return cmd_dstar(args, normalized=True)


def cmd_lp_vp(args) -> int:
    p = _rational(args.p)
    if not 0 <= p <= 1:
        raise ConfigError("p must lie in [0, 1]")
    kind = parse_kind(args.kind) if args.kind != "tournament" else UNDIRECTED
    v = _vector(args.vector, args.k, kind)
    try:
        prog = random_graph_lp(args.k, v, p)
    except DecompositionError as exc:
        raise ConfigError(str(exc)) from None
    out = Output(args)
    x = {q.name: fmt_rational(prog.x[q.id]) for q in v.catalog}
    if args.format == "text":
        out.line(fmt_rational(prog.value))
        for name, val in x.items():
            out.line(f"x[{name}]={val}")
    out.record({"record": "lp-vp", "k": args.k, "p": fmt_rational(p), "vector": v.digest(),
                "value": fmt_rational(prog.value), "x": x})
    out.finish("lp-vp")
    return EXIT_OK


def cmd_bound(args) -> int:
    value = _rational(args.value)
    try:
        b = asymptotic_bound(args.r, value)
    except DecompositionError as exc:
        raise ConfigError(str(exc)) from None
    out = Output(args)
    if args.format == "text":
        out.line(fmt_rational(b))
    out.record({"record": "bound", "r": args.r, "value": fmt_rational(value), "bound": fmt_rational(b)})
    out.finish("bound")
    return EXIT_OK


def cmd_intopt(args) -> int:
    host = _host_from_args(args)
    v = _vector(args.vector, args.k, host.kind)
    try:
        res = integer_optimum(host, args.k, v)
    except DecompositionError as exc:
        raise ConfigError(str(exc)) from None
    out = Output(args)
    if args.format == "text":
        out.line(fmt_rational(res.value))
        for X, pat in res.blocks:
            out.line(" ".join(map(str, X)) + f" {pat.name}")
    out.record({"record": "intopt", "host": host.name, "k": args.k, "vector": v.digest(),
                "value": fmt_rational(res.value),
                "blocks": [[list(X), pat.name] for X, pat in res.blocks], "nodes": res.nodes})
    out.finish("intopt")
    return EXIT_OK


def cmd_enum(args) -> int:
    try:
        hosts = enumerate_nonisomorphic_tournaments(args.n)
    except HostError as exc:
        raise ConfigError(str(exc)) from None
    expected = tournament_class_count(args.n)
    if len(hosts) != expected:
        raise SearchError(f"enumeration produced {len(hosts)} classes, Burnside count is {expected}")
    lines = [encode_digraph6(h).decode() for h in hosts]
    if args.out:
        Path(args.out).write_text("".join(s + "\n" for s in lines))
    else:
        for s in lines:
            sys.stdout.write(s + "\n")
    sys.stderr.write(json.dumps({"record": "enum", "n": args.n, "count": len(hosts)}) + "\n")
    return EXIT_OK


def _arcs_line(host) -> str:
    arcs = [f"{i}>{j}" for i in range(host.n) for j in range(host.n) if i != j and host.beats(i, j)]
    return f"{host.n}: " + " ".join(arcs)


def _parse_arcs(line: str):
    from .hosts import tournament_from_pairs

    head, _, rest = line.partition(":")
    n = int(head)
    arcs = []
    for tok in rest.split():
        u, _, w = tok.partition(">")
        arcs.append((int(u), int(w)))
    return tournament_from_pairs(n, arcs)


def _parse_edges(line: str):
    head, _, rest = line.partition(":")
    n = int(head)
    edges = []
    for tok in rest.split():
        u, _, w = tok.partition("-")
        edges.append((int(u), int(w)))
    return n, edges


def cmd_convert(args) -> int:
    src = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
    out_lines = []
    for lineno, raw in enumerate(src.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(">>") or line.startswith("#"):
            continue
        try:
            if line.startswith("&"):
                host = decode_digraph6(line, lineno).to_host()
                kind = "digraph"
            elif ">" in line:
                host = _parse_arcs(line)
                kind = "digraph"
            elif ":" in line:
                n, edges = _parse_edges(line)
                kind = "graph"
            else:
                n, edges = decode_graph6(line)
                kind = "graph"
            if kind == "digraph":
                if args.to == "digraph6":
                    out_lines.append(encode_digraph6(host).decode())
                elif args.to == "arcs":
                    out_lines.append(_arcs_line(host))
                else:
                    raise ConfigError(f"line {lineno}: cannot convert a tournament to {args.to}")
            else:
                if args.to == "graph6":
                    out_lines.append(encode_graph6(n, edges).decode())
                elif args.to == "edges":
                    es = sorted((min(u, w), max(u, w)) for u, w in edges)
                    out_lines.append(f"{n}: " + " ".join(f"{u}-{w}" for u, w in es))
                else:
                    raise ConfigError(f"line {lineno}: cannot convert a graph to {args.to}")
        except (FormatError, HostError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    text = "".join(s + "\n" for s in out_lines)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _decimals(text: str | None):
    if not text:
        return None
    if "=" in text:
        out = {}
        for item in text.split(","):
            r, _, t = item.partition("=")
            out[int(r)] = _rational(t)
        return out
    return [_rational(t) for t in text.split(",")]


def cmd_search(args) -> int:
    k = args.k
    v = _vector(args.vector, k, ANTISYMMETRIC)
    if (args.base is None) == (args.base_enum is None):
        raise ConfigError("give exactly one of --base FILE or --base-enum N")
    if args.base is not None:
        if args.base_order is None:
            raise ConfigError("--base needs --base-order")
        cat = read_base_catalog(args.base, args.base_order, args.base_count)
        base, complete, r_lo = cat.hosts, cat.complete, args.base_order
    else:
        try:
            base = enumerate_nonisomorphic_tournaments(args.base_enum)
        except HostError as exc:
            raise ConfigError(str(exc)) from None
        complete = len(base) == tournament_class_count(args.base_enum)
        r_lo = args.base_enum
    target = _rational(args.target)
    try:
        schedule = threshold_schedule(target, args.r_hi, r_lo, args.mode, _decimals(args.decimals))
    except SearchError as exc:
        raise ConfigError(str(exc)) from None
    workers = args.workers if args.workers else (os.cpu_count() or 1)
    ckpt = args.checkpoint
    if args.resume and not ckpt:
        raise ConfigError("--resume needs --checkpoint")
    try:
        report = run_pipeline(base, schedule, v, base_complete=complete, k=k, stop_order=args.stop_order,
                              presolve=args.presolve, guard=_rational(args.guard), dedup=args.dedup,
                              workers=workers, chunk_size=args.chunk_size, checkpoint=ckpt,
                              resume=args.resume, stop_after_chunks=args.stop_after_chunks,
                              progress=lambda msg: sys.stderr.write(msg + "\n"))
    except SearchInterrupted as exc:
        sys.stderr.write(f"interrupted: {exc}; checkpoint {exc.checkpoint}\n")
        return EXIT_INTERRUPTED
    except KeyboardInterrupt:
        sys.stderr.write(f"interrupted; checkpoint {ckpt}\n")
        return EXIT_INTERRUPTED
    _write_report(args, report)
    return EXIT_OK


def _write_report(args, report: SearchReport):
    rows = report.table_rows()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "table.csv", SearchReport.TABLE_HEADER, rows)
        write_jsonl(out / "report.jsonl", [
            {"record": "config", "version": __version__, "argv": args.argv},
            *({"record": "level", **lv.as_record()} for lv in report.levels),
            {"record": "report", **report.as_record()},
        ])
    if args.format == "jsonl":
        for lv in report.levels:
            sys.stdout.write(json.dumps({"record": "level", **lv.as_record()}, sort_keys=True) + "\n")
    else:
        sys.stdout.write(",".join(SearchReport.TABLE_HEADER) + "\n")
        for row in rows:
            sys.stdout.write(",".join(str(x) for x in row) + "\n")
    sys.stdout.write(f"verdict: {report.verdict}\n")


def cmd_checkpoint_info(args) -> int:
    info = checkpoint_info(args.path)
    sys.stdout.write(json.dumps(info, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--vector", help="weight vector: inline 'T3=1,C3=0' or a file of pattern=value lines")
    common.add_argument("--k", type=int, default=3, help="clique order (default 3)")
    common.add_argument("--mode", default="exact", choices=["exact", "paper-decimal"],
                        help="threshold mode for search")
    common.add_argument("--workers", type=int, default=None, help="worker processes (default: all CPUs)")
    common.add_argument("--seed", type=int, default=0, help="seed for random constructions")
    common.add_argument("--out", help="output path (file or directory)")
    common.add_argument("--resume", action="store_true", help="resume a search from --checkpoint")
    common.add_argument("--format", default="text", choices=["text", "csv", "jsonl"], help="stdout format")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="vecdecomp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (("dstar", "exact D* of a host"), ("nustar", "normalized optimum nu*")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _add_host_args(p)
        p.add_argument("--packing", action="store_true", help="fractional packing (pairs covered at most once)")
        p.add_argument("--no-hint", action="store_true", help="pure exact simplex, no floating point basis hint")
        p.add_argument("--zero-if-infeasible", action="store_true", help="report 0 for hosts without a decomposition")

    p = sub.add_parser("search", parents=[common], help="threshold-driven extension search")
    p.add_argument("--base", help="digraph6 file with the base tournaments")
    p.add_argument("--base-order", type=int, help="order of the tournaments in --base")
    p.add_argument("--base-count", type=int, help="asserted catalog size; the base counts as complete only if met")
    p.add_argument("--base-enum", type=int, help="enumerate all tournaments of this order as the base")
    p.add_argument("--target", default="26", help="target D* at the top order")
    p.add_argument("--r-hi", type=int, default=14, help="top order")
    p.add_argument("--stop-order", type=int, help="last order to evaluate (default --r-hi)")
    p.add_argument("--decimals", help="paper-decimal thresholds: '10=12.86,...' or a full list")
    p.add_argument("--presolve", action=argparse.BooleanOptionalAction, default=False,
                   help="filter with floating point LP, re-solving exactly near the threshold")
    p.add_argument("--guard", default="1/100", help="guard band for --presolve")
    p.add_argument("--dedup", action="store_true", help="count distinct survivors up to isomorphism")
    p.add_argument("--chunk-size", type=int, default=4096)
    p.add_argument("--checkpoint", help="checkpoint file")
    p.add_argument("--stop-after-chunks", type=int, help=argparse.SUPPRESS)

    p = sub.add_parser("lp-vp", parents=[common], help="random graph program LP(v, p)")
    p.add_argument("--p", required=True, help="edge probability p")
    p.add_argument("--kind", default="undirected", help="pattern kind (undirected or colored:blue,red)")

    p = sub.add_parser("bound", parents=[common], help="(value (r-1) + 1) / r")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--value", required=True)

    p = sub.add_parser("enum", parents=[common], help="non-isomorphic tournaments as digraph6")
    p.add_argument("-n", type=int, required=True)

    p = sub.add_parser("intopt", parents=[common], help="best integer K_k-decomposition")
    _add_host_args(p)

    p = sub.add_parser("convert", parents=[common], help="convert between digraph6/graph6 and text lists")
    p.add_argument("input", help="input file or - for stdin")
    p.add_argument("--to", required=True, choices=["digraph6", "graph6", "arcs", "edges"])

    p = sub.add_parser("checkpoint-info", parents=[common], help="summarize a search checkpoint")
    p.add_argument("path")
    return parser


COMMANDS = {
    "dstar": cmd_dstar,
    "nustar": cmd_nustar,
    "search": cmd_search,
    "lp-vp": cmd_lp_vp,
    "bound": cmd_bound,
    "enum": cmd_enum,
    "intopt": cmd_intopt,
    "convert": cmd_convert,
    "checkpoint-info": cmd_checkpoint_info,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _emit_echo(args)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except CheckpointError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except (OSError, FormatError) as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO
    except (SearchError, DecompositionError, PatternError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
