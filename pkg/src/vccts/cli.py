"""Command-line interface.

Exit codes: 0 pass / equivalent, 1 distinguished / race / violation found,
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import deque
from concurrent.futures import ProcessPoolExecutor

from .core.canon import canonical_form
from .core.located import LocatedProcess, to_located
from .core.parser import ParseError, parse_process
from .core.terms import IllFormedError, classify, format_term
from .core.symbols import sym
from .semantics import freeze_env, has_barb, multi_steps, process_barbs, reduce_steps

EXIT_OK, EXIT_FOUND, EXIT_USAGE = 0, 1, 2


# ---------------------------------------------------------------- LTS export

def _label_json(d):
    return d.to_json()


def export_lts(p: LocatedProcess, depth: int = 8, domain=(0, 1, 2), multiset_cap: int = 4, env=None) -> dict:
    """Reachable graph up to ``depth`` transitions, with nodes numbered in
    breadth-first order of their canonical forms."""
    env = freeze_env(env)
    start = canonical_form(p)[0]
    ids = {start.key: 0}
    nodes = [start]
    transitions = []
    frontier = deque([(start, 0)])
    while frontier:
        cur, d = frontier.popleft()
        if d >= depth:
            continue
        src = ids[cur.key]
        for ms in multi_steps(cur, domain, multiset_cap, env):
            target, mapping = canonical_form(ms.target)
            if target.key not in ids:
                ids[target.key] = len(nodes)
                nodes.append(target)
                frontier.append((target, d + 1))
            transitions.append({
                "source": src,
                "target": ids[target.key],
                "labels": [_label_json(x) for x in ms.labels],
                "residual": sorted([mapping[a], b] for a, b in ms.residual.pairs),
            })
    transitions.sort(key=lambda t: (t["source"], t["target"], json.dumps(t["labels"], sort_keys=True),
                                    t["residual"]))
    return {
        "nodes": [{"id": i, "term": n.key, "locations": list(n.locations),
                   "edges": [list(e) for e in sorted(n.graph.edges)]} for i, n in enumerate(nodes)],
        "transitions": transitions,
    }


def _label_text(x: dict) -> str:
    if x["kind"] == "tau":
        return "tau"
    return f"{x['loc']}:{'~' if x['co'] else ''}{x['symbol']}{x['value']}"


def _labels_text(labels) -> str:
    return ", ".join(x if isinstance(x, str) else _label_text(x) for x in labels)


def lts_to_dot(doc: dict) -> str:
    lines = ["digraph lts {", "  node [shape=box, fontname=monospace];"]
    for n in doc["nodes"]:
        lines.append(f"  n{n['id']} [label={json.dumps(n['term'])}];")
    for t in doc["transitions"]:
        lines.append(f"  n{t['source']} -> n{t['target']} [label={json.dumps(_labels_text(t['labels']))}];")
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------- helpers

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _process(path: str) -> LocatedProcess:
    return to_located(parse_process(_read(path)))


def _program(path: str):
    from .lang.parser import parse_program

    return parse_program(_read(path))


def _values(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _emit(args, doc, text: str | None = None) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text if text is not None else json.dumps(doc, indent=2, sort_keys=True))


def _env(args) -> tuple:
    env = {}
    for item in args.env or []:
        name, _, value = item.partition("=")
        env[name.strip()] = int(value)
    return freeze_env(env)


def _parallel_map(fn, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- subcommands

def cmd_parse(args) -> int:
    t = parse_process(_read(args.file))
    _emit(args, {"term": format_term(t), "kind": classify(t).value}, format_term(t))
    return EXIT_OK


def cmd_validate(args) -> int:
    t = parse_process(_read(args.file))
    kind = classify(t)
    ok = kind.value != "not-canonical"
    detail = ""
    if ok:
        try:
            to_located(t)
        except IllFormedError as exc:
            ok, detail = False, str(exc)
    _emit(args, {"kind": kind.value, "executable": ok, "detail": detail},
          f"{kind.value}{'' if ok else ' (not executable)'}{': ' + detail if detail else ''}")
    return EXIT_OK if ok else EXIT_FOUND


def cmd_reduce(args) -> int:
    p = _process(args.file)
    steps = reduce_steps(p, _env(args))
    doc = [{"target": t.key, "residual": [list(x) for x in r.pairs]} for t, r in steps]
    text = "\n".join(f"--> {t.key}   residual {dict(r.pairs)}" for t, r in steps) or "no reductions"
    _emit(args, doc, text)
    return EXIT_OK


def cmd_lts(args) -> int:
    p = _process(args.file)
    doc = export_lts(p, args.depth, args.values, args.multiset_cap, _env(args))
    if args.format == "dot":
        print(lts_to_dot(doc))
        return EXIT_OK
    text = "\n".join([f"{n['id']}: {n['term']}" for n in doc["nodes"]] +
                     [f"{t['source']} -> {t['target']}  {_labels_text(t['labels'])}" for t in doc["transitions"]])
    _emit(args, doc, text)
    return EXIT_OK


def cmd_barbs(args) -> int:
    p = _process(args.file)
    env = _env(args)
    per = process_barbs(p, env)
    doc = {"barbs": {str(loc): sorted(str(b) for b in bs) for loc, bs in per.items()}}
    text = "\n".join(f"{loc}: {', '.join(sorted(str(b) for b in bs)) or '-'}" for loc, bs in per.items())
    code = EXIT_OK
    if args.check:
        request = [sym(s.strip()) for s in args.check.split(",") if s.strip()]
        found = has_barb(p, request, env)
        doc["check"] = {"request": [str(s) for s in request], "exhibited": found}
        text += f"\n{'exhibits' if found else 'does not exhibit'} {{{', '.join(map(str, request))}}}"
        code = EXIT_OK if found else EXIT_FOUND
    _emit(args, doc, text)
    return code


def cmd_bisim(args) -> int:
    from .equivalence import bisim_existential, localized_weak_bisim, weak_barbed_bisim

    p, q = _process(args.left), _process(args.right)
    env = _env(args)
    if args.barbed:
        v = weak_barbed_bisim(p, q, args.depth, args.values, args.multiset_cap, env)
    elif args.relation:
        rel = [tuple(int(x) for x in pair.split(":")) for pair in args.relation.split(",") if pair]
        v = localized_weak_bisim(p, rel, q, args.depth, args.multiset_cap, args.values, env)
    else:
        v = bisim_existential(p, q, args.depth, args.multiset_cap, args.values, env)
    doc = v.to_json()
    if v:
        text = f"equivalent up to depth {args.depth} (multiset cap {args.multiset_cap})"
    else:
        text = "distinguished\n" + "\n".join(
            f"  {m['side']} {m['kind']}: {_labels_text(m['labels'])}  ->  {m['target']}" for m in v.witness)
    _emit(args, doc, text)
    return EXIT_OK if v else EXIT_FOUND


def cmd_compile(args) -> int:
    from .translate import tr_config

    tr = tr_config(_program(args.file))
    doc = {"process": tr.process.key, "env": dict(tr.env),
           "state_locations": list(tr.state_locations), "thread_locations": list(tr.thread_locations)}
    _emit(args, doc, tr.process.key + (f"\nenv {dict(tr.env)}" if tr.env else ""))
    return EXIT_OK


def cmd_run(args) -> int:
    from .lang.interp import observable_traces

    traces = observable_traces(_program(args.file), args.depth)
    rows = sorted([lbl.to_json() for lbl in t] for t in traces)
    text = "\n".join(" ".join(str(lbl if isinstance(lbl, str) else f"{lbl[0]} {lbl[1]}") for lbl in r) or "(silent)"
                     for r in rows)
    _emit(args, {"traces": rows}, text)
    return EXIT_OK


def _cosim_one(job):
    from .lang.parser import parse_program
    from .translate import cosim_check

    path, text, depth, bisim_depth, cap, values = job
    r = cosim_check(parse_program(text), depth, bisim_depth, cap, values)
    return path, r.to_json()


def cmd_cosim(args) -> int:
    jobs = [(f, _read(f), args.depth, args.bisim_depth, min(args.multiset_cap, 2), args.values)
            for f in args.files]
    results = _parallel_map(_cosim_one, jobs, args.jobs)
    doc = {path: rep for path, rep in results}
    text = "\n".join(f"{path}: {'ok' if rep['ok'] else 'MISMATCH'} ({rep['configs']} configurations, "
                     f"{len(rep['mismatches'])} mismatches)" for path, rep in results)
    _emit(args, doc, text)
    return EXIT_OK if all(rep["ok"] for _, rep in results) else EXIT_FOUND


def _race_one(job):
    from .lang.parser import parse_program
    from .memmodel import drf_crosscheck

    path, text, depth = job
    return path, drf_crosscheck(parse_program(text), depth).to_json()


def cmd_race(args) -> int:
    results = _parallel_map(_race_one, [(f, _read(f), args.depth) for f in args.files], args.jobs)
    doc = {path: rep for path, rep in results}
    lines = []
    for path, rep in results:
        free = rep["race"]["race_free"]
        lines.append(f"{path}: {'race-free' if free else 'racy'}; compiled process "
                     f"{'conflict-free' if rep['conflict']['conflict_free'] else 'has a conflict'}"
                     f"{'' if rep['agree'] else ' (DISAGREEMENT)'}")
    _emit(args, doc, "\n".join(lines))
    ok = all(rep["race"]["race_free"] and rep["agree"] for _, rep in results)
    return EXIT_OK if ok else EXIT_FOUND


def _input_process(args) -> tuple:
    if args.process:
        return _process(args.file), _env(args)
    from .translate import tr_config

    tr = tr_config(_program(args.file))
    return tr.process, tr.env


def cmd_transform(args) -> int:
    from .memmodel import closure, transform_soundness_check

    p, env = _input_process(args)
    members = closure(p, args.kind, args.bound)
    doc = {"kind": args.kind, "bound": args.bound, "members": [m.to_json() for m in members]}
    lines = []
    for i, m in enumerate(members):
        path = " ; ".join(f"{r}@{'.'.join(map(str, pos))}" for r, pos in m.path) or "original"
        lines.append(f"[{i}] {path}\n    {m.process.key}")
    code = EXIT_OK
    if args.check:
        rep = transform_soundness_check(p, env, args.kind, args.bound, args.depth, args.multiset_cap,
                                        args.values)
        doc["check"] = rep.to_json()
        lines.append("soundness: " + ("ok" if rep.ok else (rep.diagnosis or f"{len(rep.violations)} violation(s)")))
        code = EXIT_OK if rep.ok else EXIT_FOUND
    _emit(args, doc, "\n".join(lines))
    return code


def cmd_behaviors(args) -> int:
    from .memmodel import behaviors, closure_behaviors

    p, env = _input_process(args)
    if args.kind == "none":
        outs = behaviors(p, env, args.depth, args.values)
    else:
        outs = closure_behaviors(p, env, args.kind, args.bound, args.depth, args.values)
    rows = sorted(list(t) for t in outs)
    _emit(args, {"kind": args.kind, "behaviors": rows},
          "\n".join(" ".join(map(str, r)) or "(no output)" for r in rows))
    return EXIT_OK


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    default_depth = int(os.environ.get("VCCTS_DEPTH", "8"))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--values", type=_values, default=(0, 1, 2), help="input value domain, e.g. 0,1,2")
    common.add_argument("--depth", type=int, default=default_depth, help="exploration / game depth")
    common.add_argument("--multiset-cap", type=int, default=4, help="largest simultaneous step considered")
    common.add_argument("--bound", type=int, default=4, help="rewrite budget for closures")
    common.add_argument("--format", choices=("text", "json", "dot"), default="text")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised corpora")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for multi-file commands")
    common.add_argument("--env", action="append", metavar="NAME=V", help="bind a free data variable")

    parser = argparse.ArgumentParser(prog="vccts", description="Located process calculus workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(fn=fn)
        return p

    add("parse", cmd_parse, "parse and pretty-print a process").add_argument("file")
    add("validate", cmd_validate, "classify a process as CGS/RCGS/CP").add_argument("file")
    add("reduce", cmd_reduce, "list internal reductions").add_argument("file")
    add("lts", cmd_lts, "export the bounded transition system").add_argument("file")
    p = add("barbs", cmd_barbs, "show barbs per location")
    p.add_argument("file")
    p.add_argument("--check", help="comma-separated barb multiset to test, e.g. ~f,g")
    p = add("bisim", cmd_bisim, "bounded localized weak bisimulation")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--relation", help="explicit location relation, e.g. 0:0,1:1")
    p.add_argument("--barbed", action="store_true", help="use weak barbed bisimulation instead")
    add("compile", cmd_compile, "translate a program to a process").add_argument("file")
    add("run", cmd_run, "observable traces of a program").add_argument("file")
    p = add("cosim", cmd_cosim, "check the translation against the interpreter")
    p.add_argument("files", nargs="+")
    p.add_argument("--bisim-depth", type=int, default=4)
    add("race", cmd_race, "data-race / conflict cross-check").add_argument("files", nargs="+")
    for name, fn, help_text in (("transform", cmd_transform, "closure under relaxed-memory rewrites"),
                                ("behaviors", cmd_behaviors, "printed outputs, optionally over a closure")):
        p = add(name, fn, help_text)
        p.add_argument("file")
        p.add_argument("--process", action="store_true", help="input is a process, not a program")
        kinds = ("reorder", "tso") if name == "transform" else ("none", "reorder", "tso")
        p.add_argument("--kind", choices=kinds, default=kinds[0])
        if name == "transform":
            p.add_argument("--check", action="store_true", help="also run the soundness check")
    return parser


def main(argv=None) -> int:
    from .lang.parser import ProgramError

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format == "dot" and args.command != "lts":
        parser.error("--format dot is only available for lts")
    try:
        return args.fn(args)
    except (ParseError, ProgramError, IllFormedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
