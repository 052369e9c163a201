"""Command-line surface: classify / solve / graph / reduce.

File formats (all exact; costs are int, "p/q" strings, or "inf"):

  language: {"domain": k, "functions": [{"name": str, "arity": m,
             "table": [cost, ...]}]}   (row-major tables)
  instance: {"nodes": n, "terms": [{"function": name, "scope": [i, ...]}],
             "functions": [...]}       (optional inline gadget functions)
  graph:    edge-list text ("u v" per line, 0-based) or
            {"vertices": n, "edges": [[u, v], ...]}

Exit codes: 0 tractable / solved, 1 input or usage error, 2 NP-hard,
3 general-valued statuses, 4 infeasible instance, 5 no reduction witness.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

from .model import (
    INF,
    BudgetExceeded,
    CostFunction,
    InputError,
    Language,
    VcspInstance,
)
from .express import PoolBudget
from .pairgraph import build_graph, to_dot
from .dichotomy import (
    Classification,
    ClassifyConfig,
    GENERAL_UNKNOWN,
    NP_HARD,
    SearchLimits,
    TRACTABLE,
    classify,
)
from .hardness import (
    SourceGraph,
    WitnessNormalizationError,
    exact_max_cut,
    exact_max_independent_set,
    normalize_witness,
    reduce_maxcut,
    reduce_mis,
    verify_reduction,
    witness_from_loop,
)
from .solver import DEFAULT_BRUTE_BUDGET, IntractableAtScale, solve

ENV_PREFIX = "CVCSP_"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NP_HARD = 2
EXIT_GENERAL = 3
EXIT_INFEASIBLE = 4
EXIT_NO_WITNESS = 5


# ---------------------------------------------------------------- costs/json


def cost_to_json(c):
    if c is INF:
        return "inf"
    if isinstance(c, int):
        return c
    return f"{c.numerator}/{c.denominator}"


def cost_from_json(v):
    if isinstance(v, bool):
        raise InputError(f"invalid cost {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        if v == "inf":
            return INF
        if "/" in v:
            num, _, den = v.partition("/")
            try:
                return Fraction(int(num), int(den))
            except (ValueError, ZeroDivisionError) as exc:
                raise InputError(f"invalid rational {v!r}") from exc
        try:
            return int(v)
        except ValueError as exc:
            raise InputError(f"invalid cost {v!r}") from exc
    raise InputError(f"invalid cost {v!r} (use int, 'p/q' or 'inf')")


def _jsonable(value):
    """Recursively convert provenance/report values into JSON-safe data."""
    if value is INF or isinstance(value, Fraction):
        return cost_to_json(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


# ------------------------------------------------------------------- loading


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}")


def parse_language(doc, where: str = "language") -> Language:
    if not isinstance(doc, dict):
        raise InputError(f"{where}: expected a JSON object")
    domain = doc.get("domain")
    if not isinstance(domain, int):
        raise InputError(f"{where}: 'domain' must be an integer")
    functions = doc.get("functions")
    if not isinstance(functions, list):
        raise InputError(f"{where}: 'functions' must be a list")
    parsed = []
    for pos, spec in enumerate(functions):
        ctx = f"{where}: functions[{pos}]"
        if not isinstance(spec, dict):
            raise InputError(f"{ctx}: expected an object")
        name = spec.get("name")
        arity = spec.get("arity")
        table = spec.get("table")
        if not isinstance(name, str) or not name:
            raise InputError(f"{ctx}: 'name' must be a non-empty string")
        if not isinstance(arity, int) or arity < 1:
            raise InputError(f"{ctx}: 'arity' must be a positive integer")
        if not isinstance(table, list):
            raise InputError(f"{ctx}: 'table' must be a list")
        entries = tuple(cost_from_json(v) for v in table)
        parsed.append(CostFunction(name, arity, domain, entries))
    return Language(domain_size=domain, functions=tuple(parsed))


def serialize_language(lang: Language) -> dict:
    return {
        "domain": lang.domain_size,
        "functions": [
            {
                "name": f.name,
                "arity": f.arity,
                "table": [cost_to_json(v) for v in f.table],
            }
            for f in lang.functions
        ],
    }


def load_language(path: str) -> Language:
    return parse_language(_load_json(path), where=path)


def parse_instance(doc, lang: Language, where: str = "instance") -> VcspInstance:
    if not isinstance(doc, dict):
        raise InputError(f"{where}: expected a JSON object")
    nodes = doc.get("nodes")
    if not isinstance(nodes, int) or nodes < 0:
        raise InputError(f"{where}: 'nodes' must be a non-negative integer")
    inline = {}
    for pos, spec in enumerate(doc.get("functions", [])):
        f_lang = parse_language(
            {"domain": lang.domain_size, "functions": [spec]},
            where=f"{where}: functions[{pos}]",
        )
        inline[f_lang.functions[0].name] = f_lang.functions[0]
    terms = []
    for pos, term in enumerate(doc.get("terms", [])):
        ctx = f"{where}: terms[{pos}]"
        if not isinstance(term, dict):
            raise InputError(f"{ctx}: expected an object")
        name = term.get("function")
        scope = term.get("scope")
        if not isinstance(name, str):
            raise InputError(f"{ctx}: 'function' must be a name")
        if not isinstance(scope, list) or not all(isinstance(i, int) for i in scope):
            raise InputError(f"{ctx}: 'scope' must be a list of node indices")
        if name in inline:
            f = inline[name]
        else:
            try:
                f = lang.get(name)
            except InputError:
                raise InputError(f"{ctx}: unknown function {name!r}")
        terms.append((f, tuple(scope)))
    return VcspInstance(node_count=nodes, terms=tuple(terms))


def serialize_instance(instance: VcspInstance, inline_functions=()) -> dict:
    doc = {"nodes": instance.node_count}
    if inline_functions:
        doc["functions"] = [
            {
                "name": f.name,
                "arity": f.arity,
                "table": [cost_to_json(v) for v in f.table],
            }
            for f in inline_functions
        ]
    doc["terms"] = [
        {"function": f.name, "scope": list(scope)} for f, scope in instance.terms
    ]
    return doc


def load_instance(path: str, lang: Language) -> VcspInstance:
    return parse_instance(_load_json(path), lang, where=path)


def load_source_graph(path: str) -> SourceGraph:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        vertices = doc.get("vertices")
        edges = doc.get("edges", [])
        if not isinstance(vertices, int):
            raise InputError(f"{path}: 'vertices' must be an integer")
        return SourceGraph(vertices, tuple((int(u), int(v)) for u, v in edges))
    edges = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"{path}:{line_no}: expected 'u v'")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise InputError(f"{path}:{line_no}: expected integer vertex ids")
    vertices = 1 + max((max(u, v) for u, v in edges), default=-1)
    return SourceGraph(vertices, tuple(edges))


# ------------------------------------------------------------------- reports


def _sigma_json(sign) -> dict:
    return {f"{p[0]},{p[1]}": s for p, s in sign.entries}


def classification_report(lang: Language, cls: Classification, timings=None) -> dict:
    report = {
        "verdict": cls.verdict,
        "mode": lang.mode,
        "domain": lang.domain_size,
        "functions": [f.name for f in lang.functions],
    }
    if cls.reason:
        report["reason"] = cls.reason
    unaries = [f.name for f in lang.unary_functions()]
    if unaries:
        report["note"] = (
            "unary functions are stored but never drive the classification: "
            + ", ".join(unaries)
        )
    if cls.certificate is not None:
        cert = cls.certificate
        report["certificate"] = {
            "sigma": _sigma_json(cert.sign),
            "meet": list(cert.pair.meet),
            "join": list(cert.pair.join),
            "verified_against": list(cert.verified_against),
            "mode_used": cert.mode_used,
        }
    else:
        report["certificate"] = None
    report["submodular_order"] = (
        list(cls.submodular_order) if cls.submodular_order is not None else None
    )
    if cls.witness is not None:
        report["witness"] = {
            "node": list(cls.witness.node),
            "quadruple": list(cls.witness.quad),
            "view": _jsonable(cls.witness.view.provenance),
            "table": [cost_to_json(v) for v in cls.witness.view.table.table],
        }
    else:
        report["witness"] = None
    graph = cls.graph
    if graph is not None:
        soft = graph.soft_count()
        report["graph"] = {
            "nodes": len(graph.nodes),
            "edges": len(graph.edges),
            "soft": soft,
            "hard": len(graph.edges) - soft,
            "m_size": len(graph.M),
            "truncated": graph.truncated,
        }
    report["stats"] = _jsonable(cls.stats)
    if timings is not None:
        report["timings"] = timings
    return report


def render_text(report: dict) -> str:
    lines = [f"verdict: {report['verdict']}"]
    if "reason" in report:
        lines.append(f"reason: {report['reason']}")
    lines.append(f"mode: {report['mode']}  domain: {report['domain']}")
    lines.append("functions: " + (", ".join(report["functions"]) or "(none)"))
    if "note" in report:
        lines.append(f"note: {report['note']}")
    cert = report.get("certificate")
    if cert:
        sigma = " ".join(f"({k})={'+1' if v > 0 else '-1'}" for k, v in cert["sigma"].items())
        lines.append(f"sigma: {sigma}")
        lines.append(f"meet: {cert['meet']}")
        lines.append(f"join: {cert['join']}")
    order = report.get("submodular_order")
    if order is not None:
        lines.append("submodular order: " + "<".join(str(x) for x in order))
    witness = report.get("witness")
    if witness:
        lines.append(
            f"soft self-loop witness at ({witness['node'][0]},{witness['node'][1]}) "
            f"quadruple {tuple(witness['quadruple'])}"
        )
    g = report.get("graph")
    if g:
        lines.append(
            f"pair graph: nodes={g['nodes']} edges={g['edges']} "
            f"(soft={g['soft']} hard={g['hard']}) m={g['m_size']} "
            f"truncated={'yes' if g['truncated'] else 'no'}"
        )
    if "timings" in report:
        lines.append(f"time: {report['timings']['total_s']}s")
    return "\n".join(lines) + "\n"


def render_solve_text(report: dict) -> str:
    lines = [
        f"cost: {report['cost']}",
        "assignment: " + " ".join(str(x) for x in report["assignment"]),
        f"method: {report['method']}",
        f"classification: {report['classification']}",
    ]
    if "timings" in report:
        lines.append(f"time: {report['timings']['total_s']}s")
    return "\n".join(lines) + "\n"


def render_summary_text(report: dict) -> str:
    return (
        f"pair graph: nodes={report['nodes']} edges={report['edges']} "
        f"(soft={report['soft']} hard={report['hard']}) m={report['m_size']} "
        f"truncated={'yes' if report['truncated'] else 'no'}\n"
    )


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
    elif "verdict" in report:
        print(render_text(report), end="")
    elif "assignment" in report:
        print(render_solve_text(report), end="")
    else:
        print(render_summary_text(report), end="")


# -------------------------------------------------------------------- config


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"environment {ENV_PREFIX}{name}={raw!r} is not an integer")


def build_config(args) -> ClassifyConfig:
    pool_budget = args.pool_budget
    if pool_budget is None:
        pool_budget = _env_int("POOL_BUDGET", PoolBudget.max_views)
    chain_depth = args.chain_depth
    if chain_depth is None:
        chain_depth = _env_int("CHAIN_DEPTH", PoolBudget.chain_depth)
    stp_limit = args.stp_domain_limit
    if stp_limit is None:
        stp_limit = _env_int("STP_DOMAIN_LIMIT", SearchLimits.stp_domain_limit)
    if pool_budget < 1 or chain_depth < 0 or stp_limit < 2:
        raise InputError("budget options must be positive")
    return ClassifyConfig(
        pool=PoolBudget(max_views=pool_budget, chain_depth=chain_depth),
        limits=SearchLimits(stp_domain_limit=stp_limit),
    )


def _brute_budget(args) -> int:
    if args.brute_budget is not None:
        return args.brute_budget
    return _env_int("BRUTE_BUDGET", DEFAULT_BRUTE_BUDGET)


# ------------------------------------------------------------------ commands


def _verdict_exit(verdict: str) -> int:
    if verdict == TRACTABLE:
        return EXIT_OK
    if verdict == NP_HARD:
        return EXIT_NP_HARD
    return EXIT_GENERAL


def cmd_classify(args) -> int:
    lang = load_language(args.language)
    config = build_config(args)
    start = time.perf_counter()
    cls = classify(lang, config)
    timings = None
    if not args.no_timings:
        timings = {"total_s": round(time.perf_counter() - start, 6)}
    report = classification_report(lang, cls, timings)
    _emit(report, args.json)
    return _verdict_exit(cls.verdict)


def _cache_path(language_path: str) -> str:
    return language_path + ".cls.json"


def _file_sha(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _classification_for_solve(args, lang: Language) -> Classification:
    config = build_config(args)
    if args.no_cache:
        return classify(lang, config)
    cache_path = _cache_path(args.language)
    sha = _file_sha(args.language)
    if os.path.exists(cache_path):
        try:
            cached = _load_json(cache_path)
        except InputError:
            cached = None
        if cached and cached.get("sha256") == sha:
            report = cached.get("report", {})
            order = report.get("submodular_order")
            return Classification(
                verdict=report.get("verdict", GENERAL_UNKNOWN),
                submodular_order=tuple(order) if order is not None else None,
            )
    cls = classify(lang, config)
    report = classification_report(lang, cls, timings=None)
    with open(cache_path, "w", encoding="utf-8") as fh:
        json.dump({"sha256": sha, "report": report}, fh, indent=2)
    return cls


def cmd_solve(args) -> int:
    lang = load_language(args.language)
    instance = load_instance(args.instance, lang)
    cls = _classification_for_solve(args, lang)
    start = time.perf_counter()
    result = solve(instance, cls, budget=_brute_budget(args))
    report = {
        "assignment": list(result.assignment),
        "cost": cost_to_json(result.cost),
        "method": result.method,
        "classification": cls.verdict,
        "stats": _jsonable(result.stats),
    }
    if not args.no_timings:
        report["timings"] = {"total_s": round(time.perf_counter() - start, 6)}
    _emit(report, args.json)
    if result.cost is INF:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_graph(args) -> int:
    lang = load_language(args.language)
    config = build_config(args)
    build = build_graph(lang, config.pool)
    graph = build.graph
    if args.summary:
        soft = graph.soft_count()
        report = {
            "nodes": len(graph.nodes),
            "edges": len(graph.edges),
            "soft": soft,
            "hard": len(graph.edges) - soft,
            "m_size": len(graph.M),
            "truncated": graph.truncated,
        }
        _emit(report, args.json)
        return EXIT_OK
    dot = to_dot(graph)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dot)
    else:
        print(dot, end="")
    return EXIT_OK


def cmd_reduce(args) -> int:
    lang = load_language(args.language)
    src = load_source_graph(args.graph)
    config = build_config(args)
    cls = classify(lang, config)
    if cls.witness is None:
        print(
            json.dumps(
                {
                    "error": "no soft self-loop witness",
                    "verdict": cls.verdict,
                    "detail": "reductions require an NP-hard language with an "
                    "extractable soft self-loop",
                }
            ),
            file=sys.stderr,
        )
        return EXIT_NO_WITNESS
    wanted = {"maxcut": "both_finite", "mis": "one_infinite"}.get(args.kind)
    witness = None
    try:
        witness = normalize_witness(cls.witness.view, *cls.witness.node)
    except WitnessNormalizationError:
        witness = None
    build = build_graph(lang, config.pool)
    if witness is None:
        witness = witness_from_loop(build.pool.views, cls.witness.node)
    if witness is not None and wanted is not None and witness.kind != wanted:
        # requested form differs from the first witness; rescan for a match
        witness = None
        for node in build.graph.m_bar:
            cand = witness_from_loop(build.pool.views, node)
            if cand is not None and cand.kind == wanted:
                witness = cand
                break
    if witness is None:
        print(
            json.dumps({"error": f"no {args.kind} witness could be normalized"}),
            file=sys.stderr,
        )
        return EXIT_NO_WITNESS
    if witness.kind == "both_finite":
        instance, decoder = reduce_maxcut(src, witness)
        reference = exact_max_cut
    else:
        instance, decoder = reduce_mis(src, witness)
        reference = exact_max_independent_set
    inline = sorted({f for f, _ in instance.terms}, key=lambda f: f.name)
    doc = serialize_instance(instance, inline_functions=inline)
    decoder_doc = {
        "kind": decoder.kind,
        "offset": cost_to_json(decoder.offset),
        "slope": cost_to_json(decoder.slope),
        "formula": "decoded = (offset - optimum) / slope",
        "witness_pair": list(witness.pair_node),
    }
    if args.verify:
        mismatch = verify_reduction(src, instance, decoder, reference)
        if mismatch is not None:
            print(
                json.dumps(
                    {
                        "error": "reduction verification failed",
                        "expected": _jsonable(mismatch.expected),
                        "decoded": _jsonable(mismatch.decoded),
                    }
                ),
                file=sys.stderr,
            )
            return EXIT_INPUT
        decoder_doc["verified"] = True
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        with open(args.out + ".decoder.json", "w", encoding="utf-8") as fh:
            json.dump(decoder_doc, fh, indent=2)
    else:
        print(json.dumps({"instance": doc, "decoder": decoder_doc}, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------- entrypoint


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvcsp",
        description="Classify conservative valued constraint languages, solve "
        "instances, export pair graphs, and emit hardness reductions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--no-timings", action="store_true", help="omit timings")
        p.add_argument("--pool-budget", type=int, default=None, metavar="N")
        p.add_argument("--chain-depth", type=int, default=None, metavar="N")
        p.add_argument("--stp-domain-limit", type=int, default=None, metavar="N")
        p.add_argument("--brute-budget", type=int, default=None, metavar="N")
        p.add_argument("--threads", type=int, default=1, metavar="N",
                       help="upper bound on worker threads (execution is sequential)")

    p = sub.add_parser("classify", help="decide tractable vs NP-hard")
    p.add_argument("language")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("solve", help="classify-then-solve an instance")
    p.add_argument("language")
    p.add_argument("instance")
    p.add_argument("--no-cache", action="store_true",
                   help="ignore and do not write the classification cache")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("graph", help="export the closed pair graph as DOT")
    p.add_argument("language")
    p.add_argument("--out", default=None, metavar="FILE")
    p.add_argument("--summary", action="store_true", help="print counts only")
    common(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("reduce", help="emit a max-cut / independent-set reduction")
    p.add_argument("language")
    p.add_argument("graph")
    p.add_argument("--kind", choices=("maxcut", "mis", "auto"), default="auto")
    p.add_argument("--out", default=None, metavar="FILE")
    p.add_argument("--verify", action="store_true",
                   help="check the decoder against brute force (small graphs)")
    common(p)
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, BudgetExceeded, IntractableAtScale) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
