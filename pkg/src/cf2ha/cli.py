"""Command-line driver.

Exit codes: 0 success (or "true" for predicates), 1 "false" / differences
found, 2 parse or validation error, 3 rewrite rules outside the supported
class.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .automata import AutomatonError, classify_fragment, load_automaton, normalize_cfha, render_automaton, union
from .closure_monadic import RuleClassError, build_closure, load_rules
from .closure_update import hat, load_phrs, map_hedge, post_star_update, render_phrs
from .decision import accepted_hedges, clean, is_empty, is_member, render_trace, witness_trace
from .hedge import ParseError, parse_hedge, render_hedge, size
from .oracle import instantiate_phrs, post_star_bounded

log = logging.getLogger("cf2ha")


def _header(args, *sources) -> list[str]:
    return [
        f"generated by cf2ha {__version__}",
        "command: cf2ha " + " ".join(args.argv),
        "sources: " + " ".join(str(s) for s in sources if s),
    ]


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _hedge_arg(text: str):
    return parse_hedge(text, source="<hedge>")


def _load_map(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _predicate(value: bool) -> int:
    print("true" if value else "false")
    return 0 if value else 1


# -- commands ----------------------------------------------------------------


def cmd_member(args) -> int:
    a = load_automaton(args.automaton)
    h = map_hedge(_hedge_arg(args.hedge), _load_map(args.map))
    return _predicate(is_member(a, h))


def cmd_empty(args) -> int:
    return _predicate(is_empty(load_automaton(args.automaton)))


def cmd_classify(args) -> int:
    print(classify_fragment(load_automaton(args.automaton)))
    return 0


def cmd_clean(args) -> int:
    a = load_automaton(args.automaton)
    _write(args.output, render_automaton(clean(a), _header(args, args.automaton)))
    return 0


def cmd_normalize(args) -> int:
    a = load_automaton(args.automaton)
    out, _ = normalize_cfha(a)
    _write(args.output, render_automaton(out, _header(args, args.automaton)))
    return 0


def cmd_union(args) -> int:
    a, b = load_automaton(args.automaton), load_automaton(args.other)
    _write(args.output, render_automaton(union(a, b), _header(args, args.automaton, args.other)))
    return 0


def _write_map(path: str, mapping: dict) -> None:
    Path(path).write_text(json.dumps(mapping, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_hat(args) -> int:
    r = load_phrs(args.phrs, mint=_mint(args))
    out, [param], mapping = hat(r, [r.param])
    out_path = Path(args.output)
    param_path = out_path.with_suffix(".param.aut")
    param_path.write_text(render_automaton(param, _header(args, args.phrs)), encoding="utf-8")
    header = "".join(f"# {h}\n" for h in _header(args, args.phrs))
    out_path.write_text(header + render_phrs(out, param_path.name), encoding="utf-8")
    _write_map(args.map or str(out_path) + ".map.json", mapping)
    return 0


def cmd_closure_monadic(args) -> int:
    a = load_automaton(args.automaton)
    rules = load_rules(args.rules)
    out = build_closure(a, rules)
    _write(args.output, render_automaton(out, _header(args, args.automaton, args.rules)))
    return 0


def _mint(args) -> list:
    return [s for s in (args.mint or "").split(",") if s]


def cmd_closure_update(args) -> int:
    a = load_automaton(args.automaton)
    r = load_phrs(args.phrs, mint=_mint(args))
    out, mapping = post_star_update(r.param, a, r)
    _write(args.output, render_automaton(out, _header(args, args.automaton, args.phrs)))
    if args.output not in (None, "-"):
        _write_map(args.map or args.output + ".map.json", mapping)
    return 0


def _oracle_rules(args):
    if args.rules:
        return load_rules(args.rules), None
    r = load_phrs(args.phrs, mint=_mint(args))
    return instantiate_phrs(r, args.param_bound), r


def cmd_oracle_post(args) -> int:
    rules, _ = _oracle_rules(args)
    seeds = [_hedge_arg(s) for s in args.seed]
    res = post_star_bounded(rules, seeds, args.max_size, args.max_size + args.slack)
    print(f"# {'exact' if res.exact else 'under-approximation'}: {len(res)} hedges of size <= {args.max_size}")
    for h in res:
        print(render_hedge(h) or "()")
    return 0


def cmd_compare(args) -> int:
    a = load_automaton(args.automaton)
    seeds = accepted_hedges(a, args.max_size + args.slack)
    if args.mode == "monadic":
        if not args.rules:
            raise ValueError("--mode monadic needs -r")
        rules = load_rules(args.rules)
        closure, mapping = build_closure(a, rules), {}
    else:
        if not args.phrs:
            raise ValueError("--mode update needs -p")
        r = load_phrs(args.phrs, mint=_mint(args))
        rules = instantiate_phrs(r, args.param_bound)
        closure, mapping = post_star_update(r.param, a, r)
    res = post_star_bounded(rules, seeds, args.max_size, args.max_size + args.slack)
    expected = {map_hedge(h, mapping) for h in res.hedges}
    got = accepted_hedges(closure, args.max_size)
    key = lambda h: (size(h), render_hedge(h))  # noqa: E731
    for h in sorted(got - expected, key=key):
        print(f"+ {render_hedge(h) or '()'}")
    for h in sorted(expected - got, key=key):
        print(f"- {render_hedge(h) or '()'}")
    diff = len(got ^ expected)
    mode = "exact" if res.exact else "oracle under-approximation"
    print(f"{diff} differences ({len(expected)} oracle hedges, {len(got)} accepted, {mode})")
    return 0 if diff == 0 else 1


def cmd_trace(args) -> int:
    a = load_automaton(args.automaton)
    steps = witness_trace(a, _hedge_arg(args.hedge))
    if steps is None:
        print("rejected")
        return 1
    print(render_trace(steps) if steps else "accepted (no steps)")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cf2ha", description="Hedge automata and rewrite closures.")
    p.add_argument("--version", action="version", version=f"cf2ha {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, fn, help_text, short_help=True):
        s = sub.add_parser(name, help=help_text, add_help=short_help)
        if not short_help:  # -h names the hedge here
            s.add_argument("--help", action="help", help="show this help message and exit")
        s.set_defaults(fn=fn)
        return s

    s = command("member", cmd_member, "is the hedge accepted", short_help=False)
    s.add_argument("-a", "--automaton", required=True)
    s.add_argument("-H", "-h", "--hedge", required=True)
    s.add_argument("--map", help="symbol map sidecar written by closure-update")

    s = command("empty", cmd_empty, "is the language empty")
    s.add_argument("-a", "--automaton", required=True)

    s = command("classify", cmd_classify, "print HA, CFHA or CF2HA")
    s.add_argument("-a", "--automaton", required=True)

    for name, fn, text in [("clean", cmd_clean, "drop empty states"), ("normalize", cmd_normalize, "entry-state form")]:
        s = command(name, fn, text)
        s.add_argument("-a", "--automaton", required=True)
        s.add_argument("-o", "--output")

    s = command("union", cmd_union, "language union")
    s.add_argument("-a", "--automaton", required=True)
    s.add_argument("-b", "--other", required=True)
    s.add_argument("-o", "--output")

    s = command("hat", cmd_hat, "collapse renaming cycles of an update system")
    s.add_argument("-p", "--phrs", required=True)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--map")
    s.add_argument("--mint", help="comma-separated symbols to expose as lit:SYMBOL states")

    s = command("closure-monadic", cmd_closure_monadic, "closure under a(x) -> r rules")
    s.add_argument("-a", "--automaton", required=True)
    s.add_argument("-r", "--rules", required=True)
    s.add_argument("-o", "--output")

    s = command("closure-update", cmd_closure_update, "closure under update rules")
    s.add_argument("-a", "--automaton", required=True)
    s.add_argument("-p", "--phrs", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--map")
    s.add_argument("--mint", help="comma-separated symbols to expose as lit:SYMBOL states")

    s = command("oracle-post", cmd_oracle_post, "brute-force reachable hedges")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("-r", "--rules")
    g.add_argument("-p", "--phrs")
    s.add_argument("-s", "--seed", action="append", required=True)
    s.add_argument("--max-size", type=int, required=True)
    s.add_argument("--slack", type=int, default=0, help="extra nodes allowed on intermediate hedges")
    s.add_argument("--param-bound", type=int, default=3)
    s.add_argument("--mint")

    s = command("compare", cmd_compare, "closure automaton against the oracle")
    s.add_argument("--mode", choices=("monadic", "update"), required=True)
    s.add_argument("-a", "--automaton", required=True)
    s.add_argument("-r", "--rules")
    s.add_argument("-p", "--phrs")
    s.add_argument("--max-size", type=int, required=True)
    s.add_argument("--slack", type=int, default=0)
    s.add_argument("--param-bound", type=int, default=3)
    s.add_argument("--mint")

    s = command("trace", cmd_trace, "print a witness reduction", short_help=False)
    s.add_argument("-a", "--automaton", required=True)
    s.add_argument("-H", "-h", "--hedge", required=True)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except RuleClassError as e:
        print(f"error: rules outside the supported class:\n{e}", file=sys.stderr)
        return 3
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (AutomatonError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
