"""
IPTK - Command Line

Batch front door. Every subcommand prints (or writes) one JSON document
with a "status" field. Exit codes: 0 success, 1 logical failure (a proof
that does not check, a failed precondition), 2 usage error.
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from iptk.algebra import AlgebraError, load_algebra, shipped_algebras
from iptk.builder import BuildError
from iptk.calculus import CheckError, check, named_logic, proof_from_json, proof_to_json
from iptk.config import config, get_config, get_metrics
from iptk.conj_power import check_frag_axiom, lc_witness, phi_conj_power, power_sizes
from iptk.decision import BudgetExceeded, Effort, decide_ext, decide_ipc
from iptk.generators import FAMILIES, generate
from iptk.kernel import (IMPLICATIONAL, Fragment, FragmentError, FreshnessError, ParseError, connectives,
                         dag_size, parse, to_text, variables)
from iptk.negtrans import sep_proof
from iptk.proof_transform import (bot_top_translate, eliminate_all, eliminate_lor_bot,
                                  scan_connectives, shipped_pair)
from iptk.semantics import brute_force_min_equivalent, model_from_json
from iptk.structural import PreconditionError
from iptk.taut_transform import TRANSLATIONS, translate

logger = logging.getLogger(__name__)

Result = Tuple[Dict[str, Any], int]

# Raised by the library for inputs it rejects; reported as logical failures.
FAILURES = (PreconditionError, CheckError, BuildError, FragmentError, FreshnessError, AlgebraError,
            BudgetExceeded)


def _read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(path: str, data: Dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_proof(args):
    rs, proof = proof_from_json(_read_json(args.proof))
    if getattr(args, "logic", None):
        rs = named_logic(args.logic)
    if rs is None:
        rs = named_logic("ipc")
    return rs, proof


def _proof_summary(proof) -> Dict[str, Any]:
    return {"kind": proof.kind, "lines": proof.num_lines(), "size": proof.size(),
            "conclusion": to_text(proof.conclusion)}


# --- subcommands -------------------------------------------------------------------------

def cmd_parse(args) -> Result:
    phi = parse(args.formula)
    return {"status": "ok", "formula": to_text(phi), "size": phi.size, "dag_size": dag_size(phi),
            "connectives": sorted(connectives(phi)), "variables": sorted(variables(phi))}, 0


def cmd_print(args) -> Result:
    if args.proof:
        _, proof = proof_from_json(_read_json(args.proof))
        lines = [f"{k}: {to_text(line.statement)}  [{line.just}]" for k, line in enumerate(proof.lines)]
        return {"status": "ok", "lines": lines, **_proof_summary(proof)}, 0
    if not args.formula:
        raise ValueError("print needs a formula or --proof")
    return {"status": "ok", "formula": to_text(parse(args.formula))}, 0


def cmd_decide(args) -> Result:
    phi = parse(args.formula)
    if args.logic == "ipc":
        verdict = decide_ipc(phi, with_proof=bool(args.proof_out))
    else:
        rs = named_logic(args.logic)
        axioms = [rs.proper] + rs.extra_propers() if rs.proper is not None else []
        verdict = decide_ext(axioms, phi, Effort(max_instances=args.instances, depth=args.depth))
    if args.proof_out and verdict.proof is not None:
        _write_json(args.proof_out, proof_to_json(verdict.proof, verdict.ruleset))
    return {"status": "ok", "formula": to_text(phi), **verdict.to_dict()}, 0


def cmd_check_proof(args) -> Result:
    rs, proof = _load_proof(args)
    conclusion = parse(args.conclusion) if args.conclusion else None
    report = check(rs, proof, conclusion=conclusion)
    status = "ok" if report.ok else "rejected"
    return {"status": status, "logic": str(rs), **report.to_dict()}, 0 if report.ok else 1


def cmd_transform(args) -> Result:
    tr = translate(args.kind, parse(args.formula))
    ok = tr.verify()
    if args.output:
        _write_json(args.output, {
            "translation": tr.to_dict(),
            "backward": proof_to_json(tr.backward),
            "forward": proof_to_json(tr.forward) if tr.forward is not None else None,
        })
    return {"status": "ok" if ok else "rejected", **tr.to_dict()}, 0 if ok else 1


def cmd_elim(args) -> Result:
    rs, proof = _load_proof(args)
    if args.what == "conj":
        out = eliminate_all(rs, proof)
        rules = rs.restrict(IMPLICATIONAL)
    else:
        out = eliminate_lor_bot(rs, proof, what=[args.what])
        rules = rs
    if args.output:
        _write_json(args.output, proof_to_json(out, rules))
    return {"status": "ok", "input": _proof_summary(proof), "output": _proof_summary(out),
            "scan": scan_connectives(out).to_dict()}, 0


def cmd_bot_top(args) -> Result:
    pair = shipped_pair(args.pair)
    _, proof = proof_from_json(_read_json(args.proof))
    out = bot_top_translate(pair, proof)
    if args.output:
        _write_json(args.output, proof_to_json(out, pair.target_rules))
    return {"status": "ok", "pair": args.pair, "input": _proof_summary(proof),
            "output": _proof_summary(out)}, 0


def cmd_sep(args) -> Result:
    proof = sep_proof(args.n, parse(args.gamma), parse(args.delta), seed=args.seed)
    if args.output:
        _write_json(args.output, proof_to_json(proof))
    return {"status": "ok", "n": args.n, **_proof_summary(proof)}, 0


def cmd_gen(args) -> Result:
    phi = generate(args.family, args.n)
    return {"status": "ok", "family": args.family, "n": args.n, "formula": to_text(phi),
            "size": phi.size, "dag_size": dag_size(phi)}, 0


def cmd_model_eval(args) -> Result:
    model = model_from_json(_read_json(args.model))
    phi = parse(args.formula)
    points = [args.point] if args.point else list(model.points)
    forced = {pt: model.forces(pt, phi) for pt in points}
    return {"status": "ok", "formula": to_text(phi), "forced": forced, "valid": model.valid(phi)}, 0


def _algebra(name: str):
    for algebra in shipped_algebras():
        if algebra.name == name:
            return algebra
    return load_algebra(name)


def cmd_algebra_eval(args) -> Result:
    algebra = _algebra(args.algebra)
    phi = parse(args.formula)
    refuting = algebra.refuting_valuation(phi)
    return {"status": "ok", "algebra": algebra.name, "formula": to_text(phi),
            "validates": refuting is None, "refuting_valuation": refuting}, 0


def cmd_bruteforce(args) -> Result:
    target = parse(args.formula)
    names = args.names.split(",") if args.names else sorted(variables(target))
    result = brute_force_min_equivalent(target, Fragment.parse(args.fragment), names, args.max_size,
                                        max_conjuncts=args.max_conjuncts,
                                        deadline_seconds=args.deadline, seed=args.seed)
    return {"status": "ok", **result.to_dict()}, 0


def _growth(ns: Sequence[int], sizes: Sequence[int]) -> Optional[float]:
    """Exponent of the best power-law fit size ~ n^k."""
    if len(ns) < 2:
        return None
    slope, _ = np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(sizes, dtype=float)), 1)
    return round(float(slope), 3)


def _bench_sep(n: int) -> Dict[str, Any]:
    proof = sep_proof(n, parse("p0"), parse("p0_"))
    return {"n": n, "lines": proof.num_lines(), "size": proof.size()}


def _bench_conj_power(n: int) -> Dict[str, Any]:
    sizes = power_sizes(lc_witness(), [n])[n]
    return {"n": n, "lines": sizes["lines"], "size": sizes["size"],
            "formula_size": phi_conj_power(lc_witness().phi, n).size}


BENCHES: Dict[str, Tuple[Callable[[int], Dict[str, Any]], Callable[[int], List[int]]]] = {
    "sep": (_bench_sep, lambda m: list(range(1, m + 1))),
    "conj-power": (_bench_conj_power, lambda m: [1 << k for k in range(m + 1)]),
}


def cmd_bench(args) -> Result:
    run_one, sizes_for = BENCHES[args.bench]
    ns = sizes_for(args.max_n)
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(run_one, ns))
    else:
        rows = [run_one(n) for n in ns]
    return {"status": "ok", "bench": args.bench, "rows": rows,
            "growth_exponent": _growth([r["n"] for r in rows], [r["size"] for r in rows])}, 0


def cmd_axiom(args) -> Result:
    phi = parse(args.formula)
    verdict = check_frag_axiom(phi, Effort(max_instances=args.instances, depth=args.depth))
    return {"status": "ok", "axiom": to_text(phi), "square": to_text(phi_conj_power(phi, 2)),
            **verdict.to_dict()}, 0


def cmd_stats(args) -> Result:
    return {"status": "ok", "config": get_config(), "metrics": get_metrics()}, 0


# --- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iptk", description="Intuitionistic proof toolkit")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomised search")
    parser.add_argument("--jobs", type=int, default=1, help="parallel work items (bench)")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and normalise a formula")
    p.add_argument("-f", "--formula", required=True)
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("print", help="print a formula or a proof file")
    p.add_argument("-f", "--formula")
    p.add_argument("--proof")
    p.set_defaults(handler=cmd_print)

    p = sub.add_parser("decide", help="decide a formula in IPC or a shipped extension")
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("--logic", default="ipc")
    p.add_argument("--instances", type=int, default=config.ext_instances)
    p.add_argument("--depth", type=int, default=config.ext_depth)
    p.add_argument("--proof-out")
    p.set_defaults(handler=cmd_decide)

    p = sub.add_parser("check-proof", help="check a proof file")
    p.add_argument("proof")
    p.add_argument("--logic")
    p.add_argument("--conclusion")
    p.set_defaults(handler=cmd_check_proof)

    p = sub.add_parser("transform", help="tautology translations with certificates")
    p.add_argument("--kind", choices=sorted(TRANSLATIONS), required=True)
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_transform)

    p = sub.add_parser("elim", help="eliminate connectives from a proof")
    p.add_argument("--what", choices=["lor", "bot", "conj"], required=True)
    p.add_argument("--logic")
    p.add_argument("--proof", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_elim)

    p = sub.add_parser("bot-top", help="translate an L0 proof into an F-free L1 proof")
    p.add_argument("--pair", default="kc-ipc")
    p.add_argument("--proof", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_bot_top)

    p = sub.add_parser("sep", help="substitution Frege proofs of the separation family")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", default="p0")
    p.add_argument("--delta", default="p0_")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_sep)

    p = sub.add_parser("gen", help="generate a formula family member")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("model-eval", help="evaluate a formula in a Kripke model file")
    p.add_argument("--model", required=True)
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("--point")
    p.set_defaults(handler=cmd_model_eval)

    p = sub.add_parser("algebra-eval", help="evaluate a formula in a finite algebra")
    p.add_argument("--algebra", required=True, help="shipped algebra name or JSON file")
    p.add_argument("-f", "--formula", required=True)
    p.set_defaults(handler=cmd_algebra_eval)

    p = sub.add_parser("bruteforce", help="smallest equivalent formula in a fragment")
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("--fragment", default="->")
    p.add_argument("--names")
    p.add_argument("--max-size", type=int, default=7)
    p.add_argument("--max-conjuncts", type=int, default=1)
    p.add_argument("--deadline", type=float, default=None)
    p.set_defaults(handler=cmd_bruteforce)

    p = sub.add_parser("axiom", help="does the implicational fragment prove the axiom's square")
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("--instances", type=int, default=config.ext_instances)
    p.add_argument("--depth", type=int, default=config.ext_depth)
    p.set_defaults(handler=cmd_axiom)

    p = sub.add_parser("bench", help="proof size tables")
    p.add_argument("bench", choices=sorted(BENCHES))
    p.add_argument("--max-n", type=int, default=3)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("stats", help="configuration and metrics")
    p.set_defaults(handler=cmd_stats)
    return parser


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.log_level:
        logging.getLogger().setLevel(args.log_level.upper())
    if args.seed is None:
        args.seed = config.seed
    else:
        config.seed = args.seed
    try:
        payload, code = args.handler(args)
    except ParseError as e:
        payload, code = {"status": "usage", "error": str(e)}, 2
    except FAILURES as e:
        logger.warning(f"{args.command} failed: {e}")
        payload, code = {"status": "failed", "error": str(e)}, 1
    except (OSError, ValueError, KeyError) as e:
        logger.error(f"{args.command}: {e}")
        payload, code = {"status": "error", "error": str(e)}, 2
    json.dump(payload, out, indent=2, sort_keys=True, default=str)
    out.write("\n")
    return code


def main() -> None:
    sys.exit(run())
