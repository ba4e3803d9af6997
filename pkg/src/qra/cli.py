"""Command-line front end.  Every command prints one JSON object.

Exit codes: 0 pass/true, 1 fail/false, 2 parse or schema error,
3 relation-audit failure, 4 no highest-weight certificate.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .drinfeld import NotEigen, extract_polynomial, highest_weight_vectors
from .evaluator import REGISTRY, run_mutations, run_registry
from .irreducibility import is_irreducible
from .modules import DescriptorError, ModuleError, module_from_descriptor, relation_audit, validate_l, \
    weight_decomposition
from .ring_tower import ParseError
from .segments import canonical_params, construction_plan, factor_P0_P1, isomorphic, parse_poly

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_AUDIT, EXIT_NOCERT = 0, 1, 2, 3, 4


class CommandError(Exception):
    def __init__(self, msg: str, code: int):
        super().__init__(msg)
        self.code = code


def _load_descriptor(text: str, l: int | None):
    if not text.lstrip().startswith("{") and os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        desc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CommandError(f"malformed JSON: {exc}", EXIT_PARSE) from None
    if isinstance(desc, dict) and l is not None:
        desc.setdefault("l", l)
    try:
        return module_from_descriptor(desc)
    except (DescriptorError, ModuleError, ValueError, ParseError) as exc:
        raise CommandError(str(exc), EXIT_PARSE) from None


def _weights_json(V) -> dict:
    return {str(k): len(v) for k, v in sorted(weight_decomposition(V).items(), reverse=True)}


def cmd_construct(args) -> tuple[dict, int]:
    V = _load_descriptor(args.descriptor, args.l)
    fails = relation_audit(V)
    out = {"dim": V.dim, "l": V.l, "module": V.provenance, "weights": _weights_json(V),
           "audit": "pass" if not fails else "fail"}
    if fails:
        out["audit_failures"] = fails
        return out, EXIT_AUDIT
    return out, EXIT_OK


def cmd_drinfeld(args) -> tuple[dict, int]:
    V = _load_descriptor(args.descriptor, args.l)
    certs = highest_weight_vectors(V)
    if args.index is None:
        if len(certs) != 1:
            raise CommandError(f"{len(certs)} highest-weight certificates; pass --index", EXIT_NOCERT)
        cert = certs[0]
    else:
        if not 0 <= args.index < len(certs):
            raise CommandError(f"no certificate with index {args.index} ({len(certs)} found)", EXIT_NOCERT)
        cert = certs[args.index]
    try:
        P = extract_polynomial(V, cert)
    except NotEigen as exc:
        raise CommandError(str(exc), EXIT_NOCERT) from None
    out = P.to_json()
    out["reciprocity"] = P.reciprocity_holds()
    out["certificates"] = len(certs)
    return out, EXIT_OK


def _require_l(args) -> int:
    if args.l is None:
        raise CommandError("--l is required", EXIT_PARSE)
    return args.l


def _poly(text: str, l: int):
    try:
        return parse_poly(text, l)
    except (ParseError, ValueError, KeyError) as exc:
        raise CommandError(f"cannot parse polynomial {text!r}: {exc}", EXIT_PARSE) from None


def cmd_factor(args) -> tuple[dict, int]:
    l = _require_l(args)
    P = _poly(args.poly, l)
    P0, P1 = factor_P0_P1(P)
    out = {"P": str(P), "P0": str(P0), "P1": str(P1), "params": canonical_params(P).to_json()}
    out["segments"] = out["params"]["segments"]
    try:
        out["plan"] = construction_plan(P)
    except ValueError as exc:
        out["plan"] = None
        out["plan_error"] = str(exc)
    return out, EXIT_OK


def cmd_irreducible(args) -> tuple[dict, int]:
    V = _load_descriptor(args.descriptor, args.l)
    v = is_irreducible(V)
    return v.to_json(), EXIT_OK if v.irreducible else EXIT_FAIL


def cmd_classify(args) -> tuple[dict, int]:
    l = _require_l(args)
    pa, pb = canonical_params(_poly(args.poly_a, l)), canonical_params(_poly(args.poly_b, l))
    iso = isomorphic(pa, pb)
    return {"isomorphic": iso, "params_a": pa.to_json(), "params_b": pb.to_json()}, EXIT_OK if iso else EXIT_FAIL


def _timed(report: list[dict], keep: bool) -> list[dict]:
    # wall times vary between runs; drop them unless asked so output stays byte-identical
    if not keep:
        for e in report:
            e.pop("seconds", None)
    return report


def cmd_verify(args) -> tuple[dict, int]:
    names = {c.name for c in REGISTRY}
    for s in args.checks:
        if s not in names:
            raise CommandError(f"unknown check {s!r}; known: {sorted(names)}", EXIT_PARSE)
    ranges = {k: v for k, v in (("r", args.max_r), ("s", args.max_s), ("n", args.max_n)) if v is not None}
    report = _timed(run_registry(args.checks or None, ranges), args.timings)
    ok = all(e["status"] == "pass" for e in report)
    out = {"checks": report, "status": "pass" if ok else "fail"}
    if not args.checks:
        muts = _timed(run_mutations(ranges), args.timings)
        out["mutations"] = muts
        if any(m["status"] != "fail" for m in muts):
            ok = False
            out["status"] = "fail"
    return out, EXIT_OK if ok else EXIT_FAIL


def _common(p: argparse.ArgumentParser, default):
    p.add_argument("--l", type=int, default=default, help="odd order l >= 3 of the root of unity")
    p.add_argument("--out", default=default, help="write the JSON here instead of stdout")
    p.add_argument("--pretty", action="store_true", default=default, help="indented JSON")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qra", description="Restricted quantum affine sl2 at roots of unity.")
    _common(p, None)
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _common(common, argparse.SUPPRESS)

    s = sub.add_parser("construct", parents=[common], help="build a module and audit its relations")
    s.add_argument("descriptor", help="JSON descriptor or path to one")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("drinfeld", parents=[common], help="extract the Drinfeld polynomial")
    s.add_argument("descriptor")
    s.add_argument("--index", type=int, default=None, help="certificate index for reducible modules")
    s.set_defaults(func=cmd_drinfeld)

    s = sub.add_parser("factor", parents=[common], help="P0/P1 split, segments and construction plan")
    s.add_argument("poly", help="factored polynomial like '(1-2u)(1-u^3)' or a JSON root list")
    s.set_defaults(func=cmd_factor)

    s = sub.add_parser("irreducible", parents=[common], help="closure-oracle irreducibility verdict")
    s.add_argument("descriptor")
    s.set_defaults(func=cmd_irreducible)

    s = sub.add_parser("classify", parents=[common], help="are V(P_a) and V(P_b) isomorphic")
    s.add_argument("poly_a")
    s.add_argument("poly_b")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("verify", parents=[common], help="run the identity registry")
    s.add_argument("checks", nargs="*", help="registry entries (default: all, plus the mutations)")
    s.add_argument("--max-r", type=int, default=None)
    s.add_argument("--max-s", type=int, default=None)
    s.add_argument("--max-n", type=int, default=None)
    s.add_argument("--timings", action="store_true", help="include wall time per check (not reproducible)")
    s.set_defaults(func=cmd_verify)
    return p


def _emit(obj: dict, pretty: bool, out: str | None):
    text = json.dumps(obj, sort_keys=True, indent=2 if pretty else None,
                      separators=None if pretty else (",", ":"))
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        if args.l is not None:
            try:
                validate_l(args.l)
                if args.l == 0:
                    raise ValueError("l must be odd and at least 3 (the root of unity hypothesis), got 0")
            except ValueError as exc:
                raise CommandError(str(exc), EXIT_PARSE) from None
        obj, code = args.func(args)
    except CommandError as exc:
        _emit({"error": str(exc), "exit": exc.code}, args.pretty, None)
        return exc.code
    _emit(obj, args.pretty, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
