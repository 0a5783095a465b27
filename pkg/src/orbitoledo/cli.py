"""Batch command-line interface; every subcommand prints one JSON document.

Exit codes: 0 success, 1 validation error, 2 numerical non-convergence,
64 usage error (unknown subcommand or bad flags).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import chp, orbibundle as ob, quadrature as quad, toledo as tl
from .errors import NumericalError, OrbiError, ValidationError
from .orbifold import (
    OrbifoldSignature,
    euler_characteristic,
    euler_lattice,
    is_good,
    is_hyperbolic,
    rational_to_json,
)

EX_OK, EX_INVALID, EX_NUMERIC, EX_USAGE = 0, 1, 2, 64
DEFAULT_SEED = 20240607

COMMANDS = (
    "chi", "euler", "lattice", "pullback", "tangent", "curvature-probe",
    "toledo", "chern", "verify-rep", "identity-check",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _load_json(text_or_path: str | None, path: str | None):
    if path:
        try:
            with open(path) as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read {path}: {exc}") from exc
    if text_or_path is None:
        return None
    try:
        return json.loads(text_or_path)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc


def _cones(text: str | None):
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ValidationError(f"bad cone list {text!r}") from exc


def _signature(args) -> OrbifoldSignature:
    obj = _load_json(None, args.file)
    if obj is not None:
        return OrbifoldSignature.from_json(obj.get("signature", obj))
    if args.genus is None:
        raise ValidationError("give --genus/--cones or --file")
    return OrbifoldSignature(args.genus, _cones(args.cones))


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad rational {text!r}") from exc


def _sig_args(p):
    p.add_argument("--genus", type=int)
    p.add_argument("--cones", help="comma-separated cone orders, e.g. 2,3,7")
    p.add_argument("--file", help="JSON file with a signature")


def _numeric_args(p):
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--max-depth", type=int, default=9)
    p.add_argument("--jobs", type=int, default=1)


def _rep_args(p):
    p.add_argument("--builtin", help="genus2 or triangle:P,Q,R")
    p.add_argument("--kind", default="holomorphic", choices=["holomorphic", "antiholomorphic", "trivial"],
                   help="builtin representation family")
    p.add_argument("--lift", action="store_true",
                   help="rescale block targets by phases so triangle relators hold (fails when no lift exists)")
    p.add_argument("--file", help="representation JSON")
    p.add_argument("--domain", help="octagon or triangle:P,Q,R (required with --file)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orbitoledo", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("chi", help="orbifold Euler characteristic")
    _sig_args(p)
    p = sub.add_parser("tangent", help="Seifert data of the tangent orbibundle")
    _sig_args(p)
    p = sub.add_parser("lattice", help="lattice Z + 1/m_1 Z + ...; optional membership test")
    _sig_args(p)
    p.add_argument("--value", help="rational to test, e.g. -1/42")

    p = sub.add_parser("euler", help="Euler number of Seifert data")
    p.add_argument("--seifert", help='JSON {"base":..., "q0":..., "windings":[...]}')
    p.add_argument("--file")

    p = sub.add_parser("pullback", help="pull Seifert data back along a covering")
    p.add_argument("--seifert")
    p.add_argument("--covering", help='JSON {"degree":d, "stabilizers":[[...],...]}')
    p.add_argument("--file", help='JSON {"seifert":..., "covering":...}')

    p = sub.add_parser("curvature-probe", help="random sectional curvature and trace-identity probe")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    for name in ("toledo", "chern"):
        p = sub.add_parser(name, help=f"{name} computation for a representation")
        _rep_args(p)
        p.add_argument("--map", default=None, choices=["holomorphic", "antiholomorphic", "constant"])
        _numeric_args(p)
        p.add_argument("--probe", action="store_true", help="allow representation data that fails validation")

    p = sub.add_parser("verify-rep", help="validate representation data")
    _rep_args(p)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("identity-check", help="check (3/2) tau_R = e_R + 1")
    p.add_argument("--tau-rel", required=True)
    p.add_argument("--e-rel", required=True)
    p.add_argument("--tol", type=float)
    return parser


# --- command bodies -------------------------------------------------------------


def _cmd_chi(args):
    sig = _signature(args)
    return {
        "signature": sig.to_json(),
        "chi": rational_to_json(euler_characteristic(sig)),
        "hyperbolic": is_hyperbolic(sig),
        "good": is_good(sig),
    }


def _cmd_tangent(args):
    sig = _signature(args)
    sd = ob.tangent_seifert(sig)
    return {"seifert": sd.to_json(), "euler_number": rational_to_json(ob.euler_number(sd))}


def _cmd_lattice(args):
    sig = _signature(args)
    out = {"signature": sig.to_json(), "lattice": euler_lattice(sig).to_json()}
    if args.value is not None:
        out["value"] = rational_to_json(_rational(args.value))
        out["member"] = ob.lattice_check(_rational(args.value), sig)
    return out


def _seifert(obj) -> ob.SeifertData:
    if obj is None:
        raise ValidationError("no Seifert data given")
    return ob.SeifertData.from_json(obj)


def _cmd_euler(args):
    sd = _seifert(_load_json(args.seifert, args.file))
    e = ob.euler_number(sd)
    return {
        "seifert": sd.to_json(),
        "euler_number": rational_to_json(e),
        "in_lattice": ob.lattice_check(e, sd.base),
    }


def _cmd_pullback(args):
    bundle = _load_json(None, args.file) or {}
    sd = _seifert(bundle.get("seifert") or _load_json(args.seifert, None))
    cov_obj = bundle.get("covering") or _load_json(args.covering, None)
    if cov_obj is None:
        raise ValidationError("no covering data given")
    cov = ob.CoveringData.from_json(cov_obj)
    pb = ob.pullback(sd, cov)
    e0, e1 = ob.euler_number(sd), ob.euler_number(pb)
    return {
        "pullback": pb.to_json(),
        "degree": cov.degree,
        "base_euler_number": rational_to_json(e0),
        "euler_number": rational_to_json(e1),
        "multiplicative": e1 == cov.degree * e0,
    }


def _cmd_probe(args):
    if args.samples < 1:
        raise ValidationError("--samples must be positive")
    rng = np.random.default_rng(args.seed)
    p = chp.random_negative_points(rng, args.samples)
    t1 = chp.random_tangents(rng, p)
    t2 = chp.random_tangents(rng, p)
    K = chp.sectional_curvature(p, t1, t2)
    t1, t2 = chp.unit_tangent(p, t1), chp.unit_tangent(p, t2)
    resid = np.abs(chp.curvature_trace(p, t1, t2) - 6j * chp.kahler_form(p, t1, t2))
    return {
        "samples": args.samples,
        "seed": args.seed,
        "min": float(K.min()),
        "max": float(K.max()),
        "trace_residual_max": float(resid.max()),
    }


def _domain(name: str) -> quad.GeodesicPolygon:
    if name == "octagon":
        return quad.octagon_domain()
    if name.startswith("triangle:"):
        orders = _cones(name.split(":", 1)[1])
        if len(orders) != 3:
            raise ValidationError("triangle domains need three orders")
        return quad.triangle_domain(*orders)
    raise ValidationError(f"unknown domain {name!r}")


def _representation(args):
    if args.file:
        rep = tl.RepresentationData.from_json(_load_json(None, args.file))
        if not args.domain:
            raise ValidationError("--domain is required with --file")
        return rep, _domain(args.domain), None
    if not args.builtin:
        raise ValidationError("give --builtin or --file")
    domain = _domain("octagon" if args.builtin == "genus2" else args.builtin)
    if args.kind == "trivial":
        return tl.trivial_representation(domain), domain, "constant"
    build = tl.lifted_block_representation if args.lift else tl.block_representation
    return build(domain, args.kind), domain, args.kind


def _map_for(args, rep, default):
    kind = args.map or default
    if kind is None:
        raise ValidationError("--map is required with --file")
    return tl.builtin_map(kind, rep)


def _cmd_toledo(args):
    rep, domain, default = _representation(args)
    fmap = _map_for(args, rep, default)
    res = tl.toledo_invariant(
        rep, fmap, domain, rel_tol=args.rel_tol, max_depth=args.max_depth, jobs=args.jobs, strict=not args.probe
    )
    out = res.to_json()
    out["rigidity"] = tl.rigidity_check(res, rep).to_json()
    out["signature"] = (rep.signature or domain.signature).to_json()
    return out


def _cmd_chern(args):
    rep, domain, default = _representation(args)
    fmap = _map_for(args, rep, default)
    kw = dict(rel_tol=args.rel_tol, max_depth=args.max_depth, jobs=args.jobs, strict=not args.probe)
    c1 = tl.chern_number(rep, fmap, domain, **kw)
    tau = tl.toledo_invariant(rep, fmap, domain, **kw).tau
    return {"c1": c1, "three_halves_tau": 1.5 * tau, "difference": c1 - 1.5 * tau, "rel_tol": args.rel_tol}


def _cmd_verify(args):
    rep, _, _ = _representation(args)
    report = tl.validate_representation(rep, args.tol)
    return report.to_json(), (EX_OK if report.ok else EX_INVALID)


def _cmd_identity(args):
    tau_rel, e_rel = _rational(args.tau_rel), _rational(args.e_rel)
    return {
        "tau_rel": rational_to_json(tau_rel),
        "e_rel": rational_to_json(e_rel),
        "holds": tl.holomorphic_identity_check(tau_rel, e_rel, args.tol),
    }


HANDLERS = {
    "chi": _cmd_chi,
    "tangent": _cmd_tangent,
    "lattice": _cmd_lattice,
    "euler": _cmd_euler,
    "pullback": _cmd_pullback,
    "curvature-probe": _cmd_probe,
    "toledo": _cmd_toledo,
    "chern": _cmd_chern,
    "verify-rep": _cmd_verify,
    "identity-check": _cmd_identity,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if not argv or argv[0] not in COMMANDS:
            raise UsageError(parser.format_help())
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EX_USAGE
    code = EX_OK
    try:
        out = HANDLERS[args.command](args)
        if isinstance(out, tuple):
            out, code = out
    except NumericalError as exc:
        out = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "estimates", None):
            out["estimates"] = list(exc.estimates)
        code = EX_NUMERIC
    except (ValidationError, OrbiError) as exc:
        out = {"error": type(exc).__name__, "message": str(exc)}
        code = EX_INVALID
    json.dump(out, stdout, sort_keys=True)
    stdout.write("\n")
    return code


def main():
    sys.exit(run())
