"""Command-line surface: norm computations, tree construction runs, coupling
verification, and the full gate suite, all emitting deterministic JSON.

Exit codes: 0 success, 1 failed gate criterion, 2 invalid input, 3 solver
returned no certificate.

File formats (JSON):
  group table    {"order": n, "table": [[...], ...]}
  function       {"group_ref": "...", "values": [x, ...]} where each value is
                 a number or a [re, im] pair; a {"element": value} map keyed
                 by element index is also accepted
  coupling       {"weights": [...], "gamma": {"order": ..., "table": ...,
                 "action": [[...], ...]}, "lambda": {...}, "p": [...],
                 "q": [...]}
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import numerics
from .acceptance import run_all, shipped_couplings
from .constructions import haagerup_family, tree_witness
from .coupling import (CouplingSpace, induce, induce_dual, induce_witness,
                       koopman_check, lattice_induce, me_coupling,
                       subgroup_coupling)
from .groups import (Carrier, FiniteGroup, FreeBall, GroupFunction,
                     IntegerWindow, alternating_group, build_group, free_ball,
                     random_function, subgroup_elements)
from .norms import a_norm, b_norm, m2_norm, verify_factorization, exhaustive_tuples
from .numerics import SolveOptions
from .reports import RunReport, validate_report


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def parse_carrier(token: str) -> Carrier:
    token = token.strip()
    if token.endswith(".json"):
        return build_group(Path(token))
    name, _, arg = token.partition(":")
    if name == "freeball":
        try:
            k, r = (int(v) for v in arg.split(","))
        except ValueError:
            raise CliError(f"bad freeball spec {token!r}")
        return free_ball(k, r)
    if name == "window":
        return IntegerWindow(int(arg))
    try:
        return build_group(token)
    except ValueError as exc:
        raise CliError(str(exc))


def _resolve_subgroup(big_token: str, sub_token: str
                      ) -> tuple[FiniteGroup, list[int], str]:
    big = parse_carrier(big_token)
    if not isinstance(big, FiniteGroup):
        raise CliError("subgroup presets need a finite group")
    sub_token = sub_token.strip()
    if sub_token.startswith("gens="):
        gens = [int(v) for v in sub_token[5:].split("+") if v]
        return big, subgroup_elements(big, gens), f"gens:{gens}"
    name = sub_token.rstrip("0123456789")
    arg = sub_token[len(name):]
    name = name.rstrip(":")
    if name in ("alt", "alternating"):
        sub = alternating_group(int(arg))
        # even permutations sit at the same sorted positions inside sym
        from .groups import _perm_sign
        import itertools
        perms = sorted(itertools.permutations(range(int(arg))))
        elems = [i for i, p in enumerate(perms) if _perm_sign(p) == 1]
        if big.label != f"sym:{arg}":
            raise CliError("alternating subgroups live inside sym groups")
        return big, elems, sub_token
    if name in ("cyclic",):
        k = int(arg)
        if big.order % k != 0:
            raise CliError("cyclic subgroup order must divide the group order")
        # deterministic pick: the first element of order k
        for g in range(big.order):
            x, order = g, 1
            while x != big.identity:
                x = big.mul(x, g)
                order += 1
                if order > big.order:
                    break
            if order == k:
                return big, subgroup_elements(big, [g]), sub_token
        raise CliError(f"no element of order {k} in {big_token}")
    if sub_token == big_token:
        return big, list(range(big.order)), "full"
    raise CliError(f"unknown subgroup token {sub_token!r}")


def load_function(path: str, carrier: Carrier) -> GroupFunction:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read function file: {exc}")
    raw = data["values"] if isinstance(data, dict) else data
    vals = np.zeros(carrier.size, dtype=np.complex128)

    def conv(v):
        if isinstance(v, (list, tuple)):
            return complex(v[0], v[1])
        return complex(v)

    if isinstance(raw, dict):
        for key, v in raw.items():
            vals[int(key)] = conv(v)
    else:
        if len(raw) != carrier.size:
            raise CliError("function values must cover the carrier")
        for i, v in enumerate(raw):
            vals[i] = conv(v)
    try:
        return GroupFunction(carrier, vals)
    except ValueError as exc:
        raise CliError(str(exc))


def load_coupling(path: str) -> CouplingSpace:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read coupling file: {exc}")
    try:
        gamma = build_group({"order": data["gamma"]["order"],
                             "table": data["gamma"]["table"]})
        lam = build_group({"order": data["lambda"]["order"],
                           "table": data["lambda"]["table"]})
        return me_coupling(np.asarray(data["weights"], dtype=float),
                           gamma, np.asarray(data["gamma"]["action"]),
                           lam, np.asarray(data["lambda"]["action"]),
                           data["p"], data["q"])
    except (KeyError, ValueError) as exc:
        raise CliError(f"invalid coupling: {exc}")


def emit(report: RunReport, out: str | None):
    text = report.to_json()
    try:
        validate_report(report.payload())
    except Exception as exc:  # schema failures are internal bugs
        print(f"warning: report failed schema validation: {exc}",
              file=sys.stderr)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"wall time: {report.wall_time_s:.3f}s", file=sys.stderr)


def cmd_norm(args) -> int:
    t0 = time.time()
    carrier = parse_carrier(args.group)
    opts = SolveOptions(tolerance=args.tol, seed=args.seed)
    phi = load_function(args.fn, carrier)
    results: dict = {"kind": args.kind}
    if args.kind == "m2":
        rep = m2_norm(phi, opts)
        results["lower"] = rep.lower
        results["lower_provenance"] = rep.lower_provenance
        results["upper"] = rep.upper
        results["upper_provenance"] = rep.upper_provenance
        if rep.notes:
            results["notes"] = rep.notes
        if "no certificate" in (rep.notes or ""):
            raise CliError("no certificate", code=3)
    else:
        if not isinstance(carrier, FiniteGroup):
            raise CliError("coefficient norms need a finite group")
        try:
            value = (b_norm if args.kind == "b" else a_norm)(phi, carrier, opts)
        except ValueError as exc:
            if "no certificate" in str(exc):
                raise CliError(str(exc), code=3)
            raise CliError(str(exc))
        results["value"] = value
    report = RunReport(f"norm {args.kind}",
                       {"group": args.group, "fn": str(args.fn)},
                       args.seed, {"tol": args.tol}, results,
                       time.time() - t0)
    emit(report, args.out)
    return 0


def cmd_tree(args) -> int:
    t0 = time.time()
    if args.acting_radius * args.d + args.n > args.radius:
        raise CliError("radius budget violated: need r*d + n <= R")
    ball = free_ball(args.gens, args.radius)
    fam = tree_witness(ball, args.n, args.d, args.acting_radius)
    results = {
        "residual": fam.residual,
        "factor_norms": fam.factor_norms,
        "bound": fam.bound,
        "bound_target": args.n + 1,
        "chi_bound": fam.chi_bound,
        "chi_target": 2 * args.n if args.n >= 1 else 1,
        "witness_dims": fam.witness.dims,
        "phi_support": int(np.count_nonzero(fam.phi.values.real)),
        "haagerup": [],
    }
    for t in args.t_values:
        hf = haagerup_family(ball, args.n, t, verify_pd=not args.skip_pd)
        results["haagerup"].append({
            "t": t, "tail": hf.tail, "pd_checked": hf.pd_checked,
            "pd_subset_radius": hf.pd_subset_radius,
        })
    report = RunReport(
        "tree", {"gens": args.gens, "radius": args.radius, "n": args.n,
                 "d": args.d, "acting_radius": args.acting_radius},
        args.seed, {"residual_tol": 1e-12}, results, time.time() - t0)
    emit(report, args.out)
    return 0


def _coupling_from_args(args) -> tuple[CouplingSpace, str]:
    if args.file:
        return load_coupling(args.file), f"file:{args.file}"
    if not args.preset:
        raise CliError("need --preset or --file")
    kind, _, rest = args.preset.partition(":")
    if kind != "subgroup":
        raise CliError(f"unknown coupling preset {args.preset!r}")
    try:
        big_token, sub_token = rest.split(",")
    except ValueError:
        raise CliError("subgroup preset format: subgroup:BIG,SUB")
    big, elems, label = _resolve_subgroup(big_token, sub_token)
    cs, _, _ = subgroup_coupling(big, elems, label)
    return cs, args.preset


def cmd_couple(args) -> int:
    t0 = time.time()
    cs, label = _coupling_from_args(args)
    rng = np.random.default_rng(args.seed)
    opts = SolveOptions(seed=args.seed)
    results: dict = {"coupling": label, "action": args.action,
                     "points": cs.space.n_points,
                     "gamma_order": cs.gamma.order,
                     "lambda_order": cs.lam.order}
    lam = cs.lam
    if args.action == "induce":
        if args.fn:
            phi = load_function(args.fn, lam)
            phih = induce(cs, phi)
            results["induced_values"] = phih.values
        defect = -np.inf
        for _ in range(args.samples):
            phi = random_function(lam, rng)
            phih = induce(cs, phi)
            defect = max(defect, m2_norm(phih, opts).value
                         - m2_norm(phi, opts).value)
        results["max_m2_increase"] = defect
        results["monotonicity_pass"] = bool(defect <= 1e-6)
        if defect > 1e-6:
            raise CliError("induction monotonicity failed", code=1)
    elif args.action == "dual":
        worst_mass = 0.0
        worst_adj = 0.0
        from .norms import pairing
        for _ in range(args.samples):
            f = random_function(cs.gamma, rng)
            fpos = GroupFunction(cs.gamma, np.abs(f.values))
            worst_mass = max(worst_mass, abs(
                induce_dual(cs, fpos).norm_l1() - fpos.norm_l1()))
            phi = random_function(lam, rng)
            worst_adj = max(worst_adj, abs(
                pairing(induce(cs, phi), f)
                - pairing(phi, induce_dual(cs, f))))
        results["max_mass_gap"] = worst_mass
        results["max_adjointness_gap"] = worst_adj
        results["pass"] = bool(worst_mass <= 1e-12 and worst_adj <= 1e-12)
    elif args.action == "witness":
        from .constructions import coefficient_witness
        from .groups import random_pd_function
        worst_resid = 0.0
        worst_gap = -np.inf
        for _ in range(args.samples):
            phi = random_pd_function(lam, rng)
            w = coefficient_witness(lam, phi, args.d, opts)
            what = induce_witness(cs, phi, w)
            phih = induce(cs, phi)
            tups = exhaustive_tuples(what.acting_set, args.d)
            resid, bound = verify_factorization(phih, what, tups)
            worst_resid = max(worst_resid, resid)
            worst_gap = max(worst_gap, bound - w.bound())
        results["max_residual"] = worst_resid
        results["max_bound_increase"] = worst_gap
        results["pass"] = bool(worst_resid <= 1e-9 and worst_gap <= 1e-6)
    elif args.action == "koopman":
        phi = random_function(lam, rng)
        rep = koopman_check(cs, phi)
        results["unitarity_defect"] = rep.unitarity_defect
        results["intertwining_defect"] = rep.intertwining_defect
        results["coefficient_defect"] = rep.coefficient_defect
        results["norm_certificate_gap"] = rep.norm_certificate_gap
        results["pass"] = rep.passed
        if not rep.passed:
            raise CliError("koopman check failed", code=1)
    elif args.action == "lattice":
        raise CliError("lattice action needs the couple-lattice preset; "
                       "use: couple --preset subgroup:BIG,SUB --action induce")
    else:
        raise CliError(f"unknown action {args.action!r}")
    report = RunReport(f"couple {args.action}",
                       {"coupling": label, "samples": args.samples,
                        "d": args.d},
                       args.seed, {"tol": 1e-6}, results, time.time() - t0)
    emit(report, args.out)
    return 0


def cmd_verify_all(args) -> int:
    t0 = time.time()
    quick = not args.full
    results = run_all(quick=quick, seed=args.seed)
    table = {}
    all_pass = True
    for r in results:
        table[f"{r.index:02d} {r.name}"] = {
            "passed": r.passed, "details": r.details,
        }
        all_pass = all_pass and r.passed
        status = "pass" if r.passed else "FAIL"
        print(f"criterion {r.index:2d} [{status}] {r.name}"
              f" ({r.elapsed_s:.1f}s)", file=sys.stderr)
    report = RunReport("verify-all",
                       {"mode": "quick" if quick else "full"},
                       args.seed, {"tol": 1e-6}, table, time.time() - t0)
    emit(report, args.out)
    return 0 if all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mdmult",
        description="certified multiplier-norm bounds, tree multiplier "
                    "constructions, and coupling-based induction checks")
    sub = p.add_subparsers(dest="cmd", required=True)

    pn = sub.add_parser("norm", help="compute a norm of a function file")
    pn.add_argument("kind", choices=["m2", "b", "a"])
    pn.add_argument("--group", required=True,
                    help="preset (cyclic:4, sym:3, freeball:2,2, window:8) "
                         "or a table JSON path")
    pn.add_argument("--fn", required=True, help="function JSON file")
    pn.add_argument("--tol", type=float, default=1e-7)
    pn.add_argument("--seed", type=int, default=0)
    pn.add_argument("--out", default=None)
    pn.set_defaults(func=cmd_norm)

    pt = sub.add_parser("tree", help="build and verify a tree witness")
    pt.add_argument("-g", "--gens", type=int, required=True)
    pt.add_argument("-R", "--radius", type=int, required=True)
    pt.add_argument("-n", type=int, required=True)
    pt.add_argument("-d", type=int, required=True)
    pt.add_argument("-r", "--acting-radius", type=int, default=1)
    pt.add_argument("--t-values", type=float, nargs="*",
                    default=[0.5, 1.0])
    pt.add_argument("--skip-pd", action="store_true")
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--out", default=None)
    pt.set_defaults(func=cmd_tree)

    pc = sub.add_parser("couple", help="run coupling verifications")
    pc.add_argument("--preset", default=None,
                    help="subgroup:BIG,SUB (e.g. subgroup:sym3,alt3)")
    pc.add_argument("--file", default=None, help="coupling JSON file")
    pc.add_argument("--action", required=True,
                    choices=["induce", "dual", "witness", "koopman",
                             "lattice"])
    pc.add_argument("--fn", default=None, help="function JSON on lambda")
    pc.add_argument("-d", type=int, default=2)
    pc.add_argument("--samples", type=int, default=50)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--out", default=None)
    pc.set_defaults(func=cmd_couple)

    pv = sub.add_parser("verify-all", help="run the full gate suite")
    mode = pv.add_mutually_exclusive_group()
    mode.add_argument("--quick", action="store_true", default=True)
    mode.add_argument("--full", action="store_true", default=False)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--out", default=None)
    pv.set_defaults(func=cmd_verify_all)
    return p


def main(argv: list[str] | None = None) -> int:
    import os
    if os.environ.get("MDMULT_FAULT") == "schur-max-entry":
        numerics.FAULT_MODE = "max-entry"
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
