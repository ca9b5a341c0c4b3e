"""``qwz`` command line: certify catalog identities or user terms, emit ProofObjects.

Exit codes: 0 success, 2 bad input (parse error, unknown identity, violated
constraint), 3 no certificate (q-Gosper found nothing or the n-difference is
zero), 4 a check failed (the ProofObject is still written), 5 not applicable.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import catalog
from .engine import (EngineError, ProofObject, Status, SubstitutionRecipe, ZeroDifference,
                     build_F_terms, check_conditions, companion, compare_reference, dec,
                     determine_constant, iterate_AnBn, telescope_certify, wz_discover)
from .exactnum import RatFunc
from .grammar import TermSyntaxError, parse_term, pretty_term, print_term, ratfunc_text
from .numeric import NonConvergence, PoleError, TruncationPolicy, partial_sum, term_value
from .terms import UnsupportedTerm

EXIT_OK, EXIT_INPUT, EXIT_NO_CERT, EXIT_FAIL, EXIT_NA = 0, 2, 3, 4, 5
DEFAULT_SEED = 1729


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    identity: Optional[str] = None
    term: Optional[str] = None
    closed_form: Optional[str] = None
    recipe: Optional[tuple] = None
    params: dict = field(default_factory=dict)
    q: Optional[Fraction] = None
    precision: int = 40
    epsilon: Fraction = Fraction(1, 10 ** 30)
    max_terms: int = 4000
    seed: int = DEFAULT_SEED
    json_out: Optional[str] = None
    fmt: str = "json"
    ks: tuple = (0, 1, 3)
    N: int = 60

    def policy(self) -> TruncationPolicy:
        try:
            return TruncationPolicy(self.precision, self.epsilon, self.max_terms)
        except ValueError as exc:
            raise InputError(str(exc)) from None

    def entry(self) -> Optional[catalog.IdentityEntry]:
        if self.identity is None:
            return None
        try:
            return catalog.get(self.identity)
        except catalog.UnknownIdentity as exc:
            raise InputError(exc.args[0]) from None

    def assignment(self, entry=None) -> dict:
        pt = entry.sample_point() if entry is not None else {}
        pt.update(self.params)
        if self.q is not None:
            pt["q"] = self.q
        pt.setdefault("q", Fraction(1, 2))
        if entry is not None:
            bad = entry.check_constraints(pt)
            if bad:
                raise InputError(f"point violates {', '.join(bad)}")
        return pt


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational literal: {text!r}") from None


def _param(text: str) -> tuple[str, Fraction]:
    name, sep, val = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=R, got {text!r}")
    return name.strip(), _rational(val)


def _point_json(pt) -> dict:
    return {k: str(v) for k, v in sorted(pt.items())}


# ---------------------------------------------------------------------------
# exit codes as a function of the ProofObject
# ---------------------------------------------------------------------------

def exit_code(po: ProofObject) -> int:
    """C1 backs the identity; C2 and C3 only matter where a companion can exist."""
    if po.pair is None:
        return EXIT_NO_CERT
    if not po.exact_check:
        return EXIT_FAIL
    if po.conditions is not None:
        relevant = [po.conditions.c1]
        if po.extras.get("support") != "bilateral":
            relevant += [po.conditions.c2, po.conditions.c3]
        if any(c.status is Status.FAIL for c in relevant):
            return EXIT_FAIL
    if po.constant is not None and po.constant.details.get("n_independent") is False:
        return EXIT_FAIL
    if po.companion is not None and po.companion.status is Status.FAIL:
        return EXIT_FAIL
    if po.extras.get("windows_ok") is False:
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# pipeline pieces
# ---------------------------------------------------------------------------

def _target(cfg: RunConfig):
    """(entry or None, F, recipe, support)."""
    entry = cfg.entry()
    try:
        if entry is not None:
            if entry.kind != "wz":
                raise InputError(f"{entry.id} is a {entry.kind} entry; use "
                                 + ("telescope" if entry.kind == "telescope" else "verify-numeric"))
            recipe = SubstitutionRecipe(cfg.recipe) if cfg.recipe else entry.recipe
            F = build_F_terms(entry.summand, entry.closed_form, recipe)
            return entry, F, recipe, entry.support
        if cfg.term is None:
            raise InputError("give an identity id or --term")
        t = parse_term(cfg.term)
        if cfg.recipe:
            recipe = SubstitutionRecipe(cfg.recipe)
            cf = parse_term(cfg.closed_form) if cfg.closed_form else None
            return None, build_F_terms(t, cf, recipe), recipe, "unilateral"
        return None, t, None, "unilateral"
    except (TermSyntaxError, UnsupportedTerm, EngineError) as exc:
        raise InputError(str(exc)) from None


def _windows(pair, pt, policy, rng, count=3):
    """Seeded finite telescoping checks ``sum_{K1<=k<K2} (F(n+1,k)-F(n,k)) = G(n,K2)-G(n,K1)``."""
    out, ok = [], True
    for _ in range(count):
        n = rng.randint(0, 4)
        k1 = rng.randint(0, 5)
        k2 = k1 + rng.randint(1, 6)
        try:
            with policy.workdps():
                lhs = (partial_sum(pair.F, pt, n + 1, k1, k2, policy)
                       - partial_sum(pair.F, pt, n, k1, k2, policy))
                rhs = (term_value(pair.G, pt, k2, n, policy).result()
                       - term_value(pair.G, pt, k1, n, policy).result())
                good = bool(abs(lhs - rhs) <= 10 * policy.eps * max(1, abs(rhs)))
        except PoleError:
            out.append({"n": n, "K1": k1, "K2": k2, "skipped": "pole"})
            continue
        ok = ok and good
        out.append({"n": n, "K1": k1, "K2": k2, "residual": dec(abs(lhs - rhs), 6), "ok": good})
    return out, ok


def _discover(cfg: RunConfig):
    entry, F, recipe, support = _target(cfg)
    try:
        pair = wz_discover(F)
        diag = None if pair is not None else "q-Gosper: no Laurent polynomial solution in the degree range"
    except ZeroDifference as exc:
        pair, diag = None, str(exc)
    po = ProofObject(entry.id if entry else cfg.term, recipe, pair, pair is not None and pair.check(),
                     None, None, None, cfg.seed, {"support": support})
    if diag:
        po.extras["diagnostics"] = diag
        po.extras["F"] = print_term(F)
    if pair is not None:
        po.extras["G"] = print_term(pair.G)
        if entry is not None and entry.reference_G is not None:
            po.extras["reference_G"] = compare_reference(pair, entry.reference_G)
    return entry, po


def _run_certify(cfg: RunConfig, with_constant: bool = True) -> ProofObject:
    entry, po = _discover(cfg)
    if po.pair is None:
        return po
    policy = cfg.policy()
    pt = cfg.assignment(entry)
    letters = po.pair.F.letters() | {"q"}
    missing = sorted(letters - set(pt))
    if missing:
        po.extras["numeric"] = f"skipped: no value for {', '.join(missing)}"
        return po
    po.extras["point"] = _point_json(pt)
    bilateral = po.extras["support"] == "bilateral"
    try:
        po.conditions, _ = check_conditions(po.pair, pt, policy, bilateral)
        po.companion = companion(po.pair, po.conditions, pt, policy, cfg.ks, bilateral)
        if with_constant and entry is not None and entry.degeneration and not cfg.recipe:
            po.constant = determine_constant(po.pair, entry, policy, pt)
            po.extras["n_independence"] = [dec(v) for v in po.constant.n_independence]
        po.extras["windows"], po.extras["windows_ok"] = _windows(po.pair, pt, policy,
                                                                 random.Random(cfg.seed))
    except (NonConvergence, PoleError) as exc:
        raise InputError(f"numeric evaluation failed at {_point_json(pt)}: {exc}") from None
    if po.companion.status is Status.NOT_APPLICABLE:
        po.extras["companion_reason"] = po.companion.reason
    return po


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _human_proof(po: ProofObject) -> str:
    recipe = ", ".join(po.recipe.params_shifted) if po.recipe else "none (term is F)"
    lines = [f"identity   {po.identity_id}", f"recipe     {{{recipe}}}"]
    if po.pair is None:
        lines.append(f"result     no certificate ({po.extras.get('diagnostics', '')})")
        return "\n".join(lines)
    lines += [f"F(n,k)     {pretty_term(po.pair.F)}",
              f"G(n,k)     {pretty_term(po.pair.G)}",
              f"cert G/F   {ratfunc_text(po.pair.cert)}",
              f"pair check {'exact, passed' if po.exact_check else 'FAILED'}"]
    if "reference_G" in po.extras:
        lines.append(f"printed G  {'matches' if po.extras['reference_G']['match'] else po.extras['reference_G']}")
    if po.conditions is not None:
        lines.append("conditions " + ", ".join(f"{c}={s.value}" for c, s in po.conditions.statuses().items()))
    if po.constant is not None:
        lines.append(f"constant   {dec(po.constant.value)} via {po.constant.method}")
    if po.companion is not None:
        if po.companion.status is Status.NOT_APPLICABLE:
            lines.append(f"companion  not applicable: {po.companion.reason}")
        else:
            res = ", ".join(f"k={k}: {dec(r, 3)}" for k, r in po.companion.residuals)
            lines.append(f"companion  {po.companion.status.value} (residuals {res})")
    if "numeric" in po.extras:
        lines.append(f"numeric    {po.extras['numeric']}")
    lines.append("(rational prefactors are written in x = q^k, y = q^n)")
    return "\n".join(lines)


def cmd_certify(cfg: RunConfig):
    po = _run_certify(cfg)
    return exit_code(po), po.to_dict(), _human_proof(po)


def cmd_discover(cfg: RunConfig):
    _, po = _discover(cfg)
    return exit_code(po), po.to_dict(), _human_proof(po)


def cmd_companion(cfg: RunConfig):
    po = _run_certify(cfg, with_constant=False)
    if po.pair is None:
        return EXIT_NO_CERT, po.to_dict(), _human_proof(po)
    c = po.companion
    out = {"identity_id": po.identity_id, "status": c.status.value if c else None,
           "statement": c.statement if c else None,
           "residual": {str(k): dec(r, 6) for k, r in c.residuals} if c else {},
           "reason": c.reason if c else po.extras.get("numeric"), "seed": cfg.seed}
    human = _human_proof(po)
    if c is not None and c.statement:
        human += f"\nstatement  {c.statement}"
    if c is None or c.status is Status.NOT_APPLICABLE:
        return EXIT_NA, out, human
    return (EXIT_OK if c.status is Status.PASS else EXIT_FAIL), out, human


def _entry_of_kind(cfg: RunConfig, kinds: Sequence[str]):
    entry = cfg.entry()
    if entry is None:
        raise InputError("an identity id is required")
    if entry.kind not in kinds:
        raise InputError(f"{entry.id} is a {entry.kind} entry")
    return entry


def cmd_telescope(cfg: RunConfig):
    entry = _entry_of_kind(cfg, ("telescope",))
    pt = cfg.assignment(entry)
    rec = telescope_certify(entry.recurrence, entry.D, cfg.policy(), pt, entry.reference_z)
    out = {"identity_id": entry.id, "point": _point_json(pt), **rec.to_dict(), "seed": cfg.seed}
    human = "\n".join([
        f"identity   {entry.id}",
        f"T(n)       {pretty_term(rec.T) if rec.T is not None else 0}",
        f"z(n)       {pretty_term(rec.z) if rec.z is not None else '-'}",
        f"exact      {rec.exact_check}",
        f"z_0 = 0    {rec.z0_zero}",
        f"limit      expected {out['limit']['expected']}, symbolic {out['limit']['symbolic']}, "
        f"numeric {out['limit']['numeric']}",
        f"printed z  {rec.reference_match}",
        f"status     {rec.status.value}"])
    return (EXIT_OK if rec.status is Status.PASS else EXIT_FAIL), out, human


def cmd_verify_numeric(cfg: RunConfig):
    entry = cfg.entry()
    if entry is None:
        raise InputError("an identity id is required")
    pt = cfg.assignment(entry)
    missing = sorted((set(entry.params) | {"q"}) - set(pt))
    if missing:
        raise InputError(f"no value for {', '.join(missing)}")
    policy = cfg.policy()
    try:
        lhs, rhs, ok = catalog.verify_numeric(entry, pt, policy)
    except (NonConvergence, PoleError) as exc:
        raise InputError(f"numeric evaluation failed: {exc}") from None
    with policy.workdps():
        diff = abs(lhs - rhs)
    out = {"identity_id": entry.id, "point": _point_json(pt), "lhs": dec(lhs), "rhs": dec(rhs),
           "abs_diff": dec(diff, 6), "ok": ok, "seed": cfg.seed}
    human = (f"identity   {entry.id}\npoint      {out['point']}\nlhs        {out['lhs']}\n"
             f"rhs        {out['rhs']}\n|lhs-rhs|  {out['abs_diff']}\nagree      {ok}")
    return (EXIT_OK if ok else EXIT_FAIL), out, human


def cmd_anbn(cfg: RunConfig):
    entry = _entry_of_kind(cfg, ("telescope",))
    pt = cfg.assignment(entry)
    try:
        rep = iterate_AnBn(entry.recurrence, cfg.N, pt)
    except EngineError as exc:
        raise InputError(str(exc)) from None
    out = {"identity_id": entry.id, "point": _point_json(pt), **rep.to_dict(), "seed": cfg.seed}
    tail = ", ".join(dec(d, 3) for d in rep.diffs[-5:])
    human = (f"identity   {entry.id}\nA_0, B_0   {out['A0']}, {out['B0']}\n"
             f"A_N, B_N   {out['A_N']}, {out['B_N']}\nlast |A_{{n+1}}-A_n|  {tail}\n"
             f"Cauchy (< 1e-12)  {rep.cauchy}")
    return (EXIT_OK if rep.cauchy else EXIT_FAIL), out, human


def cmd_list(cfg: RunConfig):
    rows = [(i, catalog.get(i)) for i in catalog.list_ids()]
    out = {"identities": [{"id": i, "kind": e.kind, "title": e.title,
                           "constraints": [c.text for c in e.constraints]} for i, e in rows]}
    human = "\n".join(f"{i:24s} {e.kind:9s} {e.title}" for i, e in rows)
    return EXIT_OK, out, human


COMMANDS = {"certify": cmd_certify, "discover": cmd_discover, "companion": cmd_companion,
            "telescope": cmd_telescope, "verify-numeric": cmd_verify_numeric, "anbn": cmd_anbn,
            "list": cmd_list}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("identity", nargs="?", help="catalog identity id")
    common.add_argument("--term", help="term text: F(n,k), or a summand together with --recipe")
    common.add_argument("--closed-form", help="right-hand side for --term with --recipe")
    common.add_argument("--recipe", help="letters shifted by n, comma separated (e.g. a,c)")
    common.add_argument("--q", type=_rational, help="value of q (default: sample point, else 1/2)")
    common.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=R")
    common.add_argument("--prec", type=int, default=40, help="working precision in digits")
    common.add_argument("--eps", type=_rational, default=Fraction(1, 10 ** 30))
    common.add_argument("--max-terms", type=int, default=4000)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--json-out", metavar="PATH")
    common.add_argument("--format", choices=("json", "human"), default="json")
    p = argparse.ArgumentParser(prog="qwz", description="q-WZ certificates for basic hypergeometric identities")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "companion":
            sp.add_argument("--k", type=int, action="append", help="k values (repeatable; default 0,1,3)")
        if name == "anbn":
            sp.add_argument("--N", type=int, default=60)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    recipe = tuple(s.strip() for s in ns.recipe.split(",") if s.strip()) if ns.recipe else None
    return RunConfig(command=ns.command, identity=ns.identity, term=ns.term,
                     closed_form=ns.closed_form, recipe=recipe, params=dict(ns.param), q=ns.q,
                     precision=ns.prec, epsilon=ns.eps, max_terms=ns.max_terms, seed=ns.seed,
                     json_out=ns.json_out, fmt=ns.format,
                     ks=tuple(getattr(ns, "k", None) or (0, 1, 3)), N=getattr(ns, "N", 60))


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        code, out, human = COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"qwz: error: {exc}", file=stderr)
        return EXIT_INPUT
    text = json.dumps(out, indent=2)
    if cfg.json_out:
        with open(cfg.json_out, "w") as fh:
            fh.write(text + "\n")
    print(human if cfg.fmt == "human" else text, file=stdout)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
