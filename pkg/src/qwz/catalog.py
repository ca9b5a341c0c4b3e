"""Registry of identities shipped in ``data/identities.json``.

The data file is versioned (``format_version``) and written in the term grammar.
A side of an identity is a sum of products, each product being an index-free
coefficient term times a list of series.  In a series term, ``@D`` refers to
the entry's telescoping summand.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Mapping, Optional

import mpmath

from .engine import FunctionalRecurrence, SubstitutionRecipe
from .exactnum import RatFunc
from .grammar import parse_mono, parse_ratfunc, parse_term
from .numeric import TruncationPolicy, eval_term, reflect_sum, sum_series
from .terms import QHyperTerm, reflect_k

FORMAT_VERSION = 1


class UnknownIdentity(KeyError):
    pass


class ConstraintError(ValueError):
    pass


# ---------------------------------------------------------------------------
# constraints
# ---------------------------------------------------------------------------

_ABS = re.compile(r"^\s*abs\((.*)\)\s*$")


@dataclass(frozen=True)
class Constraint:
    """``|lhs| < |rhs|``; a bare rational on either side is taken literally."""

    text: str
    lhs: RatFunc
    rhs: RatFunc

    @classmethod
    def parse(cls, text: str) -> "Constraint":
        parts = text.split("<")
        if len(parts) != 2:
            raise ConstraintError(f"constraint must have the form abs(E) < abs(E): {text!r}")
        sides = []
        for p in parts:
            m = _ABS.match(p)
            sides.append(parse_ratfunc(m.group(1) if m else p))
        return cls(text, sides[0], sides[1])

    def variables(self) -> set[str]:
        return self.lhs.variables() | self.rhs.variables()

    def holds(self, point: Mapping[str, Fraction]) -> bool:
        pt = {k: Fraction(v) for k, v in point.items()}
        try:
            return abs(Fraction(self.lhs.evaluate(pt))) < abs(Fraction(self.rhs.evaluate(pt)))
        except ZeroDivisionError:
            return False

    def substitute(self, letter: str, value: RatFunc) -> "Constraint":
        l, r = self.lhs.subs(letter, value), self.rhs.subs(letter, value)
        if l.is_const() and r.is_const() and not abs(l.const_value()) < abs(r.const_value()):
            raise ConstraintError(f"pinning {letter} makes {self.text!r} unsatisfiable")
        return Constraint(f"abs({l}) < abs({r})", l, r)


# ---------------------------------------------------------------------------
# sides
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Series:
    term: QHyperTerm
    index: str = "k"
    support: str = "unilateral"
    start: int = 0
    negative: Optional[QHyperTerm] = None   # m -> term(-m), filled in for bilateral k series


def _series(term, index="k", support="unilateral", start=0) -> Series:
    neg = reflect_k(term) if support == "bilateral" and index == "k" else None
    return Series(term, index, support, start, neg)


@dataclass(frozen=True)
class Product:
    coef: QHyperTerm
    series: tuple = ()


def side_value(side, assignment, policy: TruncationPolicy):
    """Numeric value of a sum of products of series."""
    total = mpmath.mpf(0)
    with policy.workdps():
        for prod in side:
            v = eval_term(prod.coef, assignment, 0, 0, policy)
            for s in prod.series:
                if s.support == "bilateral" and s.index == "k":
                    v *= reflect_sum(s.term, assignment, policy, negative=s.negative)
                else:
                    v *= sum_series(s.term, fixed=0, support=s.support, assignment=assignment,
                                    policy=policy, index=s.index, start=s.start).value
            total += v
        return +total


def _map_side(side, fn):
    return tuple(Product(fn(p.coef), tuple(_series(fn(s.term), s.index, s.support, s.start)
                                           for s in p.series)) for p in side)


# ---------------------------------------------------------------------------
# entries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityEntry:
    id: str
    title: str
    kind: str                               # "wz" | "telescope" | "numeric"
    params: tuple
    constraints: tuple = ()
    summand: Optional[QHyperTerm] = None
    support: str = "unilateral"
    closed_form: Optional[QHyperTerm] = None  # None means the right side is zero
    recipe: Optional[SubstitutionRecipe] = None
    degeneration: Optional[dict] = None
    reference_F: Optional[QHyperTerm] = None
    reference_G: Optional[QHyperTerm] = None
    reference_z: Optional[QHyperTerm] = None
    D: Optional[QHyperTerm] = None
    recurrence: Optional[FunctionalRecurrence] = None
    lhs: tuple = ()
    rhs: tuple = ()
    sample: dict = field(default_factory=dict)
    specialization_of: Optional[dict] = None
    notes: str = ""
    summand_negative: Optional[QHyperTerm] = None  # m -> summand(-m), bilateral entries only

    @property
    def bilateral(self) -> bool:
        return self.support == "bilateral"


    def sample_point(self, overrides: Optional[Mapping[str, Fraction]] = None) -> dict:
        pt = dict(self.sample)
        pt.update(overrides or {})
        return pt

    def check_constraints(self, point: Mapping[str, Fraction]) -> list[str]:
        """Texts of the constraints violated at ``point``."""
        return [c.text for c in self.constraints if not c.holds(point)]

    def sides(self):
        """(lhs, rhs) as sums of products; WZ entries derive them from summand/closed form."""
        if self.kind == "wz":
            lhs = (Product(QHyperTerm(), (Series(self.summand, "k", self.support, 0,
                                                 self.summand_negative),)),)
            rhs = (Product(self.closed_form if self.closed_form is not None
                           else QHyperTerm.build(RatFunc(0)), ()),)
            return lhs, rhs
        return self.lhs, self.rhs


def _term(text):
    return parse_term(text) if text else None


def _side(products, D):
    out = []
    for prod in products:
        series = []
        for s in prod.get("series", []):
            t = D if s["term"] == "@D" else parse_term(s["term"])
            series.append(_series(t, s.get("index", "k"), s.get("support", "unilateral"), s.get("start", 0)))
        out.append(Product(parse_term(prod.get("coef", "1")), tuple(series)))
    return tuple(out)


def entry_from_dict(d: Mapping) -> IdentityEntry:
    D = _term(d.get("D"))
    rec = None
    if "recurrence" in d:
        r = d["recurrence"]
        rec = FunctionalRecurrence(tuple(parse_ratfunc(c) for c in r["coeffs"]),
                                   parse_ratfunc(r.get("rhs", "0")), r.get("letter", "a"))
    cf = d.get("closed_form")
    summand = _term(d.get("summand"))
    support = d.get("support", "unilateral")
    entry = IdentityEntry(
        id=d["id"], title=d.get("title", d["id"]), kind=d["kind"], params=tuple(d["params"]),
        constraints=tuple(Constraint.parse(c) for c in d.get("constraints", [])),
        summand=summand, support=support,
        summand_negative=reflect_k(summand) if summand is not None and support == "bilateral" else None,
        closed_form=None if cf in (None, "0") else parse_term(cf),
        recipe=SubstitutionRecipe(tuple(d["recipe"])) if d.get("recipe") else None,
        degeneration=d.get("degeneration"),
        reference_F=_term(d.get("reference_F")), reference_G=_term(d.get("reference_G")),
        reference_z=_term(d.get("reference_z")), D=D, recurrence=rec,
        lhs=_side(d.get("lhs", []), D), rhs=_side(d.get("rhs", []), D),
        sample={k: Fraction(v) for k, v in d.get("sample", {}).items()},
        specialization_of=d.get("specialization_of"), notes=d.get("notes", ""))
    for c in entry.constraints:
        extra = c.variables() - set(entry.params) - {"q"}
        if extra:
            raise ConstraintError(f"{entry.id}: constraint {c.text!r} uses undeclared {sorted(extra)}")
    return entry


@lru_cache(maxsize=None)
def _load() -> dict:
    text = resources.files("qwz").joinpath("data/identities.json").read_text()
    data = json.loads(text)
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported catalog format {data.get('format_version')}")
    return {d["id"]: entry_from_dict(d) for d in data["entries"]}


def get(identity_id: str) -> IdentityEntry:
    try:
        return _load()[identity_id]
    except KeyError:
        raise UnknownIdentity(f"unknown identity {identity_id!r}; known: {', '.join(list_ids())}") from None


def list_ids() -> list[str]:
    return list(_load())


def specialize(entry: IdentityEntry, pinning: Mapping[str, str],
               rename: tuple = ()) -> IdentityEntry:
    """Substitute letters by monomials (``{"b": "q/a"}``), then apply ``rename`` pairs in order."""
    steps = [(l, parse_mono(v)) for l, v in pinning.items()]
    steps += [(old, parse_mono(new)) for old, new in rename]
    if not steps:
        return entry

    def fn(t):
        if t is None:
            return None
        for l, (m, qp) in steps:
            t = t.substitute(l, m, qp)
        return t

    cons = []
    for c in entry.constraints:
        for l, (m, qp) in steps:
            c = c.substitute(l, m.ratfunc(qp))
        cons.append(c)
    params = set(entry.params)
    for l, (m, _) in steps:
        params.discard(l)
        params |= set(m.as_dict())
    return replace(entry, id=f"{entry.id}[{','.join(f'{l}={v}' for l, v in pinning.items())}]",
                   params=tuple(sorted(params)), constraints=tuple(cons), summand=fn(entry.summand),
                   closed_form=fn(entry.closed_form), D=fn(entry.D),
                   summand_negative=fn(entry.summand_negative), lhs=_map_side(entry.lhs, fn),
                   rhs=_map_side(entry.rhs, fn), reference_F=None, reference_G=None, reference_z=None,
                   specialization_of={"entry": entry.id, "pins": dict(pinning)})


def verify_numeric(entry: IdentityEntry, point: Mapping[str, Fraction],
                   policy: TruncationPolicy = TruncationPolicy()) -> tuple:
    """(lhs, rhs, ok) at ``point`` with relative tolerance 10 epsilon."""
    lhs, rhs = entry.sides()
    lv = side_value(lhs, point, policy)
    rv = side_value(rhs, point, policy)
    with policy.workdps():
        ok = abs(lv - rv) < 10 * policy.eps * max(1, abs(rv))
    return lv, rv, bool(ok)
