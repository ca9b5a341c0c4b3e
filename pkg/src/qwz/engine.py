"""WZ pipeline for nonterminating and bilateral sums, plus the telescoping verifier.

Pair discovery works entirely with shift quotients: with ``rho_k = F(n,k+1)/F(n,k)``
and ``rho_n = F(n+1,k)/F(n,k)`` the difference ``D(k) = F(n+1,k) - F(n,k)`` equals
``F (rho_n - 1)``, so its k-ratio is rational even when F carries infinite
products.  A Gosper certificate ``y`` for that ratio gives ``G = y (rho_n - 1) F``.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

import mpmath

from .exactnum import MultiPoly, RatFunc
from .gosper import antidifference, qgosper_solve
from .grammar import print_term, ratfunc_text
from .numeric import (NonConvergence, PoleError, TruncationPolicy, eval_term, eval_term_exact,
                      mp, sum_series, term_value)
from .terms import (LinForm, Mono, NotRational, PochFactor, QHyperTerm, QuadForm, quotient,
                    shift_ratio_k, shift_ratio_n)


class ZeroDifference(ValueError):
    """``F(n+1,k) - F(n,k)`` vanishes identically: F is already n-independent."""


class EngineError(ValueError):
    pass


class Status(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    UNDECIDED = "UNDECIDED"
    SKIPPED = "SKIPPED"
    NOT_APPLICABLE = "NOT_APPLICABLE"


def dec(v, digits: int = 25) -> str:
    """Decimal string for JSON output."""
    with mpmath.workdps(digits + 10):
        if isinstance(v, Fraction):
            if v.denominator == 1:
                return str(v.numerator)
            v = mp(v)
        return mpmath.nstr(mpmath.mpf(v) if not isinstance(v, mpmath.mpc) else v, digits)


# ---------------------------------------------------------------------------
# substitution and F
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubstitutionRecipe:
    params_shifted: tuple[str, ...]

    def __post_init__(self):
        if not self.params_shifted:
            raise EngineError("a substitution recipe needs at least one parameter")
        object.__setattr__(self, "params_shifted", tuple(self.params_shifted))

    def validate(self, letters: set[str]):
        missing = [p for p in self.params_shifted if p not in letters]
        if missing:
            raise EngineError(f"recipe references absent parameter(s): {', '.join(missing)}")

    def apply(self, t: QHyperTerm) -> QHyperTerm:
        for p in self.params_shifted:
            t = t.dilate(p, LinForm(0, 1, 0))
        return t


def build_F_terms(summand: QHyperTerm, closed_form: Optional[QHyperTerm],
                  recipe: SubstitutionRecipe) -> QHyperTerm:
    """F(n,k) = S_k(shifted) / R(shifted), or the bare shifted summand when R is zero."""
    letters = summand.letters() | (closed_form.letters() if closed_form is not None else set())
    recipe.validate(letters)
    s = recipe.apply(summand)
    if closed_form is None:
        return s
    return s / recipe.apply(closed_form)


def build_F(entry, recipe: Optional[SubstitutionRecipe] = None) -> QHyperTerm:
    recipe = recipe or entry.recipe
    return build_F_terms(entry.summand, entry.closed_form, recipe)


# ---------------------------------------------------------------------------
# pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WZPair:
    F: QHyperTerm
    cert: RatFunc

    @property
    def G(self) -> QHyperTerm:
        return self.F.with_prefactor(self.cert)

    def residual(self) -> RatFunc:
        """``rho_n - 1 - cert(qx) rho_k + cert``; zero exactly for a WZ pair."""
        rk, rn = shift_ratio_k(self.F), shift_ratio_n(self.F)
        return rn - 1 - self.cert.q_scale("x", 1) * rk + self.cert

    def check(self) -> bool:
        return self.residual().is_zero()


def difference_ratio(F: QHyperTerm) -> RatFunc:
    """k-shift ratio of ``F(n+1,k) - F(n,k)``."""
    rn = shift_ratio_n(F)
    d = rn - 1
    if d.is_zero():
        raise ZeroDifference("F(n+1,k) - F(n,k) is identically zero")
    return shift_ratio_k(F) * d.q_scale("x", 1) / d


def wz_discover(F: QHyperTerm) -> Optional[WZPair]:
    """Find the companion G of F by q-Gosper on the n-difference, or None."""
    r = difference_ratio(F)
    sol = qgosper_solve(r, "x")
    if sol is None:
        return None
    cert = sol.y_rat * (shift_ratio_n(F) - 1)
    pair = WZPair(F, cert)
    if not pair.check():
        raise AssertionError("discovered pair fails the exact pair identity")
    return pair


def compare_reference(pair: WZPair, G_ref: QHyperTerm) -> dict:
    """Soft check of a printed G against the certified one."""
    try:
        ratio = quotient(G_ref, pair.G)
    except NotRational as exc:
        return {"match": False, "reason": f"not a rational multiple: {exc}"}
    if ratio == RatFunc(1):
        return {"match": True}
    return {"match": False, "reason": "ratio printed/certified = " + ratfunc_text(ratio)}


# ---------------------------------------------------------------------------
# limits in n
# ---------------------------------------------------------------------------

def n_limit(t: QHyperTerm) -> Optional[QHyperTerm]:
    """Symbolic ``lim_{n -> oo} t`` for |q| < 1 when it is structurally evident, else None.

    Arguments carrying ``q^(beta n)`` with beta > 0 tend to 0; finite factors whose
    length grows with n become infinite products.
    """
    zero = False
    pre = t.prefactor
    on, od = pre.num.order("y"), pre.den.order("y")
    num = pre.num.divide_var_power("y", on) if on else pre.num
    den = pre.den.divide_var_power("y", od) if od else pre.den
    pre = RatFunc(num, 1).subs("y", RatFunc(0)) / RatFunc(den, 1).subs("y", RatFunc(0))
    # y^(on-od) from the prefactor joins the q^(n * lin.n) of the exponent
    ylead = on - od
    powers = []
    for atom, ex in t.powers:
        if ex.n == 0:
            powers.append((atom, ex))
        elif not isinstance(atom, str) and (abs(atom) < 1) == (ex.n > 0):
            zero = True
        else:
            return None
    if t.sign.n:
        if not zero:
            return None
    qx = t.qexp
    if qx.kn:
        return None
    growth = qx.lin.n + ylead
    if qx.nn > 0 or (qx.nn == 0 and growth > 0):
        zero = True
    elif qx.nn < 0 or growth < 0:
        return None
    facs = []
    for f in t.factors:
        beta = f.qpow.n
        alpha = None if f.length is None else f.length.n
        if beta > 0:
            if alpha is not None and alpha < 0:
                return None
            continue
        if beta < 0:
            return None
        qp = LinForm(f.qpow.k, 0, f.qpow.c)
        if alpha is None:
            facs.append(PochFactor(f.coeff, qp, None, f.exponent))
        elif alpha > 0:
            if f.length.k:
                return None
            facs.append(PochFactor(f.coeff, qp, None, f.exponent))
        elif alpha == 0:
            facs.append(PochFactor(f.coeff, qp, f.length, f.exponent))
        else:
            return None
    if zero:
        return QHyperTerm.build(RatFunc(0))
    return QHyperTerm.build(pre, tuple(powers), QuadForm(qx.kk, 0, 0, LinForm(qx.lin.k, 0, 0)),
                            LinForm(t.sign.k, 0, 0), tuple(facs))


# ---------------------------------------------------------------------------
# conditions
# ---------------------------------------------------------------------------

@dataclass
class ConditionResult:
    status: Status
    evidence: dict = field(default_factory=dict)

    def to_json(self):
        return {"status": self.status.value, "evidence": self.evidence}


@dataclass
class ConditionReport:
    c1: ConditionResult
    c2: ConditionResult
    c3: ConditionResult
    grid: dict

    def statuses(self):
        return {"C1": self.c1.status, "C2": self.c2.status, "C3": self.c3.status}

    def to_json(self):
        return {"C1": self.c1.to_json(), "C2": self.c2.to_json(), "C3": self.c3.to_json(),
                "grid": self.grid}


def _safe_abs(t, assignment, k, n, policy):
    try:
        return abs(term_value(t, assignment, k, n, policy).result())
    except PoleError:
        return None


def _decay(values_at: Callable[[int], object], policy: TruncationPolicy, cap: int,
           batch: int = 6) -> tuple[Status, dict]:
    """Watch ``|v(j)|`` for j = 0, 1, ... until ``batch`` values in a row are below epsilon."""
    eps = policy.eps
    run = 0
    mags = []
    for j in range(cap):
        v = values_at(j)
        if v is None:
            return Status.FAIL, {"pole_at": j}
        mags.append(v)
        if v < eps:
            run += 1
            if run >= batch:
                return Status.PASS, {"steps": j + 1, "last": [dec(m, 6) for m in mags[-3:]]}
        else:
            run = 0
        if v > 1 / eps:
            return Status.FAIL, {"steps": j + 1, "diverged_to": dec(v, 6)}
    tail = mags[-10:]
    growing = all(b >= a for a, b in zip(tail, tail[1:])) and tail[-1] > tail[0]
    ev = {"steps": cap, "last": [dec(m, 6) for m in tail[-3:]]}
    return (Status.FAIL if growing else Status.UNDECIDED), ev


def check_c1(pair: WZPair, assignment, policy: TruncationPolicy, bilateral: bool,
             n_grid=(0, 1, 2), cap: Optional[int] = None) -> ConditionResult:
    cap = cap or min(policy.max_terms, 1500)
    G = pair.G
    evidence = {}
    worst = Status.PASS
    order = [Status.PASS, Status.UNDECIDED, Status.FAIL]
    with policy.workdps():
        for n in n_grid:
            for direction in (1, -1):
                st, ev = _decay(lambda j: _safe_abs(G, assignment, direction * j, n, policy), policy, cap)
                key = f"n={n},k->{'+' if direction > 0 else '-'}inf"
                evidence[key] = dict(ev, status=st.value)
                if order.index(st) > order.index(worst):
                    worst = st
    evidence["bilateral"] = bilateral
    return ConditionResult(worst, evidence)


def check_c2(pair: WZPair, assignment, policy: TruncationPolicy, ks=(0, 1, 2), cap: int = 400,
             batch: int = 5) -> tuple[ConditionResult, dict]:
    """Numeric ``f_k = lim_n F(n,k)`` by successive-difference stagnation."""
    F = pair.F
    eps = policy.eps
    limits = {}
    evidence = {}
    status = Status.PASS
    sym = n_limit(F)
    with policy.workdps():
        for k in ks:
            prev = None
            run = 0
            st = Status.UNDECIDED
            ev = {}
            for n in range(cap):
                try:
                    v = term_value(F, assignment, k, n, policy).result()
                except PoleError:
                    st, ev = Status.FAIL, {"pole_at_n": n}
                    break
                if abs(v) > 1 / eps:
                    st, ev = Status.FAIL, {"diverged_at_n": n, "magnitude": dec(abs(v), 6)}
                    break
                if prev is not None and abs(v - prev) < eps * max(1, abs(v)):
                    run += 1
                    if run >= batch:
                        st, ev = Status.PASS, {"n_used": n, "f_k": dec(v)}
                        limits[k] = v
                        break
                else:
                    run = 0
                prev = v
            else:
                ev = {"n_used": cap, "last": dec(prev, 8)}
            if st is Status.PASS and sym is not None:
                sv = eval_term(sym, assignment, k, 0, policy)
                ev["symbolic_f_k"] = dec(sv)
                if abs(sv - limits[k]) > 10 * eps * max(1, abs(sv)):
                    st = Status.FAIL
                    ev["mismatch"] = True
            evidence[f"k={k}"] = dict(ev, status=st.value)
            if st is Status.FAIL or (st is Status.UNDECIDED and status is Status.PASS):
                status = st if status is not Status.FAIL else status
    if sym is not None:
        evidence["f_k_term"] = print_term(sym)
    return ConditionResult(status, evidence), limits


def check_c3(pair: WZPair, assignment, policy: TruncationPolicy, cap_L: int = 40,
             batch: int = 4) -> ConditionResult:
    """``sum_{n>=0} G(n,-L) -> 0`` as L grows."""
    G = pair.G
    eps = policy.eps
    run = 0
    vals = []
    with policy.workdps():
        for L in range(1, cap_L + 1):
            # divergent inner sums are a FAIL, not a truncation problem
            for n in range(0, 60, 6):
                m = _safe_abs(G, assignment, -L, n, policy)
                if m is None or m > 1 / eps:
                    return ConditionResult(Status.FAIL, {"L": L, "inner_sum": "diverges",
                                                         "at_n": n})
            try:
                s = sum_series(G, fixed=-L, assignment=assignment, policy=policy, index="n").value
            except NonConvergence:
                return ConditionResult(Status.UNDECIDED, {"L": L, "inner_sum": "not converged"})
            except PoleError as exc:
                return ConditionResult(Status.FAIL, {"L": L, "pole": str(exc)})
            vals.append(abs(s))
            if abs(s) < eps:
                run += 1
                if run >= batch:
                    return ConditionResult(Status.PASS, {"L_used": L,
                                                         "last": [dec(v, 6) for v in vals[-3:]]})
            else:
                run = 0
    ev = {"L_used": cap_L, "last": [dec(v, 6) for v in vals[-3:]]}
    tail = vals[-batch:]
    # settled on a nonzero value: the limit exists but is not 0
    if len(tail) == batch and min(tail) > eps ** mpmath.mpf(0.5) and \
            max(tail) - min(tail) < eps ** mpmath.mpf(0.5) * max(tail):
        ev["stagnates_at"] = dec(tail[-1], 12)
        return ConditionResult(Status.FAIL, ev)
    return ConditionResult(Status.UNDECIDED, ev)


def check_conditions(pair: WZPair, assignment, policy: TruncationPolicy = TruncationPolicy(),
                     bilateral: bool = False, n_grid=(0, 1, 2)) -> tuple[ConditionReport, dict]:
    c1 = check_c1(pair, assignment, policy, bilateral, n_grid)
    ks = (0, 1, 2, -1, -2) if bilateral else (0, 1, 2)
    c2, limits = check_c2(pair, assignment, policy, ks)
    c3 = check_c3(pair, assignment, policy)
    grid = {"n": list(n_grid), "k": list(ks),
            "point": {k: str(v) for k, v in sorted(assignment.items())}}
    return ConditionReport(c1, c2, c3, grid), limits


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

@dataclass
class ConstantResult:
    value: Optional[Fraction]
    method: str
    n_independence: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {"value": None if self.value is None else dec(self.value), "method": self.method}


def _at_k0(t: QHyperTerm) -> QHyperTerm:
    return t.swap_indices().at_n(0)


def collapse_value(F0: QHyperTerm, pins: Mapping[str, Fraction]) -> Fraction:
    """Exact ``sum_k F0(k)`` when pinning parameters to zero kills every k >= 1 term.

    ``F0`` is free of n.  A pinned-to-zero letter raised to a power growing with k kills
    the terms with k >= 1; the k = 0 term is then reduced with all zero-argument
    factors set to 1 and the remaining infinite factors cancelled pairwise.
    """
    zero_letters = {l for l, v in pins.items() if v == 0}
    killing = any(isinstance(a, str) and a in zero_letters and ex.k > 0 and ex(1, 0) > 0
                  for a, ex in F0.powers)
    if not killing:
        raise EngineError("degeneration does not collapse the sum to its k = 0 term")
    for f in F0.factors:
        for l in zero_letters:
            if f.coeff.degree(l) < 0:
                raise PoleError(f"degeneration hits a pole in factor ({f.coeff};q)")
    for l in zero_letters:
        if RatFunc(F0.prefactor.den, 1).subs(l, RatFunc(0)).is_zero():
            raise PoleError(f"degeneration {l}=0 hits a pole in the rational prefactor")
    t0 = _at_k0(F0)
    pre = t0.prefactor
    for l, v in pins.items():
        pre = pre.subs(l, RatFunc(v))
    powers = []
    for atom, ex in t0.powers:
        if isinstance(atom, str) and atom in pins:
            e = ex(0, 0)
            if pins[atom] == 0 and e:
                return Fraction(0) if e > 0 else _raise_pole(atom)
            pre = pre * RatFunc(Fraction(pins[atom]) ** e)
        else:
            powers.append((atom, ex))
    facs = []
    for f in t0.factors:
        if any(f.coeff.degree(l) > 0 for l in zero_letters):
            continue   # (0;q)_L = 1
        facs.append(f)
    rest = QHyperTerm.build(pre, tuple(powers), t0.qexp, t0.sign, tuple(facs))
    for l, v in pins.items():
        if v != 0:
            rest = rest.substitute(l, Mono.make(v))
    r = quotient(rest, QHyperTerm())
    if not r.is_const():
        raise EngineError("degenerate sum is not a constant: " + ratfunc_text(r))
    return r.const_value()


def _raise_pole(atom):
    raise PoleError(f"{atom} = 0 raised to a negative power")


def n_independence(F: QHyperTerm, assignment, policy: TruncationPolicy, bilateral: bool,
                   ns=(0, 1, 2, 3)) -> list:
    out = []
    for n in ns:
        s = sum_series(F, fixed=n, support="bilateral" if bilateral else "unilateral",
                       assignment=assignment, policy=policy).value
        out.append(s)
    return out


def _kills_negative_k(t: QHyperTerm) -> bool:
    """True when ``t`` carries ``1/(q;q)_k`` (so every k < 0 term is zero)."""
    return any(f.coeff == Mono.make(1) and f.qpow == LinForm(0, 0, 1) and f.length == LinForm(1, 0, 0)
               and f.exponent < 0 for f in t.factors)


def _pins_of(pins: Mapping[str, str]):
    from .grammar import parse_mono
    return [(l, parse_mono(v)) for l, v in pins.items()]


def determine_constant(pair: WZPair, entry, policy: TruncationPolicy = TruncationPolicy(),
                       assignment: Optional[Mapping[str, object]] = None,
                       lookup: Optional[Callable] = None, ns=(0, 1, 2, 3)) -> ConstantResult:
    """The n-independent value of ``sum_k F(n,k)`` from the entry's degeneration.

    ``collapse`` pins letters (typically to 0) so that only the k = 0 term of
    ``sum_k F(0,k)`` survives.  ``reduction`` pins and renames letters so that
    ``F(0,k)`` becomes the ``F(0,k)`` of another catalog entry, exactly, and
    takes that entry's constant.  With an ``assignment`` the value is compared
    with ``sum_k F(n,k)`` for the given n.
    """
    deg = entry.degeneration or {}
    method = deg.get("method")
    F0 = pair.F.at_n(0)
    details: dict = {}
    if method == "collapse":
        pins = {l: Fraction(v) for l, v in deg["pins"].items()}
        value = collapse_value(F0, pins)
        details["pins"] = dict(deg["pins"])
    elif method == "reduction":
        if lookup is None:
            from .catalog import get as lookup
        target = lookup(deg["target"])
        t = F0
        for l, (m, qp) in _pins_of(deg.get("pins", {})) + \
                [(old, mq) for old, mq in ((o, _pins_of({o: n})[0][1]) for o, n in deg.get("rename", []))]:
            t = t.substitute(l, m, qp)
        T0 = build_F(target).at_n(0)
        try:
            ratio = quotient(t, T0)
        except NotRational as exc:
            raise EngineError(f"reduction to {target.id} failed: {exc}") from None
        if ratio != RatFunc(1):
            raise EngineError(f"reduction to {target.id} leaves the factor {ratfunc_text(ratio)}")
        if entry.bilateral and not target.bilateral and not _kills_negative_k(t):
            raise EngineError("reduced bilateral sum keeps terms at k < 0")
        inner = determine_constant(wz_discover(build_F(target)), target, policy, None, lookup)
        value = inner.value
        details = {"target": target.id, "pins": dict(deg.get("pins", {})),
                   "rename": [list(r) for r in deg.get("rename", [])], "target_method": inner.method}
    else:
        raise EngineError(f"{entry.id}: no degeneration recipe")
    res = ConstantResult(value, method, [], details)
    if assignment is not None:
        vals = n_independence(pair.F, assignment, policy, entry.bilateral, ns)
        res.n_independence = vals
        res.details["n_independent"] = all(
            abs(v - mp(value)) < 10 * policy.eps * max(1, abs(mp(value))) for v in vals)
    return res


# ---------------------------------------------------------------------------
# companion identity
# ---------------------------------------------------------------------------

@dataclass
class CompanionResult:
    status: Status
    statement: Optional[str] = None
    residuals: list = field(default_factory=list)
    reason: str = ""

    def to_json(self):
        if self.status is Status.NOT_APPLICABLE:
            return None
        return {"statement": self.statement,
                "residual": {str(k): dec(r, 6) for k, r in self.residuals}}


def companion(pair: WZPair, conditions: ConditionReport, assignment, policy: TruncationPolicy,
              ks: Sequence[int] = (0, 1, 3), bilateral: bool = False) -> CompanionResult:
    """``sum_{n>=0} G(n,k) = sum_{j<=k-1} (f_j - F(0,j))`` checked numerically."""
    if bilateral:
        return CompanionResult(Status.NOT_APPLICABLE,
                               reason="companion identity needs unilateral support in k")
    if conditions.c2.status is not Status.PASS or conditions.c3.status is not Status.PASS:
        why = ", ".join(f"{c}={s.value}" for c, s in conditions.statuses().items() if c != "C1")
        return CompanionResult(Status.NOT_APPLICABLE, reason=f"companion conditions do not hold ({why})")
    f = n_limit(pair.F)
    if f is None:
        return CompanionResult(Status.NOT_APPLICABLE, reason="no closed form for f_k")
    F0 = pair.F.at_n(0)
    statement = (f"sum_{{n>=0}} {print_term(pair.G)} = sum_{{j=0}}^{{k-1}} "
                 f"(({print_term(f)})|k=j - ({print_term(F0)})|k=j)")
    res = []
    eps = policy.eps
    ok = True
    with policy.workdps():
        for k in ks:
            lhs = sum_series(pair.G, fixed=k, assignment=assignment, policy=policy, index="n").value
            rhs = mpmath.mpf(0)
            for j in range(0, k):
                rhs += eval_term(f, assignment, j, 0, policy) - eval_term(F0, assignment, j, 0, policy)
            r = abs(lhs - rhs)
            res.append((k, r))
            if r >= 10 * eps * max(1, abs(rhs)):
                ok = False
    return CompanionResult(Status.PASS if ok else Status.FAIL, statement, res)


# ---------------------------------------------------------------------------
# proof objects
# ---------------------------------------------------------------------------

@dataclass
class ProofObject:
    identity_id: str
    recipe: Optional[SubstitutionRecipe]
    pair: Optional[WZPair]
    exact_check: bool
    conditions: Optional[ConditionReport]
    constant: Optional[ConstantResult]
    companion: Optional[CompanionResult]
    seed: int = 0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        cert = self.pair.cert if self.pair else None
        return {
            "identity_id": self.identity_id,
            "recipe": list(self.recipe.params_shifted) if self.recipe else None,
            "F": print_term(self.pair.F) if self.pair else None,
            "cert": None if cert is None else {"num": str(cert.num), "den": str(cert.den)},
            "exact_check": self.exact_check,
            "conditions": self.conditions.to_json() if self.conditions else None,
            "constant": self.constant.to_json() if self.constant else None,
            "companion": self.companion.to_json() if self.companion else None,
            "seed": self.seed,
            **({"extras": self.extras} if self.extras else {}),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def cert_from_json(d: Mapping[str, str]) -> RatFunc:
    from .grammar import parse_ratfunc
    return parse_ratfunc(f"({d['num']})/({d['den']})")


# ---------------------------------------------------------------------------
# §2-style telescoping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionalRecurrence:
    """``sum_i coeffs[i](a) f(a q^i) = rhs(a)``."""

    coeffs: tuple
    rhs: RatFunc = RatFunc(0)
    letter: str = "a"

    def __post_init__(self):
        if len(self.coeffs) < 2:
            raise EngineError("a functional recurrence needs at least two coefficients")
        object.__setattr__(self, "coeffs", tuple(RatFunc.lift(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", RatFunc.lift(self.rhs))

    def alphas(self) -> list[RatFunc]:
        """``H(a) = sum_{i>=1} alpha_i(a) H(a q^i)`` for the homogeneous part."""
        c0 = self.coeffs[0]
        return [-c / c0 for c in self.coeffs[1:]]


def dilate_ratfunc(r: RatFunc, letter: str, i: int) -> RatFunc:
    return r.subs(letter, RatFunc.var(letter) * RatFunc.monomial({"q": i}))


@dataclass
class TelescopeRecord:
    T: Optional[QHyperTerm]
    z: Optional[QHyperTerm]
    cert: Optional[RatFunc]
    exact_check: bool
    z0_zero: bool
    limit_symbolic: Optional[RatFunc]
    limit_expected: RatFunc
    limit_numeric: Optional[object] = None
    limit_ok: Optional[bool] = None
    reference_match: Optional[dict] = None
    status: Status = Status.PASS
    diagnostics: str = ""

    def to_dict(self) -> dict:
        return {
            "T": print_term(self.T) if self.T is not None else None,
            "z": print_term(self.z) if self.z is not None else None,
            "cert": None if self.cert is None else {"num": str(self.cert.num), "den": str(self.cert.den)},
            "exact_check": self.exact_check,
            "z0_zero": self.z0_zero,
            "limit": {
                "expected": ratfunc_text(self.limit_expected),
                "symbolic": None if self.limit_symbolic is None else ratfunc_text(self.limit_symbolic),
                "numeric": None if self.limit_numeric is None else dec(self.limit_numeric),
                "ok": self.limit_ok,
            },
            "reference_match": self.reference_match,
            "status": self.status.value,
            "diagnostics": self.diagnostics,
        }


def telescope_combination(rec: FunctionalRecurrence, D: QHyperTerm) -> Optional[QHyperTerm]:
    """``T(n) = sum_i (c_i/c_0) D_n(a q^i)`` carried on D, or None when it vanishes."""
    c0 = rec.coeffs[0]
    s = RatFunc(0)
    for i, c in enumerate(rec.coeffs):
        s = s + (c / c0) * quotient(D.dilate(rec.letter, i), D)
    return None if s.is_zero() else D.with_prefactor(s)


def telescope_certify(rec: FunctionalRecurrence, D: Optional[QHyperTerm],
                      policy: TruncationPolicy = TruncationPolicy(),
                      assignment: Optional[Mapping[str, object]] = None,
                      z_reference: Optional[QHyperTerm] = None) -> TelescopeRecord:
    """Certify ``sum_n T(n) = rhs/c_0`` via ``T(n) = z_{n+1} - z_n``, ``z_0 = 0``."""
    expected = rec.rhs / rec.coeffs[0]
    T = telescope_combination(rec, D) if D is not None else None
    if T is None:
        ok = expected.is_zero()
        return TelescopeRecord(None, None, RatFunc(0), True, True, RatFunc(0), expected,
                               limit_ok=ok, status=Status.PASS if ok else Status.FAIL,
                               diagnostics="combination vanishes identically; z = 0")
    ad = antidifference(T, "n")
    if ad is None:
        return TelescopeRecord(T, None, None, False, False, None, expected, status=Status.FAIL,
                               diagnostics="q-Gosper found no rational certificate in n")
    z = ad.term
    # exact check: z(n+1)/T(n) - z(n)/T(n) = 1
    exact = (ad.cert.q_scale("y", 1) * shift_ratio_n(T) - ad.cert - 1).is_zero()
    z_at0 = z.at_n(0)
    z0_zero = z_at0.prefactor.is_zero() and all(
        f.length is None or f.length(0, 0) >= 0 for f in z_at0.factors)
    lim = n_limit(z)
    lim_sym = None
    if lim is not None:
        try:
            lim_sym = quotient(lim, QHyperTerm())
        except NotRational:
            lim_sym = None
    rec_out = TelescopeRecord(T, z, ad.cert, exact, z0_zero, lim_sym, expected)
    if z_reference is not None:
        try:
            ratio = quotient(z, z_reference)
            rec_out.reference_match = {"match": ratio == RatFunc(1),
                                       "ratio": ratfunc_text(ratio)}
        except NotRational as exc:
            rec_out.reference_match = {"match": False, "reason": str(exc)}
    sym_ok = lim_sym is not None and (lim_sym - expected).is_zero()
    if assignment:
        with policy.workdps():
            val = _numeric_limit(z, assignment, policy)
            rec_out.limit_numeric = val
            if val is not None:
                exp_v = mp(Fraction(expected.evaluate({k: Fraction(v) for k, v in assignment.items()})))
                rec_out.limit_ok = bool(abs(val - exp_v) < 10 * policy.eps * max(1, abs(exp_v)))
    else:
        rec_out.limit_ok = sym_ok
    good = exact and z0_zero and (rec_out.limit_ok if rec_out.limit_ok is not None else sym_ok)
    if lim_sym is not None and not sym_ok:
        good = False
    rec_out.status = Status.PASS if good else Status.FAIL
    return rec_out


def _numeric_limit(z: QHyperTerm, assignment, policy: TruncationPolicy, cap: int = 2000, batch: int = 5):
    eps = policy.eps
    prev = None
    run = 0
    for n in range(cap):
        v = term_value(z, assignment, 0, n, policy).result()
        if prev is not None and abs(v - prev) < eps * max(1, abs(v)) / 10:
            run += 1
            if run >= batch:
                return v
        else:
            run = 0
        prev = v
    return None


# ---------------------------------------------------------------------------
# A_n / B_n iteration
# ---------------------------------------------------------------------------

@dataclass
class AnBnReport:
    A: list
    B: list
    diffs: list
    limit_A: object
    limit_B: object
    tail_max_diff: object
    cauchy: bool

    def to_dict(self):
        return {"N": len(self.A) - 1, "A_N": dec(self.A[-1]), "B_N": dec(self.B[-1]),
                "limit_A": dec(self.limit_A), "limit_B": dec(self.limit_B),
                "tail_max_diff": dec(self.tail_max_diff, 6), "cauchy": self.cauchy,
                "A0": dec(self.A[0]), "B0": dec(self.B[0])}


def iterate_AnBn(rec: FunctionalRecurrence, N: int, assignment: Mapping[str, object],
                 threshold=Fraction(1, 10 ** 12), tail: int = 10) -> AnBnReport:
    """``H(a) = A_n H(a q^{n+1}) + B_n H(a q^{n+2})`` for a two-step recurrence, exactly."""
    al = rec.alphas()
    if len(al) != 2:
        raise EngineError("A_n/B_n iteration needs a recurrence of order two")
    pt = {k: Fraction(v) for k, v in assignment.items()}
    qv, av = pt["q"], pt[rec.letter]

    def alpha(i, m):
        return Fraction(al[i].evaluate(dict(pt, **{rec.letter: av * qv ** m})))

    A = [alpha(0, 0)]
    B = [alpha(1, 0)]
    for n in range(N):
        A.append(alpha(0, n + 1) * A[n] + B[n])
        B.append(alpha(1, n + 1) * A[n])
    diffs = [abs(A[i + 1] - A[i]) for i in range(N)]
    tail_vals = diffs[-tail:] if diffs else [Fraction(0)]
    tmax = max(tail_vals)
    return AnBnReport(A, B, diffs, A[-1], B[-1], tmax, bool(diffs) and diffs[-1] < threshold)


def sample_points(rng: random.Random, letters: Sequence[str], count: int,
                  accept: Callable[[dict], bool], q=Fraction(1, 2), tries: int = 2000) -> list[dict]:
    """Random rational points satisfying ``accept``."""
    out = []
    for _ in range(tries):
        pt = {l: Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9)) for l in letters}
        pt["q"] = q
        if accept(pt):
            out.append(pt)
            if len(out) == count:
                break
    return out
