"""High-precision evaluation of q-shifted factorials, terms and series.

Sample points are exact rationals, so every factor ``1 - v q^j`` is tested for
an exact zero before it enters floating point.  Zeros and poles are counted
rather than multiplied in: a term with more vanishing numerator factors than
denominator factors evaluates to 0 (e.g. ``1/(q;q)_k`` at negative ``k``), the
reverse raises :class:`PoleError`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

import mpmath

from .exactnum import RatFunc
from .terms import LinForm, QHyperTerm

DEFAULT_PRECISION = 40


class PoleError(ZeroDivisionError):
    """A denominator factor vanishes at the evaluation point."""


class NonConvergence(RuntimeError):
    """The tail bound was not met within ``max_terms``."""


class TailMode(enum.Enum):
    GEOMETRIC_BOUND = "geometric"
    TERM_SMALLNESS = "smallness"


@dataclass(frozen=True)
class TruncationPolicy:
    precision_digits: int = DEFAULT_PRECISION
    epsilon: Fraction = Fraction(1, 10 ** 30)
    max_terms: int = 4000
    tail_mode: TailMode = TailMode.GEOMETRIC_BOUND

    def __post_init__(self):
        if self.precision_digits <= 0 or self.max_terms <= 0:
            raise ValueError("precision and max_terms must be positive")
        eps = Fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if eps <= 0 or eps < Fraction(1, 10 ** (self.precision_digits - 1)):
            raise ValueError("epsilon must be at least 10^(1 - precision_digits)")

    @property
    def eps(self):
        return mpmath.mpf(self.epsilon.numerator) / self.epsilon.denominator

    def workdps(self):
        return mpmath.workdps(self.precision_digits + 10)


def mp(v):
    """Exact rational (or int/mpf) to an mpf at the current precision."""
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


class Value:
    """A number together with an order of vanishing (zeros minus poles)."""

    __slots__ = ("val", "order")

    def __init__(self, val, order: int = 0):
        self.val = val
        self.order = order

    def __mul__(self, o: "Value") -> "Value":
        return Value(self.val * o.val, self.order + o.order)

    def __truediv__(self, o: "Value") -> "Value":
        return Value(self.val / o.val, self.order - o.order)

    def __pow__(self, e: int) -> "Value":
        return Value(self.val ** e, self.order * e)

    def result(self):
        if self.order > 0:
            return mpmath.mpf(0)
        if self.order < 0:
            raise PoleError("pole of order %d" % -self.order)
        return self.val


def _one_minus(v: Fraction, qv: Fraction, j: int, vm, qm) -> Value:
    f = 1 - vm * qm ** j
    if abs(f) < mpmath.mpf(10) ** (-8) and v * qv ** j == 1:
        return Value(mpmath.mpf(1), 1)
    return Value(f)


_INF_CACHE: dict = {}


def _poch_value(v: Fraction, qv: Fraction, length: Optional[int], policy: TruncationPolicy,
                skip: frozenset = frozenset()) -> Value:
    """``(v; q)_length`` as a Value; factors at the indices in ``skip`` are left out."""
    vm, qm = mp(v), mp(qv)
    out = Value(mpmath.mpf(1))
    if length is None:
        if abs(qv) >= 1:
            raise ValueError("infinite product needs |q| < 1")
        if v == 0:
            return out
        key = (v, qv, skip, policy.epsilon, policy.max_terms, mpmath.mp.prec)
        hit = _INF_CACHE.get(key)
        if hit is not None:
            return Value(hit[0], hit[1])
        a, aq = abs(vm), abs(qm)
        eps = policy.eps
        j = 0
        while True:
            if j not in skip:
                out = out * _one_minus(v, qv, j, vm, qm)
            j += 1
            t = a * aq ** j
            # sum_{i>=j} t aq^i / (1 - t aq^i) <= t / ((1-aq)(1-t)) when t < 1
            if t < 1 and t / ((1 - aq) * (1 - t)) < eps:
                if len(_INF_CACHE) > 100000:
                    _INF_CACHE.clear()
                _INF_CACHE[key] = (out.val, out.order)
                return out
            if j > policy.max_terms:
                raise NonConvergence("infinite product did not converge")
    if length >= 0:
        for j in range(length):
            if j not in skip:
                out = out * _one_minus(v, qv, j, vm, qm)
        return out
    for j in range(1, -length + 1):
        if -j not in skip:
            out = out / _one_minus(v, qv, -j, vm, qm)
    return out


def _zero_positions(v: Fraction, qv: Fraction, length: Optional[int]) -> list[int]:
    """The indices j (negative for negative lengths) with ``v q^j == 1`` inside the product."""
    if v == 0 or abs(qv) in (0, 1):
        return []
    j = round(math.log(abs(1 / v)) / math.log(abs(qv)))
    if v * qv ** j != 1:
        return []
    if length is None:
        return [j] if j >= 0 else []
    if length >= 0:
        return [j] if 0 <= j < length else []
    return [j] if length <= j <= -1 else []


def eval_poch(arg, q_val, length: Optional[int], policy: TruncationPolicy = TruncationPolicy()):
    """``(arg; q)_length`` with ``length=None`` meaning infinity."""
    with policy.workdps():
        v = _poch_value(Fraction(arg), Fraction(q_val), length, policy)
        if v.order < 0:
            raise PoleError(f"({arg};q)_{length} has a vanishing denominator factor")
        return +v.result()


def _point(assignment: Mapping[str, object], q) -> dict:
    pt = {k: Fraction(v) for k, v in assignment.items()}
    pt["q"] = Fraction(q) if q is not None else pt["q"]
    return pt


def _ratfunc_value(r: RatFunc, pt: Mapping[str, Fraction]) -> Value:
    num = r.num.evaluate(pt)
    den = r.den.evaluate(pt)
    if num == 0:
        if den == 0:
            raise PoleError("indeterminate 0/0 in the rational prefactor")
        return Value(mpmath.mpf(0), 1)
    if den == 0:
        raise PoleError("rational prefactor has a pole")
    return Value(mp(Fraction(num) / Fraction(den)))


def _absorb_zeros(t: QHyperTerm, pt: Mapping[str, Fraction], k: int, n: int):
    """Move the exactly vanishing factorial factors into the rational prefactor.

    Used when the prefactor is singular at the point: a pole there is often
    cancelled by such a factor, e.g. ``(1 - a q^n)^-1 (a q^n; q)_k`` at ``a q^n = 1``.
    Returns the new prefactor and, per factor, the indices to leave out.
    """
    qv = pt["q"]
    pre = t.prefactor
    skips = []
    for f in t.factors:
        v = f.coeff.value(pt) * qv ** f.qpow(k, n)
        length = None if f.length is None else f.length(k, n)
        js = _zero_positions(v, qv, length)
        for j in js:
            lin = f.qpow + LinForm(0, 0, j)
            fac = 1 - f.coeff.ratfunc(lin)
            e = f.exponent if j >= 0 else -f.exponent
            pre = pre * fac ** e
        skips.append(frozenset(js))
    # x, y and q are fixed by (k, n); the letters stay symbolic so that
    # common factors cancel before evaluating (a limit in the parameters)
    pre = pre.subs_many({v: RatFunc.lift(Fraction(val)) for v, val in
                         (("x", qv ** k), ("y", qv ** n), ("q", qv))})
    return pre, skips


def _has_zero_and_pole(t: QHyperTerm, pt, k: int, n: int) -> bool:
    qv = pt["q"]
    up = down = False
    for f in t.factors:
        length = None if f.length is None else f.length(k, n)
        for j in _zero_positions(f.coeff.value(pt) * qv ** f.qpow(k, n), qv, length):
            if (f.exponent > 0) == (j >= 0):
                up = True
            else:
                down = True
    return up and down


def term_value(t: QHyperTerm, assignment: Mapping[str, object], k: int, n: int,
               policy: TruncationPolicy, q=None) -> Value:
    pt = _point(assignment, q)
    qv = pt["q"]
    x_pt = dict(pt)
    x_pt["x"] = qv ** k
    x_pt["y"] = qv ** n
    skips = None
    try:
        out = _ratfunc_value(t.prefactor, x_pt)
        mixed = _has_zero_and_pole(t, pt, k, n)
    except PoleError:
        mixed = True
    if mixed:
        # zeros meeting poles: take the limit in the letters instead of counting
        pre, skips = _absorb_zeros(t, pt, k, n)
        if pre.is_zero():
            return Value(mpmath.mpf(0), 1)
        out = _ratfunc_value(pre, x_pt)
    exact = Fraction(1)
    for atom, ex in t.powers:
        base = pt[atom] if isinstance(atom, str) else atom
        e = ex(k, n)
        if base == 0:
            if e > 0:
                return Value(mpmath.mpf(0), 1)
            if e < 0:
                raise PoleError(f"{atom} = 0 raised to {e}")
            continue
        out = out * Value(mp(base) ** e)
    qe = t.qexp(k, n)
    out = out * Value(mp(qv) ** qe)
    if t.sign(k, n) % 2:
        exact = -exact
    out = out * Value(mp(exact))
    for i, f in enumerate(t.factors):
        v = f.coeff.value(pt) * qv ** f.qpow(k, n)
        length = None if f.length is None else f.length(k, n)
        skip = skips[i] if skips else frozenset()
        out = out * _poch_value(v, qv, length, policy, skip) ** f.exponent
    return out


def eval_term(t: QHyperTerm, assignment: Mapping[str, object], k: int = 0, n: int = 0,
              policy: TruncationPolicy = TruncationPolicy(), q=None):
    """Numeric value of ``T(n, k)``; ``q`` may be given separately or in ``assignment``."""
    with policy.workdps():
        return +term_value(t, assignment, k, n, policy, q).result()


class NotExact(ValueError):
    """An infinite factor with a nonzero argument blocks exact evaluation."""


def eval_term_exact(t: QHyperTerm, assignment: Mapping[str, object], k: int = 0, n: int = 0,
                    q=None) -> Fraction:
    """Exact rational value of ``T(n, k)``.

    Infinite factors are admitted only when their argument is exactly 0 (value 1).
    Zero and pole counting follows the same rules as the numeric evaluator.
    """
    pt = _point(assignment, q)
    qv = pt["q"]
    x_pt = dict(pt, x=qv ** k, y=qv ** n)
    num = Fraction(t.prefactor.num.evaluate(x_pt))
    den = Fraction(t.prefactor.den.evaluate(x_pt))
    if den == 0:
        raise PoleError("rational prefactor has a pole")
    val = num / den
    order = 1 if val == 0 else 0
    if val == 0:
        val = Fraction(1)
    for atom, ex in t.powers:
        base = pt[atom] if isinstance(atom, str) else atom
        e = ex(k, n)
        if base == 0 and e:
            if e < 0:
                raise PoleError(f"{atom} = 0 raised to {e}")
            order += 1
            continue
        val *= Fraction(base) ** e
    val *= qv ** t.qexp(k, n)
    if t.sign(k, n) % 2:
        val = -val
    for f in t.factors:
        v = f.coeff.value(pt) * qv ** f.qpow(k, n)
        if f.length is None:
            if v != 0:
                raise NotExact(f"infinite factor with argument {v}")
            continue
        length = f.length(k, n)
        sgn = f.exponent if length >= 0 else -f.exponent
        for j in (range(length) if length >= 0 else range(1, -length + 1)):
            fac = 1 - v * qv ** (j if length >= 0 else -j)
            if fac == 0:
                order += sgn
            else:
                val *= fac ** sgn
    if order > 0:
        return Fraction(0)
    if order < 0:
        raise PoleError("pole at the evaluation point")
    return val


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

@dataclass
class SeriesResult:
    value: object
    error_estimate: object
    terms_used: int

    def __iter__(self):
        return iter((self.value, self.error_estimate))


def _one_side(t: QHyperTerm, assignment, fixed: int, index: str, start: int, step: int,
              policy: TruncationPolicy, q=None) -> tuple:
    eps = policy.eps
    total = mpmath.mpf(0)
    prev = None
    zeros = 0
    batch = 8
    small_run = 0
    j = start
    count = 0
    while count < policy.max_terms:
        k, n = (j, fixed) if index == "k" else (fixed, j)
        v = term_value(t, assignment, k, n, policy, q).result()
        total += v
        count += 1
        scale = max(1, abs(total))
        if v == 0:
            zeros += 1
            if zeros >= 12:
                return total, mpmath.mpf(0), count
        else:
            zeros = 0
        av = abs(v)
        if av < eps * scale:
            small_run += 1
        else:
            small_run = 0
        if policy.tail_mode is TailMode.TERM_SMALLNESS:
            if small_run >= batch:
                return total, av, count
        elif prev is not None and prev != 0 and av != 0:
            rho = av / abs(prev)
            if rho < 1:
                tail = av * rho / (1 - rho)
                if small_run >= batch and tail < eps * scale:
                    return total, tail, count
        prev = v
        j += step
    raise NonConvergence(f"series in {index} not converged after {policy.max_terms} terms")


def sum_series(t: QHyperTerm, fixed: int = 0, support: str = "unilateral",
               assignment: Optional[Mapping[str, object]] = None,
               policy: TruncationPolicy = TruncationPolicy(), index: str = "k", q=None,
               start: int = 0) -> SeriesResult:
    """Sum ``t`` over ``index`` with the other index held at ``fixed``.

    ``support`` is ``"unilateral"`` (``index >= start``) or ``"bilateral"``.
    Each tail is extended until a batch of consecutive terms is below epsilon
    relative to the running sum and the ratio-extrapolated tail is too.
    """
    assignment = assignment or {}
    with policy.workdps():
        val, err, used = _one_side(t, assignment, fixed, index, start, 1, policy, q)
        if support == "bilateral":
            v2, e2, u2 = _one_side(t, assignment, fixed, index, start - 1, -1, policy, q)
            val, err, used = val + v2, err + e2, used + u2
        elif support != "unilateral":
            raise ValueError(f"unknown support {support!r}")
        return SeriesResult(+val, +err, used)


def reflect_sum(t: QHyperTerm, assignment, policy: TruncationPolicy = TruncationPolicy(),
                fixed: int = 0, q=None, negative: Optional[QHyperTerm] = None):
    """Bilateral sum in k, with the negative side taken from the reflected term.

    Useful when the summand has factorials of negative length that are easier
    to evaluate after ``k -> -m``.  ``negative`` is ``m -> t(-m)`` if already known.
    """
    from .terms import reflect_k
    neg_t = negative if negative is not None else reflect_k(t)
    with policy.workdps():
        pos = _one_side(t, assignment, fixed, "k", 0, 1, policy, q)[0]
        neg = _one_side(neg_t, assignment, fixed, "k", 1, 1, policy, q)[0]
        return +(pos + neg)


def partial_sum(t: QHyperTerm, assignment, fixed: int, lo: int, hi: int,
                policy: TruncationPolicy = TruncationPolicy(), index: str = "k", q=None):
    """``sum_{j=lo}^{hi-1}`` of ``t`` in ``index``."""
    with policy.workdps():
        total = mpmath.mpf(0)
        for j in range(lo, hi):
            k, n = (j, fixed) if index == "k" else (fixed, j)
            total += term_value(t, assignment, k, n, policy, q).result()
        return +total


def relclose(u, v, policy: TruncationPolicy, factor: int = 10) -> bool:
    with policy.workdps():
        return abs(mp(u) - mp(v)) <= factor * policy.eps * max(1, abs(mp(v)))


def eval_ratfunc(r: RatFunc, point: Mapping[str, object]):
    """Evaluate at a point of exact rationals (or mpf values)."""
    try:
        pt = {k: Fraction(v) for k, v in point.items()}
        return r.evaluate(pt)
    except (TypeError, ValueError):
        return r.evaluate(point)
