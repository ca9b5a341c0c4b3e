"""Exact coefficient tower: rationals, multivariate polynomials, rational functions.

Polynomials live in the fixed ring ``QQ[x, y, q, a, b, c, d, e, z, t]`` where ``x``
stands for ``q**k`` and ``y`` for ``q**n``.  Sparse arithmetic and multivariate
GCDs are delegated to sympy's ``PolyElement``; everything exposed here is
immutable by convention.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Optional

from sympy import QQ, lex
from sympy.polys.rings import ring

ExactRational = Fraction

# ``t`` is an internal auxiliary used only by the q-dispersion resultant.
VARS = ("x", "y", "q", "a", "b", "c", "d", "e", "z", "t")
LETTERS = ("a", "b", "c", "d", "e", "z")
INDEX = {v: i for i, v in enumerate(VARS)}

_RING, *_GENS = ring(",".join(VARS), QQ, lex)
NVARS = len(VARS)


class MalformedInput(ValueError):
    """Raised for structurally invalid arithmetic input (e.g. zero denominators)."""


def to_fraction(c) -> Fraction:
    """Convert a ring coefficient (gmpy2 mpq / PythonRational) to ``Fraction``."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    return Fraction(int(c.numerator), int(c.denominator))


def _qq(c):
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


class MultiPoly:
    """Polynomial over Q in the named indeterminates of ``VARS``."""

    __slots__ = ("_p",)

    def __init__(self, p=None):
        if p is None:
            p = _RING.zero
        elif not hasattr(p, "ring"):
            p = _RING(_qq(p))
        self._p = p

    # constructors -----------------------------------------------------
    @classmethod
    def var(cls, name: str) -> "MultiPoly":
        if name not in INDEX:
            raise MalformedInput(f"unknown indeterminate {name!r}")
        return cls(_GENS[INDEX[name]])

    @classmethod
    def const(cls, c) -> "MultiPoly":
        return cls(_RING(_qq(c)))

    @classmethod
    def monomial(cls, exps: Mapping[str, int], coeff=1) -> "MultiPoly":
        e = [0] * NVARS
        for name, k in exps.items():
            if k < 0:
                raise MalformedInput("negative exponent in polynomial monomial")
            e[INDEX[name]] = k
        return cls(_RING({tuple(e): _qq(coeff)}))

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, object]) -> "MultiPoly":
        return cls(_RING({tuple(k): _qq(v) for k, v in terms.items() if v != 0}))

    # basic protocol ---------------------------------------------------
    @property
    def raw(self):
        return self._p

    def terms(self) -> list[tuple[tuple, Fraction]]:
        return [(m, to_fraction(c)) for m, c in self._p.items()]

    def is_zero(self) -> bool:
        return not self._p

    def is_const(self) -> bool:
        return all(not any(m) for m in self._p)

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("polynomial is not constant")
        return to_fraction(self._p.get((0,) * NVARS, 0))

    def __add__(self, other):
        return MultiPoly(self._p + _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return MultiPoly(self._p - _lift(other))

    def __rsub__(self, other):
        return MultiPoly(_lift(other) - self._p)

    def __mul__(self, other):
        return MultiPoly(self._p * _lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return MultiPoly(-self._p)

    def __pow__(self, k: int):
        return MultiPoly(self._p ** k)

    def __eq__(self, other):
        if isinstance(other, (MultiPoly, int, Fraction)):
            return self._p == _lift(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._p.items()))

    def __repr__(self):
        return f"MultiPoly({poly_to_text(self)})"

    def __str__(self):
        return poly_to_text(self)

    # structure --------------------------------------------------------
    def degree(self, var: str) -> int:
        """Degree in ``var``; ``-1`` for the zero polynomial."""
        if self.is_zero():
            return -1
        i = INDEX[var]
        return max(m[i] for m in self._p)

    def order(self, var: str) -> int:
        """Lowest power of ``var`` present (trailing degree)."""
        if self.is_zero():
            return -1
        i = INDEX[var]
        return min(m[i] for m in self._p)

    def variables(self) -> set[str]:
        used = set()
        for m in self._p:
            used.update(VARS[i] for i, e in enumerate(m) if e)
        return used

    def coeffs_in(self, var: str) -> dict[int, "MultiPoly"]:
        """Split into ``{power: coefficient}`` with coefficients free of ``var``."""
        i = INDEX[var]
        out: dict[int, dict] = {}
        for m, c in self._p.items():
            mm = list(m)
            d = mm[i]
            mm[i] = 0
            out.setdefault(d, {})[tuple(mm)] = c
        return {d: MultiPoly(_RING(t)) for d, t in out.items()}

    def lc_in(self, var: str) -> "MultiPoly":
        return self.coeffs_in(var)[self.degree(var)]

    def tc_in(self, var: str) -> "MultiPoly":
        return self.coeffs_in(var)[self.order(var)]

    def divide_var_power(self, var: str, k: int) -> "MultiPoly":
        i = INDEX[var]
        t = {}
        for m, c in self._p.items():
            mm = list(m)
            mm[i] -= k
            if mm[i] < 0:
                raise ValueError("not divisible")
            t[tuple(mm)] = c
        return MultiPoly(_RING(t))

    def q_scale(self, var: str, j: int) -> "RatFunc":
        """Substitute ``var -> q**j * var``; returns a RatFunc (j may be negative)."""
        i, iq = INDEX[var], INDEX["q"]
        t = {}
        for m, c in self._p.items():
            mm = list(m)
            mm[iq] += j * m[i]
            t[tuple(mm)] = c
        low = min((mm[iq] for mm in t), default=0)
        den = 1
        if low < 0:
            t = {tuple(ee if ix != iq else ee - low for ix, ee in enumerate(mm)): c
                 for mm, c in t.items()}
            den = MultiPoly.monomial({"q": -low})
        return RatFunc(MultiPoly(_RING(t)), den)

    def subs(self, var: str, value: "RatFunc") -> "RatFunc":
        """Substitute a rational function for ``var`` (Horner in ``var``)."""
        value = RatFunc.lift(value)
        coeffs = self.coeffs_in(var)
        if not coeffs:
            return RatFunc(MultiPoly())
        deg = max(coeffs)
        acc = RatFunc(coeffs.get(deg, MultiPoly()))
        for d in range(deg - 1, -1, -1):
            acc = acc * value + RatFunc(coeffs.get(d, MultiPoly()))
        return acc

    def evaluate(self, point: Mapping[str, object]):
        """Evaluate at a point; missing variables raise KeyError."""
        total = 0
        for m, c in self._p.items():
            t = to_fraction(c)
            for i, e in enumerate(m):
                if e:
                    t = t * point[VARS[i]] ** e
            total = total + t
        return total

    def gcd(self, other: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self._p.gcd(other._p))

    def exquo(self, other: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self._p.exquo(other._p))

    def factor_list(self) -> tuple[Fraction, list[tuple["MultiPoly", int]]]:
        c, fs = self._p.factor_list()
        return to_fraction(c), [(MultiPoly(f), k) for f, k in fs]


def _lift(v):
    if isinstance(v, MultiPoly):
        return v._p
    return _RING(_qq(v))


def _sort_key_main(m: tuple, main: str) -> tuple:
    i = INDEX[main]
    return (m[i],) + m


def leading_coeff(p: MultiPoly, main: str) -> Fraction:
    """Rational coefficient of the leading term: highest ``main`` degree, ties lex."""
    m = max(p.raw, key=lambda t: _sort_key_main(t, main))
    return to_fraction(p.raw[m])


class RatFunc:
    """Normalized quotient of two MultiPolys.

    The canonical form is fully reduced (multivariate GCD) with the denominator's
    leading term, ordered by degree in ``main`` then lexicographically, equal to 1.
    """

    __slots__ = ("num", "den", "main")

    def __init__(self, num, den=1, main: str = "x", *, _reduced: bool = False):
        if not isinstance(num, MultiPoly):
            num = MultiPoly.const(num)
        if not isinstance(den, MultiPoly):
            den = MultiPoly.const(den)
        if den.is_zero():
            raise MalformedInput("zero denominator")
        if not _reduced:
            if num.is_zero():
                num, den = MultiPoly(), MultiPoly.const(1)
            elif not den.is_const() or den.const_value() != 1:
                if not den.is_const():
                    g = num.gcd(den)
                    if not g.is_const():
                        num, den = num.exquo(g), den.exquo(g)
                lc = leading_coeff(den, main)
                if lc != 1:
                    num, den = num * (1 / lc), den * (1 / lc)
        self.num = num
        self.den = den
        self.main = main

    @classmethod
    def lift(cls, v) -> "RatFunc":
        if isinstance(v, RatFunc):
            return v
        if isinstance(v, MultiPoly):
            return cls(v)
        return cls(MultiPoly.const(v))

    @classmethod
    def var(cls, name: str) -> "RatFunc":
        return cls(MultiPoly.var(name), _reduced=True)

    @classmethod
    def monomial(cls, exps: Mapping[str, int], coeff=1) -> "RatFunc":
        pos = {k: v for k, v in exps.items() if v > 0}
        neg = {k: -v for k, v in exps.items() if v < 0}
        return cls(MultiPoly.monomial(pos, coeff), MultiPoly.monomial(neg))

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = RatFunc.lift(other)
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den, self.main)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den, self.main)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, self.main, _reduced=True)

    def __sub__(self, other):
        return self + (-RatFunc.lift(other))

    def __rsub__(self, other):
        return RatFunc.lift(other) - self

    def __mul__(self, other):
        o = RatFunc.lift(other)
        if o.den.is_const() and self.den.is_const():
            return RatFunc(self.num * o.num, self.den * o.den, self.main)
        # cross-cancel first to keep the operands small
        g1 = self.num.gcd(o.den) if not o.den.is_const() else MultiPoly.const(1)
        g2 = o.num.gcd(self.den) if not self.den.is_const() else MultiPoly.const(1)
        n1, d2 = (self.num.exquo(g1), o.den.exquo(g1)) if not g1.is_const() else (self.num, o.den)
        n2, d1 = (o.num.exquo(g2), self.den.exquo(g2)) if not g2.is_const() else (o.num, self.den)
        return RatFunc(n1 * n2, d1 * d2, self.main)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num, self.main)

    def __truediv__(self, other):
        return self * RatFunc.lift(other).inverse()

    def __rtruediv__(self, other):
        return RatFunc.lift(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFunc(self.num ** k, self.den ** k, self.main, _reduced=True) if k else RatFunc(1)

    def __eq__(self, other):
        if isinstance(other, (RatFunc, MultiPoly, int, Fraction)):
            o = RatFunc.lift(other)
            return self.num * o.den == o.num * self.den
        return NotImplemented

    def __hash__(self):
        r = ratfunc_normalize(self, "x")
        return hash((r.num, r.den))

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        if self.den.is_const() and self.den.const_value() == 1:
            return poly_to_text(self.num)
        return f"({poly_to_text(self.num)})/({poly_to_text(self.den)})"

    # structure --------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        return self.num.const_value() / self.den.const_value()

    def variables(self) -> set[str]:
        return self.num.variables() | self.den.variables()

    def q_scale(self, var: str, j: int) -> "RatFunc":
        if j == 0:
            return self
        return self.num.q_scale(var, j) / self.den.q_scale(var, j)

    def subs(self, var: str, value) -> "RatFunc":
        if var not in self.variables():
            return self
        return self.num.subs(var, value) / self.den.subs(var, value)

    def subs_many(self, values: Mapping[str, object]) -> "RatFunc":
        out = self
        for k, v in values.items():
            out = out.subs(k, v)
        return out

    def evaluate(self, point: Mapping[str, object]):
        den = self.den.evaluate(point)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at evaluation point")
        return self.num.evaluate(point) / den


def ratfunc_normalize(r: RatFunc, main: str = "x") -> RatFunc:
    """Canonical reduced form of ``r`` with denominator monic in ``main``."""
    if r.den.is_zero():
        raise MalformedInput("zero denominator")
    return RatFunc(r.num, r.den, main)


def rat_is_zero(r: RatFunc) -> bool:
    """Exact zero test: the numerator of the reduced form vanishes identically."""
    return RatFunc.lift(r).num.is_zero()


def one_minus_monomial(exps: Mapping[str, int], coeff=1) -> RatFunc:
    """``1 - coeff * prod(v**e)`` for a Laurent monomial."""
    return RatFunc(1) - RatFunc.monomial(exps, coeff)


# ---------------------------------------------------------------------------
# GCD-degree oracle (subresultant PRS) and q-dispersion
# ---------------------------------------------------------------------------

def _univ(p: MultiPoly, main: str) -> dict[int, MultiPoly]:
    return {d: c for d, c in p.coeffs_in(main).items() if not c.is_zero()}


def _prem(a: MultiPoly, b: MultiPoly, main: str) -> MultiPoly:
    """Pseudo-remainder ``lc(b)**(deg a - deg b + 1) * a mod b`` in ``main``."""
    db = b.degree(main)
    lcb = b.lc_in(main)
    xv = MultiPoly.var(main)
    r = a
    e = a.degree(main) - db + 1
    while not r.is_zero() and r.degree(main) >= db:
        dr = r.degree(main)
        r = r * lcb - r.lc_in(main) * b * xv ** (dr - db)
        e -= 1
    return r * lcb ** e if e > 0 else r


def prs_gcd_degree(p1: MultiPoly, p2: MultiPoly, main: str) -> int:
    """Degree in ``main`` of gcd(p1, p2) over Q(others)[main], via subresultant PRS.

    Independent of sympy's GCD; used to confirm dispersion candidates.
    """
    if p1.is_zero() or p2.is_zero():
        raise MalformedInput("gcd degree of zero polynomial")
    r0, r1 = (p1, p2) if p1.degree(main) >= p2.degree(main) else (p2, p1)
    if r1.degree(main) == 0:
        return 0
    d = r0.degree(main) - r1.degree(main)
    beta = MultiPoly.const((-1) ** (d + 1))
    psi = MultiPoly.const(-1)
    while True:
        rem = _prem(r0, r1, main)
        if rem.is_zero():
            return r1.degree(main)
        r2 = rem.exquo(beta)
        if r2.degree(main) == 0:
            return 0
        c1 = r1.lc_in(main)
        d_prev = d
        d = r1.degree(main) - r2.degree(main)
        # psi_{k} = (-c)^{d_prev} / psi^{d_prev - 1}
        num = (-c1) ** d_prev
        if d_prev >= 1:
            psi = num.exquo(psi ** (d_prev - 1))
        else:
            psi = num * psi
        beta = -c1 * psi ** d
        r0, r1 = r1, r2


def _q_degree(p: MultiPoly) -> int:
    return p.degree("q") if not p.is_zero() else -1


def _resultant_in(p1: MultiPoly, p2t: MultiPoly, main: str) -> MultiPoly:
    """Resultant w.r.t. ``main`` (moved to the front of the ring for sympy)."""
    # only generators that occur: sympy's dense recursion pays for every level
    present = p1.variables() | p2t.variables()
    order = [INDEX[main]] + [i for i in range(NVARS) if i != INDEX[main] and VARS[i] in present]

    def perm(p: MultiPoly):
        return {tuple(m[i] for i in order): c for m, c in p.raw.items()}

    res = _PERM_RINGS(order)
    R = res(perm(p1)).resultant(res(perm(p2t)))
    # the resultant lives in the ring of the remaining generators order[1:]
    out = {}
    for m, c in R.items():
        e = [0] * NVARS
        for pos, i in enumerate(order[1:]):
            e[i] = m[pos]
        out[tuple(e)] = c
    return MultiPoly(_RING(out))


_ring_cache: dict[tuple, object] = {}


def _PERM_RINGS(order):
    key = tuple(order)
    if key not in _ring_cache:
        names = [VARS[i] for i in order]
        _ring_cache[key] = ring(",".join(names), QQ, lex)[0]
    return _ring_cache[key]


def _dispersion_pair(f: MultiPoly, g: MultiPoly, main: str) -> set[int]:
    """j >= 0 with Res_main(f(main), g(t*main)) vanishing at t = q**j."""
    if f.degree(main) <= 0 or g.degree(main) <= 0:
        return set()
    it, im = INDEX["t"], INDEX[main]
    gt = MultiPoly.from_terms({
        tuple(e + (m[im] if ix == it else 0) for ix, e in enumerate(m)): c
        for m, c in g.terms()})
    R = _resultant_in(f, gt, main)
    if R.is_zero():
        return {0}
    rc = _univ(R, "t")
    top = max(rc)
    # R(q**j) = sum c_i q**(i*j): the top term dominates in q-degree once
    # j exceeds every deg_q(c_i) - deg_q(c_top)
    bound = max([0] + [_q_degree(c) - _q_degree(rc[top]) for i, c in rc.items() if i != top])
    return {j for j in range(bound + 1)
            if R.subs("t", RatFunc.monomial({"q": j})).is_zero()}


def _gcd_degree_shifted(p1: MultiPoly, p2: MultiPoly, main: str, j: int) -> int:
    p2s = p2.q_scale(main, j).num
    return prs_gcd_degree(p1, p2s, main)


def _main_factors(p: MultiPoly, main: str) -> list[MultiPoly]:
    _, fs = p.factor_list()
    return [f for f, _ in fs if f.degree(main) > 0]


def _associate_shift(f: MultiPoly, g: MultiPoly, main: str) -> Optional[int]:
    """The j >= 0 with ``g(q**j x)`` a constant multiple of ``f(x)``, if any.

    For irreducible ``f, g`` of equal degree this is exactly the set of
    t = q**j annihilating ``Res_x(f(x), g(t x))``.
    """
    cf, cg = f.coeffs_in(main), g.coeffs_in(main)
    if set(cf) != set(cg):
        return None
    m, i0 = max(cf), min(cf)
    if m == i0:
        return None
    # q^((m - i0) j) = f_m g_i0 / (f_i0 g_m)
    ratio = RatFunc(cf[m] * cg[i0], cf[i0] * cg[m])
    e = _q_exponent(ratio)
    if e is None or e % (m - i0) or e < 0:
        return None
    j = e // (m - i0)
    gs = g.q_scale(main, j).num
    if not (f * gs.lc_in(main) - gs * f.lc_in(main)).is_zero():
        return None
    return j


def _q_exponent(r: RatFunc) -> Optional[int]:
    """``e`` with ``r == q**e`` exactly, else None."""
    if len(r.num.terms()) != 1 or len(r.den.terms()) != 1:
        return None
    (mn, cn), = r.num.terms()
    (md, cd), = r.den.terms()
    if cn != cd:
        return None
    iq = INDEX["q"]
    if any(a != b for i, (a, b) in enumerate(zip(mn, md)) if i != iq):
        return None
    return mn[iq] - md[iq]


_SPECIAL_VALUES = (Fraction(7, 3), Fraction(-5, 11), Fraction(13, 2), Fraction(-3, 17),
                   Fraction(19, 5), Fraction(23, 29), Fraction(-31, 7), Fraction(37, 41))


def _specialize(p: MultiPoly, keep: set[int], values: Mapping[int, Fraction]) -> MultiPoly:
    out: dict[tuple, Fraction] = {}
    for m, c in p.terms():
        v = Fraction(c)
        e = list(m)
        for i, ex in enumerate(m):
            if i not in keep and ex:
                v *= values[i] ** ex
                e[i] = 0
        key = tuple(e)
        out[key] = out.get(key, 0) + v
    return MultiPoly.from_terms(out)


def _specialized_candidates(p1: MultiPoly, p2: MultiPoly, main: str) -> Optional[set[int]]:
    """Superset of the dispersion set, read off after fixing the letters other than x, q.

    If ``p1(x)`` and ``p2(q^j x)`` share a factor, their specializations do too as
    long as the leading coefficients in ``main`` survive, so some irreducible
    factor of the first is associate to a shifted irreducible factor of the
    second.  Factoring in two variables is cheap.  Returns None when the chosen
    values kill a leading coefficient.
    """
    keep = {INDEX[main], INDEX["q"], INDEX["t"]}
    values = {i: _SPECIAL_VALUES[i % len(_SPECIAL_VALUES)] for i in range(NVARS) if i not in keep}
    s1, s2 = _specialize(p1, keep, values), _specialize(p2, keep, values)
    if s1.degree(main) != p1.degree(main) or s2.degree(main) != p2.degree(main):
        return None
    out = set()
    for f in _main_factors(s1, main):
        for g in _main_factors(s2, main):
            if f.degree(main) == g.degree(main):
                j = _associate_shift(f, g, main)
                if j is not None:
                    out.add(j)
    return out


def q_resultant_roots(p1: MultiPoly, p2: MultiPoly, main: str = "x",
                      use_resultant: bool = False) -> set[int]:
    """``{j >= 0 : gcd(p1(x), p2(q**j x)) non-constant}``.

    Candidates are the shifts between irreducible factors of ``p1`` and ``p2``
    after the letters other than x and q are fixed to rationals (equivalently
    the t = q**j annihilating the specialized ``Res_x(p1(x), p2(t x))``); each
    one is confirmed by an exact gcd in the full ring.  With ``use_resultant=True`` the resultant is
    taken over the full ring, factor pair by factor pair, and candidates are
    confirmed by the subresultant gcd-degree check (slow, used as an oracle).
    """
    if p1.degree(main) <= 0 or p2.degree(main) <= 0:
        return set()
    if not use_resultant:
        cands = _specialized_candidates(p1, p2, main)
        if cands is not None:
            return {j for j in cands if p1.gcd(p2.q_scale(main, j).num).degree(main) > 0}
    out: dict[int, tuple] = {}
    for f in _main_factors(p1, main):
        for g in _main_factors(p2, main):
            if f.degree(main) != g.degree(main):
                continue
            if use_resultant:
                for j in _dispersion_pair(f, g, main):
                    out.setdefault(j, (f, g))
            else:
                j = _associate_shift(f, g, main)
                if j is not None:
                    out.setdefault(j, (f, g))
    return {j for j, (f, g) in out.items() if _gcd_degree_shifted(f, g, main, j) > 0}


# ---------------------------------------------------------------------------
# text rendering
# ---------------------------------------------------------------------------

def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_to_text(p: MultiPoly) -> str:
    """Render in the grammar's polynomial syntax, e.g. ``1 - a*x^2*q``."""
    if p.is_zero():
        return "0"
    parts = []
    for m, c in sorted(p.terms(), key=lambda t: t[0], reverse=True):
        mono = "*".join(VARS[i] + (f"^{e}" if e != 1 else "") for i, e in enumerate(m) if e)
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{_frac_text(mag)}*{mono}"
        else:
            body = _frac_text(mag)
        parts.append(("-" if c < 0 else "+", body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for s, b in parts[1:]:
        text += f" {s} {b}"
    return text


def product(items: Iterable, start=None):
    return reduce(lambda u, v: u * v, items, start if start is not None else RatFunc(1))
