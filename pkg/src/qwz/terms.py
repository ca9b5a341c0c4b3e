"""Structured q-hypergeometric terms in two integer indices ``k`` and ``n``.

A :class:`QHyperTerm` is a product of

* a rational prefactor in ``x = q**k``, ``y = q**n``, ``q`` and the letters,
* geometric powers ``atom**(alpha*k + beta*n + gamma)`` of letters and rationals,
* ``q`` raised to an integer quadratic form in ``k`` and ``n``,
* a sign ``(-1)**(linear form)``,
* q-shifted factorials ``(m q**L; q)_len ** e`` with ``len`` linear or infinite.

Every factor is closed under ``k -> k+1`` and ``n -> n+1``.  Quotients of terms
are computed by rewriting each finite factorial as a ratio of infinite ones,
``(u;q)_L = (u;q)_inf / (u q**L;q)_inf``; infinite factors whose arguments differ
by a constant power of ``q`` then cancel to finite rational products.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Optional

from .exactnum import LETTERS, RatFunc, one_minus_monomial


class NotRational(ValueError):
    """The quotient of two terms is not a rational function of x, y."""


class UnsupportedTerm(ValueError):
    """A transformation produced a structure the term type cannot represent."""


# ---------------------------------------------------------------------------
# linear and quadratic exponent forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class LinForm:
    """``k_coef * k + n_coef * n + const`` with integer coefficients."""

    k: int = 0
    n: int = 0
    c: int = 0

    def __add__(self, other: "LinForm") -> "LinForm":
        other = lin(other)
        return LinForm(self.k + other.k, self.n + other.n, self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return LinForm(-self.k, -self.n, -self.c)

    def __sub__(self, other):
        return self + (-lin(other))

    def __rsub__(self, other):
        return lin(other) - self

    def __mul__(self, s: int) -> "LinForm":
        return LinForm(self.k * s, self.n * s, self.c * s)

    __rmul__ = __mul__

    def __call__(self, k: int = 0, n: int = 0) -> int:
        return self.k * k + self.n * n + self.c

    def is_const(self) -> bool:
        return self.k == 0 and self.n == 0

    def shift(self, dk: int = 0, dn: int = 0) -> "LinForm":
        return LinForm(self.k, self.n, self.c + self.k * dk + self.n * dn)

    def set_n(self, n0: int) -> "LinForm":
        return LinForm(self.k, 0, self.c + self.n * n0)

    def reflect_k(self) -> "LinForm":
        return LinForm(-self.k, self.n, self.c)

    def monomial(self) -> dict[str, int]:
        """``q**self`` as a Laurent monomial in x, y, q."""
        return {"x": self.k, "y": self.n, "q": self.c}

    def __str__(self):
        return lin_text(self)


def lin(v) -> LinForm:
    if isinstance(v, LinForm):
        return v
    return LinForm(0, 0, int(v))


def lin_text(f: LinForm) -> str:
    parts = []
    for coef, name in ((f.k, "k"), (f.n, "n")):
        if coef:
            body = name if abs(coef) == 1 else f"{abs(coef)}*{name}"
            parts.append(("-" if coef < 0 else "+", body))
    if f.c or not parts:
        parts.append(("-" if f.c < 0 else "+", str(abs(f.c))))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for s, b in parts[1:]:
        text += f"{s}{b}"
    return text


def _binom2(m: int) -> int:
    return m * (m - 1) // 2


@dataclass(frozen=True)
class QuadForm:
    """``kk*C(k,2) + kn*k*n + nn*C(n,2) + lin(k, n)``, all integer coefficients."""

    kk: int = 0
    kn: int = 0
    nn: int = 0
    lin: LinForm = LinForm()

    def __add__(self, o: "QuadForm") -> "QuadForm":
        return QuadForm(self.kk + o.kk, self.kn + o.kn, self.nn + o.nn, self.lin + o.lin)

    def __neg__(self):
        return QuadForm(-self.kk, -self.kn, -self.nn, -self.lin)

    def __sub__(self, o):
        return self + (-o)

    def __call__(self, k: int = 0, n: int = 0) -> int:
        return self.kk * _binom2(k) + self.kn * k * n + self.nn * _binom2(n) + self.lin(k, n)

    def quadratic_part(self) -> tuple[int, int, int]:
        return (self.kk, self.kn, self.nn)

    def shift(self, dk: int = 0, dn: int = 0) -> "QuadForm":
        # C(k+d,2) = C(k,2) + d*k + C(d,2);  (k+dk)(n+dn) = kn + dn*k + dk*n + dk*dn
        extra = LinForm(self.kk * dk + self.kn * dn, self.nn * dn + self.kn * dk,
                        self.kk * _binom2(dk) + self.kn * dk * dn + self.nn * _binom2(dn))
        return QuadForm(self.kk, self.kn, self.nn, self.lin.shift(dk, dn) + extra)

    def set_n(self, n0: int) -> "QuadForm":
        extra = LinForm(self.kn * n0, 0, self.nn * _binom2(n0))
        return QuadForm(self.kk, 0, 0, self.lin.set_n(n0) + extra)

    def reflect_k(self) -> "QuadForm":
        # C(-k,2) = C(k,2) + k
        return QuadForm(self.kk, -self.kn, self.nn, self.lin.reflect_k() + LinForm(self.kk, 0, 0))

    @staticmethod
    def product(f: LinForm, g: LinForm) -> "QuadForm":
        """The quadratic form equal to ``f * g``."""
        kk2 = f.k * g.k  # coefficient of k**2 = 2*C(k,2) + k
        nn2 = f.n * g.n
        kn = f.k * g.n + f.n * g.k
        linear = LinForm(kk2 + f.k * g.c + f.c * g.k, nn2 + f.n * g.c + f.c * g.n, f.c * g.c)
        return QuadForm(2 * kk2, kn, 2 * nn2, linear)


# ---------------------------------------------------------------------------
# monomials in the letters
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Mono:
    """Rational coefficient times a Laurent monomial in the letters a..e, z."""

    coeff: Fraction = Fraction(1)
    exps: tuple[tuple[str, int], ...] = ()

    @classmethod
    def make(cls, coeff=1, exps: Optional[Mapping[str, int]] = None) -> "Mono":
        exps = {k: v for k, v in (exps or {}).items() if v}
        for k in exps:
            if k not in LETTERS:
                raise ValueError(f"unknown letter {k!r}")
        return cls(Fraction(coeff), tuple(sorted(exps.items())))

    def as_dict(self) -> dict[str, int]:
        return dict(self.exps)

    def __mul__(self, o: "Mono") -> "Mono":
        e = self.as_dict()
        for k, v in o.exps:
            e[k] = e.get(k, 0) + v
        return Mono.make(self.coeff * o.coeff, e)

    def __pow__(self, s: int) -> "Mono":
        return Mono.make(self.coeff ** s, {k: v * s for k, v in self.exps})

    def degree(self, letter: str) -> int:
        return self.as_dict().get(letter, 0)

    def without(self, letter: str) -> "Mono":
        return Mono.make(self.coeff, {k: v for k, v in self.exps if k != letter})

    def value(self, point: Mapping[str, object]):
        v = self.coeff
        for k, e in self.exps:
            v = v * point[k] ** e
        return v

    def ratfunc(self, qpow: LinForm = LinForm()) -> RatFunc:
        e = self.as_dict()
        e.update({k: v for k, v in qpow.monomial().items() if v})
        return RatFunc.monomial(e, self.coeff)


# ---------------------------------------------------------------------------
# factors and terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class PochFactor:
    """``(coeff * q**qpow; q)_length ** exponent``; ``length=None`` is infinity."""

    coeff: Mono
    qpow: LinForm
    length: Optional[LinForm]
    exponent: int = 1

    @property
    def infinite(self) -> bool:
        return self.length is None

    def key(self):
        return (self.coeff, self.qpow, self.length)


def _sort_key(f: PochFactor):
    return (f.length is None, f.length or LinForm(), f.coeff, f.qpow)


def _geom_key(atom):
    return (0, atom) if isinstance(atom, str) else (1, str(atom))


@dataclass(frozen=True)
class QHyperTerm:
    prefactor: RatFunc = field(default_factory=lambda: RatFunc(1))
    powers: tuple = ()          # ((atom, LinForm), ...), atom: letter or positive Fraction
    qexp: QuadForm = QuadForm()
    sign: LinForm = LinForm()   # (-1)**sign, coefficients reduced mod 2
    factors: tuple = ()         # (PochFactor, ...)

    # construction -----------------------------------------------------
    @classmethod
    def build(cls, prefactor=None, powers=(), qexp=QuadForm(), sign=LinForm(), factors=()):
        """Canonicalize: merge equal factors/atoms, fold constants into the prefactor."""
        pre = RatFunc.lift(prefactor if prefactor is not None else 1)
        merged: dict = {}
        for f in factors:
            if f.exponent:
                merged[f.key()] = merged.get(f.key(), 0) + f.exponent
        facs = []
        for (coeff, qpow, length), e in merged.items():
            if e == 0:
                continue
            if length is not None and length == LinForm():
                continue
            facs.append(PochFactor(coeff, qpow, length, e))
        facs.sort(key=_sort_key)

        geo: dict = {}
        sgn = LinForm(sign.k, sign.n, sign.c)
        for atom, ex in powers:
            ex = lin(ex)
            if isinstance(atom, str):
                if atom == "q":
                    qexp = qexp + QuadForm(lin=ex)
                    continue
                if atom not in LETTERS:
                    raise ValueError(f"unknown atom {atom!r}")
                geo[atom] = geo.get(atom, LinForm()) + ex
            else:
                atom = Fraction(atom)
                if atom == 0:
                    raise UnsupportedTerm("zero base in a geometric power")
                if atom < 0:
                    sgn = sgn + ex
                    atom = -atom
                if atom == 1:
                    continue
                geo[atom] = geo.get(atom, LinForm()) + ex
        pows = []
        for atom, ex in geo.items():
            if ex.c:
                pre = pre * (RatFunc.monomial({atom: ex.c}) if isinstance(atom, str)
                             else RatFunc(atom ** ex.c))
                ex = LinForm(ex.k, ex.n, 0)
            if ex != LinForm():
                pows.append((atom, ex))
        pows.sort(key=lambda t: _geom_key(t[0]))

        if qexp.lin.c:
            pre = pre * RatFunc.monomial({"q": qexp.lin.c})
            qexp = replace(qexp, lin=LinForm(qexp.lin.k, qexp.lin.n, 0))
        if sgn.c % 2:
            pre = -pre
        sgn = LinForm(sgn.k % 2, sgn.n % 2, 0)
        return cls(pre, tuple(pows), qexp, sgn, tuple(facs))

    @classmethod
    def poch(cls, coeff: Mono, qpow=LinForm(), length=None, exponent=1) -> "QHyperTerm":
        return cls.build(factors=[PochFactor(coeff, lin(qpow), None if length is None else lin(length), exponent)])

    # algebra ----------------------------------------------------------
    def __mul__(self, o) -> "QHyperTerm":
        if not isinstance(o, QHyperTerm):
            return self.with_prefactor(o)
        return QHyperTerm.build(self.prefactor * o.prefactor, self.powers + o.powers,
                                self.qexp + o.qexp, self.sign + o.sign, self.factors + o.factors)

    __rmul__ = __mul__

    def inverse(self) -> "QHyperTerm":
        return QHyperTerm.build(
            self.prefactor.inverse(), tuple((a, -e) for a, e in self.powers), -self.qexp,
            self.sign, tuple(replace(f, exponent=-f.exponent) for f in self.factors))

    def __truediv__(self, o):
        if not isinstance(o, QHyperTerm):
            return self.with_prefactor(RatFunc.lift(o).inverse())
        return self * o.inverse()

    def __pow__(self, s: int):
        if s < 0:
            return self.inverse() ** (-s)
        out = QHyperTerm()
        for _ in range(s):
            out = out * self
        return out

    def with_prefactor(self, r) -> "QHyperTerm":
        return replace(self, prefactor=self.prefactor * RatFunc.lift(r))

    def __eq__(self, o):
        if not isinstance(o, QHyperTerm):
            return NotImplemented
        return (self.prefactor == o.prefactor and self.powers == o.powers
                and self.qexp == o.qexp and self.sign == o.sign and self.factors == o.factors)

    def __hash__(self):
        return hash((self.powers, self.qexp, self.sign, self.factors))

    # structure --------------------------------------------------------
    def letters(self) -> set[str]:
        out = set(v for v in self.prefactor.variables() if v in LETTERS)
        out |= {a for a, _ in self.powers if isinstance(a, str)}
        for f in self.factors:
            out |= set(f.coeff.as_dict())
        return out

    def depends_on(self, index: str) -> bool:
        attr = index
        if ("x" if index == "k" else "y") in self.prefactor.variables():
            return True
        if any(getattr(e, attr) for _, e in self.powers):
            return True
        if index == "k" and (self.qexp.kk or self.qexp.kn or self.qexp.lin.k or self.sign.k):
            return True
        if index == "n" and (self.qexp.nn or self.qexp.kn or self.qexp.lin.n or self.sign.n):
            return True
        for f in self.factors:
            if getattr(f.qpow, attr) or (f.length is not None and getattr(f.length, attr)):
                return True
        return False

    # transformations --------------------------------------------------
    def shift(self, dk: int = 0, dn: int = 0) -> "QHyperTerm":
        """The term at ``(n + dn, k + dk)``."""
        pre = self.prefactor.q_scale("x", dk).q_scale("y", dn)
        return QHyperTerm.build(
            pre,
            tuple((a, e.shift(dk, dn)) for a, e in self.powers),
            self.qexp.shift(dk, dn),
            self.sign.shift(dk, dn),
            tuple(PochFactor(f.coeff, f.qpow.shift(dk, dn),
                             None if f.length is None else f.length.shift(dk, dn), f.exponent)
                  for f in self.factors))

    def at_n(self, n0: int) -> "QHyperTerm":
        """Specialize the index ``n`` to the integer ``n0``."""
        pre = self.prefactor.subs("y", RatFunc.monomial({"q": n0}))
        return QHyperTerm.build(
            pre,
            tuple((a, e.set_n(n0)) for a, e in self.powers),
            self.qexp.set_n(n0),
            self.sign.set_n(n0),
            tuple(PochFactor(f.coeff, f.qpow.set_n(n0),
                             None if f.length is None else f.length.set_n(n0), f.exponent)
                  for f in self.factors))

    def swap_indices(self) -> "QHyperTerm":
        """Exchange the roles of ``k`` and ``n`` (and of ``x`` and ``y``)."""
        def sw(f: LinForm) -> LinForm:
            return LinForm(f.n, f.k, f.c)
        pre = self.prefactor
        pre = pre.subs("x", RatFunc.var("t")).subs("y", RatFunc.var("x")).subs("t", RatFunc.var("y"))
        qx = self.qexp
        return QHyperTerm.build(
            pre, tuple((a, sw(e)) for a, e in self.powers),
            QuadForm(qx.nn, qx.kn, qx.kk, sw(qx.lin)), sw(self.sign),
            tuple(PochFactor(f.coeff, sw(f.qpow), None if f.length is None else sw(f.length), f.exponent)
                  for f in self.factors))

    def substitute(self, letter: str, mono: Mono, qpow: LinForm = LinForm()) -> "QHyperTerm":
        """Replace ``letter`` by ``mono * q**qpow`` everywhere in the term."""
        qpow = lin(qpow)
        pre = self.prefactor.subs(letter, mono.ratfunc(qpow))
        powers = []
        qexp = self.qexp
        sign = self.sign
        for atom, ex in self.powers:
            if atom != letter:
                powers.append((atom, ex))
                continue
            # (mono q^L)^E
            c = mono.coeff
            if c < 0:
                sign = sign + ex
                c = -c
            if c != 1:
                powers.append((c, ex))
            for l2, e2 in mono.exps:
                powers.append((l2, ex * e2))
            qexp = qexp + QuadForm.product(qpow, ex)
        facs = []
        for f in self.factors:
            e = f.coeff.degree(letter)
            if not e:
                facs.append(f)
                continue
            coeff = f.coeff.without(letter) * mono ** e
            facs.append(PochFactor(coeff, f.qpow + qpow * e, f.length, f.exponent))
        return QHyperTerm.build(pre, tuple(powers), qexp, sign, tuple(facs))

    def dilate(self, letter: str, qpow) -> "QHyperTerm":
        """``letter -> letter * q**qpow`` (e.g. the substitution a -> a q^n)."""
        return self.substitute(letter, Mono.make(1, {letter: 1}), lin(qpow))


def _finite_poch_ratfunc(coeff: Mono, qpow: LinForm, length: int) -> RatFunc:
    """``(coeff q**qpow; q)_length`` as a rational function (length may be negative)."""
    out = RatFunc(1)
    if length >= 0:
        for j in range(length):
            out = out * one_minus(coeff, qpow + j)
    else:
        for j in range(1, -length + 1):
            out = out / one_minus(coeff, qpow - j)
    return out


def one_minus(coeff: Mono, qpow: LinForm) -> RatFunc:
    e = coeff.as_dict()
    e.update({k: v for k, v in qpow.monomial().items() if v})
    return one_minus_monomial(e, coeff.coeff)


def _inf_ratio(coeff: Mono, base: LinForm, s: int) -> RatFunc:
    """``(u q**s; q)_inf / (u; q)_inf`` for ``u = coeff q**base``, integer ``s``."""
    # s >= 0: 1/(u;q)_s ;  s < 0: (u q^s; q)_{-s}
    if s >= 0:
        return _finite_poch_ratfunc(coeff, base, s).inverse()
    return _finite_poch_ratfunc(coeff, base + s, -s)


def quotient(t1: QHyperTerm, t2: QHyperTerm) -> RatFunc:
    """``t1 / t2`` as an exact rational function of x, y, q and the letters.

    Raises :class:`NotRational` when the quotient is not rational (for example
    when unmatched infinite factors remain).
    """
    out = t1.prefactor / t2.prefactor

    # q-exponent
    dq = t1.qexp - t2.qexp
    if dq.quadratic_part() != (0, 0, 0):
        raise NotRational("quadratic q-exponents differ")
    out = out * RatFunc.monomial(dq.lin.monomial())

    # sign
    ds = t1.sign - t2.sign
    if ds.k % 2 or ds.n % 2:
        raise NotRational("sign factors differ by (-1)^k or (-1)^n")
    if ds.c % 2:
        out = -out

    # geometric powers
    geo: dict = {}
    for atom, ex in t1.powers:
        geo[atom] = geo.get(atom, LinForm()) + ex
    for atom, ex in t2.powers:
        geo[atom] = geo.get(atom, LinForm()) - ex
    for atom, ex in geo.items():
        if not ex.is_const():
            raise NotRational(f"geometric factor {atom}^({ex}) does not cancel")
        if ex.c:
            out = out * (RatFunc.monomial({atom: ex.c}) if isinstance(atom, str) else RatFunc(atom ** ex.c))

    # Pochhammer factors through their infinite decomposition
    groups: dict = {}
    for sgn, t in ((1, t1), (-1, t2)):
        for f in t.factors:
            e = sgn * f.exponent
            groups.setdefault((f.coeff, f.qpow.k, f.qpow.n), []).append((f.qpow.c, e))
            if f.length is not None:
                top = f.qpow + f.length
                groups.setdefault((f.coeff, top.k, top.n), []).append((top.c, -e))
    for (coeff, ak, an), items in groups.items():
        if sum(e for _, e in items) != 0:
            raise NotRational(f"unbalanced infinite factors with argument {coeff}")
        g0 = min(c for c, _ in items)
        base = LinForm(ak, an, g0)
        for c, e in items:
            if c != g0 and e:
                # (u q^c)_inf = (u q^g0)_inf * ratio(u q^g0, c - g0)
                out = out * _inf_ratio(coeff, base, c - g0) ** e
    return out


def shift_ratio_k(t: QHyperTerm) -> RatFunc:
    """``T(n, k+1) / T(n, k)`` as a rational function of x, y and parameters."""
    return quotient(t.shift(1, 0), t)


def shift_ratio_n(t: QHyperTerm) -> RatFunc:
    """``T(n+1, k) / T(n, k)``."""
    return quotient(t.shift(0, 1), t)


def reflect_k(t: QHyperTerm) -> QHyperTerm:
    """The term ``m -> T(n, -m)`` rewritten with nonnegative factorial lengths.

    Factors ``(u;q)_{c-m}`` with ``u`` free of the summation index are turned into
    ``(-q/u)^N q^C(N,2) / (q/u;q)_N`` with ``N = m - c``.
    """
    pre = t.prefactor.subs("x", RatFunc.var("x").inverse())
    powers = [(a, e.reflect_k()) for a, e in t.powers]
    qexp = t.qexp.reflect_k()
    sign = t.sign.reflect_k()
    facs = []
    for f in t.factors:
        qp = f.qpow.reflect_k()
        length = None if f.length is None else f.length.reflect_k()
        if length is None or length.k >= 0:
            facs.append(PochFactor(f.coeff, qp, length, f.exponent))
            continue
        if length.k != -1 or qp.k != 0:
            raise UnsupportedTerm("reflection needs factors of the form (u;q)_(c-m) with u free of k")
        big_n = -length                             # N = -(reflected length) = m - c
        inv = Mono.make(1 / f.coeff.coeff, {k: -v for k, v in f.coeff.exps})
        e = f.exponent
        # (-q/u)^N : sign N, letters of 1/coeff to the N, q^((1 - qpow) N)
        sign = sign + big_n * e
        if inv.coeff < 0:
            sign = sign + big_n * e
        if abs(inv.coeff) != 1:
            powers.append((abs(inv.coeff), big_n * e))
        for l2, e2 in inv.exps:
            powers.append((l2, big_n * (e2 * e)))
        qexp = qexp + QuadForm.product(LinForm(0, -qp.n, 1 - qp.c), big_n * e)
        # q^C(N,2) with N = m + (n_coef*n - c); C(u+v,2) = C(u,2)+C(v,2)+u*v
        v = LinForm(0, big_n.n, big_n.c)
        qexp = qexp + QuadForm(e, 0, 0) + _binom2_lin(v, e) + QuadForm.product(LinForm(1, 0, 0), v * e)
        facs.append(PochFactor(inv, LinForm(0, -qp.n, 1 - qp.c), big_n, -e))
    return QHyperTerm.build(pre, tuple(powers), qexp, sign, tuple(facs))


def _binom2_lin(v: LinForm, e: int) -> QuadForm:
    """``e * C(v, 2)`` for ``v = beta*n + gamma`` (no k part)."""
    if v.k:
        raise UnsupportedTerm("binomial of a k-dependent form")
    # C(beta n + g, 2) = beta^2 n^2/2 + (2 beta g - beta) n /2 + C(g,2)
    #                  = beta^2 C(n,2) + (beta^2 + 2 beta g - beta)/2 * n + C(g,2)
    b, g = v.n, v.c
    lin_n = (b * b + 2 * b * g - b) // 2
    return QuadForm(0, 0, e * b * b, LinForm(0, e * lin_n, e * _binom2(g)))
