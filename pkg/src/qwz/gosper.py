"""q-analogue of Gosper's algorithm over the rational functions in ``x = q^k``.

Given ``r(x) = t(k+1)/t(k)`` we look for a rational ``y`` with
``r(x) y(qx) - y(x) = 1``; then ``Z(k) = y(q^k) t(k)`` satisfies
``Z(k+1) - Z(k) = t(k)``.

With the normal form ``r = a(x)/b(x) * c(qx)/c(x)`` and the ansatz
``y(x) = b(x/q) f(x) / c(x)`` the equation becomes

    a(x) f(qx) - b(x/q) f(x) = c(x)

for a Laurent polynomial ``f``, whose degree range follows from comparing the
leading and trailing coefficients on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .exactnum import VARS, MultiPoly, RatFunc, q_resultant_roots
from .terms import QHyperTerm, shift_ratio_k, shift_ratio_n


@dataclass(frozen=True)
class GosperNormalForm:
    a_poly: MultiPoly
    b_poly: MultiPoly
    c_poly: MultiPoly
    main: str = "x"

    def ratio(self) -> RatFunc:
        c = RatFunc(self.c_poly, 1, self.main)
        return RatFunc(self.a_poly, self.b_poly, self.main) * c.q_scale(self.main, 1) / c


@dataclass(frozen=True)
class GosperCertificate:
    y_rat: RatFunc
    main: str = "x"
    normal_form: Optional[GosperNormalForm] = None
    degree_range: tuple[int, int] = (0, -1)


def _poly_of(r: RatFunc) -> MultiPoly:
    """Numerator of ``r`` after checking its denominator is free of x and y."""
    if {"x", "y"} & r.den.variables():
        raise ValueError("expected a polynomial up to a constant factor")
    return r.num


def _strip(p: MultiPoly, main: str) -> tuple[MultiPoly, int]:
    o = p.order(main)
    return (p.divide_var_power(main, o), o) if o > 0 else (p, 0)


def gosper_normal_form(r: RatFunc, main: str = "x") -> GosperNormalForm:
    """Decompose ``r`` so that ``gcd(a(x), b(q^j x))`` is free of ``main`` for all j >= 0."""
    r = RatFunc.lift(r)
    if r.is_zero():
        raise ValueError("zero ratio")
    num, m1 = _strip(r.num, main)
    den, m2 = _strip(r.den, main)
    a, b = num, den
    c = MultiPoly.const(1)
    while True:
        js = sorted(q_resultant_roots(a, b, main))
        progressed = False
        for j in js:
            g = a.gcd(_poly_of(b.q_scale(main, j)))
            if g.degree(main) <= 0:
                continue
            a = a.exquo(g)
            # g(q^-j x) divides b up to a power of q
            b = b.exquo(_poly_of(g.q_scale(main, -j)))
            for i in range(1, j + 1):
                c = c * _poly_of(g.q_scale(main, -i))
            progressed = True
            break
        if not progressed:
            break
    m = m1 - m2
    xm = MultiPoly.monomial({main: abs(m)})
    if m > 0:
        a = a * xm
    elif m < 0:
        b = b * xm
    nf = GosperNormalForm(a, b, c, main)
    # fold the x-free constant left over by the q-power bookkeeping into a, b
    k = r / nf.ratio()
    if main in k.variables():
        raise AssertionError("normal form reconstruction failed")
    return GosperNormalForm(a * k.num, b * k.den, c, main)


def _q_power_of(r: RatFunc) -> Optional[int]:
    """``d`` if ``r == q**d`` exactly, else None."""
    if len(r.num.terms()) != 1 or len(r.den.terms()) != 1:
        return None
    (mn, cn), = r.num.terms()
    (md, cd), = r.den.terms()
    if cn != cd:
        return None
    d = 0
    for i, v in enumerate(VARS):
        e = mn[i] - md[i]
        if v == "q":
            d = e
        elif e:
            return None
    return d


def _degree_candidates(A, B, C, main) -> Optional[tuple[int, int]]:
    dA, dB, dC = A.degree(main), B.degree(main), C.degree(main)
    oA, oB, oC = A.order(main), B.order(main), C.order(main)
    if dA != dB:
        hi = dC - max(dA, dB)
    else:
        hi = dC - dA
        d = _q_power_of(RatFunc(B.lc_in(main), 1) / RatFunc(A.lc_in(main), 1))
        if d is not None:
            hi = max(hi, d)
    if oA != oB:
        lo = oC - min(oA, oB)
    else:
        lo = oC - oA
        d = _q_power_of(RatFunc(B.tc_in(main), 1) / RatFunc(A.tc_in(main), 1))
        if d is not None:
            lo = min(lo, d)
    return lo, hi


def _solve_linear(rows: list[list[MultiPoly]], rhs: list[MultiPoly]) -> Optional[list[RatFunc]]:
    """Fraction-free elimination; free unknowns are set to zero."""
    m = [r[:] + [b] for r, b in zip(rows, rhs)]
    ncols = len(rows[0]) if rows else 0
    pivots = []
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, len(m)) if not m[i][col].is_zero()), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        p = m[row][col]
        for i in range(len(m)):
            if i == row or m[i][col].is_zero():
                continue
            f = m[i][col]
            g = p.gcd(f)
            pg, fg = p.exquo(g), f.exquo(g)
            new = [pg * u - fg * v for u, v in zip(m[i], m[row])]
            cont = None
            for e in new:
                if not e.is_zero():
                    cont = e if cont is None else cont.gcd(e)
            if cont is not None and not cont.is_const():
                new = [e.exquo(cont) for e in new]
            m[i] = new
        pivots.append((row, col))
        row += 1
        if row == len(m):
            break
    for i in range(row, len(m)):
        if not m[i][-1].is_zero():
            return None
    sol = [RatFunc(0)] * ncols
    for r, c in pivots:
        sol[c] = RatFunc(m[r][-1], m[r][c])
    return sol


def qgosper_solve(r: RatFunc, main: str = "x") -> Optional[GosperCertificate]:
    """Rational ``y`` with ``r(x) y(qx) - y(x) = 1``, or None when none exists."""
    r = RatFunc.lift(r)
    nf = gosper_normal_form(r, main)
    A = nf.a_poly
    Br = nf.b_poly.q_scale(main, -1)       # b(x/q) = B / q^s
    B = _poly_of(Br)
    Bs = RatFunc(1, Br.den)                # constant 1/q^s
    C = nf.c_poly
    # A f(qx) - Bs * B f(x) = C ; clear Bs by scaling A and C
    A2 = A * Bs.den
    C2 = C * Bs.den
    B2 = B * Bs.num
    lo, hi = _degree_candidates(A2, B2, C2, main)
    if hi < lo:
        return None
    ca, cb, cc = A2.coeffs_in(main), B2.coeffs_in(main), C2.coeffs_in(main)
    degs = list(range(lo, hi + 1))
    exps = set()
    for d in degs:
        exps |= {d + e for e in ca} | {d + e for e in cb}
    exps |= set(cc)
    # coefficient of x^m in A f(qx) - B f(x); scaled by q^shift so negative d stay polynomial
    qv = MultiPoly.var("q")
    zero = MultiPoly()
    shift = max(0, -lo)
    qs = qv ** shift
    ms = sorted(exps)
    rows = [[ca.get(m_ - d, zero) * qv ** (d + shift) - cb.get(m_ - d, zero) * qs for d in degs]
            for m_ in ms]
    rhs = [cc.get(m_, zero) * qs for m_ in ms]
    sol = _solve_linear(rows, rhs)
    if sol is None:
        return None
    f = RatFunc(0)
    xv = RatFunc.var(main)
    for d, coef in zip(degs, sol):
        if not coef.is_zero():
            f = f + coef * xv ** d
    y = Br * f / RatFunc(C, 1, main)
    check = r * y.q_scale(main, 1) - y - 1
    if not check.is_zero():
        raise AssertionError("q-Gosper certificate failed its exact post-check")
    return GosperCertificate(y, main, nf, (lo, hi))


@dataclass(frozen=True)
class Antidifference:
    cert: RatFunc
    term: QHyperTerm
    index: str


def antidifference(t: QHyperTerm, index: str = "k") -> Optional[Antidifference]:
    """``Z = cert * t`` with ``Z(j+1) - Z(j) = t(j)`` in the given index, or None."""
    main = "x" if index == "k" else "y"
    r = shift_ratio_k(t) if index == "k" else shift_ratio_n(t)
    if r.is_zero():
        return None
    sol = qgosper_solve(r, main)
    if sol is None:
        return None
    return Antidifference(sol.y_rat, t.with_prefactor(sol.y_rat), index)
