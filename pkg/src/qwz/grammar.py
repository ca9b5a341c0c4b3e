"""Text form of terms and rational expressions.

Term grammar::

    term    := ["-"] factor { ("*" | "/") factor }
    factor  := base [ "^" int ]
    base    := "poch" "(" mono ";" "q" ";" len ")"
             | "pow" "(" mono "," lin ")"
             | "qbin2" "(" ("k" | "n") ")"      q^C(k,2) (or q^C(n,2))
             | "qkn" "(" ")"                     q^(k*n)
             | "sgn" "(" ("k" | "n") ")"        (-1)^k
             | "rf" "(" ratexpr ")"              rational function of x=q^k, y=q^n
             | rat | "(" term ")"
    mono    := mitem { ("*" | "/") mitem }
    mitem   := integer | ident [ "^" int ] | "q" [ "^" qpow ] | "(" mono ")"
    qpow    := lin                              ("q^n-1", "q^(1-n)", "q^-2")
    len     := lin | "inf"
    lin     := integer-linear combination of k, n, 1   ("2*n", "k", "n-1")
    ident   := "a".."e" | "z"
    rat     := integer [ "/" positive-integer ]

``ratexpr`` is an ordinary arithmetic expression in x, y, q and the letters
with ``+ - * / ^`` and parentheses.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .exactnum import LETTERS, VARS, RatFunc, poly_to_text
from .terms import LinForm, Mono, PochFactor, QHyperTerm, QuadForm, lin_text


class TermSyntaxError(ValueError):
    """Malformed text; ``pos`` is the character offset of the problem."""

    def __init__(self, msg: str, pos: int, text: str = ""):
        super().__init__(f"{msg} at position {pos}" + (f": {text[:pos]}<here>{text[pos:]}" if text else ""))
        self.pos = pos


class UnknownIndeterminate(TermSyntaxError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^(),;]))")


def tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        if m.group(1):
            out.append(("int", m.group(1), m.start(1)))
        elif m.group(2):
            out.append(("name", m.group(2), m.start(2)))
        else:
            op = m.group(3)
            out.append(("op", "^" if op == "**" else op, m.start(3)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # helpers ----------------------------------------------------------
    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, val: str) -> bool:
        if self.peek()[1] == val and self.peek()[0] != "int":
            self.i += 1
            return True
        return False

    def expect(self, val: str):
        t = self.next()
        if t[1] != val or t[0] == "int":
            self.error(f"expected {val!r}, found {t[1] or 'end of input'!r}", t[2])
        return t

    def error(self, msg, pos=None):
        raise TermSyntaxError(msg, self.peek()[2] if pos is None else pos, self.text)

    def done(self):
        t = self.peek()
        if t[0] != "end":
            self.error(f"unexpected {t[1]!r}")

    def signed_int(self) -> int:
        sign = -1 if self.accept("-") else 1
        t = self.next()
        if t[0] != "int":
            self.error("expected integer", t[2])
        return sign * int(t[1])

    # linear forms -----------------------------------------------------
    def lin(self) -> LinForm:
        total = LinForm()
        sign = -1 if self.accept("-") else 1
        while True:
            total = total + self.lin_term() * sign
            if self.accept("+"):
                sign = 1
            elif self.peek()[1] == "-" and self.peek()[0] == "op":
                self.next()
                sign = -1
            else:
                return total

    def lin_term(self) -> LinForm:
        t = self.next()
        if t[0] == "int":
            c = int(t[1])
            if self.peek()[1] == "*" and self.toks[self.i + 1][1] in ("k", "n"):
                self.next()
                v = self.next()
                if v[1] == "k":
                    return LinForm(c, 0, 0)
                if v[1] == "n":
                    return LinForm(0, c, 0)
                self.error("expected k or n", v[2])
            return LinForm(0, 0, c)
        if t[1] == "k":
            return LinForm(1, 0, 0)
        if t[1] == "n":
            return LinForm(0, 1, 0)
        if t[1] == "(":
            f = self.lin()
            self.expect(")")
            return f
        self.error("expected linear form in k, n", t[2])

    # monomials --------------------------------------------------------
    def mono(self) -> tuple[Mono, LinForm]:
        m, qp = self.mitem()
        while True:
            if self.accept("*"):
                m2, q2 = self.mitem()
                m, qp = m * m2, qp + q2
            elif self.peek()[1] == "/" and self.peek()[0] == "op":
                self.next()
                m2, q2 = self.mitem()
                m, qp = m * m2 ** -1, qp - q2
            else:
                return m, qp

    def mitem(self) -> tuple[Mono, LinForm]:
        t = self.next()
        if t[0] == "int":
            return Mono.make(int(t[1])), LinForm()
        if t[1] == "-":
            m, qp = self.mitem()
            return Mono.make(-m.coeff, m.as_dict()), qp
        if t[1] == "(":
            m, qp = self.mono()
            self.expect(")")
            if self.accept("^"):
                s = self.signed_int()
                return m ** s, qp * s
            return m, qp
        if t[1] == "q":
            if self.accept("^"):
                return Mono.make(1), self.qpow()
            return Mono.make(1), LinForm(0, 0, 1)
        if t[1] in LETTERS:
            e = self.signed_int() if self.accept("^") else 1
            return Mono.make(1, {t[1]: e}), LinForm()
        if t[0] == "name":
            raise UnknownIndeterminate(f"unknown indeterminate {t[1]!r}", t[2], self.text)
        self.error(f"unexpected {t[1]!r} in monomial", t[2])

    def qpow(self) -> LinForm:
        return self.lin()

    # terms ------------------------------------------------------------
    def term(self) -> QHyperTerm:
        neg = self.accept("-")
        out = self.factor()
        while True:
            if self.accept("*"):
                out = out * self.factor()
            elif self.peek()[1] == "/" and self.peek()[0] == "op":
                self.next()
                out = out * self.factor().inverse()
            else:
                break
        return out.with_prefactor(-1) if neg else out

    def factor(self) -> QHyperTerm:
        base = self.base()
        if self.accept("^"):
            return base ** self.signed_int()
        return base

    def base(self) -> QHyperTerm:
        t = self.next()
        if t[0] == "int":
            v = Fraction(int(t[1]))
            # rat := integer / positive-integer when directly followed by an integer
            if self.peek()[1] == "/" and self.toks[self.i + 1][0] == "int":
                self.next()
                v = v / int(self.next()[1])
            return QHyperTerm.build(RatFunc(v))
        name = t[1]
        if name == "(":
            inner = self.term()
            self.expect(")")
            return inner
        if name == "poch":
            self.expect("(")
            m, qp = self.mono()
            self.expect(";")
            self.expect("q")
            self.expect(";")
            if self.accept("inf"):
                length = None
            else:
                length = self.lin()
            self.expect(")")
            return QHyperTerm.build(factors=[PochFactor(m, qp, length, 1)])
        if name == "pow":
            self.expect("(")
            m, qp = self.mono()
            self.expect(",")
            ex = self.lin()
            self.expect(")")
            return _power_term(m, qp, ex)
        if name in ("qbin2", "sgn"):
            self.expect("(")
            v = self.next()
            if v[1] not in ("k", "n"):
                self.error("expected k or n", v[2])
            self.expect(")")
            if name == "qbin2":
                qf = QuadForm(1, 0, 0) if v[1] == "k" else QuadForm(0, 0, 1)
                return QHyperTerm.build(qexp=qf)
            return QHyperTerm.build(sign=LinForm(1, 0, 0) if v[1] == "k" else LinForm(0, 1, 0))
        if name == "qkn":
            self.expect("(")
            self.expect(")")
            return QHyperTerm.build(qexp=QuadForm(0, 1, 0))
        if name == "rf":
            self.expect("(")
            r = _ExprParser(self).expr()
            self.expect(")")
            return QHyperTerm.build(r)
        if t[0] == "name":
            raise UnknownIndeterminate(f"unknown name {name!r}", t[2], self.text)
        self.error(f"unexpected {name or 'end of input'!r}", t[2])


def _power_term(m: Mono, qp: LinForm, ex: LinForm) -> QHyperTerm:
    powers = [(l, ex * e) for l, e in m.exps]
    sign = LinForm()
    c = m.coeff
    if c < 0:
        sign = ex
        c = -c
    if c != 1:
        powers.append((c, ex))
    return QHyperTerm.build(powers=powers, qexp=QuadForm.product(qp, ex), sign=sign)


class _ExprParser:
    """Arithmetic expressions over VARS producing RatFunc; shares the tokenizer."""

    def __init__(self, p: _Parser):
        self.p = p

    def expr(self) -> RatFunc:
        p = self.p
        neg = p.accept("-")
        acc = self.prod()
        if neg:
            acc = -acc
        while True:
            if p.accept("+"):
                acc = acc + self.prod()
            elif p.peek()[1] == "-" and p.peek()[0] == "op":
                p.next()
                acc = acc - self.prod()
            else:
                return acc

    def prod(self) -> RatFunc:
        p = self.p
        acc = self.power()
        while True:
            if p.accept("*"):
                acc = acc * self.power()
            elif p.peek()[1] == "/" and p.peek()[0] == "op":
                p.next()
                acc = acc / self.power()
            else:
                return acc

    def power(self) -> RatFunc:
        p = self.p
        base = self.atom()
        if p.accept("^"):
            return base ** p.signed_int()
        return base

    def atom(self) -> RatFunc:
        p = self.p
        t = p.next()
        if t[0] == "int":
            return RatFunc(int(t[1]))
        if t[1] == "(":
            r = self.expr()
            p.expect(")")
            return r
        if t[1] == "-":
            return -self.power()
        if t[0] == "name":
            if t[1] in VARS and t[1] != "t":
                return RatFunc.var(t[1])
            raise UnknownIndeterminate(f"unknown indeterminate {t[1]!r}", t[2], p.text)
        p.error(f"unexpected {t[1] or 'end of input'!r}", t[2])


def parse_term(text: str) -> QHyperTerm:
    """Parse the term grammar into a canonical :class:`QHyperTerm`."""
    p = _Parser(text)
    t = p.term()
    p.done()
    return t


def parse_mono(text: str) -> tuple[Mono, LinForm]:
    """``c * letters * q^L`` as a (Mono, LinForm) pair, e.g. ``"q/a"``."""
    p = _Parser(text)
    m = p.mono()
    p.done()
    return m


def parse_ratfunc(text: str) -> RatFunc:
    """Parse an arithmetic expression in x, y, q and the letters."""
    p = _Parser(text)
    r = _ExprParser(p).expr()
    p.done()
    return r


def parse_rational(text: str) -> Fraction:
    """``p/q`` or integer literal (also accepts decimals such as ``1e-30``)."""
    try:
        return Fraction(text.strip())
    except ValueError as exc:
        raise TermSyntaxError(f"bad rational literal {text!r}", 0) from exc


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _rat_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def ratfunc_text(r: RatFunc) -> str:
    if r.den.is_const() and r.den.const_value() == 1:
        return poly_to_text(r.num)
    return f"({poly_to_text(r.num)})/({poly_to_text(r.den)})"


def _qpow_text(f: LinForm) -> str:
    if f == LinForm(0, 0, 1):
        return "q"
    if f in (LinForm(1, 0, 0), LinForm(0, 1, 0)) or (f.is_const() and f.c > 0):
        return f"q^{lin_text(f)}"
    return f"q^({lin_text(f)})"


def mono_text(m: Mono, qpow: LinForm = LinForm()) -> str:
    items = []
    if m.coeff != 1 or (not m.exps and qpow == LinForm()):
        items.append(_rat_text(m.coeff) if m.coeff >= 0 else f"({_rat_text(m.coeff)})")
    for name, e in m.exps:
        items.append(name if e == 1 else f"{name}^{e}")
    if qpow != LinForm():
        items.append(_qpow_text(qpow))
    return "*".join(items)


def print_term(t: QHyperTerm) -> str:
    """Canonical grammar text; ``parse_term(print_term(t)) == t``."""
    parts = []
    pre = t.prefactor
    lead = ""
    if pre.is_const():
        c = pre.const_value()
        if c < 0:
            lead, c = "-", -c
        if c != 1:
            parts.append(_rat_text(c))
    else:
        parts.append(f"rf({ratfunc_text(pre)})")
    if t.sign.k:
        parts.append("sgn(k)")
    if t.sign.n:
        parts.append("sgn(n)")
    qx = t.qexp
    if qx.kk:
        parts.append("qbin2(k)" + (f"^{qx.kk}" if qx.kk != 1 else ""))
    if qx.nn:
        parts.append("qbin2(n)" + (f"^{qx.nn}" if qx.nn != 1 else ""))
    if qx.kn:
        parts.append("qkn()" + (f"^{qx.kn}" if qx.kn != 1 else ""))
    if qx.lin != LinForm():
        parts.append(f"pow(q,{lin_text(qx.lin)})")
    for atom, ex in t.powers:
        base = atom if isinstance(atom, str) else _rat_text(atom)
        parts.append(f"pow({base},{lin_text(ex)})")
    for f in t.factors:
        length = "inf" if f.length is None else lin_text(f.length)
        s = f"poch({mono_text(f.coeff, f.qpow)};q;{length})"
        if f.exponent != 1:
            s += f"^{f.exponent}"
        parts.append(s)
    if not parts:
        parts.append("1")
    return lead + "*".join(parts)


def _pretty_lin(f: LinForm) -> str:
    s = lin_text(f)
    return s if len(s) == 1 else "{" + s + "}"


def pretty_mono(m: Mono, qpow: LinForm) -> str:
    num, den = [], []
    lead = "-" if m.coeff < 0 else ""
    if abs(m.coeff.numerator) != 1:
        num.append(str(abs(m.coeff.numerator)))
    if m.coeff.denominator != 1:
        den.append(str(m.coeff.denominator))
    for name, e in m.exps:
        (num if e > 0 else den).append(name if abs(e) == 1 else f"{name}^{abs(e)}")
    if qpow != LinForm():
        num.append("q" if qpow == LinForm(0, 0, 1) else f"q^{_pretty_lin(qpow)}")
    top = lead + ("".join(num) or "1")
    return top if not den else f"{top}/{''.join(den)}"


def pretty_term(t: QHyperTerm) -> str:
    """Human rendering in the usual notation, e.g. ``(a;q)_k z^k / (q;q)_k``."""
    num, den = [], []
    pre = t.prefactor
    if not (pre.is_const() and pre.const_value() == 1):
        num.append(f"[{ratfunc_text(pre)}]")
    if t.sign.k:
        num.append("(-1)^k")
    if t.sign.n:
        num.append("(-1)^n")
    if t.qexp.kk:
        num.append("q^{" + ("" if t.qexp.kk == 1 else f"{t.qexp.kk}*") + "C(k,2)}")
    if t.qexp.nn:
        num.append("q^{" + ("" if t.qexp.nn == 1 else f"{t.qexp.nn}*") + "C(n,2)}")
    if t.qexp.kn:
        num.append("q^{" + {1: "", -1: "-"}.get(t.qexp.kn, f"{t.qexp.kn}*") + "kn}")
    if t.qexp.lin != LinForm():
        num.append(f"q^{_pretty_lin(t.qexp.lin)}")
    for atom, ex in t.powers:
        base = atom if isinstance(atom, str) else f"({_rat_text(atom)})"
        num.append(f"{base}^{_pretty_lin(ex)}")
    for f in t.factors:
        length = "inf" if f.length is None else _pretty_lin(f.length)
        s = f"({pretty_mono(f.coeff, f.qpow)};q)_{length}"
        e = abs(f.exponent)
        if e != 1:
            s += f"^{e}"
        (num if f.exponent > 0 else den).append(s)
    top = " ".join(num) or "1"
    return top if not den else f"{top} / ({' '.join(den)})"
