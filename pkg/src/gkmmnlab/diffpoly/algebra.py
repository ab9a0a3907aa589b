"""Exact differential polynomials and linear differential operators.

A :class:`DiffPolynomial` is a finite sum of exact-coefficient Laurent
monomials in jet symbols ``name_{t^a x^b y^c}``.  Negative exponents are the
formal inverses (``c^-1``), so ``d/dx c^-1 = -c^-2 c_x`` with no polynomial
division ever needed.  An :class:`OperatorExpr` maps ``(a, b)`` (meaning
``Dx^a Dy^b``) to a coefficient polynomial; coefficients act on the left.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb
from typing import Iterable, Mapping, Union

VARS = ("t", "x", "y")


class QI:
    """Gaussian rational ``re + im*I`` with exact parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def make(re, im):
        im = Fraction(im)
        if im == 0:
            return Fraction(re)
        return QI(re, im)

    @staticmethod
    def parts(v):
        if isinstance(v, QI):
            return v.re, v.im
        return Fraction(v), Fraction(0)

    def __add__(self, o):
        a, b = QI.parts(o)
        return QI.make(self.re + a, self.im + b)

    __radd__ = __add__

    def __neg__(self):
        return QI.make(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-QI(*QI.parts(o)))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        a, b = QI.parts(o)
        return QI.make(self.re * a - self.im * b, self.re * b + self.im * a)

    __rmul__ = __mul__

    def __truediv__(self, o):
        a, b = QI.parts(o)
        den = a * a + b * b
        return QI.make((self.re * a + self.im * b) / den, (self.im * a - self.re * b) / den)

    def __rtruediv__(self, o):
        return QI(*QI.parts(o)) / self

    def __eq__(self, o):
        try:
            return (self.re, self.im) == QI.parts(o)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QI({self.re}, {self.im})"


Coeff = Union[Fraction, QI]


def _coeff(v) -> Coeff:
    if isinstance(v, (QI, Fraction)):
        return v
    if isinstance(v, complex):
        return QI.make(Fraction(v.real), Fraction(v.imag))
    return Fraction(v)


def div_coeff(a: Coeff, b: Coeff) -> Coeff:
    if isinstance(a, QI) or isinstance(b, QI):
        return QI(*QI.parts(a)) / b
    return Fraction(a) / Fraction(b)


def format_coeff(c: Coeff) -> str:
    if isinstance(c, QI):
        mag = abs(c.im)
        im = "I" if mag == 1 else f"{mag}*I"
        if c.re == 0:
            return f"({'-' if c.im < 0 else ''}{im})"
        return f"({c.re} {'-' if c.im < 0 else '+'} {im})"
    return str(c)


@dataclass(frozen=True, order=True)
class Sym:
    """Jet symbol: ``name`` differentiated ``dt`` times in t, ``dx`` in x, ``dy`` in y."""

    name: str
    dt: int = 0
    dx: int = 0
    dy: int = 0

    def d(self, var: str, n: int = 1) -> "Sym":
        counts = {"t": self.dt, "x": self.dx, "y": self.dy}
        counts[var] += n
        return Sym(self.name, counts["t"], counts["x"], counts["y"])

    @property
    def base(self) -> "Sym":
        return Sym(self.name)

    @property
    def order(self) -> int:
        return self.dt + self.dx + self.dy

    def __str__(self):
        sub = "t" * self.dt + "x" * self.dx + "y" * self.dy
        return f"{self.name}_{sub}" if sub else self.name


Monomial = tuple  # tuple[tuple[Sym, int], ...], sorted, nonzero exponents


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for s, e in b:
        exps[s] = exps.get(s, 0) + e
    return tuple(sorted((s, e) for s, e in exps.items() if e))


class DiffPolynomial:
    """Immutable normalized sum of monomials with exact coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Coeff] | None = None):
        clean = {}
        for m, c in (terms or {}).items():
            c = _coeff(c)
            if c != 0:
                clean[m] = c
        self._terms = clean
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c) -> "DiffPolynomial":
        return cls({(): c})

    @classmethod
    def sym(cls, s: Union[Sym, str], power: int = 1) -> "DiffPolynomial":
        if isinstance(s, str):
            s = Sym(s)
        if power == 0:
            return cls.const(1)
        return cls({((s, power),): 1})

    @classmethod
    def coerce(cls, v) -> "DiffPolynomial":
        if isinstance(v, DiffPolynomial):
            return v
        if isinstance(v, Sym):
            return cls.sym(v)
        return cls.const(v)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: _mono_key(kv[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def constant_value(self):
        """The coefficient if this is a constant polynomial, else ``None``."""
        if not self._terms:
            return Fraction(0)
        if set(self._terms) == {()}:
            return self._terms[()]
        return None

    def symbols(self) -> set:
        return {s for m in self._terms for s, _ in m}

    def names(self) -> set:
        return {s.name for s in self.symbols()}

    # arithmetic
    def __add__(self, other):
        other = DiffPolynomial.coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return DiffPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPolynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-DiffPolynomial.coerce(other))

    def __rsub__(self, other):
        return DiffPolynomial.coerce(other) - self

    def __mul__(self, other):
        other = DiffPolynomial.coerce(other)
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return DiffPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = DiffPolynomial.const(1)
        for _ in range(n):
            out = out * self
        return out

    def inverse(self) -> "DiffPolynomial":
        """Formal inverse; defined only for single monomials."""
        if len(self._terms) != 1:
            raise ValueError(f"cannot invert non-monomial {self}")
        (m, c), = self._terms.items()
        return DiffPolynomial({tuple((s, -e) for s, e in m): div_coeff(1, c)})

    def scale(self, c) -> "DiffPolynomial":
        c = _coeff(c)
        return DiffPolynomial({m: v * c for m, v in self._terms.items()})

    def diff(self, var: str, n: int = 1) -> "DiffPolynomial":
        if var not in VARS:
            raise ValueError(f"unknown variable {var!r}")
        out = self
        for _ in range(n):
            out = out._diff1(var)
        return out

    def _diff1(self, var: str) -> "DiffPolynomial":
        acc: dict = {}
        for m, c in self._terms.items():
            for i, (s, e) in enumerate(m):
                rest = m[:i] + m[i + 1:]
                piece = _mono_mul(rest, ((s, e - 1),) if e != 1 else ())
                piece = _mono_mul(piece, ((s.d(var), 1),))
                acc[piece] = acc.get(piece, 0) + c * e
        return DiffPolynomial(acc)

    def map_symbols(self, fn) -> "DiffPolynomial":
        """Replace each symbol ``s`` by the polynomial ``fn(s)`` (raised to its exponent)."""
        out = DiffPolynomial()
        for m, c in self._terms.items():
            term = DiffPolynomial.const(c)
            for s, e in m:
                term = term * (DiffPolynomial.coerce(fn(s)) ** e)
            out = out + term
        return out

    # comparison / display
    def __eq__(self, other):
        if not isinstance(other, DiffPolynomial):
            try:
                other = DiffPolynomial.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.items():
            neg = not isinstance(c, QI) and c < 0
            mag = -c if neg else c
            factors = [_fmt_factor(s, e) for s, e in m]
            if mag != 1 or not factors:
                factors.insert(0, format_coeff(mag))
            parts.append(("- " if neg else "+ ") + "*".join(factors))
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self):
        return f"DiffPolynomial({str(self)!r})"


def _fmt_factor(s: Sym, e: int) -> str:
    return str(s) if e == 1 else f"{s}^{e}"


def _mono_key(m: Monomial):
    degree = sum(abs(e) for _, e in m)
    order = sum(s.order * abs(e) for s, e in m)
    return (-order, degree, tuple((s.name, s.dt, s.dx, s.dy, e) for s, e in m))


def sym(name: str, dt: int = 0, dx: int = 0, dy: int = 0) -> DiffPolynomial:
    return DiffPolynomial.sym(Sym(name, dt, dx, dy))


class OperatorExpr:
    """Linear differential operator ``sum_{(a,b)} P_ab * Dx^a Dy^b``."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[tuple, object] | None = None):
        clean = {}
        for k, p in (coeffs or {}).items():
            p = DiffPolynomial.coerce(p)
            if not p.is_zero():
                clean[(int(k[0]), int(k[1]))] = p
        self._coeffs = clean

    @classmethod
    def mult(cls, p) -> "OperatorExpr":
        return cls({(0, 0): p})

    @classmethod
    def identity(cls) -> "OperatorExpr":
        return cls.mult(1)

    @classmethod
    def dx(cls) -> "OperatorExpr":
        return cls({(1, 0): 1})

    @classmethod
    def dy(cls) -> "OperatorExpr":
        return cls({(0, 1): 1})

    @property
    def coeffs(self) -> dict:
        return dict(self._coeffs)

    def __getitem__(self, key) -> DiffPolynomial:
        return self._coeffs.get(tuple(key), DiffPolynomial())

    def keys(self):
        return sorted(self._coeffs, key=lambda k: (-(k[0] + k[1]), -k[0]))

    def is_zero(self) -> bool:
        return not self._coeffs

    def order(self) -> int:
        return max((a + b for a, b in self._coeffs), default=-1)

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        out = dict(self._coeffs)
        for k, p in other._coeffs.items():
            out[k] = out.get(k, DiffPolynomial()) + p
        return OperatorExpr(out)

    def __neg__(self):
        return OperatorExpr({k: -p for k, p in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def left_mul(self, p) -> "OperatorExpr":
        p = DiffPolynomial.coerce(p)
        return OperatorExpr({k: p * q for k, q in self._coeffs.items()})

    def __matmul__(self, other: "OperatorExpr") -> "OperatorExpr":
        return compose(self, other)

    def map_coeffs(self, fn) -> "OperatorExpr":
        return OperatorExpr({k: fn(p) for k, p in self._coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, OperatorExpr):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def __str__(self):
        if not self._coeffs:
            return "0"
        parts = []
        for k in self.keys():
            p = self._coeffs[k]
            d = _fmt_d(k)
            if not d:
                parts.append(str(p))
            elif p == 1:
                parts.append(d)
            elif p == -1:
                parts.append("-" + d)
            elif len(p.terms) == 1 and not str(p).startswith("-"):
                parts.append(f"{p}*{d}")
            else:
                parts.append(f"({p})*{d}")
        text = parts[0]
        for piece in parts[1:]:
            text += " - " + piece[1:] if piece.startswith("-") else " + " + piece
        return text

    def __repr__(self):
        return f"OperatorExpr({str(self)!r})"


def _fmt_d(k) -> str:
    a, b = k
    out = []
    if a:
        out.append("Dx" if a == 1 else f"Dx^{a}")
    if b:
        out.append("Dy" if b == 1 else f"Dy^{b}")
    return "*".join(out)


def compose(A: OperatorExpr, B: OperatorExpr) -> OperatorExpr:
    """``A∘B`` with the Leibniz rule moving derivatives past B's coefficients."""
    out: dict = {}
    for (a1, b1), p in A.coeffs.items():
        for (a2, b2), q in B.coeffs.items():
            for i, j in product(range(a1 + 1), range(b1 + 1)):
                w = comb(a1, i) * comb(b1, j)
                dq = q.diff("x", a1 - i).diff("y", b1 - j)
                if dq.is_zero():
                    continue
                key = (i + a2, j + b2)
                out[key] = out.get(key, DiffPolynomial()) + (p * dq).scale(w)
    return OperatorExpr(out)


def commutator(A: OperatorExpr, B: OperatorExpr) -> OperatorExpr:
    """``A∘B - B∘A``."""
    return compose(A, B) - compose(B, A)


def d_dt(A: OperatorExpr) -> OperatorExpr:
    """Differentiate every coefficient formally in t."""
    return A.map_coeffs(lambda p: p.diff("t"))


class IncompleteRulesError(KeyError):
    pass


def substitute(system: Iterable[DiffPolynomial], rules: Mapping) -> list:
    """Chain-rule substitution of base symbols.

    ``rules`` maps a base name (or zero-derivative :class:`Sym`) to a
    polynomial in new symbols; a derivative ``G_xy`` becomes the matching
    derivative of the rule for ``G``.
    """
    table = {}
    for k, v in rules.items():
        name = k.name if isinstance(k, Sym) else str(k)
        if isinstance(v, str):
            from .parser import parse_poly
            v = parse_poly(v)
        table[name] = DiffPolynomial.coerce(v)

    cache: dict = {}

    def image(s: Sym) -> DiffPolynomial:
        if s not in cache:
            if s.name not in table:
                raise IncompleteRulesError(f"no substitution rule for symbol {s.name!r}")
            cache[s] = table[s.name].diff("t", s.dt).diff("x", s.dx).diff("y", s.dy)
        return cache[s]

    return [DiffPolynomial.coerce(p).map_symbols(image) for p in system]


def drop_derivatives(p: DiffPolynomial, var: str) -> DiffPolynomial:
    """Set every symbol differentiated in ``var`` to zero."""
    out = {}
    for m, c in p.terms.items():
        if any(getattr(s, "d" + var) for s, _ in m):
            continue
        out[m] = c
    return DiffPolynomial(out)


@dataclass(frozen=True)
class RewriteRule:
    """``lhs = rhs`` closed under differentiation: any derivative of ``lhs`` is rewritten."""

    lhs: Sym
    rhs: DiffPolynomial

    def matches(self, s: Sym) -> bool:
        return (s.name == self.lhs.name and s.dt >= self.lhs.dt
                and s.dx >= self.lhs.dx and s.dy >= self.lhs.dy)

    def apply(self, s: Sym) -> DiffPolynomial:
        return (self.rhs.diff("t", s.dt - self.lhs.dt)
                .diff("x", s.dx - self.lhs.dx)
                .diff("y", s.dy - self.lhs.dy))

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"


def reduce(p: DiffPolynomial, rules: Iterable[RewriteRule], max_passes: int = 32) -> DiffPolynomial:
    """Normal form of ``p`` modulo derivative-closed rewrite rules."""
    rules = list(rules)

    def step(s: Sym):
        for r in rules:
            if r.matches(s):
                return r.apply(s)
        return DiffPolynomial.sym(s)

    for _ in range(max_passes):
        if not any(r.matches(s) for s in p.symbols() for r in rules):
            return p
        p = p.map_symbols(step)
    raise RuntimeError("rewrite rules did not terminate")


def proportionality(a: DiffPolynomial, b: DiffPolynomial):
    """Exact ``lam`` with ``a == lam*b``, or ``None`` when not proportional."""
    if b.is_zero():
        return Fraction(1) if a.is_zero() else None
    m, cb = next(iter(b.items()))
    ca = a.terms.get(m)
    if ca is None:
        return None
    lam = div_coeff(ca, cb)
    return lam if a == b.scale(lam) else None
