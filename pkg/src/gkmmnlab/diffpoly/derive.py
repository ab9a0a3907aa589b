"""Derive the evolution system encoded by an ``(L, H, f)`` triple.

The identity solved is ``L_t = [H, L] - f L`` with ``[H, L] = H∘L - L∘H``,
the ordering under which ``L psi = 0`` and ``psi_t = H psi`` are compatible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import (DiffPolynomial, OperatorExpr, RewriteRule, Sym, commutator, compose,
                      d_dt, div_coeff, reduce)


class DerivationError(ValueError):
    def __init__(self, message: str, residual: OperatorExpr):
        super().__init__(f"{message}; residual operator: {residual}")
        self.residual = residual


@dataclass(frozen=True)
class Evolution:
    lhs: Sym
    rhs: DiffPolynomial
    raw: DiffPolynomial

    def residual(self) -> DiffPolynomial:
        return DiffPolynomial.sym(self.lhs) - self.rhs

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class TripleResult:
    f: DiffPolynomial
    constraints: list
    evolution: list
    rules: list = field(default_factory=list)
    remainder: OperatorExpr = field(default_factory=OperatorExpr)

    def evolution_for(self, name: str) -> Evolution:
        for ev in self.evolution:
            if ev.lhs.name == name:
                return ev
        raise KeyError(name)

    def reduce(self, p: DiffPolynomial) -> DiffPolynomial:
        return reduce(p, self.rules)


def _principal(L: OperatorExpr):
    top = L.order()
    keys = [k for k in L.keys() if sum(k) == top]
    if len(keys) != 1:
        raise DerivationError("L must have a single principal monomial", L)
    c = L[keys[0]].constant_value()
    if c is None or c == 0:
        raise DerivationError("principal coefficient of L must be a nonzero constant", L)
    return keys[0], c


def _solve_constraint(p: DiffPolynomial, dependent: set):
    """Pick a linear, constant-coefficient symbol of a dependent field and solve for it."""
    candidates = []
    for m, c in p.items():
        if len(m) == 1 and m[0][1] == 1 and m[0][0].name in dependent:
            other = [s for mm in p.terms if mm != m for s, _ in mm]
            if m[0][0] not in other:
                candidates.append((m[0][0], c))
    if not candidates:
        return p, None
    s, c = min(candidates, key=lambda sc: (sc[0].order, sc[0]))
    normalized = p.scale(div_coeff(1, c))
    rhs = DiffPolynomial.sym(s) - normalized
    return normalized, RewriteRule(s, rhs)


def derive_triple(L: OperatorExpr, H: OperatorExpr) -> TripleResult:
    """Constraints, multiplier and evolution equations implied by ``L_t = [H,L] - f L``."""
    lead, lead_c = _principal(L)
    R = commutator(H, L)
    if R.order() > L.order():
        raise DerivationError(f"[H,L] has order {R.order()} > order of L; no scalar multiplier", R)
    f = R[lead].scale(div_coeff(1, lead_c))
    rem = R - compose(OperatorExpr.mult(f), L)

    l_names = set()
    for p in L.coeffs.values():
        l_names |= p.names()
    dependent = set()
    for p in H.coeffs.values():
        dependent |= p.names()
    dependent -= l_names

    raw_evolution = []
    constraints = []
    for key in sorted(set(rem.coeffs) | set(L.coeffs), key=lambda k: (-(k[0] + k[1]), -k[0])):
        if key == lead:
            continue
        coeff = L[key]
        if key in L.coeffs and coeff.constant_value() is None:
            if len(coeff.terms) != 1:
                raise DerivationError(f"coefficient {coeff} of L is not a single field", rem)
            (m, c), = coeff.terms.items()
            if len(m) != 1 or m[0][1] != 1 or m[0][0].order:
                raise DerivationError(f"coefficient {coeff} of L is not a single field", rem)
            raw_evolution.append((m[0][0].d("t"), rem[key].scale(div_coeff(1, c))))
        elif not rem[key].is_zero():
            constraints.append(rem[key])

    rules = []
    normalized = []
    for p in constraints:
        q, rule = _solve_constraint(p, dependent)
        normalized.append(q)
        if rule is not None:
            rules.append(rule)
    evolution = [Evolution(lhs, reduce(rhs, rules), rhs) for lhs, rhs in raw_evolution]
    check = d_dt(L)
    for ev in evolution:
        if ev.lhs.base.name not in {s.name for p in check.coeffs.values() for s in p.symbols()}:
            raise DerivationError(f"{ev.lhs} does not appear in L_t", rem)
    return TripleResult(f=reduce(f, rules), constraints=normalized, evolution=evolution,
                        rules=rules, remainder=rem)
