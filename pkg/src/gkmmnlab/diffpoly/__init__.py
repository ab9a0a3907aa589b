from .algebra import (QI, DiffPolynomial, IncompleteRulesError, OperatorExpr, RewriteRule, Sym,
                      commutator, compose, d_dt, drop_derivatives, proportionality, reduce,
                      substitute, sym)
from .derive import DerivationError, Evolution, TripleResult, derive_triple
from .parser import ParseError, UnknownTokenError, parse_operator, parse_poly

__all__ = [
    "QI", "DiffPolynomial", "IncompleteRulesError", "OperatorExpr", "RewriteRule", "Sym",
    "commutator", "compose", "d_dt", "drop_derivatives", "proportionality", "reduce",
    "substitute", "sym", "DerivationError", "Evolution", "TripleResult", "derive_triple", "ParseError", "UnknownTokenError", "parse_operator", "parse_poly",
]
