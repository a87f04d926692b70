"""Rational similarity invariants of square matrices.

Characteristic polynomials are factored with sympy over the rationals; the
block structure for each irreducible factor q is read off the ranks of the
powers q(M)^k, which are computed exactly with QMatrix.
"""

from __future__ import annotations

from fractions import Fraction

import sympy

from .exactcore import QMatrix

__all__ = ["charpoly", "elementary_divisors", "invariant_factors", "similarity_invariants", "same_similarity_class"]

_x = sympy.Symbol("x")


def _to_sympy(M: QMatrix):
    return sympy.Matrix(M.rows, M.cols, [sympy.Rational(a.numerator, a.denominator) for row in M.tolist() for a in row])


def _coeffs(poly) -> tuple:
    return tuple(Fraction(int(c.p), int(c.q)) for c in sympy.Poly(poly, _x, domain="QQ").all_coeffs())


def charpoly(M: QMatrix) -> tuple:
    """Monic characteristic polynomial, coefficients from the leading one down."""
    if M.rows == 0:
        return (Fraction(1),)
    return _coeffs(_to_sympy(M).charpoly(_x).as_expr())


def _poly_at(coeffs, M: QMatrix) -> QMatrix:
    out = QMatrix.zeros(M.rows, M.cols)
    I = QMatrix.identity(M.rows)
    for a in coeffs:
        out = out @ M + I.scale(a)
    return out


def elementary_divisors(M: QMatrix):
    """Sorted list of (irreducible factor coefficients, block sizes descending)."""
    if M.rows == 0:
        return []
    poly = sympy.Poly(_to_sympy(M).charpoly(_x).as_expr(), _x, domain="QQ")
    _, factors = sympy.factor_list(poly.as_expr(), _x, domain="QQ")
    out = []
    for q, mult in factors:
        qc = _coeffs(sympy.Poly(q, _x).monic().as_expr())
        deg = len(qc) - 1
        Q = _poly_at(qc, M)
        ranks = [M.rows]
        P = QMatrix.identity(M.rows)
        for _ in range(mult):
            P = P @ Q
            ranks.append(P.rank())
        at_least = [(ranks[k - 1] - ranks[k]) // deg for k in range(1, mult + 1)] + [0]
        sizes = []
        for k in range(1, mult + 1):
            sizes.extend([k] * (at_least[k - 1] - at_least[k]))
        out.append((qc, tuple(sorted(sizes, reverse=True))))
    out.sort()
    return out


def invariant_factors(M: QMatrix):
    """Invariant factors, largest first, as coefficient tuples."""
    eds = elementary_divisors(M)
    if not eds:
        return ()
    count = max(len(sizes) for _, sizes in eds)
    factors = []
    for i in range(count):
        p = sympy.Integer(1)
        for qc, sizes in eds:
            if i < len(sizes):
                q = sum(sympy.Rational(c.numerator, c.denominator) * _x ** (len(qc) - 1 - k) for k, c in enumerate(qc))
                p = p * q ** sizes[i]
        factors.append(_coeffs(sympy.expand(p)))
    return tuple(factors)


def similarity_invariants(M: QMatrix):
    return {"charpoly": charpoly(M), "invariant_factors": invariant_factors(M)}


def same_similarity_class(A: QMatrix, B: QMatrix) -> bool:
    return A.shape == B.shape and elementary_divisors(A) == elementary_divisors(B)
