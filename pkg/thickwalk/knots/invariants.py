"""
Alexander polynomial of a crossing diagram.

Each crossing contributes one row of the Alexander matrix over the diagram's arcs; the
determinant of any (c-1) minor is the Alexander polynomial up to a unit +-t^k. Determinants
are exact: integers at t = +-1, polynomials over ZZ[t] otherwise.
"""
from functools import lru_cache
from typing import List, Tuple

from sympy import Poly, ZZ, symbols
from sympy.polys.matrices import DomainMatrix

from thickwalk.knots.diagram import CrossingDiagram

T = symbols("t")

Coefficients = Tuple[int, ...]


@lru_cache(maxsize=1)
def _polynomial_ring():
    ring = ZZ[T]
    return ring, ring.from_sympy(T)


def _alexander_rows(diagram: CrossingDiagram, domain, t) -> List[list]:
    one = domain.one
    c = diagram.crossing_count
    rows = [[domain.zero] * c for _ in range(c)]
    for label, (over, incoming, outgoing) in enumerate(diagram.arc_incidence()):
        row = rows[label]
        row[over] += one - t
        if diagram.signs[label] > 0:
            row[incoming] += t
            row[outgoing] -= one
        else:
            row[incoming] -= one
            row[outgoing] += t
    return rows


def _minor_determinant(diagram: CrossingDiagram, domain, t):
    size = diagram.crossing_count - 1
    rows = [row[:size] for row in _alexander_rows(diagram, domain, t)[:size]]
    return DomainMatrix(rows, (size, size), domain).det()


def normalize_polynomial(coefficients) -> Coefficients:
    """Ascending coefficients with the t^k factor removed and a positive leading coefficient"""
    coeffs = [int(c) for c in coefficients]
    while len(coeffs) > 1 and coeffs[0] == 0:
        coeffs.pop(0)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    return tuple(coeffs)


def evaluate_polynomial(coefficients: Coefficients, t: int) -> int:
    value = 0
    for c in reversed(coefficients):
        value = value * t + c
    return value


def alexander_polynomial(diagram: CrossingDiagram) -> Coefficients:
    """Normalized Alexander polynomial as ascending integer coefficients; (1,) for the unknot"""
    if diagram.crossing_count <= 1:
        return (1,)
    ring, t = _polynomial_ring()
    determinant = _minor_determinant(diagram, ring, t)
    expression = ring.to_sympy(determinant)
    if expression == 0:
        return (0,)
    return normalize_polynomial(reversed(Poly(expression, T).all_coeffs()))


def alexander_at(diagram: CrossingDiagram, t: int) -> int:
    """|Delta(t)| of the normalized polynomial; exact integer determinant at t = +-1"""
    if diagram.crossing_count <= 1:
        return 1
    if t in (1, -1):
        return abs(int(_minor_determinant(diagram, ZZ, ZZ(t))))
    return abs(evaluate_polynomial(alexander_polynomial(diagram), t))


def knot_determinant(diagram: CrossingDiagram) -> int:
    return alexander_at(diagram, -1)
