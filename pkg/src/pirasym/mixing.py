"""Time-sharing across corner points: exact rate-optimal decompositions.

Any valid non-increasing traffic vector lies in the convex hull of the
corner-point traffic vectors (the uniform-prefix corners alone span the
ordered simplex), and concatenating corner schemes over disjoint symbol
ranges achieves the convex combination of their rates.  The best achievable
time-shared rate at a target vector is therefore a small linear program:

    maximize    sum_i  w_i * rate_i
    subject to  sum_i  w_i * shares_i = target,   w_i >= 0

(the weights sum to 1 automatically since every shares column does).  The
program is solved with a two-phase simplex over ``Fraction`` entries using
Bland's rule, which terminates, is deterministic for a fixed corner order,
and lands on a basic solution, so at most N corners carry weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .stages import TrafficVector, enumerate_corners

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _pivot(tableau: list, basis: list, row: int, col: int) -> None:
    scale = tableau[row][col]
    tableau[row] = [v / scale for v in tableau[row]]
    pivot_row = tableau[row]
    for r, vec in enumerate(tableau):
        if r != row and vec[col] != 0:
            f = vec[col]
            tableau[r] = [a - f * b for a, b in zip(vec, pivot_row)]
    basis[row] = col


def _run_simplex(tableau: list, basis: list, costs: list, allowed: range) -> None:
    """Maximize costs over the tableau in place (Bland's rule)."""
    m = len(tableau)
    while True:
        cb = [costs[b] for b in basis]
        entering = None
        for j in allowed:
            if j in basis:
                continue
            reduced = costs[j] - sum(cb[r] * tableau[r][j] for r in range(m))
            if reduced > 0:
                entering = j
                break
        if entering is None:
            return
        leaving = None
        best = None
        for r in range(m):
            coeff = tableau[r][entering]
            if coeff > 0:
                ratio = tableau[r][-1] / coeff
                if (best is None or ratio < best
                        or (ratio == best and basis[r] < basis[leaving])):
                    best = ratio
                    leaving = r
        if leaving is None:
            raise ArithmeticError("unbounded time-sharing program (internal error)")
        _pivot(tableau, basis, leaving, entering)


def solve_rate_program(columns: list, rates: list, target: list):
    """Max-rate decomposition of ``target`` over the given share columns.

    Returns ``(weights, value)`` with exact-rational weights, or ``None``
    when the target lies outside the convex hull of the columns.
    """
    m = len(target)
    n = len(columns)
    tableau = []
    for i in range(m):
        row = [Fraction(col[i]) for col in columns]
        row.extend(_ONE if j == i else _ZERO for j in range(m))
        row.append(Fraction(target[i]))
        if row[-1] < 0:
            row = [-v for v in row]
        tableau.append(row)
    basis = [n + i for i in range(m)]

    phase1 = [_ZERO] * n + [Fraction(-1)] * m
    _run_simplex(tableau, basis, phase1, range(n + m))
    if any(basis[r] >= n and tableau[r][-1] != 0 for r in range(m)):
        return None
    for r in range(m):
        if basis[r] >= n:
            pivot_col = next((j for j in range(n) if tableau[r][j] != 0), None)
            if pivot_col is not None:
                _pivot(tableau, basis, r, pivot_col)

    phase2 = [Fraction(c) for c in rates] + [_ZERO] * m
    _run_simplex(tableau, basis, phase2, range(n))

    weights = [_ZERO] * n
    for r in range(m):
        if basis[r] < n:
            weights[basis[r]] = tableau[r][-1]
    value = sum(w * Fraction(rate) for w, rate in zip(weights, rates))
    return weights, value


@dataclass(frozen=True)
class Mixture:
    """A rate-optimal time-sharing decomposition of one traffic target."""

    target: TrafficVector
    corners: tuple
    weights: tuple
    rate: Fraction

    @property
    def support(self) -> tuple:
        return tuple(i for i, w in enumerate(self.weights) if w != 0)

    def components(self) -> list:
        return [(self.corners[i], self.weights[i]) for i in self.support]

    def repetitions(self) -> tuple:
        """Smallest integer repetition counts realizing the weights.

        A corner weighted ``w`` contributes ``w`` of the total download, so
        its repetition count is proportional to ``w`` divided by its own
        download total; counts are scaled to the smallest integers.
        """
        raw = [w / self.corners[i].total_download
               for i, w in enumerate(self.weights)]
        if all(v == 0 for v in raw):
            raise ValueError("empty mixture")
        scale = lcm(*(v.denominator for v in raw))
        ints = [int(v * scale) for v in raw]
        shrink = 0
        for v in ints:
            shrink = gcd(shrink, v)
        return tuple(v // shrink for v in ints)


def mixture(target: TrafficVector, corners: list) -> Mixture:
    """Best time-shared rate at ``target`` over the given corner points.

    Raises ``ValueError`` if the target cannot be written as a convex
    combination of the given corners, which cannot happen when the corners
    are the full enumeration for matching M, N.
    """
    if not corners:
        raise ValueError("no corner points supplied")
    n_dbs = target.num_databases
    if any(c.spec.num_databases != n_dbs for c in corners):
        raise ValueError("corner points and target disagree on database count")
    if len({c.spec.num_messages for c in corners}) != 1:
        raise ValueError("corner points disagree on message count")
    columns = [list(c.traffic.shares) for c in corners]
    rates = [c.rate for c in corners]
    solved = solve_rate_program(columns, rates, list(target.shares))
    if solved is None:
        raise ValueError(
            "target traffic vector is not a convex combination of the given "
            "corner points (internal error for a full corner enumeration)")
    weights, value = solved
    return Mixture(target=target, corners=tuple(corners),
                   weights=tuple(weights), rate=value)


def best_rate(num_messages: int, num_databases: int,
              target: TrafficVector) -> Mixture:
    """Best time-shared rate over the full corner enumeration."""
    corners = enumerate_corners(num_messages, num_databases)
    return mixture(target, corners)
