"""Dense two-phase simplex with Bland's rule.

Solves  min c.x  subject to  A_ge x >= b_ge,  A_le x <= b_le,  x >= 0.
Intended for tiny instances (tens of rows and columns), so the tableau is a
plain dense array and every pivot is recomputed in full.  Bland's smallest-
index rule makes the pivot sequence deterministic and cycle-free.
"""

from __future__ import annotations

import numpy as np

from .errors import Infeasible, Unbounded

__all__ = ["simplex_min"]

_TOL = 1e-9


def _pivot(tab: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for r in range(tab.shape[0]):
        if r != row and abs(tab[r, col]) > 0.0:
            tab[r] -= tab[r, col] * tab[row]
    basis[row] = col


def _run(tab: np.ndarray, basis: np.ndarray, cost: np.ndarray, n_cols: int,
         max_iter: int) -> float:
    """Optimize the tableau in place for the given cost row; returns value."""
    m = tab.shape[0]
    for _ in range(max_iter):
        # reduced costs for the current basis
        y = cost[basis]
        reduced = cost[:n_cols] - y @ tab[:, :n_cols]
        entering = -1
        for j in range(n_cols):  # Bland: smallest eligible index
            if reduced[j] < -_TOL:
                entering = j
                break
        if entering < 0:
            return float(y @ tab[:, -1])
        ratios = np.full(m, np.inf)
        col = tab[:, entering]
        ok = col > _TOL
        ratios[ok] = tab[ok, -1] / col[ok]
        best = np.inf
        leave = -1
        for r in range(m):  # Bland tie-break: smallest basis index
            if ratios[r] < best - 1e-15 or (
                ratios[r] <= best + 1e-15 and leave >= 0 and basis[r] < basis[leave]
            ):
                best = ratios[r]
                leave = r
        if leave < 0 or not np.isfinite(best):
            raise Unbounded("objective unbounded below")
        _pivot(tab, basis, leave, entering)
    raise RuntimeError("simplex iteration limit exceeded")


def simplex_min(c, A_ge=None, b_ge=None, A_le=None, b_le=None,
                max_iter: int = 20000):
    """Returns (x, optimal value). Raises Infeasible or Unbounded."""
    c = np.asarray(c, dtype=float)
    n = c.size
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    slack_sign: list[float] = []
    if A_ge is not None:
        A_ge = np.atleast_2d(np.asarray(A_ge, dtype=float))
        for row, b in zip(A_ge, np.atleast_1d(b_ge)):
            rows.append(row)
            rhs.append(float(b))
            slack_sign.append(-1.0)
    if A_le is not None:
        A_le = np.atleast_2d(np.asarray(A_le, dtype=float))
        for row, b in zip(A_le, np.atleast_1d(b_le)):
            rows.append(row)
            rhs.append(float(b))
            slack_sign.append(1.0)
    m = len(rows)
    if m == 0:
        return np.zeros(n), 0.0

    A = np.vstack(rows)
    b = np.asarray(rhs, dtype=float)
    S = np.diag(slack_sign)
    # flip rows to make the right-hand side nonnegative
    flip = b < 0.0
    A[flip] *= -1.0
    b[flip] *= -1.0
    S[flip] *= -1.0

    # columns: [x (n) | slack (m) | artificial (m) | rhs]
    n_total = n + 2 * m
    tab = np.zeros((m, n_total + 1))
    tab[:, :n] = A
    tab[:, n : n + m] = S
    tab[:, n + m : n_total] = np.eye(m)
    tab[:, -1] = b
    basis = np.arange(n + m, n_total)

    phase1 = np.zeros(n_total)
    phase1[n + m :] = 1.0
    value = _run(tab, basis, phase1, n_total, max_iter)
    if value > 1e-7:
        raise Infeasible(f"phase-1 objective {value:.3e} > 0")
    # drive any residual artificial out of the basis; drop redundant rows
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= n + m:
            piv = -1
            for j in range(n + m):
                if abs(tab[r, j]) > _TOL:
                    piv = j
                    break
            if piv >= 0:
                _pivot(tab, basis, r, piv)
            else:
                keep[r] = False  # redundant zero row
    if not keep.all():
        tab = tab[keep]
        basis = basis[keep]

    phase2 = np.zeros(n_total)
    phase2[:n] = c
    phase2[n + m :] = 1e30  # artificials must stay out
    value = _run(tab, basis, phase2, n + m, max_iter)

    x = np.zeros(n)
    for r, j in enumerate(basis):
        if j < n:
            x[j] = tab[r, -1]
    np.maximum(x, 0.0, out=x)
    return x, float(c @ x)
