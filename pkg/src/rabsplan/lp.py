"""Exact dense-tableau simplex for ``max c.v  s.t.  A v <= b, v >= 0``.

Two-phase method with Dantzig pricing and a Bland fallback on degenerate runs.
Rows are scaled to unit max-norm before solving; the feasibility tolerance
applies to the scaled rows. Results are deterministic: identical inputs give
bit-identical outputs on a given backend.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidInputError, RabsPlanError

PIVOT_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
NONNEG_TOL = 1e-9


class LpIterationLimit(RabsPlanError, RuntimeError):
    pass


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LpProblem:
    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    names: list[str] | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.shape[0]
        self.A = np.asarray(self.A, dtype=float)
        if self.A.size == 0 and self.A.ndim != 2:
            self.A = self.A.reshape(0, n)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.A.ndim != 2 or self.A.shape[1] != n:
            raise InvalidInputError(
                f"constraint rows must have {n} coefficients, got shape {self.A.shape}")
        if self.A.shape[0] != self.b.shape[0]:
            raise InvalidInputError("one right-hand side per constraint row is required")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))
                and np.all(np.isfinite(self.objective))):
            raise InvalidInputError("LP data must be finite")
        if self.names is not None and len(self.names) != n:
            raise InvalidInputError("one name per variable is required")

    @property
    def variable_count(self) -> int:
        return self.objective.shape[0]

    @property
    def constraint_count(self) -> int:
        return self.A.shape[0]

    def to_text(self) -> str:
        """Plain-text dump: ``max`` line, ``st``, then one ``coeffs <= rhs`` line per row."""
        fmt = lambda xs: " ".join(repr(float(x)) for x in xs)  # noqa: E731
        lines = ["max " + fmt(self.objective), "st"]
        lines += [f"{fmt(row)} <= {float(rhs)!r}" for row, rhs in zip(self.A, self.b)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LpProblem":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("max") or len(lines) < 2 or lines[1] != "st":
            raise InvalidInputError("expected 'max ...' followed by 'st'")
        c = [float(x) for x in lines[0][3:].split()]
        rows, rhs = [], []
        for ln in lines[2:]:
            lhs, _, right = ln.partition("<=")
            rows.append([float(x) for x in lhs.split()])
            rhs.append(float(right))
        return cls(c, np.array(rows).reshape(len(rows), len(c)), rhs)


@dataclass
class LpSolution:
    status: LpStatus
    objective_value: float = float("nan")
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _run(T, basis, n_enter, max_iter):
    status, it = _kernels.simplex_iterate(T, basis, n_enter, max_iter, PIVOT_TOL)
    if status == _kernels.STATUS_ITERATION_LIMIT:
        raise LpIterationLimit(f"simplex did not terminate within {max_iter} pivots")
    return status, it


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    c, A, b = problem.objective, problem.A, problem.b
    m, n = A.shape
    if max_iter is None:
        max_iter = max(10_000, 50 * (m + n))

    scale = np.abs(A).max(axis=1) if m and n else np.zeros(m)
    empty = scale == 0
    if np.any(b[empty] < -FEASIBILITY_TOL):
        return LpSolution(LpStatus.INFEASIBLE)
    scale[empty] = 1.0
    A_s = A / scale[:, None]
    b_s = b / scale

    flip = b_s < 0
    art_rows = np.flatnonzero(flip)
    n_art = art_rows.size
    width = n + m + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, :n] = A_s
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b_s
    T[:m][flip] *= -1.0
    basis = np.arange(n, n + m, dtype=np.int64)
    for k, r in enumerate(art_rows):
        T[r, n + m + k] = 1.0
        basis[r] = n + m + k

    iterations = 0
    if n_art:
        # Phase 1: maximise -(sum of artificials).
        T[m, n + m:width] = 1.0
        T[m] -= T[art_rows].sum(axis=0)
        _, it = _run(T, basis, n + m, max_iter)
        iterations += it
        if T[m, -1] < -FEASIBILITY_TOL:
            return LpSolution(LpStatus.INFEASIBLE, iterations=iterations)
        for r in range(m):
            if basis[r] >= n + m:
                row = T[r, :n + m]
                cols = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if cols.size:
                    col = cols[0]
                    T[r] /= T[r, col]
                    f = T[:, col].copy()
                    f[r] = 0.0
                    T -= np.outer(f, T[r])
                    basis[r] = col
                # else: redundant row, artificial stays basic at zero

    T[m] = 0.0
    T[m, :n] = -c
    for r in range(m):
        j = basis[r]
        if j < n and c[j] != 0.0:
            T[m] += c[j] * T[r]
    status, it = _run(T, basis, n + m, max_iter)
    iterations += it
    if status == _kernels.STATUS_UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, iterations=iterations)

    values = np.zeros(n)
    for r in range(m):
        if basis[r] < n:
            values[basis[r]] = T[r, -1]
    values[np.abs(values) < NONNEG_TOL] = 0.0
    duals = T[m, n:n + m] / scale
    return LpSolution(LpStatus.OPTIMAL, float(c @ values), values, duals, iterations)
