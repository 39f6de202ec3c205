"""Thin generic SOCP container dispatched to an interior-point conic solver.

Programs are stored as  min q'x  s.t.  A x + s = b,  s in K,  where K is a
product of one zero cone (equality rows), one nonnegative cone (inequality
rows) and any number of second-order cones, emitted strictly in that order.

The triplet pattern of A is frozen when the program is finalized; branch
loops that re-solve the same structure with different coefficients mutate
`fill` (value per emitted entry, in emission order) and `b` in place and
call solve() again. Explicit zeros are kept so the pattern never changes.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

try:
    import clarabel
except ImportError as _e:  # pragma: no cover
    raise ImportError("the clarabel solver is required") from _e


class ConicSolveError(RuntimeError):
    """The conic solver failed for numerical reasons (not plain infeasibility)."""


# solver outcome buckets
SOLVED = "solved"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
FAILED = "failed"

_STATUS_MAP = {
    "Solved": SOLVED,
    "AlmostSolved": SOLVED,
    "PrimalInfeasible": INFEASIBLE,
    "AlmostPrimalInfeasible": INFEASIBLE,
    "DualInfeasible": UNBOUNDED,
    "AlmostDualInfeasible": UNBOUNDED,
}


class Program:
    """One conic program with a mutable-coefficient, fixed-pattern skeleton."""

    def __init__(self, n: int, var_names=None):
        self.n = n
        self.var_names = var_names
        self._stage = 0  # 0 eq, 1 ineq, 2 socs
        self._rows = []
        self._cols = []
        self._vals = []
        self._b = []
        self._m = 0
        self._n_eq = 0
        self._n_ineq = 0
        self._soc_dims = []
        self.q = np.zeros(n)
        self._finalized = False

    # -- emission -----------------------------------------------------------

    def _add_row(self, cols, vals, rhs: float) -> None:
        cols = np.atleast_1d(np.asarray(cols, dtype=np.int64))
        vals = np.atleast_1d(np.asarray(vals, dtype=float))
        if cols.shape != vals.shape:
            raise ValueError("cols/vals length mismatch")
        self._rows.append(np.full(cols.shape, self._m, dtype=np.int64))
        self._cols.append(cols)
        self._vals.append(vals)
        self._b.append(float(rhs))
        self._m += 1

    def add_eq(self, cols, vals, rhs: float = 0.0) -> None:
        """row . x == rhs"""
        assert self._stage == 0, "equality rows must come first"
        self._add_row(cols, vals, rhs)
        self._n_eq += 1

    def add_ineq(self, cols, vals, rhs: float = 0.0) -> None:
        """row . x <= rhs"""
        assert self._stage <= 1, "inequality rows must precede cones"
        self._stage = 1
        self._add_row(cols, vals, rhs)
        self._n_ineq += 1

    def add_soc(self, rows) -> None:
        """One second-order cone: s_i = rhs_i - row_i . x, s_1 >= ||s_2:||.

        rows is a sequence of (cols, vals, rhs) triples; vals are the
        coefficients of the affine expression rhs - row.x forming s_i.
        """
        self._stage = 2
        dim = 0
        for cols, vals, rhs in rows:
            self._add_row(cols, vals, rhs)
            dim += 1
        if dim < 2:
            raise ValueError("second-order cone needs dimension >= 2")
        self._soc_dims.append(dim)

    def nnz_mark(self) -> int:
        """Current count of emitted coefficients (for fill-slice bookkeeping)."""
        return sum(len(v) for v in self._vals)

    def b_mark(self) -> int:
        """Index the next emitted row's rhs will occupy in b."""
        return self._m

    # -- finalize / solve ----------------------------------------------------

    def finalize(self) -> None:
        rows = np.concatenate(self._rows) if self._rows else np.zeros(0, np.int64)
        cols = np.concatenate(self._cols) if self._cols else np.zeros(0, np.int64)
        self.fill = (
            np.concatenate(self._vals) if self._vals else np.zeros(0, float)
        )
        self.b = np.asarray(self._b, dtype=float)
        self.m = self._m
        # Freeze the pattern once; recover the emission->csc data permutation
        # by round-tripping entry indices (requires no duplicate coordinates).
        order = sp.coo_matrix(
            (np.arange(len(self.fill), dtype=float), (rows, cols)),
            shape=(self.m, self.n),
        ).tocsc()
        if order.nnz != len(self.fill):
            raise ValueError("duplicate (row, col) coefficient emitted")
        self._perm = order.data.astype(np.int64)
        self._A = sp.csc_matrix(
            (self.fill[self._perm], order.indices, order.indptr),
            shape=(self.m, self.n),
        )
        self._P = sp.csc_matrix((self.n, self.n))
        self.cones = []
        if self._n_eq:
            self.cones.append(clarabel.ZeroConeT(self._n_eq))
        if self._n_ineq:
            self.cones.append(clarabel.NonnegativeConeT(self._n_ineq))
        for d in self._soc_dims:
            self.cones.append(clarabel.SecondOrderConeT(d))
        self._settings = clarabel.DefaultSettings()
        self._settings.verbose = False
        # fallback profile for the occasional interior-point stall: slightly
        # relaxed targets and generous almost-solved thresholds; certificate
        # tolerances elsewhere absorb errors of this magnitude
        relaxed = clarabel.DefaultSettings()
        relaxed.verbose = False
        relaxed.tol_gap_abs = 1e-7
        relaxed.tol_gap_rel = 1e-7
        relaxed.tol_feas = 1e-7
        relaxed.reduced_tol_gap_abs = 5e-5
        relaxed.reduced_tol_gap_rel = 5e-5
        relaxed.reduced_tol_feas = 1e-5
        relaxed.reduced_tol_infeas_abs = 5e-5
        relaxed.reduced_tol_infeas_rel = 5e-5
        relaxed.max_iter = 400
        self._settings_relaxed = relaxed
        self._rows_frozen = rows
        self._cols_frozen = cols
        self._finalized = True

    def _run(self, settings):
        solver = clarabel.DefaultSolver(
            self._P, self.q, self._A, self.b, self.cones, settings
        )
        sol = solver.solve()
        return _STATUS_MAP.get(str(sol.status), FAILED), sol

    def solve(self):
        """Solve and return (status, x, objective); x is None unless solved."""
        if not self._finalized:
            self.finalize()
        self._A.data[:] = self.fill[self._perm]
        status, sol = self._run(self._settings)
        if status == FAILED:
            status, sol = self._run(self._settings_relaxed)
        if status == SOLVED:
            return SOLVED, np.asarray(sol.x), float(sol.obj_val)
        return status, None, float("nan")

    # -- diagnostics ---------------------------------------------------------

    def dump(self) -> str:
        """Line-oriented text dump of the program.

        Format, one row per line, variables referenced as name:coef
        (entries with coefficient 0 are skipped):

            vars <n>
            min <var>:<coef> ...
            eq  <rhs> | <var>:<coef> ...
            le  <rhs> | <var>:<coef> ...
            soc <dim>
              <rhs> | <var>:<coef> ...
        """
        if not self._finalized:
            self.finalize()
        names = self.var_names or [f"x{i}" for i in range(self.n)]
        per_row = [[] for _ in range(self.m)]
        for r, c, v in zip(self._rows_frozen, self._cols_frozen, self.fill):
            if v != 0.0:
                per_row[r].append(f"{names[c]}:{v:.12g}")
        lines = [f"vars {self.n}"]
        obj = " ".join(
            f"{names[i]}:{v:.12g}" for i, v in enumerate(self.q) if v != 0.0
        )
        lines.append(f"min {obj}")
        r = 0
        for _ in range(self._n_eq):
            lines.append(f"eq  {self.b[r]:.12g} | " + " ".join(per_row[r]))
            r += 1
        for _ in range(self._n_ineq):
            lines.append(f"le  {self.b[r]:.12g} | " + " ".join(per_row[r]))
            r += 1
        for d in self._soc_dims:
            lines.append(f"soc {d}")
            for _ in range(d):
                lines.append(f"  {self.b[r]:.12g} | " + " ".join(per_row[r]))
                r += 1
        return "\n".join(lines) + "\n"
