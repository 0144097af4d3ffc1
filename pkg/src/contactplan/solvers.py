"""Dense convex QP and mixed-binary QP solvers.

``solve_qp`` is a Goldfarb-Idnani dual active-set method: it starts from the
unconstrained minimiser and adds the most violated inequality until the
iterate is primal feasible, so no phase-1 is needed and infeasibility is
detected when no step can reduce a violation.  Positive semi-definite
Hessians are handled by proximal-point refinement around a strictly convex
surrogate.

``solve_miqp`` is a branch-and-bound over Big-M indicator constraints; the
relaxation at each node is a ``solve_qp`` call.  ``enumerate_miqp`` solves
one QP per assignment and is kept as a ground-truth oracle.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import BigMTooSmall, Infeasible, MaxIterations, PlanningError, Timeout

log = logging.getLogger(__name__)

__all__ = [
    "QpProblem",
    "QpSolution",
    "MiqpProblem",
    "MipSolution",
    "Unbounded",
    "solve_qp",
    "solve_miqp",
    "enumerate_miqp",
]


class Unbounded(PlanningError):
    pass


def _rows(A, n: int) -> np.ndarray:
    if A is None:
        return np.zeros((0, n))
    A = np.asarray(A, dtype=float)
    return A.reshape(-1, n) if A.size else np.zeros((0, n))


def _vec(b) -> np.ndarray:
    if b is None:
        return np.zeros(0)
    return np.asarray(b, dtype=float).reshape(-1)


@dataclass(frozen=True)
class QpProblem:
    """``min 1/2 x'Hx + g'x  s.t.  A_eq x = b_eq,  A_in x <= b_in``."""

    H: np.ndarray
    g: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_in: np.ndarray | None = None
    b_in: np.ndarray | None = None

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        n = H.shape[0]
        if H.shape != (n, n):
            raise ValueError(f"H must be square, got {H.shape}")
        if not np.allclose(H, H.T, atol=1e-12, rtol=0.0):
            raise ValueError("H must be symmetric")
        g = _vec(self.g)
        if g.shape != (n,):
            raise ValueError(f"g has shape {g.shape}, expected ({n},)")
        A_eq, b_eq = _rows(self.A_eq, n), _vec(self.b_eq)
        A_in, b_in = _rows(self.A_in, n), _vec(self.b_in)
        if len(A_eq) != len(b_eq) or len(A_in) != len(b_in):
            raise ValueError("constraint matrix/vector row counts differ")
        object.__setattr__(self, "H", 0.5 * (H + H.T))
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "A_in", A_in)
        object.__setattr__(self, "b_in", b_in)

    @property
    def n(self) -> int:
        return self.H.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.H @ x + self.g @ x)


@dataclass(frozen=True)
class QpSolution:
    x: np.ndarray
    objective: float
    active_set: tuple[int, ...]
    multipliers_eq: np.ndarray
    multipliers_in: np.ndarray
    iterations: int
    solve_time: float

    def kkt_residuals(self, problem: QpProblem) -> dict[str, float]:
        """Stationarity, primal feasibility, dual feasibility and complementarity residuals."""
        x, lam, nu = self.x, self.multipliers_in, self.multipliers_eq
        grad = problem.H @ x + problem.g + problem.A_eq.T @ nu + problem.A_in.T @ lam
        slack = problem.b_in - problem.A_in @ x
        return {
            "stationarity": float(np.max(np.abs(grad), initial=0.0)),
            "primal": float(max(np.max(-slack, initial=0.0),
                                np.max(np.abs(problem.A_eq @ x - problem.b_eq), initial=0.0))),
            "dual": float(np.max(-lam, initial=0.0)),
            "complementarity": float(np.max(np.abs(lam * slack), initial=0.0)),
        }


def _gi_solve(G, g, E, e, C, c, max_iter):
    """Goldfarb-Idnani on ``min 1/2 x'Gx + g'x, E x = e, C x >= c`` with G positive definite.

    Returns ``x, u_eq, u_in, active_in, iterations``.
    """
    n = G.shape[0]
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise PlanningError("Hessian is not positive definite") from exc
    Linv = solve_triangular(L, np.eye(n), lower=True)
    x = -Linv.T @ (Linv @ g)

    active: list[int] = []          # row ids: eq rows are 0..me-1, inequalities me+j
    normals: list[np.ndarray] = []
    u = np.zeros(0)
    me = len(e)
    iters = 0

    def direction(npl):
        q = len(normals)
        v = Linv @ npl
        if q == 0:
            return Linv.T @ v, np.zeros(0)
        B = Linv @ np.column_stack(normals)
        Q, R = np.linalg.qr(B, mode="complete")
        d = Q.T @ v
        z = Linv.T @ (Q[:, q:] @ d[q:])
        r = solve_triangular(R[:q, :q], d[:q])
        return z, r

    def drop(k):
        nonlocal u
        del active[k]
        del normals[k]
        u = np.delete(u, k)

    for i in range(me):
        npl = E[i]
        z, r = direction(npl)
        zn = float(z @ npl)
        s = float(npl @ x - e[i])
        scale = 1.0 + abs(e[i]) + np.linalg.norm(npl) * np.linalg.norm(x)
        if abs(zn) <= 1e-14 * max(1.0, float(npl @ npl)):
            if abs(s) <= 1e-9 * scale:
                continue  # redundant equality
            raise Infeasible("inconsistent equality constraints")
        t = -s / zn
        x = x + t * z
        u = np.append(u - t * r, t)
        active.append(i)
        normals.append(npl)

    tol = 1e-11
    while True:
        iters += 1
        if iters > max_iter:
            raise MaxIterations(f"active-set loop exceeded {max_iter} iterations")
        if len(c) == 0:
            break
        s_all = C @ x - c
        thresh = tol * (1.0 + np.abs(c) + np.linalg.norm(C, axis=1) * np.linalg.norm(x))
        viol = np.where(s_all < -thresh, s_all / (1.0 + np.abs(c)), 0.0)
        if active:
            act_in = [a - me for a in active if a >= me]
            viol[act_in] = 0.0
        p = int(np.argmin(viol))
        if viol[p] >= 0.0:
            break
        npl = C[p]
        u_plus = 0.0
        while True:
            iters += 1
            if iters > max_iter:
                raise MaxIterations(f"active-set loop exceeded {max_iter} iterations")
            z, r = direction(npl)
            zn = float(z @ npl)
            s_p = float(npl @ x - c[p])
            t1, k_drop = np.inf, -1
            for k, (row, rk) in enumerate(zip(active, r)):
                if row >= me and rk > 1e-14:
                    ratio = u[k] / rk
                    if ratio < t1:
                        t1, k_drop = ratio, k
            t2 = -s_p / zn if zn > 1e-14 * max(1.0, float(npl @ npl)) else np.inf
            if not np.isfinite(t1) and not np.isfinite(t2):
                raise Infeasible("no step reduces the violation of a constraint")
            if not np.isfinite(t2):
                u = u - t1 * r
                u_plus += t1
                drop(k_drop)
                continue
            t = min(t1, t2)
            x = x + t * z
            u = u - t * r
            u_plus += t
            if t2 <= t1:
                u = np.append(u, u_plus)
                active.append(me + p)
                normals.append(npl)
                break
            drop(k_drop)

    u_eq = np.zeros(me)
    u_in = np.zeros(len(c))
    for row, val in zip(active, u):
        if row < me:
            u_eq[row] = val
        else:
            u_in[row - me] = max(val, 0.0)
    return x, u_eq, u_in, sorted(a - me for a in active if a >= me), iters


def _polish(G, g, E, e, C, c, x, u_eq, u_in, act):
    """Re-solve the KKT system on the final active set to remove accumulated round-off."""
    n = G.shape[0]
    N = np.vstack([E, C[act]]) if len(act) else E
    b = np.concatenate([e, c[act]]) if len(act) else e
    q = len(b)
    K = np.zeros((n + q, n + q))
    K[:n, :n] = G
    K[:n, n:] = -N.T
    K[n:, :n] = N
    rhs = np.concatenate([-g, b])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return x, u_eq, u_in
    if not np.all(np.isfinite(sol)):
        return x, u_eq, u_in
    xp, up = sol[:n], sol[n:]
    ue, ui = up[: len(e)], up[len(e):]
    if len(ui) and ui.min() < -1e-9:
        return x, u_eq, u_in
    if len(c) and np.min(C @ xp - c) < -1e-10 * (1.0 + np.abs(c).max()):
        return x, u_eq, u_in
    u_in = np.zeros(len(c))
    u_in[act] = np.maximum(ui, 0.0)
    return xp, ue, u_in


def solve_qp(problem: QpProblem, *, max_iter: int | None = None) -> QpSolution:
    """Solve a dense convex QP; raises ``Infeasible`` or ``MaxIterations``."""
    t0 = time.perf_counter()
    H, g = problem.H, problem.g
    n = problem.n
    E, e = problem.A_eq, problem.b_eq
    C, c = -problem.A_in, -problem.b_in
    if max_iter is None:
        max_iter = 20 * (len(e) + len(c) + n) + 100

    eig = np.linalg.eigvalsh(H) if n else np.zeros(0)
    lam_max = max(1.0, float(eig.max(initial=0.0)))
    if eig.min(initial=1.0) < -1e-10 * lam_max:
        raise ValueError("H is not positive semi-definite")

    iterations = 0
    if eig.min(initial=1.0) > 1e-10 * lam_max:
        x, u_eq, u_in, act, iterations = _gi_solve(H, g, E, e, C, c, max_iter)
        x, u_eq, u_in = _polish(H, g, E, e, C, c, x, u_eq, u_in, act)
    else:
        # proximal point: x_{k+1} = argmin f(x) + rho/2 |x - x_k|^2
        rho = 1e-6 * lam_max
        Hr = H + rho * np.eye(n)
        x = np.zeros(n)
        for _ in range(500):
            x_new, u_eq, u_in, act, it = _gi_solve(Hr, g - rho * x, E, e, C, c, max_iter)
            x_new, u_eq, u_in = _polish(Hr, g - rho * x, E, e, C, c, x_new, u_eq, u_in, act)
            iterations += it
            step = np.linalg.norm(x_new - x)
            x = x_new
            if not np.all(np.isfinite(x)) or np.linalg.norm(x) > 1e12:
                raise Unbounded("objective is unbounded below on the feasible set")
            if step <= 1e-13 * (1.0 + np.linalg.norm(x)):
                break

    act = tuple(int(i) for i in np.flatnonzero(u_in > 0.0)) if len(u_in) else ()
    # report multipliers in the A_eq/A_in (<=) sign convention
    return QpSolution(
        x=x,
        objective=problem.objective(x),
        active_set=act,
        multipliers_eq=-u_eq,
        multipliers_in=u_in,
        iterations=iterations,
        solve_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# mixed binary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MiqpProblem:
    """Continuous QP plus binary groups selecting Big-M indicator rows.

    Indicator row ``k`` reads ``ind_A[k] x <= ind_b[k] + big_m (1 - a[ind_bin[k]])``;
    each group of binaries sums to one.
    """

    base: QpProblem
    groups: tuple[tuple[int, ...], ...]
    ind_A: np.ndarray
    ind_b: np.ndarray
    ind_bin: np.ndarray
    big_m: float = 100.0

    def __post_init__(self):
        n = self.base.n
        ind_A = _rows(self.ind_A, n)
        ind_b = _vec(self.ind_b)
        ind_bin = np.asarray(self.ind_bin, dtype=int).reshape(-1)
        groups = tuple(tuple(int(b) for b in grp) for grp in self.groups)
        if self.big_m <= 0:
            raise ValueError("big_m must be positive")
        if any(len(grp) == 0 for grp in groups):
            raise ValueError("every binary group needs at least one member")
        members = [b for grp in groups for b in grp]
        if sorted(members) != list(range(len(members))):
            raise ValueError("binaries must be numbered 0..nb-1 and belong to exactly one group")
        if not (len(ind_A) == len(ind_b) == len(ind_bin)):
            raise ValueError("indicator arrays have inconsistent lengths")
        if len(ind_bin) and (ind_bin.min() < 0 or ind_bin.max() >= len(members)):
            raise ValueError("indicator row references an unknown binary")
        object.__setattr__(self, "ind_A", ind_A)
        object.__setattr__(self, "ind_b", ind_b)
        object.__setattr__(self, "ind_bin", ind_bin)
        object.__setattr__(self, "groups", groups)

    @property
    def n_binaries(self) -> int:
        return sum(len(grp) for grp in self.groups)

    def hardened(self, chosen: set[int] | tuple[int, ...]) -> QpProblem:
        """QP with the rows of ``chosen`` binaries enforced and every other indicator row dropped."""
        chosen = set(chosen)
        mask = np.array([b in chosen for b in self.ind_bin], dtype=bool)
        b = self.base
        return QpProblem(b.H, b.g, b.A_eq, b.b_eq,
                         np.vstack([b.A_in, self.ind_A[mask]]),
                         np.concatenate([b.b_in, self.ind_b[mask]]))


@dataclass(frozen=True)
class MipSolution:
    x: np.ndarray
    assignment: tuple[int, ...]       # chosen binary id per group
    objective: float
    status: str = "optimal"           # optimal | suboptimal
    nodes: int = 0
    qp_solves: int = 0
    solve_time: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


_A_REG = 1e-8  # curvature on relaxed binaries keeps node QPs strictly convex


class _Components:
    """Split a MIQP into independent sub-problems (no shared rows, groups or Hessian terms)."""

    def __init__(self, prob: MiqpProblem):
        n, nb = prob.base.n, prob.n_binaries
        parent = list(range(n + nb))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(idx):
            idx = list(idx)
            for j in idx[1:]:
                ra, rb = find(idx[0]), find(j)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

        rows, cols = np.nonzero(prob.base.H)
        for i, j in zip(rows, cols):
            if i != j:
                union((i, j))
        for A in (prob.base.A_eq, prob.base.A_in):
            for row in A:
                union(np.flatnonzero(row))
        for row, b in zip(prob.ind_A, prob.ind_bin):
            union(list(np.flatnonzero(row)) + [n + b])
        for grp in prob.groups:
            union([n + b for b in grp])

        roots = [find(i) for i in range(n + nb)]
        comps: dict[int, tuple[list, list]] = {}
        for i, r in enumerate(roots):
            comps.setdefault(r, ([], []))
            (comps[r][0] if i < n else comps[r][1]).append(i if i < n else i - n)
        with_bin = [c for c in comps.values() if c[1]]
        free_vars = sorted(v for c in comps.values() if not c[1] for v in c[0])
        self.parts = sorted(with_bin, key=lambda c: min(c[1]))
        self.free_vars = free_vars


def _subproblem(prob: MiqpProblem, xs: list[int], bs: list[int]) -> MiqpProblem:
    xs_a = np.array(xs, dtype=int)
    bmap = {b: k for k, b in enumerate(bs)}
    base = prob.base

    def rows_in(A, bvec):
        if len(A) == 0:
            return np.zeros((0, len(xs))), np.zeros(0)
        outside = np.ones(base.n, dtype=bool)
        outside[xs_a] = False
        keep = ~np.any(A[:, outside] != 0.0, axis=1) & np.any(A[:, xs_a] != 0.0, axis=1)
        return A[np.ix_(keep, xs_a)], bvec[keep]

    Aeq, beq = rows_in(base.A_eq, base.b_eq)
    Ain, bin_ = rows_in(base.A_in, base.b_in)
    mask = np.array([b in bmap for b in prob.ind_bin], dtype=bool)
    groups = tuple(tuple(bmap[b] for b in grp) for grp in prob.groups if grp[0] in bmap)
    return MiqpProblem(
        QpProblem(base.H[np.ix_(xs_a, xs_a)], base.g[xs_a], Aeq, beq, Ain, bin_),
        groups,
        prob.ind_A[np.ix_(mask, xs_a)] if len(xs) else np.zeros((mask.sum(), 0)),
        prob.ind_b[mask],
        np.array([bmap[b] for b in prob.ind_bin[mask]], dtype=int),
        prob.big_m,
    )


class _BranchAndBound:
    def __init__(self, prob: MiqpProblem, deadline: float | None, gap: float):
        self.p = prob
        self.deadline = deadline
        self.gap = gap
        self.group_of = {b: gi for gi, grp in enumerate(prob.groups) for b in grp}
        self.nodes = 0
        self.qp_solves = 0
        self.incumbent: tuple[float, np.ndarray, tuple[int, ...]] | None = None
        self.timed_out = False

    def _relaxation(self, fixed: dict[int, int]):
        p, base = self.p, self.p.base
        n, M = base.n, p.big_m
        one = {b for b, v in fixed.items() if v == 1}
        free = [b for b in range(p.n_binaries) if b not in fixed]
        nf = len(free)
        col = {b: n + k for k, b in enumerate(free)}
        nv = n + nf

        H = np.zeros((nv, nv))
        H[:n, :n] = base.H
        H[n:, n:] = 2.0 * _A_REG * np.eye(nf)
        g = np.concatenate([base.g, np.zeros(nf)])

        A_rows, b_rows = [np.hstack([base.A_in, np.zeros((len(base.A_in), nf))])], [base.b_in]
        for k, b in enumerate(p.ind_bin):
            if b in one:
                A_rows.append(np.concatenate([p.ind_A[k], np.zeros(nf)])[None, :])
                b_rows.append(p.ind_b[k:k + 1])
            elif b in col:
                row = np.concatenate([p.ind_A[k], np.zeros(nf)])
                row[col[b]] = M
                A_rows.append(row[None, :])
                b_rows.append(p.ind_b[k:k + 1] + M)
        if nf:
            A_rows += [np.hstack([np.zeros((nf, n)), np.eye(nf)]), np.hstack([np.zeros((nf, n)), -np.eye(nf)])]
            b_rows += [np.ones(nf), np.zeros(nf)]

        E_rows, e_rows = [np.hstack([base.A_eq, np.zeros((len(base.A_eq), nf))])], [base.b_eq]
        open_groups = 0
        for grp in p.groups:
            if any(b in one for b in grp):
                continue
            members = [b for b in grp if b in col]
            if not members:
                return None
            row = np.zeros(nv)
            row[[col[b] for b in members]] = 1.0
            E_rows.append(row[None, :])
            e_rows.append(np.ones(1))
            open_groups += 1

        qp = QpProblem(H, g, np.vstack(E_rows), np.concatenate(e_rows),
                       np.vstack(A_rows), np.concatenate(b_rows))
        self.qp_solves += 1
        try:
            sol = solve_qp(qp)
        except Infeasible:
            return None
        x = sol.x[:n]
        bound = base.objective(x) - _A_REG * open_groups
        a = {b: float(sol.x[col[b]]) for b in free}
        return bound, x, a

    def _leaf(self, chosen: tuple[int, ...]):
        self.qp_solves += 1
        try:
            sol = solve_qp(self.p.hardened(chosen))
        except Infeasible:
            return None
        return sol.objective, sol.x

    def _assignment(self, fixed, a):
        chosen = []
        for grp in self.p.groups:
            ones = [b for b in grp if fixed.get(b) == 1]
            if ones:
                chosen.append(ones[0])
            else:
                chosen.append(max((b for b in grp if b in a), key=lambda b: (a[b], -b)))
        return tuple(chosen)

    def _fix(self, fixed, b, v):
        child = dict(fixed)
        child[b] = v
        if v == 1:
            for other in self.p.groups[self.group_of[b]]:
                if other != b:
                    child[other] = 0
        return child

    def run(self):
        counter = itertools.count()
        stack: list = [(-np.inf, next(counter), {})]
        heap: list = []
        while stack or heap:
            if self.deadline is not None and time.perf_counter() > self.deadline:
                self.timed_out = True
                break
            if self.incumbent is None:
                parent_bound, _, fixed = stack.pop()
            else:
                if stack:
                    for item in stack:
                        heapq.heappush(heap, item)
                    stack = []
                parent_bound, _, fixed = heapq.heappop(heap)
            if self.incumbent is not None and parent_bound >= self.incumbent[0] - self.gap:
                continue
            self.nodes += 1
            rel = self._relaxation(fixed)
            if rel is None:
                continue
            bound, x, a = rel
            if self.incumbent is not None and bound >= self.incumbent[0] - self.gap:
                continue
            frac = {b: v for b, v in a.items() if 1e-6 < v < 1.0 - 1e-6}
            if frac:
                branch = min(frac, key=lambda b: (round(abs(frac[b] - 0.5), 12), b))
            else:
                chosen = self._assignment(fixed, a)
                leaf = self._leaf(chosen)
                if leaf is not None:
                    obj, xl = leaf
                    if self.incumbent is None or obj < self.incumbent[0] - 1e-12:
                        self.incumbent = (obj, xl, chosen)
                    continue
                undecided = [b for b in chosen if b in a]
                if not undecided:
                    continue
                branch = undecided[0]
            first = 1 if a.get(branch, 0.0) >= 0.5 else 0
            # LIFO: push the second child first
            for v in (1 - first, first):
                item = (bound, next(counter), self._fix(fixed, branch, v))
                if self.incumbent is None:
                    stack.append(item)
                else:
                    heapq.heappush(heap, item)
        return self.incumbent


def _check_big_m(prob: MiqpProblem, x: np.ndarray, chosen: tuple[int, ...]):
    chosen_set = set(chosen)
    for row, rhs, b in zip(prob.ind_A, prob.ind_b, prob.ind_bin):
        lhs = row @ x
        if b in chosen_set:
            if lhs > rhs + 1e-8:
                raise BigMTooSmall(f"hardened indicator row violated by {lhs - rhs:.3g}")
        elif lhs > rhs + prob.big_m - 1e-9:
            raise BigMTooSmall(f"inactive indicator row needs M >= {lhs - rhs:.3g}, have {prob.big_m}")


def solve_miqp(
    problem: MiqpProblem,
    *,
    time_limit: float | None = 0.25,
    gap: float = 1e-6,
    decompose: bool = True,
) -> MipSolution:
    """Branch-and-bound on the Big-M relaxation.

    Depth-first (most fractional binary, ties by index) until an incumbent
    exists, then best-bound.  With ``decompose`` the problem is first split
    into independent blocks solved one after another.  When ``time_limit``
    expires with an incumbent the result is flagged ``suboptimal``; without
    one ``Timeout`` is raised.
    """
    t0 = time.perf_counter()
    deadline = None if time_limit is None else t0 + time_limit
    n = problem.base.n

    if decompose:
        comps = _Components(problem)
        parts = [(xs, bs) for xs, bs in comps.parts]
        free_vars = comps.free_vars
    else:
        parts = [(list(range(n)), list(range(problem.n_binaries)))]
        free_vars = []

    x = np.zeros(n)
    chosen_all: dict[int, int] = {}
    nodes = qp_solves = 0
    suboptimal = False

    if free_vars:
        sub = _subproblem(problem, free_vars, [])
        sol = solve_qp(sub.base)
        qp_solves += 1
        x[free_vars] = sol.x

    for xs, bs in parts:
        sub = problem if not decompose else _subproblem(problem, xs, bs)
        bb = _BranchAndBound(sub, deadline, gap)
        inc = bb.run()
        nodes += bb.nodes
        qp_solves += bb.qp_solves
        if inc is None:
            if bb.timed_out:
                raise Timeout(time_limit or 0.0)
            raise Infeasible("no binary assignment admits a feasible QP")
        suboptimal |= bb.timed_out
        _, xs_val, chosen = inc
        x[xs] = xs_val
        for b_local in chosen:
            chosen_all[bs[b_local]] = 1

    assignment = tuple(next(b for b in grp if b in chosen_all) for grp in problem.groups)
    _check_big_m(problem, x, assignment)
    elapsed = time.perf_counter() - t0
    return MipSolution(
        x=x,
        assignment=assignment,
        objective=problem.base.objective(x),
        status="suboptimal" if suboptimal else "optimal",
        nodes=nodes,
        qp_solves=qp_solves,
        solve_time=elapsed,
        stats={"components": len(parts)},
    )


def enumerate_miqp(problem: MiqpProblem, *, limit: int = 100_000) -> MipSolution:
    """Exhaustive oracle: one hardened QP per assignment, first minimum wins ties."""
    t0 = time.perf_counter()
    count = int(np.prod([len(grp) for grp in problem.groups]))
    if count > limit:
        raise ValueError(f"{count} assignments exceed the enumeration limit {limit}")
    best = None
    solves = 0
    for chosen in itertools.product(*problem.groups):
        solves += 1
        try:
            sol = solve_qp(problem.hardened(chosen))
        except Infeasible:
            continue
        if best is None or sol.objective < best[0] - 1e-12:
            best = (sol.objective, sol.x, tuple(chosen))
    if best is None:
        raise Infeasible("every assignment is infeasible")
    return MipSolution(
        x=best[1],
        assignment=best[2],
        objective=best[0],
        nodes=count,
        qp_solves=solves,
        solve_time=time.perf_counter() - t0,
    )
