"""Comparator for the compound regret.

The inner problem, the best link for a fixed index, is solved over the
weighted l1 ball with Frank-Wolfe (away steps, exact line search) for
smooth convex losses and as a linear program for the absolute loss.  The
outer infimum over the l1 sphere is taken at the generator's index, on a
grid (d <= 3) or by random search.
"""
import csv
import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .dictionary import index_project
from .errors import UnsupportedConfigurationError
from .geometry import WeightedL1BallSpec, sample_l1_sphere, weighted_l1_norm

STRATEGIES = ("known-theta-star", "sphere-grid", "random-search")


@dataclass
class LinkFit:
    beta: np.ndarray
    value: float
    method: str
    iterations: int = 0
    gap: float = float("nan")
    history: list = field(default_factory=list, repr=False)


def _vertices(spec):
    S = spec.dictionary_size
    V = np.zeros((2 * S, S))
    for j in range(S):
        V[2 * j, j] = spec.radius / (j + 1)
        V[2 * j + 1, j] = -spec.radius / (j + 1)
    return V


def _line_search(loss, r, q, y, gmax):
    """Minimise ``mean loss(r + g q, y)`` over ``g in [0, gmax]`` (convex case)."""
    if gmax <= 0:
        return 0.0
    if loss.kind == "clipped-squared":
        qq = q @ q
        if qq == 0.0:
            return gmax
        return float(np.clip(-(r - y) @ q / qq, 0.0, gmax))
    if loss.kind == "clipped-absolute":
        nz = q != 0
        if not np.any(nz):
            return gmax
        c = -(r[nz] - y[nz]) / q[nz]
        w = np.abs(q[nz])
        order = np.argsort(c, kind="stable")
        cw = np.cumsum(w[order])
        g = c[order][np.searchsorted(cw, 0.5 * cw[-1])]
        return float(np.clip(g, 0.0, gmax))
    res = minimize_scalar(lambda g: np.mean(loss(r + g * q, y)), bounds=(0.0, gmax),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.x)


def frank_wolfe(design, y, loss, spec, tol=1e-6, max_iter=10_000, step_rule="away"):
    """Minimise ``mean loss(design @ beta, y)`` over ``B_S(spec.radius)``.

    The linear minimisation oracle is the vertex ``-sign(g_j) (R/j) e_j`` with
    the largest ``|g_j| / j``.  ``step_rule="away"`` uses away steps with
    exact line search (linear convergence for strongly convex objectives on
    polytopes); ``"open-loop"`` uses ``2/(k+2)``, falling back to line search
    whenever that step would increase the objective.  Either way the
    objective never increases.
    """
    n = len(y)
    V = _vertices(spec)
    alpha = np.zeros(len(V))
    alpha[0] = alpha[1] = 0.5
    beta = V.T @ alpha
    pred = design @ beta
    f = float(np.mean(loss(pred, y)))
    history = [f]
    gap = np.inf
    k = 0
    for k in range(max_iter):
        g = design.T @ loss.derivative(pred, y) / n
        scores = V @ g
        s = int(np.argmin(scores))
        gb = g @ beta
        gap = gb - scores[s]
        if gap < tol:
            break
        if step_rule == "away":
            active = np.flatnonzero(alpha > 0)
            a = active[np.argmax(scores[active])]
            if gap >= scores[a] - gb or alpha[a] >= 1.0:
                d_alpha = -alpha.copy()
                d_alpha[s] += 1.0
                gmax = 1.0
            else:
                d_alpha = alpha.copy()
                d_alpha[a] -= 1.0
                gmax = alpha[a] / (1.0 - alpha[a])
            q = design @ (V.T @ d_alpha)
            gamma = _line_search(loss, pred, q, y, gmax)
        else:
            d_alpha = -alpha.copy()
            d_alpha[s] += 1.0
            q = design @ (V.T @ d_alpha)
            gamma = 2.0 / (k + 2.0)
            if np.mean(loss(pred + gamma * q, y)) > f:
                gamma = _line_search(loss, pred, q, y, 1.0)
        new_alpha = np.maximum(alpha + gamma * d_alpha, 0.0)
        new_alpha /= new_alpha.sum()
        new_beta = V.T @ new_alpha
        new_pred = design @ new_beta
        f_new = float(np.mean(loss(new_pred, y)))
        if f_new > f:
            # rounding in the line search; stay put
            history.append(f)
            continue
        alpha, beta, pred, f = new_alpha, new_beta, new_pred, f_new
        history.append(f)
    return LinkFit(beta, f, "frank-wolfe", k + 1, float(gap), history)


def _absolute_lp(design, y, spec):
    """Exact minimiser of ``mean |design @ beta - y|`` over ``B_S(R)`` via HiGHS."""
    n, S = design.shape
    j = np.arange(1, S + 1, dtype=float)
    # variables: beta_plus (S), beta_minus (S), t (n)
    c = np.concatenate([np.zeros(2 * S), np.full(n, 1.0 / n)])
    eye = np.eye(n)
    A = np.vstack([
        np.hstack([design, -design, -eye]),
        np.hstack([-design, design, -eye]),
        np.concatenate([j, j, np.zeros(n)])[None, :],
    ])
    b = np.concatenate([y, -y, [spec.radius]])
    res = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solve failed: {res.message}")
    beta = res.x[:S] - res.x[S:2 * S]
    # shrink onto the ball if the solver overshoots by rounding
    norm = weighted_l1_norm(beta)
    if norm > spec.radius:
        beta *= spec.radius / norm
    return beta


def _grid_search(design, y, loss, spec, points_per_axis=41, n_starts=5):
    """Multi-start grid plus compass refinement, for nonconvex losses (S <= 3)."""
    S = spec.dictionary_size
    axes = [np.linspace(-spec.radius / j, spec.radius / j, points_per_axis)
            for j in range(1, S + 1)]
    grid = np.array(list(product(*axes)))
    grid = grid[weighted_l1_norm(grid) <= spec.radius]
    values = np.mean(loss(grid @ design.T, y), axis=1)
    starts = grid[np.argsort(values, kind="stable")[:n_starts]]

    def obj(b):
        return float(np.mean(loss(design @ b, y)))

    best_beta, best_val, evals = None, np.inf, len(grid)
    for b in starts:
        f = obj(b)
        step = spec.radius / (points_per_axis - 1)
        while step > 1e-9:
            improved = False
            for k in range(S):
                for sign in (1.0, -1.0):
                    cand = b.copy()
                    cand[k] += sign * step
                    if weighted_l1_norm(cand) > spec.radius:
                        continue
                    fc = obj(cand)
                    evals += 1
                    if fc < f:
                        b, f, improved = cand, fc, True
            if not improved:
                step /= 2.0
        if f < best_val:
            best_beta, best_val = b, f
    return LinkFit(best_beta, best_val, "grid", evals)


def effectively_convex(loss, spec, y):
    """True if clipping cannot activate for any link in the ball on these labels."""
    if not loss.convex_in_first_arg or loss.prediction_range is None:
        return False
    if loss.kind == "hinge-clipped":
        return 1.0 + spec.radius <= loss.bound
    return spec.radius + float(np.max(np.abs(y))) <= loss.prediction_range


def best_link(X, y, theta, loss, spec, dictionary, input_bound=1.0, known=(), **fw_kwargs):
    """Best link in ``B_S(R)`` for one task at a fixed index.

    ``known`` is an iterable of feasible coefficient vectors (for instance the
    generator's); the returned value is never worse than any of them nor
    than ``beta = 0``.
    """
    y = np.asarray(y, dtype=float)
    z = index_project(theta, np.asarray(X, dtype=float), input_bound)
    design = dictionary.design(z)

    def value(b):
        return float(np.mean(loss(design @ b, y)))

    candidates = [LinkFit(np.zeros(spec.dictionary_size), value(np.zeros(spec.dictionary_size)),
                          "zero")]
    for b in known:
        b = np.asarray(b, dtype=float)
        if b.shape == (spec.dictionary_size,) and weighted_l1_norm(b) <= spec.radius + 1e-12:
            candidates.append(LinkFit(b, value(b), "known"))
    if effectively_convex(loss, spec, y):
        if loss.kind == "clipped-absolute":
            b = _absolute_lp(design, y, spec)
            candidates.append(LinkFit(b, value(b), "lp"))
        else:
            candidates.append(frank_wolfe(design, y, loss, spec, **fw_kwargs))
    elif spec.dictionary_size <= 3:
        candidates.append(_grid_search(design, y, loss, spec))
    elif min(c.value for c in candidates) > 0.0:
        raise UnsupportedConfigurationError(
            "nonconvex loss with S > 3 and no known zero-loss link", field="S")
    # a known point with zero loss is optimal since losses are non-negative
    return min(candidates, key=lambda c: c.value)


@dataclass
class OracleResult:
    best_theta: np.ndarray
    per_task_best_losses: np.ndarray
    comparator_value: float
    strategy: str
    diagnostics: list

    @property
    def upper_bound(self):
        """The comparator is an upper bound on the infimum unless the grid is exhaustive."""
        return self.strategy != "sphere-grid" or len(self.best_theta) != 1


def _pad_known(betas, S):
    out = []
    for b in betas:
        b = np.asarray(b, dtype=float)
        if len(b) <= S:
            out.append(np.pad(b, (0, S - len(b))))
    return out


def _evaluate_theta(stream, theta, loss, spec, dictionary, known_betas=None):
    fits = []
    for t, task in enumerate(stream.tasks):
        known = [known_betas[t]] if known_betas is not None else ()
        fits.append(best_link(task.X, task.y, theta, loss, spec, dictionary,
                              stream.config.M, known=known))
    return fits


def sphere_grid(d, step):
    """Sign-symmetric grid on the unit l1 sphere (d <= 3)."""
    if d == 1:
        return np.array([[-1.0], [1.0]])
    m = int(round(1.0 / step))
    pts = set()
    if d == 2:
        for a in range(-m, m + 1):
            rest = m - abs(a)
            for s in ((1, -1) if rest else (1,)):
                pts.add((a, s * rest))
    elif d == 3:
        for a in range(-m, m + 1):
            for b in range(-(m - abs(a)), m - abs(a) + 1):
                rest = m - abs(a) - abs(b)
                for s in ((1, -1) if rest else (1,)):
                    pts.add((a, b, s * rest))
    else:
        raise UnsupportedConfigurationError("sphere-grid supports d <= 3 only", field="d")
    return np.array(sorted(pts), dtype=float) / m


def best_theta(stream, loss, spec, dictionary, strategy="known-theta-star",
               grid_step=0.05, n_random=1000, rng=None):
    """Outer infimum over the unit l1 sphere by the chosen strategy."""
    if not stream.tasks:
        raise ValueError("stream has no tasks")
    d = stream.config.d
    known_betas = None
    if stream.betas is not None:
        known_betas = _pad_known(stream.betas, spec.dictionary_size)
        if len(known_betas) != stream.T:
            known_betas = None
    if strategy == "known-theta-star":
        if stream.theta_star is None:
            raise UnsupportedConfigurationError("stream has no generator index",
                                                field="strategy")
        candidates = [np.asarray(stream.theta_star, dtype=float)]
    elif strategy == "sphere-grid":
        if d > 3:
            raise UnsupportedConfigurationError("sphere-grid supports d <= 3 only",
                                                field="strategy")
        candidates = list(sphere_grid(d, grid_step))
    elif strategy == "random-search":
        if rng is None:
            raise ValueError("random-search needs an rng")
        candidates = list(sample_l1_sphere(d, rng, size=n_random))
    else:
        raise UnsupportedConfigurationError(f"unknown strategy {strategy!r}",
                                            field="strategy")
    best = None
    for theta in candidates:
        fits = _evaluate_theta(stream, theta, loss, spec, dictionary, known_betas)
        value = float(np.mean([f.value for f in fits]))
        if best is None or value < best[0]:
            best = (value, theta, fits)
    value, theta, fits = best
    return OracleResult(
        best_theta=np.asarray(theta, dtype=float),
        per_task_best_losses=np.array([f.value for f in fits]),
        comparator_value=value,
        strategy=strategy,
        diagnostics=[{"method": f.method, "iterations": f.iterations, "gap": f.gap}
                     for f in fits],
    )


def compound_regret(learner_losses, oracle, T=None, n=None):
    """Average suffered loss minus the comparator value.

    ``learner_losses`` is a ``(T, n)`` array of per-round losses, or a list of
    per-task arrays when task lengths differ.
    """
    rows = [np.asarray(r, dtype=float) for r in learner_losses]
    if len(rows) != len(oracle.per_task_best_losses):
        raise ValueError(f"{len(rows)} learner tasks vs "
                         f"{len(oracle.per_task_best_losses)} oracle tasks")
    if T is not None and len(rows) != T:
        raise ValueError(f"expected {T} tasks, got {len(rows)}")
    if n is not None and any(len(r) != n for r in rows):
        raise ValueError(f"expected {n} rounds per task")
    return float(np.mean([r.mean() for r in rows]) - oracle.comparator_value)


def write_comparator(oracle, csv_path, json_path):
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["task", "best_loss", "method", "iterations", "duality_gap"])
        for t, (v, diag) in enumerate(zip(oracle.per_task_best_losses, oracle.diagnostics)):
            w.writerow([t, f"{v:.17g}", diag["method"], diag["iterations"],
                        f"{diag['gap']:.17g}"])
    with open(json_path, "w", newline="\n") as fh:
        json.dump({
            "strategy": oracle.strategy,
            "best_theta": [float(v) for v in oracle.best_theta],
            "comparator_value": oracle.comparator_value,
            "upper_bound_on_infimum": oracle.upper_bound,
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_comparator(csv_path, json_path):
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    with open(json_path) as fh:
        meta = json.load(fh)
    return OracleResult(
        best_theta=np.array(meta["best_theta"]),
        per_task_best_losses=np.array([float(r["best_loss"]) for r in rows]),
        comparator_value=float(meta["comparator_value"]),
        strategy=meta["strategy"],
        diagnostics=[{"method": r["method"], "iterations": int(r["iterations"]),
                      "gap": float(r["duality_gap"])} for r in rows],
    )
