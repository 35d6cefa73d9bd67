"""Certified saddle points of ``x'Sy + c (R_X(x) - R_Y(y))`` over floored simplexes.

Two regimes:

* ``c > 0``: the column player's best response has a closed form, so the
  problem collapses to minimizing the strongly convex ``f(x) = max_y F(x, y)``.
  We run an active-set Newton method on ``f`` with an Armijo line search,
  paired with a step towards the row player's regularized best response.
  When ``c`` is tiny next to ``max|S|`` the scale is approached by
  continuation.
* ``c == 0``: a plain matrix game.  The floors are removed by an affine
  change of variables and the game is solved as a linear program (HiGHS).
  The LP answer is rounded to an exact equilibrium by solving the
  equalizing linear system on its support.  Extragradient with iterate
  averaging is the fallback.

Every answer carries a duality gap computed from exact best responses.
The gap is assembled from nonnegative per-coordinate terms (a KL
divergence plus complementary-slackness terms) rather than as the
difference of two large objective values, so it stays meaningful far
below the rounding error of the objective itself.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import linprog

from .exceptions import ConfigurationError, NonConvergenceError
from .game import MixedStrategy, PayoffMatrix, as_entries, as_weights
from .regularizers import NegEntropy, clipped_softmax_logits
from .validation import SIMPLEX_TOL, check_floor, check_in_simplex

DEFAULT_EPS = 1e-8
DEFAULT_MAX_ITER = 10**6
GAP_CHECK_EVERY = 25
INNER_FLOOR = 1e-150


@dataclass(frozen=True, eq=False)
class RegularizedObjective:
    """``F(x, y) = x' S y + c R_X(x) - c R_Y(y)`` on ``Delta_{floor_x} x Delta_{floor_y}``."""

    S: PayoffMatrix
    reg_scale: float = 0.0
    floor_x: float = 0.0
    floor_y: float = 0.0

    def __post_init__(self):
        S = self.S if isinstance(self.S, PayoffMatrix) else PayoffMatrix(self.S)
        c = float(self.reg_scale)
        if not np.isfinite(c) or c < 0:
            raise ConfigurationError(f"reg_scale must be a nonnegative finite real, got {self.reg_scale!r}")
        d1, d2 = S.shape
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "reg_scale", c)
        object.__setattr__(self, "floor_x", check_floor(self.floor_x, d1, "floor_x"))
        object.__setattr__(self, "floor_y", check_floor(self.floor_y, d2, "floor_y"))

    @property
    def matrix(self):
        return self.S.entries

    @property
    def shape(self):
        return self.S.shape

    @property
    def reg_x(self):
        return NegEntropy(self.shape[0])

    @property
    def reg_y(self):
        return NegEntropy(self.shape[1])

    def value(self, x, y):
        xw, yw = as_weights(x), as_weights(y)
        return _objective(self.matrix, self.reg_scale, xw, yw)


@dataclass(frozen=True)
class SaddleCertificate:
    x: MixedStrategy
    y: MixedStrategy
    value: float
    gap: float
    iterations: int


# ---------------------------------------------------------------------------
# array kernels


def _negentropy(w):
    pos = w > 0
    return float(np.dot(w[pos], np.log(w[pos])) + np.log(w.shape[0]))


def _objective(S, c, x, y):
    val = float(x @ S @ y)
    if c > 0:
        val += c * (_negentropy(x) - _negentropy(y))
    return val


def _kl_terms(a, b, log_b):
    """Elementwise ``a ln(a/b) - a + b`` evaluated without cancellation for a close to b."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = (a - b) / b
        small = np.abs(r) < 1e-4
        series = r * r * (0.5 - r * (1.0 / 6.0 - r / 12.0))
        val = b * np.where(small, series, (1.0 + r) * np.log1p(r) - r)
        bad = ~np.isfinite(val)
        if bad.any():
            # b underflowed (or a is zero): fall back to the logs
            direct = np.where(a > 0, a * (np.log(a) - log_b), 0.0) - a + b
            val = np.where(bad, direct, val)
    return np.where(a > 0, val, b)


def _regularized_piece(w, logits, c, theta):
    """``max_w' [z.w' - R(w')] - [z.w - R(w)]`` scaled by ``c``; ``logits = z``."""
    best, log_un = clipped_softmax_logits(logits, theta)
    log_best = np.log(best, where=best > 0, out=log_un.copy())
    kl = _kl_terms(w, best, log_best)
    total = math.fsum(kl)
    if theta > 0:
        slack = np.maximum(np.log(theta) - log_un, 0.0)
        total += math.fsum(slack * np.maximum(w - theta, 0.0))
    return c * max(total, 0.0)


def _linear_piece(w, score, theta):
    """``max_w' score.w' - score.w`` over the theta-floored simplex."""
    top = score.max()
    return max(math.fsum((w - theta) * (top - score)), 0.0)


def _gap(S, c, theta_x, theta_y, x, y):
    if c > 0:
        gy = _regularized_piece(y, (S.T @ x) / c, c, theta_y)
        gx = _regularized_piece(x, -(S @ y) / c, c, theta_x)
    else:
        gy = _linear_piece(y, S.T @ x, theta_y)
        gx = _linear_piece(x, -(S @ y), theta_x)
    return gx + gy


def _extragradient_step(S, c, theta_x, theta_y, x, y, step):
    """One mirror-prox step; the entropy term is handled exactly inside the prox."""
    shrink = 1.0 / (1.0 + step * c)
    lx, ly = np.log(np.maximum(x, 1e-300)), np.log(np.maximum(y, 1e-300))
    xh, _ = clipped_softmax_logits((lx - step * (S @ y)) * shrink, theta_x)
    yh, _ = clipped_softmax_logits((ly + step * (S.T @ x)) * shrink, theta_y)
    xn, _ = clipped_softmax_logits((lx - step * (S @ yh)) * shrink, theta_x)
    yn, _ = clipped_softmax_logits((ly + step * (S.T @ xh)) * shrink, theta_y)
    return xn, yn, xh, yh


class _Tracker:
    """Keeps the best (lowest-gap) pair seen and the iteration budget."""

    def __init__(self, S, c, theta_x, theta_y, max_iter):
        self.S, self.c = S, c
        self.theta_x, self.theta_y = theta_x, theta_y
        self.max_iter = max_iter
        self.iterations = 0
        self.best = (math.inf, None, None)
        self.last = (math.inf, None, None)

    def check(self, x, y, known=None):
        g = _gap(self.S, self.c, self.theta_x, self.theta_y, x, y) if known is None else known
        if g < self.best[0]:
            self.best = (g, x.copy(), y.copy())
        self.last = (g, x, y)
        return g

    def tick(self, n=1):
        self.iterations += n
        if self.iterations > self.max_iter:
            raise NonConvergenceError(
                f"saddle solver exceeded {self.max_iter} iterations (best gap {self.best[0]:.3e})",
                best_gap=self.best[0], iterations=self.iterations)


def _interior(w, theta):
    """Nudge a warm start strictly inside the simplex (and onto the floor set)."""
    lo = theta if theta > 0 else 1e-12
    w = np.maximum(np.asarray(w, dtype=np.float64), lo)
    if theta <= 0:
        w = w / w.sum()
        return np.maximum(w, 1e-300)
    return _snap(w, theta)


def _reduced(S, c, theta_y, x):
    """``f(x) = max_y F(x, y)`` together with its maximizer."""
    y, _ = clipped_softmax_logits((S.T @ x) / c, theta_y)
    return float(x @ S @ y) + c * (_negentropy(x) - _negentropy(y)), y


def _best_response_jacobian(y, theta):
    yf = np.where(y > theta, y, 0.0) if theta > 0 else y
    mass = yf.sum()
    J = np.diag(yf)
    if mass > 0:
        J -= np.outer(yf, yf) / mass
    return J


def _newton_direction(H, g, free):
    Hf = H[np.ix_(free, free)]
    # centre the gradient first: the multiplier then only carries the small part
    shift = g[free].mean()
    rhs = np.column_stack([g[free] - shift, np.ones(free.sum())])
    try:
        sol = np.linalg.solve(Hf, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(Hf, rhs, rcond=None)[0]
    nu = sol[:, 0].sum() / sol[:, 1].sum()
    d = -(sol[:, 0] - nu * sol[:, 1])
    return d - d.mean(), nu + shift


def _newton_step_direction(S, c, theta_x, theta_y, x, y, grad):
    """Active-set Newton direction for ``f`` and the index set it moves on."""
    d1 = x.shape[0]
    H = (S @ _best_response_jacobian(y, theta_y) @ S.T) / c
    H[np.diag_indices(d1)] += c / x
    active = x <= theta_x
    tol = 1e-14 * max(1.0, float(np.max(np.abs(grad))))
    face, released, first = ~active, [], None
    while True:
        free = ~active
        d_free, nu = _newton_direction(H, grad, free)
        d = np.zeros(d1)
        d[free] = d_free
        if first is None:
            first = d
        lam = np.where(active, grad - nu, np.inf)
        i = int(np.argmin(lam))
        if lam[i] < -tol and free.sum() < d1:
            active[i] = False
            released.append(i)
            continue
        break
    if released and np.any(d[released] < 0):
        # multipliers and the Newton model disagree: stay on the face, the
        # best-response direction takes care of leaving it
        return first, face
    return d, free


def _line_search(S, c, theta_x, theta_y, x, f, d, slope, judge):
    """Backtracking Armijo search along ``d``; returns ``(x, f, y)`` or ``None``."""
    neg = d < 0
    ratios = (x[neg] - theta_x) / -d[neg]
    alpha_max = float(ratios.min()) if ratios.size else math.inf
    alpha = min(1.0, alpha_max)
    while alpha >= 1e-12:
        xn = x + alpha * d
        if alpha == alpha_max:
            xn[neg] = np.where(ratios <= alpha_max, theta_x, xn[neg])
        xn = _snap(xn, theta_x)
        fn, yn = _reduced(S, c, theta_y, xn)
        if fn <= f + 1e-4 * alpha * slope:
            return xn, fn, yn, None
        if -alpha * slope < 1e-9 * max(1.0, abs(f)):
            # f differences are at rounding level here; the gap is the better judge
            g = judge(xn, yn)
            if g is not None:
                return xn, fn, yn, g
        alpha *= 0.5
    return None


def _solve_regularized(S, c, theta_x, theta_y, x0, y0, eps, tracker, stall_limit=30):
    """Minimize the strongly convex ``f(x) = max_y F(x, y)`` over the floored simplex.

    ``f`` is evaluated exactly through the closed-form best response of the
    column player, so line searches have a genuine merit function.  Each
    iteration tries an active-set Newton step and a step towards the row
    player's own regularized best response, and keeps the better one.  The
    second direction moves tiny coordinates multiplicatively, which the
    quadratic model of ``x ln x`` cannot do.
    """
    # on the full simplex a negligible floor stands in for zero
    floor = theta_x if theta_x > 0 else INNER_FLOOR
    x = _interior(x0, floor)
    f, y = _reduced(S, c, theta_y, x)
    best_gap, best_f, stalls = math.inf, math.inf, 0
    known_gap = None
    while True:
        gap = tracker.check(x, y, known_gap)
        if gap <= eps:
            return x, y
        # far from the solution the gap need not fall monotonically, f does
        progress = f < best_f - 1e-13 * max(1.0, abs(f)) or gap < best_gap * (1 - 1e-3)
        best_gap, best_f = min(gap, best_gap), min(f, best_f)
        stalls = 0 if progress else stalls + 1
        if stalls > stall_limit:
            raise NonConvergenceError(
                f"saddle solver stalled at gap {tracker.best[0]:.3e} > eps={eps:.3e}",
                best_gap=tracker.best[0], iterations=tracker.iterations)
        tracker.tick()

        def judge(xn, yn):
            g = _gap(S, c, theta_x, theta_y, xn, yn)
            return g if g < gap else None

        grad = c * (1.0 + np.log(x)) + S @ y
        candidates = []
        d, free = _newton_step_direction(S, c, floor, theta_y, x, y, grad)
        slope = float((grad[free] - grad[free].mean()) @ d[free])
        if slope < 0:
            candidates.append(_line_search(S, c, floor, theta_y, x, f, d, slope, judge))
        target, _ = clipped_softmax_logits(-(S @ y) / c, floor)
        d = target - x
        slope = float((grad - grad.mean()) @ d)
        if slope < 0:
            candidates.append(_line_search(S, c, floor, theta_y, x, f, d, slope, judge))
        candidates = [cand for cand in candidates if cand is not None]
        if not candidates:
            stalls = stall_limit  # rounding floor: one more gap check decides
            known_gap = gap
            continue
        x, f, y, known_gap = min(candidates, key=lambda cand: cand[1])


def _solve_regularized_path(S, c, theta_x, theta_y, x0, y0, eps, tracker):
    """Continuation in ``c`` when the entropy is tiny next to ``S``.

    For ``c << max|S|`` Newton starts far outside its region of fast
    convergence; a decreasing sequence of scales, each warm-started from
    the last and solved loosely, keeps every stage close to quadratic.
    """
    scale = float(np.max(np.abs(S)))
    x, y = x0, y0
    ck = 0.1 * scale
    while ck > 2.0 * c:
        stage = _Tracker(S, ck, theta_x, theta_y, max(tracker.max_iter - tracker.iterations, 1))
        try:
            x, y = _solve_regularized(S, ck, theta_x, theta_y, x, y, 1e-3 * ck, stage)
        except NonConvergenceError:
            if stage.best[1] is not None:
                x, y = stage.best[1], stage.best[2]
        tracker.tick(stage.iterations)
        ck *= 0.1
    return _solve_regularized(S, c, theta_x, theta_y, x, y, eps, tracker)


def _solve_bilinear_lp(M):
    """Equilibrium of ``min_u max_v u'Mv`` on full simplexes via the HiGHS LP solver."""
    d1, d2 = M.shape
    # variables (u, w): minimize w  s.t.  M'u - w <= 0,  sum u = 1,  u >= 0
    cost = np.zeros(d1 + 1)
    cost[-1] = 1.0
    A_ub = np.hstack([M.T, -np.ones((d2, 1))])
    A_eq = np.zeros((1, d1 + 1))
    A_eq[0, :d1] = 1.0
    bounds = [(0, None)] * d1 + [(None, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(d2), A_eq=A_eq, b_eq=[1.0],
                  bounds=bounds, method="highs")
    if res.status != 0:
        return None
    u = np.maximum(res.x[:d1], 0.0)
    v = np.maximum(-np.asarray(res.ineqlin.marginals), 0.0)
    if u.sum() <= 0 or v.sum() <= 0:
        return None
    return u / u.sum(), v / v.sum()


def _reduce_floors(S, theta_x, theta_y):
    """Matrix ``M`` with ``x'Sy = u'Mv`` for ``x = theta_x + a u``, ``y = theta_y + b v``."""
    d1, d2 = S.shape
    a, b = 1.0 - d1 * theta_x, 1.0 - d2 * theta_y
    row_sums = S.sum(axis=1)
    col_sums = S.sum(axis=0)
    M = a * b * S
    if theta_x > 0:
        M = M + theta_x * b * col_sums[None, :]
    if theta_y > 0:
        M = M + a * theta_y * row_sums[:, None]
    if theta_x > 0 and theta_y > 0:
        M = M + theta_x * theta_y * S.sum()
    return M, a, b


def _equalize(M, I, J):
    """Solve for weights on ``J`` making every row in ``I`` indifferent (and vice versa)."""
    sub = M[np.ix_(I, J)]
    nI, nJ = len(I), len(J)
    # column player: sub @ v = w * 1, sum v = 1
    A = np.zeros((nI + 1, nJ + 1))
    A[:nI, :nJ] = sub
    A[:nI, nJ] = -1.0
    A[nI, :nJ] = 1.0
    rhs = np.zeros(nI + 1)
    rhs[nI] = 1.0
    v = np.linalg.lstsq(A, rhs, rcond=None)[0][:nJ]
    B = np.zeros((nJ + 1, nI + 1))
    B[:nJ, :nI] = sub.T
    B[:nJ, nI] = -1.0
    B[nJ, :nI] = 1.0
    rhs = np.zeros(nJ + 1)
    rhs[nJ] = 1.0
    u = np.linalg.lstsq(B, rhs, rcond=None)[0][:nI]
    return u, v


def _polish(M, u, v, eps):
    """Try to round an approximate equilibrium of ``min_u max_v u'Mv`` to an exact one."""
    d1, d2 = M.shape
    best = (_gap(M, 0.0, 0.0, 0.0, u, v), u, v)
    if best[0] <= eps:
        return best
    row_cost = M @ v
    col_gain = M.T @ u
    spread = max(np.ptp(row_cost), np.ptp(col_gain), 1e-300)
    candidates = []
    for tol in (1e-2, 1e-4, 1e-6, 1e-8, 1e-10):
        candidates.append((np.flatnonzero(u > tol), np.flatnonzero(v > tol)))
        candidates.append((np.flatnonzero(row_cost <= row_cost.min() + tol * spread),
                           np.flatnonzero(col_gain >= col_gain.max() - tol * spread)))
    seen = set()
    for I, J in candidates:
        key = (tuple(I), tuple(J))
        if key in seen or len(I) == 0 or len(J) == 0:
            continue
        seen.add(key)
        uI, vJ = _equalize(M, I, J)
        if not (np.all(np.isfinite(uI)) and np.all(np.isfinite(vJ))):
            continue
        if uI.min() < -1e-9 or vJ.min() < -1e-9:
            continue
        un = np.zeros(d1)
        vn = np.zeros(d2)
        un[I] = np.maximum(uI, 0.0)
        vn[J] = np.maximum(vJ, 0.0)
        if un.sum() <= 0 or vn.sum() <= 0:
            continue
        un /= un.sum()
        vn /= vn.sum()
        g = _gap(M, 0.0, 0.0, 0.0, un, vn)
        if g < best[0]:
            best = (g, un, vn)
            if g <= eps:
                break
    return best


def _solve_bilinear(S, theta_x, theta_y, eps, x0, y0, tracker):
    d1, d2 = S.shape
    M, a, b = _reduce_floors(S, theta_x, theta_y)
    scale = float(np.max(np.abs(M)))

    def certified(u, v):
        x, y = theta_x + a * u, theta_y + b * v
        return tracker.check(x, y) <= eps, x, y

    def unlift(w, theta, coef, d):
        if w is None or coef <= 0:
            return np.full(d, 1.0 / d)
        out = np.maximum((w - theta) / coef, 0.0)
        return out / out.sum()

    u, v = unlift(x0, theta_x, a, d1), unlift(y0, theta_y, b, d2)
    if scale == 0.0:
        ok, x, y = certified(u, v)
        if ok:
            return x, y
        scale = 1.0
    Mn = M / scale
    eps_n = eps / scale
    g, pu, pv = _polish(Mn, u, v, eps_n)
    ok, x, y = certified(pu, pv)
    if ok:
        return x, y

    tracker.tick()
    lp = _solve_bilinear_lp(Mn)
    if lp is not None:
        g, pu, pv = _polish(Mn, lp[0], lp[1], eps_n)
        ok, x, y = certified(pu, pv)
        if ok:
            return x, y
        u, v = pu, pv

    # extragradient with averaging; rounding attempted at every gap check
    step = 0.5
    su, sv = np.zeros(d1), np.zeros(d2)
    n_avg = 0
    u = np.maximum(u, 1e-300)
    v = np.maximum(v, 1e-300)
    last = math.inf
    while True:
        for _ in range(GAP_CHECK_EVERY):
            u, v, uh, vh = _extragradient_step(Mn, 0.0, 0.0, 0.0, u, v, step)
            su += uh
            sv += vh
            n_avg += 1
        tracker.tick(GAP_CHECK_EVERY)
        g, pu, pv = _polish(Mn, su / n_avg, sv / n_avg, eps_n)
        ok, x, y = certified(pu, pv)
        if ok:
            return x, y
        if g > last * 0.999:
            step *= 0.5
        last = min(last, g)


# ---------------------------------------------------------------------------
# public operations


def _feasible(obj, x, y):
    xw, yw = as_weights(x), as_weights(y)
    d1, d2 = obj.shape
    if xw.shape[0] != d1 or yw.shape[0] != d2:
        raise ConfigurationError(f"strategies of lengths {xw.shape[0]}, {yw.shape[0]} "
                                 f"do not match a {d1}x{d2} objective")
    check_in_simplex(xw, obj.floor_x, "x")
    check_in_simplex(yw, obj.floor_y, "y")
    return xw, yw


def duality_gap(obj, x, y):
    """``max_y' F(x, y') - min_x' F(x', y)`` with both inner problems solved exactly."""
    xw, yw = _feasible(obj, x, y)
    return _gap(obj.matrix, obj.reg_scale, obj.floor_x, obj.floor_y, xw, yw)


def solve(obj, eps=DEFAULT_EPS, start=None, max_iter=DEFAULT_MAX_ITER):
    """Return a :class:`SaddleCertificate` whose duality gap is at most ``eps``.

    ``start`` is an optional ``(x, y)`` warm start.  Raises
    :class:`NonConvergenceError` (carrying the best gap found) when the
    iteration budget runs out or progress stalls above ``eps``.
    """
    if not eps > 0:
        raise ConfigurationError(f"eps must be positive, got {eps!r}")
    S, c = obj.matrix, obj.reg_scale
    d1, d2 = S.shape
    tx, ty = obj.floor_x, obj.floor_y
    if start is None:
        x0 = y0 = None
    else:
        x0, y0 = (np.asarray(as_weights(w), dtype=np.float64) for w in start)
        if x0.shape[0] != d1 or y0.shape[0] != d2:
            raise ConfigurationError("warm start has the wrong dimensions")
    x, y, gap, iterations = solve_arrays(S, c, tx, ty, eps, x0, y0, max_iter)
    return SaddleCertificate(MixedStrategy(x, tx), MixedStrategy(y, ty),
                             _objective(S, c, x, y), gap, iterations)


def solve_arrays(S, c, theta_x, theta_y, eps, x0=None, y0=None, max_iter=DEFAULT_MAX_ITER):
    """Unvalidated core of :func:`solve` on plain arrays; returns ``(x, y, gap, iterations)``."""
    d1, d2 = S.shape
    if x0 is None:
        x0 = np.full(d1, 1.0 / d1)
    if y0 is None:
        y0 = np.full(d2, 1.0 / d2)
    tracker = _Tracker(S, c, theta_x, theta_y, max_iter)
    if c > 0:
        x, y = _solve_regularized_path(S, c, theta_x, theta_y, x0, y0, eps, tracker)
    else:
        x, y = _solve_bilinear(S, theta_x, theta_y, eps, x0, y0, tracker)
    xs, ys = _snap(x, theta_x), _snap(y, theta_y)
    g, lx, ly = tracker.last
    if xs is x and ys is y and lx is x and ly is y:
        gap = g  # already evaluated on exactly these arrays
    else:
        x, y = xs, ys
        gap = _gap(S, c, theta_x, theta_y, x, y)
    if gap > eps:
        raise NonConvergenceError(f"certificate gap {gap:.3e} exceeds eps={eps:.3e} after rounding",
                                  best_gap=gap, iterations=tracker.iterations)
    return x, y, gap, tracker.iterations


def _snap(w, theta):
    """Project round-off back onto the floored simplex; returns ``w`` itself when it is already there."""
    if w.min() >= theta and abs(w.sum() - 1.0) <= SIMPLEX_TOL * 0.1:
        return w
    w = np.maximum(w, theta)
    s = w.sum()
    if abs(s - 1.0) > SIMPLEX_TOL * 0.1:
        free = w > theta
        excess = s - 1.0
        w = w.copy()
        w[free] -= excess * (w[free] - theta) / (w[free] - theta).sum()
    return w


def comparator_value(matrix_sum, theta=0.0, eps=DEFAULT_EPS):
    """Minimax value ``min_x max_y x' S y`` over ``Delta_theta x Delta_theta``, certified to ``eps``."""
    S = matrix_sum if isinstance(matrix_sum, PayoffMatrix) else PayoffMatrix(as_entries(matrix_sum))
    return solve(RegularizedObjective(S, 0.0, theta, theta), eps).value


__all__ = ["RegularizedObjective", "SaddleCertificate", "duality_gap", "solve", "solve_arrays",
           "comparator_value", "DEFAULT_EPS"]
