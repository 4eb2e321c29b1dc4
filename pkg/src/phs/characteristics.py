"""Characteristic maps of the transport equation x_t = (w x)_xi.

For a sign-definite weight w the travel-time function is

    p(xi) = integral_0^xi 1/w(s) ds,

which is strictly monotone. The foot of the characteristic through xi after
time t is xi + mu(xi, t), where mu(xi, t) = p^{-1}(p(xi) + t) - xi.

``CharacteristicMap`` evaluates p, its inverse, mu and the flow, with a cache
of p at increasing nodes so that each evaluation only integrates over one
short cell. The inverse uses a safeguarded Newton iteration (derivative
1/w) inside the cache cell that brackets the target.
"""

from __future__ import annotations

import math
import threading
import weakref
from dataclasses import dataclass, field

import numpy as np

from .coeffs import QuadratureError, ScalarCoefficient
from .errors import ConvergenceError, DomainError, OutOfRangeError, ValidationError

HALF_LINE = "half-line"
FULL_LINE = "full-line"

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_MAX_CACHE_NODES = 2_000_000
_FAR_AWAY = 1e12


def _normalize_domain(domain: str) -> str:
    if domain in (HALF_LINE, "half", "semi-axis", "[0,inf)"):
        return HALF_LINE
    if domain in (FULL_LINE, "full", "line", "R"):
        return FULL_LINE
    raise ValidationError(f"unknown domain {domain!r}")


class CharacteristicMap:
    """Travel time p_w, its inverse and the characteristic displacement mu_w.

    Args:
        weight: sign-definite coefficient w.
        domain: "half-line" for [0, inf) or "full-line" for the real line.
        tol_p: absolute tolerance for p.
        tol_inv: tolerance for p^{-1} (the Newton iteration is polished well
            below it).
        use_closed_form: use the coefficient's closed-form primitive of 1/w
            and its inverse when it has one. Set False to force the cached
            quadrature and Newton route (useful as an independent check).
    """

    def __init__(self, weight: ScalarCoefficient, domain: str = HALF_LINE, tol_p: float = 1e-10,
                 tol_inv: float = 1e-9, use_closed_form: bool = True):
        self.weight = weight
        self.domain = _normalize_domain(domain)
        self.tol_p = float(tol_p)
        self.tol_inv = float(tol_inv)
        self.sign = weight.sign
        lo, hi = weight.domain
        if self.domain == FULL_LINE and math.isfinite(lo):
            raise ValidationError("full-line map needs a weight defined on the whole line")
        if self.domain == HALF_LINE and lo > 0:
            raise ValidationError("half-line map needs a weight defined at xi = 0")
        self._lo = -math.inf if self.domain == FULL_LINE else 0.0
        self._hi = hi
        self.closed_form = bool(use_closed_form) and weight.has_closed_form_reciprocal_primitive() \
            and weight.reciprocal_primitive_inverse(np.zeros(1)) is not None
        self._lock = threading.Lock()
        self._nodes = np.array([0.0])
        self._pvals = np.array([0.0])
        self._breaks = np.array(sorted(weight.breakpoints), dtype=float)

    # -- cache -----------------------------------------------------------
    def _step_from(self, x: float, direction: int) -> float:
        scale = 1.0 + abs(x)
        w = abs(float(self.weight(x)))
        h = min(max(w, 1e-3 * scale), 0.125 * scale)
        nxt = x + direction * h
        # never let a cache cell straddle a breakpoint of the weight
        if direction > 0:
            inside = self._breaks[(self._breaks > x) & (self._breaks < nxt)]
            if inside.size:
                nxt = float(inside[0])
            nxt = min(nxt, self._hi)
        else:
            inside = self._breaks[(self._breaks < x) & (self._breaks > nxt)]
            if inside.size:
                nxt = float(inside[-1])
        return nxt

    def _cell_integral(self, a: float, b: float) -> float:
        tol = 1e-3 * self.tol_p
        try:
            if a <= b:
                return self.weight.integrate(a, b, tol=tol, reciprocal=True)
            return -self.weight.integrate(b, a, tol=tol, reciprocal=True)
        except QuadratureError as exc:
            if abs(exc.error) <= self.tol_p:
                return exc.estimate if a <= b else -exc.estimate
            raise

    def _extend(self, xi_target: float | None = None, q_target: float | None = None,
                direction: int = 1) -> None:
        """Grow the cache until it covers xi_target, or until sign*p reaches q_target."""
        with self._lock:
            nodes = list(self._nodes)
            pvals = list(self._pvals)
            s = self.sign
            if direction > 0:
                new_x, new_p = [], []
                x, pv = nodes[-1], pvals[-1]
                while True:
                    if xi_target is not None and x >= xi_target:
                        break
                    if q_target is not None and s * pv >= q_target:
                        break
                    if x >= self._hi or x > _FAR_AWAY or len(nodes) + len(new_x) > _MAX_CACHE_NODES:
                        break
                    nxt = self._step_from(x, 1)
                    pv = pv + self._cell_integral(x, nxt)
                    x = nxt
                    new_x.append(x)
                    new_p.append(pv)
                self._nodes = np.concatenate([self._nodes, new_x])
                self._pvals = np.concatenate([self._pvals, new_p])
            else:
                new_x, new_p = [], []
                x, pv = nodes[0], pvals[0]
                while True:
                    if xi_target is not None and x <= xi_target:
                        break
                    if q_target is not None and s * pv <= q_target:
                        break
                    if x < -_FAR_AWAY or len(nodes) + len(new_x) > _MAX_CACHE_NODES:
                        break
                    nxt = self._step_from(x, -1)
                    pv = pv + self._cell_integral(x, nxt)
                    x = nxt
                    new_x.append(x)
                    new_p.append(pv)
                self._nodes = np.concatenate([new_x[::-1], self._nodes])
                self._pvals = np.concatenate([new_p[::-1], self._pvals])

    def _partial(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Signed integral of 1/w over [a, b], elementwise, by 20-point Gauss-Legendre."""
        half = 0.5 * (b - a)
        pts = a[:, None] + half[:, None] * (_GL_NODES + 1.0)
        vals = 1.0 / np.asarray(self.weight(pts))
        return half * (vals @ _GL_WEIGHTS)

    @property
    def cache_size(self) -> int:
        return int(self._nodes.size)

    # -- public API --------------------------------------------------------
    def _check_xi(self, xi: np.ndarray) -> None:
        if xi.size and (np.nanmin(xi) < self._lo or np.nanmax(xi) > self._hi):
            raise DomainError("coordinate outside the domain of the characteristic map")

    def p(self, xi):
        """Travel time p(xi) = integral_0^xi 1/w."""
        arr = np.asarray(xi, dtype=float)
        self._check_xi(arr)
        if self.closed_form:
            out = np.asarray(self.weight.reciprocal_primitive(arr), dtype=float)
            return out if out.ndim else float(out)
        flat = arr.ravel()
        if flat.size == 0:
            return arr.copy()
        if flat.max() > self._nodes[-1]:
            self._extend(xi_target=float(flat.max()), direction=1)
        if flat.min() < self._nodes[0]:
            self._extend(xi_target=float(flat.min()), direction=-1)
        nodes, pvals = self._nodes, self._pvals
        k = np.clip(np.searchsorted(nodes, flat, side="right") - 1, 0, nodes.size - 1)
        out = pvals[k] + self._partial(nodes[k], flat)
        out = out.reshape(arr.shape)
        return out if out.ndim else float(out)

    def p_inverse(self, tau, out_of_range: str = "raise"):
        """Inverse travel time: the xi with p(xi) = tau.

        Args:
            tau: target value(s).
            out_of_range: "raise" to raise OutOfRangeError when a target is
                outside the range of p, or "nan" to return NaN there.
        """
        arr = np.asarray(tau, dtype=float)
        flat = arr.ravel().copy()
        result = np.full(flat.shape, np.nan)
        q = self.sign * flat
        valid = np.isfinite(q)
        if self.domain == HALF_LINE:
            valid &= q >= 0
        if self.closed_form:
            with np.errstate(invalid="ignore"):
                xi = np.asarray(self.weight.reciprocal_primitive_inverse(flat), dtype=float)
            xi = np.broadcast_to(xi, flat.shape)
            ok = valid & np.isfinite(xi) & (xi >= self._lo) & (xi <= self._hi)
            result[ok] = xi[ok]
        elif valid.any():
            result[valid] = self._newton_inverse(flat[valid])
        bad = ~np.isfinite(result)
        if bad.any() and out_of_range == "raise":
            raise OutOfRangeError("target outside the range of the travel-time function")
        out = result.reshape(arr.shape)
        return out if out.ndim else float(out)

    def _newton_inverse(self, tau: np.ndarray) -> np.ndarray:
        s = self.sign
        q = s * tau
        if q.max() > s * self._pvals[-1]:
            self._extend(q_target=float(q.max()), direction=1)
        if self.domain == FULL_LINE and q.min() < s * self._pvals[0]:
            self._extend(q_target=float(q.min()), direction=-1)
        nodes, pvals = self._nodes, self._pvals
        qn = s * pvals
        out = np.full(q.shape, np.nan)
        inside = (q >= qn[0]) & (q <= qn[-1])
        if not inside.any():
            return out
        qi = q[inside]
        k = np.clip(np.searchsorted(qn, qi, side="right") - 1, 0, nodes.size - 2)
        lo = nodes[k].copy()
        hi = nodes[k + 1].copy()
        base = nodes[k]
        qbase = qn[k]
        span = qn[k + 1] - qbase
        frac = np.where(span > 0, (qi - qbase) / np.where(span > 0, span, 1.0), 0.0)
        x = lo + frac * (hi - lo)
        # safeguarded Newton on the active set; an element freezes once its step
        # or its residual is at rounding level
        active = np.arange(qi.size)
        for _ in range(100):
            xa = x[active]
            f = qbase[active] + s * self._partial(base[active], xa) - qi[active]
            lo[active] = np.where(f < 0, xa, lo[active])
            hi[active] = np.where(f > 0, xa, hi[active])
            cand = xa - f * np.abs(np.asarray(self.weight(xa)))
            bad = ~((cand >= lo[active]) & (cand <= hi[active])) | ~np.isfinite(cand)
            cand = np.where(bad, 0.5 * (lo[active] + hi[active]), cand)
            small = np.abs(f) <= 2e-16 * (1.0 + np.abs(qi[active]))
            cand = np.where(small, xa, cand)
            done = small | (np.abs(cand - xa) <= 4e-16 * (1.0 + np.abs(xa)))
            x[active] = cand
            active = active[~done]
            if active.size == 0:
                break
        f = qbase + s * self._partial(base, x) - qi
        if active.size and np.any(np.abs(f) > self.tol_p):
            raise ConvergenceError("Newton iteration for the inverse travel time did not converge")
        out[inside] = x
        return out

    def mu(self, xi, t, out_of_range: str = "raise"):
        """Displacement mu(xi, t) = p^{-1}(p(xi) + t) - xi; mu(xi, 0) = 0 exactly."""
        xi_arr, t_arr = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(t, dtype=float))
        target = self.p(xi_arr) + t_arr
        foot = np.asarray(self.p_inverse(target, out_of_range=out_of_range))
        out = np.where(t_arr == 0, 0.0, foot - xi_arr)
        return out if out.ndim else float(out)

    def flow(self, xi, t):
        """Foot xi + mu(xi, t) of the characteristic; -inf where it left the domain."""
        xi_arr, t_arr = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(t, dtype=float))
        target = self.p(xi_arr) + t_arr
        foot = np.asarray(self.p_inverse(target, out_of_range="nan"), dtype=float)
        foot = np.where(t_arr == 0, xi_arr, foot)
        foot = np.where(np.isnan(foot), -np.inf, foot)
        return foot if foot.ndim else float(foot)


_MAP_CACHE: "weakref.WeakKeyDictionary[ScalarCoefficient, dict]" = weakref.WeakKeyDictionary()
_MAP_LOCK = threading.Lock()


def characteristic_map(weight: ScalarCoefficient, domain: str = HALF_LINE, **kwargs) -> CharacteristicMap:
    """Shared CharacteristicMap for a weight (cached per weight object and options)."""
    key = (_normalize_domain(domain),) + tuple(sorted(kwargs.items()))
    with _MAP_LOCK:
        per = _MAP_CACHE.setdefault(weight, {})
        if key not in per:
            per[key] = CharacteristicMap(weight, key[0], **kwargs)
        return per[key]


# ---------------------------------------------------------------------------
# Property suite
# ---------------------------------------------------------------------------


@dataclass
class PropertyResult:
    name: str
    passed: bool
    max_residual: float
    samples: int
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "max_residual": float(self.max_residual),
                "samples": int(self.samples), "note": self.note}


@dataclass
class PropertyReport:
    suite: str
    results: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add(self, name: str, residual: float, tol: float, samples: int, note: str = "") -> None:
        residual = float(residual)
        self.results[name] = PropertyResult(name, bool(np.isfinite(residual) and residual <= tol),
                                            residual, samples, note)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "meta": self.meta,
                "results": {k: v.to_dict() for k, v in self.results.items()}}


def richardson_limit(ts, values) -> np.ndarray:
    """Polynomial extrapolation of values(t) to t = 0 through the given abscissae."""
    ts = np.asarray(ts, dtype=float)
    out = 0.0
    for i in range(ts.size):
        others = np.delete(ts, i)
        coef = np.prod(others / (others - ts[i]))
        out = out + coef * values[i]
    return out


def verify_characteristic_properties(cmap: CharacteristicMap, sample_count: int = 200, seed: int = 0,
                                     tol: float = 1e-6, xi_max: float = 10.0,
                                     t_max: float = 5.0) -> PropertyReport:
    """Check the structural properties of p and mu on random samples.

    Properties: the sign of mu, mu(xi,0)=0 and mu(0,t)=p^{-1}(t), the travel
    time identity t = p(xi+mu)-p(xi), the cocycle law, mu/t -> w as t -> 0,
    the partial derivatives of mu, and the reflection mu_{-w}(xi,t) = mu_w(xi,-t).
    Each residual is relative (divided by 1 + size of the compared quantity).
    The small-time limit is estimated by polynomial extrapolation of the
    quotients at t = 1e-2, 1e-3, 1e-4; the raw quotient error at t = 1e-4 is
    reported in the note.
    """
    rng = np.random.default_rng(seed)
    w = cmap.weight
    s = cmap.sign
    half = cmap.domain == HALF_LINE
    report = PropertyReport("characteristics", meta={"weight": repr(w), "domain": cmap.domain,
                                           "samples": sample_count, "seed": seed, "tol": tol})
    n = sample_count
    lo = 0.0 if half else -xi_max
    xi = rng.uniform(lo, xi_max, n)
    q = s * np.asarray(cmap.p(xi))

    def forward_room(x_q):
        # time available before the characteristic leaves a half-line domain
        if half and s < 0:
            return x_q
        return np.full_like(x_q, np.inf)

    def backward_room(x_q):
        if half and s > 0:
            return x_q
        return np.full_like(x_q, np.inf)

    fr = np.minimum(forward_room(q), t_max)
    t = rng.uniform(0.05, 1.0, n) * fr

    mu = np.asarray(cmap.mu(xi, t))
    # sign of the displacement
    bad = np.sum((t > 0) & ~(s * mu > 0))
    report.add("sign", float(bad), 0.0, n, "count of samples where mu has the wrong sign")
    # initial values
    r0 = np.max(np.abs(np.asarray(cmap.mu(xi, np.zeros(n)))))
    if half and s < 0:
        gone = np.asarray(cmap.flow(np.zeros(n), t + 1e-3))
        r1 = float(np.sum(np.isfinite(gone)))
        note = "mu(xi,0)=0; from xi=0 every positive time leaves the domain"
    else:
        tt = s * np.abs(t)
        r1 = np.max(np.abs(np.asarray(cmap.mu(np.zeros(n), tt)) - np.asarray(cmap.p_inverse(tt)))
                    / (1.0 + np.abs(np.asarray(cmap.p_inverse(tt)))))
        note = "mu(xi,0)=0 and mu(0,t)=p^-1(t)"
    report.add("initial", max(r0, r1), tol, n, note)
    # travel time identity
    res_v = np.abs(np.asarray(cmap.p(xi + mu)) - np.asarray(cmap.p(xi)) - t) / (1.0 + np.abs(t))
    report.add("travel_time", np.max(res_v), tol, n)
    # cocycle
    t1 = rng.uniform(0.0, 0.5, n) * fr
    t2 = rng.uniform(0.0, 0.5, n) * fr
    m12 = np.asarray(cmap.mu(xi, t1 + t2))
    m1 = np.asarray(cmap.mu(xi, t1))
    m2 = np.asarray(cmap.mu(xi + m1, t2))
    res_vi = np.abs(m12 - m1 - m2) / (1.0 + np.abs(m12))
    report.add("cocycle", np.max(res_vi), tol, n)
    # small-time limit mu/t -> w
    ts = np.array([1e-2, 1e-3, 1e-4])
    if half and s < 0:
        keep = q > 2 * ts[0]
    else:
        keep = np.ones(n, bool)
    xk = xi[keep]
    quot = [np.asarray(cmap.mu(xk, np.full(xk.size, tk))) / tk for tk in ts]
    wk = np.asarray(w(xk))
    lim = richardson_limit(ts, quot)
    res_viii = np.abs(lim - wk) / (1.0 + np.abs(wk))
    raw = np.max(np.abs(quot[-1] - wk) / (1.0 + np.abs(wk)))
    report.add("small_time", np.max(res_viii), tol, int(keep.sum()),
               f"extrapolated limit; raw quotient error at t=1e-4 is {raw:.2e}")
    # partial derivatives against central differences
    hx = 1e-5 * (1.0 + np.abs(xi))
    xs = np.maximum(xi, 2 * hx) if half else xi
    room = np.minimum(forward_room(s * np.asarray(cmap.p(np.maximum(xs - hx, lo)))), t_max)
    ts9 = np.minimum(t, 0.5 * room)
    ht = np.minimum(1e-5 * (1.0 + ts9), 0.25 * ts9)
    ok = ts9 > 0
    xs, ts9, hx2, ht = xs[ok], ts9[ok], hx[ok], ht[ok]
    m = np.asarray(cmap.mu(xs, ts9))
    dxi_fd = (np.asarray(cmap.mu(xs + hx2, ts9)) - np.asarray(cmap.mu(xs - hx2, ts9))) / (2 * hx2)
    dt_fd = (np.asarray(cmap.mu(xs, ts9 + ht)) - np.asarray(cmap.mu(xs, np.maximum(ts9 - ht, 0)))) \
        / (ts9 + ht - np.maximum(ts9 - ht, 0))
    foot = np.asarray(w(xs + m))
    dxi_ex = foot / np.asarray(w(xs)) - 1.0
    res_ix = np.maximum(np.abs(dxi_fd - dxi_ex) / (1 + np.abs(dxi_ex)),
                        np.abs(dt_fd - foot) / (1 + np.abs(foot)))
    report.add("derivatives", np.max(res_ix) if res_ix.size else 0.0, tol, int(ok.sum()))
    # reflection w -> -w
    neg = CharacteristicMap(w.negated(), cmap.domain, cmap.tol_p, cmap.tol_inv,
                            use_closed_form=cmap.closed_form)
    br = np.minimum(backward_room(q), t_max)
    tb = rng.uniform(0.0, 0.95, n) * br
    a = np.asarray(neg.mu(xi, tb))
    b = np.asarray(cmap.mu(xi, -tb))
    report.add("reflection", np.max(np.abs(a - b) / (1.0 + np.abs(b))), tol, n)
    return report

