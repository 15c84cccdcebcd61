"""Smooth symmetric convex bodies described by their gauge.

A body ``K`` is stored through its Minkowski functional ``|x|_K`` (the
gauge).  Everything else -- support function (dual norm), volume, boundary
curvature, the dual body -- is derived from it, in closed form where one
exists and numerically otherwise.

Spec strings used by the CLI and config files::

    ball
    ellipsoid:a1,...,ad
    superellipsoid:p[:a1,...,ad]
    radial:eps:seed
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import qmc
from scipy.special import gammaln, ndtri

__all__ = [
    "BodySpec",
    "Body",
    "Ball",
    "Ellipsoid",
    "Superellipsoid",
    "RadialBody",
    "DualBody",
    "SupportResult",
    "BodyError",
    "ConvergenceError",
    "CurvatureError",
    "parse_body",
    "make_body",
    "gauge",
    "support",
    "support_point",
    "dual_body",
    "volume",
    "gaussian_curvature",
    "unit_ball_volume",
    "sphere_area",
]


class BodyError(ValueError):
    """Invalid body specification or dimension mismatch."""


class ConvergenceError(RuntimeError):
    """Support maximization did not converge within the multistart budget."""

    def __init__(self, message, best_value, maximizer):
        super().__init__(message)
        self.best_value = best_value
        self.maximizer = maximizer


class CurvatureError(ArithmeticError):
    """Computed Gaussian curvature is not positive."""


def unit_ball_volume(d: int) -> float:
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0))


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return d * unit_ball_volume(d)


@dataclass(frozen=True)
class BodySpec:
    kind: str
    params: tuple = ()

    KINDS = ("ball", "ellipsoid", "superellipsoid", "radial")

    def __str__(self):
        if self.kind == "ball":
            return "ball"
        if self.kind == "ellipsoid":
            return "ellipsoid:" + ",".join(_fmt(a) for a in self.params)
        if self.kind == "superellipsoid":
            p, scales = self.params
            s = f"superellipsoid:{_fmt(p)}"
            if scales:
                s += ":" + ",".join(_fmt(a) for a in scales)
            return s
        if self.kind == "radial":
            eps, seed = self.params
            return f"radial:{_fmt(eps)}:{seed}"
        return self.kind


def _fmt(v):
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def parse_body(text: str, d: int | None = None) -> "Body":
    """Parse a spec string into a Body of dimension ``d``.

    ``d`` may be omitted for ellipsoids and superellipsoids with explicit
    scales, where it is the number of scales.
    """
    text = text.strip()
    head, _, rest = text.partition(":")
    head = head.lower()
    try:
        if head == "ball":
            if rest:
                raise BodyError(f"ball takes no parameters: {text!r}")
            spec = BodySpec("ball")
        elif head == "ellipsoid":
            axes = tuple(float(a) for a in rest.split(","))
            spec = BodySpec("ellipsoid", axes)
        elif head == "superellipsoid":
            p_str, _, scales_str = rest.partition(":")
            scales = tuple(float(a) for a in scales_str.split(",")) if scales_str else ()
            spec = BodySpec("superellipsoid", (float(p_str), scales))
        elif head == "radial":
            eps_str, _, seed_str = rest.partition(":")
            spec = BodySpec("radial", (float(eps_str), int(seed_str or 0)))
        else:
            raise BodyError(f"unknown body kind {head!r}")
    except ValueError as exc:
        if isinstance(exc, BodyError):
            raise
        raise BodyError(f"malformed body spec {text!r}: {exc}") from None
    return make_body(spec, d)


def make_body(spec: BodySpec, d: int | None = None) -> "Body":
    if spec.kind == "ball":
        if d is None:
            raise BodyError("ball needs an explicit dimension")
        return Ball(d)
    if spec.kind == "ellipsoid":
        axes = spec.params
        if d is not None and len(axes) != d:
            raise BodyError(f"ellipsoid has {len(axes)} axes but d={d}")
        return Ellipsoid(axes)
    if spec.kind == "superellipsoid":
        p, scales = spec.params
        if not scales:
            if d is None:
                raise BodyError("superellipsoid without scales needs a dimension")
            scales = (1.0,) * d
        if d is not None and len(scales) != d:
            raise BodyError(f"superellipsoid has {len(scales)} scales but d={d}")
        return Superellipsoid(p, scales)
    if spec.kind == "radial":
        if d is None:
            raise BodyError("radial body needs an explicit dimension")
        eps, seed = spec.params
        return RadialBody(d, eps, seed)
    raise BodyError(f"unknown body kind {spec.kind!r}")


@dataclass
class SupportResult:
    value: float
    maximizer: np.ndarray  # boundary point y with x.y = value
    converged: bool


class Body:
    """Base class.  Subclasses implement ``_gauge`` and ``_gauge_grad``.

    Instances are immutable after construction; cached properties are
    computed once and never changed.
    """

    d: int
    spec: BodySpec
    inner_radius: float
    outer_radius: float

    #: seed for Monte Carlo volume and optimizer multistart
    seed: int = 12345

    # -- primitives -----------------------------------------------------
    def _gauge(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _gauge_grad(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _support_closed(self, x: np.ndarray) -> np.ndarray | None:
        return None

    def separable(self):
        """Return ``(weights, p)`` if gauge(x)^p = sum_i weights_i |x_i|^p."""
        return None

    # -- public ---------------------------------------------------------
    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.d,):
            raise BodyError(f"expected points of dimension {self.d}, got shape {x.shape}")
        return x

    def gauge(self, x):
        x = self._check(x)
        return self._gauge(x)

    def gauge_grad(self, x):
        """Gradient of the gauge (homogeneous of degree 0), x != 0."""
        x = self._check(x)
        return self._gauge_grad(x)

    def support(self, x):
        x = self._check(x)
        closed = self._support_closed(x)
        if closed is not None:
            return closed
        flat = x.reshape(-1, self.d)
        out = np.empty(len(flat))
        for i, xi in enumerate(flat):
            res = _maximize_support(self, xi)
            if not res.converged:
                raise ConvergenceError(
                    f"support({xi}) did not converge", res.value, res.maximizer
                )
            out[i] = res.value
        return out.reshape(x.shape[:-1]) if x.ndim > 1 else out[0]

    @property
    def has_closed_support(self) -> bool:
        return self._support_closed(np.eye(self.d)[0]) is not None

    @cached_property
    def extents(self) -> np.ndarray:
        """max |x_i| over K, i.e. the support function at the coordinate vectors."""
        return np.array([float(self.support(e)) for e in np.eye(self.d)])

    @cached_property
    def volume(self) -> float:
        return _sphere_volume(self)

    def dual(self) -> "Body":
        return DualBody(self)

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec} d={self.d}>"

    def __str__(self):
        return str(self.spec)


class Ball(Body):
    def __init__(self, d: int):
        if d < 1:
            raise BodyError("dimension must be positive")
        self.d = int(d)
        self.spec = BodySpec("ball")
        self.inner_radius = self.outer_radius = 1.0

    def _gauge(self, x):
        return np.sqrt(np.sum(x * x, axis=-1))

    def _gauge_grad(self, x):
        return x / self._gauge(x)[..., None]

    def _support_closed(self, x):
        return self._gauge(x)

    def separable(self):
        return np.ones(self.d), 2

    @cached_property
    def volume(self):
        return unit_ball_volume(self.d)

    def dual(self):
        return self


class Ellipsoid(Body):
    def __init__(self, axes):
        axes = np.asarray(axes, dtype=float)
        if axes.ndim != 1 or len(axes) < 1 or np.any(axes <= 0) or not np.all(np.isfinite(axes)):
            raise BodyError(f"ellipsoid semi-axes must be positive, got {axes}")
        self.axes = axes
        self.d = len(axes)
        self.spec = BodySpec("ellipsoid", tuple(float(a) for a in axes))
        self.inner_radius = float(axes.min())
        self.outer_radius = float(axes.max())

    def _gauge(self, x):
        y = x / self.axes
        return np.sqrt(np.sum(y * y, axis=-1))

    def _gauge_grad(self, x):
        return x / self.axes**2 / self._gauge(x)[..., None]

    def _support_closed(self, x):
        y = x * self.axes
        return np.sqrt(np.sum(y * y, axis=-1))

    def separable(self):
        return 1.0 / self.axes**2, 2

    @cached_property
    def extents(self):
        return self.axes.copy()

    @cached_property
    def volume(self):
        return unit_ball_volume(self.d) * float(np.prod(self.axes))

    def dual(self):
        return Ellipsoid(1.0 / self.axes)


class Superellipsoid(Body):
    """|x|_K = (sum |x_i/a_i|^p)^(1/p) for even p in [2, 8].

    Curvature vanishes at the axis points once p > 2, so the curvature
    hypothesis of the asymptotic machinery fails there; such bodies are
    accepted but flagged through ``degenerate_curvature``.
    """

    def __init__(self, p, scales):
        p = float(p)
        if not p.is_integer() or int(p) % 2 or not 2 <= p <= 8:
            raise BodyError(f"superellipsoid exponent must be even in [2, 8], got {p}")
        scales = np.asarray(scales, dtype=float)
        if np.any(scales <= 0):
            raise BodyError("superellipsoid scales must be positive")
        self.p = int(p)
        self.scales = scales
        self.d = len(scales)
        self.spec = BodySpec("superellipsoid", (float(p), tuple(float(a) for a in scales)))
        self.inner_radius = float(scales.min())
        self.outer_radius = float(self.d ** (0.5 - 1.0 / self.p) * scales.max())
        self.degenerate_curvature = self.p > 2

    def _gauge(self, x):
        y = np.abs(x / self.scales)
        m = y.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return m[..., 0] * np.sum((y / safe) ** self.p, axis=-1) ** (1.0 / self.p)

    def _gauge_grad(self, x):
        g = self._gauge(x)[..., None]
        y = x / self.scales
        return np.sign(y) * (np.abs(y) / g) ** (self.p - 1) / self.scales

    def _support_closed(self, x):
        # dual of l_p is l_{p'}; scaling by the axes carries over
        pp = self.p / (self.p - 1.0)
        y = np.abs(x * self.scales)
        m = y.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return m[..., 0] * np.sum((y / safe) ** pp, axis=-1) ** (1.0 / pp)

    def separable(self):
        return self.scales ** (-float(self.p)), self.p

    @cached_property
    def extents(self):
        return self.scales.copy()

    def closed_form_volume(self) -> float:
        """2^d prod(a) Gamma(1+1/p)^d / Gamma(1+d/p); used to validate quadrature."""
        p, d = self.p, self.d
        return float(
            2.0**d * np.prod(self.scales)
            * math.exp(d * gammaln(1.0 + 1.0 / p) - gammaln(1.0 + d / p))
        )


class RadialBody(Body):
    """Star body rho(theta) = 1 + eps * g(theta) with a seeded smooth even g.

    g(u) = sum_j c_j (u . v_j)^(2 m_j) with random unit v_j, m_j in {1, 2}
    and sum |c_j| = 1, so |g| <= 1 and 1 - eps <= rho <= 1 + eps.
    """

    N_TERMS = 3

    def __init__(self, d: int, eps: float, seed: int = 0, *, check: bool = True):
        eps = float(eps)
        if not 0 <= eps < 0.5:
            raise BodyError(f"radial perturbation amplitude must be in [0, 0.5), got {eps}")
        self.d = int(d)
        self.eps = eps
        self.seed_value = int(seed)
        self.spec = BodySpec("radial", (eps, int(seed)))
        rng = np.random.default_rng(seed)
        v = rng.standard_normal((self.N_TERMS, self.d))
        self._dirs = v / np.linalg.norm(v, axis=1, keepdims=True)
        c = rng.uniform(-1.0, 1.0, self.N_TERMS)
        self._coef = c / np.sum(np.abs(c))
        self._powers = 2 * rng.integers(1, 3, self.N_TERMS)
        self.inner_radius = 1.0 - eps
        self.outer_radius = 1.0 + eps
        if check and eps > 0:
            margin = self.convexity_margin()
            if margin <= 0:
                raise BodyError(
                    f"radial:{eps}:{seed} is not convex (min tangential Hessian {margin:.3g})"
                )

    def _g(self, u):
        s = u @ self._dirs.T
        return np.sum(self._coef * s**self._powers, axis=-1)

    def _g_grad(self, u):
        s = u @ self._dirs.T
        w = self._coef * self._powers * s ** (self._powers - 1)
        return w @ self._dirs

    def rho(self, u):
        return 1.0 + self.eps * self._g(u)

    def _gauge(self, x):
        r = np.sqrt(np.sum(x * x, axis=-1))
        safe = np.where(r > 0, r, 1.0)
        u = x / safe[..., None]
        return np.where(r > 0, r / self.rho(u), 0.0)

    def _gauge_grad(self, x):
        r = np.sqrt(np.sum(x * x, axis=-1))[..., None]
        u = x / r
        rho = self.rho(u)[..., None]
        gg = self._g_grad(u)
        tang = gg - np.sum(gg * u, axis=-1, keepdims=True) * u
        return u / rho - self.eps * tang / rho**2

    def convexity_margin(self, n_dirs: int | None = None) -> float:
        """Smallest eigenvalue of the gauge Hessian on tangent planes of dK.

        Positive everywhere on the sampled normal grid means positive
        Gaussian curvature there.
        """
        n_dirs = n_dirs or 200 * self.d
        rng = np.random.default_rng(self.seed_value + 1)
        u = rng.standard_normal((n_dirs, self.d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = u * self.rho(u)[:, None]
        h = 1e-5
        worst = np.inf
        for y in pts:
            H = np.empty((self.d, self.d))
            for j in range(self.d):
                e = np.zeros(self.d)
                e[j] = h
                H[:, j] = (self._gauge_grad(y + e) - self._gauge_grad(y - e)) / (2 * h)
            H = 0.5 * (H + H.T)
            n = self._gauge_grad(y)
            n /= np.linalg.norm(n)
            B = _tangent_basis(n)
            worst = min(worst, float(np.linalg.eigvalsh(B.T @ H @ B).min()))
        return worst


class DualBody(Body):
    """K* = {x : support_K(x) <= 1}; its support function is the gauge of K."""

    def __init__(self, primal: Body):
        self.primal = primal
        self.d = primal.d
        self.spec = BodySpec(f"dual({primal.spec})")
        self.inner_radius = 1.0 / primal.outer_radius
        self.outer_radius = 1.0 / primal.inner_radius

    def _gauge(self, x):
        closed = self.primal._support_closed(x)
        if closed is not None:
            return closed
        return np.asarray(self.primal.support(x))

    def _gauge_grad(self, x):
        flat = x.reshape(-1, self.d)
        out = np.empty_like(flat)
        for i, xi in enumerate(flat):
            # the gradient of a support function is its maximizer
            res = _maximize_support(self.primal, xi)
            out[i] = res.maximizer
        return out.reshape(x.shape)

    def _support_closed(self, x):
        return self.primal._gauge(x)

    def dual(self):
        return self.primal

    def __str__(self):
        return f"dual({self.primal})"


# ---------------------------------------------------------------------------
# module-level operations


def gauge(body: Body, x) -> np.ndarray:
    """Minkowski functional |x|_K; vectorized over leading axes."""
    return body.gauge(x)


def support(body: Body, x) -> np.ndarray:
    """Dual norm |x|_{K*} = sup_{y in K} |x.y|."""
    return body.support(x)


def support_point(body: Body, x, start=None) -> SupportResult:
    """Support value together with the maximizing boundary point."""
    x = body._check(x)
    closed = body._support_closed(x)
    if closed is not None and isinstance(body, (Ball, Ellipsoid, Superellipsoid)):
        y = _closed_maximizer(body, x, float(closed))
        return SupportResult(float(closed), y, True)
    return _maximize_support(body, x, start=start)


def dual_body(body: Body) -> Body:
    return body.dual()


def volume(body: Body) -> float:
    return body.volume


def _tangent_basis(n: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the hyperplane orthogonal to ``n``."""
    d = len(n)
    q, _ = np.linalg.qr(np.column_stack([n, np.eye(d)]))
    return q[:, 1:d]


def gaussian_curvature(body: Body, theta, step: float = 1e-4) -> float:
    """Gaussian curvature of dK at the point with outward unit normal theta.

    Uses the support function h: the Hessian of the 1-homogeneous h
    restricted to theta-perp has the principal radii of curvature as
    eigenvalues, so the curvature is 1/det.  Second differences use
    step ``step`` and ``step/2`` combined by Richardson extrapolation.
    """
    theta = np.asarray(theta, dtype=float)
    nrm = np.linalg.norm(theta)
    if abs(nrm - 1.0) > 1e-8:
        raise BodyError("theta must be a unit vector")
    theta = theta / nrm
    d = body.d
    if d == 1:
        return math.inf
    B = _tangent_basis(theta)

    if body._support_closed(theta) is not None:
        h = lambda x: float(body._support_closed(x))
    else:
        anchor = support_point(body, theta)
        if not anchor.converged:
            raise ConvergenceError("support at theta did not converge", anchor.value, anchor.maximizer)
        y0 = anchor.maximizer

        def h(x):
            res = _maximize_support(body, x, start=y0 / np.linalg.norm(y0), local_only=True)
            return res.value

    def hessian(s):
        m = d - 1
        H = np.empty((m, m))
        h0 = h(theta)
        for i in range(m):
            ei = B[:, i] * s
            H[i, i] = (h(theta + ei) - 2 * h0 + h(theta - ei)) / s**2
            for j in range(i + 1, m):
                ej = B[:, j] * s
                H[i, j] = H[j, i] = (
                    h(theta + ei + ej) - h(theta + ei - ej) - h(theta - ei + ej) + h(theta - ei - ej)
                ) / (4 * s * s)
        return H

    H = (4.0 * hessian(step / 2) - hessian(step)) / 3.0
    det = float(np.linalg.det(0.5 * (H + H.T)))
    if not det > 0 or not math.isfinite(det):
        raise CurvatureError(f"non-positive radii of curvature at theta={theta} (det={det:.3g})")
    return 1.0 / det


# ---------------------------------------------------------------------------
# numerics


def _closed_maximizer(body, x, value):
    if value == 0:
        return np.zeros(body.d)
    if isinstance(body, Ball):
        return x / value
    if isinstance(body, Ellipsoid):
        return body.axes**2 * x / value
    # superellipsoid: Hoelder equality case
    pp = body.p / (body.p - 1.0)
    z = x * body.scales
    w = np.sign(z) * (np.abs(z) / value) ** (pp - 1)
    return w * body.scales


def _maximize_support(body: Body, x, start=None, local_only=False) -> SupportResult:
    """Maximize x.y over y in dK by projected-gradient ascent on the sphere.

    The objective F(u) = x.u / gauge(u) on unit u is smooth and odd, so
    starts are flipped to the x side.  Multistart uses 8*d starts (the
    coordinate directions plus seeded random directions); the best local
    maximum is then polished with Newton steps in tangent coordinates.
    """
    x = np.asarray(x, dtype=float)
    d = body.d
    xn = np.linalg.norm(x)
    if xn == 0:
        return SupportResult(0.0, np.zeros(d), True)

    def F(u):
        return float(x @ u / body._gauge(u))

    def tgrad(u):
        g = float(body._gauge(u))
        grad = x / g - (x @ u) * body._gauge_grad(u) / g**2
        return grad - (grad @ u) * u

    def ascend(u, iters=400):
        u = u / np.linalg.norm(u)
        f = F(u)
        eta = 0.5
        for _ in range(iters):
            gr = tgrad(u)
            gn = np.linalg.norm(gr)
            if gn <= 1e-13 * xn:
                break
            while True:
                v = u + (eta / xn) * gr
                v /= np.linalg.norm(v)
                fv = F(v)
                if fv >= f:
                    break
                eta *= 0.5
                if eta < 1e-14:
                    return u, f
            step_gain = fv - f
            u, f = v, fv
            eta = min(eta * 1.6, 4.0)
            if step_gain <= 1e-16 * abs(f):
                break
        return u, f

    if start is not None:
        starts = [np.asarray(start, dtype=float)]
    else:
        rng = np.random.default_rng(body.seed)
        starts = [x / xn]
        starts += list(np.eye(d))
        starts += list(-np.eye(d))
        starts += list(rng.standard_normal((8 * d - 2 * d - 1, d)))
    best_u, best_f = None, -np.inf
    for s in starts:
        s = np.asarray(s, dtype=float)
        if np.linalg.norm(s) == 0:
            continue
        if x @ s < 0:
            s = -s
        u, f = ascend(s, iters=60 if (not local_only and start is None) else 400)
        if f > best_f:
            best_u, best_f = u, f
    u, f = ascend(best_u, iters=2000)
    u, f, gnorm = _newton_polish(F, tgrad, u, f, xn)
    converged = gnorm <= 1e-7 * xn
    y = u / float(body._gauge(u))
    return SupportResult(float(f), y, bool(converged))


def _newton_polish(F, tgrad, u, f, scale, iters=6):
    d = len(u)
    for _ in range(iters):
        B = _tangent_basis(u)
        g = B.T @ tgrad(u)
        if np.linalg.norm(g) <= 1e-14 * scale:
            break
        h = 1e-6
        H = np.empty((d - 1, d - 1))
        for j in range(d - 1):
            up = u + h * B[:, j]
            um = u - h * B[:, j]
            up /= np.linalg.norm(up)
            um /= np.linalg.norm(um)
            H[:, j] = (B.T @ tgrad(up) - B.T @ tgrad(um)) / (2 * h)
        H = 0.5 * (H + H.T)
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        v = u + B @ step
        v /= np.linalg.norm(v)
        fv = F(v)
        if fv < f - 1e-15 * abs(f):
            break
        u, f = v, fv
    return u, f, float(np.linalg.norm(tgrad(u)))


def _sphere_rule(d: int, n: int):
    """Product rule on S^{d-1}: Gauss-Legendre in the polar angles,
    trapezoid in the periodic azimuth.  Returns (directions, weights)."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    m = 2 * n
    phi = 2 * np.pi * np.arange(m) / m
    dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    w = np.full(m, 2 * np.pi / m)
    for k in range(3, d + 1):
        # prepend polar angle a in [0, pi] with weight sin^{k-2}(a)
        x, wa = np.polynomial.legendre.leggauss(n)
        a = 0.5 * np.pi * (x + 1.0)
        wa = 0.5 * np.pi * wa * np.sin(a) ** (k - 2)
        dirs = np.concatenate(
            [
                np.repeat(np.cos(a), len(dirs))[:, None],
                (np.sin(a)[:, None, None] * dirs[None, :, :]).reshape(-1, k - 1),
            ],
            axis=1,
        )
        w = (wa[:, None] * w[None, :]).ravel()
    return dirs, w


def _sphere_volume(body: Body, n: int | None = None) -> float:
    """Vol K = (1/d) * integral over S^{d-1} of rho^d, rho = 1/gauge."""
    d = body.d
    if d <= 4:
        n = n or {1: 1, 2: 256, 3: 96, 4: 48}[d]
        dirs, w = _sphere_rule(d, n)
        rho = 1.0 / np.asarray(body.gauge(dirs))
        return float(np.sum(w * rho**d) / d)
    sob = qmc.Sobol(d, scramble=True, seed=body.seed)
    u = sob.random_base2(16)
    z = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    rho = 1.0 / np.asarray(body.gauge(z))
    return float(unit_ball_volume(d) * np.mean(rho**d))
