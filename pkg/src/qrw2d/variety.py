"""Geometry of V1 = {H = 0} on the unit torus in angle coordinates (alpha, beta, gamma).

V1 is covered by the sheets gamma_k(alpha, beta), k = 0..3, ordered by argument of
the z-roots at each (alpha, beta).  Along a sheet,

    velocity = -grad gamma = (x H_x, y H_y) / (z H_z)

is the logarithmic Gauss map in the chart (r/n, s/n), and the Gauss-Kronecker
curvature of V1 in the flat torus is computed three independent ways.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT_TOLERANCES, Tolerances
from .genfun import TWO_PI, TorusPoint3, build_H, roots_in_z
from .laurent import LaurentPoly3, euler_table, evaluate, grad as poly_grad
from .model import CoinModel


class VerticalTangentError(ArithmeticError):
    """z dH/dz vanishes, so the sheet is not a graph over (alpha, beta) here."""


class SingularPointError(ArithmeticError):
    """The gradient of the defining function vanishes."""


# Euler-derivative orders used by the local geometry, in this order.
_ORDERS = [(1, 0, 0), (0, 1, 0), (0, 0, 1),
           (2, 0, 0), (1, 1, 0), (0, 2, 0),
           (1, 0, 1), (0, 1, 1), (0, 0, 2)]


def wrap(theta):
    return np.mod(theta, TWO_PI)


def circ_dist(a, b):
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi)
    return d


# --------------------------------------------------------------------------
# sheets

def sheet_gammas(model: CoinModel, alpha, beta) -> np.ndarray:
    """Arguments of the four z-roots, sorted, shape (..., 4)."""
    H = build_H(model)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    roots = roots_in_z(H, np.exp(1j * alpha), np.exp(1j * beta))
    return wrap(np.angle(roots))


def nearest_sheet_gamma(model: CoinModel, alpha, beta, gamma_ref) -> np.ndarray:
    """Sheet value at (alpha, beta) closest (on the circle) to ``gamma_ref``."""
    g = sheet_gammas(model, alpha, beta)
    idx = np.argmin(circ_dist(g, np.asarray(gamma_ref)[..., None]), axis=-1)
    return np.take_along_axis(g, idx[..., None], axis=-1)[..., 0]


@dataclass(frozen=True)
class LocalGeometry:
    """Vectorised first and second order data of the sheets at given points."""

    grad_log: np.ndarray       # (..., 3) complex: (x H_x, y H_y, z H_z)
    velocity: np.ndarray       # (..., 2) real
    hess_gamma: np.ndarray     # (..., 2, 2) real
    imag_residue: np.ndarray   # (...) max imaginary part discarded when taking real parts

    @property
    def curvature(self) -> np.ndarray:
        det = np.linalg.det(self.hess_gamma)
        return det / (1.0 + np.sum(self.velocity ** 2, axis=-1)) ** 2


def local_geometry(model: CoinModel, alpha, beta, gamma) -> LocalGeometry:
    """Velocity and Hessian of gamma by implicit differentiation of H(e^{ia}, e^{ib}, e^{ig}) = 0.

    With E_pqr the Euler derivatives of H, the angle derivatives of H o exp are
    i^(p+q+r) E_pqr, which gives the formulas below.
    """
    H = build_H(model)
    x = np.exp(1j * np.asarray(alpha, dtype=float))
    y = np.exp(1j * np.asarray(beta, dtype=float))
    z = np.exp(1j * np.asarray(gamma, dtype=float))
    e = euler_table(H, _ORDERS, x, y, z)
    ea, eb, eg, eaa, eab, ebb, eag, ebg, egg = (e[..., k] for k in range(9))
    with np.errstate(divide="ignore", invalid="ignore"):
        ga = -ea / eg
        gb = -eb / eg
        haa = -1j * (eaa + 2 * eag * ga + egg * ga * ga) / eg
        hab = -1j * (eab + eag * gb + ebg * ga + egg * ga * gb) / eg
        hbb = -1j * (ebb + 2 * ebg * gb + egg * gb * gb) / eg
    vel_c = np.stack([-ga, -gb], axis=-1)
    hess_c = np.stack([np.stack([haa, hab], -1), np.stack([hab, hbb], -1)], -2)
    imag = np.maximum(np.max(np.abs(vel_c.imag), axis=-1),
                      np.max(np.abs(hess_c.imag), axis=(-1, -2)))
    return LocalGeometry(
        grad_log=np.stack([ea, eb, eg], axis=-1),
        velocity=vel_c.real,
        hess_gamma=hess_c.real,
        imag_residue=imag,
    )


@dataclass(frozen=True)
class SheetPoint:
    base: TorusPoint3
    sheet: int
    grad_log_H: np.ndarray = field(repr=False)
    velocity: np.ndarray
    curvature: float
    coincident: bool = False

    @property
    def alpha(self) -> float:
        return self.base.alpha

    @property
    def beta(self) -> float:
        return self.base.beta

    @property
    def gamma(self) -> float:
        return self.base.gamma


def make_sheet_point(model: CoinModel, alpha: float, beta: float, gamma: float,
                     sheet: int = -1, coincident: bool = False) -> SheetPoint:
    geo = local_geometry(model, alpha, beta, gamma)
    return SheetPoint(
        base=TorusPoint3(float(wrap(alpha)), float(wrap(beta)), float(wrap(gamma))),
        sheet=int(sheet),
        grad_log_H=np.asarray(geo.grad_log),
        velocity=np.asarray(geo.velocity),
        curvature=float(geo.curvature),
        coincident=coincident,
    )


def sheets(model: CoinModel, alpha: float, beta: float,
           tol: Tolerances = DEFAULT_TOLERANCES) -> list[SheetPoint]:
    """The four points of V1 above (alpha, beta), in order of increasing gamma."""
    g = sheet_gammas(model, alpha, beta)
    gaps = circ_dist(g, np.roll(g, 1))
    out = []
    for k in range(len(g)):
        close = bool(min(gaps[k], gaps[(k + 1) % len(g)]) < tol.root_gap)
        out.append(make_sheet_point(model, alpha, beta, g[k], k, close))
    return out


def gauss_velocity(model: CoinModel, p: SheetPoint | TorusPoint3,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    base = p.base if isinstance(p, SheetPoint) else p
    x, y, z = base.x, base.y, base.z
    gl = euler_table(build_H(model), _ORDERS[:3], x, y, z)
    if abs(gl[2]) < tol.vertical_tangent:
        raise VerticalTangentError(f"|z H_z| = {abs(gl[2]):.2e} at {base}")
    return np.array([(gl[0] / gl[2]).real, (gl[1] / gl[2]).real])


# --------------------------------------------------------------------------
# real sections and curvature

class RealSection:
    """A real function on the flat torus whose zero set is V1 near smooth points."""

    name = "abstract"

    def value(self, a, b, g):
        raise NotImplementedError

    def gradient(self, a, b, g) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, a, b, g) -> np.ndarray:
        raise NotImplementedError


class SRealSection(RealSection):
    """L = 2 sin g cos g - sqrt(2t)(sin b cos g + cos a sin g) + cos a sin b."""

    name = "S"

    def __init__(self, t: float):
        self.t = t
        self.c = np.sqrt(2 * t)

    def value(self, a, b, g):
        c = self.c
        return (2 * np.sin(g) * np.cos(g) - c * (np.sin(b) * np.cos(g) + np.cos(a) * np.sin(g))
                + np.cos(a) * np.sin(b))

    def gradient(self, a, b, g):
        c = self.c
        la = c * np.sin(a) * np.sin(g) - np.sin(a) * np.sin(b)
        lb = -c * np.cos(b) * np.cos(g) + np.cos(a) * np.cos(b)
        lg = 2 * np.cos(2 * g) - c * (-np.sin(b) * np.sin(g) + np.cos(a) * np.cos(g))
        return np.stack(np.broadcast_arrays(la, lb, lg), axis=-1)

    def hessian(self, a, b, g):
        c = self.c
        laa = c * np.cos(a) * np.sin(g) - np.cos(a) * np.sin(b)
        lab = -np.sin(a) * np.cos(b)
        lag = c * np.sin(a) * np.cos(g)
        lbb = c * np.sin(b) * np.cos(g) - np.cos(a) * np.sin(b)
        lbg = c * np.cos(b) * np.sin(g)
        lgg = -4 * np.sin(2 * g) + c * (np.sin(b) * np.cos(g) + np.cos(a) * np.sin(g))
        return _sym3(laa, lab, lag, lbb, lbg, lgg)


class BRealSection(RealSection):
    """L = 2 cos^2 g - sqrt(2t)(cos a + cos b) cos g + cos a cos b + t - 1."""

    name = "B"

    def __init__(self, t: float):
        self.t = t
        self.c = np.sqrt(2 * t)

    def value(self, a, b, g):
        c = self.c
        return (2 * np.cos(g) ** 2 - c * (np.cos(a) + np.cos(b)) * np.cos(g)
                + np.cos(a) * np.cos(b) + self.t - 1)

    def gradient(self, a, b, g):
        c = self.c
        la = c * np.sin(a) * np.cos(g) - np.sin(a) * np.cos(b)
        lb = c * np.sin(b) * np.cos(g) - np.cos(a) * np.sin(b)
        lg = -2 * np.sin(2 * g) + c * (np.cos(a) + np.cos(b)) * np.sin(g)
        return np.stack(np.broadcast_arrays(la, lb, lg), axis=-1)

    def hessian(self, a, b, g):
        c = self.c
        laa = c * np.cos(a) * np.cos(g) - np.cos(a) * np.cos(b)
        lab = np.sin(a) * np.sin(b)
        lag = -c * np.sin(a) * np.sin(g)
        lbb = c * np.cos(b) * np.cos(g) - np.cos(a) * np.cos(b)
        lbg = -c * np.sin(b) * np.sin(g)
        lgg = -4 * np.cos(2 * g) + c * (np.cos(a) + np.cos(b)) * np.cos(g)
        return _sym3(laa, lab, lag, lbb, lbg, lgg)


class NormalizedRealSection(RealSection):
    """Re(x^-1 y^-1 z^-2 H / sqrt(det U)), which is real-valued on the torus.

    On |x| = |y| = |z| = 1 this equals a real multiple of prod_k sin((gamma + theta_k)/2)
    where e^{i theta_k} are the eigenvalues of M U.
    """

    name = "normalized"

    def __init__(self, model: CoinModel):
        phase = np.sqrt(complex(np.linalg.det(model.coin)))
        self.poly: LaurentPoly3 = build_H(model).shift(-1, -1, -2) * (1.0 / phase)

    def _table(self, orders, a, b, g):
        x = np.exp(1j * np.asarray(a, dtype=float))
        y = np.exp(1j * np.asarray(b, dtype=float))
        z = np.exp(1j * np.asarray(g, dtype=float))
        e = euler_table(self.poly, orders, x, y, z)
        powers = np.array([1j ** sum(o) for o in orders])
        return e * powers

    def value(self, a, b, g):
        return self._table([(0, 0, 0)], a, b, g)[..., 0].real

    def imag_residue(self, a, b, g):
        return np.abs(self._table([(0, 0, 0)], a, b, g)[..., 0].imag)

    def gradient(self, a, b, g):
        return self._table(_ORDERS[:3], a, b, g).real

    def hessian(self, a, b, g):
        t = self._table(_ORDERS[3:], a, b, g).real
        laa, lab, lbb, lag, lbg, lgg = (t[..., k] for k in range(6))
        return _sym3(laa, lab, lag, lbb, lbg, lgg)


def _sym3(aa, ab, ag, bb, bg, gg):
    aa, ab, ag, bb, bg, gg = np.broadcast_arrays(aa, ab, ag, bb, bg, gg)
    return np.stack([
        np.stack([aa, ab, ag], -1),
        np.stack([ab, bb, bg], -1),
        np.stack([ag, bg, gg], -1),
    ], -2)


def real_section(model: CoinModel) -> RealSection:
    if model.family == "S":
        return SRealSection(model.t)
    if model.family == "B":
        return BRealSection(model.t)
    return NormalizedRealSection(model)


def implicit_curvature(section: RealSection, a, b, g, tol: Tolerances = DEFAULT_TOLERANCES):
    """K = det(Q restricted to grad-perp) / |grad|^2 for the surface {L = 0} in R^3."""
    grad_l = section.gradient(a, b, g)
    hess = section.hessian(a, b, g)
    gnorm = np.linalg.norm(grad_l, axis=-1)
    if np.any(gnorm < tol.vertical_tangent):
        raise SingularPointError(f"|grad L| = {np.min(gnorm):.2e}")
    basis = _perp_basis(grad_l / gnorm[..., None])
    q = np.einsum("...ia,...ij,...jb->...ab", basis, hess, basis)
    return np.linalg.det(q) / gnorm ** 2


def _perp_basis(n: np.ndarray) -> np.ndarray:
    """Orthonormal basis (..., 3, 2) of the plane orthogonal to unit vectors n."""
    k = np.argmin(np.abs(n), axis=-1)
    e = np.zeros_like(n)
    np.put_along_axis(e, k[..., None], 1.0, axis=-1)
    u1 = e - np.sum(e * n, axis=-1, keepdims=True) * n
    u1 /= np.linalg.norm(u1, axis=-1, keepdims=True)
    u2 = np.cross(n, u1)
    return np.stack([u1, u2], axis=-1)


def graph_curvature(model: CoinModel, a, b, g):
    """K = det Hess(gamma) / (1 + |grad gamma|^2)^2 for gamma viewed as a graph over (a, b)."""
    return local_geometry(model, a, b, g).curvature


def area_ratio_curvature(model: CoinModel, a: float, b: float, g: float, h: float = 1e-5) -> float:
    """Jacobian of (a, b) -> unit normal, from central differences of the Gauss velocity.

    The unit normal is (v, 1)/|(v, 1)|; its area element on the sphere is
    det(dv) / (1 + |v|^2)^(3/2) and the sheet's area element is (1 + |v|^2)^(1/2).
    """
    offsets = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
    aa = a + offsets[:, 0]
    bb = b + offsets[:, 1]
    gg = nearest_sheet_gamma(model, aa, bb, np.full(4, g))
    v = local_geometry(model, aa, bb, gg).velocity
    jac = np.column_stack([(v[0] - v[1]) / (2 * h), (v[2] - v[3]) / (2 * h)])
    v0 = local_geometry(model, a, b, g).velocity
    return float(np.linalg.det(jac) / (1.0 + v0 @ v0) ** 2)


def curvature(model: CoinModel, p: SheetPoint | TorusPoint3, method: str = "graph",
              tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    base = p.base if isinstance(p, SheetPoint) else p
    a, b, g = base.alpha, base.beta, base.gamma
    if method == "graph":
        geo = local_geometry(model, a, b, g)
        if abs(geo.grad_log[2]) < tol.vertical_tangent:
            raise SingularPointError(f"|z H_z| = {abs(geo.grad_log[2]):.2e} at {base}")
        return float(geo.curvature)
    if method == "implicit":
        return float(implicit_curvature(real_section(model), a, b, g, tol))
    if method == "area":
        return area_ratio_curvature(model, a, b, g)
    raise ValueError(f"unknown curvature method {method!r}")


# --------------------------------------------------------------------------
# grid sampling and Gauss-map preimages

@dataclass(frozen=True)
class SheetGrid:
    alpha: np.ndarray      # (n, n)
    beta: np.ndarray       # (n, n)
    gamma: np.ndarray      # (n, n, 4)
    velocity: np.ndarray   # (n, n, 4, 2); NaN where z H_z vanishes
    curvature: np.ndarray  # (n, n, 4)
    zhz: np.ndarray        # (n, n, 4) |z H_z|


@lru_cache(maxsize=16)
def sample_grid(model: CoinModel, n: int, vertical_tol: float = 1e-10) -> SheetGrid:
    """All four sheets over the grid (2 pi i/n, 2 pi j/n)."""
    th = TWO_PI * np.arange(n) / n
    alpha, beta = np.meshgrid(th, th, indexing="ij")
    gamma = sheet_gammas(model, alpha, beta)
    a4 = np.broadcast_to(alpha[..., None], gamma.shape)
    b4 = np.broadcast_to(beta[..., None], gamma.shape)
    geo = local_geometry(model, a4, b4, gamma)
    zhz = np.abs(geo.grad_log[..., 2])
    bad = zhz < vertical_tol
    vel = geo.velocity.copy()
    vel[bad] = np.nan
    curv = geo.curvature.copy()
    curv[bad] = np.nan
    for arr in (alpha, beta, gamma, vel, curv, zhz):
        arr.setflags(write=False)
    return SheetGrid(alpha, beta, gamma, vel, curv, zhz)


def _grid_local_minima(grid: SheetGrid, values: np.ndarray) -> np.ndarray:
    """Mask of grid points that are local minima of ``values`` along their own sheet.

    Neighbouring sheet values are matched by nearest gamma, so the argument
    ordering of the roots does not matter.
    """
    is_min = np.isfinite(values)
    g = grid.gamma
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            if da == 0 and db == 0:
                continue
            gn = np.roll(g, (-da, -db), axis=(0, 1))
            vn = np.roll(values, (-da, -db), axis=(0, 1))
            idx = np.argmin(circ_dist(g[..., :, None], gn[..., None, :]), axis=-1)
            matched = np.take_along_axis(vn, idx, axis=-1)
            matched = np.where(np.isfinite(matched), matched, np.inf)
            is_min &= values <= matched
    return is_min


def velocity_seeds(model: CoinModel, v, tol: Tolerances = DEFAULT_TOLERANCES,
                   grid_n: int | None = None) -> np.ndarray:
    """Seed points (m, 3) for the Newton solve of velocity(p) = v."""
    grid = sample_grid(model, int(grid_n or tol.seed_grid))
    resid = np.linalg.norm(grid.velocity - np.asarray(v, dtype=float), axis=-1)
    resid = np.where(np.isfinite(resid), resid, np.inf)
    mask = _grid_local_minima(grid, resid) | (resid < tol.seed_radius)
    i, j, k = np.nonzero(mask)
    return np.column_stack([grid.alpha[i, j], grid.beta[i, j], grid.gamma[i, j, k]])


def solve_velocity(model: CoinModel, v, seeds: np.ndarray,
                   tol: Tolerances = DEFAULT_TOLERANCES, max_step: float = 0.25) -> np.ndarray:
    """Newton iteration for points of V1 with Gauss velocity ``v``.

    Returns converged points (m, 3) as (alpha, beta, gamma), deduplicated on the
    torus.  Along a sheet the Jacobian of the velocity is -Hess(gamma).
    """
    v = np.asarray(v, dtype=float)
    if len(seeds) == 0:
        return np.zeros((0, 3))
    a, b, g = (seeds[:, k].astype(float).copy() for k in range(3))
    for _ in range(tol.newton_max_iter):
        geo = local_geometry(model, a, b, g)
        res = geo.velocity - v
        hess = geo.hess_gamma
        det = hess[:, 0, 0] * hess[:, 1, 1] - hess[:, 0, 1] ** 2
        ok = np.isfinite(det) & (np.abs(det) > 1e-300)
        safe_det = np.where(ok, det, 1.0)
        da = (hess[:, 1, 1] * res[:, 0] - hess[:, 0, 1] * res[:, 1]) / safe_det
        db = (-hess[:, 0, 1] * res[:, 0] + hess[:, 0, 0] * res[:, 1]) / safe_det
        step = np.hypot(da, db)
        scale = np.where(step > max_step, max_step / np.where(step > 0, step, 1.0), 1.0)
        da = np.where(ok, da * scale, 0.0)
        db = np.where(ok, db * scale, 0.0)
        a = wrap(a + da)
        b = wrap(b + db)
        g = nearest_sheet_gamma(model, a, b, g)
    geo = local_geometry(model, a, b, g)
    res = np.max(np.abs(geo.velocity - v), axis=-1)
    good = np.isfinite(res) & (res < tol.newton_residual)
    pts = np.column_stack([a, b, g])[good]
    return dedup_torus(pts, res[good], tol.dedup)


def dedup_torus(pts: np.ndarray, score: np.ndarray, radius: float) -> np.ndarray:
    """Keep one point (lowest score) per cluster of torus-distance below ``radius``."""
    order = np.argsort(score, kind="stable")
    kept: list[np.ndarray] = []
    for idx in order:
        p = pts[idx]
        if all(np.max(circ_dist(p, q)) >= radius for q in kept):
            kept.append(p)
    if not kept:
        return np.zeros((0, 3))
    out = np.array(kept)
    # deterministic order: by alpha, then beta, then gamma
    order = np.lexsort((out[:, 2], out[:, 1], out[:, 0]))
    return out[order]


# --------------------------------------------------------------------------
# singular points

def grad_norm(model: CoinModel, a, b, g) -> np.ndarray:
    H = build_H(model)
    gr = poly_grad(H, np.exp(1j * np.asarray(a)), np.exp(1j * np.asarray(b)),
                   np.exp(1j * np.asarray(g)))
    return np.linalg.norm(gr, axis=-1)


def min_grad_norm(model: CoinModel, n: int = 128) -> float:
    """Smallest |grad H| over the n x n x 4 sheet sample of V1."""
    th = TWO_PI * np.arange(n) / n
    a, b = np.meshgrid(th, th, indexing="ij")
    g = sheet_gammas(model, a, b)
    return float(np.min(grad_norm(model, a[..., None], b[..., None], g)))


@dataclass(frozen=True)
class GradMinimum:
    point: TorusPoint3
    grad_norm: float
    h_value: float


def grad_minima(model: CoinModel, grid_n: int = 32, polish_below: float = 1e-3,
                seed_quantile: float = 1.0) -> list[GradMinimum]:
    """Local minima of |grad H| over V1 from a multi-start search.

    Grid local minima seed a Nelder-Mead descent along the sheet; any minimum
    with |grad H| under ``polish_below`` is then refined by complex Newton on
    grad H = 0, which converges quadratically at a nondegenerate cone point.
    Only grid minima below the ``seed_quantile`` quantile of |grad H| are refined.
    """
    H = build_H(model)
    th = TWO_PI * np.arange(grid_n) / grid_n
    a, b = np.meshgrid(th, th, indexing="ij")
    g = sheet_gammas(model, a, b)
    gn = grad_norm(model, a[..., None], b[..., None], g)
    grid = SheetGrid(a, b, g, np.zeros(g.shape + (2,)), np.zeros(g.shape), np.zeros(g.shape))
    mask = _grid_local_minima(grid, gn)
    if seed_quantile < 1.0:
        mask &= gn <= np.quantile(gn, seed_quantile)
    found = []
    for i, j, k in zip(*np.nonzero(mask)):
        # a regular cone point attracts complex Newton from a grid neighbour
        xyz = _newton_critical(H, np.exp(1j * np.array([a[i, j], b[i, j], g[i, j, k]])))
        if np.all(np.abs(np.abs(xyz) - 1) < 1e-8) and np.linalg.norm(poly_grad(H, *xyz)) < 1e-12:
            point = TorusPoint3.from_xyz(*xyz)
            xyz_t = np.array([point.x, point.y, point.z])
            found.append((point, float(np.linalg.norm(poly_grad(H, *xyz_t))),
                          float(abs(evaluate(H, *xyz_t)))))
            continue
        state = {"g": g[i, j, k]}

        def f(ab, state=state):
            gg = float(nearest_sheet_gamma(model, ab[0], ab[1], state["g"]))
            state["g"] = gg
            return float(grad_norm(model, ab[0], ab[1], gg))

        res = minimize(f, np.array([a[i, j], b[i, j]]), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        alpha, beta = res.x
        gamma = float(nearest_sheet_gamma(model, alpha, beta, state["g"]))
        xyz = np.exp(1j * np.array([alpha, beta, gamma]))
        if res.fun < polish_below:
            xyz = _newton_critical(H, xyz)
        point = TorusPoint3.from_xyz(*xyz)
        xyz_t = np.array([point.x, point.y, point.z])
        gval = float(np.linalg.norm(poly_grad(H, *xyz_t)))
        hval = float(abs(evaluate(H, *xyz_t)))
        found.append((point, gval, hval))
    found.sort(key=lambda item: item[1])
    kept: list[GradMinimum] = []
    for point, gval, hval in found:
        if all(np.max(circ_dist(point.as_array(), q.point.as_array())) > 1e-5 for q in kept):
            kept.append(GradMinimum(point, gval, hval))
    return kept


def _newton_critical(H: LaurentPoly3, xyz: np.ndarray, iters: int = 30) -> np.ndarray:
    d = [H.diff(k) for k in range(3)]
    dd = [[d[k].diff(m) for m in range(3)] for k in range(3)]
    w = xyz.astype(np.complex128)
    for _ in range(iters):
        gvec = np.array([evaluate(d[k], *w) for k in range(3)])
        jac = np.array([[evaluate(dd[k][m], *w) for m in range(3)] for k in range(3)])
        try:
            delta = np.linalg.solve(jac, gvec)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(delta)) or np.any(np.abs(w - delta) < 1e-3):
            break
        w = w - delta
        if np.linalg.norm(delta) < 1e-15:
            break
    return w


def singular_points(model: CoinModel, threshold: float = DEFAULT_TOLERANCES.singular_grad,
                    grid_n: int = 32) -> list[GradMinimum]:
    """Points of V1 where |grad H| < threshold (and H vanishes), i.e. the singular set."""
    # a cone point is within half a grid cell of some sample, where |grad H| is
    # already far below its typical size
    minima = grad_minima(model, grid_n, seed_quantile=0.1)
    return [m for m in minima if m.grad_norm < threshold and m.h_value < 1e-8]


# --------------------------------------------------------------------------
# S-family symmetries and components

HALF_PI = np.pi / 2

ISOMETRIES = {
    "phi_A": lambda a, b, g: (-a, -b, -g),
    "phi_B": lambda a, b, g: (b + HALF_PI, a + HALF_PI, g + HALF_PI),
    "phi_C": lambda a, b, g: (a + np.pi, b + np.pi, g + np.pi),
    "phi_D": lambda a, b, g: (b + 3 * HALF_PI, a + 3 * HALF_PI, g + 3 * HALF_PI),
    "phi_1": lambda a, b, g: (a, b + np.pi, -g),
    "phi_2": lambda a, b, g: (-a, b, g),
    "phi_3": lambda a, b, g: (a, np.pi - b, g),
}

# velocity (r, s) of p  ->  velocity of phi(p)
VELOCITY_COVARIANCE = {
    "phi_A": lambda v: (v[..., 0], v[..., 1]),
    "phi_B": lambda v: (v[..., 1], v[..., 0]),
    "phi_C": lambda v: (v[..., 0], v[..., 1]),
    "phi_D": lambda v: (v[..., 1], v[..., 0]),
    "phi_1": lambda v: (-v[..., 0], -v[..., 1]),
    "phi_2": lambda v: (-v[..., 0], v[..., 1]),
    "phi_3": lambda v: (v[..., 0], -v[..., 1]),
}


def symmetry_check(model: CoinModel, samples: int = 1000, seed: int = 0) -> dict:
    """Residuals of the seven S-family isometries on random points of V1."""
    if model.family != "S":
        raise ValueError("symmetry_check applies to the S(t) family")
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, TWO_PI, samples)
    b = rng.uniform(0, TWO_PI, samples)
    g = sheet_gammas(model, a, b)[np.arange(samples), rng.integers(0, 4, samples)]
    section = real_section(model)
    v0 = local_geometry(model, a, b, g).velocity
    report = {"samples": samples, "maps": {}}
    for name, phi in ISOMETRIES.items():
        a1, b1, g1 = phi(a, b, g)
        resid = float(np.max(np.abs(section.value(a1, b1, g1))))
        v1 = local_geometry(model, a1, b1, g1).velocity
        expect = np.stack(VELOCITY_COVARIANCE[name](v0), axis=-1)
        report["maps"][name] = {
            "residual": resid,
            "velocity_error": float(np.max(np.abs(v1 - expect))),
        }
    report["max_residual"] = max(m["residual"] for m in report["maps"].values())
    report["max_velocity_error"] = max(m["velocity_error"] for m in report["maps"].values())
    return report


def component_classify(model: CoinModel, p: SheetPoint | TorusPoint3 | float) -> str:
    """Component A, B, C or D of V1 for the S family, from the gamma band of p.

    Bands are [-pi/4, pi/4), [pi/4, 3pi/4), ... so each band edge goes to the
    component above it.
    """
    if model.family != "S":
        raise ValueError("component_classify applies to the S(t) family")
    gamma = p if isinstance(p, (float, int, np.floating)) else p.gamma
    g = float(np.mod(gamma + np.pi / 4, TWO_PI))
    return "ABCD"[min(int(g // HALF_PI), 3)]


def gamma_level_points(model: CoinModel, level: float, tol: Tolerances = DEFAULT_TOLERANCES,
                       grid_n: int = 64) -> np.ndarray:
    """Points of V1 where gamma equals ``level`` and gamma is extremal along the sheet.

    Such points are zeros of the Gauss velocity; they are found as velocity-0
    preimages whose gamma matches ``level``.
    """
    seeds = velocity_seeds(model, (0.0, 0.0), tol, grid_n)
    pts = solve_velocity(model, (0.0, 0.0), seeds, tol)
    if len(pts) == 0:
        return pts
    return pts[circ_dist(pts[:, 2], level) < 1e-6]


def gamma_level_gap(model: CoinModel, level: float, n: int = 256) -> np.ndarray:
    """min_k |gamma_k - level| on an n x n grid, for scanning where a level is attained."""
    th = TWO_PI * np.arange(n) / n
    a, b = np.meshgrid(th, th, indexing="ij")
    g = sheet_gammas(model, a, b)
    return np.min(circ_dist(g, level), axis=-1)
