"""Stationary-phase asymptotics of the walk amplitudes.

For a direction (r, s, n) with velocity v = (r/n, s/n) the amplitude is a sum
over the critical set W(v) = {p in V1 : velocity(p) = v} of

    z^-(r,s,n) * G / (grad_log H . rhat) * |K|^(-1/2) * exp(-i pi tau / 4) / (2 pi |(r,s,n)|)

with the complex scalar grad_log H . rhat in the denominator; its modulus is
|grad_log H| but its phase varies from point to point and must be kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .config import DEFAULT_TOLERANCES, Tolerances
from .genfun import TWO_PI, TorusPoint3, build_G, build_H
from .laurent import euler_table, evaluate
from .model import CoinModel
from .variety import (
    SheetPoint,
    circ_dist,
    local_geometry,
    make_sheet_point,
    sample_grid,
    sheet_gammas,
    singular_points,
    solve_velocity,
    velocity_seeds,
)

INSIDE = "Inside"
OUTSIDE = "Outside"
NEAR_BOUNDARY = "NearBoundary"
NEAR_SINGULAR = "NearSingularDirection"


class DegenerateCriticalPointError(ArithmeticError):
    """Hess(gamma) has an eigenvalue too close to zero for stationary phase."""


@dataclass(frozen=True)
class Direction:
    r: int
    s: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")

    @property
    def v(self) -> np.ndarray:
        return np.array([self.r / self.n, self.s / self.n])

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.r ** 2 + self.s ** 2 + self.n ** 2))

    @property
    def parity_ok(self) -> bool:
        return (self.r + self.s - self.n) % 2 == 0

    @property
    def in_light_cone(self) -> bool:
        return abs(self.r) + abs(self.s) <= self.n


@dataclass(frozen=True)
class CriticalPoint:
    point: SheetPoint
    tau: int
    term: np.ndarray | None = None   # (4,) contribution to the chirality amplitudes


@dataclass
class CriticalPointReport:
    direction: Direction
    status: str
    points: list[CriticalPoint] = field(default_factory=list)
    amplitudes: np.ndarray | None = None   # (4,) per chirality, up to a global sign
    predicted_probability: float | None = None
    exact_probability: float | None = None

    def to_dict(self) -> dict:
        d = self.direction
        out = {
            "r": d.r,
            "s": d.s,
            "n": d.n,
            "v": [float(d.r / d.n), float(d.s / d.n)],
            "status": self.status,
            "points": [
                {
                    "alpha": cp.point.alpha,
                    "beta": cp.point.beta,
                    "gamma": cp.point.gamma,
                    "sheet": cp.point.sheet,
                    "K": cp.point.curvature,
                    "tau": cp.tau,
                }
                for cp in self.points
            ],
            "predicted_probability": self.predicted_probability,
        }
        if self.exact_probability is not None:
            out["exact_probability"] = self.exact_probability
        return out


# --------------------------------------------------------------------------
# singular points to avoid

def _b_singular_points(t: float) -> list[TorusPoint3]:
    out = []
    for sign in (1.0, -1.0):
        for im in (1.0, -1.0):
            z = sign * complex(np.sqrt(t / 2), im * np.sqrt(1 - t / 2))
            out.append(TorusPoint3.from_xyz(sign, sign, z))
    return out


@lru_cache(maxsize=32)
def known_singular_points(model: CoinModel) -> tuple[TorusPoint3, ...]:
    """Singular points of V1 used for the exclusion ball.

    S and A are smooth on the torus; B has the four closed-form cone points;
    anything else is searched numerically.
    """
    if model.family in ("S", "A"):
        return ()
    if model.family == "B":
        return tuple(_b_singular_points(model.t))
    return tuple(m.point for m in singular_points(model))


def _near_singular(model: CoinModel, pts: np.ndarray, radius: float) -> np.ndarray:
    sing = known_singular_points(model)
    mask = np.zeros(len(pts), dtype=bool)
    if not sing:
        return mask
    for q in sing:
        mask |= np.max(circ_dist(pts, q.as_array()), axis=-1) < radius
    return mask


# --------------------------------------------------------------------------
# critical points

def _check_velocity(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(2)
    if not np.all(np.abs(v) < 1.0):
        raise ValueError(f"velocity {v.tolist()} is not in the open square (-1, 1)^2")
    return v


@lru_cache(maxsize=4096)
def _critical_cached(model: CoinModel, v: tuple, tol: Tolerances, grid_n: int):
    seeds = velocity_seeds(model, v, tol, grid_n)
    pts = solve_velocity(model, v, seeds, tol)
    near = _near_singular(model, pts, tol.singular_ball) if len(pts) else np.zeros(0, bool)
    return pts[~near], bool(np.any(near))


def critical_points(model: CoinModel, v, tol: Tolerances = DEFAULT_TOLERANCES,
                    grid_n: int | None = None) -> list[SheetPoint]:
    """All points of V1 whose Gauss velocity equals v, ordered by (alpha, beta, gamma)."""
    v = _check_velocity(v)
    pts, _ = _critical_cached(model, (float(v[0]), float(v[1])), tol, int(grid_n or tol.seed_grid))
    return [_sheet_point(model, p) for p in pts]


def _sheet_point(model: CoinModel, p) -> SheetPoint:
    g = sheet_gammas(model, p[0], p[1])
    k = int(np.argmin(circ_dist(g, p[2])))
    return make_sheet_point(model, p[0], p[1], p[2], k)


def signature(model: CoinModel, p: SheetPoint, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Signature of Hess(gamma) at p, which equals that of the phase Hessian since n > 0."""
    hess = local_geometry(model, p.alpha, p.beta, p.gamma).hess_gamma
    eig = np.linalg.eigvalsh(hess)
    if np.min(np.abs(eig)) < tol.k_degenerate:
        raise DegenerateCriticalPointError(f"Hess(gamma) eigenvalues {eig.tolist()}")
    return int(np.sum(np.sign(eig)))


# --------------------------------------------------------------------------
# amplitude formula

def residue_matrix(model: CoinModel, p: SheetPoint | TorusPoint3) -> np.ndarray:
    """-G_ij / (z H_z) at p, for all chirality pairs (4, 4).

    On V1 this is the spectral projector of M(x, y) U for the eigenvalue 1/z.
    """
    base = p.base if isinstance(p, SheetPoint) else p
    x, y, z = base.x, base.y, base.z
    zhz = euler_table(build_H(model), [(0, 0, 1)], x, y, z)[0]
    out = np.empty((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            out[i, j] = evaluate(build_G(model, i + 1, j + 1), x, y, z)
    return -out / zhz


def point_term(model: CoinModel, p: SheetPoint, tau: int, d: Direction,
               literal_modulus: bool = False) -> np.ndarray:
    """Contribution of one critical point to the (4, 4) amplitude matrix, without the sign.

    ``literal_modulus`` replaces grad_log H . rhat by its modulus |grad_log H|,
    which drops the phase of z H_z; kept only to document why that form fails.
    """
    base = p.base
    x, y, z = base.x, base.y, base.z
    rvec = np.array([d.r, d.s, d.n], dtype=float)
    rhat = rvec / d.norm
    grad_log = euler_table(build_H(model), [(1, 0, 0), (0, 1, 0), (0, 0, 1)], x, y, z)
    denom = np.linalg.norm(grad_log) if literal_modulus else complex(grad_log @ rhat)
    g = np.empty((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            g[i, j] = evaluate(build_G(model, i + 1, j + 1), x, y, z)
    # z^-(r,s,n) on the torus, via angles to avoid large integer powers
    phase = np.exp(-1j * (d.r * base.alpha + d.s * base.beta + d.n * base.gamma))
    kfac = abs(p.curvature) ** -0.5 * np.exp(-1j * np.pi * tau / 4)
    return -phase * g / denom * kfac / (2 * np.pi * d.norm)


def analyze(model: CoinModel, r: int, s: int, n: int, start=None,
            tol: Tolerances = DEFAULT_TOLERANCES, literal_modulus: bool = False,
            gauss_image: "GaussImage | None" = None) -> CriticalPointReport:
    """Critical points, status and predicted amplitudes for the direction (r, s, n)."""
    d = Direction(int(r), int(s), int(n))
    start = np.eye(4, dtype=np.complex128)[0] if start is None else np.asarray(start, np.complex128)
    if not d.parity_ok:
        # summands cancel in pairs under (x, y, z) -> (-x, -y, -z)
        return CriticalPointReport(d, INSIDE, [], np.zeros(4, np.complex128), 0.0)
    v = d.v
    if not np.all(np.abs(v) < 1.0):
        return CriticalPointReport(d, OUTSIDE, [], np.zeros(4, np.complex128), 0.0)
    key = (float(v[0]), float(v[1]))
    pts, excluded = _critical_cached(model, key, tol, tol.seed_grid)
    if len(pts) == 0:
        if excluded:
            return CriticalPointReport(d, NEAR_SINGULAR, [], None, None)
        img = gauss_image or gauss_image_for(model)
        if img.distance(v) > tol.outside_margin:
            return CriticalPointReport(d, OUTSIDE, [], np.zeros(4, np.complex128), 0.0)
        return CriticalPointReport(d, NEAR_BOUNDARY, [], None, None)
    sheet_pts = [_sheet_point(model, p) for p in pts]
    min_k = min(abs(sp.curvature) for sp in sheet_pts)
    if min_k < tol.k_degenerate:
        cps = [CriticalPoint(sp, 0) for sp in sheet_pts]
        return CriticalPointReport(d, NEAR_BOUNDARY, cps, None, None)
    cps = []
    total = np.zeros((4, 4), dtype=np.complex128)
    for sp in sheet_pts:
        tau = signature(model, sp, tol)
        term = point_term(model, sp, tau, d, literal_modulus)
        total += term
        cps.append(CriticalPoint(sp, tau, term @ start))
    amps = total @ start
    status = NEAR_SINGULAR if excluded else (INSIDE if min_k > tol.k_inside else NEAR_BOUNDARY)
    return CriticalPointReport(d, status, cps, amps, float(np.sum(np.abs(amps) ** 2)))


def amplitude(model: CoinModel, i: int, j: int, r: int, s: int, n: int,
              tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Predicted amplitude for chirality i from start chirality j (1-based), up to a global sign."""
    if not (1 <= i <= 4 and 1 <= j <= 4):
        raise IndexError("chirality indices must be in 1..4")
    rep = analyze(model, r, s, n, np.eye(4)[j - 1], tol)
    value = None if rep.amplitudes is None else complex(rep.amplitudes[i - 1])
    return {"value": value, "status": rep.status, "up_to_global_sign": True}


def predicted_probability(model: CoinModel, r: int, s: int, n: int, start=None,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> float | None:
    return analyze(model, r, s, n, start, tol).predicted_probability


# --------------------------------------------------------------------------
# Gauss image and direction classes

@dataclass(frozen=True)
class PointCloud:
    alpha: np.ndarray
    beta: np.ndarray
    sheet: np.ndarray
    gamma: np.ndarray
    velocity: np.ndarray   # (m, 2)
    curvature: np.ndarray

    def __len__(self) -> int:
        return len(self.alpha)


def feasible_region_image(model: CoinModel, grid_n: int = 100,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> PointCloud:
    """Gauss velocities of the four sheets over the grid (2 pi i/n, 2 pi j/n).

    Points within the singular ball of a cone point, or where z H_z vanishes,
    are skipped.  Order is grid
    index (alpha major), then sheet.
    """
    grid = sample_grid(model, int(grid_n), tol.vertical_tangent)
    ok = np.isfinite(grid.velocity).all(axis=-1) & (grid.zhz >= tol.vertical_tangent)
    pts = np.stack(np.broadcast_arrays(grid.alpha[..., None], grid.beta[..., None], grid.gamma), -1)
    ok &= ~_near_singular(model, pts.reshape(-1, 3), tol.singular_ball).reshape(ok.shape)
    ii, jj, kk = np.nonzero(ok)
    return PointCloud(
        alpha=grid.alpha[ii, jj],
        beta=grid.beta[ii, jj],
        sheet=kk.astype(np.int64),
        gamma=grid.gamma[ii, jj, kk],
        velocity=grid.velocity[ii, jj, kk],
        curvature=grid.curvature[ii, jj, kk],
    )


class GaussImage:
    """Nearest-neighbour queries against a Gauss-map point cloud."""

    def __init__(self, cloud: PointCloud):
        self.cloud = cloud
        self.tree = cKDTree(cloud.velocity)

    def distance(self, v) -> np.ndarray | float:
        d, _ = self.tree.query(np.asarray(v, dtype=float))
        return d


@lru_cache(maxsize=16)
def gauss_image_for(model: CoinModel, grid_n: int = 200) -> GaussImage:
    return GaussImage(feasible_region_image(model, grid_n))


def classify_direction(model: CoinModel, v, tol: Tolerances = DEFAULT_TOLERANCES) -> str:
    v = _check_velocity(v)
    pts, excluded = _critical_cached(model, (float(v[0]), float(v[1])), tol, tol.seed_grid)
    if len(pts):
        ks = [abs(_sheet_point(model, p).curvature) for p in pts]
        return INSIDE if min(ks) > tol.k_inside else NEAR_BOUNDARY
    if excluded:
        return NEAR_SINGULAR
    if gauss_image_for(model).distance(v) > tol.outside_margin:
        return OUTSIDE
    return NEAR_BOUNDARY


def normal_cone_threshold_B(t: float) -> float:
    return (2 - t) / ((1 - t) * np.sqrt(t))


def normal_cone_check_B(t: float, v, tol: float = 1e-6) -> bool:
    """True iff v avoids the normal cone r^2 + s^2 = (2-t)/((1-t) sqrt t) at the B(t) cone points."""
    v = np.asarray(v, dtype=float)
    return bool(abs(float(v @ v) - normal_cone_threshold_B(t)) > tol)


def conjugate_pairing(report: CriticalPointReport) -> dict:
    """How the critical set behaves under complex conjugation (alpha, beta, gamma) -> -(alpha, beta, gamma).

    For real coins W is closed under conjugation, paired points carry equal |K|
    and opposite signatures.
    """
    pts = [cp.point for cp in report.points]
    arr = np.array([p.base.as_array() for p in pts]) if pts else np.zeros((0, 3))
    pairs = []
    unmatched = 0
    for k, p in enumerate(arr):
        conj = np.mod(-p, TWO_PI)
        dist = np.max(circ_dist(arr, conj), axis=-1) if len(arr) else np.array([])
        m = int(np.argmin(dist)) if len(dist) else -1
        if m < 0 or dist[m] > 1e-6:
            unmatched += 1
            continue
        if k <= m:
            pairs.append((k, m))
    k_err = max((abs(abs(pts[a].curvature) - abs(pts[b].curvature)) for a, b in pairs), default=0.0)
    tau_rel = [(report.points[a].tau, report.points[b].tau) for a, b in pairs]
    return {
        "pairs": len(pairs),
        "unmatched": unmatched,
        "max_abs_K_mismatch": float(k_err),
        "tau_opposite": all(ta == -tb for ta, tb in tau_rel),
        "tau_pairs": tau_rel,
    }
