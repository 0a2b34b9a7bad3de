"""Spectrum of the 1-D limit operator: -u'' on (0,1) with a derivative-jump
condition u'(a+) - u'(a-) = kappa * u(a) at each open hole.

Three routes are provided and cross-checked:

* ``find_roots``     -- single hole, open/open ends, closed-form secular function
* ``shooting_spectrum`` -- multiple holes, variable bore, any end conditions
* ``fd_oracle``      -- independent finite-difference discretization of the
                        bilinear form, Sturm-sequence bisection eigenvalues

The secular function used for root finding is the pole-free rearrangement

    F(mu) = mu * sin(mu) + kappa * sin(mu a) * sin(mu (1-a)).

Matching u = C1 sin(mu x) on (0,a) with u = C2 sin(mu (1-x)) on (a,1)
through continuity and the jump condition gives the homogeneous 2x2 system

    [ sin(mu a)                      -sin(mu b)    ] [C1]   [0]
    [ mu cos(mu a) + kappa sin(mu a)  mu cos(mu b) ] [C2] = [0]   (b = 1-a)

whose determinant is exactly F(mu). F is entire, so it also captures the
degenerate eigenvalues where the hole sits on a node of an unperturbed mode
(there the quotient form -mu sin mu / (sin(mu a) sin(mu b)) has a 0/0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .model import BoreProfile, EigenSolution1D, EndCondition, SideholeError

PI = math.pi


class BracketError(SideholeError):
    """A root bracket contained no sign change and no endpoint root."""


class CrossValidationError(SideholeError):
    """Closed-form roots disagree with the finite-difference oracle."""


@dataclass(frozen=True)
class SecularProblem:
    """Single hole at `a` with coupling kappa = alpha * delta * open_fraction."""

    a: float
    kappa: float
    left_end: EndCondition = EndCondition.OPEN
    right_end: EndCondition = EndCondition.OPEN

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise ValueError(f"hole position must lie in (0,1), got {self.a}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")

    @property
    def is_dirichlet_both(self) -> bool:
        return (self.left_end is EndCondition.OPEN
                and self.right_end is EndCondition.OPEN)


@dataclass(frozen=True)
class GeneralizedProblem:
    """Several holes and an optional variable bore g(x)."""

    holes: tuple[tuple[float, float], ...] = ()   # (position, kappa)
    bore: BoreProfile = field(default_factory=BoreProfile)
    left_end: EndCondition = EndCondition.OPEN
    right_end: EndCondition = EndCondition.OPEN

    def __post_init__(self):
        pos = [a for a, _ in self.holes]
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError(f"hole positions must be strictly increasing, got {pos}")
        for a, k in self.holes:
            if not (0.0 < a < 1.0):
                raise ValueError(f"hole position must lie in (0,1), got {a}")
            if k < 0:
                raise ValueError(f"kappa must be nonnegative, got {k}")
        v = self.bore.violations()
        if v:
            raise ValueError("; ".join(v))


def generalize(problem: SecularProblem) -> GeneralizedProblem:
    return GeneralizedProblem(holes=((problem.a, problem.kappa),),
                              left_end=problem.left_end,
                              right_end=problem.right_end)


@dataclass(frozen=True)
class Spectrum1D:
    """The lowest resonance frequencies mu_k (lambda_k = mu_k^2) of one problem."""

    problem: object
    mu_list: tuple[float, ...]
    eigensolutions: tuple[EigenSolution1D, ...] = ()
    method: str = "closed_form"     # closed_form | shooting | fd_oracle

    def __post_init__(self):
        mus = self.mu_list
        if any(b <= a for a, b in zip(mus, mus[1:])):
            raise ValueError(f"mu_list must be strictly increasing, got {mus}")

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(mu * mu for mu in self.mu_list)

    def to_json_dict(self):
        return {
            "method": self.method,
            "mu": list(self.mu_list),
            "lambda": [mu * mu for mu in self.mu_list],
        }

    def to_csv(self, tube=None) -> str:
        """CSV columns: k, mu, lambda, freq_hz, cents_vs_fundamental."""
        from .model import TubeSpec, cents, to_frequency_hz
        tube = tube if tube is not None else TubeSpec()
        lines = ["k,mu,lambda,freq_hz,cents_vs_fundamental"]
        f1 = to_frequency_hz(self.mu_list[0], tube)
        for k, mu in enumerate(self.mu_list, start=1):
            f = to_frequency_hz(mu, tube)
            lines.append(f"{k},{mu:.12g},{mu * mu:.12g},{f:.12g},{cents(f, f1):.12g}")
        return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# closed-form route (single hole, Dirichlet ends)

def secular_eval(mu, problem: SecularProblem):
    """Pole-free secular function F(mu); positive roots = eigenfrequencies."""
    a, k = problem.a, problem.kappa
    mu = np.asarray(mu, dtype=float)
    out = mu * np.sin(mu) + k * np.sin(mu * a) * np.sin(mu * (1.0 - a))
    return out if out.ndim else float(out)


def _secular_deriv(mu: float, problem: SecularProblem) -> float:
    a, k = problem.a, problem.kappa
    b = 1.0 - a
    return (math.sin(mu) + mu * math.cos(mu)
            + k * (a * math.cos(mu * a) * math.sin(mu * b)
                   + b * math.sin(mu * a) * math.cos(mu * b)))


def _is_endpoint_root(mu: float, problem: SecularProblem, tol: float) -> bool:
    # |F/F'| below the bisection tolerance: the true root is within tol of mu.
    f = secular_eval(mu, problem)
    fp = max(abs(_secular_deriv(mu, problem)), 1.0)
    return abs(f) <= tol * fp


def find_roots(problem: SecularProblem, count: int, tol: float = 1e-12,
               cross_validate: bool = True, scan_points: int = 1000) -> Spectrum1D:
    """First `count` positive roots of F, one per interlacing interval
    [k pi, (k+1) pi]; endpoint roots (hole on a node) detected explicitly.

    Interlacing holds because the operator is a nonnegative rank-one form
    perturbation of the Dirichlet string. Each returned root is optionally
    cross-validated against fd_oracle within its discretization error.
    """
    if not problem.is_dirichlet_both:
        raise ValueError("closed-form route requires open/open end conditions; "
                         "use shooting_spectrum or fd_oracle")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    roots: list[float] = []
    prev = 0.0
    sep = 1e-9
    for k in range(1, count + 1):
        lo, hi = k * PI, (k + 1) * PI
        cands: list[float] = []
        if _is_endpoint_root(lo, problem, tol):
            cands.append(lo)
        if _is_endpoint_root(hi, problem, tol):
            cands.append(hi)
        grid = np.linspace(lo, hi, scan_points + 1)
        vals = secular_eval(grid, problem)
        sign_change = vals[:-1] * vals[1:] < 0.0
        for i in np.flatnonzero(sign_change):
            r = brentq(lambda m: secular_eval(m, problem),
                       grid[i], grid[i + 1], xtol=tol, rtol=8.9e-16)
            if all(abs(r - c) > 10 * max(tol, 1e-13) for c in cands):
                cands.append(r)
        cands = sorted(c for c in cands if c > prev + sep)
        if not cands:
            raise BracketError(
                f"no root found in [{k}pi, {k + 1}pi] for a={problem.a}, "
                f"kappa={problem.kappa}: no sign change and endpoints are not roots")
        mu_k = cands[0]
        roots.append(mu_k)
        prev = mu_k

    spec = Spectrum1D(problem=problem, mu_list=tuple(roots),
                      eigensolutions=tuple(eigenfunction(mu, problem)
                                           for mu in roots),
                      method="closed_form")
    if cross_validate:
        _cross_validate_fd(spec, problem, count)
    return spec


def _cross_validate_fd(spec: Spectrum1D, problem: SecularProblem, count: int,
                       n: int = 1000) -> None:
    oracle = fd_oracle(problem, n=n, count=count)
    h = 1.0 / (2 * n)
    for mu, mu_fd in zip(spec.mu_list, oracle.mu_list):
        lam, lam_fd = mu * mu, mu_fd * mu_fd
        # nearest-node delta placement is O(h); extrapolation residue O(h^2)
        err_budget = 4.0 * problem.kappa * mu * h + 20.0 * lam * (mu * h) ** 2 + 1e-8
        if abs(lam - lam_fd) > err_budget:
            raise CrossValidationError(
                f"root mu={mu} (lambda={lam}) disagrees with fd oracle "
                f"lambda={lam_fd} beyond budget {err_budget}")


def eigenfunction(mu: float, problem: SecularProblem,
                  resid_tol: float = 1e-8) -> EigenSolution1D:
    """Piecewise eigenfunction for a root mu of F, unit L2 norm.

    Coefficients come from the null vector of the 2x2 matching system, which
    stays well-posed in the node-at-hole degenerate case where the quotient
    formula sin(mu a)/sin(mu (1-a)) is 0/0.
    """
    a, k = problem.a, problem.kappa
    b = 1.0 - a
    f = secular_eval(mu, problem)
    scale = 1.0 + mu + k
    if abs(f) > resid_tol * scale:
        raise ValueError(f"mu={mu} is not a root: |F(mu)|={abs(f)} exceeds "
                         f"{resid_tol * scale}")
    m = np.array([
        [math.sin(mu * a), -math.sin(mu * b)],
        [mu * math.cos(mu * a) + k * math.sin(mu * a), mu * math.cos(mu * b)],
    ])
    _, _, vt = np.linalg.svd(m)
    c1, c2 = vt[-1]
    # u = c1 sin(mu x) on (0,a);  u = c2 sin(mu (1-x)) on (a,1)
    norm2 = (c1 * c1 * (a / 2.0 - math.sin(2 * mu * a) / (4 * mu))
             + c2 * c2 * (b / 2.0 - math.sin(2 * mu * b) / (4 * mu)))
    s = 1.0 / math.sqrt(norm2)
    if c1 < 0 or (c1 == 0 and c2 < 0):
        s = -s
    c1 *= s
    c2 *= s
    segments = (
        (0.0, a, c1, 0.0),
        # c2 sin(mu (1-x)) = -c2 cos(mu) sin(mu x) + c2 sin(mu) cos(mu x)
        (a, 1.0, -c2 * math.cos(mu), c2 * math.sin(mu)),
    )
    return EigenSolution1D(mu=mu, lam=mu * mu, segments=segments)


def jump_residual(sol: EigenSolution1D, problem: SecularProblem) -> float:
    """|u'(a+) - u'(a-) - kappa u(a)| for a constructed eigenfunction."""
    a = problem.a
    return abs(sol.derivative(a, "+") - sol.derivative(a, "-")
               - problem.kappa * sol(a))


# ----------------------------------------------------------------------------
# finite-difference oracle

def fd_oracle(problem, n: int = 2000, count: int = 6,
              richardson: bool = True) -> Spectrum1D:
    """Independent spectrum from the bilinear form
    sum_i int g u'v' + kappa_i g(a_i) u(a_i) v(a_i) = lambda int g u v,
    discretized on a uniform grid with n subintervals (h = 1/n).

    The hole couplings enter as diagonal bumps at the node nearest each a_i.
    Eigenvalues of the resulting symmetric tridiagonal matrix are located by
    Sturm-sequence bisection (LAPACK stebz); with `richardson` the n and 2n
    grids are combined assuming O(h^2) error.
    """
    if isinstance(problem, SecularProblem):
        problem = generalize(problem)
    if n < 100:
        raise ValueError(f"n must be >= 100, got {n}")
    lam_n = _fd_eigs(problem, n, count)
    if not richardson:
        mus = tuple(math.sqrt(l) for l in lam_n)
        return Spectrum1D(problem=problem, mu_list=mus, method="fd_oracle")
    lam_2n = _fd_eigs(problem, 2 * n, count)
    lam = (4.0 * lam_2n - lam_n) / 3.0
    return Spectrum1D(problem=problem,
                      mu_list=tuple(math.sqrt(l) for l in lam),
                      method="fd_oracle")


def _fd_eigs(problem: GeneralizedProblem, n: int, count: int) -> np.ndarray:
    h = 1.0 / n
    for a, _ in problem.holes:
        if a < h or a > 1.0 - h:
            raise ValueError(f"hole at a={a} closer than one cell (h={h}) to an end")
    nodes = np.arange(n + 1) * h
    g_mid = np.asarray(problem.bore(nodes[:-1] + h / 2.0), dtype=float)
    g_node = np.asarray(problem.bore(nodes), dtype=float)

    keep = np.ones(n + 1, dtype=bool)
    if problem.left_end is EndCondition.OPEN:
        keep[0] = False
    if problem.right_end is EndCondition.OPEN:
        keep[-1] = False

    # stiffness K and diagonal mass M over all nodes, then restrict
    diag = np.zeros(n + 1)
    diag[:-1] += g_mid / h
    diag[1:] += g_mid / h
    off = -g_mid / h
    mass = np.full(n + 1, h) * g_node
    mass[0] /= 2.0
    mass[-1] /= 2.0
    for a, kap in problem.holes:
        j = int(round(a / h))
        diag[j] += kap * g_node[j]

    idx = np.flatnonzero(keep)
    d = diag[idx] / mass[idx]
    pair = keep[:-1] & keep[1:]   # edges whose both nodes are kept
    e = off[pair] / np.sqrt(mass[idx[:-1]] * mass[idx[1:]])
    lam = eigh_tridiagonal(d, e, eigvals_only=True,
                           select="i", select_range=(0, count - 1))
    return np.asarray(lam)


# ----------------------------------------------------------------------------
# shooting / transfer-matrix route

def _propagate_const(u, v, mu, length):
    c = np.cos(mu * length)
    s = np.sin(mu * length)
    return u * c + v * s / mu, -u * mu * s + v * c


def _shoot(problem: GeneralizedProblem, mu):
    """Terminal boundary residual S(mu); vectorized over mu for constant bore."""
    mu = np.asarray(mu, dtype=float)
    breaks = [0.0] + [a for a, _ in problem.holes] + [1.0]
    if problem.left_end is EndCondition.OPEN:
        u, v = np.zeros_like(mu), np.ones_like(mu)
    else:
        u, v = np.ones_like(mu), np.zeros_like(mu)
    if problem.bore.is_constant:
        for i in range(len(breaks) - 1):
            u, v = _propagate_const(u, v, mu, breaks[i + 1] - breaks[i])
            if i < len(problem.holes):
                v = v + problem.holes[i][1] * u
    else:
        if mu.ndim:
            return np.array([_shoot(problem, m) for m in mu])
        g = problem.bore
        state = np.array([float(u), float(g(0.0)) * float(v)])
        m2 = float(mu) ** 2

        def rhs(x, y):
            gx = float(g(x))
            return [y[1] / gx, -m2 * gx * y[0]]

        for i in range(len(breaks) - 1):
            sol = solve_ivp(rhs, (breaks[i], breaks[i + 1]), state,
                            method="DOP853", rtol=1e-10, atol=1e-12)
            state = sol.y[:, -1]
            if i < len(problem.holes):
                a_i, kap = problem.holes[i]
                state[1] += kap * float(g(a_i)) * state[0]
        u = state[0]
        v = state[1] / float(g(1.0))
    res = u if problem.right_end is EndCondition.OPEN else v
    return res if np.ndim(res) else float(res)


def shooting_spectrum(problem: GeneralizedProblem, count: int,
                      tol: float = 1e-12, mu_cap: float = 400.0) -> Spectrum1D:
    """First `count` roots of the shooting residual, by scan + bisection."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    per_pi = 4000 if problem.bore.is_constant else 200
    roots: list[float] = []
    lo = 1e-6
    while len(roots) < count:
        hi = lo + PI
        if hi > mu_cap:
            raise BracketError(
                f"found only {len(roots)} of {count} roots below mu={mu_cap}")
        grid = np.linspace(lo, hi, per_pi + 1)
        vals = np.asarray(_shoot(problem, grid))
        for i in np.flatnonzero(vals[:-1] * vals[1:] < 0.0):
            r = brentq(lambda m: _shoot(problem, m),
                       grid[i], grid[i + 1], xtol=tol, rtol=8.9e-16)
            if not roots or r > roots[-1] + 10 * max(tol, 1e-13):
                roots.append(r)
        lo = hi
    roots = roots[:count]
    sols = ()
    if problem.bore.is_constant:
        sols = tuple(_shooting_eigenfunction(problem, mu) for mu in roots)
    return Spectrum1D(problem=problem, mu_list=tuple(roots),
                      eigensolutions=sols, method="shooting")


def _shooting_eigenfunction(problem: GeneralizedProblem, mu: float) -> EigenSolution1D:
    breaks = [0.0] + [a for a, _ in problem.holes] + [1.0]
    if problem.left_end is EndCondition.OPEN:
        u, v = 0.0, 1.0
    else:
        u, v = 1.0, 0.0
    segments = []
    norm2 = 0.0
    for i in range(len(breaks) - 1):
        x0, x1 = breaks[i], breaks[i + 1]
        cs = u * math.sin(mu * x0) + (v / mu) * math.cos(mu * x0)
        cc = u * math.cos(mu * x0) - (v / mu) * math.sin(mu * x0)
        segments.append((x0, x1, cs, cc))
        norm2 += _segment_l2(mu, x0, x1, cs, cc)
        u, v = _propagate_const(u, v, mu, x1 - x0)
        if i < len(problem.holes):
            v = v + problem.holes[i][1] * u
    s = 1.0 / math.sqrt(norm2)
    if segments and (segments[0][2] < 0 or (segments[0][2] == 0 and segments[0][3] < 0)):
        s = -s
    segments = tuple((x0, x1, cs * s, cc * s) for x0, x1, cs, cc in segments)
    return EigenSolution1D(mu=mu, lam=mu * mu, segments=segments)


def _segment_l2(mu, x0, x1, cs, cc):
    def prim(x):
        s2 = math.sin(2 * mu * x) / (4 * mu)
        c2 = math.cos(2 * mu * x) / (4 * mu)
        return (cs * cs * (x / 2 - s2) + cc * cc * (x / 2 + s2)
                - 2 * cs * cc * c2)

    return prim(x1) - prim(x0)


# ----------------------------------------------------------------------------
# large- and small-coupling limits

@dataclass(frozen=True)
class LimitBehaviorReport:
    a: float
    kappas: tuple[float, ...]
    mu_table: tuple[tuple[float, ...], ...]     # one row per kappa
    monotone_in_kappa: bool
    limit_points: tuple[float, ...]
    max_limit_distance: tuple[float, ...]        # one entry per kappa
    limit_distance_decreasing: bool


def limit_behaviors(a: float, count: int,
                    kappas=(0.0, 1.0, 10.0, 100.0, 1000.0, 10000.0)
                    ) -> LimitBehaviorReport:
    """Spectrum along a coupling ladder: mu_k nondecreasing in kappa, and for
    large kappa the roots approach {k pi / a} U {k pi / (1-a)} (two detached
    sub-tubes of lengths a and 1-a)."""
    rows = []
    for kap in kappas:
        spec = find_roots(SecularProblem(a=a, kappa=kap), count,
                          cross_validate=False)
        rows.append(spec.mu_list)
    mu_table = tuple(rows)
    monotone = all(
        mu_table[i + 1][k] >= mu_table[i][k] - 1e-10
        for i in range(len(kappas) - 1) for k in range(count))
    top = (count + 2) * PI
    limits = sorted({k * PI / a for k in range(1, 40) if k * PI / a < top}
                    | {k * PI / (1 - a) for k in range(1, 40) if k * PI / (1 - a) < top})
    dists = tuple(
        max(min(abs(mu - p) for p in limits) for mu in row) for row in mu_table)
    nonzero = [d for kap, d in zip(kappas, dists) if kap > 0]
    decreasing = all(b <= a_ + 1e-12 for a_, b in zip(nonzero, nonzero[1:]))
    return LimitBehaviorReport(
        a=a, kappas=tuple(kappas), mu_table=mu_table,
        monotone_in_kappa=monotone, limit_points=tuple(limits),
        max_limit_distance=dists, limit_distance_decreasing=decreasing)
