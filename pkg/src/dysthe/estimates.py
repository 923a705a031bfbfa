"""Empirical checks of the linear, bilinear and trilinear estimates.

Every check produces ``(lhs, rhs)`` pairs and reduces them to a
:class:`RatioReport`.  The estimates hold up to unspecified constants, so
what is tested is the *trend* of the worst ratio as the size parameter
grows, not its value.  Exact identities (the L^6 Plancherel identity and
single-mode closed forms) are tested to roundoff.

Randomness is keyed by ``SeedSequence([seed, trial])`` so that a trial's
field does not depend on how trials are scheduled across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Optional

import numpy as np

from .dynamics import time_localize
from .norms import dyadic_piece, lp_norm, sobolev_norm, xsb_norm, zsb_norm
from .spectral import (
    SpaceTimeField,
    SpectralField,
    conjugate,
    dispersion,
    free_evolution,
    multiply,
)

__all__ = [
    "RatioReport",
    "RandomFieldSpec",
    "l6_plancherel_check",
    "strichartz_l6_report",
    "lr_strichartz_report",
    "lr_exponent",
    "l4_ratio_report",
    "dyadic_bilinear_check",
    "dyadic_sweep",
    "random_dyadic_field",
    "bilinear_z_check",
    "bilinear_z_report",
    "BILINEAR_VARIANTS",
    "trilinear_check",
    "trilinear_report",
    "trend_increase",
]


@dataclass
class RatioReport:
    estimate_id: str
    samples: int
    max_ratio: float
    mean_ratio: float
    trend: list  # (size parameter, max ratio at that size)
    seed: int
    skipped: int = 0
    rows: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("a report needs at least one sample")
        if not self.max_ratio >= self.mean_ratio >= 0:
            raise ValueError("need max_ratio >= mean_ratio >= 0")

    def as_dict(self, with_rows: bool = False) -> dict:
        d = asdict(self)
        d["trend"] = [list(t) for t in self.trend]
        if not with_rows:
            d.pop("rows")
        return d


@dataclass(frozen=True)
class RandomFieldSpec:
    """Recipe for seeded random fields.

    Coefficients are complex Gaussians scaled by ``<n>^-alpha``.  Space-time
    fields carry ``per_mode`` entries per spatial mode at temporal frequency
    ``P(n) + d`` with ``d`` uniform in ``[-spread, spread]``.
    """

    N: int
    alpha: float = 0.0
    spread: int = 0
    seed: int = 0
    per_mode: int = 1

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("bandlimit must be non-negative")
        if self.alpha < 0:
            raise ValueError("decay exponent must be non-negative")
        if self.spread < 0 or self.per_mode < 1:
            raise ValueError("need spread >= 0 and per_mode >= 1")

    def rng(self, trial: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([int(self.seed), int(trial)]))

    def _gauss(self, rng, size):
        return rng.standard_normal(size) + 1j * rng.standard_normal(size)

    def spatial(self, trial: int = 0) -> SpectralField:
        rng = self.rng(trial)
        n = np.arange(-self.N, self.N + 1)
        return SpectralField(self._gauss(rng, n.size) * (1.0 + n**2) ** (-self.alpha / 2))

    def spacetime(self, trial: int = 0) -> SpaceTimeField:
        rng = self.rng(trial)
        n = np.repeat(np.arange(-self.N, self.N + 1), self.per_mode)
        d = rng.integers(-self.spread, self.spread + 1, size=n.size)
        c = self._gauss(rng, n.size) * (1.0 + n**2) ** (-self.alpha / 2)
        return SpaceTimeField(n, dispersion(n) + d, c)


def _collect(estimate_id: str, seed: int, jobs: list, fn: Callable, threads: int = 1) -> RatioReport:
    """Evaluate ``fn(size, trial) -> (lhs, rhs) | None`` over ``jobs`` and reduce.

    ``None`` (or a zero ``rhs``) marks a degenerate sample; it is counted in
    ``skipped`` and never enters the max or mean.
    """
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: fn(*job), jobs))
    else:
        results = [fn(*job) for job in jobs]
    rows, skipped = [], 0
    per_size: dict = {}
    for (size, trial), res in zip(jobs, results):
        if res is None or res[1] == 0:
            skipped += 1
            continue
        lhs, rhs = float(res[0]), float(res[1])
        ratio = lhs / rhs
        rows.append({"estimate_id": estimate_id, "size_param": size, "trial": trial,
                     "lhs": lhs, "rhs": rhs, "ratio": ratio})
        per_size[size] = max(per_size.get(size, 0.0), ratio)
    if not rows:
        raise ValueError(f"{estimate_id}: every sample was degenerate")
    ratios = np.array([r["ratio"] for r in rows])
    return RatioReport(
        estimate_id=estimate_id,
        samples=len(rows),
        max_ratio=float(ratios.max()),
        mean_ratio=min(float(ratios.mean()), float(ratios.max())),
        trend=[(size, per_size[size]) for size in sorted(per_size)],
        seed=int(seed),
        skipped=skipped,
        rows=rows,
    )


def trend_increase(report: RatioReport) -> list[float]:
    """Relative growth of the max ratio between successive sizes."""
    vals = [r for _, r in report.trend]
    return [b / a - 1.0 for a, b in zip(vals, vals[1:])]


# --------------------------------------------------------------------------
# Strichartz-type estimates
# --------------------------------------------------------------------------


def _truncate(u0: SpectralField, N: int) -> SpectralField:
    if N < 0:
        raise ValueError("N must be non-negative")
    keep = np.abs(u0.modes) <= N
    return SpectralField(np.where(keep, u0.coeffs, 0)).with_bandlimit(min(N, u0.bandlimit))


def l6_plancherel_check(u0: SpectralField, N: int, grid: Optional[tuple[int, int]] = None):
    r"""Both sides of :math:`\|S_N u\|_{L^6}^6 = 4\pi^2 \sum_{n,j} |\sum \hat u\hat u\hat u|^2`.

    The left side is a grid quadrature of the evolved solution; the right
    side groups the triples ``(n1, n2, n3)`` by ``n = n1 + n2 + n3`` and
    ``j = P(n1) + P(n2) + P(n3)``.  Returns ``(lhs, rhs, relerr)``.
    """
    v = _truncate(u0, N)
    lhs = lp_norm(free_evolution(v), 6, grid) ** 6
    modes = v.modes.astype(np.int64)
    P = dispersion(modes)
    a, b, c = np.meshgrid(np.arange(modes.size), np.arange(modes.size), np.arange(modes.size), indexing="ij")
    n = (modes[a] + modes[b] + modes[c]).reshape(-1)
    j = (P[a] + P[b] + P[c]).reshape(-1)
    prod = (v.coeffs[a] * v.coeffs[b] * v.coeffs[c]).reshape(-1)
    buckets = SpaceTimeField(n, j, prod)
    rhs = 4 * np.pi**2 * buckets.l2sq()
    scale = max(abs(lhs), abs(rhs))
    relerr = abs(lhs - rhs) / scale if scale else 0.0
    return float(lhs), float(rhs), float(relerr)


def lr_exponent(r: int, eps: float) -> float:
    """Sobolev exponent ``1/4 - 3/(2r) + eps`` of the L^r Strichartz bound."""
    return 0.25 - 1.5 / r + eps


def _lr_sample(spec: RandomFieldSpec, r: int, s: float):
    def sample(N, trial):
        u0 = replace(spec, N=N).spatial(trial)
        den = sobolev_norm(u0, s)
        if den == 0:
            return None
        return lp_norm(free_evolution(u0), r), den

    return sample


def _jobs(sizes, trials):
    return [(int(size), t) for size in sizes for t in range(int(trials))]


def strichartz_l6_report(spec: RandomFieldSpec, eps: float, trials: int, sizes: Iterable[int] | None = None,
                         threads: int = 1) -> RatioReport:
    """``||e^{itL} u0||_{L^6} / ||u0||_{H^eps}`` over random data and an N-sweep."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    sizes = [spec.N] if sizes is None else list(sizes)
    return _collect("strichartz_l6", spec.seed, _jobs(sizes, trials), _lr_sample(spec, 6, eps), threads)


def lr_strichartz_report(spec: RandomFieldSpec, r: int, eps: float, trials: int,
                         sizes: Iterable[int] | None = None, threads: int = 1) -> RatioReport:
    if r < 6 or r % 2:
        raise ValueError("r must be an even integer >= 6")
    if eps <= 0:
        raise ValueError("eps must be positive")
    sizes = [spec.N] if sizes is None else list(sizes)
    return _collect(f"strichartz_l{r}", spec.seed, _jobs(sizes, trials),
                    _lr_sample(spec, r, lr_exponent(r, eps)), threads)


def l4_ratio_report(spec: RandomFieldSpec, trials: int, sizes: Iterable[int] | None = None,
                    vary: str = "N", threads: int = 1) -> RatioReport:
    """``||f||_{L^4} / ||f||_{X^{0,1/3}}`` for random space-time fields.

    ``vary`` selects whether the sweep runs over the bandlimit ``N`` or the
    modulation ``spread``.
    """
    if vary not in ("N", "spread"):
        raise ValueError("vary must be 'N' or 'spread'")
    sizes = [getattr(spec, vary)] if sizes is None else list(sizes)

    def sample(size, trial):
        f = replace(spec, **{vary: size}).spacetime(trial)
        den = xsb_norm(f, 0.0, 1.0 / 3.0)
        if den == 0:
            return None
        return lp_norm(f, 4), den

    return _collect("l4_x013", spec.seed, _jobs(sizes, trials), sample, threads)


# --------------------------------------------------------------------------
# dyadic bilinear estimate
# --------------------------------------------------------------------------


def random_dyadic_field(N: int, shells: int, seed: int, trial: int = 0) -> SpaceTimeField:
    """One entry per spatial mode in every modulation shell ``0..shells``.

    The offset ``d = tau - P(n)`` is drawn among integers whose bracket lies
    in the shell, with a random sign.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))
    ns, taus = [], []
    for n in range(-N, N + 1):
        for j in range(shells + 1):
            # integers d >= 0 with 4^(j-1) < 1 + d^2 <= 4^j
            lo = 0 if j == 0 else math.isqrt(4 ** (j - 1) - 1) + 1
            hi = math.isqrt(4**j - 1)
            d = int(rng.integers(lo, hi + 1)) * (1 if rng.random() < 0.5 else -1)
            ns.append(n)
            taus.append(dispersion(n) + d)
    c = rng.standard_normal(len(ns)) + 1j * rng.standard_normal(len(ns))
    return SpaceTimeField(np.array(ns), np.array(taus), c)


def dyadic_bilinear_check(f: SpaceTimeField, j: int, k: int):
    """``(lhs, bound, ratio)`` for ``||f_j f_{j+k}||_{L^2}`` against ``2^{2j/3+k/6}||f_j|| ||f_{j+k}||``.

    Returns ``None`` when either dyadic piece vanishes.
    """
    if j < 0 or k < 0:
        raise ValueError("need j, k >= 0")
    fj, fjk = dyadic_piece(f, j), dyadic_piece(f, j + k)
    if not len(fj) or not len(fjk):
        return None
    lhs = lp_norm(multiply(fj, fjk), 2)
    bound = 2.0 ** (2 * j / 3 + k / 6) * lp_norm(fj, 2) * lp_norm(fjk, 2)
    return lhs, bound, lhs / bound


def dyadic_sweep(N: int, js: Iterable[int], ks: Iterable[int], trials: int, seed: int,
                 threads: int = 1) -> RatioReport:
    """Max ratio over random fields for each ``(j, k)``; size parameter is ``k``."""
    js, ks = list(js), list(ks)
    shells = max(js) + max(ks)
    fields = [random_dyadic_field(N, shells, seed, t) for t in range(trials)]
    jobs = [(k, (j, t)) for k in ks for j in js for t in range(trials)]

    def sample(k, jt):
        j, t = jt
        res = dyadic_bilinear_check(fields[t], j, k)
        return None if res is None else res[:2]

    report = _collect("dyadic_bilinear", seed, jobs, sample, threads)
    for row in report.rows:
        row["trial"] = row["trial"][1]
    return report


# --------------------------------------------------------------------------
# bilinear and trilinear Z estimates
# --------------------------------------------------------------------------


def _project(f: SpaceTimeField) -> SpaceTimeField:
    """Zero-mean projection in space: drop the ``n = 0`` entries."""
    return f.restrict(f.n != 0) if len(f) else f


def _Z(f, s, b):
    return zsb_norm(f, s, b)


def _X(f, s, b):
    return xsb_norm(f, s, b)


def _bilinear_mean_zero(u1, u2, s):
    lhs = _Z(multiply(_project(u1), _project(u2)), s, -0.5)
    rhs = _Z(u1, s - 1, 0.5) * _Z(u2, s - 1, 1 / 3) + _Z(u1, s - 1, 1 / 3) * _Z(u2, s - 1, 0.5)
    return lhs, rhs


def _bilinear_half_projected(u1, u2, s):
    lhs = _Z(multiply(u1, _project(u2)), s, -0.5)
    rhs = (_Z(u1, s - 1, 0.5) * _Z(u2, s - 1, 1 / 3) + _Z(u1, s - 1, 1 / 3) * _Z(u2, s - 1, 0.5)
           + _Z(u1, s - 1, 0.5) * _X(u2, s, 0.0))
    return lhs, rhs


def _bilinear_general(u1, u2, s):
    lhs = _Z(multiply(u1, u2), s, -0.5)
    rhs = (_Z(u1, s - 1, 0.5) * _Z(u2, s - 1, 1 / 3) + _Z(u1, s - 1, 1 / 3) * _Z(u2, s - 1, 0.5)
           + _Z(u1, s - 1, 0.5) * _X(u2, s, 0.0) + _X(u1, s, 0.0) * _Z(u2, s - 1, 0.5))
    return lhs, rhs


def _bilinear_x_product(u1, u2, s):
    return _X(multiply(u1, u2), s, 0.0), _X(u1, s, 1 / 3) * _X(u2, s, 1 / 3)


def _bilinear_smoothing(u1, u2, s):
    return _Z(multiply(u1, u2), s - 1, 0.5), _Z(u1, s, 0.5) * _Z(u2, s, 0.5)


# variant -> (evaluator, smallest admissible s)
BILINEAR_VARIANTS = {
    "mean-zero": (_bilinear_mean_zero, 0.5),
    "half-projected": (_bilinear_half_projected, 0.5),
    "general": (_bilinear_general, 0.5),
    "x-product": (_bilinear_x_product, 0.0),
    "smoothing": (_bilinear_smoothing, 0.5),
}


def bilinear_z_check(u1: SpaceTimeField, u2: SpaceTimeField, s: float, variant: str = "mean-zero"):
    """``(lhs, rhs)`` of one bilinear estimate, or ``None`` if either side is degenerate."""
    try:
        fn, s_min = BILINEAR_VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown bilinear variant {variant!r}; choose from {sorted(BILINEAR_VARIANTS)}") from None
    if s < s_min:
        raise ValueError(f"{variant} requires s >= {s_min}")
    if not len(u1) or not len(u2):
        return None
    lhs, rhs = fn(u1, u2, s)
    if rhs == 0:
        return None
    return lhs, rhs


def bilinear_z_report(spec: RandomFieldSpec, s: float, trials: int, variant: str = "mean-zero",
                      sizes: Iterable[int] | None = None, threads: int = 1) -> RatioReport:
    """Random pairs ``(u1, u2)``; the two fields use trials ``2t`` and ``2t + 1``."""
    sizes = [spec.N] if sizes is None else list(sizes)

    def sample(N, trial):
        sp = replace(spec, N=N)
        return bilinear_z_check(sp.spacetime(2 * trial), sp.spacetime(2 * trial + 1), s, variant)

    return _collect(f"bilinear_{variant}", spec.seed, _jobs(sizes, trials), sample, threads)


def _cube(u: SpaceTimeField) -> SpaceTimeField:
    """``|u|^2 u`` as ``u * u * conj(u)``."""
    return multiply(multiply(u, u), conjugate(u))


def trilinear_check(u: SpaceTimeField, s: float, T: float, component: str = "Z"):
    r"""``(lhs, rhs)`` for :math:`\|\eta(t/T)|u|^2u\|_{Z^{s,-1/2}} \lesssim T^{1/6}\|u\|^3_{Z^{s,1/2}}`.

    ``component="X"`` measures both sides in the X-part only.
    """
    if not 0 < T < 1:
        raise ValueError("T must lie in (0, 1)")
    if component not in ("X", "Z"):
        raise ValueError("component must be 'X' or 'Z'")
    if not len(u):
        return None
    nrm = _Z if component == "Z" else _X
    lhs = nrm(time_localize(_cube(u), T), s, -0.5)
    rhs = T ** (1 / 6) * nrm(u, s, 0.5) ** 3
    if rhs == 0:
        return None
    return lhs, rhs


def trilinear_report(u: SpaceTimeField, s: float, Ts: Iterable[float], component: str = "Z",
                     seed: int = 0) -> RatioReport:
    """T-sweep on one fixed field; size parameter is ``T``."""
    cube = _cube(u) if len(u) else u
    nrm = _Z if component == "Z" else _X
    base = nrm(u, s, 0.5) ** 3 if len(u) else 0.0

    def sample(T, _trial):
        if not 0 < T < 1:
            raise ValueError("T must lie in (0, 1)")
        if not len(u) or base == 0:
            return None
        return nrm(time_localize(cube, T), s, -0.5), T ** (1 / 6) * base

    jobs = [(float(T), 0) for T in Ts]
    return _collect(f"trilinear_{component}", seed, jobs, sample)
