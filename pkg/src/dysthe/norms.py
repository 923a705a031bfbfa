r"""Sobolev, space-time Lebesgue and Bourgain norms of discrete fields.

Brackets are :math:`\langle x\rangle = (1+x^2)^{1/2}` throughout and the
modulation weight is :math:`\sigma(n,\tau) = \langle \tau - P(n)\rangle`.

* :math:`\|f\|_{X^{s,b}} = \|\langle n\rangle^s \sigma^b \hat f\|_{\ell^2_{n,\tau}}`
* :math:`\|f\|_{Y^{s,b}} = \|\langle n\rangle^s \sigma^b \hat f\|_{\ell^2_n \ell^1_\tau}`
* :math:`\|f\|_{Z^{s,b}} = \|f\|_{X^{s,b}} + \|f\|_{Y^{s,b-1/2}}`
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .spectral import SpaceTimeField, SpectralField, dispersion

__all__ = [
    "NormSpec",
    "NormReport",
    "bracket",
    "modulation_weight",
    "sobolev_norm",
    "lp_norm",
    "lp_grid_size",
    "xsb_norm",
    "ysb_norm",
    "zsb_norm",
    "norm",
    "dyadic_index",
    "dyadic_piece",
    "embedding_constant",
]


def bracket(x):
    x = np.asarray(x, dtype=float)
    return np.sqrt(1.0 + x * x)


def modulation_weight(n, tau):
    """``<tau - P(n)>``; equals 1 exactly on the curve ``tau = P(n)``."""
    d = np.asarray(tau, dtype=np.int64) - dispersion(np.asarray(n, dtype=np.int64))
    return bracket(d)


@dataclass(frozen=True)
class NormSpec:
    space: str
    s: float = 0.0
    b: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        if self.space not in ("Hs", "Lp_spacetime", "Xsb", "Ysb", "Zsb"):
            raise ValueError(f"unknown space {self.space!r}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not (np.isfinite(self.s) and np.isfinite(self.b)):
            raise ValueError("s and b must be finite")


@dataclass(frozen=True)
class NormReport:
    name: str
    s: float
    b: float
    p: float
    value: float

    def as_dict(self) -> dict:
        return asdict(self)


def sobolev_norm(u: SpectralField, s: float) -> float:
    w = bracket(u.modes) ** (2 * s)
    return float(np.sqrt(np.sum(w * np.abs(u.coeffs) ** 2)))


def lp_grid_size(f: SpaceTimeField, p: int) -> tuple[int, int]:
    """Smallest grid on which trapezoidal quadrature of ``|f|^p`` is exact.

    ``|f|^p`` is invariant under modulation, so only the width of the
    frequency support matters: ``|f|^2`` has frequencies within the width
    and ``|f|^p`` within ``p/2`` times it.
    """
    if not len(f):
        return 1, 1
    wx = int(f.n.max() - f.n.min())
    wt = int(f.tau.max() - f.tau.min())
    return (p * wx) // 2 + 1, (p * wt) // 2 + 1


def lp_norm(f: SpaceTimeField, p: int, grid: tuple[int, int] | None = None) -> float:
    r"""``(\iint_{[0,2\pi]^2} |f|^p dx dt)^{1/p}`` for even ``p`` by exact quadrature."""
    p = int(p)
    if p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    if not len(f):
        return 0.0
    need = lp_grid_size(f, p)
    Mx, Mt = need if grid is None else (int(grid[0]), int(grid[1]))
    if Mx < need[0] or Mt < need[1]:
        raise ValueError(f"grid {(Mx, Mt)} too small for exact L^{p} quadrature; need M >= {need}")
    if p == 2:
        # the quadrature is exact, so it reduces to Plancherel
        return float(np.sqrt(4 * np.pi**2 * f.l2sq()))
    placed = np.zeros((Mx, Mt), dtype=np.complex128)
    # shift the support to start at zero frequency; |f| is unchanged
    np.add.at(placed, ((f.n - f.n.min()) % Mx, (f.tau - f.tau.min()) % Mt), f.coeffs)
    vals = np.fft.ifft2(placed) * (Mx * Mt)
    integral = np.sum(np.abs(vals) ** p) * (4 * np.pi**2) / (Mx * Mt)
    return float(integral ** (1.0 / p))


def _weights(f: SpaceTimeField, s: float, b: float) -> np.ndarray:
    return bracket(f.n) ** s * modulation_weight(f.n, f.tau) ** b


def xsb_norm(f: SpaceTimeField, s: float, b: float) -> float:
    if not len(f):
        return 0.0
    return float(np.sqrt(np.sum((_weights(f, s, b) * np.abs(f.coeffs)) ** 2)))


def ysb_norm(f: SpaceTimeField, s: float, b: float) -> float:
    if not len(f):
        return 0.0
    inner = _weights(f, s, b) * np.abs(f.coeffs)
    # f.n is sorted, so group sums per spatial mode are contiguous
    _, start = np.unique(f.n, return_index=True)
    per_mode = np.add.reduceat(inner, start)
    return float(np.sqrt(np.sum(per_mode**2)))


def zsb_norm(f: SpaceTimeField, s: float, b: float) -> float:
    """``X^{s,b}`` norm plus ``Y^{s,b-1/2}`` norm."""
    return xsb_norm(f, s, b) + ysb_norm(f, s, b - 0.5)


def norm(f, spec: NormSpec) -> float:
    if spec.space == "Hs":
        return sobolev_norm(f, spec.s)
    if spec.space == "Lp_spacetime":
        return lp_norm(f, int(spec.p))
    return {"Xsb": xsb_norm, "Ysb": ysb_norm, "Zsb": zsb_norm}[spec.space](f, spec.s, spec.b)


def dyadic_index(n, tau) -> np.ndarray:
    """Shell ``j >= 0`` with ``2^(j-1) < <tau - P(n)> <= 2^j``, decided in integers."""
    d = np.asarray(tau, dtype=np.int64) - dispersion(np.asarray(n, dtype=np.int64))
    target = 1 + d * d  # sigma^2
    j = np.ceil(np.log2(target.astype(float)) / 2).astype(np.int64)
    j = np.maximum(j, 0)
    # repair float rounding at shell edges: need 4^(j-1) < target <= 4^j
    j = np.where(target > 4**j, j + 1, j)
    j = np.where((j > 0) & (target <= 4 ** np.maximum(j - 1, 0)), j - 1, j)
    return j


def dyadic_piece(f: SpaceTimeField, j: int) -> SpaceTimeField:
    if not len(f):
        return f
    return f.restrict(dyadic_index(f.n, f.tau) == int(j))


def embedding_constant(delta: float, terms: int = 200_000) -> float:
    r"""Upper bound for :math:`(\sum_{\tau\in\mathbb Z} \langle\tau\rangle^{-1-2\delta})^{1/2}`.

    Partial sum plus the integral tail :math:`2\int_K^\infty x^{-1-2\delta}dx`.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    tau = np.arange(1, terms + 1, dtype=float)
    partial = 1.0 + 2.0 * np.sum(bracket(tau) ** (-1 - 2 * delta))
    tail = terms ** (-2 * delta) / delta
    return float(np.sqrt(partial + tail))
