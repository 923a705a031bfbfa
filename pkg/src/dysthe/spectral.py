r"""Discrete Fourier representation of functions on the torus.

Convention (shared by every module in the package): a spatial field is

.. math::

    u(x) = \sum_{|n| \le N} \hat u(n) e^{inx},

with no :math:`1/2\pi` in the synthesis, so
:math:`\|u\|_{L^2[0,2\pi]}^2 = 2\pi \sum |\hat u(n)|^2`.  A space-time field
is :math:`f(x,t) = \sum \hat f(n,\tau) e^{i(nx + \tau t)}` on
:math:`[0,2\pi]^2`, so :math:`\|f\|_{L^2}^2 = 4\pi^2 \sum |\hat f|^2`.

Spatial fields are dense (index ``i`` holds mode ``i - N``).  Space-time
fields are sparse: their temporal support sits near the cubic curve
:math:`\tau = P(n)` and is far too wide for a dense array.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

__all__ = [
    "SpectralField",
    "SpaceTimeField",
    "GridField",
    "dispersion",
    "resonance_identity",
    "propagate",
    "free_evolution",
    "apply_multiplier",
    "project_zero_mean",
    "conjugate",
    "multiply",
    "synthesize",
    "analyze",
]

# |n| up to this keeps n^3 - 2n^2 + 8n (and sums of three such) inside int64.
_INT64_SAFE_MODE = 1_000_000


def dispersion(n):
    """Dispersive relation ``P(n) = n**3 - 2*n**2 + 8*n``.

    Python integers are evaluated exactly.  Integer arrays are evaluated in
    int64 after a range check; an out-of-range array raises ``OverflowError``
    rather than wrapping.
    """
    if isinstance(n, (int, np.integer)):
        n = int(n)
        return n**3 - 2 * n**2 + 8 * n
    arr = np.asarray(n)
    if arr.dtype.kind not in "iu":
        raise TypeError(f"dispersion needs integer modes, got dtype {arr.dtype}")
    if arr.size and int(np.max(np.abs(arr))) > _INT64_SAFE_MODE:
        raise OverflowError(
            f"|n| > {_INT64_SAFE_MODE} would overflow int64; pass Python ints instead"
        )
    arr = arr.astype(np.int64)
    return arr**3 - 2 * arr**2 + 8 * arr


def resonance_identity(n1: int, n2: int) -> int:
    """Return ``P(n1+n2) - P(n1) - P(n2)``; checks it equals ``n1*n2*(3n-4)``."""
    n1, n2 = int(n1), int(n2)
    n = n1 + n2
    value = dispersion(n) - dispersion(n1) - dispersion(n2)
    factored = n1 * n2 * (3 * n - 4)
    if value != factored:
        raise ArithmeticError(f"resonance identity broken at ({n1}, {n2}): {value} != {factored}")
    return value


# --------------------------------------------------------------------------
# spatial fields
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Bandlimited function on the spatial torus.

    ``coeffs[i]`` is the coefficient of ``exp(i*(i - N)*x)`` where
    ``N = bandlimit``.  Instances are immutable.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.size % 2 != 1:
            raise ValueError("coefficient array must have odd length 2N+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, bandlimit: int) -> "SpectralField":
        return cls(np.zeros(2 * int(bandlimit) + 1, dtype=np.complex128))

    @classmethod
    def from_modes(cls, modes: Mapping[int, complex], bandlimit: int | None = None) -> "SpectralField":
        """Build from ``{mode: coefficient}``; bandlimit defaults to the widest mode."""
        widest = max((abs(int(k)) for k in modes), default=0)
        N = widest if bandlimit is None else int(bandlimit)
        if widest > N:
            raise ValueError(f"mode {widest} exceeds bandlimit {N}")
        c = np.zeros(2 * N + 1, dtype=np.complex128)
        for k, v in modes.items():
            c[int(k) + N] += v
        return cls(c)

    @classmethod
    def delta(cls, n: int, value: complex = 1.0, bandlimit: int | None = None) -> "SpectralField":
        return cls.from_modes({int(n): value}, bandlimit)

    @property
    def bandlimit(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        N = self.bandlimit
        return np.arange(-N, N + 1, dtype=np.int64)

    def __getitem__(self, n: int) -> complex:
        N = self.bandlimit
        n = int(n)
        if abs(n) > N:
            return 0j
        return complex(self.coeffs[n + N])

    def to_dict(self, tol: float = 0.0) -> dict[int, complex]:
        return {int(k): complex(v) for k, v in zip(self.modes, self.coeffs) if abs(v) > tol}

    def with_bandlimit(self, bandlimit: int) -> "SpectralField":
        """Zero-pad or truncate to a new bandlimit."""
        M, N = int(bandlimit), self.bandlimit
        if M >= N:
            return SpectralField(np.pad(self.coeffs, M - N))
        return SpectralField(self.coeffs[N - M:N + M + 1])

    def l2sq(self) -> float:
        """``sum |u_n|^2`` (the L2 norm squared is 2*pi times this)."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def _aligned(self, other: "SpectralField"):
        N = max(self.bandlimit, other.bandlimit)
        return self.with_bandlimit(N).coeffs, other.with_bandlimit(N).coeffs

    def __add__(self, other: "SpectralField") -> "SpectralField":
        a, b = self._aligned(other)
        return SpectralField(a + b)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        a, b = self._aligned(other)
        return SpectralField(a - b)

    def __neg__(self) -> "SpectralField":
        return SpectralField(-self.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        if isinstance(scalar, (SpectralField, SpaceTimeField)):
            raise TypeError("use multiply() for field products")
        return SpectralField(self.coeffs * scalar)

    __rmul__ = __mul__

    def __call__(self, x) -> np.ndarray:
        """Evaluate the trigonometric polynomial at points ``x``."""
        x = np.asarray(x, dtype=float)
        return np.exp(1j * np.multiply.outer(x, self.modes)) @ self.coeffs

    def __repr__(self) -> str:
        return f"SpectralField(bandlimit={self.bandlimit}, nonzero={len(self.to_dict())})"


def propagate(u0: SpectralField, t: float) -> SpectralField:
    """Linear propagator: multiply mode ``n`` by ``exp(i P(n) t)``."""
    phase = np.exp(1j * dispersion(u0.modes).astype(float) * t)
    return SpectralField(u0.coeffs * phase)


Multiplier = Union[str, Mapping[int, complex], Callable[[np.ndarray], np.ndarray]]


def apply_multiplier(u: SpectralField, kind: Multiplier) -> SpectralField:
    """Apply a Fourier multiplier.

    ``kind`` is ``"dx"`` (``i n``), ``"abs_dx"`` (``|n|``), a mapping
    ``{n: m(n)}`` that must cover every mode carrying a nonzero coefficient,
    or a vectorised callable of the mode array.
    """
    n = u.modes
    if isinstance(kind, str):
        if kind == "dx":
            symbol = 1j * n
        elif kind == "abs_dx":
            symbol = np.abs(n).astype(float)
        else:
            raise ValueError(f"unknown multiplier {kind!r}")
    elif isinstance(kind, Mapping):
        missing = [int(k) for k, c in zip(n, u.coeffs) if c != 0 and int(k) not in kind]
        if missing:
            raise KeyError(f"multiplier undefined on supported modes {missing}")
        symbol = np.array([kind.get(int(k), 0) for k in n], dtype=np.complex128)
    else:
        symbol = np.asarray(kind(n))
    return SpectralField(u.coeffs * symbol)


def project_zero_mean(u: SpectralField) -> SpectralField:
    c = u.coeffs.copy()
    c[u.bandlimit] = 0
    return SpectralField(c)


def conjugate(u):
    """Complex conjugate of a field: coefficient ``n`` becomes ``conj(u(-n))``."""
    if isinstance(u, SpaceTimeField):
        return SpaceTimeField(-u.n, -u.tau, np.conj(u.coeffs))
    return SpectralField(np.conj(u.coeffs[::-1]))


def multiply(u, v, method: str = "direct"):
    """Product of two fields by exact coefficient convolution.

    For spatial fields the bandlimit of the result is the sum of the two
    bandlimits.  ``method="fft"`` computes the same product on a zero-padded
    grid; it agrees with the direct convolution to roundoff.
    """
    if isinstance(u, SpaceTimeField) or isinstance(v, SpaceTimeField):
        if not (isinstance(u, SpaceTimeField) and isinstance(v, SpaceTimeField)):
            raise TypeError("cannot mix spatial and space-time fields")
        return _multiply_spacetime(u, v)
    if method == "direct":
        return SpectralField(np.convolve(u.coeffs, v.coeffs))
    if method == "fft":
        size = u.coeffs.size + v.coeffs.size - 1
        out = np.fft.ifft(np.fft.fft(u.coeffs, size) * np.fft.fft(v.coeffs, size))
        return SpectralField(out)
    raise ValueError(f"unknown product method {method!r}")


# --------------------------------------------------------------------------
# space-time fields
# --------------------------------------------------------------------------


def _accumulate(n: np.ndarray, tau: np.ndarray, c: np.ndarray):
    """Sum coefficients sharing a (n, tau) key; drop exact zeros; sort."""
    n = np.asarray(n, dtype=np.int64).reshape(-1)
    tau = np.asarray(tau, dtype=np.int64).reshape(-1)
    c = np.asarray(c, dtype=np.complex128).reshape(-1)
    if not (n.size == tau.size == c.size):
        raise ValueError("n, tau and coeffs must have equal length")
    if n.size == 0:
        return n, tau, c
    keys, inverse = np.unique(np.stack([n, tau], axis=1), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    re = np.bincount(inverse, weights=c.real, minlength=len(keys))
    im = np.bincount(inverse, weights=c.imag, minlength=len(keys))
    out = re + 1j * im
    keep = out != 0
    return keys[keep, 0], keys[keep, 1], out[keep]


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Finitely supported function on the space-time torus.

    Stored as parallel arrays ``(n, tau, coeffs)`` with unique, sorted keys.
    """

    n: np.ndarray
    tau: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        n, tau, c = _accumulate(self.n, self.tau, self.coeffs)
        for name, arr in (("n", n), ("tau", tau), ("coeffs", c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def empty(cls) -> "SpaceTimeField":
        return cls(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.complex128))

    @classmethod
    def from_dict(cls, coeffs: Mapping[tuple[int, int], complex]) -> "SpaceTimeField":
        if not coeffs:
            return cls.empty()
        keys = np.array(list(coeffs.keys()), dtype=np.int64).reshape(-1, 2)
        return cls(keys[:, 0], keys[:, 1], np.array(list(coeffs.values()), dtype=np.complex128))

    @classmethod
    def delta(cls, n: int, tau: int, value: complex = 1.0) -> "SpaceTimeField":
        return cls.from_dict({(int(n), int(tau)): value})

    def __len__(self) -> int:
        return int(self.n.size)

    @property
    def spatial_bandlimit(self) -> int:
        return int(np.max(np.abs(self.n))) if len(self) else 0

    @property
    def temporal_bandlimit(self) -> int:
        return int(np.max(np.abs(self.tau))) if len(self) else 0

    def modulation(self) -> np.ndarray:
        """Integer distance ``tau - P(n)`` of each stored frequency from the curve."""
        return self.tau - dispersion(self.n)

    def to_dict(self) -> dict[tuple[int, int], complex]:
        return {(int(a), int(b)): complex(c) for a, b, c in zip(self.n, self.tau, self.coeffs)}

    def __getitem__(self, key: tuple[int, int]) -> complex:
        hit = np.nonzero((self.n == key[0]) & (self.tau == key[1]))[0]
        return complex(self.coeffs[hit[0]]) if hit.size else 0j

    def restrict(self, mask: np.ndarray) -> "SpaceTimeField":
        mask = np.asarray(mask, dtype=bool)
        return SpaceTimeField(self.n[mask], self.tau[mask], self.coeffs[mask])

    def l2sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        return SpaceTimeField(
            np.concatenate([self.n, other.n]),
            np.concatenate([self.tau, other.tau]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    def __neg__(self) -> "SpaceTimeField":
        return SpaceTimeField(self.n, self.tau, -self.coeffs)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "SpaceTimeField":
        if isinstance(scalar, (SpectralField, SpaceTimeField)):
            raise TypeError("use multiply() for field products")
        return SpaceTimeField(self.n, self.tau, self.coeffs * scalar)

    __rmul__ = __mul__

    def map_spatial(self, symbol: Callable[[np.ndarray], np.ndarray]) -> "SpaceTimeField":
        """Apply a spatial Fourier multiplier ``symbol(n)`` at every time."""
        return SpaceTimeField(self.n, self.tau, self.coeffs * symbol(self.n))

    def time_slice(self, t: float) -> SpectralField:
        """The spatial field ``x -> f(x, t)``."""
        N = self.spatial_bandlimit
        out = np.zeros(2 * N + 1, dtype=np.complex128)
        np.add.at(out, self.n + N, self.coeffs * np.exp(1j * self.tau.astype(float) * t))
        return SpectralField(out)

    def __repr__(self) -> str:
        return (
            f"SpaceTimeField(entries={len(self)}, spatial_bandlimit={self.spatial_bandlimit}, "
            f"temporal_bandlimit={self.temporal_bandlimit})"
        )


def free_evolution(u0: SpectralField) -> SpaceTimeField:
    """Space-time field of the linear solution ``sum exp(i(nx + P(n)t)) u0(n)``."""
    return SpaceTimeField(u0.modes, dispersion(u0.modes), u0.coeffs)


def _multiply_spacetime(u: SpaceTimeField, v: SpaceTimeField) -> SpaceTimeField:
    if not len(u) or not len(v):
        return SpaceTimeField.empty()
    n = np.add.outer(u.n, v.n)
    tau = np.add.outer(u.tau, v.tau)
    c = np.multiply.outer(u.coeffs, v.coeffs)
    return SpaceTimeField(n, tau, c)


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples on the uniform grid ``x_k = 2*pi*k/M`` (and ``t_l = 2*pi*l/M_t``)."""

    values: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def cell_volume(self) -> float:
        return float(np.prod([2 * np.pi / m for m in self.values.shape]))


def _check_grid(M: int, bandlimit: int, axis: str = "x"):
    if M < 2 * bandlimit + 1:
        raise ValueError(f"{axis}-grid of {M} points cannot resolve bandlimit {bandlimit}; need M >= {2 * bandlimit + 1}")


def synthesize(u, M) -> GridField:
    """Sample a field on a uniform grid (``M`` or ``(M_x, M_t)`` points)."""
    if isinstance(u, SpaceTimeField):
        Mx, Mt = (int(m) for m in M)
        _check_grid(Mx, u.spatial_bandlimit, "x")
        _check_grid(Mt, u.temporal_bandlimit, "t")
        placed = np.zeros((Mx, Mt), dtype=np.complex128)
        np.add.at(placed, (u.n % Mx, u.tau % Mt), u.coeffs)
        return GridField(np.fft.ifft2(placed) * (Mx * Mt))
    M = int(M)
    _check_grid(M, u.bandlimit)
    placed = np.zeros(M, dtype=np.complex128)
    placed[u.modes % M] = u.coeffs
    return GridField(np.fft.ifft(placed) * M)


def analyze(g: GridField, bandlimit):
    """Inverse of :func:`synthesize` for data resolved by the grid.

    For a 2-D grid ``bandlimit`` is ``(N_x, N_t)`` and every frequency in the
    box is returned (zeros dropped).
    """
    vals = np.asarray(g.values)
    if vals.ndim == 1:
        N = int(bandlimit)
        _check_grid(vals.size, N)
        spec = np.fft.fft(vals) / vals.size
        modes = np.arange(-N, N + 1)
        return SpectralField(spec[modes % vals.size])
    Nx, Nt = (int(b) for b in bandlimit)
    Mx, Mt = vals.shape
    _check_grid(Mx, Nx, "x")
    _check_grid(Mt, Nt, "t")
    spec = np.fft.fft2(vals) / (Mx * Mt)
    nn, tt = np.meshgrid(np.arange(-Nx, Nx + 1), np.arange(-Nt, Nt + 1), indexing="ij")
    return SpaceTimeField(nn, tt, spec[nn % Mx, tt % Mt])
