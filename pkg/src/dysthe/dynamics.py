r"""Nonlinear dynamics: the Dysthe nonlinearity and the objects built from it.

The nonlinearity is

.. math::

    \mathcal N(u) = -\tfrac i2 |u|^2u - \tfrac32 |u|^2\partial_x u
        - \tfrac14 u^2 \partial_x u^* + \tfrac i2 u |\partial_x| |u|^2 .

Every term is of type ``u u u*``; a triple of modes ``(a, b, c)`` with ``a, b``
from ``u`` and ``c`` from ``u*`` feeds output mode ``a + b - c`` with a
channel-dependent weight.  The exact third Picard iterate integrates each
triple's phase in closed form; the resonance frequency

    Omega = P(a) + P(b) - P(c) - P(a + b - c)

is kept as an exact integer so the resonant set ``Omega == 0`` is detected
without floating-point tests.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .norms import sobolev_norm
from .spectral import (
    SpaceTimeField,
    SpectralField,
    apply_multiplier,
    conjugate,
    dispersion,
    multiply,
    propagate,
)

__all__ = [
    "CHANNELS",
    "eta",
    "TimeWindow",
    "time_localize",
    "nonlinearity",
    "PicardInteraction",
    "picard_kernel",
    "picard_interactions",
    "third_picard_iterate",
    "quadrature_nodes",
    "omega_star",
    "illposed_initial_data",
    "closed_form_peak",
    "PicardReport",
    "illposedness_experiment",
    "illposedness_sweep",
    "CounterexampleField",
    "vn_family",
    "energy_functional_I",
    "reference_I_polynomial",
    "I_vn_closed_form",
    "I_NORMALIZATION",
    "ViscousParams",
    "BlowUpError",
    "viscous_step",
    "viscous_solve",
]

CHANNELS = ("cubic", "transport", "conjugate", "nonlocal")
DERIVATIVE_CHANNELS = ("transport", "conjugate", "nonlocal")


# --------------------------------------------------------------------------
# bump function
# --------------------------------------------------------------------------


def _psi(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    out[pos] = np.exp(-1.0 / y[pos])
    return out


def eta(x):
    """Smooth bump: 1 on ``[-1, 1]``, 0 outside ``(-2, 2)``, values in ``[0, 1]``."""
    ax = np.abs(np.asarray(x, dtype=float))
    up = _psi(2.0 - ax)
    return up / (up + _psi(ax - 1.0))


@dataclass(frozen=True)
class TimeWindow:
    """The cutoff ``t -> eta(t / T)`` on the time circle ``[-pi, pi)``."""

    T: float

    def __post_init__(self):
        if not 0 < self.T <= 1:
            raise ValueError("T must lie in (0, 1]")

    def __call__(self, t):
        return eta(np.asarray(t, dtype=float) / self.T)

    def fourier_coefficients(self, grid: int = 1 << 16, rel_tol: float = 1e-13):
        """``(k, c_k)`` with ``eta(t/T) = sum c_k exp(ikt)`` on ``[-pi, pi)``.

        Coefficients below ``rel_tol * c_0`` are dropped.  The window is
        smooth and periodic (support ``[-2T, 2T]`` is inside the circle), so
        the rectangle rule is spectrally accurate.
        """
        t = -np.pi + 2 * np.pi * np.arange(grid) / grid
        c = np.fft.fft(self(t)) / grid
        k = np.fft.fftfreq(grid, 1.0 / grid).astype(np.int64)
        # undo the -pi origin of the sample grid
        c = c * np.exp(1j * k * np.pi)
        keep = np.abs(c) > rel_tol * abs(c[0])
        order = np.argsort(k[keep])
        return k[keep][order], c[keep][order]


def time_localize(f: SpaceTimeField, T: float) -> SpaceTimeField:
    """Multiply ``f`` by ``eta(t / T)`` (convolution in the temporal frequency)."""
    if not len(f):
        return f
    k, ck = TimeWindow(T).fourier_coefficients()
    n = np.repeat(f.n, k.size)
    tau = (f.tau[:, None] + k[None, :]).reshape(-1)
    c = (f.coeffs[:, None] * ck[None, :]).reshape(-1)
    return SpaceTimeField(n, tau, c)


# --------------------------------------------------------------------------
# nonlinearity
# --------------------------------------------------------------------------


def nonlinearity(u: SpectralField, channels=CHANNELS) -> SpectralField:
    """Dysthe nonlinearity by exact convolution; output bandlimit is ``3N``."""
    bad = set(channels) - set(CHANNELS)
    if bad:
        raise ValueError(f"unknown channels {sorted(bad)}")
    N3 = 3 * u.bandlimit
    ubar = conjugate(u)
    mod2 = multiply(u, ubar)
    out = SpectralField.zeros(N3)
    if "cubic" in channels:
        out = out + (-0.5j) * multiply(mod2, u)
    if "transport" in channels:
        out = out + (-1.5) * multiply(mod2, apply_multiplier(u, "dx"))
    if "conjugate" in channels:
        out = out + (-0.25) * multiply(multiply(u, u), apply_multiplier(ubar, "dx"))
    if "nonlocal" in channels:
        out = out + 0.5j * multiply(u, apply_multiplier(mod2, "abs_dx"))
    return out.with_bandlimit(N3)


# --------------------------------------------------------------------------
# third Picard iterate
# --------------------------------------------------------------------------


def picard_kernel(omega, t: float):
    r"""``\int_0^t e^{i s \Omega} ds`` with the exact value ``t`` at ``Omega = 0``."""
    omega = np.asarray(omega)
    w = omega.astype(float)
    safe = np.where(omega == 0, 1.0, w)
    val = np.where(omega == 0, t + 0j, np.expm1(1j * t * safe) / (1j * safe))
    return val if val.ndim else complex(val)


@dataclass(frozen=True)
class PicardInteraction:
    """One ordered mode triple feeding output mode ``n``.

    ``n1`` is the mode taken from ``u`` (second slot) and ``n2`` the mode
    taken from ``u*``; the first ``u`` slot carries ``n - n1 + n2``.
    """

    channel: str
    n: int
    n1: int
    n2: int
    omega: int
    weight: complex
    kernel: complex


def _channel_weight(channel: str, a, b, c):
    if channel == "cubic":
        return np.full(np.shape(a), -0.5j)
    if channel == "transport":
        return -1.5 * 1j * b
    if channel == "conjugate":
        return -0.25 * (-1j * c)
    if channel == "nonlocal":
        return 0.5j * np.abs(b - c)
    raise ValueError(f"unknown channel {channel!r}")


def _triples(u0: SpectralField):
    modes = u0.modes[u0.coeffs != 0]
    vals = u0.coeffs[u0.coeffs != 0]
    a, b, c = (g.reshape(-1) for g in np.meshgrid(modes, modes, modes, indexing="ij"))
    va, vb, vc = (g.reshape(-1) for g in np.meshgrid(vals, vals, np.conj(vals), indexing="ij"))
    n = a + b - c
    omega = dispersion(a) + dispersion(b) - dispersion(c) - dispersion(n)
    return a, b, c, n, omega, va * vb * vc


def picard_interactions(u0: SpectralField, t: float, n: int, channels=CHANNELS) -> list[PicardInteraction]:
    """All interactions landing on output mode ``n`` (for inspection)."""
    a, b, c, out, omega, amp = _triples(u0)
    sel = out == n
    result = []
    for ch in channels:
        w = _channel_weight(ch, a[sel], b[sel], c[sel]) * amp[sel]
        k = picard_kernel(omega[sel], t)
        for bb, cc, om, ww, kk in zip(b[sel], c[sel], omega[sel], np.atleast_1d(w), np.atleast_1d(k)):
            if ww != 0:
                result.append(PicardInteraction(ch, int(n), int(bb), int(cc), int(om), complex(ww), complex(kk)))
    return result


def quadrature_nodes(u0: SpectralField, t: float) -> int:
    """Gauss-Legendre node count that resolves the fastest phase ``t * max|Omega|``."""
    if not np.any(u0.coeffs):
        return 32
    *_, omega, _ = _triples(u0)
    phase = abs(t) * float(np.max(np.abs(omega)))
    return 32 + int(math.ceil(0.6 * phase))


def third_picard_iterate(u0: SpectralField, t: float, method: str = "exact", K: int | None = 32, channels=CHANNELS) -> SpectralField:
    r"""Cubic Picard correction :math:`\int_0^t e^{i(t-s)L}\mathcal N(e^{isL}u_0)\,ds`.

    ``method="exact"`` sums closed-form kernels over mode triples;
    ``method="quadrature"`` applies ``K``-node Gauss-Legendre in ``s``
    (``K=None`` picks the count from :func:`quadrature_nodes`).  ``channels``
    restricts the nonlinearity to a subset of its four terms.
    """
    N3 = 3 * u0.bandlimit
    if method == "exact":
        out = np.zeros(2 * N3 + 1, dtype=np.complex128)
        if not np.any(u0.coeffs):
            return SpectralField(out)
        a, b, c, n, omega, amp = _triples(u0)
        kern = picard_kernel(omega, t)
        weight = sum(_channel_weight(ch, a, b, c) for ch in channels)
        np.add.at(out, n + N3, weight * amp * kern)
        phase = np.exp(1j * dispersion(np.arange(-N3, N3 + 1)).astype(float) * t)
        return SpectralField(out * phase)
    if method == "quadrature":
        if K is None:
            K = quadrature_nodes(u0, t)
        if K < 4:
            raise ValueError("quadrature needs at least 4 nodes")
        x, w = np.polynomial.legendre.leggauss(K)
        s_nodes = 0.5 * t * (x + 1)
        w = 0.5 * t * w
        acc = SpectralField.zeros(N3)
        for s, ws in zip(s_nodes, w):
            term = nonlinearity(propagate(u0, s), channels)
            acc = acc + ws * propagate(term, t - s)
        return acc
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# ill-posedness construction
# --------------------------------------------------------------------------


def omega_star(m: int) -> int:
    """Resonance frequency of the dominant triple; always ``-2m``."""
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    n, n1, n2 = m, -m, -m + 1
    P = dispersion
    value = P(n - n1 + n2) - P(n) + P(n1) - P(n2)
    if value != -2 * m:
        raise ArithmeticError(f"Omega* = {value} != {-2 * m} at m = {m}")
    return value


def illposed_initial_data(m: int, s: float) -> SpectralField:
    """``m^-s (e^{-imx} + e^{-i(m-1)x} + e^{i(m+1)x})``."""
    m = int(m)
    amp = float(m) ** (-s)
    return SpectralField.from_modes({-m: amp, -(m - 1): amp, m + 1: amp})


def closed_form_peak(m: int, s: float, t: float) -> complex:
    """Hand-derived leading term ``(t / m^{3s}) * i(13m + 7)/4`` at mode ``m``."""
    return t / float(m) ** (3 * s) * 1j * (13 * m + 7) / 4


@dataclass
class PicardReport:
    m: int
    s: float
    t: float
    peak_mode: int
    peak_abs: float
    closed_form_abs: float
    rel_dev: float
    scaled_peak: float
    cubic_abs: float
    full_abs: float
    dominant_mode: int
    data_norm: float
    fitted_slope: float | None = None
    sweep: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def illposedness_experiment(m: int, s: float, t_factor: float = 0.1, method: str = "exact") -> PicardReport:
    """Third iterate at mode ``m`` for the three-mode data of size ``m^-s``.

    ``peak_abs`` uses the three derivative channels (the cubic channel is
    reported separately as ``cubic_abs``); ``full_abs`` includes all four.
    """
    m = int(m)
    if m < 4:
        raise ValueError("m must be >= 4")
    if not 0 < t_factor <= 0.2:
        raise ValueError("t_factor must lie in (0, 0.2] so that |t Omega*| stays small")
    t = t_factor / m
    u0 = illposed_initial_data(m, s)
    deriv = third_picard_iterate(u0, t, method, channels=DERIVATIVE_CHANNELS)
    cubic = third_picard_iterate(u0, t, method, channels=("cubic",))
    full = deriv + cubic
    peak = abs(deriv[m])
    closed = abs(closed_form_peak(m, s, t))
    return PicardReport(
        m=m,
        s=s,
        t=t,
        peak_mode=m,
        peak_abs=peak,
        closed_form_abs=closed,
        rel_dev=abs(peak - closed) / closed,
        scaled_peak=float(m) ** s * peak,
        cubic_abs=abs(cubic[m]),
        full_abs=abs(full[m]),
        dominant_mode=int(full.modes[np.argmax(np.abs(full.coeffs))]),
        data_norm=sobolev_norm(u0, s),
    )


def illposedness_sweep(ms, s: float, t_factor: float = 0.1) -> PicardReport:
    """Run the experiment over ``ms``; fit the log-log slope of ``m^s |u3(m)|``."""
    reports = [illposedness_experiment(m, s, t_factor) for m in ms]
    x = np.log([r.m for r in reports])
    y = np.log([r.scaled_peak for r in reports])
    slope = float(np.polyfit(x, y, 1)[0]) if len(reports) > 1 else None
    last = reports[-1]
    last.fitted_slope = slope
    last.sweep = [
        {"m": r.m, "peak_abs": r.peak_abs, "scaled_peak": r.scaled_peak, "rel_dev": r.rel_dev}
        for r in reports
    ]
    return last


# --------------------------------------------------------------------------
# energy functional and the v_n family
# --------------------------------------------------------------------------

# Our pairing is <g, h> = sum g(k) conj(h(k)).  The exact expansion of I(v_n)
# (see I_vn_closed_form) has leading term 4f, the same as reference_I_polynomial,
# so no rescaling is applied.
I_NORMALIZATION = 1.0


@dataclass(frozen=True)
class CounterexampleField:
    n: int
    f: int

    def __post_init__(self):
        n, f = int(self.n), int(self.f)
        if n < 1 or f <= n:
            raise ValueError("need f > n >= 1")
        if len({0, n, f, n - f}) != 4:
            raise ValueError(f"modes collide for (n, f) = ({n}, {f})")

    @property
    def field(self) -> SpectralField:
        n, f = int(self.n), int(self.f)
        return SpectralField.from_modes({0: -1j, n: 1.0, f: f**-2, n - f: f**-2})


def vn_family(n: int, f: int) -> CounterexampleField:
    return CounterexampleField(n, f)


def energy_functional_I(u: SpectralField) -> float:
    r"""``Re < i u * d_x^2 |d_x| |u|^2 , d_x^2 u >`` with the orthonormal pairing."""
    mod2 = multiply(u, conjugate(u))
    inner = apply_multiplier(apply_multiplier(mod2, "abs_dx"), lambda n: -(n.astype(float) ** 2))
    g = 1j * multiply(u, inner)
    h = apply_multiplier(u, lambda n: -(n.astype(float) ** 2))
    N = max(g.bandlimit, h.bandlimit)
    value = np.vdot(h.with_bandlimit(N).coeffs, g.with_bandlimit(N).coeffs)
    return float(value.real) * I_NORMALIZATION


def reference_I_polynomial(n: int, f: int) -> float:
    """``4f - 7n + 10n^2/f - 10n^3/f^2 + 5n^4/f^3 - n^5/f^4``."""
    n, f = float(n), float(f)
    return 4 * f - 7 * n + 10 * n**2 / f - 10 * n**3 / f**2 + 5 * n**4 / f**3 - n**5 / f**4


def I_vn_closed_form(n: int, f: int) -> float:
    """Exact ``I(v_n)`` for ``f > 2n`` from a symbolic expansion of the four-mode field."""
    n, f = float(n), float(f)
    return 4 * f - 10 * n + 12 * n**2 / f - 8 * n**3 / f**2 + 2 * n**4 / f**3


# --------------------------------------------------------------------------
# viscous equation
# --------------------------------------------------------------------------


class BlowUpError(RuntimeError):
    def __init__(self, step: int, time: float, norm: float, trajectory: list):
        super().__init__(f"H^2 norm {norm:.3e} exceeded the blow-up threshold at step {step} (t = {time:.6g})")
        self.step = step
        self.time = time
        self.norm = norm
        self.trajectory = trajectory


@dataclass(frozen=True)
class ViscousParams:
    mu: float
    dt: float
    steps: int
    bandlimit: int | None = None
    nonlinear: bool = True
    blowup: float = 1e12

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("viscosity mu must be positive")
        if self.dt <= 0 or self.steps < 0:
            raise ValueError("need dt > 0 and steps >= 0")

    @property
    def total_time(self) -> float:
        return self.dt * self.steps


def _linear_symbol(modes: np.ndarray, mu: float) -> np.ndarray:
    n = modes.astype(float)
    return -mu * n * n + 1j * dispersion(modes).astype(float)


def viscous_step(u: SpectralField, p: ViscousParams) -> SpectralField:
    """One integrating-factor RK4 step (Lawson) at fixed bandlimit."""
    K = u.bandlimit if p.bandlimit is None else p.bandlimit
    u = u.with_bandlimit(K)
    L = _linear_symbol(u.modes, p.mu)
    E = np.exp(L * p.dt)
    E2 = np.exp(L * p.dt / 2)
    if not p.nonlinear:
        return SpectralField(E * u.coeffs)
    dt = p.dt

    def rhs(c):
        return nonlinearity(SpectralField(c)).with_bandlimit(K).coeffs

    c = u.coeffs
    k1 = rhs(c)
    k2 = rhs(E2 * (c + 0.5 * dt * k1))
    k3 = rhs(E2 * c + 0.5 * dt * k2)
    k4 = rhs(E * c + dt * E2 * k3)
    return SpectralField(E * c + dt / 6 * (E * k1 + 2 * E2 * (k2 + k3) + k4))


def viscous_solve(u0: SpectralField, p: ViscousParams, record_energy: bool = False):
    """Integrate ``steps`` steps; returns ``(u_final, trajectory)``.

    Each trajectory row is ``{"step", "time", "h2_norm", "I_value"}``
    (``I_value`` is ``None`` unless ``record_energy``).
    """
    K = u0.bandlimit if p.bandlimit is None else p.bandlimit
    u = u0.with_bandlimit(K)
    traj = []

    def record(step, u):
        h2 = sobolev_norm(u, 2)
        traj.append({
            "step": step,
            "time": step * p.dt,
            "h2_norm": h2,
            "I_value": energy_functional_I(u) if record_energy else None,
        })
        if not math.isfinite(h2) or h2 > p.blowup:
            raise BlowUpError(step, step * p.dt, h2, traj)

    record(0, u)
    for step in range(1, p.steps + 1):
        u = viscous_step(u, p)
        record(step, u)
    return u, traj
