"""Quadratic differentials on a collar: Fourier slices and ``dz^2`` norms.

On the collar ``z = s + i theta`` and a holomorphic quadratic differential
expands as ``sum_n b_n e^{n z} dz^2``.  The pointwise norm of ``dz^2`` with
respect to the hyperbolic metric is ``|dz^2|_g = 2 rho^{-2}`` (the factor 2
is the usual convention for quadratic differentials), so its collar norms
have closed forms built from ``X(ell)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import collar as _collar
from .errors import DomainError


def _check_short(ell):
    if not 0 < ell < _collar.SELF_DUAL_LENGTH:
        raise DomainError(f"ell must lie in (0, 2 arsinh 1), got {ell!r}")


@dataclass(frozen=True)
class CollarNorms:
    L1: float
    L2_squared: float
    Linf: float
    area: float

    def cauchy_schwarz_gap(self):
        """``sqrt(L2^2 * area) - L1``, nonnegative."""
        return np.sqrt(self.L2_squared * self.area) - self.L1


def _l2_closed(ell):
    t = 0.5 * np.pi - np.arctan(np.sinh(0.5 * ell))
    return 8.0 * np.pi * (2.0 * np.pi / ell) ** 3 * (t + np.sin(t) * np.cos(t))


def l2_squared_quadrature(ell):
    """``int int 4 rho^{-2} ds dtheta`` over the collar by adaptive quadrature."""
    _check_short(ell)
    k = ell / (2.0 * np.pi)
    x = _collar.half_length(ell)
    # 4 rho^-2 = 4 cos^2(k s) / k^2, even in s
    val, _ = integrate.quad(lambda s: np.cos(k * s) ** 2, 0.0, x, epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * np.pi * 2.0 * 4.0 * val / k**2


def dz2_norms(ell, check=True):
    """``L1 = 8 pi X``, ``Linf = 8 pi^2 / ell^2`` and the exact ``L2^2``.

    With ``check`` the closed-form ``L2^2`` is compared to a quadrature of
    ``4 rho^{-2}`` and a mismatch beyond ``1e-10`` raises ``ArithmeticError``.
    """
    _check_short(ell)
    l2 = _l2_closed(ell)
    if check:
        q = l2_squared_quadrature(ell)
        if abs(q - l2) > 1e-10 * l2:
            raise ArithmeticError(f"closed form {l2} disagrees with quadrature {q}")
    return CollarNorms(
        L1=8.0 * np.pi * _collar.half_length(ell),
        L2_squared=float(l2),
        Linf=8.0 * np.pi**2 / ell**2,
        area=_collar.full_area(ell),
    )


def l2_expansion(ell):
    """Two-term small-``ell`` expansion ``32 pi^5 / ell^3 - 16 pi^4 / 3``."""
    return 32.0 * np.pi**5 / ell**3 - 16.0 * np.pi**4 / 3.0


def principal_theta_norm_sq(ell, b0=None):
    """Collar norm of the principal part ``b0 dz^2`` with ``b0 = -ell / pi^2`` by default."""
    _check_short(ell)
    if b0 is None:
        b0 = -ell / np.pi**2
    return abs(b0) ** 2 * _l2_closed(ell)


@dataclass(frozen=True)
class FourierSlice:
    """Coefficients ``b_n`` on the circle ``{s}``: samples equal ``sum b_n e^{n(s + i theta)}``."""

    s: float
    coefficients: dict

    def evaluate(self, theta):
        theta = np.asarray(theta, dtype=float)
        z = self.s + 1j * theta
        out = np.zeros(theta.shape, dtype=complex)
        for n, b in self.coefficients.items():
            out += b * np.exp(n * z)
        return out

    def amplitude(self, n):
        """``|b_n e^{n s}|``, the size of mode ``n`` on this circle."""
        return abs(self.coefficients.get(n, 0.0)) * np.exp(n * self.s)


def fourier_slice(samples, s, max_n):
    """Decompose samples on a uniform ``theta`` grid ``2 pi k / N``, ``k < N``.

    Returns ``b_n = (1/2pi) int f e^{-i n theta} dtheta * e^{-n s}`` for
    ``|n| <= max_n``.
    """
    f = np.asarray(samples, dtype=complex)
    n_grid = f.shape[0]
    if f.ndim != 1 or n_grid < 2 * max_n + 2:
        raise DomainError(f"need a 1-D grid of at least {2 * max_n + 2} samples, got {f.shape}")
    c = np.fft.fft(f) / n_grid
    coeffs = {n: complex(c[n % n_grid] * np.exp(-n * s)) for n in range(-max_n, max_n + 1)}
    return FourierSlice(float(s), coeffs)


def collar_decay_profile(slices):
    """Per-mode amplitude curves ``n -> (s, |b_n e^{ns}|)`` for ``n != 0``, plus ``b0`` under key 0."""
    slices = sorted(slices, key=lambda sl: sl.s)
    s = np.array([sl.s for sl in slices])
    modes = sorted({n for sl in slices for n in sl.coefficients})
    out = {}
    for n in modes:
        if n == 0:
            out[0] = (s, np.array([sl.coefficients.get(0, 0.0) for sl in slices]))
        else:
            out[n] = (s, np.array([sl.amplitude(n) for sl in slices]))
    return out


def decay_rates(profile, floor=1e-300):
    """Least-squares slope of ``log |b_n e^{ns}|`` against ``s`` for each ``n != 0``."""
    rates = {}
    for n, (s, amp) in profile.items():
        if n == 0:
            continue
        keep = amp > floor
        if np.count_nonzero(keep) >= 2:
            rates[n] = float(np.polyfit(s[keep], np.log(amp[keep]), 1)[0])
    return rates
