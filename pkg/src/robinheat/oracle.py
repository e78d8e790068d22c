"""Exact Robin spectra and heat kernels on an interval, tensor spectra on rectangles.

Eigenvalues on [0, L] with the boundary condition phi'(0) = alpha*phi(0),
phi'(L) = -alpha*phi(L) come in three families:

  positive lam = mu^2:   (alpha^2 - mu^2) sin(mu L) + 2 alpha mu cos(mu L) = 0
  zero     lam = 0:      only for alpha = 0 (constant) or alpha = -2/L (linear)
  negative lam = -kap^2: (kap^2 + alpha^2) sinh(kap L) + 2 alpha kap cosh(kap L) = 0,
                         nonempty only for alpha < 0

Roots are bracketed on sign-change grids and polished by bisection; the
polynomial form of the characteristic functions avoids the tan singularity
near mu = |alpha|. These spectra are the ground truth the finite-element
solver is tested against.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

# bracket grids: 64 samples per pi/L period for the trigonometric family,
# 1024 samples over (0, kap_max] for the hyperbolic one
POS_SAMPLES_PER_PERIOD = 64
NEG_SAMPLES = 1024
BISECT_RTOL = 1e-13
SIMPSON_POINTS = 40961
ZERO_MODE_ATOL = 1e-12


@dataclass(frozen=True)
class ExactMode:
    """One normalized eigenfunction of the interval problem.

    The raw profile is cos/cosh/linear depending on `kind`; `param` is mu
    for positive modes, kappa for negative ones, 0 for the zero mode; `norm`
    scales the raw profile to unit L2 norm on [0, L].
    """

    value: float
    kind: str  # "negative" | "zero" | "positive"
    param: float
    alpha: float
    length: float
    norm: float

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "positive":
            mu = self.param
            return np.cos(mu * x) + (self.alpha / mu) * np.sin(mu * x)
        if self.kind == "negative":
            kap = self.param
            return np.cosh(kap * x) + (self.alpha / kap) * np.sinh(kap * x)
        return 1.0 + self.alpha * x

    def raw_derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "positive":
            mu = self.param
            return -mu * np.sin(mu * x) + self.alpha * np.cos(mu * x)
        if self.kind == "negative":
            kap = self.param
            return kap * np.sinh(kap * x) + self.alpha * np.cosh(kap * x)
        return self.alpha * np.ones_like(x)

    def __call__(self, x):
        return self.norm * self.raw(x)

    def derivative(self, x):
        return self.norm * self.raw_derivative(x)


def _char_pos(mu, alpha, length):
    return (alpha * alpha - mu * mu) * np.sin(mu * length) \
        + 2.0 * alpha * mu * np.cos(mu * length)


def _char_neg(kap, alpha, length):
    return (kap * kap + alpha * alpha) * np.sinh(kap * length) \
        + 2.0 * alpha * kap * np.cosh(kap * length)


def _bisect(func, lo, hi):
    flo = func(lo)
    if flo == 0.0:
        return lo
    while hi - lo > BISECT_RTOL * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        fmid = func(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _scan_roots(func, grid):
    vals = func(grid)
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(_bisect(func, grid[i], grid[i + 1]))
    if len(vals) and vals[-1] == 0.0:
        roots.append(grid[-1])
    return roots


def _positive_roots(length, alpha, count):
    f = lambda mu: _char_pos(mu, alpha, length)
    step = (math.pi / length) / POS_SAMPLES_PER_PERIOD
    # start just above 0: a root can sit below the first grid point when
    # alpha is close to -2/L, and mu = 0 itself is never a positive root
    lo = 1e-9 * step
    hi = (count + 3) * math.pi / length
    for _ in range(4):
        n = int(round((hi - lo) / step)) + 1
        grid = np.concatenate([[lo], np.linspace(step, hi, n)])
        roots = _scan_roots(f, grid)
        if len(roots) >= count:
            return roots[:count]
        hi *= 2.0
    raise RuntimeError(
        f"bracketing failure: found {len(roots)} positive roots of the "
        f"characteristic function for L={length}, alpha={alpha}, wanted {count}")


def _negative_roots(length, alpha):
    if alpha >= 0:
        return []
    g = lambda kap: _char_neg(kap, alpha, length)
    kap_max = 2.0 * abs(alpha) + 2.0 / length
    grid = np.concatenate([[1e-9 * kap_max / NEG_SAMPLES],
                           np.linspace(kap_max / NEG_SAMPLES, kap_max, NEG_SAMPLES)])
    return _scan_roots(g, grid)


def _normalize(mode_kind, param, alpha, length):
    xs = np.linspace(0.0, length, SIMPSON_POINTS)
    probe = ExactMode(0.0, mode_kind, param, alpha, length, 1.0)
    val = simpson(probe.raw(xs) ** 2, x=xs)
    return 1.0 / math.sqrt(val)


def interval_spectrum(length: float, alpha: float, k: int) -> list[ExactMode]:
    """The k lowest normalized eigenmodes on [0, length] for Robin parameter alpha."""
    if not length > 0:
        raise ValueError(f"length must be positive, got {length}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return list(_spectrum_cached(float(length), float(alpha), int(k)))


@functools.lru_cache(maxsize=128)
def _spectrum_cached(length: float, alpha: float, k: int) -> tuple[ExactMode, ...]:
    modes = []
    for kap in _negative_roots(length, alpha):
        modes.append(ExactMode(-kap * kap, "negative", kap, alpha, length,
                               _normalize("negative", kap, alpha, length)))
    if abs(alpha) <= ZERO_MODE_ATOL or abs(alpha + 2.0 / length) <= ZERO_MODE_ATOL:
        modes.append(ExactMode(0.0, "zero", 0.0, alpha, length,
                               _normalize("zero", 0.0, alpha, length)))
    for mu in _positive_roots(length, alpha, k):
        modes.append(ExactMode(mu * mu, "positive", mu, alpha, length,
                               _normalize("positive", mu, alpha, length)))
    modes.sort(key=lambda m: m.value)
    return tuple(modes[:k])


def rectangle_spectrum(lx: float, ly: float, alpha: float, k: int
                       ) -> list[tuple[float, tuple[int, int]]]:
    """The k lowest eigenvalues of the rectangle as sums of interval eigenvalues.

    Returns (lambda, (i, j)) pairs where i, j are 0-based indices into
    interval_spectrum(lx, ...) and interval_spectrum(ly, ...); the separable
    eigenfunction is the product of the two interval modes.
    """
    if not (lx > 0 and ly > 0):
        raise ValueError(f"side lengths must be positive, got {lx}, {ly}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    mx = interval_spectrum(lx, alpha, k)
    my = interval_spectrum(ly, alpha, k)
    sums = [(mx[i].value + my[j].value, (i, j))
            for i in range(len(mx)) for j in range(len(my))]
    sums.sort(key=lambda p: (p[0], p[1]))
    return sums[:k]


def interval_kernel(length: float, alpha: float, x: float, y: float, t: float,
                    n_modes: int) -> float:
    """Heat kernel value on the interval from the n_modes lowest exact modes."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    for point in (x, y):
        if not 0.0 <= point <= length:
            raise ValueError(f"point {point} outside [0, {length}]")
    modes = interval_spectrum(length, alpha, n_modes)
    total = 0.0
    for mode in modes:
        total += math.exp(-mode.value * t) * float(mode(x)) * float(mode(y))
    return total


def interval_kernel_tail(length: float, alpha: float, t: float, n_modes: int) -> float:
    """Upper estimate for the modes dropped by interval_kernel.

    Uses the asymptotic spacing lam_i ~ ((i-1) pi / L)^2 for i > n_modes and
    the empirical sup-norm factor of the computed modes, with each term
    damped at half rate so the estimate stays monotone in t.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    modes = interval_spectrum(length, alpha, n_modes)
    xs = np.linspace(0.0, length, 513)
    sup2 = max(float(np.max(np.abs(m(xs)))) ** 2 for m in modes)
    c_hat = max(sup2 * math.exp(-m.value * t / 2.0) for m in modes)
    total = 0.0
    i = n_modes + 1
    while i < n_modes + 200000:
        lam = ((i - 1) * math.pi / length) ** 2
        term = c_hat * math.exp(-lam * t / 2.0)
        total += term
        if term < 1e-300 or term < 1e-18 * total:
            break
        i += 1
    return total
