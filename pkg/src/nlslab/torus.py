"""Frequency lattice, spectral projections, norms, and the free Schrodinger
group on rectangular tori.

A rectangular torus is the product of d circles with circumferences
2*pi/theta_j.  Fourier modes live on the stretched lattice xi = theta * n with
integer n_j in [-M_j/2, M_j/2); the Laplacian eigenvalue of a mode is
lambda = |xi|^2.  Everything downstream (projections, Sobolev/Besov norms,
free evolution, dealiased products) is a pure function of a SpectralField.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TorusGeometry",
    "SpectralField",
    "GeometryMismatchError",
    "is_dyadic",
    "field_from_samples",
    "field_samples",
    "zero_field",
    "mode_field",
    "unit_constant_field",
    "l2_norm",
    "inner_product",
    "lp_norm",
    "shell_indices",
    "max_shell",
    "dyadic_blocks",
    "shell_project",
    "dyadic_project",
    "smooth_dyadic_project",
    "mollifier_ramp",
    "dyadic_bump",
    "zero_block_bump",
    "sobolev_norm",
    "sobolev_block_norm",
    "besov_norm",
    "block_l2_profile",
    "besov_sandwich_constant",
    "free_evolve",
    "conjugate",
    "product_field",
    "truncate_field",
    "pointwise_product",
    "cubic_field",
    "random_shell_field",
    "shell_extremizer_field",
]


class GeometryMismatchError(ValueError):
    """Raised when fields on different geometries are combined."""


@dataclass(frozen=True)
class TorusGeometry:
    """Dimension, side parameters theta_j, and per-axis mode counts."""

    d: int
    thetas: tuple
    grid: tuple

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if len(self.thetas) != self.d or len(self.grid) != self.d:
            raise ValueError("thetas and grid must have length d")
        if any(t <= 0 for t in self.thetas):
            raise ValueError("all thetas must be positive")
        if any(m < 4 or m % 2 != 0 for m in self.grid):
            raise ValueError("grid sizes must be even integers >= 4")
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "grid", tuple(int(m) for m in self.grid))

    @property
    def volume(self):
        """Volume of the torus, prod_j 2*pi/theta_j."""
        return math.prod(2.0 * math.pi / t for t in self.thetas)

    @property
    def npoints(self):
        return math.prod(self.grid)

    def padded(self, factor):
        return TorusGeometry(self.d, self.thetas, tuple(factor * m for m in self.grid))


@dataclass
class SpectralField:
    """Truncated Fourier coefficients of a function on the torus.

    coeffs is complex, in numpy FFT ordering per axis, and represents
    f(x) = sum_n coeffs[n] * exp(i xi(n) . x).  Treated as immutable.
    """

    geometry: TorusGeometry
    coeffs: np.ndarray

    def __post_init__(self):
        if tuple(self.coeffs.shape) != self.geometry.grid:
            raise GeometryMismatchError("coefficient shape does not match grid")
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=np.complex128)

    def copy(self):
        return SpectralField(self.geometry, self.coeffs.copy())

    def _check(self, other):
        if self.geometry != other.geometry:
            raise GeometryMismatchError("fields live on different geometries")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.geometry, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.geometry, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.geometry, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.geometry, -self.coeffs)


def is_dyadic(N):
    """True if N is 0 or a power of two (a valid dyadic block index)."""
    return N == 0 or (N >= 1 and N == 2 ** int(round(math.log2(N))))


def _require_dyadic(N):
    if not is_dyadic(N):
        raise ValueError("block index must be 0 or a power of two, got %r" % (N,))


# ---------------------------------------------------------------------------
# cached per-geometry lattice arrays

@functools.lru_cache(maxsize=256)
def _freq_sq(geom):
    """|xi|^2 on the lattice, shape = grid."""
    axes = []
    for t, m in zip(geom.thetas, geom.grid):
        n = np.fft.fftfreq(m, d=1.0 / m)
        axes.append((t * n) ** 2)
    out = np.zeros(geom.grid)
    for ax, a in enumerate(axes):
        shape = [1] * geom.d
        shape[ax] = geom.grid[ax]
        out = out + a.reshape(shape)
    return out


@functools.lru_cache(maxsize=256)
def _freq_abs(geom):
    return np.sqrt(_freq_sq(geom))


@functools.lru_cache(maxsize=256)
def shell_indices(geom):
    """Integer shell index per mode: 0 at xi = 0, else floor(|xi|) + 1.

    Shells are half-open: shell k >= 1 holds |xi| in [k-1, k) excluding the
    origin, which keeps the projectors orthogonal and the partition exact.
    """
    absxi = _freq_abs(geom)
    idx = np.floor(absxi).astype(np.int64) + 1
    idx[absxi == 0.0] = 0
    return idx


def max_shell(geom):
    return int(shell_indices(geom).max())


@functools.lru_cache(maxsize=256)
def _block_exponents(geom):
    """Per-mode dyadic block label: -1 for the zero mode, else j with
    shell index in [2^j, 2^{j+1})."""
    sh = shell_indices(geom)
    lab = np.full(geom.grid, -1, dtype=np.int64)
    pos = sh > 0
    lab[pos] = np.floor(np.log2(sh[pos])).astype(np.int64)
    return lab


def dyadic_blocks(geom):
    """All dyadic indices N (0, 1, 2, 4, ...) with modes on the grid."""
    lab = _block_exponents(geom)
    out = []
    if (lab == -1).any():
        out.append(0)
    for j in range(int(lab.max()) + 1):
        if (lab == j).any():
            out.append(2 ** j)
    return out


def _block_mask(geom, N):
    lab = _block_exponents(geom)
    if N == 0:
        return lab == -1
    return lab == int(round(math.log2(N)))


# ---------------------------------------------------------------------------
# transforms and basic constructors

def field_from_samples(geom, samples):
    samples = np.asarray(samples)
    if tuple(samples.shape) != geom.grid:
        raise GeometryMismatchError("sample shape does not match grid")
    return SpectralField(geom, np.fft.fftn(samples) / geom.npoints)


def field_samples(f):
    """Physical samples on the uniform grid x_j = (index/M_j) * 2*pi/theta_j."""
    return np.fft.ifftn(f.coeffs) * f.geometry.npoints


def zero_field(geom):
    return SpectralField(geom, np.zeros(geom.grid, dtype=np.complex128))

def mode_field(geom, n, amplitude=1.0):
    """Single exponential amplitude * exp(i xi(n) . x)."""
    c = np.zeros(geom.grid, dtype=np.complex128)
    idx = tuple(int(ni) % mi for ni, mi in zip(n, geom.grid))
    c[idx] = amplitude
    return SpectralField(geom, c)


def unit_constant_field(geom):
    """The constant field with unit L^2 norm."""
    return mode_field(geom, (0,) * geom.d, 1.0 / math.sqrt(geom.volume))


# ---------------------------------------------------------------------------
# norms

def l2_norm(f):
    return math.sqrt(f.geometry.volume) * float(np.linalg.norm(f.coeffs))


def inner_product(f, g):
    """L^2 inner product, antilinear in the first slot."""
    f._check(g)
    return f.geometry.volume * complex(np.vdot(f.coeffs, g.coeffs))


def lp_norm(f, p, pad=1):
    """Uniform-grid quadrature of the L^p norm (max of |samples| for p=inf).

    pad > 1 evaluates on a refined grid; for p = inf this is still a lower
    bound of the true sup, which is adequate for exponent fits.
    """
    if p != np.inf and p < 1:
        raise ValueError("p must be >= 1")
    g = truncate_field(f, f.geometry.padded(pad)) if pad > 1 else f
    s = np.abs(field_samples(g))
    if p == np.inf:
        return float(s.max())
    w = g.geometry.volume / g.geometry.npoints
    return float((np.sum(s ** p) * w) ** (1.0 / p))


def sobolev_norm(f, s):
    """H^s norm with the literal per-eigenvalue weight <lambda>^s,
    <x> = sqrt(1 + x^2), lambda = |xi|^2."""
    lam = _freq_sq(f.geometry)
    w = (1.0 + lam ** 2) ** (s / 2.0)
    return math.sqrt(f.geometry.volume * float(np.sum(w * np.abs(f.coeffs) ** 2)))


def block_l2_profile(f):
    """L^2 norm of P_N f for each block N on the grid, as (N_array, norms)."""
    lab = _block_exponents(f.geometry)
    power = np.abs(f.coeffs) ** 2 * f.geometry.volume
    nexp = int(lab.max()) + 1
    sums = np.zeros(nexp + 1)
    flat_lab = lab.ravel() + 1  # zero mode -> bin 0
    np.add.at(sums, flat_lab, power.ravel())
    Ns = np.array([0] + [2 ** j for j in range(nexp)], dtype=np.int64)
    return Ns, np.sqrt(sums)


def _bracket(x):
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def sobolev_block_norm(f, s):
    """Dyadic block form (sum_N <N>^{2s} ||P_N f||^2)^{1/2}."""
    Ns, norms = block_l2_profile(f)
    return float(np.sqrt(np.sum(_bracket(Ns) ** (2.0 * s) * norms ** 2)))


def besov_norm(f, s):
    """B^s_{2,1} norm: sum_N <N>^s ||P_N f||_{L^2}."""
    Ns, norms = block_l2_profile(f)
    return float(np.sum(_bracket(Ns) ** s * norms))


def besov_sandwich_constant(geom, delta):
    """C_delta = (sum_N <N>^{-2 delta})^{1/2} over the blocks of the grid."""
    Ns = np.array(dyadic_blocks(geom), dtype=float)
    return float(np.sqrt(np.sum(_bracket(Ns) ** (-2.0 * delta))))


# ---------------------------------------------------------------------------
# projections

def shell_project(f, k):
    if k < 0:
        raise ValueError("shell index must be >= 0")
    mask = shell_indices(f.geometry) == k
    return SpectralField(f.geometry, np.where(mask, f.coeffs, 0.0))


def dyadic_project(f, N):
    _require_dyadic(N)
    mask = _block_mask(f.geometry, N)
    return SpectralField(f.geometry, np.where(mask, f.coeffs, 0.0))


def mollifier_ramp(x):
    """Smooth ramp r with r = 0 for x <= 0, r = 1 for x >= 1, built from the
    standard mollifier b(x) = exp(-1/x)."""
    x = np.asarray(x, dtype=float)
    def b(y):
        out = np.zeros_like(y)
        pos = y > 0
        out[pos] = np.exp(-1.0 / y[pos])
        return out
    num = b(x)
    den = num + b(1.0 - x)
    with np.errstate(invalid="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    r[x >= 1.0] = 1.0
    r[x <= 0.0] = 0.0
    return r


def dyadic_bump(u):
    """Radial bump equal to 1 on [1, 2], supported in [1/2, 4]."""
    u = np.asarray(u, dtype=float)
    return mollifier_ramp((u - 0.5) / 0.5) * mollifier_ramp((4.0 - u) / 2.0)


def zero_block_bump(u):
    """Bump equal to 1 on [0, 1], supported in [0, 2], for the N = 0 block."""
    return mollifier_ramp(2.0 - np.asarray(u, dtype=float))


def smooth_dyadic_project(f, N):
    """Smoothed dyadic projector: the bump is applied per shell index k as
    bump(k/N), so it is identically 1 on the shells k in [N, 2N) that make up
    the block and the identity P~_N P_N = P_N holds exactly."""
    _require_dyadic(N)
    sh = shell_indices(f.geometry).astype(float)
    if N == 0:
        mult = zero_block_bump(sh)
    else:
        mult = dyadic_bump(sh / float(N))
    return SpectralField(f.geometry, f.coeffs * mult)


# ---------------------------------------------------------------------------
# evolution, conjugation, products

def free_evolve(f, t):
    """exp(i t Laplacian): multiplies mode xi by exp(-i t |xi|^2)."""
    phase = np.exp(-1j * t * _freq_sq(f.geometry))
    return SpectralField(f.geometry, f.coeffs * phase)


def conjugate(f):
    """Complex conjugate of the physical field: c'[n] = conj(c[-n])."""
    c = f.coeffs
    for ax in range(f.geometry.d):
        c = np.roll(np.flip(c, axis=ax), 1, axis=ax)
    return SpectralField(f.geometry, np.conj(c))


def _embed(f, target):
    """Zero-embed coefficients into a finer grid (same thetas)."""
    src = np.fft.fftshift(f.coeffs)
    out = np.zeros(target.grid, dtype=np.complex128)
    slices = tuple(
        slice((P - M) // 2, (P - M) // 2 + M)
        for M, P in zip(f.geometry.grid, target.grid)
    )
    out[slices] = src
    return SpectralField(target, np.fft.ifftshift(out))


def _extract(f, target):
    """Restrict coefficients to a coarser grid (same thetas)."""
    src = np.fft.fftshift(f.coeffs)
    slices = tuple(
        slice((P - M) // 2, (P - M) // 2 + M)
        for M, P in zip(target.grid, f.geometry.grid)
    )
    return SpectralField(target, np.fft.ifftshift(src[slices]))


def truncate_field(f, target):
    """Re-express f on another grid with the same thetas (pad or truncate)."""
    if target.thetas != f.geometry.thetas or target.d != f.geometry.d:
        raise GeometryMismatchError("target geometry has different sides")
    if target.grid == f.geometry.grid:
        return f.copy()
    if all(p >= m for p, m in zip(target.grid, f.geometry.grid)):
        return _embed(f, target)
    if all(p <= m for p, m in zip(target.grid, f.geometry.grid)):
        return _extract(f, target)
    raise GeometryMismatchError("mixed pad/truncate not supported")


def product_field(*factors, conj=None, pad=2):
    """Pointwise product of fields, computed alias-free on a padded grid.

    conj is an optional tuple of booleans marking factors to conjugate.
    The result lives on the padded geometry; pad = 2 is exact on the base
    band for up to three factors, pad = 4 is exact on the whole padded band.
    """
    if not factors:
        raise ValueError("need at least one factor")
    geom = factors[0].geometry
    for f in factors[1:]:
        if f.geometry != geom:
            raise GeometryMismatchError("product factors on different geometries")
    if conj is None:
        conj = (False,) * len(factors)
    big = geom.padded(pad)
    prod = None
    for f, cj in zip(factors, conj):
        s = field_samples(_embed(f, big))
        if cj:
            s = np.conj(s)
        prod = s if prod is None else prod * s
    return field_from_samples(big, prod)


def pointwise_product(f, g):
    """f * g truncated back to the common base grid (exact convolution there)."""
    return _extract(product_field(f, g, pad=2), f.geometry)


def cubic_field(phi, conj_middle=True):
    """|phi|^2 phi on the base grid, dealiased via a 2x padded product."""
    full = product_field(phi, phi, phi, conj=(False, conj_middle, False), pad=2)
    return _extract(full, phi.geometry)


# ---------------------------------------------------------------------------
# data generators

def random_shell_field(geom, N, seed):
    """Standard complex Gaussian coefficients on block N, L^2-normalized.

    Accepts a seed or an existing numpy Generator; deterministic per seed.
    """
    _require_dyadic(N)
    mask = _block_mask(geom, N)
    if not mask.any():
        raise ValueError("block N=%r has no modes on this grid" % (N,))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    c = rng.standard_normal(geom.grid) + 1j * rng.standard_normal(geom.grid)
    c = np.where(mask, c, 0.0)
    f = SpectralField(geom, c)
    return f * (1.0 / l2_norm(f))


def shell_extremizer_field(geom, N, kind="ones"):
    """Structured data on block N: 'ones' (all-ones coefficients), 'single'
    (one mode near the middle of the block), or 'bell' (Gaussian profile in
    |xi| across the block).  L^2-normalized."""
    _require_dyadic(N)
    mask = _block_mask(geom, N)
    if not mask.any():
        raise ValueError("block N=%r has no modes on this grid" % (N,))
    absxi = _freq_abs(geom)
    if kind == "ones":
        c = mask.astype(np.complex128)
    elif kind == "single":
        target = 1.5 * N if N > 0 else 0.0
        dist = np.where(mask, np.abs(absxi - target), np.inf)
        c = np.zeros(geom.grid, dtype=np.complex128)
        c[np.unravel_index(np.argmin(dist), geom.grid)] = 1.0
    elif kind == "bell":
        width = max(N / 2.0, 0.5)
        c = np.where(mask, np.exp(-((absxi - 1.5 * N) / width) ** 2), 0.0)
        c = c.astype(np.complex128)
    else:
        raise ValueError("unknown extremizer kind %r" % (kind,))
    f = SpectralField(geom, c)
    return f * (1.0 / l2_norm(f))
