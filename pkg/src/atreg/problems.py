"""Discrete ill-posed test problems and noise injection.

The integral-equation generators discretize a first-kind Fredholm
equation with the composite midpoint rule: collocation at the midpoints
``s_i`` and quadrature nodes at the midpoints ``t_j``, so that
``A[i, j] = w * K(s_i, t_j)``. The right-hand side is always
``b_ex = A @ x_ex``, never the analytic integral.

Noise is drawn from ``numpy.random.default_rng(seed)`` (the PCG64 bit
generator) with ``standard_normal``; the same seed gives bit-identical
noise on every platform numpy supports.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidNoise, InvalidSize
from .operators import DenseOperator, LinearOperator, blur_operator

__all__ = ['TestProblem', 'NoisySystem', 'gen_shaw', 'gen_baart',
           'gen_foxgood', 'gen_ilaplace', 'gen_blur', 'add_noise',
           'GENERATORS', 'make_problem']


@dataclass(frozen=True)
class TestProblem:
    """Operator, exact solution and consistent right-hand side."""

    __test__ = False  # not a pytest class

    name: str
    A: LinearOperator
    x_ex: np.ndarray
    b_ex: np.ndarray
    n: int

    @property
    def N(self):
        return self.x_ex.shape[0]


@dataclass(frozen=True)
class NoisySystem:
    """Noisy data ``b = b_ex + e`` with ``||e|| = noise_level * ||b_ex||``."""

    b: np.ndarray
    e: np.ndarray
    noise_level: float
    seed: int

    @property
    def noise_norm(self):
        return float(np.linalg.norm(self.e))


def _midpoints(a, b, n):
    h = (b - a) / n
    return a + (np.arange(n) + 0.5) * h, h


def _problem(name, M, x, n):
    A = DenseOperator(M)
    x = np.ascontiguousarray(x, dtype=np.float64)
    return TestProblem(name, A, x, A @ x, n)


def gen_shaw(n):
    """One-dimensional image restoration model on ``[-pi/2, pi/2]``."""
    if n < 4 or n % 2:
        raise InvalidSize('shaw needs an even n >= 4, got %d' % n)
    t, h = _midpoints(-np.pi / 2, np.pi / 2, n)
    s = t
    S, T = np.meshgrid(s, t, indexing='ij')
    u = np.pi * (np.sin(S) + np.sin(T))
    # sinc(x) = sin(pi x)/(pi x), so sin(u)/u = sinc(u/pi) with the u=0 limit
    K = (np.cos(S) + np.cos(T)) ** 2 * np.sinc(u / np.pi) ** 2
    a1, a2, c1, c2, t1, t2 = 2.0, 1.0, 6.0, 2.0, 0.8, -0.5
    x = a1 * np.exp(-c1 * (t - t1) ** 2) + a2 * np.exp(-c2 * (t - t2) ** 2)
    return _problem('shaw', h * K, x, n)


def gen_baart(n):
    """Kernel ``exp(s cos t)`` with ``s in [0, pi/2]``, ``t in [0, pi]``."""
    if n < 4:
        raise InvalidSize('baart needs n >= 4, got %d' % n)
    s, _ = _midpoints(0.0, np.pi / 2, n)
    t, h = _midpoints(0.0, np.pi, n)
    K = np.exp(np.outer(s, np.cos(t)))
    return _problem('baart', h * K, np.sin(t), n)


def gen_foxgood(n):
    """Kernel ``sqrt(s^2 + t^2)`` on the unit square, solution ``x(t) = t``."""
    if n < 4:
        raise InvalidSize('foxgood needs n >= 4, got %d' % n)
    t, h = _midpoints(0.0, 1.0, n)
    K = np.sqrt(np.add.outer(t ** 2, t ** 2))
    return _problem('foxgood', h * K, t.copy(), n)


def gen_ilaplace(n):
    """Inverse Laplace transform on ``[0, 10]`` with ``x(t) = exp(-t/2)``."""
    if n < 4:
        raise InvalidSize('i_laplace needs n >= 4, got %d' % n)
    t, h = _midpoints(0.0, 10.0, n)
    K = np.exp(-np.outer(t, t))
    return _problem('ilaplace', h * K, np.exp(-t / 2), n)


def gen_blur(n, band, sigma, image):
    """Blur a column-stacked ``n x n`` image with :func:`blur_operator`."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        if image.shape != (n, n):
            raise DimensionMismatch('image shape %s does not match n=%d'
                                    % (image.shape, n))
        image = image.reshape(-1, order='F')
    if image.shape != (n * n,):
        raise DimensionMismatch('image has %d pixels, expected %d'
                                % (image.size, n * n))
    if image.min() < 0 or image.max() > 1:
        raise ValueError('pixel values must lie in [0, 1]')
    A = blur_operator(n, band, sigma)
    x = image.copy()
    return TestProblem('blur', A, x, A @ x, n)


def add_noise(b_ex, noise_level, seed):
    """Add white Gaussian noise scaled to relative norm ``noise_level``.

    Parameters
    ----------
    b_ex : array_like
        Exact data.
    noise_level : float
        Target ``||e|| / ||b_ex||``.
    seed : int
        Seed of the PCG64 stream the noise direction is drawn from.
    """
    if not noise_level >= 0:
        raise InvalidNoise('noise level must be nonnegative, got %r'
                           % (noise_level,))
    b_ex = np.asarray(b_ex, dtype=np.float64)
    w = np.random.default_rng(seed).standard_normal(b_ex.shape[0])
    e = (noise_level * np.linalg.norm(b_ex) / np.linalg.norm(w)) * w
    return NoisySystem(b_ex + e, e, float(noise_level), int(seed))


GENERATORS = {
    'shaw': gen_shaw,
    'baart': gen_baart,
    'foxgood': gen_foxgood,
    'ilaplace': gen_ilaplace,
}


def make_problem(name, n):
    """Build one of the 1-D problems by name."""
    try:
        gen = GENERATORS[name.replace('i_laplace', 'ilaplace')]
    except KeyError:
        raise ValueError('unknown problem %r; choose from %s'
                         % (name, sorted(GENERATORS))) from None
    return gen(n)
