"""Coefficient algebras for desk-scale differential forms.

Two base algebras are supported:

* ``FormalPoint`` -- the exterior algebra on a handful of anticommuting
  generators over the complex numbers (a point base with formal form
  directions).
* ``CircleBase`` -- functions sampled on a uniform grid over a circle of
  given circumference, together with function-times-dtheta one-forms.
  Derivatives are spectral (FFT), so smooth data differentiates to
  machine precision.

On top of either algebra we provide matrices with entries in the algebra
(``FormMatrix``), a supertrace against an integer grading, the
normalization operator ``phi_rescale`` and the entire functions
``exp``, ``f(a) = a e^{a^2}`` and ``f'(a) = (1 + 2a^2) e^{a^2}`` of a
matrix argument.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FormalPoint",
    "CircleBase",
    "FormElement",
    "FormMatrix",
    "wedge_mul",
    "supertrace",
    "phi_rescale",
    "matrix_function",
    "exterior_d",
    "PHI_ROOT",
]

# Fixed branch of (2 i pi)^{1/2}; chosen so that the odd characteristic
# forms below come out real.
PHI_ROOT = complex(np.sqrt(2.0 * np.pi)) * np.exp(0.25j * np.pi)


class AlgebraError(ValueError):
    """Mismatched or unsupported coefficient algebras."""


@dataclass(frozen=True)
class FormalPoint:
    """Exterior algebra on ``n_generators`` anticommuting generators."""

    n_generators: int
    truncation_degree: int | None = None

    def __post_init__(self):
        if self.n_generators < 0:
            raise AlgebraError("n_generators must be >= 0")

    @property
    def max_degree(self) -> int:
        if self.truncation_degree is None:
            return self.n_generators
        return min(self.truncation_degree, self.n_generators)

    def key_degree(self, key: int) -> int:
        return bin(key).count("1")


@dataclass(frozen=True)
class CircleBase:
    """Functions-plus-one-forms on a uniform circle grid.

    Elements are pairs (f, g dtheta) with f, g sampled at
    ``grid_size`` equispaced points of a circle of the given
    circumference.
    """

    grid_size: int
    circumference: float = 2.0 * np.pi

    def __post_init__(self):
        if self.grid_size < 4 or (self.grid_size & (self.grid_size - 1)) != 0:
            raise AlgebraError("grid_size must be a power of two, >= 4")
        if self.circumference <= 0:
            raise AlgebraError("circumference must be positive")

    @property
    def max_degree(self) -> int:
        return 1

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.grid_size) * (self.circumference / self.grid_size)

    def key_degree(self, key: int) -> int:
        return key

    def derivative(self, values: np.ndarray) -> np.ndarray:
        """Spectral d/dtheta along the leading axis... actually the last axis
        is the matrix axis; grid is axis 0."""
        n = self.grid_size
        freqs = 2.0j * np.pi * np.fft.fftfreq(n) * n / self.circumference
        spec = np.fft.fft(values, axis=0)
        shape = [1] * values.ndim
        shape[0] = n
        return np.fft.ifft(spec * freqs.reshape(shape), axis=0)


def _check_same_algebra(a, b):
    if a.algebra != b.algebra:
        raise AlgebraError(f"algebra mismatch: {a.algebra} vs {b.algebra}")


def _merge_masks(m1: int, m2: int):
    """Koszul sign and union for two generator masks; None if they collide."""
    if m1 & m2:
        return None
    # count inversions: pairs (i in m1, j in m2) with i > j
    sign = 1
    m = m1
    while m:
        i = m & (-m)  # lowest set bit of the remainder of m1
        if bin(m2 & (i - 1)).count("1") % 2:
            sign = -sign
        m &= m - 1
    return sign, m1 | m2


class FormElement:
    """Homogeneous-by-degree container for an element of the algebra.

    ``data`` maps a key (generator bitmask for FormalPoint, form degree
    for CircleBase) to the complex coefficient (a scalar, or a grid
    array for CircleBase).
    """

    def __init__(self, algebra, data=None):
        self.algebra = algebra
        self.data = {}
        if data:
            for key, val in data.items():
                val = np.asarray(val, dtype=complex) if isinstance(algebra, CircleBase) else complex(val)
                if isinstance(algebra, CircleBase) and val.shape != (algebra.grid_size,):
                    raise AlgebraError("CircleBase coefficient has wrong grid shape")
                if algebra.key_degree(key) > algebra.max_degree:
                    continue
                self.data[key] = val

    # ---- ring structure -------------------------------------------------

    @staticmethod
    def zero(algebra) -> "FormElement":
        return FormElement(algebra)

    @staticmethod
    def scalar(algebra, value) -> "FormElement":
        if isinstance(algebra, CircleBase):
            return FormElement(algebra, {0: np.full(algebra.grid_size, value, dtype=complex)})
        return FormElement(algebra, {0: value})

    def copy(self) -> "FormElement":
        return FormElement(self.algebra, dict(self.data))

    def __add__(self, other: "FormElement") -> "FormElement":
        _check_same_algebra(self, other)
        out = dict(self.data)
        for key, val in other.data.items():
            out[key] = out[key] + val if key in out else val
        return FormElement(self.algebra, out)

    def __sub__(self, other: "FormElement") -> "FormElement":
        return self + (other * (-1.0))

    def __mul__(self, c) -> "FormElement":
        if isinstance(c, FormElement):
            return self.wedge(c)
        return FormElement(self.algebra, {k: v * c for k, v in self.data.items()})

    __rmul__ = __mul__

    def wedge(self, other: "FormElement") -> "FormElement":
        _check_same_algebra(self, other)
        alg = self.algebra
        out = {}
        for k1, v1 in self.data.items():
            for k2, v2 in other.data.items():
                if isinstance(alg, FormalPoint):
                    merged = _merge_masks(k1, k2)
                    if merged is None:
                        continue
                    sign, key = merged
                    term = sign * v1 * v2
                else:
                    key = k1 + k2
                    if key > 1:
                        continue
                    term = v1 * v2
                if alg.key_degree(key) > alg.max_degree:
                    continue
                out[key] = out[key] + term if key in out else term
        return FormElement(alg, out)

    # ---- inspection -----------------------------------------------------

    def degree_component(self, degree: int) -> "FormElement":
        keep = {k: v for k, v in self.data.items() if self.algebra.key_degree(k) == degree}
        return FormElement(self.algebra, keep)

    def coefficient(self, key=0):
        """Raw coefficient for a key (0.0 if absent)."""
        if key in self.data:
            return self.data[key]
        if isinstance(self.algebra, CircleBase):
            return np.zeros(self.algebra.grid_size, dtype=complex)
        return 0.0 + 0.0j

    def norm(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.data.values()), default=0.0)

    def max_imag(self) -> float:
        return max((float(np.max(np.abs(np.imag(v)))) for v in self.data.values()), default=0.0)

    def to_vector(self) -> np.ndarray:
        """Flatten all coefficients into one complex vector (fixed key order)."""
        keys = self._all_keys()
        if isinstance(self.algebra, CircleBase):
            parts = [np.atleast_1d(self.coefficient(k)) for k in keys]
            return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
        return np.array([self.coefficient(k) for k in keys], dtype=complex)

    def _all_keys(self):
        alg = self.algebra
        if isinstance(alg, CircleBase):
            return [0, 1]
        return [m for m in range(1 << alg.n_generators) if alg.key_degree(m) <= alg.max_degree]

    @staticmethod
    def from_vector(algebra, vec: np.ndarray) -> "FormElement":
        probe = FormElement.zero(algebra)
        keys = probe._all_keys()
        data = {}
        if isinstance(algebra, CircleBase):
            g = algebra.grid_size
            for i, k in enumerate(keys):
                data[k] = np.asarray(vec[i * g:(i + 1) * g], dtype=complex)
        else:
            for i, k in enumerate(keys):
                data[k] = complex(vec[i])
        return FormElement(algebra, data)


class FormMatrix:
    """Square matrix with entries in a form algebra, carrying a grading.

    ``data`` maps keys to ``(n, n)`` complex blocks (FormalPoint) or
    ``(grid, n, n)`` blocks (CircleBase).  ``grading`` lists the integer
    degree of each basis index; it defines the supertrace sign and the
    number operator.
    """

    def __init__(self, algebra, size: int, grading, data=None):
        self.algebra = algebra
        self.size = int(size)
        self.grading = tuple(int(g) for g in grading)
        if len(self.grading) != self.size:
            raise AlgebraError("grading length must equal matrix size")
        self.data = {}
        if data:
            for key, block in data.items():
                block = np.asarray(block, dtype=complex)
                expected = self._block_shape()
                if block.shape != expected:
                    raise AlgebraError(f"block shape {block.shape}, expected {expected}")
                if algebra.key_degree(key) > algebra.max_degree:
                    continue
                self.data[key] = block

    def _block_shape(self):
        if isinstance(self.algebra, CircleBase):
            return (self.algebra.grid_size, self.size, self.size)
        return (self.size, self.size)

    # ---- constructors ---------------------------------------------------

    @staticmethod
    def identity(algebra, size, grading) -> "FormMatrix":
        out = FormMatrix(algebra, size, grading)
        eye = np.eye(size, dtype=complex)
        if isinstance(algebra, CircleBase):
            eye = np.broadcast_to(eye, (algebra.grid_size, size, size)).copy()
        out.data[0] = eye
        return out

    @staticmethod
    def from_plain(algebra, mat: np.ndarray, grading) -> "FormMatrix":
        """Wrap an ordinary complex matrix as the degree-0 part."""
        mat = np.asarray(mat, dtype=complex)
        out = FormMatrix(algebra, mat.shape[-1], grading)
        if isinstance(algebra, CircleBase) and mat.ndim == 2:
            mat = np.broadcast_to(mat, (algebra.grid_size,) + mat.shape).copy()
        out.data[0] = mat
        return out

    def copy(self) -> "FormMatrix":
        return FormMatrix(self.algebra, self.size, self.grading,
                          {k: v.copy() for k, v in self.data.items()})

    # ---- arithmetic -----------------------------------------------------

    def __add__(self, other: "FormMatrix") -> "FormMatrix":
        _check_same_algebra(self, other)
        out = {k: v.copy() for k, v in self.data.items()}
        for key, val in other.data.items():
            out[key] = out[key] + val if key in out else val.copy()
        return FormMatrix(self.algebra, self.size, self.grading, out)

    def __sub__(self, other: "FormMatrix") -> "FormMatrix":
        return self + (other * (-1.0))

    def __mul__(self, c) -> "FormMatrix":
        return FormMatrix(self.algebra, self.size, self.grading,
                          {k: v * c for k, v in self.data.items()})

    __rmul__ = __mul__

    def _parity_signs(self) -> np.ndarray:
        """Outer sign matrix (-1)^{g_i + g_j}, the endomorphism parity per entry."""
        s = np.array([(-1.0) ** g for g in self.grading])
        return np.outer(s, s)

    def __matmul__(self, other: "FormMatrix") -> "FormMatrix":
        """Product in the super tensor algebra of forms and endomorphisms.

        When the right factor has odd form degree, the left factor picks
        up a Koszul sign on its parity-odd entries (the entry's
        endomorphism parity moves past the form coefficient).
        """
        _check_same_algebra(self, other)
        if self.size != other.size:
            raise AlgebraError("size mismatch in matrix product")
        alg = self.algebra
        parity = self._parity_signs()
        out = {}
        for k1, b1 in self.data.items():
            for k2, b2 in other.data.items():
                if isinstance(alg, FormalPoint):
                    merged = _merge_masks(k1, k2)
                    if merged is None:
                        continue
                    sign, key = merged
                else:
                    sign, key = 1, k1 + k2
                    if key > 1:
                        continue
                if alg.key_degree(key) > alg.max_degree:
                    continue
                left = b1 * parity if alg.key_degree(k2) % 2 else b1
                term = sign * (left @ b2)
                out[key] = out[key] + term if key in out else term
        return FormMatrix(alg, self.size, self.grading, out)

    # ---- inspection -----------------------------------------------------

    def block(self, key=0) -> np.ndarray:
        if key in self.data:
            return self.data[key]
        return np.zeros(self._block_shape(), dtype=complex)

    def degree0_norm(self) -> float:
        if 0 not in self.data:
            return 0.0
        blk = self.data[0]
        if blk.ndim == 3:
            return float(np.max(np.linalg.norm(blk, ord=2, axis=(1, 2))))
        return float(np.linalg.norm(blk, ord=2))

    def norm(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.data.values()), default=0.0)


def wedge_mul(a: FormMatrix, b: FormMatrix) -> FormMatrix:
    """Matrix product over the coefficient algebra."""
    return a @ b


def supertrace(m: FormMatrix) -> FormElement:
    """Sum of diagonal entries weighted by (-1)^{grading}."""
    signs = np.array([(-1.0) ** g for g in m.grading])
    out = {}
    for key, blk in m.data.items():
        diag = np.diagonal(blk, axis1=-2, axis2=-1)
        out[key] = np.sum(diag * signs, axis=-1)
    return FormElement(m.algebra, out)


def phi_rescale(obj):
    """Multiply each degree-k component by (2 i pi)^{-k/2} (fixed branch)."""
    factors = {}

    def factor(deg):
        if deg not in factors:
            factors[deg] = PHI_ROOT ** (-deg)
        return factors[deg]

    if isinstance(obj, FormMatrix):
        data = {k: v * factor(obj.algebra.key_degree(k)) for k, v in obj.data.items()}
        return FormMatrix(obj.algebra, obj.size, obj.grading, data)
    data = {k: v * factor(obj.algebra.key_degree(k)) for k, v in obj.data.items()}
    return FormElement(obj.algebra, data)


def _expm(m: FormMatrix) -> FormMatrix:
    """Matrix exponential by scaling-and-squaring plus a Taylor series.

    The coefficient algebra is nilpotent above degree 0, so convergence
    is controlled entirely by the degree-0 block norm.
    """
    for blk in m.data.values():
        if not np.all(np.isfinite(blk)):
            raise FloatingPointError("non-finite entries in matrix exponential")
    norm0 = m.degree0_norm()
    squarings = 0
    if norm0 > 0.5:
        squarings = int(np.ceil(np.log2(norm0 / 0.5)))
    scaled = m * (0.5 ** squarings)
    result = FormMatrix.identity(m.algebra, m.size, m.grading)
    term = FormMatrix.identity(m.algebra, m.size, m.grading)
    for k in range(1, 60):
        term = (term @ scaled) * (1.0 / k)
        result = result + term
        if term.norm() < 1e-19 * max(result.norm(), 1.0):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def matrix_function(m: FormMatrix, which: str) -> FormMatrix:
    """Evaluate exp, f(a) = a e^{a^2} or f'(a) = (1+2a^2) e^{a^2} at a matrix."""
    if which == "exp":
        return _expm(m)
    msq = m @ m
    emsq = _expm(msq)
    if which == "f":
        return m @ emsq
    if which == "f_prime":
        ident = FormMatrix.identity(m.algebra, m.size, m.grading)
        return (ident + 2.0 * msq) @ emsq
    raise ValueError(f"unknown matrix function {which!r}")


def exterior_d(elem: FormElement) -> FormElement:
    """d on the circle algebra: functions map to derivative-times-dtheta."""
    alg = elem.algebra
    if not isinstance(alg, CircleBase):
        raise AlgebraError("exterior_d requires a CircleBase algebra")
    out = {}
    if 0 in elem.data:
        out[1] = alg.derivative(elem.data[0])
    return FormElement(alg, out)
