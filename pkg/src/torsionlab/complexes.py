"""Flat complexes of metric vector spaces and their torsion forms.

A ``MetricComplex`` is a finite graded complex (E^0 -> E^1 -> ... -> E^k)
of complex inner-product spaces with differential ``v`` and Hermitian
metrics ``h``.  Over a point base with formal form generators, or over a
circle with theta-dependent metric families, we compute:

* the metric-variation matrix omega = h^{-1} (d h),
* the characteristic odd form built from f(a) = a e^{a^2},
* the torsion form: minus the integral over t of the number-weighted
  supertrace of f'(X_t), with the standard counterterms subtracted,
* the even metric-comparison class built from two metrics on the same
  complex.

All conventions are normalized so that a two-term acyclic complex with
map tau and orthonormal metrics has degree-zero torsion -log|det tau|.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    CircleBase,
    FormalPoint,
    FormElement,
    FormMatrix,
    PHI_ROOT,
    matrix_function,
    phi_rescale,
    supertrace,
)
from .quad import QuadratureSpec, adaptive_quad

__all__ = [
    "MetricComplex",
    "TorsionFormResult",
    "omega",
    "rescale_metric",
    "x_t",
    "char_form",
    "torsion_form",
    "tilde_f",
    "complex_to_json",
    "complex_from_json",
    "RANK_THRESHOLD",
]

RANK_THRESHOLD = 1e-10


class ComplexDataError(ValueError):
    """Invalid metric-complex data (v^2 != 0, bad metric, shape mismatch)."""


def _as_metric_blocks(h, dims, base):
    """Normalize metric input: (d,d) blocks, or (grid,d,d) families on a circle."""
    out = []
    for i, d in enumerate(dims):
        blk = np.asarray(h[i], dtype=complex)
        if isinstance(base, CircleBase):
            if blk.ndim == 2:
                blk = np.broadcast_to(blk, (base.grid_size, d, d)).copy()
            if blk.shape != (base.grid_size, d, d):
                raise ComplexDataError(f"metric block {i} has shape {blk.shape}")
        else:
            if blk.shape != (d, d):
                if blk.size == d * d:
                    blk = blk.reshape(d, d)
                else:
                    raise ComplexDataError(f"metric block {i} has shape {blk.shape}")
        out.append(blk)
    return out


@dataclass
class MetricComplex:
    """A finite graded complex of metric vector spaces.

    ``v[i]`` maps E^i to E^{i+1} and is stored as a (dims[i+1], dims[i])
    matrix.  ``h[i]`` is the positive Hermitian metric on E^i; over a
    CircleBase it may be a theta-family of shape (grid, d, d).
    ``grading_offset`` shifts the integer degree labels (needed for
    subquotient complexes whose natural grading does not start at 0).
    """

    dims: list
    v: list
    h: list
    base: object = None
    omega_data: object = None
    grading_offset: int = 0

    def __post_init__(self):
        self.dims = [int(d) for d in self.dims]
        k = len(self.dims)
        vs = []
        for i in range(k - 1):
            m = np.asarray(self.v[i], dtype=complex).reshape(self.dims[i + 1], self.dims[i])
            vs.append(m)
        self.v = vs
        self.h = _as_metric_blocks(self.h, self.dims, self.base)

    # ---- bookkeeping ----------------------------------------------------

    @property
    def length(self) -> int:
        return len(self.dims) - 1

    @property
    def total_dim(self) -> int:
        return int(sum(self.dims))

    @property
    def grading(self):
        out = []
        for i, d in enumerate(self.dims):
            out.extend([self.grading_offset + i] * d)
        return tuple(out)

    def block_slices(self):
        out, start = [], 0
        for d in self.dims:
            out.append(slice(start, start + d))
            start += d
        return out

    def v_total(self) -> np.ndarray:
        n = self.total_dim
        out = np.zeros((n, n), dtype=complex)
        sl = self.block_slices()
        for i, vi in enumerate(self.v):
            out[sl[i + 1], sl[i]] = vi
        return out

    def h_total(self) -> np.ndarray:
        n = self.total_dim
        sl = self.block_slices()
        if isinstance(self.base, CircleBase):
            out = np.zeros((self.base.grid_size, n, n), dtype=complex)
            for i, hi in enumerate(self.h):
                out[:, sl[i], sl[i]] = hi
        else:
            out = np.zeros((n, n), dtype=complex)
            for i, hi in enumerate(self.h):
                out[sl[i], sl[i]] = hi
        return out

    def validate(self):
        scale = max([np.linalg.norm(vi) for vi in self.v], default=0.0)
        for i in range(len(self.v) - 1):
            resid = np.linalg.norm(self.v[i + 1] @ self.v[i])
            if resid > 1e-10 * max(scale**2, 1.0):
                raise ComplexDataError(f"v is not a differential: |v_{i+1} v_{i}| = {resid:.2e}")
        for i, hi in enumerate(self.h):
            blocks = hi if hi.ndim == 3 else hi[None]
            for blk in blocks:
                if blk.size == 0:
                    continue
                if np.linalg.norm(blk - blk.conj().T) > 1e-10 * np.linalg.norm(blk):
                    raise ComplexDataError(f"metric {i} is not Hermitian")
                w = np.linalg.eigvalsh(blk)
                if w[0] <= 1e-12 * max(w[-1], 1.0):
                    raise ComplexDataError(f"metric {i} is not positive definite")
        return self

    def betti(self):
        """Cohomology dimensions, from the ranks of v (metric-independent)."""
        ranks = []
        for vi in self.v:
            if min(vi.shape) == 0:
                ranks.append(0)
                continue
            s = np.linalg.svd(vi, compute_uv=False)
            ranks.append(int(np.sum(s > RANK_THRESHOLD * max(s[0], 1.0))))
        out = []
        for i, d in enumerate(self.dims):
            r_out = ranks[i] if i < len(ranks) else 0
            r_in = ranks[i - 1] if i > 0 else 0
            out.append(d - r_out - r_in)
        return tuple(out)

    def with_metric(self, h) -> "MetricComplex":
        return MetricComplex(self.dims, self.v, h, base=self.base,
                             omega_data=self.omega_data,
                             grading_offset=self.grading_offset)

    def form_algebra(self):
        """The coefficient algebra used for form-valued outputs."""
        if self.base is not None:
            return self.base
        return FormalPoint(0)


@dataclass
class TorsionFormResult:
    """Torsion form with its quadrature error and counterterm record.

    ``degree0`` is the real degree-zero part (a scalar, or a grid
    function over a circle base); ``element`` carries all degrees.
    """

    element: FormElement
    degree0: object
    error: float
    d_E: int
    d_H: int
    betti: tuple

    def max_odd_degree(self) -> float:
        alg = self.element.algebra
        bad = 0.0
        for key, val in self.element.data.items():
            if alg.key_degree(key) % 2 == 1:
                bad = max(bad, float(np.max(np.abs(val))))
        return bad


# ---- basic constructions ------------------------------------------------


def rescale_metric(E: MetricComplex, t: float) -> MetricComplex:
    """Multiply the metric on E^i by t^i."""
    if t <= 0:
        raise ValueError("metric rescaling parameter must be positive")
    return E.with_metric([(t ** i) * hi for i, hi in enumerate(E.h)])


def omega(E: MetricComplex) -> FormMatrix:
    """The odd matrix h^{-1} (d h) of the metric, as a one-form."""
    alg = E.form_algebra()
    n = E.total_dim
    if isinstance(alg, CircleBase):
        sl = E.block_slices()
        blk = np.zeros((alg.grid_size, n, n), dtype=complex)
        for i, hi in enumerate(E.h):
            if E.dims[i] == 0:
                continue
            hprime = alg.derivative(hi)
            blk[:, sl[i], sl[i]] = np.linalg.solve(hi, hprime)
        return FormMatrix(alg, n, E.grading, {1: blk})
    if E.omega_data is not None:
        return E.omega_data
    return FormMatrix(alg, n, E.grading)


def _v_adjoint(E: MetricComplex) -> np.ndarray:
    """h-adjoint of the total differential, blockwise h_i^{-1} v_i^dagger h_{i+1}."""
    n = E.total_dim
    sl = E.block_slices()
    if isinstance(E.base, CircleBase):
        out = np.zeros((E.base.grid_size, n, n), dtype=complex)
        for i, vi in enumerate(E.v):
            if min(vi.shape) == 0:
                continue
            rhs = vi.conj().T[None] @ E.h[i + 1]
            out[:, sl[i], sl[i + 1]] = np.linalg.solve(E.h[i], rhs)
        return out
    out = np.zeros((n, n), dtype=complex)
    for i, vi in enumerate(E.v):
        if min(vi.shape) == 0:
            continue
        out[sl[i], sl[i + 1]] = np.linalg.solve(E.h[i], vi.conj().T @ E.h[i + 1])
    return out


def x_t(E: MetricComplex, t: float) -> FormMatrix:
    """The odd superconnection-difference matrix at time t.

    Equals (omega + t v^* - v)/2, where v^* is the metric adjoint of the
    differential; the flat-connection parts cancel.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    alg = E.form_algebra()
    n = E.total_dim
    vmat = E.v_total()
    vstar = _v_adjoint(E)
    if isinstance(alg, CircleBase):
        vmat = np.broadcast_to(vmat, (alg.grid_size, n, n))
    out = omega(E).copy()
    out.data[0] = out.block(0) + 0.5 * (t * vstar - vmat)
    return FormMatrix(alg, n, E.grading, out.data)


def char_form(E: MetricComplex) -> FormElement:
    """The odd characteristic form of the complex-with-metric.

    (2 i pi)^{1/2} times the rescaled supertrace of f(omega/2); real with
    only odd degrees.
    """
    w = omega(E)
    val = supertrace(matrix_function(w * 0.5, "f"))
    return PHI_ROOT * phi_rescale(val)


def _number_weighted_supertrace(M: FormMatrix) -> FormElement:
    """Supertrace against (N/2): sum_i (-1)^{g_i} (g_i/2) M_ii."""
    weights = np.array([((-1.0) ** g) * 0.5 * g for g in M.grading])
    out = {}
    for key, blk in M.data.items():
        diag = np.diagonal(blk, axis1=-2, axis2=-1)
        out[key] = np.sum(diag * weights, axis=-1)
    return FormElement(M.algebra, out)


def _counterterm(t: float) -> float:
    # f'(i sqrt(t)/2) for f'(x) = (1 + 2x^2) e^{x^2}
    return (1.0 - 0.5 * t) * np.exp(-0.25 * t)


def _chi_sums(E: MetricComplex):
    g = [E.grading_offset + i for i in range(len(E.dims))]
    b = E.betti()
    d_E = sum(((-1) ** gi) * gi * d for gi, d in zip(g, E.dims))
    d_H = sum(((-1) ** gi) * gi * bi for gi, bi in zip(g, b))
    return d_E, d_H, b


def torsion_integrand(E: MetricComplex, t: float) -> FormElement:
    """The integrand of the torsion form at time t (counterterms included)."""
    d_E, d_H, _ = _chi_sums(E)
    fp = matrix_function(x_t(E, t), "f_prime")
    val = phi_rescale(_number_weighted_supertrace(fp))
    ct = 0.5 * d_H + 0.5 * (d_E - d_H) * _counterterm(t)
    correction = FormElement.scalar(val.algebra, ct)
    return val - correction


def torsion_form(E: MetricComplex, quad: QuadratureSpec = QuadratureSpec()) -> TorsionFormResult:
    """Torsion form of the complex: minus the t-integral of the
    counterterm-corrected number-weighted supertrace of f'(X_t).

    The integral is split at t = 1 with substitutions u = sqrt(t) and
    u = 1/sqrt(t), which make both halves smooth.
    """
    d_E, d_H, betti = _chi_sums(E)
    alg = E.form_algebra()
    if E.total_dim == 0:
        zero = FormElement.zero(alg)
        return TorsionFormResult(zero, 0.0, 0.0, d_E, d_H, betti)

    def integrand_vec(t):
        return torsion_integrand(E, t).to_vector()

    # dt/t = 2 du/u under both substitutions
    lower, err_lo = adaptive_quad(lambda u: integrand_vec(u * u) * (2.0 / u),
                                  0.0, 1.0, quad)
    # The t > 1 half decays exponentially in t = u^{-2}, but floating-point
    # evaluation of f'(X_t) loses absolute accuracy like t * eps.  Walk
    # dyadic windows towards u = 0 and stop once a window's contribution is
    # negligible, before round-off noise dominates the integrand.
    upper = np.zeros_like(lower)
    err_hi = 0.0
    cut = 0.1 * quad.tolerance
    hi = 1.0
    for _ in range(40):
        lo_end = 0.5 * hi
        window, werr = adaptive_quad(lambda u: integrand_vec(u ** -2.0) * (2.0 / u),
                                     lo_end, hi, quad)
        upper = upper + window
        err_hi += werr
        if np.max(np.abs(window)) < cut:
            break
        hi = lo_end
    total = -(lower + upper)
    element = FormElement.from_vector(alg, total)
    deg0 = element.degree_component(0).coefficient(0)
    degree0 = np.real(deg0) if isinstance(alg, CircleBase) else float(np.real(deg0))
    return TorsionFormResult(element, degree0, err_lo + err_hi, d_E, d_H, betti)


# ---- metric comparison --------------------------------------------------


def _metric_path(h0, h1, path: str):
    """Return h(l), hdot(l) callables for a path of metrics between h0, h1."""
    h0 = [np.asarray(b, dtype=complex) for b in h0]
    h1 = [np.asarray(b, dtype=complex) for b in h1]
    if path == "linear":
        def h_at(l):
            return [(1.0 - l) * a + l * b for a, b in zip(h0, h1)]

        def hdot_at(l):
            return [b - a for a, b in zip(h0, h1)]

        return h_at, hdot_at
    if path == "loglinear":
        # h_l = h0^{1/2} X^l h0^{1/2} with X = h0^{-1/2} h1 h0^{-1/2}
        roots, logs = [], []
        for a, b in zip(h0, h1):
            wa, va = np.linalg.eigh(a)
            sqa = (va * np.sqrt(wa)[..., None, :]) @ np.swapaxes(va.conj(), -2, -1)
            isqa = (va * (1.0 / np.sqrt(wa))[..., None, :]) @ np.swapaxes(va.conj(), -2, -1)
            x = isqa @ b @ isqa
            x = 0.5 * (x + np.swapaxes(x.conj(), -2, -1))
            wx, vx = np.linalg.eigh(x)
            roots.append((sqa, vx, wx))
            logs.append(np.log(wx))

        def h_at(l):
            out = []
            for (sqa, vx, wx), lw in zip(roots, logs):
                xl = (vx * np.exp(l * lw)[..., None, :]) @ np.swapaxes(vx.conj(), -2, -1)
                out.append(sqa @ xl @ sqa)
            return out

        def hdot_at(l):
            out = []
            for (sqa, vx, wx), lw in zip(roots, logs):
                xl = (vx * (np.exp(l * lw) * lw)[..., None, :]) @ np.swapaxes(vx.conj(), -2, -1)
                out.append(sqa @ xl @ sqa)
            return out

        return h_at, hdot_at
    raise ValueError(f"unknown metric path {path!r}")


def tilde_f(E: MetricComplex, h0, h1, path: str = "linear",
            quad: QuadratureSpec = QuadratureSpec()) -> FormElement:
    """Even comparison class of two metrics on the same flat complex.

    Integrates the rescaled graded trace of (1/2) h^{-1} hdot f'(omega/2)
    along a path of metrics from h0 to h1.  The degree-zero part is half
    the alternating-with-weights log ratio of metric volumes.
    """
    alg = E.form_algebra()
    n = E.total_dim
    sl = E.block_slices()
    h_at, hdot_at = _metric_path(h0, h1, path)

    def integrand(l):
        hl = h_at(l)
        hd = hdot_at(l)
        El = E.with_metric(hl)
        for blk in hl:
            mats = blk if blk.ndim == 3 else blk[None]
            if mats.shape[-1] and np.min(np.linalg.eigvalsh(mats)) <= 0:
                raise ValueError("metric path left the positive-definite cone")
        if isinstance(alg, CircleBase):
            hinv_hd = np.zeros((alg.grid_size, n, n), dtype=complex)
            for i in range(len(E.dims)):
                if E.dims[i] == 0:
                    continue
                hli = hl[i] if hl[i].ndim == 3 else np.broadcast_to(hl[i], (alg.grid_size,) + hl[i].shape)
                hdi = hd[i] if hd[i].ndim == 3 else np.broadcast_to(hd[i], (alg.grid_size,) + hd[i].shape)
                hinv_hd[:, sl[i], sl[i]] = np.linalg.solve(hli, hdi)
        else:
            hinv_hd = np.zeros((n, n), dtype=complex)
            for i in range(len(E.dims)):
                if E.dims[i] == 0:
                    continue
                hinv_hd[sl[i], sl[i]] = np.linalg.solve(hl[i], hd[i])
        factor = FormMatrix(alg, n, E.grading, {0: 0.5 * hinv_hd})
        fp = matrix_function(omega(El) * 0.5, "f_prime")
        return phi_rescale(supertrace(factor @ fp)).to_vector()

    value, _ = adaptive_quad(integrand, 0.0, 1.0, quad)
    return FormElement.from_vector(alg, value)


# ---- serialization ------------------------------------------------------


def _mat_to_json(m: np.ndarray):
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def _mat_from_json(obj):
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


def complex_to_json(E: MetricComplex) -> str:
    base = None
    if isinstance(E.base, FormalPoint):
        base = {"kind": "formal_point", "n_generators": E.base.n_generators,
                "truncation_degree": E.base.truncation_degree}
    elif isinstance(E.base, CircleBase):
        base = {"kind": "circle", "grid_size": E.base.grid_size,
                "circumference": E.base.circumference}
    doc = {
        "dims": E.dims,
        "v": [_mat_to_json(vi) for vi in E.v],
        "h": [_mat_to_json(hi) for hi in E.h],
        "base": base,
        "grading_offset": E.grading_offset,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def complex_from_json(text: str) -> MetricComplex:
    doc = json.loads(text)
    base = None
    bdoc = doc.get("base")
    if bdoc is not None:
        if bdoc["kind"] == "formal_point":
            base = FormalPoint(bdoc["n_generators"], bdoc.get("truncation_degree"))
        elif bdoc["kind"] == "circle":
            base = CircleBase(bdoc["grid_size"], bdoc["circumference"])
        else:
            raise ComplexDataError(f"unknown base kind {bdoc['kind']!r}")
    dims = doc["dims"]
    v = [_mat_from_json(m) for m in doc["v"]]
    h = [_mat_from_json(m) for m in doc["h"]]
    return MetricComplex(dims, v, h, base=base,
                        grading_offset=doc.get("grading_offset", 0)).validate()
