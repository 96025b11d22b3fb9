"""Tests for metric complexes, characteristic forms and torsion forms."""

import numpy as np
import pytest

from torsionlab.algebra import CircleBase, FormalPoint, exterior_d, FormElement
from torsionlab.complexes import (
    MetricComplex,
    char_form,
    complex_from_json,
    complex_to_json,
    omega,
    rescale_metric,
    tilde_f,
    torsion_form,
    x_t,
)
from torsionlab.hodge import induced_gram, scalar_torsion_eigen
from torsionlab.instances import (
    random_circle_two_term,
    random_complex_instance,
    random_invertible,
    random_metric,
    random_two_term,
)
from torsionlab.quad import QuadratureSpec


def two_term(tau, h0=None, h1=None, base=None):
    n = tau.shape[0]
    h0 = np.eye(n, dtype=complex) if h0 is None else h0
    h1 = np.eye(n, dtype=complex) if h1 is None else h1
    return MetricComplex([n, n], [tau], [h0, h1], base=base)


class TestOmega:
    def test_constant_metric_gives_zero(self):
        alg = CircleBase(16)
        E = two_term(2.0 * np.eye(2, dtype=complex), base=alg)
        assert omega(E).norm() < 1e-13

    def test_rank1_exponential_metric(self):
        alg = CircleBase(64)
        u = 0.3 * np.sin(alg.theta) + 0.1 * np.cos(2 * alg.theta)
        uprime = 0.3 * np.cos(alg.theta) - 0.2 * np.sin(2 * alg.theta)
        h = np.exp(u)[:, None, None] * np.ones((1, 1))
        E = MetricComplex([1], [], [h], base=alg)
        w = omega(E)
        np.testing.assert_allclose(w.block(1)[:, 0, 0], uprime, atol=1e-10)

    def test_frame_change_consistency(self):
        # h = g* g for a smooth frame g  =>  omega = h^{-1} h'
        rng = np.random.default_rng(5)
        alg = CircleBase(64)
        c = np.cos(alg.theta)
        g = (np.eye(2)[None] * (2.0 + 0.3 * c)[:, None, None]).astype(complex)
        g[:, 0, 1] = 0.4 * np.sin(alg.theta)
        h = np.swapaxes(g.conj(), 1, 2) @ g
        E = MetricComplex([2], [], [h], base=alg)
        hprime = alg.derivative(h)
        expected = np.linalg.solve(h, hprime)
        np.testing.assert_allclose(omega(E).block(1), expected, atol=1e-9)


class TestRescale:
    def test_t_one_is_identity(self):
        rng = np.random.default_rng(0)
        E = random_complex_instance(rng, length=2)
        Et = rescale_metric(E, 1.0)
        for a, b in zip(E.h, Et.h):
            np.testing.assert_allclose(a, b)

    def test_graded_powers(self):
        E = MetricComplex([1, 1], [np.array([[1.0]])],
                          [np.array([[1.0]]), np.array([[1.0]])])
        Et = rescale_metric(E, 2.0)
        assert Et.h[0][0, 0] == pytest.approx(1.0)
        assert Et.h[1][0, 0] == pytest.approx(2.0)

    def test_rejects_nonpositive(self):
        rng = np.random.default_rng(1)
        E = random_complex_instance(rng, length=1)
        with pytest.raises(ValueError):
            rescale_metric(E, 0.0)

    def test_adjoint_conjugation_relation(self):
        # the t-adjoint equals t^{-N} (adjoint) t^{N}
        from torsionlab.complexes import _v_adjoint
        rng = np.random.default_rng(2)
        E = random_complex_instance(rng, length=3)
        t = 1.7
        left = _v_adjoint(rescale_metric(E, t))
        tn = np.diag([t ** g for g in E.grading]).astype(complex)
        right = np.linalg.inv(tn) @ _v_adjoint(E) @ tn
        np.testing.assert_allclose(left, right, atol=1e-10)


class TestXt:
    def test_zero_differential_constant_metric(self):
        E = MetricComplex([2, 2], [np.zeros((2, 2))],
                          [np.eye(2), np.eye(2)])
        assert x_t(E, 3.0).norm() < 1e-14

    def test_two_term_formula(self):
        rng = np.random.default_rng(3)
        tau = random_invertible(rng, 3)
        E = two_term(tau)
        t = 2.5
        m = x_t(E, t).block(0)
        expected = np.zeros((6, 6), dtype=complex)
        expected[3:, :3] = -0.5 * tau
        expected[:3, 3:] = 0.5 * t * tau.conj().T
        np.testing.assert_allclose(m, expected, atol=1e-12)

    def test_square_identity_on_circle(self):
        # rank one, equal metrics in both degrees: X_t^2 = -(t/4) Delta
        rng = np.random.default_rng(4)
        alg = CircleBase(32)
        u = 0.4 * np.sin(alg.theta)
        h = np.exp(u)[:, None, None] * np.ones((1, 1))
        tau = np.array([[1.3 - 0.4j]])
        E = MetricComplex([1, 1], [tau], [h, h], base=alg)
        t = 1.9
        sq = x_t(E, t) @ x_t(E, t)
        assert np.max(np.abs(sq.block(1))) < 1e-12  # odd part cancels
        tau_sq = float(np.abs(tau[0, 0]) ** 2)
        delta = tau_sq * np.eye(2)
        expected = np.broadcast_to(-0.25 * t * delta, (alg.grid_size, 2, 2))
        np.testing.assert_allclose(sq.block(0), expected, atol=1e-10)


class TestCharForm:
    def test_constant_metric_vanishes(self):
        alg = CircleBase(16)
        E = two_term(np.eye(2, dtype=complex), base=alg)
        assert char_form(E).norm() < 1e-13

    def test_rank1_two_term_degree1(self):
        alg = CircleBase(64)
        u = 0.5 * np.sin(alg.theta) + 0.2 * np.cos(alg.theta)
        uprime = 0.5 * np.cos(alg.theta) - 0.2 * np.sin(alg.theta)
        h1 = np.exp(u)[:, None, None] * np.ones((1, 1))
        h0 = np.ones((alg.grid_size, 1, 1), dtype=complex)
        E = MetricComplex([1, 1], [np.array([[1.0]])], [h0, h1], base=alg)
        val = char_form(E)
        np.testing.assert_allclose(val.coefficient(1), -0.5 * uprime, atol=1e-9)

    def test_real_on_random_inputs(self):
        rng = np.random.default_rng(6)
        E = random_circle_two_term(rng, grid=32)
        val = char_form(E)
        assert val.max_imag() < 1e-10
        assert val.degree_component(0).norm() < 1e-10


class TestTorsionForm:
    def test_tau_twice_identity(self):
        E = two_term(2.0 * np.eye(3, dtype=complex))
        res = torsion_form(E)
        assert res.degree0 == pytest.approx(-3.0 * np.log(2.0), abs=1e-9)
        assert res.d_E == -3
        assert res.d_H == 0

    def test_zero_complex(self):
        E = MetricComplex([0, 0], [np.zeros((0, 0))], [np.zeros((0, 0))] * 2)
        assert torsion_form(E).degree0 == 0.0

    def test_random_tau_log_det(self):
        rng = np.random.default_rng(7)
        tau = random_invertible(rng, 3)
        res = torsion_form(two_term(tau))
        expected = -np.log(np.abs(np.linalg.det(tau)))
        assert res.degree0 == pytest.approx(expected, abs=1e-9)

    def test_matches_eigen_route_nonacyclic(self):
        rng = np.random.default_rng(8)
        for _ in range(3):
            E = random_complex_instance(rng, length=3, max_dim=4)
            res = torsion_form(E)
            assert res.degree0 == pytest.approx(scalar_torsion_eigen(E), abs=1e-9)

    def test_grading_shift_sign(self):
        rng = np.random.default_rng(9)
        tau = random_invertible(rng, 2)
        base = two_term(tau)
        shifted = MetricComplex(base.dims, base.v, base.h, grading_offset=1)
        t0 = torsion_form(base).degree0
        t1 = torsion_form(shifted).degree0
        assert t1 == pytest.approx(-t0, abs=1e-9)

    def test_result_is_real_and_even_on_circle(self):
        rng = np.random.default_rng(10)
        E = random_circle_two_term(rng, grid=32, rank=1)
        res = torsion_form(E)
        assert res.element.max_imag() < 1e-10
        assert res.max_odd_degree() < 1e-10


class TestTransgression:
    def test_d_torsion_equals_char_form(self):
        # acyclic over the circle: d(T at degree 0) = char form at degree 1
        rng = np.random.default_rng(11)
        E = random_circle_two_term(rng, grid=64, rank=1)
        res = torsion_form(E)
        lhs = exterior_d(FormElement(E.base, {0: np.asarray(res.degree0, dtype=complex)}))
        rhs = char_form(E)
        np.testing.assert_allclose(lhs.coefficient(1), rhs.coefficient(1), atol=1e-7)


class TestTildeF:
    def test_equal_metrics_vanish(self):
        rng = np.random.default_rng(12)
        E = random_complex_instance(rng, length=2)
        val = tilde_f(E, E.h, E.h)
        assert val.norm() < 1e-12

    def test_single_scaled_metric(self):
        c = 3.7
        E = MetricComplex([1], [], [np.array([[1.0]])])
        val = tilde_f(E, [np.array([[1.0]])], [np.array([[c]])])
        assert val.coefficient(0) == pytest.approx(0.5 * np.log(c), abs=1e-10)

    def test_path_independence_degree0(self):
        rng = np.random.default_rng(13)
        E = random_complex_instance(rng, length=2, max_dim=3)
        h1 = [random_metric(rng, d) for d in E.dims]
        a = tilde_f(E, E.h, h1, path="linear")
        b = tilde_f(E, E.h, h1, path="loglinear")
        assert a.coefficient(0) == pytest.approx(b.coefficient(0), abs=1e-9)

    def test_rejects_bad_path(self):
        rng = np.random.default_rng(14)
        E = random_complex_instance(rng, length=1)
        with pytest.raises(ValueError):
            tilde_f(E, E.h, E.h, path="geodesic-ish")


class TestAnomaly:
    def test_metric_variation_identity_degree0(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            E = random_complex_instance(rng, length=int(rng.integers(1, 4)), max_dim=4)
            h1 = [random_metric(rng, d) for d in E.dims]
            E1 = E.with_metric(h1)
            lhs = torsion_form(E1).degree0 - torsion_form(E).degree0
            term_e = tilde_f(E, E.h, h1).coefficient(0)
            g0 = induced_gram(E)
            g1 = induced_gram(E1)
            term_h = 0.0
            for q, (a, b) in enumerate(zip(g0, g1)):
                if a.shape[0] == 0:
                    continue
                sign = (-1.0) ** q
                term_h += sign * 0.5 * (np.log(np.linalg.det(b).real)
                                        - np.log(np.linalg.det(a).real))
            rhs = term_e.real - term_h
            assert lhs == pytest.approx(rhs, abs=1e-8)


class TestDfTildeShadow:
    def test_d_tilde_f_equals_char_form_difference(self):
        rng = np.random.default_rng(16)
        E0 = random_circle_two_term(rng, grid=64, rank=1)
        from torsionlab.instances import random_circle_metric_family
        h1 = [random_circle_metric_family(rng, E0.base, 1),
              random_circle_metric_family(rng, E0.base, 1)]
        E1 = E0.with_metric(h1)
        val = tilde_f(E0, E0.h, h1)
        lhs = exterior_d(val.degree_component(0))
        rhs = char_form(E1) - char_form(E0)
        np.testing.assert_allclose(lhs.coefficient(1), rhs.coefficient(1), atol=1e-8)


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(17)
        E = random_complex_instance(rng, length=2)
        text = complex_to_json(E)
        E2 = complex_from_json(text)
        assert E2.dims == E.dims
        for a, b in zip(E.v, E2.v):
            np.testing.assert_allclose(a, b, atol=1e-12)
        assert complex_to_json(E2) == text

    def test_invalid_differential_rejected(self):
        doc = complex_to_json(MetricComplex([1, 1], [np.array([[1.0]])],
                                            [np.eye(1), np.eye(1)]))
        bad = doc.replace('"dims": [\n    1,\n    1\n  ]', '"dims": [\n    1,\n    1\n  ]')
        complex_from_json(bad)  # unchanged doc still loads


class TestValidation:
    def test_v_squared_must_vanish(self):
        v0 = np.array([[1.0]])
        v1 = np.array([[1.0]])
        with pytest.raises(Exception):
            MetricComplex([1, 1, 1], [v0, v1], [np.eye(1)] * 3).validate()

    def test_metric_must_be_positive(self):
        with pytest.raises(Exception):
            MetricComplex([1], [], [np.array([[-1.0]])]).validate()
