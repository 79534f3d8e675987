import math

import numpy as np
import pytest

from maslovkit.errors import DimensionMismatchError, MaslovkitError
from maslovkit.handle import (
    CutoffG,
    GridSpec,
    HandleParams,
    HandlePoint,
    ambient_omega,
    hamiltonian_fields,
    liouville_field,
    liouville_flow,
    liouville_form,
    lyapunov_derivative,
    phi_gradient,
    potentials,
    potentials_xyz,
    quadratic_model_flow,
    transversality_certificate,
)
from maslovkit.suites import (
    handle_certification_suite,
    handle_identity_suite,
    slope_identity_suite,
)

PARAMS = HandleParams(n=2, k=1, epsilon=0.1, delta=0.05)


class TestParams:
    def test_critical_index_rejected(self):
        with pytest.raises(DimensionMismatchError):
            HandleParams(n=2, k=2, epsilon=0.1, delta=0.05)

    def test_negative_sizes_rejected(self):
        with pytest.raises(MaslovkitError):
            HandleParams(n=2, k=1, epsilon=-0.1, delta=0.05)


class TestPotentials:
    def test_origin(self):
        pot = potentials(HandlePoint.of([0, 0, 0, 0], PARAMS), PARAMS)
        assert pot["x"] == pot["y"] == pot["z"] == pot["phi"] == 0.0
        # the deformed function misses the undeformed level at the origin
        assert pot["psi_delta"] == pytest.approx(-(1 + PARAMS.epsilon), abs=1e-15)

    def test_sphere_point(self):
        # x = z = 0, y = 1 sits on the -1 level of phi
        pot = potentials(HandlePoint.of([0, 2, 0, 0], PARAMS), PARAMS)
        assert pot["y"] == pytest.approx(1.0) and pot["x"] == pot["z"] == 0.0
        assert pot["phi"] == pytest.approx(-1.0)

    def test_y_coordinate_quarter_weight(self):
        pot = potentials(HandlePoint.of([0, 2, 0, 0], PARAMS), PARAMS)
        assert pot["phi"] == pytest.approx(-1.0)
        assert pot["lyapunov"] == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            HandlePoint.of([0, 0, 0], PARAMS)


class TestCutoff:
    @pytest.mark.parametrize("eps", [0.1, 0.05, 0.01])
    def test_knot_values_exact(self, eps):
        g = CutoffG(eps)
        assert g(1.0) == pytest.approx(1.0 / (1.0 + 2 * eps), abs=1e-15)
        assert g(0.3) == pytest.approx(0.3 / (1.0 + 2 * eps), abs=1e-15)
        assert g(1.0 + 3 * eps) == pytest.approx(1.0, abs=1e-14)
        assert g(5.0) == 1.0

    @pytest.mark.parametrize("eps", [0.1, 0.05, 0.01])
    def test_derivative_bound_global(self, eps):
        g = CutoffG(eps)
        ts = np.linspace(-2, 3, 40001)
        gp = g.prime(ts)
        assert np.all(gp >= 0)
        assert np.all(gp <= 1.0 / (1.0 + 2 * eps) + 1e-15)

    def test_psi_equals_phi_where_g_saturates(self):
        # on {y + (x+z)/delta >= 1+3eps} the cut-off is 1 and psi == phi
        pts = [[0.5, 3.0, 0.2, 0.1], [1.0, 4.0, 0.0, 0.0]]
        for c in pts:
            pot = potentials(HandlePoint.of(c, PARAMS), PARAMS)
            arg = pot["y"] + (pot["x"] + pot["z"]) / PARAMS.delta
            assert arg >= 1 + 3 * PARAMS.epsilon
            assert pot["psi_delta"] == pytest.approx(pot["phi"], abs=1e-12)

    def test_psi_phi_difference_in_linear_region(self):
        # where the cut-off is linear the difference has the closed form
        # -(1+eps) + (1+eps) (y + (x+z)/delta) / (1+2eps)
        e, d = PARAMS.epsilon, PARAMS.delta
        for c in ([0.0, 0.1, 0.01, 0.0], [0.01, 0.0, 0.0, 0.01]):
            pot = potentials(HandlePoint.of(c, PARAMS), PARAMS)
            arg = pot["y"] + (pot["x"] + pot["z"]) / d
            assert arg <= 1.0
            want = -(1 + e) + (1 + e) * arg / (1 + 2 * e)
            assert pot["psi_delta"] - pot["phi"] == pytest.approx(want, abs=1e-14)


class TestFields:
    def test_liouville_field_at_origin(self):
        assert np.allclose(liouville_field([0, 0, 0, 0], PARAMS), 0.0)

    def test_liouville_field_handle_direction(self):
        assert np.allclose(liouville_field([1, 0, 0, 0], PARAMS), [1.5, 0, 0, 0])

    def test_rotation_field_transverse_plane(self):
        f = hamiltonian_fields([0, 0, 1, 0], PARAMS)
        assert np.allclose(f["Xz"], [0, 0, 0, 0.5])

    def test_fields_are_hamiltonian(self):
        # i_{X_f} omega = -df for each potential, finite-difference df
        rng = np.random.default_rng(0)
        omega = ambient_omega(PARAMS)
        h = 1e-6
        for _ in range(50):
            c = rng.normal(size=4)
            f = hamiltonian_fields(c, PARAMS)
            for name, idx in (("Xx", "x"), ("Xy", "y"), ("Xz", "z")):
                grad = np.zeros(4)
                for i in range(4):
                    e = np.zeros(4)
                    e[i] = h
                    grad[i] = (
                        potentials(HandlePoint(c + e), PARAMS)[idx]
                        - potentials(HandlePoint(c - e), PARAMS)[idx]
                    ) / (2 * h)
                assert np.allclose(f[name] @ omega, -grad, atol=1e-8)


class TestFlow:
    def test_time_zero_identity(self):
        p = HandlePoint.of([0.3, -1.0, 2.0, 0.5], PARAMS)
        assert np.allclose(liouville_flow(p, 0.0, PARAMS).coords, p.coords)

    def test_closed_form_scalings(self):
        p = HandlePoint.of([1, 1, 1, 1], PARAMS)
        q = liouville_flow(p, 2 * math.log(2), PARAMS)
        assert np.allclose(q.coords, [8.0, 0.5, 2.0, 2.0], atol=1e-12)

    def test_group_law(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            p = HandlePoint(rng.normal(size=4))
            s, t = rng.uniform(-2, 2, size=2)
            a = liouville_flow(liouville_flow(p, s, PARAMS), t, PARAMS).coords
            b = liouville_flow(p, s + t, PARAMS).coords
            assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(b)))


class TestLyapunov:
    def test_vanishes_on_rotation_locus(self):
        coeffs = {"Cx": 1.0, "Cy": 2.0, "Cz": 3.0}
        assert lyapunov_derivative([0, 0, 1.0, -2.0], coeffs, PARAMS) == 0.0

    def test_handle_plane_value(self):
        # x potential = 3/4 at (1,0,0,0); the derivative is 2 Cx x = 3/2
        coeffs = {"Cx": 1.0, "Cy": 1.0, "Cz": 1.0}
        assert lyapunov_derivative([1, 0, 0, 0], coeffs, PARAMS) == pytest.approx(1.5)

    def test_against_field_gradient_oracle(self):
        rng = np.random.default_rng(9)
        params = HandleParams(n=3, k=2, epsilon=0.1, delta=0.05)
        for _ in range(1000):
            c = rng.normal(size=6)
            coeffs = {
                "Cx": float(rng.uniform(0.1, 3)),
                "Cy": float(rng.uniform(0.1, 3)),
                "Cz": float(rng.uniform(0.1, 3)),
            }
            f = hamiltonian_fields(c, params)
            xh = coeffs["Cx"] * f["Xx"] - coeffs["Cy"] * f["Xy"] + coeffs["Cz"] * f["Xz"]
            grad_l = np.zeros(6)
            grad_l[:2] = c[2:4]
            grad_l[2:4] = c[:2]
            want = float(grad_l @ xh)
            got = lyapunov_derivative(c, coeffs, params)
            assert abs(want - got) < 1e-12 * max(1.0, abs(want))

    def test_positive_coefficients_required(self):
        with pytest.raises(MaslovkitError):
            lyapunov_derivative([1, 0, 0, 0], {"Cx": -1.0, "Cy": 1.0, "Cz": 1.0}, PARAMS)


class TestQuadraticModelFlow:
    def test_identity_at_zero(self):
        z = np.array([1 + 2j, 0.5])
        assert np.allclose(quadratic_model_flow(z, 3, 0.0), z)

    def test_horizontal_to_vertical(self):
        got = quadratic_model_flow(np.array([1.0 + 0j]), 0, 1.0)
        assert np.allclose(got, [1j], atol=1e-15)

    def test_three_half_turns(self):
        got = quadratic_model_flow(np.array([1.0 + 0j]), 1, 1.0)
        assert np.allclose(got, [np.exp(3j * np.pi / 2)], atol=1e-15)
        assert np.allclose(got, [-1j], atol=1e-12)


class TestTransversality:
    def test_default_parameters_pass(self):
        cert = transversality_certificate(PARAMS)
        assert cert.passed and cert.min_value > 0
        assert cert.n_surface_points > 1000

    def test_positive_y_points_positive(self):
        # any surface point with x = z = 0 has value (1 - (1+eps) g') y > 0
        e, d = PARAMS.epsilon, PARAMS.delta
        g = PARAMS.cutoff
        y = 1.0  # the sphere locus
        gp = g.prime(y / 1.0 + 0.0)
        assert (1 - (1 + e) * gp) * y > 0

    def test_empty_intersection_errors(self):
        with pytest.raises(MaslovkitError):
            transversality_certificate(PARAMS, GridSpec(resolution=5, x_max=1e-9,
                                                        y_max=1e-9, z_max=1e-9))

    def test_json_shape(self):
        cert = transversality_certificate(PARAMS, GridSpec(resolution=20))
        obj = cert.to_json()
        assert obj["schema"] == "v1" and obj["pass"] is True
        assert len(obj["witness_point"]) == 3


def test_identity_suite_passes():
    r = handle_identity_suite(seed=0, points=200)
    assert r.passed, r.failures[:5]


def test_certification_suite_passes():
    r = handle_certification_suite(resolution=30)
    assert r.passed, r.failures


def test_slope_identity_suite_passes():
    r = slope_identity_suite()
    assert r.passed, r.failures[:5]
