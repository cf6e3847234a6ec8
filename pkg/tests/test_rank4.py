"""Rank-4 systems: frames, integrability, invariants, classification, transport."""

import random
from fractions import Fraction

import pytest

from projlaplace import appell, presets
from projlaplace.rank4 import (
    AsymptoticSystem,
    ConjugateSystem,
    GeneralSystem,
    SurfaceClass,
    TransportError,
    asymptotic_invariants,
    classify,
    connection_form,
    cubic_invariants,
    frame_calculus,
    fundamental_form,
    maurer_cartan_residual,
    transport,
)
from projlaplace.symexpr import PowerProduct, VarTable

from helpers import random_integrable_conjugate

XY = VarTable(coords=("x", "y"))
ST = VarTable(coords=("s", "t"))


def mc_is_zero(sys) -> bool:
    res = maurer_cartan_residual(connection_form(sys))
    return all(entry.is_zero for row in res for entry in row)


class TestConnectionForm:
    def test_general_frame_displayed_rows(self):
        sys = appell.system("F2")
        omega = connection_form(sys)
        T = sys.table
        zero, one = T.zero, T.one
        # row 0: (0, dx, dy, 0)
        assert omega[0, 0] == (zero, zero)
        assert omega[0, 1] == (one, zero)
        assert omega[0, 2] == (zero, one)
        assert omega[0, 3] == (zero, zero)
        # row 1: (p dx, a dx, b dx, l dx + dy)
        assert omega[1, 0] == (sys.p, zero)
        assert omega[1, 1] == (sys.a, zero)
        assert omega[1, 2] == (sys.b, zero)
        assert omega[1, 3] == (sys.ell, one)
        # row 2: (q dy, c dy, f dy, dx + m dy)
        assert omega[2, 0] == (zero, sys.q)
        assert omega[2, 1] == (zero, sys.c)
        assert omega[2, 2] == (zero, sys.f)
        assert omega[2, 3] == (one, sys.m)

    def test_quadric_system_flat(self):
        sys = presets.quadric_preset()
        omega = connection_form(sys)
        assert omega.frame == "general"
        assert mc_is_zero(sys)

    def test_conjugate_f2_flat(self):
        assert mc_is_zero(appell.conjugate_form("F2"))

    def test_frame_closure_soundness(self):
        # mixed third derivatives agree for integrable systems
        rng = random.Random(3)
        for _ in range(3):
            sys = random_integrable_conjugate(rng)
            calc = frame_calculus(sys)
            for i in range(4):
                e_i = calc.unit(i)
                xy = calc.ddy(calc.ddx(e_i))
                yx = calc.ddx(calc.ddy(e_i))
                assert xy == yx

    def test_singular_closure_rejected(self):
        one = XY.one
        zero = XY.zero
        with pytest.raises(ValueError):
            GeneralSystem(ell=one, a=zero, b=zero, p=zero, m=one, c=zero, f=zero, q=zero)


class TestMaurerCartan:
    def test_f2_f4_systems_flat(self):
        assert mc_is_zero(appell.system("F2"))
        assert mc_is_zero(appell.system("F4"))

    def test_canonical_integrability_conditions(self):
        # b = c = 0: residual vanishes iff p_y = 0 and q_x = 0
        ok = presets.deformed_quadric_preset("x^2 + 1", "y - 3")
        assert mc_is_zero(ok)
        bad = AsymptoticSystem(b=XY.zero, c=XY.zero, p=XY.parse("x*y"), q=XY.parse("y"))
        assert not mc_is_zero(bad)

    def test_perturbed_f2_not_flat(self):
        sys = appell.system("F2")
        bumped = GeneralSystem(
            ell=sys.ell, a=sys.a + 1, b=sys.b, p=sys.p,
            m=sys.m, c=sys.c, f=sys.f, q=sys.q,
        )
        res = maurer_cartan_residual(connection_form(bumped))
        nonzero = [entry for row in res for entry in row if not entry.is_zero]
        assert nonzero
        # witness evaluation at a random rational point
        point = {"x": Fraction(1, 3), "y": Fraction(1, 5), "alpha": Fraction(2),
                 "beta1": Fraction(1, 2), "beta2": Fraction(1, 7),
                 "gamma1": Fraction(3, 2), "gamma2": Fraction(5, 3)}
        assert any(entry.eval_fraction(point) != 0 for entry in nonzero)


class TestFundamentalForm:
    def test_f2_conformal_generator(self):
        sys = appell.system("F2")
        hxx, hxy, hyy = fundamental_form(sys)
        T = sys.table
        x, y = T.var("x"), T.var("y")
        assert hxx == y / (1 - x)
        assert hxy == T.one
        assert hyy == x / (1 - y)

    def test_asymptotic_form_offdiagonal(self):
        sys = presets.quadric_preset()
        assert fundamental_form(sys) == (XY.zero, XY.one, XY.zero)

    def test_f2_conjugate_diagonal(self):
        sys = appell.conjugate_form("F2")
        T = sys.table
        s, t = T.var("s"), T.var("t")
        assert fundamental_form(sys) == (T.one, T.zero, -(s - 1) * s / ((t - 1) * t))


class TestCubicInvariants:
    def test_flat_conjugate_quadric(self):
        T = XY
        sys = ConjugateSystem(a=T.zero, b=T.zero, c=T.zero, q=T.one, m=T.zero, n=T.zero, r=T.zero)
        data = cubic_invariants(sys)
        assert data.A.is_zero and data.B.is_zero
        assert classify(sys) is SurfaceClass.QUADRIC

    def test_direct_substitution(self):
        T = XY
        x = T.var("x")
        sys = ConjugateSystem(a=T.zero, b=T.zero, c=T.zero, q=x, m=T.one, n=T.zero, r=T.zero)
        data = cubic_invariants(sys)
        assert data.A == T.const(-1)
        assert data.B.is_zero

    def test_component_symmetry(self):
        rng = random.Random(11)
        sys = random_integrable_conjugate(rng)
        data = cubic_invariants(sys)
        assert data.phi111 == -data.A
        assert data.phi112 == data.B
        assert data.phi122 == sys.q * data.phi111
        assert data.phi222 == sys.q * data.phi112
        assert data.fubini_q_half_power == 1
        assert data.fubini_rat == (sys.table.const(8) / 5) * (sys.q * data.A**2 - data.B**2)


class TestClassify:
    def test_ruled_canonical_system(self):
        assert classify(presets.ruled_preset()) is SurfaceClass.RULED

    def test_plain_quadric(self):
        assert classify(presets.quadric_preset()) is SurfaceClass.QUADRIC

    def test_f4_quadric_locus(self):
        sys = appell.conjugate_form("F4")
        T = sys.table
        al, be, g1 = T.var("alpha"), T.var("beta"), T.var("gamma1")
        locus = {"gamma2": al + be - g1 + 1}
        restricted = ConjugateSystem(
            a=sys.a.subs(locus), b=sys.b.subs(locus), c=sys.c.subs(locus),
            q=sys.q.subs(locus), m=sys.m.subs(locus), n=sys.n.subs(locus), r=sys.r.subs(locus),
        )
        assert classify(restricted) is SurfaceClass.QUADRIC

    def test_transported_quadrics_stay_quadrics(self):
        rng = random.Random(5)
        sys = random_integrable_conjugate(rng)
        assert classify(sys) is SurfaceClass.QUADRIC

    def test_general_conjugate(self):
        assert classify(appell.conjugate_form("F2")) is SurfaceClass.GENERAL

    def test_gauge_invariance_of_classification(self):
        rng = random.Random(13)
        for builder, expected in ((presets.ruled_preset, SurfaceClass.RULED),):
            sys = builder()
            T = sys.table
            x, y = T.var("x"), T.var("y")
            gauge = PowerProduct(T, ((x + 2 * y + 3, T.const(rng.randint(1, 3))),))
            moved = transport(sys.as_general(), x, y, gauge, target="general")
            assert classify(AsymptoticSystem(b=moved.b, c=moved.c, p=moved.p, q=moved.q)) is expected

    def test_gauge_invariance_on_conjugate_systems(self):
        sys = appell.conjugate_form("F2")
        T = sys.table
        s, t = T.var("s"), T.var("t")
        gauge = PowerProduct(T, ((s + 3 * t + 1, T.var("beta1")), (s - t + 7, T.const(2))))
        moved = transport(sys, s, t, gauge, target="conjugate")
        assert classify(moved) is classify(sys)
        assert moved.q == sys.q  # diagonal form untouched by gauges


class TestAsymptoticInvariants:
    def test_quadric_zeroes(self):
        (phi_x, phi_y), metric = asymptotic_invariants(presets.quadric_preset())
        assert phi_x.is_zero and phi_y.is_zero and metric.is_zero

    def test_ruled_metric_vanishes(self):
        sys = presets.ruled_preset()
        (phi_x, phi_y), metric = asymptotic_invariants(sys)
        assert metric.is_zero
        assert not phi_x.is_zero

    def test_direct_values(self):
        sys = AsymptoticSystem(b=XY.one, c=XY.one, p=XY.zero, q=XY.zero)
        (phi_x, phi_y), metric = asymptotic_invariants(sys)
        assert phi_x == XY.const(-2) and phi_y == XY.const(-2)
        assert metric == XY.const(8)


class TestTransport:
    def test_identity_is_identity(self):
        sys = appell.system("F2")
        T = sys.table
        out = transport(sys, T.var("x"), T.var("y"), None, target="general")
        assert out == sys

    def test_f2_conjugate_table(self):
        sys = appell.conjugate_form("F2")
        T = sys.table
        s, t = T.var("s"), T.var("t")
        b2, g2 = T.var("beta2"), T.var("gamma2")
        assert sys.a == -(1 - g2 + b2) / (s - t)
        assert sys.b == -(b2 - 1) / (s - t)
        assert sys.c.is_zero
        assert sys.q == (s - 1) * s / ((t - 1) * t)

    def test_f4_conjugate_table(self):
        sys = appell.conjugate_form("F4")
        T = sys.table
        s, t = T.var("s"), T.var("t")
        al, be, g2 = T.var("alpha"), T.var("beta"), T.var("gamma2")
        half = T.const(Fraction(1, 2))
        assert sys.a.is_zero and sys.b.is_zero
        assert sys.c == (g2 - half) * (g2 - 3 * half) / (s - t) ** 2 - (al - be + half) * (al - be - half) / (s + t) ** 2
        assert sys.q == (4 * s**2 - 1) / (4 * t**2 - 1)

    def test_f4_conjugate_m_n_r_reference_forms(self):
        # m and n agree with the reference closed forms verbatim; r agrees
        # only after two corrections (factor 4 on the first term, and
        # (2 gamma2 - 3) instead of (2 gamma2 - 2) in the fourth term).
        sys = appell.conjugate_form("F4")
        T = sys.table
        s, t = T.var("s"), T.var("t")
        al, be, g1, g2 = (T.var(n) for n in ("alpha", "beta", "gamma1", "gamma2"))
        half = T.const(Fraction(1, 2))
        common = 4 * (2 * (al + be - g1 - g2) + 3) / ((2 * t - 1) * (2 * t + 1))
        assert sys.m == s * common
        assert sys.n == t * common
        r_verbatim = (
            (al + be - g2) * (al + be - 2 * g1 - g2 + 2) / ((2 * t - 1) * (2 * t + 1))
            - 2 * t * (2 * g2 - 1) * (2 * g2 - 3) / ((s - t) * (2 * t - 1) * (2 * t + 1))
            - half * (2 * al - 2 * be + 1) * (2 * al - 2 * be - 1) / (s + t) ** 2
            - half * (2 * g2 - 1) * (2 * g2 - 2) / (s - t) ** 2
            + 2 * t * (2 * al - 2 * be + 1) * (2 * al - 2 * be - 1) / ((s + t) * (2 * t - 1) * (2 * t + 1))
        )
        assert sys.r != r_verbatim
        r_corrected = (
            4 * (al + be - g2) * (al + be - 2 * g1 - g2 + 2) / ((2 * t - 1) * (2 * t + 1))
            - 2 * t * (2 * g2 - 1) * (2 * g2 - 3) / ((s - t) * (2 * t - 1) * (2 * t + 1))
            - half * (2 * al - 2 * be + 1) * (2 * al - 2 * be - 1) / (s + t) ** 2
            - half * (2 * g2 - 1) * (2 * g2 - 3) / (s - t) ** 2
            + 2 * t * (2 * al - 2 * be + 1) * (2 * al - 2 * be - 1) / ((s + t) * (2 * t - 1) * (2 * t + 1))
        )
        assert sys.r == r_corrected

    def test_f2_conjugate_m_n_r_reference_forms(self):
        sys = appell.conjugate_form("F2")
        T = sys.table
        s, t = T.var("s"), T.var("t")
        al, b1, b2, g1, g2 = (T.var(n) for n in ("alpha", "beta1", "beta2", "gamma1", "gamma2"))
        den = t * (t - 1) * (s - t)
        m_ref = (
            (2 * al - g1 - 2 * g2 + 4) * s**2
            + (-2 * al + 2 * b2 + g1 - 2) * s * t
            + (-al + b1 - b2 + 2 * g2 - 3) * s
            + (al - b1 - b2 + 1) * t
        ) / den
        n_ref = (
            (2 * al + 2 * b2 - g1 - 2 * g2 + 2) * s * t
            + (-al + b1 - b2 + g2 - 1) * s
            + (-2 * al + g1 + 2 * g2 - 4) * t**2
            + (al - b1 - b2 - g2 + 3) * t
        ) / den
        r_ref = (-al + g2 - 1) * (g2 + g1 - al - 2) / ((t - 1) * t)
        assert sys.m == m_ref
        assert sys.n == n_ref
        assert sys.r == r_ref

    def test_transport_preserves_integrability(self):
        rng = random.Random(2)
        sys = random_integrable_conjugate(rng)
        assert mc_is_zero(sys)

    def test_singular_jacobian(self):
        sys = presets.deformed_quadric_preset().as_general()
        s = ST.var("s")
        with pytest.raises(TransportError):
            transport(sys, s, s + 1, None, target="general")

    def test_non_conjugate_target_rejected(self):
        # generic maps do not diagonalize the second fundamental form
        sys = presets.deformed_quadric_preset().as_general()
        s, t = ST.var("s"), ST.var("t")
        with pytest.raises(TransportError):
            transport(sys, s + t, s * t + t, None, target="conjugate")

    def test_numeric_gauge_consistency(self):
        # The transported F2 hyperbolic row annihilates
        # w(s, t) = z(1/s, 1 - t/s) / gauge(s, t) for the double series z.
        sys = appell.conjugate_form("F2")
        values = {"alpha": 1.1, "beta1": 0.3, "beta2": 0.7, "gamma1": 1.5, "gamma2": 1.2}
        params = appell.AppellParams("F2", values)
        x_map, y_map, gauge = appell.t2_map()

        def w(s: float, t: float) -> float:
            z = appell.series_eval(params, (1.0 / s, 1.0 - t / s), tol=1e-15, max_terms=300).value
            pt = dict(values, s=s, t=t)
            return z / gauge.eval_float(pt)

        s0, t0 = 3.0, 2.0
        eps = 1e-4
        w_st = (w(s0 + eps, t0 + eps) - w(s0 + eps, t0 - eps) - w(s0 - eps, t0 + eps) + w(s0 - eps, t0 - eps)) / (4 * eps**2)
        w_s = (w(s0 + eps, t0) - w(s0 - eps, t0)) / (2 * eps)
        w_t = (w(s0, t0 + eps) - w(s0, t0 - eps)) / (2 * eps)
        pt = dict(values, s=s0, t=t0)
        residual = w_st + sys.a.eval_float(pt) * w_s + sys.b.eval_float(pt) * w_t + sys.c.eval_float(pt) * w(s0, t0)
        assert abs(residual) < 1e-5
