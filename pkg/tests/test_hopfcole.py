"""Heat-data catalog, the linear system, exact solutions, certification,
and the invariance properties of the construction."""

from fractions import Fraction
import math
import random

import pytest

from burgers_hierarchy.hopfcole import (
    CertificationError,
    HeatSolution,
    HeatSolutionError,
    RationalExpr,
    SingularSystemError,
    catalog_from_json,
    certify,
    heat_constant,
    heat_exponential,
    heat_gaussian,
    heat_polynomial,
    heat_sum,
    heat_trig,
    hopfcole_matrix,
    mix_heat_solutions,
    sample_points,
    solve_exact,
)
from burgers_hierarchy.symcore import ONE, T, X, cosh, exp, total_derivative


def traveling_wave_solution():
    v = heat_sum([(1, heat_constant(1)), (1, heat_exponential(1, sign=-1))])
    return solve_exact(1, [v])


def rational_pair_solution():
    return solve_exact(2, [HeatSolution(X, label="x"), heat_polynomial(2)])


class TestHeatCatalog:
    def test_constant_and_linear(self):
        heat_constant(Fraction(3, 2))
        HeatSolution(X)

    def test_heat_polynomials(self):
        assert heat_polynomial(0).expr == ONE
        assert heat_polynomial(2).expr == X ** 2 + 2 * T
        assert heat_polynomial(3).expr == X ** 3 + 6 * T * X
        for n in range(8):
            heat_polynomial(n)  # construction re-checks the equation

    def test_exponential_and_trig(self):
        heat_exponential(2, sign=1)
        heat_exponential(Fraction(1, 2), sign=-1)
        heat_trig(1, "sin")
        heat_trig(3, "cos")

    def test_gaussian_kernel(self):
        g = heat_gaussian(1)
        # closed form: (t+1)^(-1/2) exp(-x^2/(4(t+1)))
        val = g.numeric_atoms[next(iter(g.numeric_atoms))](0.5, 0.0)
        assert val == pytest.approx(1.5 ** -0.5)

    def test_non_solution_rejected(self):
        with pytest.raises(HeatSolutionError):
            HeatSolution(X ** 2)  # (x^2)_t - (x^2)_xx = -2
        with pytest.raises(HeatSolutionError):
            HeatSolution(exp(X))

    def test_sum_closure(self):
        s = heat_sum([(Fraction(1, 3), heat_polynomial(4)), (-2, heat_gaussian(2))])
        assert s.rules is not None

    def test_catalog_json(self):
        doc = [
            {"kind": "constant", "value": "1"},
            {"kind": "sum", "terms": [
                {"coeff": "2", "term": {"kind": "heat_polynomial", "degree": 2}},
                {"coeff": "-1/3", "term": {"kind": "trig", "a": "1", "func": "cos"}},
            ]},
        ]
        vs = catalog_from_json(doc)
        assert len(vs) == 2
        with pytest.raises(ValueError):
            catalog_from_json([{"kind": "mystery"}])


class TestLinearSystem:
    def test_single_row_is_classical_transform(self):
        v = heat_polynomial(2)
        rows, rhs = hopfcole_matrix(1, [v])
        assert rows == [[v.expr]]
        assert rhs == [-2 * total_derivative(v.expr, "x")]

    def test_single_component_structural_reduction(self):
        # the solved numerator/denominator are exactly (-2 v_x, v)
        v = heat_exponential(1, sign=-1)
        sol = solve_exact(1, [v])
        assert sol.det == v.expr
        assert sol.numerators[0] == -2 * total_derivative(v.expr, "x")

    def test_constant_linear_data_zero_solution(self):
        sol = solve_exact(2, [heat_constant(1), HeatSolution(X)])
        for n in sol.numerators:
            assert n.is_zero()

    def test_traveling_wave_pointwise(self):
        sol = traveling_wave_solution()
        assert sol.evaluate(0.0, 0.0)[0] == pytest.approx(1.0)
        assert sol.evaluate(0.3, -8.0)[0] == pytest.approx(2.0, abs=1e-3)
        assert sol.evaluate(0.3, 12.0)[0] == pytest.approx(0.0, abs=1e-4)

    def test_rational_pair(self):
        sol = rational_pair_solution()
        t, x = 0.7, 0.4
        u1, u2 = sol.evaluate(t, x)
        assert u1 == pytest.approx(4 * x / (2 * t - x * x))
        assert u2 == pytest.approx(8 / (2 * t - x * x))

    def test_dependent_data_reports_witness(self):
        with pytest.raises(SingularSystemError) as err:
            solve_exact(2, [HeatSolution(X), HeatSolution(3 * X)])
        assert err.value.witness is not None

    def test_wrong_catalog_length(self):
        with pytest.raises(ValueError):
            hopfcole_matrix(2, [heat_constant(1)])


class TestCertification:
    def test_traveling_wave_symbolic(self):
        report = certify(traveling_wave_solution())
        assert report.mode == "symbolic" and report.passed

    def test_tanh_profile_symbolic(self):
        sol = solve_exact(1, [HeatSolution(exp(T) * cosh(X), label="exp(t)cosh(x)")])
        report = certify(sol)
        assert report.mode == "symbolic" and report.passed
        assert sol.evaluate(0.2, 1.3)[0] == pytest.approx(-2 * math.tanh(1.3))

    def test_rational_pair_symbolic(self):
        report = certify(rational_pair_solution())
        assert report.mode == "symbolic" and report.passed

    @pytest.mark.parametrize("m", [3, 4])
    def test_heat_polynomial_numeric(self, m):
        sol = solve_exact(m, [heat_polynomial(n) for n in range(1, m + 1)])
        pts = sample_points(sol, 100, (0.1, 1.0, -3.0, 3.0), seed=4)
        worst = max(abs(v) for (t, x) in pts for v in sol.residual_values(t, x))
        assert worst < 1e-10

    def test_gaussian_symbolic(self):
        report = certify(solve_exact(1, [heat_gaussian(1)]))
        assert report.mode == "symbolic" and report.passed

    def test_failed_certification_raises(self):
        sol = traveling_wave_solution()
        # sabotage one numerator; residuals no longer vanish
        sol.numerators[0] = sol.numerators[0] + ONE
        sol._residuals = None
        with pytest.raises(CertificationError):
            certify(sol, symbolic_term_limit=0, n_points=10)

    def test_guard_excludes_singular_points(self):
        sol = rational_pair_solution()   # determinant zero on 2t = x^2
        assert not sol.guard_ok(0.5, 1.0)
        assert sol.guard_ok(0.5, 3.0)


class TestInvariances:
    def test_row_scaling(self):
        vs = [HeatSolution(X, label="x"), heat_polynomial(2)]
        base = solve_exact(2, vs)
        scaled = solve_exact(2, mix_heat_solutions(vs, [[3, 0], [0, Fraction(-1, 2)]]))
        rng = random.Random(3)
        for _ in range(50):
            t, x = rng.uniform(0.1, 1.0), rng.uniform(2.0, 4.0)
            for a, b in zip(base.evaluate(t, x), scaled.evaluate(t, x)):
                assert abs(a - b) < 1e-12

    def test_permutation(self):
        vs = [heat_polynomial(1), heat_polynomial(2), heat_polynomial(3)]
        base = solve_exact(3, vs)
        perm = solve_exact(3, [vs[2], vs[0], vs[1]])
        rng = random.Random(5)
        for _ in range(25):
            t, x = rng.uniform(0.1, 1.0), rng.uniform(1.5, 3.0)
            if not (base.guard_ok(t, x) and perm.guard_ok(t, x)):
                continue
            for a, b in zip(base.evaluate(t, x), perm.evaluate(t, x)):
                assert abs(a - b) < 1e-11

    def test_invertible_mixing(self):
        vs = [HeatSolution(X, label="x"), heat_polynomial(2)]
        base = solve_exact(2, vs)
        mixed = solve_exact(2, mix_heat_solutions(vs, [[1, 2], [Fraction(1, 2), -1]]))
        rng = random.Random(8)
        for _ in range(50):
            t, x = rng.uniform(0.1, 1.0), rng.uniform(2.0, 4.0)
            for a, b in zip(base.evaluate(t, x), mixed.evaluate(t, x)):
                assert abs(a - b) < 1e-12


class TestRationalExpr:
    def test_quotient_rule(self):
        u = RationalExpr(X ** 2, T + 1)
        du = u.derivative("x")
        assert du.num == 2 * X * (T + 1)
        assert du.den == (T + 1) ** 2

    def test_no_cancellation(self):
        # unequal denominators multiply; nothing is silently reduced
        a = RationalExpr(ONE, X)
        b = RationalExpr(ONE, X * X)
        s = a + b
        assert s.den == X ** 3
        assert s.num == X * X + X
        # equal denominators are shared, which is reuse, not cancellation
        twice = a + a
        assert twice.den == X and twice.num == 2 * ONE


def test_solution_export():
    sol = rational_pair_solution()
    doc = sol.to_json_dict()
    assert doc["m"] == 2
    assert len(doc["components"]) == 2
    from burgers_hierarchy.parser import parse_expr

    for comp in doc["components"]:
        parse_expr(comp["numerator"])
        parse_expr(comp["denominator"])
