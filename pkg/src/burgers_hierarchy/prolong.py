"""Second prolongation of vector fields and mechanical invariance checks.

The conditional-symmetry computation follows the standard scheme: extend
the generator to second-order jet coordinates, apply it to each system
residual, then restrict to the solution manifold (the system itself, the
invariant surface conditions, and their differential consequences).
What remains is a polynomial in the first-order x-derivatives whose
coefficients are the determining quantities.

Two independent prolongation code paths are provided -- the
characteristic form and the direct coefficient recursion -- and are
cross-checked in the test suite; a mismatch fails the build.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import time

from .hierarchy import PdeSystem, VectorField, build_delta, build_symmetry_field, tier_of
from .symcore import (
    Expr,
    JetCoord,
    NonPolynomialError,
    ONE,
    OpaqueDeriv,
    OpaqueSymbol,
    SubstitutionMap,
    T_ATOM,
    X_ATOM,
    ZERO,
    collect_coefficients,
    jet,
    partial_derivative,
    total_derivative,
)


class VerificationError(Exception):
    """A symmetry claim failed to verify; carries the offending residual."""


class ExtractionError(Exception):
    """A constraint could not be isolated as a pure polynomial in kappa."""


def _dt(e: Expr) -> Expr:
    return total_derivative(e, T_ATOM)


def _dx(e: Expr) -> Expr:
    return total_derivative(e, X_ATOM)


# ---------------------------------------------------------------------------
# prolongation


@dataclass(frozen=True)
class ProlongedField:
    """Second prolongation: first-order coefficients eta^t, eta^x and
    second-order coefficients eta^tt, eta^tx, eta^xx per component."""

    base: VectorField
    eta_t: tuple[Expr, ...]
    eta_x: tuple[Expr, ...]
    eta_tt: tuple[Expr, ...]
    eta_tx: tuple[Expr, ...]
    eta_xx: tuple[Expr, ...]

    def apply_to(self, e: Expr) -> Expr:
        """Action of the prolonged field on an expression in jet
        coordinates of order <= 2 of the base field's family."""
        f = self.base
        out = f.tau * partial_derivative(e, T_ATOM) + f.xi * partial_derivative(e, X_ATOM)
        for a in range(1, f.m + 1):
            for coeff, coord in (
                (f.etas[a - 1], JetCoord(f.tier, a)),
                (self.eta_t[a - 1], JetCoord(f.tier, a, nt=1)),
                (self.eta_x[a - 1], JetCoord(f.tier, a, nx=1)),
                (self.eta_tt[a - 1], JetCoord(f.tier, a, nt=2)),
                (self.eta_tx[a - 1], JetCoord(f.tier, a, nt=1, nx=1)),
                (self.eta_xx[a - 1], JetCoord(f.tier, a, nx=2)),
            ):
                d = partial_derivative(e, coord)
                if not d.is_zero():
                    out = out + coeff * d
        return out


def prolong2(field: VectorField) -> ProlongedField:
    """Characteristic-form prolongation.

    With W_a = eta_a - tau*u_a,t - xi*u_a,x, the coefficient attached to
    the derivative coordinate u_a,J is D_J(W_a) + tau*u_a,Jt + xi*u_a,Jx.
    """
    k, tau, xi = field.tier, field.tau, field.xi
    eta_t, eta_x, eta_tt, eta_tx, eta_xx = [], [], [], [], []
    for a, eta in enumerate(field.etas, start=1):
        w = eta - tau * jet(k, a, nt=1) - xi * jet(k, a, nx=1)
        dtw, dxw = _dt(w), _dx(w)
        eta_t.append(dtw + tau * jet(k, a, nt=2) + xi * jet(k, a, 1, 1))
        eta_x.append(dxw + tau * jet(k, a, 1, 1) + xi * jet(k, a, nx=2))
        eta_tt.append(_dt(dtw) + tau * jet(k, a, nt=3) + xi * jet(k, a, 2, 1))
        eta_tx.append(_dx(dtw) + tau * jet(k, a, 2, 1) + xi * jet(k, a, 1, 2))
        eta_xx.append(_dx(dxw) + tau * jet(k, a, 1, 2) + xi * jet(k, a, nx=3))
    return ProlongedField(field, tuple(eta_t), tuple(eta_x),
                          tuple(eta_tt), tuple(eta_tx), tuple(eta_xx))


def prolong2_direct(field: VectorField) -> ProlongedField:
    """Direct coefficient recursion,
    eta^{J,i} = D_i(eta^J) - D_i(tau)*u_{a,J,t} - D_i(xi)*u_{a,J,x},
    kept as an independent path for cross-checking."""
    k, tau, xi = field.tier, field.tau, field.xi
    eta_t, eta_x, eta_tt, eta_tx, eta_xx = [], [], [], [], []
    for a, eta in enumerate(field.etas, start=1):
        et = _dt(eta) - _dt(tau) * jet(k, a, nt=1) - _dt(xi) * jet(k, a, nx=1)
        ex = _dx(eta) - _dx(tau) * jet(k, a, nt=1) - _dx(xi) * jet(k, a, nx=1)
        eta_t.append(et)
        eta_x.append(ex)
        eta_tt.append(_dt(et) - _dt(tau) * jet(k, a, nt=2) - _dt(xi) * jet(k, a, 1, 1))
        eta_tx.append(_dx(et) - _dx(tau) * jet(k, a, nt=2) - _dx(xi) * jet(k, a, 1, 1))
        eta_xx.append(_dx(ex) - _dx(tau) * jet(k, a, 1, 1) - _dx(xi) * jet(k, a, nx=2))
    return ProlongedField(field, tuple(eta_t), tuple(eta_x),
                          tuple(eta_tt), tuple(eta_tx), tuple(eta_xx))


# ---------------------------------------------------------------------------
# the solution manifold


@dataclass(frozen=True)
class ManifoldRules:
    """Substitution rules cutting out the manifold: the invariant surface
    conditions eliminate u_a,t; their differential consequences eliminate
    u_a,tx and u_a,tt; the system's solved form (already reduced by the
    surface conditions) eliminates u_a,xx and u_a,xxx.  After
    application only u_a and u_a,x of the system's family survive."""

    m: int
    tier: int
    rules: SubstitutionMap

    def apply(self, e: Expr) -> Expr:
        return self.rules.apply(e)


def manifold_rules(m: int, field: VectorField) -> ManifoldRules:
    if field.tau != ONE:
        raise ValueError("surface-condition rules require the normalized form tau = 1")
    k = field.tier
    system = build_delta(m, tier=k)
    rules: dict[JetCoord, Expr] = {}

    def reduce(e: Expr) -> Expr:
        return SubstitutionMap(rules).apply(e) if rules else e

    # u_a,t from Q_a = 0
    for a in range(1, m + 1):
        rules[JetCoord(k, a, nt=1)] = field.etas[a - 1] - field.xi * jet(k, a, nx=1)
    # u_a,xx from the solved form, with u_a,t already eliminated
    for a in range(1, m + 1):
        rhs = (field.etas[a - 1] - field.xi * jet(k, a, nx=1)) + jet(k, a) * jet(k, 1, nx=1)
        if a < m:
            rhs = rhs + jet(k, a + 1, nx=1)
        rules[JetCoord(k, a, nx=2)] = rhs
    # differentiated surface conditions, reduced through the rules so far
    for a in range(1, m + 1):
        q_rhs = field.etas[a - 1] - field.xi * jet(k, a, nx=1)
        rules[JetCoord(k, a, 1, 1)] = reduce(_dx(q_rhs))
    for a in range(1, m + 1):
        q_rhs = field.etas[a - 1] - field.xi * jet(k, a, nx=1)
        rules[JetCoord(k, a, 2, 0)] = reduce(_dt(q_rhs))
    # third-order x derivatives from the differentiated solved form
    for a in range(1, m + 1):
        rules[JetCoord(k, a, 0, 3)] = reduce(_dx(rules[JetCoord(k, a, 0, 2)]))
    _assert_acyclic(rules)
    return ManifoldRules(m, k, SubstitutionMap(rules))


def _assert_acyclic(rules: dict[JetCoord, Expr]):
    from .symcore import contains_atom

    for lhs, rhs in rules.items():
        for other in rules:
            if contains_atom(rhs, other):
                raise ValueError(
                    f"inconsistent rule set: {lhs.render()} rewrites to an "
                    f"expression still containing {other.render()}"
                )


# ---------------------------------------------------------------------------
# determining polynomials


def generic_ansatz(m: int, tier: int | None = None):
    """Vector field with opaque xi(t, x, u_1..u_m) and eta_a(t, x, u_1..u_m).

    Returns (field, symbols) where symbols maps name -> OpaqueSymbol for
    use with the parser and for building expected coefficients.
    """
    k = tier_of(m) if tier is None else tier
    args = (T_ATOM, X_ATOM) + tuple(JetCoord(k, a) for a in range(1, m + 1))
    xi = OpaqueSymbol("xi", args)
    etas = [OpaqueSymbol(f"eta{a}", args) for a in range(1, m + 1)]
    field = VectorField(m, k, ONE, xi.expr(), tuple(s.expr() for s in etas),
                        name="generic")
    return field, {s.name: s for s in [xi, *etas]}


def invariance_residuals(system: PdeSystem, field: VectorField) -> list[Expr]:
    """Second prolongation applied to each residual, unrestricted."""
    pf = prolong2(field)
    return [pf.apply_to(r) for r in system.residuals]


def determining_polynomials(m: int, ansatz: VectorField) -> list[Expr]:
    """Invariance residuals restricted to the manifold: polynomials in
    the first-order x-derivatives of the system's variables."""
    system = build_delta(m, tier=ansatz.tier)
    rules = manifold_rules(m, ansatz)
    return [rules.apply(r) for r in invariance_residuals(system, ansatz)]


# ---------------------------------------------------------------------------
# theorem verification


@dataclass
class TheoremReport:
    m: int
    status: str
    coefficient_map: dict
    term_counts: dict
    wall_time_ms: float

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "status": self.status,
            "coefficient_map": self.coefficient_map,
            "term_counts": self.term_counts,
            "meta": {"wall_time_ms": round(self.wall_time_ms, 3)},
        }


def verify_theorem(m: int) -> TheoremReport:
    """Mechanically verify the conditional-symmetry claim for the
    m-component system.

    The restricted invariance residuals are collected over monomials in
    {u_a, u_a,x}; every coefficient must be a rational combination of the
    residuals of the (m+2)-component follow-up system, and substituting
    that system's solved forms must annihilate everything.  Failure
    raises :class:`VerificationError`.
    """
    t0 = time.perf_counter()
    k = tier_of(m)
    field = build_symmetry_field(m)
    restricted = determining_polynomials(m, field)
    follow_up = build_delta(m + 2)  # tier of m+2 is k+1 by construction
    assert follow_up.tier == k + 1

    collect_vars = [JetCoord(k, a, nx=dx) for a in range(1, m + 1) for dx in (0, 1)]
    t_atoms = {JetCoord(k + 1, b, nt=1): b for b in range(1, m + 3)}

    coefficient_map: dict[str, dict[str, dict[str, str]]] = {}
    term_counts: dict[str, int] = {}
    for a, res in enumerate(restricted, start=1):
        term_counts[str(a)] = res.term_count()
        eq_map: dict[str, dict[str, str]] = {}
        for mono, coeff in collect_coefficients(res, collect_vars).items():
            combo: dict[str, str] = {}
            remainder = coeff
            for t_atom, b in t_atoms.items():
                q = partial_derivative(coeff, t_atom)
                if q.is_zero():
                    continue
                if not q.is_rational():
                    raise VerificationError(
                        f"m={m}, eq {a}: coefficient of {mono} is not linear "
                        f"with rational weights in the follow-up time derivatives"
                    )
                remainder = remainder - q * follow_up.residuals[b - 1]
                combo[str(b)] = str(q.as_rational())
            if not remainder.is_zero():
                raise VerificationError(
                    f"m={m}, eq {a}: coefficient of {mono} is not a combination "
                    f"of the follow-up residuals; leftover {remainder}"
                )
            eq_map[mono.render()] = combo
        coefficient_map[str(a)] = eq_map

    # independent final check: rewrite the follow-up time derivatives via the
    # solved forms and demand canonical zero
    solved = follow_up.solved_rules()
    for a, res in enumerate(restricted, start=1):
        final = solved.apply(res)
        if not final.is_zero():
            raise VerificationError(f"m={m}, eq {a}: nonzero final residual {final}")

    dt_ms = (time.perf_counter() - t0) * 1000.0
    return TheoremReport(m, "ok", coefficient_map, term_counts, dt_ms)


@dataclass
class ClassicalReport:
    m: int
    status: str
    generators: dict
    wall_time_ms: float

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "status": self.status,
            "generators": self.generators,
            "meta": {"wall_time_ms": round(self.wall_time_ms, 3)},
        }


def verify_classical(m: int, fields: list[VectorField] | None = None) -> ClassicalReport:
    """Check that each classical generator annihilates the system after
    substituting the solved forms (plain invariance, no surface
    conditions)."""
    from .liealg import generators

    t0 = time.perf_counter()
    system = build_delta(m)
    solved = system.solved_rules()
    per_gen = {}
    for f in fields if fields is not None else generators(m):
        pf = prolong2(f)
        for a, res in enumerate(system.residuals, start=1):
            out = solved.apply(pf.apply_to(res))
            if not out.is_zero():
                raise VerificationError(
                    f"m={m}: generator {f.name or '?'} leaves equation {a} "
                    f"non-invariant: {out}"
                )
        per_gen[f.name or f"field{len(per_gen) + 1}"] = "ok"
    dt_ms = (time.perf_counter() - t0) * 1000.0
    return ClassicalReport(m, "ok", per_gen, dt_ms)


# ---------------------------------------------------------------------------
# constraints on the advective ansatz coefficient


def kappa_symbol() -> OpaqueSymbol:
    return OpaqueSymbol("kappa", ())


def _kappa_poly_parts(e: Expr, kappa: OpaqueDeriv) -> dict[Expr, Expr]:
    """Split e into {non-kappa monomial -> polynomial in kappa}."""
    parts: dict[Expr, Expr] = {}
    for mono, coeff in e._terms.items():
        kpow = 0
        rest = []
        for atom, n in mono:
            if atom == kappa:
                kpow = n
            else:
                rest.append((atom, n))
        key = Expr({tuple(rest): Fraction(1)})
        kterm = Expr({((kappa, kpow),) if kpow else (): coeff})
        parts[key] = parts.get(key, ZERO) + kterm
    return {key: val for key, val in parts.items() if not val.is_zero()}


def kappa_poly_coefficients(e: Expr) -> list[Fraction]:
    """Coefficients [c0, c1, ...] of a polynomial in the kappa symbol."""
    kappa = OpaqueDeriv(kappa_symbol(), ())
    coeffs: dict[int, Fraction] = {}
    for mono, c in e._terms.items():
        if not mono:
            coeffs[0] = coeffs.get(0, Fraction(0)) + c
        elif len(mono) == 1 and mono[0][0] == kappa:
            coeffs[mono[0][1]] = coeffs.get(mono[0][1], Fraction(0)) + c
        else:
            raise ExtractionError(f"not a pure kappa polynomial: {e}")
    if not coeffs:
        return [Fraction(0)]
    deg = max(coeffs)
    return [coeffs.get(i, Fraction(0)) for i in range(deg + 1)]


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    def norm(p):
        while p and p[-1] == 0:
            p = p[:-1]
        return p

    def rem(p, q):
        p = list(p)
        while len(p) >= len(q) and norm(p):
            f = p[-1] / q[-1]
            shift = len(p) - len(q)
            for i, c in enumerate(q):
                p[shift + i] -= f * c
            p = norm(p)
        return p

    a, b = norm(list(a)), norm(list(b))
    while b:
        a, b = b, rem(a, b)
    if a:
        lead = a[-1]
        a = [c / lead for c in a]
    return a


def _poly_from_coeffs(coeffs: list[Fraction]) -> Expr:
    kap = kappa_symbol().expr()
    out = ZERO
    for i, c in enumerate(coeffs):
        out = out + Expr.from_rational(c) * kap ** i
    return out


def verify_kappa_constraint(m: int) -> Expr:
    """Extract the algebraic constraint on the constant kappa in the
    ansatz xi = kappa*u_1 + f(t,x)/2.

    For m >= 2 the pure x-derivative quadratic coefficients of the
    determining polynomials fix every second partial of the eta_a;
    equality of mixed third partials then yields scalar obstructions that
    are polynomials in kappa alone.  For m = 1 there is a single
    dependent variable, so instead the second-derivative condition is
    integrated (a polynomial quadrature in u_1) and the leading
    coefficient of the re-derived determining polynomial is extracted.
    Returns the monic gcd of the collected constraints.
    """
    if m >= 2:
        constraints = _kappa_obstructions_multi(m)
    else:
        constraints = _kappa_obstructions_single()
    if not constraints:
        raise ExtractionError(f"m={m}: no kappa constraint found")
    g = constraints[0]
    for c in constraints[1:]:
        g = _poly_gcd(g, c)
    while g and g[-1] == 0:
        g = g[:-1]
    if g and g[-1] != 1:
        g = [c / g[-1] for c in g]
    return _poly_from_coeffs(g)


def _kappa_ansatz(m: int):
    """xi = kappa*u_1 + f(t,x)/2 with opaque eta_a; returns
    (field, kappa_atom, u_atoms)."""
    k = tier_of(m)
    kappa = kappa_symbol()
    f = OpaqueSymbol("f", (T_ATOM, X_ATOM))
    xi = kappa.expr() * jet(k, 1) + f.expr() / 2
    args = (T_ATOM, X_ATOM) + tuple(JetCoord(k, a) for a in range(1, m + 1))
    etas = tuple(OpaqueSymbol(f"eta{a}", args).expr() for a in range(1, m + 1))
    field = VectorField(m, k, ONE, xi, etas, name="kappa-ansatz")
    return field, OpaqueDeriv(kappa, ()), [JetCoord(k, a) for a in range(1, m + 1)]


def _solve_linear_atom(e: Expr, atom: OpaqueDeriv) -> Expr:
    """Solve e == 0 for an atom occurring linearly with rational weight."""
    slope = partial_derivative(e, atom)
    if slope.is_zero() or not slope.is_rational():
        raise ExtractionError(f"cannot solve for {atom.render()} in {e}")
    rest = e - slope * Expr.from_atom(atom)
    return -rest / slope.as_rational()


def _kappa_obstructions_multi(m: int) -> list[list[Fraction]]:
    field, kappa_atom, u_atoms = _kappa_ansatz(m)
    polys = determining_polynomials(m, field)
    k = field.tier
    ux = [JetCoord(k, a, nx=1) for a in range(1, m + 1)]

    # second partials eta_a,{u_b u_c} from the quadratic monomial coefficients
    second: list[dict[tuple[int, int], Expr]] = []
    for a, poly in enumerate(polys, start=1):
        coeffs = collect_coefficients(poly, ux)
        table: dict[tuple[int, int], Expr] = {}
        eta_sym = OpaqueSymbol(f"eta{a}", (T_ATOM, X_ATOM) + tuple(u_atoms))
        for b in range(1, m + 1):
            for c in range(b, m + 1):
                mono = Expr.from_atom(ux[b - 1]) * Expr.from_atom(ux[c - 1])
                coeff = coeffs.get(mono, ZERO)
                atom = OpaqueDeriv(eta_sym, _orders_for(m, b, c))
                # the quadratic coefficient always carries -1 or -2 times the
                # Hessian entry, so a vanishing coefficient means a broken ansatz
                table[(b, c)] = _solve_linear_atom(coeff, atom)
        second.append(table)

    obstructions: list[list[Fraction]] = []
    for table in second:
        for (b, c), val_bc in table.items():
            for d in range(1, m + 1):
                lo, hi = min(b, d), max(b, d)
                diff = partial_derivative(val_bc, u_atoms[d - 1]) - \
                    partial_derivative(table[(lo, hi)], u_atoms[c - 1])
                for part in _kappa_poly_parts(diff, kappa_atom).values():
                    coeffs = kappa_poly_coefficients(part)
                    if any(coeffs):
                        obstructions.append(coeffs)
    return obstructions


def _orders_for(m: int, b: int, c: int) -> tuple[int, ...]:
    orders = [0] * (m + 2)
    orders[1 + b] += 1
    orders[1 + c] += 1
    return tuple(orders)


def _kappa_obstructions_single() -> list[list[Fraction]]:
    field, kappa_atom, (u_atom,) = _kappa_ansatz(1)
    poly = determining_polynomials(1, field)[0]
    k = field.tier
    ux = JetCoord(k, 1, nx=1)
    coeffs = collect_coefficients(poly, [ux])
    eta_sym = OpaqueSymbol("eta1", (T_ATOM, X_ATOM, u_atom))
    quad = coeffs.get(Expr.from_atom(ux) ** 2, ZERO)
    eta_uu = _solve_linear_atom(quad, OpaqueDeriv(eta_sym, (0, 0, 2)))

    # integrate eta_uu twice in u_1 (polynomial quadrature), with fresh
    # integration "constants" depending on (t, x)
    u = Expr.from_atom(u_atom)
    eta = _integrate_poly(_integrate_poly(eta_uu, u_atom), u_atom)
    eta = eta + OpaqueSymbol("c0", (T_ATOM, X_ATOM)).expr() * u \
        + OpaqueSymbol("e0", (T_ATOM, X_ATOM)).expr()
    solved_field = VectorField(1, k, ONE, field.xi, (eta,), name="kappa-solved")
    poly2 = determining_polynomials(1, solved_field)[0]

    obstructions = []
    for mono, coeff in collect_coefficients(poly2, [u_atom, ux]).items():
        try:
            coeffs = kappa_poly_coefficients(coeff)
        except ExtractionError:
            continue
        if any(coeffs):
            obstructions.append(coeffs)
    if not obstructions:
        raise ExtractionError("m=1: no pure kappa coefficient in the reduced polynomial")
    return obstructions


def _integrate_poly(e: Expr, atom: JetCoord) -> Expr:
    """Antiderivative in a jet coordinate of a polynomial expression."""
    out = ZERO
    for mono, c in e._terms.items():
        power = 0
        rest = []
        for a, n in mono:
            if a == atom:
                power = n
            else:
                if isinstance(a, OpaqueDeriv) and atom in a.symbol.args:
                    raise NonPolynomialError(f"cannot integrate {a.render()} in {atom.render()}")
                rest.append((a, n))
        term = Expr({tuple(rest): c}) * Expr.from_atom(atom) ** (power + 1)
        out = out + term / (power + 1)
    return out
