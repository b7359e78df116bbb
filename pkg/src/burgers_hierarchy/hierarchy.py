"""Coupled Burgers-like systems and their companion-matrix form.

For m components at tier k = ceil(m/2), the system has residuals

    u_a,t + u_a * u_1,x - u_a,xx + u_{a+1},x     (a = 1..m-1)
    u_m,t + u_m * u_1,x - u_m,xx

Every component is advected by the first one and forced by the x
derivative of the next.  The same system is the last row of a single
matrix Burgers equation built from the m x m companion matrix with
superdiagonal ones and last row (u_m, ..., u_1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

from .symcore import (
    Expr,
    JetCoord,
    ONE,
    SubstitutionMap,
    ZERO,
    jet,
    partial_derivative,
    relabel_tiers,
    total_derivative,
)


def tier_of(m: int) -> int:
    return math.ceil(m / 2)


def _check_m(m: int):
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")


@dataclass(frozen=True)
class PdeSystem:
    """Ordered residuals of the m-component system, each solved for the
    time derivative of its own component."""

    m: int
    tier: int
    residuals: tuple[Expr, ...]
    solved_for: tuple[JetCoord, ...]

    def __post_init__(self):
        if len(self.residuals) != self.m or len(self.solved_for) != self.m:
            raise ValueError("need one residual and one solved coordinate per component")
        for a, (res, lead) in enumerate(zip(self.residuals, self.solved_for), start=1):
            if lead != JetCoord(self.tier, a, nt=1):
                raise ValueError(f"equation {a} must be solved for its own time derivative")
            if partial_derivative(res, lead) != ONE:
                raise ValueError(f"equation {a}: coefficient of {lead.render()} is not 1")
            for atom in res.atoms():
                if isinstance(atom, JetCoord) and atom.nt > 0 and atom != lead:
                    raise ValueError(f"equation {a} contains extra time derivative {atom.render()}")
            forcing = JetCoord(self.tier, a + 1, nx=1)
            has_forcing = not partial_derivative(res, forcing).is_zero()
            if has_forcing != (a < self.m):
                raise ValueError(f"equation {a}: forcing term {forcing.render()} mismatch")

    def solved_rules(self) -> SubstitutionMap:
        """Rewrite each u_a,t as the rest of its equation, negated."""
        return SubstitutionMap(
            (lead, Expr.from_atom(lead) - res)
            for lead, res in zip(self.solved_for, self.residuals)
        )

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "tier": self.tier,
            "residuals": [r.render() for r in self.residuals],
            "solved_for": [c.render() for c in self.solved_for],
        }


def build_delta(m: int, tier: int | None = None) -> PdeSystem:
    """The m-component system at tier ``tier`` (default ceil(m/2))."""
    _check_m(m)
    k = tier_of(m) if tier is None else tier
    residuals = []
    for a in range(1, m + 1):
        res = jet(k, a, nt=1) + jet(k, a) * jet(k, 1, nx=1) - jet(k, a, nx=2)
        if a < m:
            res = res + jet(k, a + 1, nx=1)
        residuals.append(res)
    solved = tuple(JetCoord(k, a, nt=1) for a in range(1, m + 1))
    return PdeSystem(m, k, tuple(residuals), solved)


def build_companion(m: int, tier: int | None = None) -> list[list[Expr]]:
    """m x m matrix with superdiagonal ones and last row (u_m, ..., u_1)."""
    _check_m(m)
    k = tier_of(m) if tier is None else tier
    rows = []
    for i in range(m - 1):
        rows.append([ONE if j == i + 1 else ZERO for j in range(m)])
    rows.append([jet(k, m - j) for j in range(m)])
    return rows


def matrix_burgers_residual(m: int, tier: int | None = None) -> list[list[Expr]]:
    """Entrywise O_t + O_x O - O_xx for the companion matrix O.

    Rows 1..m-1 vanish identically; row m carries the system residuals in
    reversed component order (see :func:`companion_row_permutation`).
    """
    omega = build_companion(m, tier)
    o_t = [[total_derivative(e, "t") for e in row] for row in omega]
    o_x = [[total_derivative(e, "x") for e in row] for row in omega]
    o_xx = [[total_derivative(e, "x") for e in row] for row in o_x]
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            prod = ZERO
            for l in range(m):
                prod = prod + o_x[i][l] * omega[l][j]
            row.append(o_t[i][j] + prod - o_xx[i][j])
        out.append(row)
    return out


def companion_row_permutation(m: int) -> list[int]:
    """Column j of the matrix residual's last row holds equation
    ``companion_row_permutation(m)[j]`` of the system (1-based)."""
    return [m - j for j in range(m)]


@dataclass(frozen=True)
class VectorField:
    """Infinitesimal generator tau*d/dt + xi*d/dx + sum eta_a*d/du_a over
    the m dependent variables of family ``tier``."""

    m: int
    tier: int
    tau: Expr
    xi: Expr
    etas: tuple[Expr, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.etas) != self.m:
            raise ValueError("need one eta per dependent variable")

    def apply_to(self, e: Expr) -> Expr:
        """First-order action on functions of (t, x, u_1..u_m)."""
        from .symcore import T_ATOM, X_ATOM

        out = self.tau * partial_derivative(e, T_ATOM)
        out = out + self.xi * partial_derivative(e, X_ATOM)
        for a, eta in enumerate(self.etas, start=1):
            out = out + eta * partial_derivative(e, JetCoord(self.tier, a))
        return out

    def to_json_dict(self) -> dict:
        d = {
            "m": self.m,
            "tier": self.tier,
            "tau": self.tau.render(),
            "xi": self.xi.render(),
            "etas": [e.render() for e in self.etas],
        }
        if self.name:
            d["name"] = self.name
        return d


def build_symmetry_field(m: int) -> VectorField:
    """The conditional-symmetry generator of the m-component system.

    tau is 1; xi and the eta_a are polynomials in the tier-k variables
    and m+2 fresh tier-(k+1) symbols (undifferentiated dependent
    variables of the follow-up system).  For m = 1 the eta formula drops
    the u_2*u_m term entirely, since there is no second component.
    """
    _check_m(m)
    k = tier_of(m)

    def u(a: int) -> Expr:
        return jet(k, a)

    def w(a: int) -> Expr:
        return jet(k + 1, a)

    xi = (w(1) - u(1)) / 2
    etas = []
    for a in range(1, m + 1):
        if a <= m - 2:
            e = (
                -u(1) ** 2 * u(a) - u(1) * u(a + 1) - u(2) * u(a)
                + w(1) * u(1) * u(a) + w(2) * u(a) + w(1) * u(a + 1)
                - u(a + 2) + w(a + 2)
            )
        elif a == m - 1:
            e = (
                -u(1) ** 2 * u(a) - u(1) * u(m) - u(2) * u(a)
                + w(1) * u(1) * u(a) + w(2) * u(a) + w(1) * u(m)
                + w(m + 1)
            )
        else:
            e = -u(1) ** 2 * u(m) + w(1) * u(1) * u(m) + w(2) * u(m) + w(m + 2)
            if m != 1:
                e = e - u(2) * u(m)
        etas.append(e / 4)
    return VectorField(m, k, ONE, xi, tuple(etas), name=f"conditional-{m}")


def degenerate_direction_rules(m: int) -> SubstitutionMap:
    """Identify the fresh symbols with the base variables (and zero out
    the last two); under these rules the symmetry field vanishes."""
    k = tier_of(m)
    rules = [(JetCoord(k + 1, a), jet(k, a)) for a in range(1, m + 1)]
    rules += [(JetCoord(k + 1, m + 1), ZERO), (JetCoord(k + 1, m + 2), ZERO)]
    return SubstitutionMap(rules)


def retier_system(system: PdeSystem, new_tier: int) -> PdeSystem:
    """Structural copy of the system with its jet tier relabeled."""
    mapping = {system.tier: new_tier}
    return PdeSystem(
        system.m,
        new_tier,
        tuple(relabel_tiers(r, mapping) for r in system.residuals),
        tuple(JetCoord(new_tier, c.alpha, c.nt, c.nx) for c in system.solved_for),
    )
