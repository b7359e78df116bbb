#!/usr/bin/env python3
# Build the coupled Burgers-like systems for several sizes, show how each
# one is the last row of a single matrix Burgers equation, and print the
# conditional-symmetry vector field that links it to the next system.

from burgers_hierarchy import (
    build_companion,
    build_delta,
    build_symmetry_field,
    companion_row_permutation,
    matrix_burgers_residual,
)

for m in (1, 2, 3):
    system = build_delta(m)
    print(f"\n=== {m} component(s), tier {system.tier} ===")
    for r in system.residuals:
        print(f"  {r} = 0")

    print("companion matrix:")
    for row in build_companion(m):
        print("  [" + ", ".join(str(e) for e in row) + "]")

    # O_t + O_x O - O_xx: every row but the last vanishes identically,
    # and the last row carries the system in reversed component order
    residual = matrix_burgers_residual(m)
    upper_zero = all(e.is_zero() for row in residual[:m - 1] for e in row)
    perm = companion_row_permutation(m)
    last_matches = all(
        residual[m - 1][j] == system.residuals[perm[j] - 1] for j in range(m)
    )
    print(f"matrix Burgers residual: rows 1..{m - 1} zero: {upper_zero}; "
          f"last row = equations {perm}: {last_matches}")

    field = build_symmetry_field(m)
    print("conditional symmetry field (tau = 1):")
    print(f"  xi  = {field.xi}")
    for a, eta in enumerate(field.etas, start=1):
        print(f"  eta{a} = {eta}")
