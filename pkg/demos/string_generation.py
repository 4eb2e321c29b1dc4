"""
When does a boundary feedback generate a semigroup?
===================================================

The infinite string with unit density and tension is controlled at xi = 0
through w1 * velocity + w2 * strain = u. We scan (w1, w2) and compare the
verdict with the closed form: a generator exactly when w1 != w2.
"""

import numpy as np

from phs.fixtures import vibrating_string_case3, vibrating_string_constant
from phs.hamiltonian import check_generation

pairs = [(1.0, 0.0), (0.0, 1.0), (1.0, -1.0), (1.0, 1.0), (2.0, 2.0), (0.3, 0.2)]
for w1, w2 in pairs:
    rep = check_generation(vibrating_string_constant(w1, w2).phs, with_assumptions=False)
    print(f"w1 = {w1:4.1f}  w2 = {w2:4.1f}  {rep.verdict:14s} sigma_min(U2) = {rep.sigma_min_U2:.3e}"
          f"  rank check agrees: {rep.cross_check_agrees}")

# the string with varying coefficients has the same values at xi = 0, hence the same verdicts
for w1, w2 in [(0.0, 1.0), (1.0, 1.0)]:
    rep = check_generation(vibrating_string_case3(w1, w2).phs)
    print(f"varying string, w1 = {w1}, w2 = {w2}: {rep.verdict}")
