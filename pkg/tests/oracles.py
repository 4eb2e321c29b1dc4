"""Independent reference values for the tests.

Nothing here calls the characteristic-map or transport code of the package:
travel times come from fixed-step RK4 on dp/dxi = 1/w, flows from RK4 on
xi' = w(xi), and wave traces from d'Alembert's formula. The frozen numbers
were computed once with mpmath quadrature at 30 digits (or RK4 with 1e5
steps where a breakpoint spoils quadrature) and are pasted in as literals.
"""

import numpy as np

# case-3 wave speed: sqrt(T / rho) with the cubic blends on [0, 1], 1/xi beyond
CASE3_P = {
    0.5: 0.479307262064128658938784308954,
    1.0: 0.939085185420942337587694703573,
    2.0: 2.43908518542094233758769470357,
}
CASE3_FLOW_HALF_T1 = 1.4423744844132  # flow of the case-3 speed from xi = 0.5 for t = 1

# resolvent of (w x)' with w = 2 at theta = 1 applied to exp(-xi): exp(-xi) / 3
RESOLVENT_W2_AT_1 = 0.122626480390480773865174590054

# ||exp(-xi^2)||^2 on the half-line with unit weight, also ||(exp(-xi^2))'||^2
GAUSS_NORM_SQ = 0.626657068657750125603941321203


def case3_blends(xi):
    """(1/rho, T) of the case-3 string, written out independently of the package."""
    xi = np.asarray(xi, dtype=float)
    inner = xi < 1.0
    safe = np.where(inner, 1.0, xi)
    inv_rho = np.where(inner, 1.0 - xi ** 2 + xi ** 3, safe)
    stiff = np.where(inner, 1.0 + 3.0 * xi ** 2 - 3.0 * xi ** 3, safe ** -3.0)
    return inv_rho, stiff


def case3_speed(xi):
    a, b = case3_blends(xi)
    return np.sqrt(a * b)


def rk4(f, y0, t1, steps):
    """Classical RK4 for y' = f(t, y) from 0 to t1."""
    h = t1 / steps
    y = np.asarray(y0, dtype=float)
    t = 0.0
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def travel_time(w, xi, steps=4000):
    """int_0^xi 1/w by RK4 (Simpson on each step), vectorized over xi."""
    xi = np.asarray(xi, dtype=float)
    return rk4(lambda s, y: 1.0 / w(s * xi) * xi, np.zeros_like(xi), 1.0, steps)


def flow(w, xi0, t, steps=4000):
    """Solution of xi' = w(xi) from xi0 after time t."""
    return rk4(lambda s, y: w(y), np.asarray(xi0, dtype=float), t, steps)


def dalembert_wave_output(x1_0, x2_0, u, t):
    """Unit wave with velocity input at 0: x2(0, t) = x1_0(t) + x2_0(t) - u(t).

    State (x1, x2) = (momentum density, strain), x1_t = x2', x2_t = x1'. The
    sum x1 + x2 is constant along xi + t = const, so at xi = 0 it carries the
    initial data from xi = t; the boundary fixes x1(0, t) = u(t).
    """
    t = np.asarray(t, dtype=float)
    return x1_0(t) + x2_0(t) - u(t)


def gaussian(center, width, amp=1.0):
    return lambda xi: amp * np.exp(-((np.asarray(xi, dtype=float) - center) / width) ** 2)
