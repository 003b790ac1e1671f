"""Independent reference values for the champagne-bottle radial integrals.

Uses scipy's adaptive quadrature directly in r with algebraic endpoint
weights, so it shares no code path with the library's Gauss-Legendre
substitution rule. Run: python3 champagne_oracle.py
"""
import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq


def roots_in_s(E, j):
    # 2 r^2 (E - V) = -2 s^3 + 2 s^2 + 2 E s - j^2 with s = r^2; one root is negative
    return sorted(np.roots([-2.0, 2.0, 2.0 * E, -j * j]).real)


def radial(E, j):
    s0, s_in, s_out = roots_in_s(E, j)
    a, b = np.sqrt(s_in), np.sqrt(s_out)
    # p_r^2 = 2 (s - s0)(s - s_in)(s_out - s) / s; (r - a)(b - r) goes into the algebraic weight
    g = lambda r: 2 * (r * r - s0) * (r + a) * (r + b) / (r * r)
    I = quad(lambda r: np.sqrt(g(r)), a, b, weight="alg", wvar=(0.5, 0.5), epsabs=1e-14, epsrel=1e-13)[0] / np.pi
    T = 2 * quad(lambda r: 1 / np.sqrt(g(r)), a, b, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-14, epsrel=1e-13)[0]
    Th = 2 * j * quad(lambda r: 1 / (r**2 * np.sqrt(g(r))), a, b, weight="alg", wvar=(-0.5, -0.5),
                      epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    return I, T, Th


if __name__ == "__main__":
    for E, j in [(1.0, 0.5), (0.1, 0.05), (-0.1, 0.02), (-0.2, -0.1), (0.0, 0.15), (0.5, -0.3), (0.12, 0.01)]:
        I, T, Th = radial(E, j)
        print(f"{{{E!r}, {j!r}, {I:.12f}, {T:.12f}, {Th:.12f}}},")
