#!/usr/bin/env python3
"""Oracle for the rotation counterexample of the transport check.

For the fixture loop tau(z) = exp(S(z)) in SU(2), with
S(z) = sum_k a_k cos(2 pi k z) + b_k sin(2 pi k z), it computes

    y = 2 * int_0^1 <tau'(z) tau(z)^-1, tau'(z) tau(z)^-1> dz,
    <X, Y> = -level * Re tr(X Y),

using the exact Frechet derivative of the matrix exponential and adaptive
quadrature, cross-checked against a 4096-point periodic trapezoid rule.

Usage: python3 oracles/rotation_counterexample.py > crates/looplab/fixtures/rotation_counterexample.json
"""
import json
import sys

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm, expm_frechet

COMMAND = "python3 oracles/rotation_counterexample.py > crates/looplab/fixtures/rotation_counterexample.json"
LEVEL = 1.0

# Coordinates in the basis (i sigma_1, i sigma_2, i sigma_3), modes k = 1, 2, 3.
COS = [[0.21, -0.13, 0.08], [0.05, 0.07, -0.04], [-0.02, 0.01, 0.03]]
SIN = [[-0.11, 0.17, 0.12], [0.06, -0.03, 0.05], [0.015, -0.025, 0.01]]

SIGMA = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]
BASIS = [1j * s for s in SIGMA]


def algebra(coords):
    return sum(c * b for c, b in zip(coords, BASIS))


def exponent(z):
    s = np.zeros((2, 2), dtype=complex)
    for k, (a, b) in enumerate(zip(COS, SIN), start=1):
        w = 2 * np.pi * k * z
        s += np.cos(w) * algebra(a) + np.sin(w) * algebra(b)
    return s


def exponent_derivative(z):
    s = np.zeros((2, 2), dtype=complex)
    for k, (a, b) in enumerate(zip(COS, SIN), start=1):
        kk = 2 * np.pi * k
        w = kk * z
        s += -kk * np.sin(w) * algebra(a) + kk * np.cos(w) * algebra(b)
    return s


def integrand(z):
    tau, dtau = expm_frechet(exponent(z), exponent_derivative(z))
    r = dtau @ np.linalg.inv(tau)
    return 2.0 * (-LEVEL * np.real(np.trace(r @ r)))


def main():
    y, err = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=400)
    grid = np.arange(4096) / 4096
    y_trap = float(np.mean([integrand(z) for z in grid]))
    if abs(y - y_trap) > 1e-11 * abs(y):
        sys.exit(f"quadrature disagreement: {y} vs {y_trap}")
    # Sanity check of the exponential itself against the Frechet pair.
    assert np.allclose(expm(exponent(0.3)), expm_frechet(exponent(0.3), exponent_derivative(0.3))[0])
    out = {
        "command": COMMAND,
        "n": 2,
        "cos": COS,
        "sin": SIN,
        "level": LEVEL,
        "y": y,
        "quad_error_estimate": err,
        "trapezoid_4096": y_trap,
    }
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
