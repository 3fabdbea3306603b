#!/usr/bin/env python3
"""Oracle for closed-form reference values used by the unit tests.

* Pauli data: the brackets [i s_a, i s_b] as matrices and the Gram matrix of
  <X, Y> = -level * Re tr(X Y) on the basis (i s_1, i s_2, i s_3).
* Loop integrals for tau(z) = exp(2 pi z i s3), evaluated by adaptive
  quadrature of the defining integrands:
    Z(tau, X)  = 2 int <tau' tau^-1, X> dz       with X = i s3,
    beta(tau)  = int <tau^-1 tau', X> dz          with X = i s3,
    omega(X,Y) = 2 int <X, Y'> dz  with X = sin(2 pi z) i s1, Y = cos(2 pi z) i s1.
* Band-limited trigonometric polynomials with their exact integrals over
  [0, 1], for the trapezoid-rule exactness test.

Usage: python3 oracles/closed_forms.py > crates/looplab/fixtures/closed_forms.json
"""
import json

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

COMMAND = "python3 oracles/closed_forms.py > crates/looplab/fixtures/closed_forms.json"
LEVEL = 1.0
SIGMA = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]
BASIS = [1j * s for s in SIGMA]


def pair(x, y):
    return -LEVEL * np.trace(x @ y).real


def matrix_json(m):
    return [[[z.real, z.imag] for z in row] for row in m]


def integrate(f):
    value, _ = quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    return value


def loop_integrals():
    x = BASIS[2]
    tau = lambda z: expm(2 * np.pi * z * x)
    # tau' = tau * 2 pi x, so both logarithmic derivatives equal 2 pi x.
    dtau = lambda z: tau(z) @ (2 * np.pi * x)
    z_val = integrate(lambda z: 2 * pair(dtau(z) @ np.linalg.inv(tau(z)), x))
    beta = integrate(lambda z: pair(np.linalg.inv(tau(z)) @ dtau(z), x))
    e = BASIS[0]
    omega = integrate(
        lambda z: 2 * pair(np.sin(2 * np.pi * z) * e, -2 * np.pi * np.sin(2 * np.pi * z) * e)
    )
    return {"z_torus": z_val, "beta_torus": beta, "cocycle_sin_cos": omega}


def band_limited():
    rng = np.random.default_rng(7)
    out = []
    for modes in (3, 8, 16):
        a = rng.normal(size=modes + 1).tolist()
        b = [0.0] + rng.normal(size=modes).tolist()

        def f(z, a=a, b=b):
            return sum(
                a[k] * np.cos(2 * np.pi * k * z) + b[k] * np.sin(2 * np.pi * k * z)
                for k in range(len(a))
            )

        out.append({"modes": modes, "cos": a, "sin": b, "integral": integrate(f)})
    return out


def main():
    brackets = {}
    gram = []
    for i, x in enumerate(BASIS):
        gram.append([pair(x, y) for y in BASIS])
        for j, y in enumerate(BASIS):
            if i < j:
                brackets[f"{i + 1}{j + 1}"] = matrix_json(x @ y - y @ x)
    out = {
        "command": COMMAND,
        "level": LEVEL,
        "pauli_brackets": brackets,
        "gram": gram,
        "loops": loop_integrals(),
        "band_limited": band_limited(),
    }
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
