#!/usr/bin/env python3
"""Generate frozen reference values for the scaled complex error function.

Computes w(z) = exp(-z^2) * erfc(-i z), erf(z) and erfi(z) at 50 decimal
digits with mpmath and prints Rust arrays ready to paste into the test
module of `crates/core/src/faddeeva.rs`.

Usage: python3 tools/gen_special_function_reference.py
"""

import mpmath as mp

mp.mp.dps = 50


def w(z):
    return mp.exp(-z * z) * mp.erfc(-1j * z)


W_POINTS = [
    (0.0, 0.0),
    (0.25, 0.1),
    (1.0, 0.0),
    (0.0, 1.0),
    (0.5, -0.5),
    (-1.5, 2.0),
    (2.0, -1.0),
    (3.4, 0.01),
    (3.6, 0.001),
    (-3.6, 0.001),
    (3.55, 0.0),     # near a midpoint sample t_n, worst pole-cancellation case
    (4.0, 4.0),
    (5.0, -3.0),
    (-6.0, 0.5),
    (8.0, 0.0),
    (0.0, 8.0),
    (10.0, -10.0),
    (12.0, 1e-6),
    (1.0, -5.0),
    (20.0, 0.0),
    (25.0, 5.0),
    (29.0, 0.0),
    (-29.0, -0.1),
    (0.0, 29.0),
]

ERF_POINTS = [
    (1.0, 0.0),
    (0.3, 0.0),
    (2.0, 1.0),
    (-1.2, 0.7),
    (0.1, -0.2),
    (4.0, -2.0),
]

ERFI_POINTS = [
    (1.0, 0.0),
    (0.0, 1.0),
    (2.25, 1.0),     # typical wave-packet kernel argument scale
    (-1.3, 0.4),
    (3.0, -2.0),
    (5.0, 5.0),
]


def fmt(z):
    return f"({mp.nstr(z.real, 18, strip_zeros=False)}, {mp.nstr(z.imag, 18, strip_zeros=False)})"


def emit(name, points, fn):
    print(f"// {name}: (re z, im z, re f, im f)")
    print(f"const {name}: &[(f64, f64, f64, f64)] = &[")
    for x, y in points:
        z = mp.mpc(x, y)
        v = fn(z)
        print(
            f"    ({x!r}, {y!r}, {mp.nstr(v.real, 18)}, {mp.nstr(v.imag, 18)}),"
        )
    print("];")
    print()


emit("W_REFERENCE", W_POINTS, w)
emit("ERF_REFERENCE", ERF_POINTS, mp.erf)
emit("ERFI_REFERENCE", ERFI_POINTS, mp.erfi)
