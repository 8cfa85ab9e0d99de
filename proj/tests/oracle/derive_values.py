"""Independent dense-matrix reference for the frozen values in frozen_values.hpp.

Builds truncated ladder operators as Kronecker products, applies
e = (sum of modes)/sqrt(mode count) and evaluates <(e^dag)^N e^N>/N!.
Run: python3 tests/oracle/derive_values.py > tests/frozen_values.hpp
"""
import math
from functools import reduce

import mpmath
import numpy as np
from scipy.optimize import minimize


def ladder(cutoff):
    a = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    for n in range(1, cutoff + 1):
        a[n - 1, n] = math.sqrt(n)
    return a


def mode_ops(modes, cutoff):
    eye = np.eye(cutoff + 1)
    a = ladder(cutoff)
    ops = []
    for i in range(modes):
        ops.append(reduce(np.kron, [a if j == i else eye for j in range(modes)]))
    return ops


def ket(occ, cutoff):
    v = np.zeros((cutoff + 1) ** len(occ), dtype=complex)
    idx = 0
    for n in occ:
        idx = idx * (cutoff + 1) + n
    v[idx] = 1.0
    return v


def bilinear(bra, ket_, modes, order, cutoff):
    e = sum(mode_ops(modes, cutoff)) / math.sqrt(modes)
    en = np.linalg.matrix_power(e, order)
    return np.vdot(en @ bra, en @ ket_) / math.factorial(order)


def proto_1d(n, m, theta, phi):
    v = (np.exp(1j * m * phi) * ket([n - m, m], n)
         + np.exp(1j * ((n - m) * phi + theta)) * ket([m, n - m], n)) / math.sqrt(2)
    return v / np.linalg.norm(v)


def proto_2d(n, m, k, zeta, zbar, phi, chi):
    v = 0.5 * (np.exp(1j * m * phi) * ket([n - m, m, 0, 0], n)
               + np.exp(1j * ((n - m) * phi + zeta)) * ket([m, n - m, 0, 0], n)
               + np.exp(1j * k * chi) * ket([0, 0, n - k, k], n)
               + np.exp(1j * ((n - k) * chi + zbar)) * ket([0, 0, k, n - k], n))
    return v / np.linalg.norm(v)


def emit(name, value):
    print(f"inline constexpr double {name} = {float(value)!r};")


def emit_c(name, z):
    print(f"inline constexpr double {name}_re = {float(z.real)!r};")
    print(f"inline constexpr double {name}_im = {float(z.imag)!r};")


print("#pragma once")
print("// Generated by tests/oracle/derive_values.py; do not edit by hand.")
print()
print("namespace frozen")
print("{")

emit("kSinglePhotonRate", bilinear(ket([1, 0], 1), ket([1, 0], 1), 2, 1, 1).real)
for n in (1, 2, 3, 5):
    s = proto_1d(n, 0, 0.0, 0.0)
    emit(f"kNoonAtZeroN{n}", bilinear(s, s, 2, n, n).real)
s = proto_1d(2, 1, 0.0, 0.9)
emit("kDegenerateN2M1", bilinear(s, s, 2, 2, 2).real)
s = proto_1d(3, 1, 0.0, 1.3)
emit("kN3M1AtPhi1p3", bilinear(s, s, 2, 3, 3).real)

# Off-diagonal matrix elements at fixed draws.
for tag, (n, m, mp, th, thp, phi) in {
    "A": (5, 1, 2, 0.3, 1.1, 0.7),
    "B": (8, 0, 3, 2.0, 5.5, 4.1),
    "C": (6, 3, 1, 0.4, 3.0, 2.2),
}.items():
    emit_c(f"kElement1D{tag}", bilinear(proto_1d(n, m, th, phi), proto_1d(n, mp, thp, phi), 2, n, n))

for tag, (n, m, k, z, zb, mp, kp, zp, zbp, phi, chi) in {
    "A": (3, 0, 1, 0.2, 1.7, 1, 0, 2.9, 0.4, 0.8, 2.6),
    "B": (4, 2, 1, 0.0, 3.3, 1, 1, 5.0, 1.2, 4.4, 0.3),
}.items():
    emit_c(f"kElement2D{tag}", bilinear(proto_2d(n, m, k, z, zb, phi, chi),
                                        proto_2d(n, mp, kp, zp, zbp, phi, chi), 4, n, n))

# Two-order fixed-m superposition, each branch against its own moment.
phi = 0.0
b1 = proto_1d(1, 0, 0.0, phi) / math.sqrt(2)
b3 = proto_1d(3, 0, 0.0, phi) / math.sqrt(2)
emit("kFixedMOneThree", bilinear(b1, b1, 2, 1, 1).real + bilinear(b3, b3, 2, 3, 3).real)

# Equal-weight N=20 superposition of m=9 and m=5 at phi = pi/2 (mpmath, exact sums).
def fixed_n_rate_mp(n, ms, phi):
    amp = mpmath.mpc(0)
    for m in ms:
        c = mpmath.sqrt(mpmath.binomial(n, m))
        amp += c * (mpmath.expj(m * phi) + mpmath.expj((n - m) * phi)) / mpmath.sqrt(2) / mpmath.sqrt(len(ms))
    return abs(amp) ** 2 / mpmath.mpf(2) ** n

mpmath.mp.dps = 40
emit("kFig2AtHalfPi", fixed_n_rate_mp(20, (9, 5), mpmath.pi / 2))

# Trench h = 1.
emit("kTrenchA0", mpmath.mpf(1) / 2)
q_pen = sum(2 / mpmath.pi / (2 * q + 1) for q in range(5))
emit("kTrenchPenaltyQ", q_pen)
tail = 4 / mpmath.pi * (mpmath.pi ** 2 / 8 - sum(mpmath.mpf(1) / (2 * q + 1) ** 2 for q in range(5)))
emit("kTrenchDistanceD10", tail)
# Program exposure at phi = pi: sum c_n (1 + cos(n pi + theta_n)), theta_n = 0 or pi.
val = 0
for q in range(5):
    n = 2 * q + 1
    c = 2 / mpmath.pi / n
    th = 0 if q % 2 == 0 else mpmath.pi
    val += c * (1 + mpmath.cos(n * mpmath.pi + th))
emit("kTrenchProgramAtPi", val)
emit("kTrenchProgramResidual", tail + 2 * mpmath.pi * (mpmath.mpf(1) / 2 - q_pen) ** 2)

# 2D dark spot: N = 2, terms (0,0) and (1,0), amplitudes 1/sqrt(2), phases 0.
def dark(x):
    phi, chi = x
    s = (proto_2d(2, 0, 0, 0, 0, phi, chi) + proto_2d(2, 1, 0, 0, 0, phi, chi)) / math.sqrt(2)
    return bilinear(s, s, 4, 2, 2).real

best = minimize(dark, [2.0, 2.0], method="Nelder-Mead", options={"xatol": 1e-13, "fatol": 1e-30, "maxiter": 20000})
emit("kDarkSpotPhi", best.x[0])
emit("kDarkSpotChi", best.x[1])
emit("kDarkSpotRate", best.fun)

print("}  // namespace frozen")
