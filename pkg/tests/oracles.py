"""Straight-line reference formulas for every observable.

Written separately from the library, using only the math module, so that
value comparisons in the tests check two independent transcriptions of
the same closed forms rather than one code path against itself.
"""
import math


def ck(kap, x):
    if kap > 0.0:
        return math.cos(math.sqrt(kap) * x)
    if kap < 0.0:
        return math.cosh(math.sqrt(-kap) * x)
    return 1.0


def sk(kap, x):
    if kap > 0.0:
        return math.sin(math.sqrt(kap) * x) / math.sqrt(kap)
    if kap < 0.0:
        return math.sinh(math.sqrt(-kap) * x) / math.sqrt(-kap)
    return x


def tk(kap, x):
    return sk(kap, x) / ck(kap, x)


# State layout everywhere: s = (r, theta, phi, p_r, p_theta, p_phi).

def p1(kap, s):
    r, th, ph, pr, pth, pph = s
    ct = ck(kap, r) / sk(kap, r)
    return (math.sin(th) * math.cos(ph) * pr
            + ct * (math.cos(th) * math.cos(ph) * pth
                    - (math.sin(ph) / math.sin(th)) * pph))


def p2(kap, s):
    r, th, ph, pr, pth, pph = s
    ct = ck(kap, r) / sk(kap, r)
    return (math.sin(th) * math.sin(ph) * pr
            + ct * (math.cos(th) * math.sin(ph) * pth
                    + (math.cos(ph) / math.sin(th)) * pph))


def p3(kap, s):
    r, th, ph, pr, pth, pph = s
    ct = ck(kap, r) / sk(kap, r)
    return math.cos(th) * pr - ct * math.sin(th) * pth


def noether(i, kap, s):
    return (p1, p2, p3)[i - 1](kap, s)


def j1(s):
    r, th, ph, pr, pth, pph = s
    return -(math.sin(ph) * pth + (math.cos(th) / math.sin(th)) * math.cos(ph) * pph)


def j2(s):
    r, th, ph, pr, pth, pph = s
    return math.cos(ph) * pth - (math.cos(th) / math.sin(th)) * math.sin(ph) * pph


def j3(s):
    return s[5]


def angular(i, s):
    return (j1, j2, j3)[i - 1](s)


def jsq(s):
    return j1(s) ** 2 + j2(s) ** 2 + j3(s) ** 2


def dircos(axis, s):
    th, ph = s[1], s[2]
    return (math.sin(th) * math.cos(ph),
            math.sin(th) * math.sin(ph),
            math.cos(th))[axis - 1]


def coord(axis, kap, s):
    return sk(kap, s[0]) * dircos(axis, s)


def kinetic(kap, s):
    r, th, ph, pr, pth, pph = s
    return 0.5 * (pr ** 2 + (pth ** 2 + pph ** 2 / math.sin(th) ** 2) / sk(kap, r) ** 2)


# Potentials.

def v_oscillator(kap, alpha, s):
    return 0.5 * alpha ** 2 * tk(kap, s[0]) ** 2


def v_kepler(kap, k, s):
    return k * ck(kap, s[0]) / sk(kap, s[0])


def v_couplings(kap, ks, s):
    out = 0.0
    for axis, ki in enumerate(ks, start=1):
        if ki != 0.0:
            out += ki / coord(axis, kap, s) ** 2
    return out


def h_free(kap, s):
    return kinetic(kap, s)


def h_oscillator(kap, alpha, s):
    return kinetic(kap, s) + v_oscillator(kap, alpha, s)


def h_sw(kap, alpha, ks, s):
    return h_oscillator(kap, alpha, s) + v_couplings(kap, ks, s)


def h_kepler(kap, k, s):
    return kinetic(kap, s) + v_kepler(kap, k, s)


def h_kepler123(kap, k, ks, s):
    return h_kepler(kap, k, s) + v_couplings(kap, ks, s)


# Isotropic oscillator family.

def osc_k(i, j, kap, alpha, s):
    pi = noether(i, kap, s)
    pj = noether(j, kap, s)
    t2 = tk(kap, s[0]) ** 2
    return pi * pj + alpha ** 2 * t2 * dircos(i, s) * dircos(j, s)


def osc_w(i, kap, alpha, s):
    j, l = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[i]
    return (osc_k(j, j, kap, alpha, s) + osc_k(l, l, kap, alpha, s)
            + kap * (angular(j, s) ** 2 + angular(l, s) ** 2))


def osc_m(j, kap, alpha, s):
    return complex(noether(j, kap, s), alpha * tk(kap, s[0]) * dircos(j, s))


# Smorodinsky-Winternitz style couplings.

def sw_k(i, kap, alpha, ks, s):
    base = osc_k(i, i, kap, alpha, s)
    ki = ks[i - 1]
    return base + 2.0 * ki / (tk(kap, s[0]) * dircos(i, s)) ** 2


def sw_kj(i, kap, ks, s):
    k1, k2, k3 = ks
    x, y, z = coord(1, kap, s), coord(2, kap, s), coord(3, kap, s)
    j = angular(i, s)
    if i == 1:
        return j * j + 2.0 * (k2 * z * z / (y * y) + k3 * y * y / (z * z))
    if i == 2:
        return j * j + 2.0 * (k1 * z * z / (x * x) + k3 * x * x / (z * z))
    return j * j + 2.0 * (k1 * y * y / (x * x) + k2 * x * x / (y * y))


def sw_w(i, kap, alpha, ks, s):
    j, l = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[i]
    return (sw_k(j, kap, alpha, ks, s) + sw_k(l, kap, alpha, ks, s)
            + kap * (sw_kj(j, kap, ks, s) + sw_kj(l, kap, ks, s)))


# 1:1:2 anisotropic oscillator.

def osc112_az(kap, s):
    u = tk(kap, s[0]) * math.cos(s[1])
    return u / (1.0 - kap * u * u)


def osc112_v(kap, alpha, k1, k2, s):
    x, y = coord(1, kap, s), coord(2, kap, s)
    w = x * x + y * y
    main = 0.5 * alpha ** 2 * (w + 4.0 * osc112_az(kap, s) ** 2) / (1.0 - kap * w)
    return main + k1 / (x * x) + k2 / (y * y)


def osc112_h(kap, alpha, k1, k2, s):
    return kinetic(kap, s) + osc112_v(kap, alpha, k1, k2, s)


def osc112_k3(kap, alpha, s):
    return p3(kap, s) ** 2 + 4.0 * alpha ** 2 * osc112_az(kap, s) ** 2


def osc112_kj3(kap, k1, k2, s):
    x, y = coord(1, kap, s), coord(2, kap, s)
    return j3(s) ** 2 + 2.0 * k2 * (x / y) ** 2 + 2.0 * k1 * (y / x) ** 2


def osc112_k12(kap, alpha, k1, k2, s):
    x, y = coord(1, kap, s), coord(2, kap, s)
    a = osc112_az(kap, s)
    w = x * x + y * y
    t = w / (1.0 - kap * w)
    return (p1(kap, s) ** 2 + kap * j1(s) ** 2
            + p2(kap, s) ** 2 + kap * j2(s) ** 2
            + alpha ** 2 * (1.0 + 4.0 * kap * a * a) * t
            + 2.0 * k2 * (1.0 - kap * x * x) / (y * y)
            + 2.0 * k1 * (1.0 - kap * y * y) / (x * x))


def osc112_krl1(kap, alpha, k1, s):
    x, z = coord(1, kap, s), coord(3, kap, s)
    th, ph = s[1], s[2]
    val = (-p1(kap, s) * j2(s)
           + alpha ** 2 * (math.tan(th) * math.cos(ph) / ck(kap, s[0]))
           * osc112_az(kap, s) ** 2 * x)
    if k1 != 0.0:
        val -= 2.0 * k1 * ck(kap, s[0]) * z / (x * x)
    return val


def osc112_krl2(kap, alpha, k2, s):
    y, z = coord(2, kap, s), coord(3, kap, s)
    th, ph = s[1], s[2]
    val = (p2(kap, s) * j1(s)
           + alpha ** 2 * (math.tan(th) * math.sin(ph) / ck(kap, s[0]))
           * osc112_az(kap, s) ** 2 * y)
    if k2 != 0.0:
        val -= 2.0 * k2 * ck(kap, s[0]) * z / (y * y)
    return val


# Kepler family.

def kepler_rl(i, kap, k, s):
    j, l = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[i]
    return (noether(j, kap, s) * angular(l, s)
            - noether(l, kap, s) * angular(j, s)
            + k * dircos(i, s))


def k123_r(i, kap, k, ks, s):
    u = v_couplings(kap, ks, s)
    return (kepler_rl(i, kap, k, s)
            + 2.0 * ck(kap, s[0]) * sk(kap, s[0]) * dircos(i, s) * u)


def k123_s(i, kap, s):
    return s[3] * sk(kap, s[0]) / coord(i, kap, s)


def k123_kr(i, kap, k, ks, s):
    ki = ks[i - 1]
    return k123_r(i, kap, k, ks, s) ** 2 + 2.0 * ki * k123_s(i, kap, s) ** 2


def k123_n(i, kap, k, ks, s):
    ki = ks[i - 1]
    return complex(k123_r(i, kap, k, ks, s),
                   math.sqrt(2.0 * ki) * k123_s(i, kap, s))
