"""High-precision reference values frozen into the Rust tests.

Run with `python3 oracle.py`; requires mpmath. Every quantity is computed
from explicit 2x2 matrices at 60 digits, independent of the f64 code paths.
"""
import mpmath as mp

mp.mp.dps = 60


def D(s):
    return mp.matrix([[mp.e ** (s / 2), 0], [0, mp.e ** (-s / 2)]])


def translation(k1, k2, m):
    g = mp.matrix([[k2, k1], [1, 1]])
    return g * D(m) * g ** -1


def tr(m):
    return (m[0, 0] + m[1, 1]) / mp.sqrt(mp.det(m))


def length(m):
    return 2 * mp.acosh(abs(tr(m)) / 2)


def fixed_points(m):
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    disc = mp.sqrt((a - d) ** 2 + 4 * b * c)
    r1 = ((a - d) + disc) / (2 * c)
    r2 = ((a - d) - disc) / (2 * c)
    return sorted([r1, r2])


def handle(l, boundaries=(1, 1, 1, 1)):
    k1 = mp.cosh(mp.mpf(boundaries[0]) / 2) + mp.cosh(mp.mpf(boundaries[1]) / 2)
    k2 = mp.cosh(mp.mpf(boundaries[2]) / 2) + mp.cosh(mp.mpf(boundaries[3]) / 2)
    kappa = mp.sqrt(k1 * k2)
    return 2 * mp.asinh(kappa / mp.sinh(l / 2))


def dual(l, twist, j):
    h = handle(l)
    p = mp.matrix([[mp.cosh(h / 2), mp.sinh(h / 2)], [mp.sinh(h / 2), mp.cosh(h / 2)]])
    m = D(twist + j * l) * p
    s = twist + j * l
    u = -l * mp.floor(s / (2 * l))
    return D(u) * m * D(-u)


print("hexagon_side(1,1,1) =", mp.nstr(mp.acosh((mp.cosh(1) + mp.cosh(1) ** 2) / mp.sinh(1) ** 2), 20))
a = mp.acosh(2)
print("hexagon_side(acosh2 x3) =", mp.nstr(mp.acosh((mp.cosh(a) + mp.cosh(a) ** 2) / mp.sinh(a) ** 2), 20))

l = mp.mpf("0.1")
k1, k2 = -mp.e ** -10, mp.e ** 10
e = translation(k1, k2, l) * D(-l)
print("excess(m=l=0.1, e^-10, e^10) =", mp.nstr(tr(e) - 2, 20))

s = translation(-2, -1, 1)
t = translation(1, 2, 1)
print("tau(S.T) axes (-2,-1),(1,2) =", mp.nstr(length(s * t), 20))
t_rev = translation(2, 1, 1)
print("tau(S.T_rev) =", mp.nstr(length(s * t_rev), 20))

print("l(Dual0), central=boundaries=1 =", mp.nstr(length(dual(mp.mpf(1), 0, 0)), 20))

for k in [10, 20, 50, 100]:
    l = mp.mpf(1) / k
    w = k * k
    m = dual(l, 0, w)
    q1, q2 = fixed_points(m)
    earth = translation(q1, q2, l)  # t * omega = 2 * l / 2
    ratio = length(earth * D(-l)) / l
    print(f"sec8 k={k}: ratio={mp.nstr(ratio, 20)} ratio*e^(k/2)={mp.nstr(ratio * mp.e ** (k / 2), 20)}")
