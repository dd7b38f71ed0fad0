"""Reference values for the unit tests, computed with mpmath from closed forms.

Run: python3 tests/oracles/compute_oracles.py
"""
from mpmath import mp, mpf, cos, pi, sqrt, gamma, legendre

mp.dps = 30


def ring_scale(n, k):
    nu = mpf(n - 2) / 2
    s = sum((1 - cos(2 * pi * l / k)) ** (-nu) for l in range(1, k))
    return s ** (-1 / nu)


def bubble(n, r):
    return (n * (n - 2)) ** (mpf(n - 2) / 4) * (1 + r * r) ** (-mpf(n - 2) / 2)


def bubble_energy(n):
    s = pi * n * (n - 2) * (gamma(mpf(n) / 2) / gamma(n)) ** (mpf(2) / n)
    return s ** (mpf(n) / 2) / n


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def ball_green3(x, y):
    d = sqrt(dot([a - b for a, b in zip(x, y)], [a - b for a, b in zip(x, y)]))
    q = dot(x, x) * dot(y, y) - 2 * dot(x, y) + 1
    return (1 / d - 1 / sqrt(q)) / (4 * pi)


def annulus_green3(x, y, delta):
    # ball Green's function minus the harmonic w with w = 0 on |x| = 1 and
    # w = G_ball on |x| = delta, expanded in Legendre polynomials about y
    r, q = sqrt(dot(x, x)), sqrt(dot(y, y))
    t = dot(x, y) / (r * q)

    def term(l):
        g = (delta ** l / q ** (l + 1) - delta ** l * q ** l) / (4 * pi)
        c = g / (delta ** l - delta ** (-l - 1))
        return c * (r ** l - r ** (-l - 1)) * legendre(l, t)

    # plain partial sum: the terms decay geometrically, and extrapolating
    # summation is unreliable when the odd Legendre terms vanish
    return ball_green3(x, y) - sum(term(l) for l in range(200))


def phi_antipodal_ball3(s):
    robin = 1 / (4 * pi * (1 - s * s))
    g = (1 / (2 * s) - 1 / (1 + s * s)) / (4 * pi)
    return robin - g


def zeta(n, eps):
    p = mpf(n + 2) / (n - 2)
    return eps ** (eps * p / (2 * (p - 1 + eps))) - 1


if __name__ == "__main__":
    for n, k in [(3, 8), (4, 8), (5, 8), (3, 16), (4, 32)]:
        print(f"ring_scale n={n} k={k}: {mp.nstr(ring_scale(n, k), 17)}")
    for n in (3, 4, 5):
        print(f"bubble n={n} r=0: {mp.nstr(bubble(n, 0), 17)}  r=0.7: {mp.nstr(bubble(n, mpf('0.7')), 17)}")
        print(f"bubble energy n={n}: {mp.nstr(bubble_energy(n), 17)}")
    pts = [([mpf('0.3'), mpf('0.1'), mpf('-0.2')], [mpf('-0.4'), mpf('0.25'), mpf('0.1')]),
           ([mpf('0.6'), 0, 0], [0, mpf('0.5'), mpf('0.2')])]
    for x, y in pts:
        print(f"ball G {x} {y}: {mp.nstr(ball_green3(x, y), 17)}")
        print(f"annulus(0.2) G {x} {y}: {mp.nstr(annulus_green3(x, y, mpf('0.2')), 17)}")
    print(f"annulus(0.05) G along axis: {mp.nstr(annulus_green3([mpf('0.1'), 0, 0], [mpf('-0.1'), 0, 0], mpf('0.05')), 17)}")
    print(f"phi antipodal ball s=0.5: {mp.nstr(phi_antipodal_ball3(mpf('0.5')), 17)}")
    print(f"zeta n=3 eps=0.02: {mp.nstr(zeta(3, mpf('0.02')), 17)}")
