# eps0 = 0 values of t^2 lambda^{-1/2} e2, assembled from scratch in mpmath.
# Pure power: lambda = t^-4.5, kappa = nu, omegas constant, so the time
# operator on omega_j h_j(R) is m^2 - m with m = 2 nu - (1 + nu) D.
# f' uses (pt1 I2 - pt2 I1)' = pt1' I2 - pt2' I1, f'' comes from L0 f = g.
import os
import sys

import mpmath as mp

sys.path.insert(0, os.path.dirname(__file__))
from correction_one_oracle import pt1, pt2, g1, g2, breaks  # noqa: E402
from correction_two_oracle import series_coeffs, level0  # noqa: E402
import sympy as sp  # noqa: E402

mp.mp.dps = 30
nu = mp.mpf('3.5')
om = [(nu + 1) / 2, (nu + 1) ** 2 / 36]
b1s = [-mp.sqrt(3) / 2, 9 * mp.sqrt(3) / 2]
b2s = [15 * mp.pi / 4, -mp.mpf('67.5') * mp.pi]
c1 = mp.mpf('-0.45669308402695006763')
c2 = mp.mpf('-1652.5575027892012968')


def W(R): return (1 + R * R / 3) ** mp.mpf(-0.5)


def fderivs(g, R):
    R = mp.mpf(R)
    b = breaks(R)
    I1 = mp.quad(lambda x: pt1(x) * x * g(x), b)
    I2 = mp.quad(lambda x: pt2(x) * x * g(x), b)
    N = pt1(R) * I2 - pt2(R) * I1
    dN = mp.diff(pt1, R) * I2 - mp.diff(pt2, R) * I1
    f = N / R
    f1 = dN / R - N / R ** 2
    f2 = g(R) - 2 * f1 / R - 5 * W(R) ** 4 * f
    return f, f1, f2


def q(a, nuval, linear, coef):
    a = mp.mpf(a)
    if a < mp.mpf('0.01'):
        cs = series_coeffs(sp.Rational(nuval), linear, 12)
        return coef * sum(mp.mpf(sp.Rational(x)) * a ** i for i, x in enumerate(cs) if x != 0)
    return coef * level0(nuval, linear, [a])[0][0]


def e2n(t, R):
    t, R = mp.mpf(t), mp.mpf(R)
    lam = t ** (-1 - nu)
    mu = t * lam
    P0, P1, P2 = 4 * nu * nu - 2 * nu, (1 + nu) * (1 - 4 * nu), (1 + nu) ** 2
    tails = 0
    V1 = 0
    for j, g in enumerate((g1, g2)):
        f, fp, fpp = fderivs(g, R)
        h = f - b1s[j] * R - b2s[j]
        hp = fp - b1s[j]
        Dh = h / 2 + R * hp
        DDh = h / 4 + 2 * R * hp + R * R * fpp
        tails += om[j] * (P0 * h + P1 * Dh + P2 * DDh)
        V1 += om[j] * f
    V1 /= mu ** 2
    Wv = W(R)
    a = R / mu
    V2 = q(a, '1.25', True, c1) / mu + q(a, '4.75', False, c2) / mu ** 2
    U1 = Wv + V1
    nl1 = mu ** 2 * ((U1 ** 5) - Wv ** 5 - 5 * Wv ** 4 * V1)
    nl2 = mu ** 2 * ((U1 + V2) ** 5 - U1 ** 5)
    return tails / mu ** 2 - nl1 - nl2


if __name__ == '__main__':
    out = os.path.join(os.path.dirname(__file__), '..', 'fixtures', 'e2_eps0_zero.csv')
    with open(out, 'w') as fh:
        fh.write('t,R,e2n\n')
        for t, Rs in (('0.2', ['0.5', '3', '14', '56', '140', '223']),
                      ('0.05', ['0.5', '3', '40', '1800', '17900'])):
            for R in Rs:
                v = e2n(t, R)
                print(t, R, mp.nstr(v, 20))
                fh.write('%s,%s,%s\n' % (t, R, mp.nstr(v, 17)))
