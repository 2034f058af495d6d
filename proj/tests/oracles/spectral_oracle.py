# Shooting oracle for L = -d^2/dR^2 - 5 W^4 on the half line, phi(0)=0, phi'(0)=1.
# Bound state: dense scan of the decay functional on (-25, 0), then brentq,
# at two integrator tolerances.  Continuum: amplitude a(xi) from the free
# asymptotics at R_far, rho = 1/(4 pi |a|^2 sqrt(xi)).
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def V(R):
    return 5.0 / (1.0 + R * R / 3.0) ** 2


def shoot(xi, Rf, rtol):
    f = lambda R, y: [y[1], -(xi + V(R)) * y[0]]
    s = solve_ivp(f, (0.0, Rf), [0.0, 1.0], method='DOP853', rtol=rtol, atol=rtol * 1e-3)
    return s.y[0, -1], s.y[1, -1]


def decay_functional(xi, rtol):
    k = np.sqrt(-xi)
    Rf = max(20.0, 12.0 / k)
    p, dp = shoot(xi, Rf, rtol)
    return (dp + k * p) / np.hypot(p, dp)


def xi_d(rtol):
    grid = -np.geomspace(25.0, 1e-3, 400)
    vals = [decay_functional(x, rtol) for x in grid]
    changes = [i for i in range(len(grid) - 1) if np.sign(vals[i]) != np.sign(vals[i + 1])]
    assert len(changes) == 1, changes
    i = changes[0]
    return brentq(lambda x: decay_functional(x, rtol), grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15), len(changes)


def rho(xi, rtol=1e-12):
    k = np.sqrt(xi)
    Rf = max(60.0, 30.0 / k)
    p, dp = shoot(xi, Rf, rtol)
    a2 = (p * p + dp * dp / (k * k)) / 4.0
    return 1.0 / (4.0 * np.pi * a2 * k), np.sqrt(a2)


if __name__ == '__main__':
    import os
    x1, n1 = xi_d(1e-10)
    x2, n2 = xi_d(1e-13)
    print('xi_d  rtol 1e-10: %.15g   rtol 1e-13: %.15g   sign changes: %d' % (x1, x2, n2))
    out = os.path.join(os.path.dirname(__file__), '..', 'fixtures', 'spectral.csv')
    with open(out, 'w') as fh:
        fh.write('key,xi,value\n')
        fh.write('xi_d_coarse,0,%.17g\n' % x1)
        fh.write('xi_d_fine,0,%.17g\n' % x2)
        for xi in [1e-4, 1e-2, 1.0, 100.0]:
            r, a = rho(xi)
            print('xi=%-8g rho=%.12g |a|=%.12g  rho*3pi*sqrt=%.6f  rho*pi/sqrt=%.6f' % (xi, r, a, r * 3 * np.pi * np.sqrt(xi), r * np.pi / np.sqrt(xi)))
            fh.write('rho,%g,%.17g\n' % (xi, r))
            fh.write('abs_a,%g,%.17g\n' % (xi, a))
