# Independent multiprecision solution of L0 f = g_j, f(0) = f'(0) = 0.
# Heads come from extrapolating f(R) - b1 R at large R with the
# known expansion basis; values are frozen into test_correction_one.cpp.
import mpmath as mp
mp.mp.dps = 40

def s(R): return R * R / 3
def pt1(R): return R * (1 - s(R)) / (1 + s(R)) ** mp.mpf(1.5)
def pt2(R): return (1 - 6 * s(R) + s(R) ** 2) / (1 + s(R)) ** mp.mpf(1.5)
def g1(R): return (1 - s(R)) / (1 + s(R)) ** mp.mpf(1.5)
def g2(R): return (9 - 30 * R ** 2 + R ** 4) / (1 + s(R)) ** mp.mpf(2.5)

def breaks(R):
    pts = [mp.mpf(0)]
    x = mp.mpf('0.5')
    while x < R:
        pts.append(x)
        x *= 2
    pts.append(mp.mpf(R))
    return pts

def f(g, R):
    R = mp.mpf(R)
    b = breaks(R)
    I1 = mp.quad(lambda x: pt1(x) * x * g(x), b)
    I2 = mp.quad(lambda x: pt2(x) * x * g(x), b)
    return (pt1(R) * I2 - pt2(R) * I1) / R

if __name__ == '__main__':
    for name, g in (("g1", g1), ("g2", g2)):
        b1 = mp.limit(lambda R: R * g(R), mp.inf) / 2
        Rs = [mp.mpf(1000) * mp.mpf(2) ** k for k in range(12)]
        ys = [f(g, R) - b1 * R for R in Rs]
        basis = lambda R: [1, 1 / R, 1 / R ** 2, 1 / R ** 3, 1 / R ** 4, mp.log(R) / R, mp.log(R) / R ** 3, mp.log(R) / R ** 5]
        A = mp.matrix([basis(R) for R in Rs])
        y = mp.matrix(ys)
        sol = mp.lu_solve(A.T * A, A.T * y)
        print(name, "b1 =", mp.nstr(b1, 20), "b2 =", mp.nstr(sol[0], 20), "b3 =", mp.nstr(sol[5], 12))
        for R in ['0.01', '0.5', '2', '10', '100', '1000']:
            print("  f(%s) = %s" % (R, mp.nstr(f(g, mp.mpf(R)), 20)))

    # eps0 = 0: kappa = nu, omegas constant, the operator reduces to m^2 - m on each head power
    nu = mp.mpf('3.5')
    om = [(nu + 1) / 2, (nu + 1) ** 2 / 36]
    b1s = [-mp.sqrt(3) / 2, 9 * mp.sqrt(3) / 2]
    b2s = [15 * mp.pi / 4, -mp.mpf('67.5') * mp.pi]
    def cfac(d):
        m = 2 * nu - d * (1 + nu)
        return m * m - m
    print("c1 =", mp.nstr(cfac(mp.mpf('1.5')) * sum(o * b for o, b in zip(om, b1s)), 20))
    print("c2 =", mp.nstr(cfac(mp.mpf('0.5')) * sum(o * b for o, b in zip(om, b2s)), 20))
