"""Reference values for the closed-form bounds, evaluated at 50 digits."""
from mpmath import mp, mpf, exp, factorial, fabs

mp.dps = 50


def c_of(k):
    return 2 * mpf(5) ** (k - 1)


def det1(lam, t, L, r):
    x = lam * fabs(t) * L
    return 2 * r * (x / r) ** 2 * exp(x / r)


def rand1(lam, t, L, r):
    x = lam * fabs(t) * L
    return x**4 / r**3 * exp(2 * x / r) + 2 * x**3 / (3 * r**2) * exp(x / r)


def det2k(lam, t, L, r, k):
    c = c_of(k)
    y = c * lam * fabs(t) * L / r
    return 2 * r * (2 * y ** (2 * k + 1) / factorial(2 * k + 1) * exp(y))


def rand2k(lam, t, L, r, k):
    c = c_of(k)
    x = lam * fabs(t) * L
    a = 4 * (c * x) ** (4 * k + 2) / (factorial(2 * k + 1) ** 2 * r ** (4 * k + 1)) * exp(2 * c * x / r)
    b = 2 * (c * lam * fabs(t)) ** (2 * k + 1) * mpf(L) ** (2 * k) / (factorial(2 * k - 1) * r ** (2 * k)) * exp(c * x / r)
    return a + b


def tail(x, kappa):
    return fabs(x) ** kappa / factorial(kappa) * exp(fabs(x))


CASES = [
    (1, 1, 2, 10, 1),
    (0.5, 3, 5, 100, 2),
    (2, 6, 24, 81, 2),
    (1, 6, 24, 7763, 1),
    (1.25, -2.5, 7, 33, 3),
]

for lam, t, L, r, k in CASES:
    lam, t = mpf(lam), mpf(t)
    vals = (det1(lam, t, L, r), det2k(lam, t, L, r, k), rand1(lam, t, L, r), rand2k(lam, t, L, r, k))
    print(f"({float(lam)!r}, {float(t)!r}, {L}, {r}, {k}, [" + ", ".join(mp.nstr(v, 20, min_fixed=1, max_fixed=0) for v in vals) + "]),")

for x, kappa in [(0.5, 3), (2, 10), (7.5, 4), (30, 60)]:
    print(f"({x!r}, {kappa}, {mp.nstr(tail(mpf(x), kappa), 20, min_fixed=1, max_fixed=0)}),")


def asym(kind, lam, t, L, k, eps):
    tau = lam * fabs(t)
    L = mpf(L)
    if k == 0:
        return {"det": tau**2 * L**3 / eps, "rand": tau ** mpf(1.5) * L ** mpf(2.5) / eps ** mpf(0.5)}[kind]
    base = tau * L * L
    short = base * (tau / eps) ** (mpf(1) / (2 * k))
    if kind == "det":
        return base * (tau * L / eps) ** (mpf(1) / (2 * k))
    if kind == "rand":
        return max(base * (tau * L / eps) ** (mpf(1) / (4 * k + 1)), short)
    return max(base * (tau * L / eps) ** (mpf(1) / (2 * k + 1)), short)


for kind, lam, t, L, k, eps in [
    ("det", 1, 10, 10, 1, "0.1"),
    ("rand", 1, 10, 10, 1, "0.1"),
    ("comm", 1, 10, 10, 1, "0.1"),
    ("rand", "0.5", 40, 160, 2, "1e-3"),
    ("det", 2, 3, 50, 3, "1e-5"),
    ("det", 1, 8, 32, 0, "1e-3"),
    ("rand", 1, 8, 32, 0, "1e-3"),
]:
    v = asym(kind, mpf(lam), mpf(t), L, k, mpf(eps))
    print(f'("{kind}", {float(mpf(lam))!r}, {float(mpf(t))!r}, {L}, {k}, {eps}, {mp.nstr(v, 20, min_fixed=1, max_fixed=0)}),')
