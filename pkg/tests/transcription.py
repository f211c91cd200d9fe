"""Second, symbolic transcription of the printed coefficient formulas.

Written independently of ``gwkde.asymptotics`` with sympy: the gamma
reference and its derivatives are differentiated symbolically, and each
coefficient is re-typed from the typeset formulas. Values are evaluated
at 30 significant digits.
"""

import sympy as sp

Y = sp.Symbol("y", positive=True)
EG = sp.EulerGamma
DIG = 30


def gamma_ref_symbolic(rho, kappa):
    # floats enter as their exact binary value
    rho, kappa = (sp.Rational(v) if isinstance(v, float) else sp.sympify(v)
                  for v in (rho, kappa))
    expr = Y ** (rho - 1) * sp.exp(-Y / kappa) / (kappa ** rho * sp.gamma(rho))
    derivs = [expr] + [sp.diff(expr, Y, k) for k in (1, 2, 3)]
    return [sp.Lambda(Y, d) for d in derivs]


def _n(v):
    return float(sp.N(v, DIG))


def _pt(v):
    return sp.Rational(v) if isinstance(v, float) else v


def C1(F, x, a):
    x, a = _pt(x), _pt(a)
    return x * a / 2 * F[2](x)


def c2_small(F, x, a):
    x, a = _pt(x), _pt(a)
    return F[1](x) + F[2](x) * a / 2 + F[3](x) * x * a / 2


def _tr(x, a):
    return 1 + a / x, 1 + 2 * a / x


def B1(F, x, a):
    x, a = _pt(x), _pt(a)
    t, r = _tr(x, a)
    G = sp.gamma
    return F[0](a * G(t)) - F[0](x) + F[2](a * G(t)) * a ** 2 / 2 * (G(t) - G(r)) ** 2


def b2_small(F, x, a):
    x, a = _pt(x), _pt(a)
    t, r = _tr(x, a)
    G, P = sp.gamma, sp.digamma
    m = a * G(t)
    return a ** 2 / x ** 2 * (
        -F[1](m) * G(t) * P(t)
        + F[2](m) * a * ((G(t) - G(r)) * (G(t) * P(t) - 2 * G(r) * P(r)))
        - F[3](m) * a ** 2 / 2 * (G(t) - G(r)) ** 2 * G(t) * P(t))


def A1(F, x, a):
    x, a = _pt(x), _pt(a)
    return -F[0](x - a / 2) * sp.sqrt(x) / (sp.sqrt(a) * (a - 2 * x))


def a2_small(F, x, a):
    x, a = _pt(x), _pt(a)
    u = x - a / 2
    return -(F[0](u) * (a + 2 * x) / (2 * sp.sqrt(a * x) * (a - 2 * x) ** 2)
             + sp.sqrt(x) / (sp.sqrt(a) * (a - 2 * x))
             * (F[1](u) + a / 4 * u * F[2](u)))


def _dd():
    return EG - 1 + sp.log(2)


def D1(F, x, a):
    x, a = _pt(x), _pt(a)
    return x * 2 ** (3 * x / a - 1) / a ** 2 * (
        F[0](2 * a) * (x * (x - 3 * a) / (2 * a ** 2) + 2)
        + F[1](2 * a) * (x - a) + F[2](2 * a) * 2 * a ** 2)


def D2(F, x, a, c2):
    x, a, c2 = _pt(x), _pt(a), _pt(c2)
    d = _dd()
    L = 6 * EG - 10 - sp.log(4)
    S = d * x ** 2 + a * (c2 - d * x)
    f0, f1, f2 = F[0](2 * a), F[1](2 * a), F[2](2 * a)
    inner = (f0 * ((x - 2 * a) * S / (2 * a ** 3) + S / a
                   - x * (x - a) * (x - 2 * a) * L / (2 * a ** 3))
             + f1 * (S / a - 2 * x * d * (x - 2 * a + 1) - x * (x - a) * L / a)
             - f2 * (2 * x * (d * (x - a) + 2 * a ** 2 + a * L))
             + c2 * 2 ** (3 * x / a - 1) / a ** 3 * (-x * sp.log(a) + a + 2 * x * sp.log(2))
             * (f0 * (x * (x - 3 * a) / (2 * a ** 2) + 2) + f1 * (x - a) + f2 * 2 * a ** 2))
    return x * 2 ** (3 * x / a - 1) / a ** 2 * inner


def d21(F, a):
    a = _pt(a)
    l10 = sp.log(10)
    return 2 ** (3 * a / 2) * (
        F[1](2 * a) / l10 * (a - 1) * (EG * l10 - sp.log(5))
        + F[2](2 * a) * (EG - 1 + 2 * a ** 2 * (sp.log(4) / l10 - 6 * EG + 10)
                         + sp.log(2) / l10))


def d22(F, a):
    a = _pt(a)
    l10 = sp.log(10)
    g = sp.log(a) - 2 * sp.log(2)
    return 2 ** (3 * a / 2 - 1) * (
        F[0](2 * a) / a ** 2 * ((2 * a - 1) / 2 + 3 * (1 - 1 / (l10 * g)))
        + F[1](2 * a) / a
        + F[2](2 * a) * (1 - 1 / l10 * g))


def h_opt(F, x, a, n, c1):
    C1v, C2v = C1(F, x, a), _pt(c1) * c2_small(F, x, a)
    A2v = _pt(c1) * a2_small(F, x, a)
    return -C1v / C2v - 1 / (C2v * n) * (A2v / (2 * C2v) - C1v - F[0](_pt(x)))


def b_opt(F, x, a, n, c2):
    B1v, B2v = B1(F, x, a), _pt(c2) * b2_small(F, x, a)
    D2v = D2(F, x, a, c2)
    return -B1v / B2v - 1 / (B2v * n) * (D2v / (2 * B2v) - B1v + F[0](_pt(x)))


def c2_matching(F, a):
    return 1 / d21(F, a) * (
        B1(F, a, a) * b2_small(F, a, a) / C1(F, a, a)
        * (a2_small(F, a, a) / c2_small(F, a, a) - 2 * F[0](_pt(a)))
        - 2 * F[0](_pt(a)) * b2_small(F, a, a) - d22(F, a))


def num(expr):
    return _n(expr)
