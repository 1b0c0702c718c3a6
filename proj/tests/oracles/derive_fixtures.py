"""Independent high-precision evaluation of fixture values used by the C++ tests.

Run with: python3 tests/oracles/derive_fixtures.py
Coefficients are typed in independently of data/materials.yaml.
"""
from mpmath import mp, mpf, sqrt, diff, pi, findroot

mp.dps = 40
C_UM_PER_S = mpf(299792458) * 10**6


def ktp(l, T):
    l2 = l * l
    base = sqrt(mpf('2.12725') + mpf('1.18431') * l2 / (l2 - mpf('0.0514852'))
                + mpf('0.6603') * l2 / (l2 - mpf('100.00507')) - mpf('9.68956e-3') * l2)
    d1 = (mpf('0.9221') / l**3 - mpf('2.9220') / l**2 + mpf('3.6677') / l - mpf('0.1897')) * mpf('1e-5')
    return base + d1 * (T - 25)


def gayer(a, b):
    a = [mpf(x) for x in a]
    b = [mpf(x) for x in b]

    def n(l, T):
        f = (T - mpf('24.5')) * (T + mpf('570.82'))
        l2 = l * l
        return sqrt(a[0] + b[0] * f + (a[1] + b[1] * f) / (l2 - (a[2] + b[2] * f)**2)
                    + (a[3] + b[3] * f) / (l2 - a[4]**2) - a[5] * l2)
    return n


slt = gayer(['4.5615', '0.08488', '0.1927', '5.5832', '8.3067', '0.021696'],
            ['4.782e-7', '3.0913e-8', '2.7326e-8', '1.4837e-5'])
cln = gayer(['5.756', '0.0983', '0.2020', '189.32', '12.52', '1.32e-2'],
            ['2.860e-6', '4.700e-8', '6.113e-8', '1.516e-4'])


def schott(B, C):
    B = [mpf(x) for x in B]
    C = [mpf(x) for x in C]

    def n(l, T):
        l2 = l * l
        return sqrt(1 + sum(b * l2 / (l2 - c) for b, c in zip(B, C)))
    return n


nk5 = schott(['1.08511833', '0.199562005', '0.930511663'], ['0.00661099503', '0.024110866', '111.982777'])
nbk7 = schott(['1.03961212', '0.231792344', '1.01046945'], ['0.00600069867', '0.0200179144', '103.560653'])


def ng(f, l, T):
    return f(l, T) - l * diff(lambda x: f(x, T), l)


def ktp_growth(T):
    d = T - 25
    return 1 + mpf('6.7e-6') * d + mpf('11e-9') * d * d


def ktp_length(L, T0, T):
    # Length at T of a body measuring L at T0.
    return L * ktp_growth(T) / ktp_growth(T0)


def dk(l_s, T, lp=mpf('0.4054'), period=mpf('3.425')):
    l_i = 1 / (1 / lp - 1 / l_s)
    return 2 * pi * (ktp(lp, T) / lp - ktp(l_s, T) / l_s - ktp(l_i, T) / l_i) - 2 * pi / period


def bisect(fn, lo, hi, tol=mpf('1e-12')):
    flo = fn(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = fn(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def main():
    l810 = mpf('0.81')
    l0 = mpf('0.8108')
    print('ktp n(0.81,25)      ', mp.nstr(ktp(l810, 25), 15))
    print('ktp ng(0.81,25)     ', mp.nstr(ng(ktp, l810, 25), 15))
    print('ktp ng(0.81,22)     ', mp.nstr(ng(ktp, l810, 22), 15))
    print('ktp ng(0.8108,22)   ', mp.nstr(ng(ktp, l0, 22), 15))
    print('ktp ng(0.8108,26)   ', mp.nstr(ng(ktp, l0, 26), 15))
    print('slt ng(0.81,22)     ', mp.nstr(ng(slt, l810, 22), 15))
    print('slt ng(0.81,25)     ', mp.nstr(ng(slt, l810, 25), 15))
    print('cln ng(0.81,22)     ', mp.nstr(ng(cln, l810, 22), 15))
    print('n-k5 ng(0.81)       ', mp.nstr(ng(nk5, l810, 22), 15))
    print('n-bk7 ng(0.81)      ', mp.nstr(ng(nbk7, l810, 22), 15))
    print('n-bk7 n(0.5875618)  ', mp.nstr(nbk7(mpf('0.5875618'), 22), 15))
    tq = bisect(lambda T: dk(2 * mpf('0.4054'), T), mpf(20), mpf(200))
    print('qpm T               ', mp.nstr(tq, 15))
    ls30 = 2 * mpf('0.4054') + mpf('0.030')
    print('dk(+30nm) at qpm    ', mp.nstr(dk(ls30, tq), 15))
    L0 = mpf('30.12')
    print('dL(30.12,26,+1) mm  ', mp.nstr(ktp_length(L0, 26, 27) - L0, 15))
    print('dL(30.12,25,+175) mm', mp.nstr(ktp_length(L0, 25, 200) - L0, 15))
    # Delay change of a crystal measuring 30.12 mm at 26 C (no air subtraction) for 26 -> 27 C,
    # and the index change inferred from it by the first-order expression.
    x = lambda T: ng(ktp, l0, T) * ktp_length(L0, 26, T) * 1000
    dx = x(27) - x(26)
    dL = (ktp_length(L0, 26, 27) - L0) * 1000
    base_len = L0 * 1000
    print('dx(26->27) um       ', mp.nstr(dx, 15))
    print('dng inferred 26->27 ', mp.nstr((dx - ng(ktp, l0, 26) * dL) / base_len, 15))
    print('dng true 26->27     ', mp.nstr(ng(ktp, l0, 27) - ng(ktp, l0, 26), 15))


if __name__ == '__main__':
    main()
