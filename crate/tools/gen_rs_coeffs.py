"""Generate Taylor coefficients of the Riemann-Siegel correction terms C0..C4.

C_k(p) is expanded in u = p - 1/2 using Psi(1/2 + u) = -cos(2 pi u^2 - 5 pi/8) / cos(2 pi u).
Output is a Rust source fragment written to stdout.
"""
import mpmath as mp

mp.mp.dps = 160
DEG = 110  # Psi series degree


def series_cos_sin_of(coeffs, n):
    # cos and sin of a power series w(u) with w(0) = 0, truncated at degree n
    # uses exp(i w) via the recurrence E' = i w' E
    w = coeffs + [mp.mpf(0)] * (n + 1 - len(coeffs))
    dw = [(k + 1) * w[k + 1] for k in range(n)]
    e = [mp.mpc(0)] * (n + 1)
    e[0] = mp.mpc(1)
    for m in range(1, n + 1):
        s = mp.mpc(0)
        for j in range(m):
            s += dw[j] * e[m - 1 - j]
        e[m] = 1j * s / m
    return [x.real for x in e], [x.imag for x in e]


def mul(a, b, n):
    out = [mp.mpf(0)] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        if x == 0:
            continue
        for j, y in enumerate(b[: n + 1 - i]):
            out[i + j] += x * y
    return out


def inv(a, n):
    out = [mp.mpf(0)] * (n + 1)
    out[0] = 1 / a[0]
    for m in range(1, n + 1):
        s = mp.mpf(0)
        for j in range(1, m + 1):
            s += a[j] * out[m - j]
        out[m] = -s / a[0]
    return out


n = DEG
two_pi = 2 * mp.pi
# numerator: cos(2 pi u^2 - 5pi/8) = cos(5pi/8) cos(2 pi u^2) + sin(5pi/8) sin(2 pi u^2)
cw, sw = series_cos_sin_of([mp.mpf(0), mp.mpf(0), two_pi], n)
num = [mp.cos(5 * mp.pi / 8) * c + mp.sin(5 * mp.pi / 8) * s for c, s in zip(cw, sw)]
cd, _ = series_cos_sin_of([mp.mpf(0), two_pi], n)
psi = mul([-x for x in num], inv(cd, n), n)


def deriv(series, m):
    return [mp.factorial(k + m) / mp.factorial(k) * series[k + m] for k in range(len(series) - m)]


def combo(terms):
    length = min(len(deriv(psi, m)) for m, _ in terms)
    out = [mp.mpf(0)] * length
    for m, w in terms:
        d = deriv(psi, m)
        for k in range(length):
            out[k] += w * d[k]
    return out


pi = mp.pi
C = [
    combo([(0, 1)]),
    combo([(3, -1 / (96 * pi**2))]),
    combo([(2, 1 / (64 * pi**2)), (6, 1 / (18432 * pi**4))]),
    combo([(1, -1 / (64 * pi**2)), (5, -1 / (3840 * pi**4)), (9, -1 / (5308416 * pi**6))]),
    combo([
        (0, 1 / (128 * pi**2)),
        (4, 19 / (24576 * pi**4)),
        (8, 11 / (5898240 * pi**6)),
        (12, 1 / (2038431744 * pi**8)),
    ]),
]

# truncate each series where the tail is negligible on |u| <= 1/2
out = []
for k, c in enumerate(C):
    last = 0
    for j, x in enumerate(c):
        if abs(x) * mp.mpf(0.5) ** j > mp.mpf(10) ** -19:
            last = j
    out.append(c[: last + 1])

print("// Generated by tools/gen_rs_coeffs.py; do not edit by hand.")
print("// Taylor coefficients of C_k(p) in powers of (p - 1/2), k = 0..=4.")
for k, c in enumerate(out):
    print(f"pub(crate) const C{k}: [f64; {len(c)}] = [")
    for x in c:
        print(f"    {mp.nstr(x, 20, min_fixed=0, max_fixed=0)},")
    print("];")
