"""Reference values for the zeta_eval and ladder tests, computed with mpmath.

The printed numbers are frozen into the Rust test suites.
"""
import random
import mpmath as mp

mp.mp.dps = 30

print("first gram point", mp.grampoint(0))
print("theta(100)", mp.siegeltheta(100))
print("theta(1000)", mp.siegeltheta(1000))
print("Z(20)", mp.siegelz(20))
print("|zeta|^2 at 1000", abs(mp.zeta(mp.mpf(1) / 2 + 1000j)) ** 2)

print("zeros:")
for n in [1, 10, 50, 100, 500, 1000, 2000, 5000, 8000, 10000]:
    print(n, mp.nstr(mp.zetazero(n).imag, 22))

print("heights:")
rng = random.Random(20261018)
for _ in range(20):
    t = round(rng.uniform(10, 10000), 6)
    print(t, mp.nstr(abs(mp.zeta(mp.mpf(1) / 2 + 1j * mp.mpf(str(t)))) ** 2, 20))

print("low heights (fallback):")
for t in [0.0, 1.0, 5.0, 9.5]:
    print(t, mp.nstr(abs(mp.zeta(mp.mpf(1) / 2 + 1j * mp.mpf(t))) ** 2, 20))

mp.mp.dps = 20
f = lambda u: abs(mp.zeta(mp.mpf(1) / 2 + 1j * u)) ** 2
a100 = mp.quad(f, mp.linspace(0, 100, 201))
print("A(100)", a100)
