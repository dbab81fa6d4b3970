"""Regenerate the bundled dry-skin and muscle dispersion tables.

Four-term Cole-Cole parameters from the standard tissue literature
(Gabriel, Lau & Gabriel 1996), evaluated with mpmath at 50 digits.
"""
import sys
import mpmath as mp

mp.mp.dps = 50
EPS0 = mp.mpf("8.8541878128e-12")

SKIN_DRY = dict(
    eps_inf=4.0,
    terms=[(32.0, 7.23e-12, 0.0), (1100.0, 32.48e-9, 0.20)],
    sigma_ionic=0.0002,
)
MUSCLE = dict(
    eps_inf=4.0,
    terms=[
        (50.0, 7.234e-12, 0.10),
        (7000.0, 353.678e-9, 0.10),
        (1.2e6, 318.31e-6, 0.10),
        (2.5e7, 2.274e-3, 0.0),
    ],
    sigma_ionic=0.2,
)


def cole_cole(p, f):
    w = 2 * mp.pi * mp.mpf(f)
    e = mp.mpc(p["eps_inf"])
    for d, tau, alpha in p["terms"]:
        e += mp.mpf(d) / (1 + (1j * w * mp.mpf(tau)) ** (1 - mp.mpf(alpha)))
    e += mp.mpf(p["sigma_ionic"]) / (1j * w * EPS0)
    return e.real, -e.imag * w * EPS0


def table(p, per_decade=20, lo=5, hi=9):
    n = (hi - lo) * per_decade
    out = ["# generated by tools/gen_dispersion.py", "frequency_hz,eps_r,sigma_s_per_m"]
    for k in range(n + 1):
        f = float(mp.mpf(10) ** (lo + mp.mpf(k) / per_decade))
        er, sg = cole_cole(p, f)
        out.append(f"{f!r},{float(er)!r},{float(sg)!r}")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    dest = sys.argv[1] if len(sys.argv) > 1 else "crates/brhbc/data"
    with open(f"{dest}/skin_dry.csv", "w") as fh:
        fh.write(table(SKIN_DRY))
    with open(f"{dest}/muscle.csv", "w") as fh:
        fh.write(table(MUSCLE))
