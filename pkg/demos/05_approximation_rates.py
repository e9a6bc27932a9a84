# Rate-optimal approximation spaces, with and without interpolation
# constraints.
#
# Gated products of hat translates and monomials span a linear space of
# identical-depth ReLU nets over the unit cube.  Least-squares fits over it
# decay like N^-r for r-smooth targets, and forcing exact interpolation of
# noiseless samples costs at most a constant factor -- the constrained and
# unconstrained error curves run in parallel.

import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from relu_forge import rate_experiment

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

target = lambda xs: np.sin(np.pi * xs[:, 0])
rep = rate_experiment(
    target, r=1.0, d=1, N_list=[4, 8, 16, 32, 64], s=0, sample_count=8, seed=0
)
print("N    size  params   sup (free)   sup (interpolating)")
for row in rep["rows"]:
    print(
        "%-4d %-5d %-8d %-12.4g %-12.4g"
        % (
            row["N"],
            row["basis_size"],
            row["params"],
            row["sup_err_unconstrained"],
            row["sup_err_constrained"],
        )
    )
for key, sl in rep["slopes"].items():
    print("%s: slope %.3f, r^2 %.4f" % (key, sl["slope"], sl["r_squared"]))

ns = [row["N"] for row in rep["rows"]]
unc = [row["sup_err_unconstrained"] for row in rep["rows"]]
con = [row["sup_err_constrained"] for row in rep["rows"]]
plt.figure(figsize=(5, 4))
plt.loglog(ns, unc, "o-", label="least squares")
plt.loglog(ns, con, "s--", label="+ exact interpolation")
plt.loglog(ns, [u * 5 for u in unc], ":", label="5x least squares")
plt.xlabel("partitions per axis N")
plt.ylabel("sup error")
plt.legend()
plt.title("sin(pi x): interpolation constraints cost a constant")
plt.tight_layout()
plt.savefig(os.path.join(OUT, "rates.png"), dpi=120)

# a fractionally-smooth target decays at its own rate
rep15 = rate_experiment(
    lambda xs: np.abs(xs[:, 0]) ** 1.5, r=1.5, d=1, N_list=[4, 8, 16, 32], s=1
)
print(
    "|x|^1.5 with linear factors: slope %.3f (theory -1.5)"
    % rep15["slopes"]["sup_err_unconstrained"]["slope"]
)
print("figure written to", os.path.join(OUT, "rates.png"))
