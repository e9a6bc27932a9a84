# Product gates: multiplying with ReLU layers.
#
# The squaring net refines a piecewise-linear interpolant of t^2 by one
# sawtooth per stage (error 4^-stage / 4, exact at dyadic points), and the
# polarization identity uv = ((u+v)/2)^2 - ((u-v)/2)^2 turns squaring into
# multiplication.  The payoff for the interpolation machinery is the exact
# annihilation property: if any factor is 0, the gate output is 0 -- not
# small, zero.

import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from relu_forge import (
    GateSpec,
    evaluate,
    evaluate_batch,
    gate_budget,
    multi_gate,
    pair_gate,
    square_net,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

ts = np.linspace(0, 1, 601)
plt.figure(figsize=(9, 3))
plt.subplot(1, 2, 1)
for m in (1, 2, 4):
    approx = evaluate_batch(square_net(m), ts[:, None])
    plt.plot(ts, approx - ts ** 2, label="m=%d" % m)
plt.legend()
plt.title("squaring error by stage count")

plt.subplot(1, 2, 2)
errs, nus = [], np.logspace(-1, -6, 6)
for nu in nus:
    g = pair_gate(nu)
    grid = np.linspace(-1, 1, 201)
    U, V = np.meshgrid(grid, grid)
    pts = np.stack([U.ravel(), V.ravel()], axis=1)
    err = np.abs(evaluate_batch(g, pts) - pts[:, 0] * pts[:, 1]).max()
    errs.append(err)
    print("pair gate nu=%7.1e: depth %2d, measured sup error %.2e" % (nu, g.depth, err))
plt.loglog(nus, errs, "o-", label="measured")
plt.loglog(nus, nus, "--", label="requested")
plt.legend()
plt.title("requested vs measured gate error")
plt.tight_layout()
plt.savefig(os.path.join(OUT, "gates.png"), dpi=120)

# zero preservation is bitwise
g = pair_gate(1e-3)
print("gate(0, 0.73)  =", evaluate(g, [0.0, 0.73]))
print("gate(0.73, 0)  =", evaluate(g, [0.73, 0.0]))

# multi-factor gates chain pair gates right to left with clamped
# intermediates; the fixed-depth flavor is padded to the 2*ell*L~ + 8*ell
# budget, the log-depth flavor keeps its natural depth.
for ell in (2, 3, 4):
    spec = GateSpec(ell=ell, nu=1e-3, theta=0.5, tilde_L=2)
    depth, params, per_stage = gate_budget(spec)
    print(
        "ell=%d: fixed-depth %d (budget %d), params %d, per-stage nu %.2e"
        % (ell, depth, 2 * ell * 2 + 8 * ell, params, per_stage)
    )
gate3 = multi_gate(GateSpec(ell=3, nu=1e-3))
print("gate3(0.5, 0.5, 0.5) =", evaluate(gate3, [0.5, 0.5, 0.5]), "(true 0.125)")
print("gate3(0.9, 0.0, 0.9) =", evaluate(gate3, [0.9, 0.0, 0.9]))
print("figure written to", os.path.join(OUT, "gates.png"))
