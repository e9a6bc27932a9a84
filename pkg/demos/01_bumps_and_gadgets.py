# Building blocks: trapezoids, localized bumps, hat functions, identity chains.
#
# Everything in this library is an explicit ReLU network -- weights you can
# print.  This script builds the elementary gadgets and shows the three
# properties the constructions lean on: plateaus are exactly 1, supports are
# exactly bounded, and identity chains are exact at any depth.

import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from relu_forge import (
    BumpSpec,
    bump_net,
    evaluate,
    evaluate_batch,
    identity_net,
    psi_net,
    serialize,
    summarize,
    trapezoid_net,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

# A trapezoid: ramps over [a-tau, a], plateau on [a, b], ramps off by b+tau.
trap = trapezoid_net(BumpSpec(a=-0.4, b=0.3, tau=0.25))
print("trapezoid net:", summarize(trap))
ts = np.linspace(-1, 1, 801)
plt.figure(figsize=(9, 3))
plt.subplot(1, 3, 1)
plt.plot(ts, evaluate_batch(trap, ts[:, None]))
plt.title("trapezoid, 1 layer / 4 units")

# The d-dimensional bump: relu(sum of per-axis trapezoids - (d-1)).
# It is exactly 1 on the inner cube and exactly 0 outside the fattened cube.
bump = bump_net(BumpSpec(a=-0.2, b=0.2, tau=0.1, dim=2))
g = np.linspace(-0.5, 0.5, 201)
X, Y = np.meshgrid(g, g)
Z = evaluate_batch(bump, np.stack([X.ravel(), Y.ravel()], axis=1)).reshape(X.shape)
plt.subplot(1, 3, 2)
plt.contourf(X, Y, Z, levels=21)
plt.title("2-D bump")
print("bump(0,0)      =", evaluate(bump, [0.0, 0.0]))
print("bump(0.5, 0)   =", evaluate(bump, [0.5, 0.0]))
print("bump params    =", bump.param_count(), "(= 12d + 2)")

# The hat function psi: 1 on |t|<=1, 0 on |t|>=2.  Its rescaled translates
# psi(3N(x - j/N)) form the partition behind the approximation space.
psi = psi_net()
ts3 = np.linspace(-3, 3, 801)
plt.subplot(1, 3, 3)
plt.plot(ts3, evaluate_batch(psi, ts3[:, None]))
plt.title("hat function")
plt.tight_layout()
plt.savefig(os.path.join(OUT, "gadgets.png"), dpi=120)
print("psi(0), psi(1.5), psi(3) =", [evaluate(psi, [t]) for t in (0.0, 1.5, 3.0)])

# Identity chains t = relu(t) - relu(-t) are what depth padding is made of;
# they are exact at any depth, not approximately so.
for depth in (1, 5, 40):
    chain = identity_net(depth)
    print(
        "identity depth %2d: value at pi -> %.17g (params %d)"
        % (depth, evaluate(chain, [np.pi]), chain.param_count())
    )

# Nets serialize to plain JSON with round-trip-exact floats.
blob = serialize(trap)
print("serialized trapezoid is %d bytes of JSON" % len(blob))
print("figure written to", os.path.join(OUT, "gadgets.png"))
