# Not all interpolants are equal: the bump-sum interpolant with a tiny ramp
# width fits the data exactly yet is nearly the zero function in L^p, so it
# sits at distance ~ |f*| from whatever generated the data.  The deepened
# student interpolates the same points while staying glued to its teacher.
# Same training error (zero), wildly different generalization.

import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from relu_forge import (
    Dataset,
    bad_interpolant,
    deepen,
    evaluate_batch,
    interpolation_residual,
    lp_norm_mc,
    make_plan,
    net_fn,
    random_teacher,
    sample_separated,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

d, m = 1, 8
teacher = random_teacher(d, depth=2, width=8, seed=1)
pts = sample_separated(m, d, seed=11)
labels = evaluate_batch(teacher, pts)
ds = Dataset(pts, labels)

tau = 5e-4
bad = bad_interpolant(ds, tau)
good = deepen(teacher, ds, make_plan(ds, teacher, epsilon=0.1))

print("bad residual :", interpolation_residual(bad, ds))
print("good residual:", interpolation_residual(good, ds))

mass = lp_norm_mc(net_fn(bad), d, 1.0, 10 ** 5, seed=0)
print("bad interpolant L1 mass: %.3e (<= %.3e = 2(3tau/2)^d sum|y|)" % (
    mass.value, 2 * (1.5 * tau) ** d * np.abs(labels).sum(),
))
for name, net in (("bad", bad), ("good", good)):
    dist = lp_norm_mc(
        lambda xs: evaluate_batch(net, xs) - evaluate_batch(teacher, xs),
        d, 2.0, 10 ** 5, seed=1,
    )
    print("L2 distance of %-4s interpolant to teacher: %.4f" % (name, dist.value))

xs = np.linspace(-1, 1, 4001)[:, None]
plt.figure(figsize=(8, 4))
plt.plot(xs[:, 0], evaluate_batch(teacher, xs), label="teacher", lw=1.5)
plt.plot(xs[:, 0], evaluate_batch(bad, xs), label="bad interpolant", lw=1.0)
plt.plot(xs[:, 0], evaluate_batch(good, xs), "--", label="deepened student")
plt.scatter(pts[:, 0], labels, c="k", s=25, zorder=3)
plt.legend()
plt.title("two global minima of the same training objective")
plt.tight_layout()
plt.savefig(os.path.join(OUT, "bad_vs_benign.png"), dpi=120)
print("figure written to", os.path.join(OUT, "bad_vs_benign.png"))
