# The deepening construction: from a teacher net to an exact interpolant.
#
# Take any bounded teacher network g and any dataset.  Place one narrow bump
# per data point (the separation radius tells us how narrow), and emit
#
#   student(x) = sum_i y_i bump_i(x) + C* gate(g(x)/C*, 1 - sum_i bump_i(x))
#
# At a data point the bump sum is exactly 1, the gate's second factor is 0,
# the gate vanishes exactly, and the student returns y_i.  Everywhere else
# the bumps vanish and the gate reproduces the teacher to tolerance.  Zero
# training error and teacher-level generalization in one network.

import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from relu_forge import (
    Dataset,
    closeness_constant,
    deepen,
    deepen_fc,
    empirical_risk,
    evaluate_batch,
    interpolation_residual,
    lp_norm_mc,
    make_plan,
    random_teacher,
    sample_separated,
    student_depth,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

d, m, eps = 1, 12, 0.1
teacher = random_teacher(d, depth=2, width=8, seed=4)
pts = sample_separated(m, d, seed=2)
rng = np.random.Generator(np.random.Philox(3))
labels = evaluate_batch(teacher, pts) + rng.uniform(-0.3, 0.3, m)  # noisy data
ds = Dataset(pts, labels)

plan = make_plan(ds, teacher, epsilon=eps, p=2.0)
print("plan: tau=%.4g nu=%g C*=%.3f" % (plan.tau, plan.nu, plan.c_star))

student = deepen(teacher, ds, plan)
print("student depth %d (formula %d), params %d" % (
    student.depth, student_depth(plan, teacher.depth), student.param_count(),
))
print("interpolation residual:", interpolation_residual(student, ds))
print("empirical risk (train MSE):", empirical_risk(student, ds))

dist = lp_norm_mc(
    lambda xs: evaluate_batch(student, xs) - evaluate_batch(teacher, xs),
    d, 2.0, 10 ** 5, seed=5,
)
bound = closeness_constant(d, 2.0, plan.c_star) * eps
print("L2 distance to teacher: %.4g (budget %.4g)" % (dist.value, bound))

# The fully-connected flavor swaps in the log-depth gate.
fc = deepen_fc(teacher, ds, epsilon=eps)
print("fully-connected flavor: depth %d, residual %.2e" % (
    fc.depth, interpolation_residual(fc, ds),
))

xs = np.linspace(-1, 1, 2001)[:, None]
plt.figure(figsize=(8, 4))
plt.plot(xs[:, 0], evaluate_batch(teacher, xs), label="teacher g", lw=1.5)
plt.plot(xs[:, 0], evaluate_batch(student, xs), label="student", lw=1.0)
plt.scatter(pts[:, 0], labels, c="k", zorder=3, s=25, label="data")
plt.legend()
plt.title("student = teacher + %d needle corrections (depth %d)" % (m, student.depth))
plt.tight_layout()
plt.savefig(os.path.join(OUT, "interpolation.png"), dpi=120)
print("figure written to", os.path.join(OUT, "interpolation.png"))
