# Desk-scale training phenomena: width sweeps and epoch curves with
# full-batch Adam on from-scratch ReLU regressors, plus the comparison
# between a trained interpolant and the constructed one.
#
# Under-parameterized nets plateau at nonzero training error; once the
# parameter count passes the sample count by a margin, training error
# collapses toward zero while test error stays tame.  The constructed
# student reaches zero training error by design, at teacher-level test
# error.

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from relu_forge import (
    TrainConfig,
    compare_constructed,
    epoch_sweep,
    smooth_product_target,
    synthetic_split,
    width_sweep,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

data = synthetic_split(smooth_product_target(2), 200, 2, seed=0, noise=0.05)
m_train = len(data.y_train)
print("training on %d points, testing on %d" % (m_train, len(data.y_test)))

# width sweep at two depths
rep = width_sweep(
    depths=[1, 2], widths=[1, 4, 16, 64, 256], data=data, seed=0,
    epochs=3000, early_stop_rmse=5e-3,
)
plt.figure(figsize=(9, 4))
plt.subplot(1, 2, 1)
for depth in (1, 2):
    rows = [r for r in rep["rows"] if r["depth"] == depth]
    ws = [r["width"] for r in rows]
    plt.loglog(ws, [r["train_rmse"] for r in rows], "o-",
               label="train, depth %d" % depth)
    plt.loglog(ws, [r["test_rmse"] for r in rows], "s--",
               label="test, depth %d" % depth)
print("width sweep:")
for r in rep["rows"]:
    print(
        "  depth %d width %4d params %6d: train %.4f test %.4f"
        % (r["depth"], r["width"], r["params"], r["train_rmse"], r["test_rmse"])
    )
plt.axvline(x=max(1, m_train // 3), color="gray", lw=0.5)
plt.xlabel("width")
plt.ylabel("RMSE")
plt.legend(fontsize=7)
plt.title("error vs width")

# epoch curves for an under- and an over-parameterized net
curves = epoch_sweep(
    [
        TrainConfig(depth=2, width=2, epochs=3000, seed=0, record_every=50),
        TrainConfig(depth=2, width=40, epochs=3000, seed=0, record_every=50),
        TrainConfig(depth=2, width=256, epochs=3000, seed=0, record_every=50),
    ],
    data,
)
plt.subplot(1, 2, 2)
for c in curves["curves"]:
    plt.semilogy(c["epochs"], c["test_rmse"],
                 label="width %d (n=%d)" % (c["width"], c["params"]))
plt.xlabel("epoch")
plt.ylabel("test RMSE")
plt.legend(fontsize=7)
plt.title("test error vs epoch")
plt.tight_layout()
plt.savefig(os.path.join(OUT, "training.png"), dpi=120)

# trained vs constructed interpolant on the same data
cmp = compare_constructed(data, epsilon=0.2, teacher_depth=2,
                          teacher_width=16, seed=0, epochs=2000)
print("trained vs constructed:")
for row in cmp["rows"]:
    print(
        "  %-20s train %.2e test %.4f params %6d depth %d"
        % (row["model"], row["train_rmse"], row["test_rmse"], row["params"],
           row["depth"])
    )
print("figure written to", os.path.join(OUT, "training.png"))
