"""NumPy implementation of the leave-two-out counting kernel.

Mirrors ``_core.pyx`` operation for operation: sums over machines are
accumulated sequentially in machine order (not with ``np.sum``'s pairwise
reduction) so both backends round identically.
"""

from __future__ import annotations

import numpy as np


def leave_two_out_counts(scores, runtimes, gammas, rel_slack):
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    runtimes = np.ascontiguousarray(runtimes, dtype=np.float64)
    gammas = np.ascontiguousarray(gammas, dtype=np.float64)
    n_mach, n_proc = runtimes.shape
    counts = np.zeros(gammas.shape[0], dtype=np.int64)

    rowsum = np.zeros(n_mach)
    for p in range(n_proc):
        rowsum += runtimes[:, p]
    # reference runtime of every machine with one process left out: shape (M, P)
    train_y = rowsum[:, None] - runtimes
    n_train = float(n_mach - 2)

    for c1 in range(n_mach):
        for c2 in range(n_mach):
            if c2 == c1:
                continue
            train = [m for m in range(n_mach) if m != c1 and m != c2]
            s_acc = 0.0
            y_acc = np.zeros(n_proc)
            for m in train:
                s_acc += scores[m]
                y_acc += train_y[m]
            s_bar = s_acc / n_train
            y_bar = y_acc / n_train
            sxx = 0.0
            sxy = np.zeros(n_proc)
            for m in train:
                ds = scores[m] - s_bar
                sxx += ds * ds
                sxy += ds * (train_y[m] - y_bar)
            slope = sxy / sxx
            intercept = y_bar - slope * s_bar
            pole = -intercept / slope
            ratio = (pole - scores[c2]) / (pole - scores[c1])
            base = runtimes[c1] * ratio
            limit = runtimes[c2] * (1.0 + rel_slack)
            counts += np.count_nonzero(base[:, None] * gammas[None, :] > limit[:, None], axis=0)

    return counts, n_proc * n_mach * (n_mach - 1)
