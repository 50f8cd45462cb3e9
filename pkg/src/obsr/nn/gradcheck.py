"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np


def grad_check(loss_fn, parameters, h: float = 1e-5, tol: float = 1e-4,
               max_elements: int = 64, seed: int = 0,
               noise_floor: float = 1e-7):
    """Compare analytic gradients against central finite differences.

    ``loss_fn()`` must run a deterministic forward+backward pass (dropout
    disabled), accumulate gradients into ``parameters``, and return the
    scalar loss. Large tensors are subsampled to ``max_elements`` entries.

    Elements where both gradients sit below ``noise_floor`` are skipped:
    central differences at 64-bit carry roundoff of roughly
    eps * |loss| / h, so comparisons below that scale measure the oracle's
    noise, not the gradient.

    Returns ``(passed, report)`` where report maps parameter name to its
    maximum relative error.
    """
    parameters = list(parameters)
    rng = np.random.default_rng(seed)
    for p in parameters:
        p.zero_grad()
    loss_fn()
    analytic = [p.grad.copy() for p in parameters]

    report = {}
    for pos, p in enumerate(parameters):
        flat = p.value.reshape(-1)
        n = flat.size
        idxs = np.arange(n) if n <= max_elements else \
            rng.choice(n, size=max_elements, replace=False)
        worst = 0.0
        for idx in idxs:
            orig = flat[idx]
            flat[idx] = orig + h
            for q in parameters:
                q.zero_grad()
            loss_plus = loss_fn()
            flat[idx] = orig - h
            for q in parameters:
                q.zero_grad()
            loss_minus = loss_fn()
            flat[idx] = orig
            numeric = (loss_plus - loss_minus) / (2.0 * h)
            a = analytic[pos].reshape(-1)[idx]
            if abs(a) < noise_floor and abs(numeric) < noise_floor:
                continue
            denom = max(abs(a) + abs(numeric), 1e-8)
            worst = max(worst, abs(a - numeric) / denom)
        report[f"{pos}:{p.name}"] = worst
    for p in parameters:
        p.zero_grad()
    passed = all(err <= tol for err in report.values())
    return passed, report
