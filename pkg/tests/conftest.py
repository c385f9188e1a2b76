import itertools
import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_partial_trace(rho, dims, keep):
    """Reference partial trace by explicit summation over multi-indices."""
    keep = sorted(keep)
    drop = [k for k in range(len(dims)) if k not in keep]
    keep_ranges = [range(dims[k]) for k in keep]
    drop_ranges = [range(dims[k]) for k in drop]
    d_keep = int(np.prod([dims[k] for k in keep]))
    out = np.zeros((d_keep, d_keep), dtype=complex)

    def flat(multi):
        idx = 0
        for i, d in zip(multi, dims):
            idx = idx * d + i
        return idx

    def assemble(kept, dropped):
        multi = [0] * len(dims)
        for k, v in zip(keep, kept):
            multi[k] = v
        for k, v in zip(drop, dropped):
            multi[k] = v
        return multi

    kept_all = list(itertools.product(*keep_ranges))
    for a, ka in enumerate(kept_all):
        for b, kb in enumerate(kept_all):
            total = 0j
            for j in itertools.product(*drop_ranges):
                total += rho[flat(assemble(ka, j)), flat(assemble(kb, j))]
            out[a, b] = total
    return out


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
