"""Shared fixtures: the expensive exact-distribution instances are built once
per session and reused across test modules."""

import numpy as np
import pytest

from urnedge.centering import center
from urnedge.kernels import PowerKernel
from urnedge.models import calibrate
from urnedge.oracle import exact_pmf


@pytest.fixture(scope="session")
def chisq_instances():
    """Equal-p chi-square instances at lambda = n/N = 2 for N in
    {20, 50, 100}: (gum, centered, exact distribution)."""
    out = {}
    for N in (20, 50, 100):
        gum = calibrate("poisson", [1.0 / N] * N, 2 * N)
        cs = center(gum, PowerKernel(2))
        dist = exact_pmf(gum, PowerKernel(2))
        out[N] = (gum, cs, dist)
    return out


@pytest.fixture(scope="session")
def bartlett_instances():
    """One N=10, n=20 instance per family with the chi-square kernel."""
    out = {}
    for family, shapes in (
        ("poisson", [0.1] * 10),
        ("binomial", [4] * 10),
        ("negbinomial", [2] * 10),
    ):
        gum = calibrate(family, shapes, 20)
        cs = center(gum, PowerKernel(2))
        dist = exact_pmf(gum, PowerKernel(2))
        out[family] = (gum, cs, dist)
    return out


@pytest.fixture(scope="session")
def dixon_instances():
    """Dixon-type instances: k = 2, rho = 1, N in {16, 32, 64, 128}."""
    out = {}
    for N in (16, 32, 64, 128):
        gum = calibrate("negbinomial", [2] * N, 2 * N)
        cs = center(gum, PowerKernel(2))
        dist = exact_pmf(gum, PowerKernel(2))
        out[N] = (gum, cs, dist)
    return out


def rng_models(rng, n_models, max_cells=8):
    """Small random calibrated models across all three families."""
    models = []
    for _ in range(n_models):
        fam = rng.choice(["poisson", "binomial", "negbinomial"])
        N = int(rng.integers(3, max_cells + 1))
        if fam == "poisson":
            p = rng.dirichlet(np.ones(N) * 3.0)
            shapes = list(p)
            n = int(rng.integers(N, 3 * N))
        elif fam == "binomial":
            shapes = [int(rng.integers(2, 6)) for _ in range(N)]
            n = int(rng.integers(N, sum(shapes)))
        else:
            shapes = [float(rng.integers(1, 4)) for _ in range(N)]
            n = int(rng.integers(N, 3 * N))
        models.append(calibrate(fam, shapes, n))
    return models
