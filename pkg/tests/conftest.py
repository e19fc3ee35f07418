"""Shared fixtures: symbol instances and cached corpus ratio tables."""

import numpy as np
import pytest

import paleyscope as ps

# Frequency samples used wherever the decay constant is profiled; the
# origin is excluded by the API contract.
XI_1D = [[0.25], [0.5], [1.0], [2.0], [4.0], [8.0], [-0.25], [-1.0]]
XI_2D = [
    [r * np.cos(a), r * np.sin(a)]
    for r in (0.5, 2.0)
    for a in np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
]


@pytest.fixture(scope="session")
def heat():
    return ps.FractionalSymbol(gamma=2.0, a=1.0, nu=0.5)


@pytest.fixture(scope="session")
def frac1():
    return ps.FractionalSymbol(gamma=1.0, a=1.0, nu=0.5)


@pytest.fixture(scope="session")
def biharm():
    return ps.PolyFormSymbol(m=2, coeffs={((2,), (2,)): 1.0}, nu=0.5)


@pytest.fixture(scope="session")
def levy():
    return ps.LevySymbol(k=0, gamma=0.5, density=([0.0], [[1.0, 1.0]]), d=1)


@pytest.fixture(scope="session")
def family_table(heat, biharm, levy):
    """One representative per symbol family."""
    return (("heat", heat), ("biharmonic", biharm), ("levy", levy))


@pytest.fixture(scope="session")
def corpus_ratio_data(heat, frac1, biharm, levy):
    """lp ratios of the seeded corpus on 64- and 128-point grids.

    Maps (family, n) to {(entry index, p): ratio}. Computed once because
    several contract checks share the same 160 square-function runs.
    """
    fams = (("heat", heat), ("fractional", frac1),
            ("biharmonic", biharm), ("levy", levy))
    data = {}
    for name, sym in fams:
        eta = sym.order / 2
        for n in (64, 128):
            grid = ps.SpaceGrid(d=1, n=n, L=20.0)
            ratios = {}
            for i, f in enumerate(ps.make_corpus(grid, 128, count=20)):
                g = ps.square_function(sym, eta, f)
                for p in (2.0, 4.0, 8.0):
                    ratios[(i, p)] = (ps.lp_space_time_norm(g, p)
                                      / ps.lp_space_time_norm(f, p))
            data[(name, n)] = ratios
    return data


@pytest.fixture(scope="session")
def cli_config(tmp_path_factory):
    """Small experiment config shared by the CLI round-trip checks."""
    import json

    path = tmp_path_factory.mktemp("config") / "experiment.json"
    payload = {
        "symbol": {"family": "fractional", "gamma": 2.0, "a": 1.0, "nu": 0.5},
        "grid": {"d": 1, "n": 64, "L": 20.0, "nt": 64, "t_window": 1.0},
        "corpus": {"count": 4, "seed": 20260816},
        "p_list": [2.0, 4.0],
        "mc": {"M": 512, "K": 3, "seed": 777},
        "kernel": {"s": 0.0, "t": 0.1, "eta": 1.0},
    }
    path.write_text(json.dumps(payload, indent=2))
    return path
