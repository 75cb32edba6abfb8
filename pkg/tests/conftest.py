import time

import numpy as np
import pytest

from distsig import build_graph
from distsig.gnn import (
    ETA_GRID,
    TrainConfig,
    cora_available,
    load_cora_dir,
    main_component,
    make_split,
    train,
)
from distsig.spectral import laplacian_spectrum


@pytest.fixture
def p2():
    return build_graph(2, [(0, 1)])


@pytest.fixture
def p3():
    return build_graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def triangle():
    return build_graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def c4():
    return build_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])


@pytest.fixture
def k4():
    return build_graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])


@pytest.fixture(scope="session")
def cora():
    """Raw Cora dataset, or skip when the files are not on this machine."""
    if not cora_available():
        pytest.skip("raw Cora files not present (set DISTSIG_DATA_DIR)")
    return load_cora_dir()


class _CoraRuns:
    """Lazy cache of trained Cora models shared by the acceptance criteria.

    Training is deterministic per (variant, seed, eta), so each combination is
    trained at most once per session.  The main-component spectrum is computed
    once and shared by every run's output analysis.
    """

    def __init__(self, dataset):
        self.g, self.features, self.labels, self.class_names = dataset
        sub, nodes = main_component(self.g)
        self.component_spectrum = (nodes, laplacian_spectrum(sub))
        self._cache = {}
        self.train_seconds = 0.0

    def split(self, seed):
        return make_split(self.labels, 20, 500, 1000, seed)

    def run(self, variant, seed, eta=0.5):
        key = (variant, seed, eta)
        if key not in self._cache:
            cfg = TrainConfig(variant=variant, eta=eta, seed=seed)
            t0 = time.perf_counter()
            self._cache[key] = train(
                self.g, self.features, self.labels, self.split(seed), cfg,
                component_spectrum=self.component_spectrum,
            )
            self.train_seconds += time.perf_counter() - t0
        return self._cache[key]

    def tuned(self, variant, seed):
        """Best-validation run over the eta grid; first grid entry wins ties."""
        if variant == "gcn":
            return self.run("gcn", seed)
        best = None
        for eta in ETA_GRID:
            m = self.run(variant, seed, eta)
            if best is None or max(m.val_acc) > max(best.val_acc):
                best = m
        return best


@pytest.fixture(scope="session")
def cora_runs(cora):
    return _CoraRuns(cora)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
