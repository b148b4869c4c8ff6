import pytest

import pctree as pt


def corpus_params(count: int, base_seed: int = 0):
    """Deterministic mix of sizes, seeds, and reuse levels."""
    for i in range(count):
        yield pt.GenParams(n=(4, 6, 8, 10)[i % 4], seed=base_seed + i,
                           reuse_prob=(0.0, 0.3, 0.5)[i % 3])


@pytest.fixture(scope="session")
def small_corpus():
    """A dozen random valid PCs with their binarized forms."""
    out = []
    for params in corpus_params(12, base_seed=100):
        c = pt.random_valid_pc(params)
        out.append((c, pt.binarize(c)))
    return out
