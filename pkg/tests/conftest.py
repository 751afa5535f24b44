import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("default")


def make_blobs(rng, n, d, c, spread=1.0):
    """Well-separated Gaussian blobs; every blob gets n//c or n//c + 1 points.

    Center separation is large against the blob radius so the flat cluster
    partition at n_clusters=c is unambiguous.
    """
    sep = 12.0 * spread * max(np.sqrt(d), 1.0)
    box = sep * max(2.0, c ** (1.0 / d))
    while True:
        centers = rng.uniform(-box, box, size=(c, d))
        if c == 1:
            break
        dd = np.linalg.norm(centers[:, None] - centers[None], axis=2)
        if dd[np.triu_indices(c, 1)].min() >= sep:
            break
        box *= 1.2
    sizes = np.full(c, n // c)
    sizes[: n % c] += 1
    parts = [centers[i] + spread * rng.standard_normal((sizes[i], d)) for i in range(c)]
    return np.concatenate(parts)


def tiny_blob_dataset(rng, n_blobs, d=3, spread=0.3):
    """Blobs of 3-4 points, far apart: a k=2 graph keeps each blob's MST
    complete while leaving the blobs mutually disconnected."""
    box = 50.0
    while True:
        centers = rng.uniform(-box, box, size=(n_blobs, d))
        dd = np.linalg.norm(centers[:, None] - centers[None], axis=2)
        if n_blobs == 1 or dd[np.triu_indices(n_blobs, 1)].min() >= 20:
            break
        box *= 1.2
    parts = [c + spread * rng.standard_normal((int(rng.integers(3, 5)), d))
             for c in centers]
    return np.concatenate(parts)


def random_connected_graph(rng, n_vertices, n_extra, weights="uniform"):
    """Random spanning chain plus extra edges; guaranteed connected."""
    chain_src = np.arange(1, n_vertices)
    chain_dst = rng.integers(0, chain_src)
    if n_extra:
        extra_src = rng.integers(1, n_vertices, size=n_extra)
        extra_dst = rng.integers(0, extra_src)
        src = np.concatenate([chain_src, extra_src])
        dst = np.concatenate([chain_dst, extra_dst])
    else:
        src, dst = chain_src, chain_dst
    m = len(src)
    if weights == "uniform":
        w = rng.uniform(0.1, 10.0, size=m)
    elif weights == "ties":
        w = rng.integers(1, 6, size=m).astype(np.float64)
    elif weights == "equal":
        w = np.ones(m)
    else:
        raise ValueError(weights)
    return src, dst, w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
