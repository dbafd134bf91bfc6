import numpy as np
import pytest

from padicvt import checks
from padicvt.corpus import corpus_to_json, make_corpus, random_step_function


def test_corpus_is_seed_determined():
    a, b = make_corpus(5, 12), make_corpus(5, 12)
    for x, y in zip(a, b):
        assert x.corpus_id == y.corpus_id
        assert np.array_equal(x.function.values, y.function.values)
    other = make_corpus(6, 1)[0].function
    assert other.values.shape != a[0].function.values.shape or not np.array_equal(other.values, a[0].function.values)
    assert corpus_to_json(a, 5)["seed"] == 5


def test_corpus_cycles_primes_and_dimensions():
    entries = make_corpus(1, 6, primes=(2, 3, 5), dimensions=(1, 2))
    assert [(e.function.prime, e.function.dimension) for e in entries] == [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1), (5, 2)]


def test_random_function_respects_cell_cap():
    rng = np.random.default_rng(0)
    for p in (2, 3, 5, 7):
        for n in (1, 2):
            f = random_step_function(rng, p, n, real=True, max_cells=100)
            assert f.values.size <= 100 and f.is_real and np.any(f.values)


@pytest.mark.parametrize(
    "name,kw",
    [
        ("dual-route", {"count": 6}),
        ("fourier", {"count": 6}),
        ("weighted-positivity", {"count": 4}),
        ("seminorm", {"count": 4}),
        ("comparison", {"count": 2}),
        ("harmonicity", {}),
        ("exactness", {"count": 200}),
    ],
)
def test_registry_checks_pass_small(name, kw):
    res = checks.REGISTRY[name](**kw)
    assert res.passed, res.metrics
    assert res.name == name and res.paper_ref and res.seconds >= 0


def test_weighted_positivity_reports_true_minimum():
    res = checks.check_weighted_positivity(count=3)
    assert res.metrics["min_side"] > 0
