"""Shared fixtures: the map corpus every classification test runs against."""

from dataclasses import dataclass, field

import numpy as np
import pytest

from setflow import (
    Always,
    Halfspace,
    PLConvexFunction,
    constant_map,
    linear_map,
    pl_subdifferential_map,
    sample_grid,
    table_map,
)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    svmap: object
    grid: tuple
    # expected classification verdicts, hand-checked on the grid
    monotone: bool
    weakly_monotone: bool
    cyclic_monotone: bool
    weak_cyclic_monotone: bool
    # whether the support-function chain inequality holds on the grid
    support_chain: bool
    pl_function: object = field(default=None)


def _grid1(lo=-1.0, hi=1.0, n=5):
    return sample_grid([lo], [hi], [n])


def _grid2(lo=-1.0, hi=1.0, n=3):
    return sample_grid([lo, lo], [hi, hi], [n, n])


ABS_F = PLConvexFunction([[1.0], [-1.0]], [0.0, 0.0])
TWO_MAX_F = PLConvexFunction([[1.0], [-2.0]], [0.0, 0.0])
PLANAR_F = PLConvexFunction([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]], [0.0, 0.0, 0.0])


def make_sign_map():
    # {-1} left of zero, {-1, 1} at zero, {1} to the right
    return table_map([
        (Halfspace([1.0], 0.0, "lt"), [[-1.0]]),
        (Halfspace([1.0], 0.0, "eq"), [[-1.0], [1.0]]),
        (Always(), [[1.0]]),
    ])


def make_non_wcm_map():
    # single extra value at the origin wrecks every monotonicity class
    return table_map([
        (Halfspace([1.0], 0.0, "eq"), [[0.0], [1.0]]),
        (Always(), [[0.0]]),
    ])


def build_corpus():
    rotation = linear_map([[0.0, -1.0], [1.0, 0.0]])
    identity = linear_map([[1.0, 0.0], [0.0, 1.0]])
    return [
        CorpusEntry(
            "constant_two_values", constant_map([[-1.0], [1.0]]), _grid1(),
            monotone=False, weakly_monotone=True,
            cyclic_monotone=False, weak_cyclic_monotone=True,
            support_chain=False,
        ),
        CorpusEntry(
            "constant_singleton", constant_map([[2.0]]), _grid1(),
            monotone=True, weakly_monotone=True,
            cyclic_monotone=True, weak_cyclic_monotone=True,
            support_chain=True,
        ),
        CorpusEntry(
            "abs_subdifferential", pl_subdifferential_map(ABS_F), _grid1(),
            monotone=True, weakly_monotone=True,
            cyclic_monotone=True, weak_cyclic_monotone=True,
            support_chain=True, pl_function=ABS_F,
        ),
        CorpusEntry(
            "two_slope_subdifferential", pl_subdifferential_map(TWO_MAX_F), _grid1(),
            monotone=True, weakly_monotone=True,
            cyclic_monotone=True, weak_cyclic_monotone=True,
            support_chain=True, pl_function=TWO_MAX_F,
        ),
        CorpusEntry(
            "planar_max_subdifferential", pl_subdifferential_map(PLANAR_F), _grid2(),
            monotone=True, weakly_monotone=True,
            cyclic_monotone=True, weak_cyclic_monotone=True,
            support_chain=True, pl_function=PLANAR_F,
        ),
        CorpusEntry(
            "quarter_turn", rotation, _grid2(),
            monotone=True, weakly_monotone=True,
            cyclic_monotone=False, weak_cyclic_monotone=False,
            support_chain=False,
        ),
        CorpusEntry(
            "identity", identity, _grid2(),
            monotone=True, weakly_monotone=True,
            cyclic_monotone=True, weak_cyclic_monotone=True,
            support_chain=True,
        ),
        CorpusEntry(
            "sign_table", make_sign_map(), _grid1(),
            monotone=True, weakly_monotone=True,
            cyclic_monotone=True, weak_cyclic_monotone=True,
            support_chain=True,
        ),
        CorpusEntry(
            "lonely_spike", make_non_wcm_map(), _grid1(),
            monotone=False, weakly_monotone=False,
            cyclic_monotone=False, weak_cyclic_monotone=False,
            support_chain=False,
        ),
    ]


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


@pytest.fixture(scope="session")
def cm_corpus(corpus):
    """Entries whose map is cyclically monotone on the grid."""
    return [e for e in corpus if e.cyclic_monotone]


@pytest.fixture(scope="session")
def pl_corpus(corpus):
    return [e for e in corpus if e.pl_function is not None]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260816)
