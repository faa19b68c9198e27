"""Shared corpus fixtures; session-scoped since generation is deterministic."""

from __future__ import annotations

import pytest

from probsynth import (
    cluster_subsets,
    derive_thresholds,
    generate_zipf_corpus,
    random_program_corpus,
    subset_instruction_probs,
)


@pytest.fixture(scope="session")
def zipf_corpus():
    """Plain Zipf corpus: 10,000 units over 200 ranked instructions."""
    return generate_zipf_corpus(10_000, 200, 1.0, "1..40", seed=1)


@pytest.fixture(scope="session")
def clustered_corpus():
    """Clustered Zipf corpus: 10,000 units drawn from 24 overlapping pools."""
    return generate_zipf_corpus(10_000, 120, 1.0, "1..30", seed=11, clusters=24, cluster_size=10)


@pytest.fixture(scope="session")
def clustered_family(clustered_corpus):
    return cluster_subsets(clustered_corpus, cap=10)


@pytest.fixture(scope="session")
def clustered_tables(clustered_corpus, clustered_family):
    return {
        s.id: subset_instruction_probs(clustered_corpus, s) for s in clustered_family.subsets
    }


@pytest.fixture(scope="session")
def clustered_thresholds(clustered_corpus, clustered_family, clustered_tables):
    return {
        s.id: derive_thresholds(
            clustered_corpus, clustered_tables[s.id], list(s.covered_units), 30
        )
        for s in clustered_family.subsets
    }


@pytest.fixture(scope="session")
def dsl_corpus():
    """Well-formed stack-DSL programs usable both as corpus units and programs."""
    return random_program_corpus(300, "1..6", seed=17)


@pytest.fixture(scope="session")
def dsl_family(dsl_corpus):
    return cluster_subsets(dsl_corpus, cap=8)


@pytest.fixture(scope="session")
def dsl_tables(dsl_corpus, dsl_family):
    return {s.id: subset_instruction_probs(dsl_corpus, s) for s in dsl_family.subsets}


@pytest.fixture(scope="session")
def dsl_thresholds(dsl_corpus, dsl_family, dsl_tables):
    return {
        s.id: derive_thresholds(dsl_corpus, dsl_tables[s.id], list(s.covered_units), 6)
        for s in dsl_family.subsets
    }
