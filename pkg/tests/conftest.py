from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from press.corpus import GenConfig, gen_corpus, gen_network
from press.network import build_sp_index
from press.query import build_query_index
from press.spatial import train_model

import helpers

settings.register_profile("press", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("press")


def pytest_terminal_summary(terminalreporter):
    if not helpers.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(helpers.ACCEPTANCE):
        name, passed, detail = helpers.ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {k:>2}. {name}: {detail}")


@pytest.fixture(scope="session")
def grid16():
    net = helpers.grid16_network()
    return net, build_sp_index(net)


@pytest.fixture(scope="session")
def small_world():
    """A 6x6 grid, 60 trajectories, model trained on the first half."""
    cfg = GenConfig(seed=11, rows=6, cols=6, count=60, length_range=(10, 40))
    net = gen_network(cfg)
    index = build_sp_index(net)
    corpus = gen_corpus(net, index, cfg)
    model = train_model([t.path for t in corpus[:30]], index, 3)
    qi = build_query_index(model, index, net)
    return net, index, corpus, model, qi
