import pytest

from clique.graph import Graph


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def triangle_with_tail():
    # 0-1-2 triangle, 2-3 pendant, 4 isolated
    return Graph.from_edge_list([(0, 1), (1, 2), (0, 2), (2, 3)], 5)


@pytest.fixture
def path4():
    return Graph.from_edge_list([(0, 1), (1, 2), (2, 3)], 4)

