import numpy as np
import pytest

from grank.catalog import Catalog, Item, load_fixture
from grank.clicklog import ClicklogEntry, make_query_key
from grank.node import NodeState


@pytest.fixture(scope="session")
def fixture_catalog():
    return load_fixture()


@pytest.fixture
def tiny_catalog():
    items = [
        Item(0, "Quiet Rivers", "Mara Holm", "Rivers EP", ("ambient", "dub")),
        Item(1, "Neon Circuits", "Teo Novak", "Circuits LP", ("techno",)),
        Item(2, "Lunar Tides", "Ilse Weber", "Tides", ("ambient",)),
        Item(3, "Ambient Machines", "Kai Reyes", "Machines", ("house",)),
        Item(4, "Golden Orbits", "Sol Duarte", "Orbits", ("techno", "house")),
        Item(5, "Faded Letters", "Yara Lambert", "Letters", ("dub",)),
    ]
    return Catalog(items)


def entry(origin, n, term, clicked, results=None, tags=()):
    results = tuple(results) if results is not None else (clicked,)
    return ClicklogEntry(origin, term, results, clicked, make_query_key(origin, n),
                         clicked_tags=frozenset(tags))


@pytest.fixture
def make_entry():
    return entry


@pytest.fixture
def make_node(tiny_catalog):
    def build(node_id, library=None, catalog=None):
        cat = catalog or tiny_catalog
        lib = frozenset(range(len(cat)) if library is None else library)
        return NodeState(node_id, cat, lib)
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
