import random

import pytest

from wordgrid.synth import make_table, table_from_layout


@pytest.fixture
def plain_2x2():
    return table_from_layout([["a", "b"], ["c", "d"]], table_id="plain-2x2")


@pytest.fixture
def header_colspan2():
    return table_from_layout([["h", "h"], ["a", "b"]], table_id="header-colspan2")


@pytest.fixture
def rowspan2_left():
    return table_from_layout([["r", "a"], ["r", "b"]], table_id="rowspan2-left")


@pytest.fixture
def random_tables():
    def make(count, seed=0, **kwargs):
        rng = random.Random(seed)
        return [make_table(rng, table_id=f"rt-{seed}-{i}", **kwargs) for i in range(count)]

    return make
