import pytest

from wdplab.model import make_instance


@pytest.fixture
def fig1():
    """Worked 4-bid, 3-item example used across the suite.

    Bids: (2,0,0)@1, (2,2,1)@5, (0,1,1)@2, (0,1,4)@3; units (6,3,4).
    Optimal allocation [1,1,1,0] with revenue 8.
    """
    return make_instance(
        [6, 3, 4],
        [((2, 0, 0), 1.0), ((2, 2, 1), 5.0), ((0, 1, 1), 2.0), ((0, 1, 4), 3.0)],
        name="fig1",
    )
