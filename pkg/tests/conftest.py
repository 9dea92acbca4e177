import numpy as np
import pytest

from semicov.annulus import BaseMap, FiberMap, TauSpec, make_skew_product
from semicov.circle import from_function, model_lift


@pytest.fixture(scope="session")
def m2():
    return model_lift(2)


@pytest.fixture(scope="session")
def m3():
    return model_lift(3)


@pytest.fixture(scope="session")
def sine2():
    return from_function(lambda x: 2 * x + 0.1 * np.sin(2 * np.pi * x),
                         metadata={"family": "sine", "degree": 2, "amplitude": 0.1})


@pytest.fixture(scope="session")
def product_z2():
    """The product model (x, z^2)."""
    return make_skew_product(BaseMap("identity"), FiberMap(2))


@pytest.fixture(scope="session")
def contracting_z2():
    """Contracting base with the squaring fiber."""
    return make_skew_product(BaseMap("contraction", (0.5, 0.9)), FiberMap(2))


@pytest.fixture(scope="session")
def contracting_z3():
    return make_skew_product(BaseMap("contraction", (0.5, 0.9)), FiberMap(3))


@pytest.fixture(scope="session")
def example_map():
    """Base pushing to 1, fiber 2y + 1/(1-x): no global deviation bound."""
    return make_skew_product(BaseMap("affine_to_one"),
                             FiberMap(2, tau=TauSpec("inv_one_minus", 1.0)))
