"""flexasm: dynamics and path optimization for walking-robot assembly of
large flexible orbital structures.

Layered library:

* :mod:`flexasm.linss` -- labeled-channel state-space algebra and norms
* :mod:`flexasm.multibody` -- transport, two-port and n-port body models
* :mod:`flexasm.modal` -- tile lattices, modal solve, body files
* :mod:`flexasm.robot` -- arm chains, kinematics, joint trajectories
* :mod:`flexasm.scenario` -- full spacecraft plant and attitude loop
* :mod:`flexasm.robust` -- structured-singular-value margins
* :mod:`flexasm.pathopt` -- node graphs, edge costs, assembly planning
* :mod:`flexasm.cli` -- configuration-driven command line front end
"""

from importlib import resources as _resources

__version__ = "0.1.0"


def data_path(name: str):
    """Path to a packaged fixture file (e.g. ``"solar_array.yaml"``)."""
    return _resources.files(__name__).joinpath("data", name)
