"""Classical simulation of parameterized quantum circuits through polynomial operator subspaces."""

__version__ = "0.1.0"

from .circuits import Circuit, Gate, ParamDistribution, sample_params
from .dla import LieBasis, adjoint_generator, lie_closure, project_onto_algebra, structure_constants
from .errors import (
    ArgumentError,
    ConsistencyError,
    DimensionError,
    InadmissibleError,
    ResourceError,
    SubspaceSimError,
    UnanswerableWordError,
    UnsupportedGateError,
)
from .gsim import GsimInstance, adjoint_gate_action, gsim_loss, prepare_instance
from .hamming import SectorState, apply_sector_gate, embed_state, sector_dim, sector_loss
from .lightcone import LightCone, backward_cone, reduced_loss, reduced_loss_from_shadows
from .matchgate import (
    MajoranaMonomial,
    RotationMatrix,
    circuit_rotation,
    majorana_to_pauli,
    module_dim,
    module_loss,
)
from .pauli import PauliString, PauliSum, commutator, hs_inner, multiply, weight
from .propagation import TruncationPolicy, backpropagate, loss_from_expectations, split_observable
from .shadows import ShadowDataset, acquire, estimate_pauli, median_of_means, qcnn_shadow_count
from .statevector import DenseState, apply_circuit, loss, parameter_shift_gradient

__all__ = [name for name in dir() if not name.startswith("_")]
