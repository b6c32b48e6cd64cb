"""Composition and reduction of quantum feedback networks in the SLH formalism.

The package is organized as

* :mod:`slhnet.operators` -- dense operators on labeled tensor-product spaces;
* :mod:`slhnet.slh` -- SLH models, the Stratonovich (E-matrix) form and the
  Cayley transform between them;
* :mod:`slhnet.network` -- series product, concatenation, feedback reduction,
  isolated-loop Hamiltonians and loop-coupling formulas;
* :mod:`slhnet.linear` -- linear passive systems and delayed loops in the
  Laplace domain;
* :mod:`slhnet.components`, :mod:`slhnet.netspec`, :mod:`slhnet.cli` --
  component library, netlist language and the ``slhnet`` command.
"""
from .components import make_beamsplitter, make_cavity, make_phase_shifter, make_qubit_coupler
from .errors import (
    BadParam,
    DimensionMismatch,
    DuplicateName,
    DuplicatePortLabel,
    IllPosedNetwork,
    InvalidModel,
    NetspecError,
    NetspecSyntaxError,
    NoStratonovichForm,
    NumericalError,
    PortCountMismatch,
    SingularAtPoint,
    SingularMatrix,
    SLHError,
    UndefinedName,
    UnknownLabel,
)
from .linear import LinearPassiveModel, StateSpaceRealization, abcd, closed_loop_generator, delay_loop_omega, lqss_to_slh
from .netspec import NetworkSpec, evaluate, format_netspec, parse_netspec
from .network import (
    FeedbackPlan,
    beamsplitter_loop_family,
    close_all_loops,
    concat,
    coupling_f,
    feedback_reduce,
    feedback_reduce_strat,
    isolated_loop_hamiltonian,
    multi_loop_coupling,
    scalar_coupling_lambda,
    series,
    series_loop_decompose,
)
from .operators import Operator, SpaceLayout, create, destroy, embed, identity, number, sigma_minus, sigma_plus, sigma_z
from .slh import SLHModel, StratonovichModel, slh_to_strat, strat_to_slh, validate

__version__ = "0.1.0"
