"""Query-access certificates for blackbox Boolean models via implicitly learned greedy trees."""

__version__ = "0.1.0"

from .baseline import BaselineConfig, greedy_precision_certificate
from .certifier import (
    Bottom, Certificate, CertifierConfig, certify_batch, find_certificate, verify_certificate,
    wire_parameters,
)
from .estimators import EstimatorConfig, hoeffding_samples, node_seed
from .implicit_tree import ImplicitTree, TreeParams
from .model import BlackboxModel, ModelExpr, Restriction, compile_model, parse_model
from .oracles import TruthTable
