from .backbone import ToyBackbone
from .data import Split, SyntheticDatasetSpec, generate_dataset
from .metrics import classwise_accuracy
from .runner import BenchmarkReport, ModelConfig, run_benchmark, run_single
from .strategies import (STRATEGIES, SelfPacedPolicy, StaticEntropyPolicy, UniformPolicy,
                         make_policy, static_entropy_weights)
