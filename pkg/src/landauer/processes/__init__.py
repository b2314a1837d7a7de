"""Process construction, execution and verification."""
from .constructions import (KStepReport, KStepSpec, SwapClosedForms, build_kstep_process,
                            build_swap_process, build_tight_process, deltaS_range_witnesses,
                            initial_support_rotation, kstep_dense_spec, swap_closed_forms)
from .core import (EqualityDiagnosis, ProcessReport, ProcessSpec, check_equality_case,
                   pureness_bound_check, run_process)
from .scenarios import (CorrelationCounterexamples, MemoryProcessSpec, MemoryReport,
                        PureErasureReport, classical_memory_state, controlled_shift,
                        correlated_pair_example, correlated_start_check,
                        correlation_counterexamples, entangled_memory_state,
                        integral_version_check, memory_erasure_spec, memory_process_report,
                        mixing_heat, multi_system_check, pure_erasure_dense_spec,
                        pure_erasure_truncated, required_depth, two_stage_entangled_erasure)

__all__ = [
    "KStepReport", "KStepSpec", "SwapClosedForms", "build_kstep_process", "build_swap_process",
    "build_tight_process", "deltaS_range_witnesses", "initial_support_rotation",
    "kstep_dense_spec", "swap_closed_forms", "EqualityDiagnosis", "ProcessReport",
    "ProcessSpec", "check_equality_case", "pureness_bound_check", "run_process",
    "CorrelationCounterexamples", "MemoryProcessSpec", "MemoryReport", "PureErasureReport",
    "classical_memory_state", "controlled_shift", "correlated_pair_example",
    "correlated_start_check", "correlation_counterexamples", "entangled_memory_state",
    "integral_version_check", "memory_erasure_spec", "memory_process_report", "mixing_heat",
    "multi_system_check", "pure_erasure_dense_spec", "pure_erasure_truncated",
    "required_depth", "two_stage_entangled_erasure",
]
