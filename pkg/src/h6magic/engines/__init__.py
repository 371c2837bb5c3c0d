from .faults import FaultReport, inject_faults
from .frame import BatchTally, CompiledFrame, FrameCompileError, Stage, compile_frame, sample
from .tableau import TableauSimulator, run_tableau, run_with_faults, sample_tableau

__all__ = [
    "BatchTally",
    "CompiledFrame",
    "FaultReport",
    "FrameCompileError",
    "TableauSimulator",
    "compile_frame",
    "inject_faults",
    "run_tableau",
    "run_with_faults",
    "Stage",
    "sample",
    "sample_tableau",
]
