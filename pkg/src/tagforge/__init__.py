"""tagforge: 2-tag and cyclic tag interpreters, and a cyclic-to-2-tag compiler."""

from tagforge.tag import HaltReason, RunResult, TagConfig, TagSystem, run, step, validate
from tagforge.cyclic import CyclicConfig, CyclicTagSystem, crun, cstep, cvalidate
from tagforge.codec import DecoratedSymbol, Stage, decode, encode_config, encode_input
from tagforge.compiler import CompiledSystem, compile_cyclic, gen_parity_tester
from tagforge.harness import bench, lockstep_verify

__all__ = [
    "CompiledSystem",
    "CyclicConfig",
    "CyclicTagSystem",
    "DecoratedSymbol",
    "HaltReason",
    "RunResult",
    "Stage",
    "TagConfig",
    "TagSystem",
    "bench",
    "compile_cyclic",
    "crun",
    "cstep",
    "cvalidate",
    "decode",
    "encode_config",
    "encode_input",
    "gen_parity_tester",
    "lockstep_verify",
    "run",
    "step",
    "validate",
]

__version__ = "0.1.0"
