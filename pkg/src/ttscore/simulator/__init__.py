"""Ground-truth engines: concrete stepping, enumeration and the explicit Markov chain."""

from ttscore.simulator.chain import (
    ExplicitChain,
    FrameAutomaton,
    build_frame,
    build_product_chain,
    chain_reachability,
    score_chain,
)
from ttscore.simulator.outcomes import (
    FaultSequence,
    Outcome,
    arrivals,
    forwarded_pairs,
    initial_configuration,
    run,
    sample_fault_sequence,
    score_enumerate,
    simulate,
    simulate_success,
    step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
