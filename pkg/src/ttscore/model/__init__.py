"""Networks, messages, scenarios and their persistence."""

from ttscore.model.generate import generate_random_scenario
from ttscore.model.io import (
    dumps_scenario,
    load_scenario,
    loads_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from ttscore.model.network import (
    PROB_TOL,
    Edge,
    FaultModel,
    Message,
    Network,
    Scenario,
    validate_scenario,
)

MessageSpec = Message

__all__ = [name for name in dir() if not name.startswith("_")]
