"""Symbolic pipeline: unrolled CNF, counters, literal weights, exact counting, DIMACS."""

from ttscore.encoder.cnf import BOT, TOP, Cnf, CnfBuilder, VariableBook
from ttscore.encoder.counter import at_least, counter_width, encode_counter, exactly
from ttscore.encoder.dimacs import (
    dumps_weighted_dimacs,
    emit_weighted_dimacs,
    load_weighted_dimacs,
    loads_weighted_dimacs,
)
from ttscore.encoder.exact import score_exact, weighted_formula, weighted_probability
from ttscore.encoder.psi import encode_psi
from ttscore.encoder.weighting import WeightedFormula, gadget_weights, to_literal_weighted
from ttscore.encoder.wmc import ModelCounter, exact_weighted_count, log_weighted_count

__all__ = [name for name in dir() if not name.startswith("_")]
