"""Benchmark instances, reference oracles and model file formats."""

from .formats import FORMATS, emit, emit_cbf, emit_json, emit_lp, parse_json, read_json, write_model
from .generators import (FAMILIES, InstanceSpec, gen_covering, gen_packing, gen_slr, generate,
                         kernel_expand, load_csv, slr_objective, synthetic_slr)
from .oracle import brute_force_oracle, brute_force_solve, slr_support_oracle

__all__ = ["FAMILIES", "FORMATS", "InstanceSpec", "brute_force_oracle", "brute_force_solve", "emit",
           "emit_cbf", "emit_json", "emit_lp", "gen_covering", "gen_packing", "gen_slr", "generate",
           "kernel_expand", "load_csv", "parse_json", "read_json", "slr_objective", "slr_support_oracle",
           "synthetic_slr", "write_model"]
