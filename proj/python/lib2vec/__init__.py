"""Python interface to the library cell embedding toolkit."""

from ._core import (
    Lib2VecError,
    analogy_from_csv,
    cell_truth_table,
    expr_truth_table,
    fun_sim,
    generate_netlist_json,
    generate_tests,
    parse_library_json,
    run_pipeline,
    simulate_netlist,
    version,
)

__all__ = [
    "Lib2VecError",
    "analogy_from_csv",
    "cell_truth_table",
    "expr_truth_table",
    "fun_sim",
    "generate_netlist_json",
    "generate_tests",
    "parse_library_json",
    "run_pipeline",
    "simulate_netlist",
    "version",
]

__version__ = "0.1.0"
