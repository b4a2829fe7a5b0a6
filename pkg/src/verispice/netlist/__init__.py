from .lint import Finding, LintReport, lint
from .parse import Netlist, ParseError, emit, parse_netlist

__all__ = ["Finding", "LintReport", "lint", "Netlist", "ParseError", "emit", "parse_netlist"]
