"""Netlist lint rules for the simulation contract.

Each rule flags constructions that break the ngspice run or the standard
control template. Error findings force a regeneration turn; warnings do
not. Findings are ordered by line so reports are deterministic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .parse import ControlBlock, ElementCard, Netlist, Subcircuit

PI_PARAM = "PI_PARAM"
NODE_NAME_LEN = "NODE_NAME_LEN"
GROUND_NODE = "GROUND_NODE"
CONTROL_TEMPLATE = "CONTROL_TEMPLATE"
TWO_ARG_VOLTAGE = "TWO_ARG_VOLTAGE"
RESERVED_LET_NAME = "RESERVED_LET_NAME"
BEHAVIORAL_PREFIX = "BEHAVIORAL_PREFIX"
PARAM_IN_CONTROL = "PARAM_IN_CONTROL"
PWL_MONOTONIC = "PWL_MONOTONIC"

ERROR = "error"
WARN = "warn"

_REQUIRED_PI = math.pi
_ANALYSIS_COMMANDS = {"ac", "dc", "op", "noise", "disto", "pz", "sens", "tf", "fourier", "four"}
_RESERVED_LET = {"v", "i"}
# A single v= or i= assignment token marks the braced behavioral form.
_BEHAVIORAL_ASSIGN = re.compile(r"(?<![A-Za-z0-9_])[vViI]\s*=\s*[{'\"]?")
_TWO_ARG_V = re.compile(r"(?i)(?<![A-Za-z0-9_])v\s*\(\s*[^\s(),]+\s*,")
_PWL = re.compile(r"(?i)(?<![A-Za-z0-9_])pwl\s*\(([^)]*)\)")


@dataclass(frozen=True)
class Finding:
    rule: str
    severity: str
    line: int
    message: str


@dataclass
class LintReport:
    findings: list[Finding]

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == ERROR]

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "findings": [f.__dict__ for f in self.findings],
        }

    def render(self) -> str:
        if not self.findings:
            return "clean\n"
        return "".join(
            f"{f.severity.upper()} {f.rule} line {f.line}: {f.message}\n" for f in self.findings
        )


def _all_element_cards(n: Netlist) -> list[tuple[ElementCard, Subcircuit | None]]:
    cards: list[tuple[ElementCard, Subcircuit | None]] = [(e, None) for e in n.elements]
    for sub in n.subcircuits:
        cards.extend((e, sub) for e in sub.elements)
    return cards


def rule_pi_param(n: Netlist) -> list[Finding]:
    params = n.params()
    if "pi" not in params:
        return [Finding(PI_PARAM, ERROR, 1, "missing .PARAM pi = 3.141592653589793")]
    value, line = params["pi"]
    try:
        good = float(value) == _REQUIRED_PI
    except ValueError:
        good = False
    if not good:
        return [Finding(PI_PARAM, ERROR, line, f"pi must equal 3.141592653589793, got {value!r}")]
    return []


def rule_node_name_len(n: Netlist) -> list[Finding]:
    out = []
    for card, sub in _all_element_cards(n):
        for node in card.nodes:
            if len(node) != 1:
                where = f" in .subckt {sub.name}" if sub else ""
                out.append(
                    Finding(NODE_NAME_LEN, ERROR, card.line,
                            f"node {node!r} on {card.name}{where}: names must be one character")
                )
    for sub in n.subcircuits:
        for port in sub.ports:
            if len(port) != 1:
                out.append(
                    Finding(NODE_NAME_LEN, ERROR, sub.line,
                            f"port {port!r} of .subckt {sub.name}: names must be one character")
                )
    return out


def rule_ground_node(n: Netlist) -> list[Finding]:
    nodes = {node for e in n.elements for node in e.nodes}
    if "0" not in nodes:
        return [Finding(GROUND_NODE, ERROR, 1, "no element connects to ground node 0")]
    return []


def _let_bindings(block: ControlBlock) -> list[tuple[str, str, int]]:
    """(name, rhs, line) per let command, tolerating let x=1 spacing."""
    out = []
    for cmd in block.commands:
        tokens = cmd.tokens
        if not tokens or tokens[0].lower() != "let":
            continue
        body = cmd.text[len(tokens[0]):].strip()
        if "=" not in body:
            out.append(("", body, cmd.line))
            continue
        name, rhs = body.split("=", 1)
        out.append((name.strip(), rhs.strip(), cmd.line))
    return out


def rule_control_template(n: Netlist) -> list[Finding]:
    block = n.control
    if block is None:
        return [Finding(CONTROL_TEMPLATE, ERROR, 1, "missing .control block")]
    out = []
    tran = [c for c in block.commands if c.tokens and c.tokens[0].lower() == "tran"]
    if len(tran) != 1:
        out.append(
            Finding(CONTROL_TEMPLATE, ERROR, block.line,
                    f"control template requires exactly one tran command, found {len(tran)}")
        )
    defined: set[str] = set()
    printed = plotted = False
    for cmd in block.commands:
        tokens = cmd.tokens
        if not tokens:
            continue
        word = tokens[0].lower()
        if word.startswith("."):
            out.append(Finding(CONTROL_TEMPLATE, ERROR, cmd.line,
                               f"dotted command {tokens[0]} not allowed inside .control"))
            continue
        if word in _ANALYSIS_COMMANDS:
            out.append(Finding(CONTROL_TEMPLATE, ERROR, cmd.line,
                               f"analysis command {word!r} not allowed; template runs tran only"))
            continue
        if word == "let":
            body = cmd.text[len(tokens[0]):].strip()
            if "=" not in body:
                out.append(Finding(CONTROL_TEMPLATE, ERROR, cmd.line, "malformed let, expected let name = expr"))
            else:
                defined.add(body.split("=", 1)[0].strip())
            continue
        if word in ("print", "plot"):
            printed = printed or word == "print"
            plotted = plotted or word == "plot"
            for arg in tokens[1:]:
                if arg not in defined:
                    out.append(
                        Finding(CONTROL_TEMPLATE, ERROR, cmd.line,
                                f"{word} argument {arg!r} is not a previously let-defined variable")
                    )
    if not printed:
        out.append(Finding(CONTROL_TEMPLATE, ERROR, block.line, "control template requires a print command"))
    if not plotted:
        out.append(Finding(CONTROL_TEMPLATE, ERROR, block.line, "control template requires a plot command"))
    return out


def rule_two_arg_voltage(n: Netlist) -> list[Finding]:
    out = []
    for card, _ in _all_element_cards(n):
        if _TWO_ARG_V.search(card.raw):
            out.append(Finding(TWO_ARG_VOLTAGE, ERROR, card.line,
                               f"two-argument v(a,b) on {card.name}: reference voltages explicitly"))
    block = n.control
    if block:
        for cmd in block.commands:
            if _TWO_ARG_V.search(cmd.text):
                out.append(Finding(TWO_ARG_VOLTAGE, ERROR, cmd.line,
                                   "two-argument v(a,b) in control block"))
    return out


def rule_reserved_let_name(n: Netlist) -> list[Finding]:
    block = n.control
    if block is None:
        return []
    out = []
    for name, _, line in _let_bindings(block):
        if name.lower() in _RESERVED_LET:
            out.append(Finding(RESERVED_LET_NAME, ERROR, line,
                               f"let name {name!r} shadows a built-in vector accessor"))
    return out


def rule_behavioral_prefix(n: Netlist) -> list[Finding]:
    out = []
    for card, _ in _all_element_cards(n):
        if card.letter == "B":
            continue
        rest = card.raw.split(None, 1)[1] if " " in card.raw else ""
        if _BEHAVIORAL_ASSIGN.search(rest):
            out.append(Finding(BEHAVIORAL_PREFIX, ERROR, card.line,
                               f"behavioral V=/I= expression on {card.name}: name must begin with B"))
    return out


def rule_param_in_control(n: Netlist) -> list[Finding]:
    block = n.control
    if block is None:
        return []
    params = n.params()
    if not params:
        return []
    pattern = re.compile(
        r"(?i)(?<![A-Za-z0-9_])(" + "|".join(re.escape(p) for p in params) + r")(?![A-Za-z0-9_])"
    )
    out = []
    shadowed: set[str] = set()
    for cmd in block.commands:
        tokens = cmd.tokens
        text = cmd.text
        if tokens and tokens[0].lower() == "let" and "=" in text:
            # A let may redefine the symbol as a scalar; only its right-hand
            # side must stay numeric.
            lhs, text = text.split("=", 1)
            name = lhs.strip().split(None, 1)[-1].strip()
            for hit in pattern.finditer(text):
                if hit.group(1).lower() not in shadowed:
                    out.append(Finding(PARAM_IN_CONTROL, ERROR, cmd.line,
                                       f".param symbol {hit.group(1)!r} used in control block; use its numeric value"))
            shadowed.add(name.lower())
            continue
        for hit in pattern.finditer(text):
            if hit.group(1).lower() not in shadowed:
                out.append(Finding(PARAM_IN_CONTROL, ERROR, cmd.line,
                                   f".param symbol {hit.group(1)!r} used in control block; use its numeric value"))
    return out


def rule_pwl_monotonic(n: Netlist) -> list[Finding]:
    out = []
    for card, _ in _all_element_cards(n):
        for match in _PWL.finditer(card.raw):
            try:
                values = [float(tok) for tok in match.group(1).replace(",", " ").split()]
            except ValueError:
                continue
            times = values[0::2]
            if any(b <= a for a, b in zip(times, times[1:])):
                out.append(Finding(PWL_MONOTONIC, WARN, card.line,
                                   f"PWL time points on {card.name} are not strictly increasing"))
    return out


RULES = {
    PI_PARAM: rule_pi_param,
    NODE_NAME_LEN: rule_node_name_len,
    GROUND_NODE: rule_ground_node,
    CONTROL_TEMPLATE: rule_control_template,
    TWO_ARG_VOLTAGE: rule_two_arg_voltage,
    RESERVED_LET_NAME: rule_reserved_let_name,
    BEHAVIORAL_PREFIX: rule_behavioral_prefix,
    PARAM_IN_CONTROL: rule_param_in_control,
    PWL_MONOTONIC: rule_pwl_monotonic,
}


def lint(netlist: Netlist) -> LintReport:
    findings: list[Finding] = []
    for rule in RULES.values():
        findings.extend(rule(netlist))
    findings.sort(key=lambda f: (f.line, f.rule, f.message))
    return LintReport(findings)
