"""SPICE netlist parsing and emission.

Line-oriented and deliberately permissive about dialect: unknown cards and
directives pass through untouched. Continuation lines (leading ``+``) are
joined into one logical card at parse time, so a first emit normalizes and
every later emit is stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ParseError

# Node counts by element letter. E/G sources may instead use the two-node
# VALUE/TABLE form, handled specially below. X cards take every middle
# token as a node. Letters missing here parse with zero nodes.
_NODE_COUNTS = {
    "R": 2, "L": 2, "C": 2, "V": 2, "I": 2, "D": 2, "B": 2,
    "F": 2, "H": 2, "W": 2, "E": 4, "G": 4, "S": 4, "Q": 3, "J": 3, "M": 4,
}
_TWO_NODE_MARKERS = ("VALUE", "TABLE", "POLY", "{")


@dataclass(frozen=True)
class Comment:
    raw: str
    line: int = field(default=0, compare=False)

    def emit_lines(self) -> list[str]:
        return [self.raw]


@dataclass(frozen=True)
class Directive:
    keyword: str  # lowercase, no dot
    raw: str
    line: int = field(default=0, compare=False)

    def emit_lines(self) -> list[str]:
        return [self.raw]

    @property
    def tokens(self) -> list[str]:
        return self.raw.split()


@dataclass(frozen=True)
class ElementCard:
    name: str
    nodes: tuple[str, ...]
    args: tuple[str, ...]
    raw: str
    line: int = field(default=0, compare=False)

    def emit_lines(self) -> list[str]:
        return [self.raw]

    @property
    def letter(self) -> str:
        return self.name[0].upper()


@dataclass(frozen=True)
class ControlCommand:
    raw: str
    line: int = field(default=0, compare=False)

    @property
    def text(self) -> str:
        """Command text without a trailing ; comment."""
        return self.raw.split(";", 1)[0].strip()

    @property
    def tokens(self) -> list[str]:
        return self.text.split()

    def emit_lines(self) -> list[str]:
        return [self.raw]


@dataclass(frozen=True)
class ControlBlock:
    commands: tuple[ControlCommand, ...]
    line: int = field(default=0, compare=False)

    def emit_lines(self) -> list[str]:
        return [".control", *(c.raw for c in self.commands), ".endc"]


@dataclass(frozen=True)
class Subcircuit:
    name: str
    ports: tuple[str, ...]
    cards: tuple = ()
    line: int = field(default=0, compare=False)

    def emit_lines(self) -> list[str]:
        out = [f".subckt {self.name} {' '.join(self.ports)}"]
        for card in self.cards:
            out.extend(card.emit_lines())
        out.append(".ends")
        return out

    @property
    def elements(self) -> list[ElementCard]:
        return [c for c in self.cards if isinstance(c, ElementCard)]


@dataclass
class Netlist:
    title: str
    items: list = field(default_factory=list)
    has_end: bool = True

    @property
    def elements(self) -> list[ElementCard]:
        """Main-circuit element cards, subcircuit bodies excluded."""
        return [i for i in self.items if isinstance(i, ElementCard)]

    @property
    def directives(self) -> list[Directive]:
        return [i for i in self.items if isinstance(i, Directive)]

    @property
    def subcircuits(self) -> list[Subcircuit]:
        return [i for i in self.items if isinstance(i, Subcircuit)]

    @property
    def control(self) -> ControlBlock | None:
        for i in self.items:
            if isinstance(i, ControlBlock):
                return i
        return None

    def params(self) -> dict[str, tuple[str, int]]:
        """.param definitions: name -> (value text, line)."""
        out: dict[str, tuple[str, int]] = {}
        for d in self.directives:
            if d.keyword != "param":
                continue
            body = d.raw.split(None, 1)[1] if len(d.raw.split(None, 1)) > 1 else ""
            if "=" in body:
                name, value = body.split("=", 1)
                out[name.strip().lower()] = (value.strip(), d.line)
        return out

    def element_by_name(self, name: str) -> ElementCard | None:
        low = name.lower()
        for e in self.elements:
            if e.name.lower() == low:
                return e
        return None


def _logical_lines(text: str) -> list[tuple[str, int]]:
    """Join + continuations, keep the first physical line number of a card."""
    out: list[tuple[str, int]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("+"):
            if not out or not out[-1][0] or out[-1][0].startswith("*"):
                raise ParseError("continuation line without a preceding card", number)
            prev, prev_no = out[-1]
            out[-1] = (prev + " " + stripped[1:].strip(), prev_no)
        else:
            out.append((stripped, number))
    return out


def _parse_element(raw: str, line: int) -> ElementCard:
    tokens = raw.split()
    name = tokens[0]
    letter = name[0].upper()
    count = _NODE_COUNTS.get(letter, 0)
    rest = tokens[1:]
    if letter == "X":
        if len(rest) < 2:
            raise ParseError(f"subcircuit call {name} needs nodes and a name", line)
        return ElementCard(name, tuple(rest[:-1]), (rest[-1],), raw, line)
    if letter in ("E", "G") and len(rest) >= 3:
        marker = rest[2].upper()
        if marker.startswith(_TWO_NODE_MARKERS) or "=" in rest[2]:
            count = 2
    if len(rest) < count:
        raise ParseError(f"element {name} needs {count} nodes", line)
    return ElementCard(name, tuple(rest[:count]), tuple(rest[count:]), raw, line)


def parse_netlist(text: str) -> Netlist:
    """Parse netlist text. The first line is always the title."""
    if not text.strip():
        raise ParseError("empty netlist", 1)
    lines = _logical_lines(text)
    title, _ = lines[0]
    netlist = Netlist(title=title, items=[], has_end=False)

    def parse_card(raw: str, number: int):
        if raw.startswith("*"):
            return Comment(raw, number)
        if raw.startswith("."):
            return Directive(raw.split()[0][1:].lower(), raw, number)
        return _parse_element(raw, number)

    i = 1
    while i < len(lines):
        raw, number = lines[i]
        i += 1
        if not raw:
            continue
        if raw.startswith("*"):
            netlist.items.append(Comment(raw, number))
            continue
        if raw.startswith("."):
            keyword = raw.split()[0][1:].lower()
            if keyword == "end":
                netlist.has_end = True
                break
            if keyword in ("ends", "endc"):
                raise ParseError(f".{keyword} without an opening block", number)
            if keyword == "control":
                commands = []
                closed = False
                while i < len(lines):
                    inner, inner_no = lines[i]
                    i += 1
                    if inner.lower().startswith(".endc"):
                        closed = True
                        break
                    if inner:
                        commands.append(ControlCommand(inner, inner_no))
                if not closed:
                    raise ParseError(".control block never closed", number)
                netlist.items.append(ControlBlock(tuple(commands), number))
                continue
            if keyword == "subckt":
                tokens = raw.split()
                if len(tokens) < 2:
                    raise ParseError(".subckt needs a name", number)
                name, ports = tokens[1], tuple(tokens[2:])
                cards = []
                closed = False
                while i < len(lines):
                    inner, inner_no = lines[i]
                    i += 1
                    if not inner:
                        continue
                    low = inner.lower()
                    if low.startswith(".ends"):
                        closed = True
                        break
                    if low.startswith(".subckt"):
                        raise ParseError("nested .subckt is not supported", inner_no)
                    cards.append(parse_card(inner, inner_no))
                if not closed:
                    raise ParseError(f".subckt {name} never closed", number)
                netlist.items.append(Subcircuit(name, ports, tuple(cards), number))
                continue
            netlist.items.append(Directive(keyword, raw, number))
            continue
        netlist.items.append(_parse_element(raw, number))

    if not netlist.has_end:
        raise ParseError("missing .end", len(lines))
    return netlist


def emit(netlist: Netlist) -> str:
    lines = [netlist.title]
    for item in netlist.items:
        lines.extend(item.emit_lines())
    if netlist.has_end:
        lines.append(".end")
    return "\n".join(lines) + "\n"
