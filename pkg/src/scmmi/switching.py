"""Gate-state logic for one sub-module.

Switch numbering (1-based, matching the sub-module schematic):
  S_1..S_4   output bridge. Leg A = (S_1 upper, S_2 lower), leg B =
             (S_3 upper, S_4 lower); the phase load hangs across the two
             leg midpoints. Upper/lower switches are complementary.
  S_{3j-1}   series-insertion switch of capacitor j (j >= 2): stacks
             capacitor j on top of capacitor j-1.
  S_{3j}, S_{3j+1}  parallel pair of capacitor j: clamps it across
             capacitor j-1 so the ladder equalizes toward V_DC/n.

Capacitor 1 always sits in the dc chain (its terminals are the sub-module
bus terminals). For output magnitude m, capacitors 2..m are stacked in
series and every capacitor above m is paralleled onto its neighbour below.
"""

from dataclasses import dataclass

from .errors import InvalidLevelCountError, InvalidLevelError, InvalidStateError
from .topology import component_counts

__all__ = [
    "LevelCommand",
    "ConnectionState",
    "ShortReport",
    "level_to_switch_vector",
    "switch_vector_to_connection",
    "validate_no_short",
    "satisfies_invariants",
    "enumerate_legal_states",
]

ON_BUS = "on_bus"
SERIES = "series"
PARALLEL = "parallel"
DISCONNECTED = "disconnected"


@dataclass(frozen=True)
class LevelCommand:
    """Commanded output level; the hint disambiguates the two zero states."""

    level: int
    polarity_hint: int = 1


@dataclass(frozen=True)
class ConnectionState:
    """Per-capacitor connection derived from a switch vector.

    cap_states[j-1] is the state of capacitor j; capacitor 1 is always
    ON_BUS. output_polarity is '+', '-' or 'bypass'.
    """

    cap_states: tuple
    output_polarity: str
    level: int


@dataclass(frozen=True)
class ShortReport:
    """Description of a shoot-through path found in a switch vector."""

    kind: str        # 'leg', 'capacitor' or 'source'
    element: str
    detail: str


def _series_idx(j):
    # 0-based index of the series switch of capacitor j (j >= 2)
    return 3 * j - 2


def _parallel_idx(j):
    # 0-based indices of the parallel pair of capacitor j (j >= 2)
    return 3 * j - 1, 3 * j


def level_to_switch_vector(cmd: LevelCommand, n_levels: int,
                           balance_in_zero: bool = False):
    """Gate states realizing the commanded level, as a tuple of bools.

    At zero level, S_1 follows the sign comparator: it closes for a
    negative polarity hint (upper-path zero state) and opens otherwise.
    With balance_in_zero, the parallel pairs stay closed at zero level so
    the ladder keeps equalizing.
    """
    spec = component_counts(n_levels)
    n_caps = spec.n_capacitors
    m = abs(cmd.level)
    if m > n_caps:
        raise InvalidLevelError(
            f"level {cmd.level} outside +-{n_caps} for {n_levels}-level sub-module"
        )
    s = [False] * spec.n_switches
    if cmd.level > 0:
        s[1] = s[2] = True           # S_2, S_3
    elif cmd.level < 0:
        s[0] = s[3] = True           # S_1, S_4
    elif cmd.polarity_hint < 0:
        s[0] = s[2] = True           # zero state A: S_1, S_3
    else:
        s[1] = s[3] = True           # zero state B: S_2, S_4
    for j in range(2, n_caps + 1):
        if j <= m:
            s[_series_idx(j)] = True
        elif m >= 1 or balance_in_zero:
            p, q = _parallel_idx(j)
            s[p] = s[q] = True
    return tuple(s)


def _cap_mode(vec, j):
    """'series', 'parallel', 'disconnected' or None for a conflicting mix."""
    ser = vec[_series_idx(j)]
    p, q = _parallel_idx(j)
    if vec[p] != vec[q]:
        return None
    par = vec[p]
    if ser and par:
        return None
    if ser:
        return SERIES
    if par:
        return PARALLEL
    return DISCONNECTED


def satisfies_invariants(vec, n_levels: int,
                         balance_in_zero: bool = False) -> bool:
    """Structural well-formedness of a raw switch vector.

    Requires complementary bridge legs, internally-equal parallel pairs,
    no series/parallel conflict on any capacitor, and a ladder pattern
    that corresponds to some output level (series run 2..m, parallel
    above, or all-off / all-parallel at zero).
    """
    try:
        switch_vector_to_connection(vec, n_levels, balance_in_zero)
    except InvalidStateError:
        return False
    return True


def switch_vector_to_connection(vec, n_levels: int,
                                balance_in_zero: bool = False) -> ConnectionState:
    """Decode a switch vector into the capacitor connection topology.

    By default the zero level requires every inner capacitor to be
    disconnected (the table rows); with balance_in_zero the all-paralleled
    zero variant is also accepted.
    """
    spec = component_counts(n_levels)
    if len(vec) != spec.n_switches:
        raise InvalidStateError(
            f"expected {spec.n_switches} switch states, got {len(vec)}"
        )
    s1, s2, s3, s4 = vec[0], vec[1], vec[2], vec[3]
    if s2 == s1 or s4 == s3:
        raise InvalidStateError("bridge legs are not complementary")
    n_caps = spec.n_capacitors
    modes = []
    for j in range(2, n_caps + 1):
        mode = _cap_mode(vec, j)
        if mode is None:
            raise InvalidStateError(
                f"capacitor {j} is simultaneously series and paralleled "
                "or its parallel pair disagrees"
            )
        modes.append(mode)

    if s1 == s3:
        # both midpoints on the same rail: bypass
        if any(m == SERIES for m in modes):
            raise InvalidStateError("series insertion during zero level")
        if any(m == PARALLEL for m in modes) and not (
            balance_in_zero and all(m == PARALLEL for m in modes)
        ):
            raise InvalidStateError("paralleling during zero level")
        return ConnectionState(
            cap_states=(ON_BUS,) + tuple(modes),
            output_polarity="bypass",
            level=0,
        )

    # nonzero output: leading series run 2..m, everything above paralleled
    m = 1
    for mode in modes:
        if mode == SERIES:
            m += 1
        else:
            break
    if any(mode != PARALLEL for mode in modes[m - 1:]):
        raise InvalidStateError("ladder pattern does not map to any level")
    level = m if (not s1 and s3) else -m
    return ConnectionState(
        cap_states=(ON_BUS,) + tuple(modes),
        output_polarity="+" if level > 0 else "-",
        level=level,
    )


def sm_graph_edges(vec, n_levels: int):
    """Closed-switch edges over symbolic sub-module nodes.

    Nodes: 'T'/'B' (capacitor-1 terminals, the bus), 'c{j}t'/'c{j}b' for
    inner capacitors, 'legA'/'legB' midpoints. The bridge top rail is the
    top terminal of the last capacitor.
    """
    spec = component_counts(n_levels)
    n_caps = spec.n_capacitors

    def cap_top(j):
        return "T" if j == 1 else f"c{j}t"

    def cap_bot(j):
        return "B" if j == 1 else f"c{j}b"

    rail = cap_top(n_caps)
    edges = []
    if vec[0]:
        edges.append((rail, "legA", "S1"))
    if vec[1]:
        edges.append(("legA", "B", "S2"))
    if vec[2]:
        edges.append((rail, "legB", "S3"))
    if vec[3]:
        edges.append(("legB", "B", "S4"))
    for j in range(2, n_caps + 1):
        if vec[_series_idx(j)]:
            edges.append((cap_bot(j), cap_top(j - 1), f"S{_series_idx(j) + 1}"))
        p, q = _parallel_idx(j)
        if vec[p]:
            edges.append((cap_top(j), cap_top(j - 1), f"S{p + 1}"))
        if vec[q]:
            edges.append((cap_bot(j), cap_bot(j - 1), f"S{q + 1}"))
    return edges


def validate_no_short(vec, n_levels: int):
    """Check a raw switch vector for shoot-through paths.

    Returns None when the vector is safe, otherwise a ShortReport naming
    the shorted element. Detected conditions: a bridge leg with both
    switches closed, any capacitor whose own terminals are joined through
    closed switches only, and a closed-switch path across the bus
    terminals.
    """
    spec = component_counts(n_levels)
    if len(vec) != spec.n_switches:
        raise InvalidStateError(
            f"expected {spec.n_switches} switch states, got {len(vec)}"
        )
    if vec[0] and vec[1]:
        return ShortReport("leg", "S1+S2",
                           "leg A shoot-through across the bridge rails")
    if vec[2] and vec[3]:
        return ShortReport("leg", "S3+S4",
                           "leg B shoot-through across the bridge rails")

    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    edges = sm_graph_edges(vec, n_levels)
    for a, b, _name in edges:
        union(a, b)

    n_caps = spec.n_capacitors
    for j in range(1, n_caps + 1):
        top = "T" if j == 1 else f"c{j}t"
        bot = "B" if j == 1 else f"c{j}b"
        if find(top) == find(bot):
            name = f"C{j}"
            return ShortReport("capacitor", name,
                               f"closed switches join both terminals of {name}")
    if find("T") == find("B"):
        return ShortReport("source", "bus",
                           "closed switches join the sub-module bus terminals")
    return None


def enumerate_legal_states(n_levels: int):
    """All legal (LevelCommand, switch vector) pairs, table order.

    Two redundant zero states first (upper-path then lower-path), then the
    positive levels ascending, then the negative levels descending:
    N_L + 1 entries in total.
    """
    spec = component_counts(n_levels)
    half = spec.n_capacitors
    commands = [LevelCommand(0, -1), LevelCommand(0, +1)]
    commands += [LevelCommand(+m) for m in range(1, half + 1)]
    commands += [LevelCommand(-m) for m in range(1, half + 1)]
    out = []
    for cmd in commands:
        vec = level_to_switch_vector(cmd, n_levels)
        report = validate_no_short(vec, n_levels)
        if report is not None:
            raise InvalidStateError(f"generated state shorts: {report}")
        out.append((cmd, vec))
    return out
