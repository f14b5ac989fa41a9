"""Shared builders for the argument-system tests."""

from zkparametric.algebra import G1Point
from zkparametric.scs import ConstraintSystem, Witness


def attach_data(cs: ConstraintSystem, wit: Witness, gate: int, m: int = 1):
    """Copy ``cs`` and append m data gates, the first tied to a_gate.

    Returns (system, core witness, data values).  Data gates carry b = c = 0,
    so their multiplicative constraints hold for any value.
    """
    out = ConstraintSystem(cs.p)
    out.add_multiplication(cs.N)
    out.linear = list(cs.linear)
    first = out.add_multiplication(m)
    out.add_linear(u={first: 1, gate: -1})
    values = [wit.a[gate - 1]] + [7 * (t + 1) for t in range(1, m)]
    return out, wit, values


def toy_system(p):
    """One product gate fed by four data values: (d1 + d2)(d3 + d4)."""
    cs = ConstraintSystem(p)
    cs.add_multiplication(5)
    cs.add_linear(u={1: 1, 2: -1, 3: -1})
    cs.add_linear(v={1: 1}, u={4: -1, 5: -1})
    d = [3, 4, 5, 6]
    core = Witness.of([7], [11], [77], p)
    return cs, core, d


def mutate(value, curve, j=1):
    if isinstance(value, G1Point):
        return value + curve.g * j
    if isinstance(value, int):
        return (value + j) % curve.p
    b = bytearray(value)
    b[j % len(b)] ^= 1
    return bytes(b)


# verdict lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []
