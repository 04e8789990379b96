"""Two-instruction register machine, its step-budgeted interpreter and a
bijective numbering of programs.

A program is a tuple of instructions.  ``Inc(r)`` adds one to register ``r``;
``Djz(r, a)`` jumps to ``a`` when register ``r`` is zero and otherwise
decrements it and falls through.  The machine halts as soon as the program
counter leaves the program, and the result is whatever register 0 holds.

Program ``n`` of the numbering is ``decode(n)``; ``decode(0)`` is the empty
program, which computes the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Union

__all__ = [
    "Inc",
    "Djz",
    "Instruction",
    "Program",
    "MachineState",
    "Halted",
    "BudgetExceeded",
    "EvalOutcome",
    "pair",
    "unpair",
    "encode_instruction",
    "decode_instruction",
    "encode",
    "decode",
    "step",
    "run",
    "format_program",
    "parse_program",
]


@dataclass(frozen=True)
class Inc:
    reg: int

    def __post_init__(self):
        _check_natural(self.reg, "reg")

    def __str__(self):
        return f"INC {self.reg}"


@dataclass(frozen=True)
class Djz:
    reg: int
    addr: int

    def __post_init__(self):
        _check_natural(self.reg, "reg")
        _check_natural(self.addr, "addr")

    def __str__(self):
        return f"DJZ {self.reg} {self.addr}"


Instruction = Union[Inc, Djz]
Program = tuple  # tuple[Instruction, ...]


def _check_natural(value, name):
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValueError(f"{name} must be a natural number, got {value!r}")


@dataclass(frozen=True)
class Halted:
    value: int
    steps: int


@dataclass(frozen=True)
class BudgetExceeded:
    budget: int


EvalOutcome = Union[Halted, BudgetExceeded]


@dataclass
class MachineState:
    """Snapshot of a running machine.  Registers absent from the table hold 0."""

    pc: int = 0
    registers: dict = None
    steps: int = 0

    def __post_init__(self):
        if self.registers is None:
            self.registers = {}

    @classmethod
    def initial(cls, input):
        return cls(pc=0, registers={0: input} if input else {}, steps=0)


# -- numbering -------------------------------------------------------------


def pair(a: int, b: int) -> int:
    """Cantor pairing ``(a + b)(a + b + 1)/2 + b``."""
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(n: int) -> tuple[int, int]:
    """Exact inverse of :func:`pair`."""
    w = (isqrt(8 * n + 1) - 1) // 2
    b = n - w * (w + 1) // 2
    return w - b, b


def encode_instruction(ins: Instruction) -> int:
    if isinstance(ins, Inc):
        return 2 * ins.reg
    return 2 * pair(ins.reg, ins.addr) + 1


def decode_instruction(code: int) -> Instruction:
    if code % 2 == 0:
        return Inc(code // 2)
    return Djz(*unpair(code // 2))


def encode(program) -> int:
    """Index of ``program``: 0 for the empty program, otherwise
    ``1 + pair(len - 1, c1 ⊕ (c2 ⊕ (... ⊕ cl)))`` with ``⊕`` the pairing."""
    codes = [encode_instruction(ins) for ins in program]
    if not codes:
        return 0
    acc = codes[-1]
    for c in reversed(codes[:-1]):
        acc = pair(c, acc)
    return 1 + pair(len(codes) - 1, acc)


def decode(n: int) -> Program:
    """Program with index ``n``.  Total on the naturals.

    The program length of ``n`` is at most about ``sqrt(2n)``, so decoding
    very large indices allocates accordingly.
    """
    _check_natural(n, "index")
    if n == 0:
        return ()
    extra, acc = unpair(n - 1)
    codes = []
    for _ in range(extra):
        c, acc = unpair(acc)
        codes.append(c)
    codes.append(acc)
    return tuple(decode_instruction(c) for c in codes)


# -- execution -------------------------------------------------------------


def step(program, state: MachineState) -> MachineState:
    """Execute one instruction.  ``state`` must not be halted."""
    ins = program[state.pc]
    regs = dict(state.registers)
    if isinstance(ins, Inc):
        regs[ins.reg] = regs.get(ins.reg, 0) + 1
        pc = state.pc + 1
    elif regs.get(ins.reg, 0):
        regs[ins.reg] -= 1
        pc = state.pc + 1
    else:
        pc = ins.addr
    return MachineState(pc=pc, registers=regs, steps=state.steps + 1)


def _compile(program):
    # (reg, addr) pairs, addr = -1 marks INC; registers renumbered densely
    index = {0: 0}
    code = []
    for ins in program:
        slot = index.setdefault(ins.reg, len(index))
        code.append((slot, -1) if isinstance(ins, Inc) else (slot, ins.addr))
    return code, len(index)


def run(program, input: int, budget: int, loop_check: bool = False) -> EvalOutcome:
    """Run ``program`` on ``input`` for at most ``budget`` steps.

    With ``loop_check`` the interpreter also looks for a translated cycle:
    the machine returns to an earlier program counter with every register
    at least as large as before, and every register that was found zero in
    between unchanged.  Such a machine repeats the same path forever, so
    the result is ``BudgetExceeded(budget)`` exactly as a full run would
    report; only the work is saved.
    """
    _check_natural(input, "input")
    _check_natural(budget, "budget")
    code, nregs = _compile(program)
    length = len(code)
    regs = [0] * nregs
    regs[0] = input
    pc = 0
    steps = 0

    if not loop_check:
        while pc < length:
            if steps == budget:
                return BudgetExceeded(budget)
            r, a = code[pc]
            if a < 0:
                regs[r] += 1
                pc += 1
            elif regs[r]:
                regs[r] -= 1
                pc += 1
            else:
                pc = a
            steps += 1
        return Halted(regs[0], steps)

    snap_pc = -1
    snap_regs = None
    next_snap = 0
    zero_seen = set()
    while pc < length:
        if steps == budget:
            return BudgetExceeded(budget)
        if steps == next_snap:
            snap_pc = pc
            snap_regs = list(regs)
            zero_seen.clear()
            next_snap = 2 * next_snap or 1
        elif pc == snap_pc and _translated(snap_regs, regs, zero_seen):
            return BudgetExceeded(budget)
        r, a = code[pc]
        if a < 0:
            regs[r] += 1
            pc += 1
        elif regs[r]:
            regs[r] -= 1
            pc += 1
        else:
            zero_seen.add(r)
            pc = a
        steps += 1
    return Halted(regs[0], steps)


def _translated(before, after, zero_seen):
    for r, (b, a) in enumerate(zip(before, after)):
        if a < b or (a != b and r in zero_seen):
            return False
    return True


# -- text format -----------------------------------------------------------


def format_program(program) -> str:
    return "".join(f"{ins}\n" for ins in program)


def parse_program(text: str) -> Program:
    """Parse one instruction per line: ``INC r`` or ``DJZ r a``.

    Blank lines and ``#`` comments are ignored.
    """
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        op, *args = line.split()
        try:
            nums = [int(a) for a in args]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer operand in {line!r}") from None
        if op.upper() == "INC" and len(nums) == 1:
            out.append(Inc(nums[0]))
        elif op.upper() == "DJZ" and len(nums) == 2:
            out.append(Djz(*nums))
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
    return tuple(out)
