"""Seeded generators of random BDL programs and dataflow graphs for property tests."""

from __future__ import annotations

import random

from .dfg import Dfg, OpKind

_BINARY = ["+", "-", "*", "&", "|", "^", "<<", ">>"]


class _ProgramGen:
    def __init__(self, rng: random.Random, max_ops: int, max_width: int):
        self.rng = rng
        self.budget = rng.randint(1, max_ops)
        self.max_width = max_width
        self.widths: dict[str, int] = {}

    def expr(self, readable: list[str], width: int, depth: int = 0) -> str:
        rng = self.rng
        if self.budget <= 0 or depth > 3 or rng.random() < 0.25:
            return self.leaf(readable, width)
        self.budget -= 1
        if rng.random() < 0.1:
            return f"~{self.atom(readable, width, depth)}"
        op = rng.choice(_BINARY)
        lhs = self.atom(readable, width, depth)
        if op in ("<<", ">>"):
            return f"{lhs} {op} {rng.randrange(min(width + 2, 1 << width))}"
        return f"{lhs} {op} {self.atom(readable, width, depth)}"

    def atom(self, readable, width, depth) -> str:
        inner = self.expr(readable, width, depth + 1)
        return inner if " " not in inner else f"({inner})"

    def leaf(self, readable: list[str], width: int) -> str:
        if readable and self.rng.random() < 0.8:
            return self.rng.choice(readable)
        return str(self.rng.randrange(1 << width))


def random_program(rng: random.Random, max_ops: int = 12, max_width: int = 8, name: str = "rand") -> str:
    """Source text of a random well-formed program.

    Statements respect the timing rules: a variable is read only after a
    write in an earlier cycle, and ``par`` branches write disjoint targets.
    """
    g = _ProgramGen(rng, max_ops, max_width)
    ins = [f"i{k}" for k in range(rng.randint(1, 3))]
    outs = [f"o{k}" for k in range(rng.randint(1, 2))]
    locs = [f"t{k}" for k in range(rng.randint(0, 2))]
    for n in ins + outs + locs:
        g.widths[n] = rng.randint(1, max_width)
    targets = outs + locs
    written: set[str] = set()

    def assign(readable: list[str], target: str) -> str:
        return f"{target} = {g.expr(readable, g.widths[target])};"

    blocks = []
    while g.budget > 0 or not blocks:
        readable = ins + sorted(written)
        if rng.random() < 0.4 and len(targets) >= 2:
            chosen = rng.sample(targets, rng.randint(2, min(3, len(targets))))
            branches = []
            for k, t in enumerate(chosen):
                if k == 0 and rng.random() < 0.3:
                    # a nested seq whose second step may read the first's result
                    first = assign(readable, t)
                    second = assign(readable + ([t] if t not in readable else []), t)
                    branches.append(f"seq {{ {first} {second} }}")
                else:
                    branches.append(assign(readable, t))
            blocks.append(f"par {{ {' '.join(branches)} }}")
            written.update(chosen)
        else:
            t = rng.choice(targets)
            blocks.append(assign(readable, t))
            written.add(t)
    ports = [f"in {n}: {g.widths[n]}" for n in ins] + [f"out {n}: {g.widths[n]}" for n in outs]
    decls = "".join(f"  var {n}: {g.widths[n]};\n" for n in locs)
    body = "\n".join(f"    {b}" for b in blocks)
    return f"module {name}({', '.join(ports)}) {{\n{decls}  seq {{\n{body}\n  }}\n}}\n"


def random_dag(rng: random.Random, max_ops: int = 8, kinds: tuple[str, ...] = ("add", "mul", "sub")) -> Dfg:
    """A random acyclic graph of ``1..max_ops`` binary operations over up to three inputs."""
    dfg = Dfg(name="dag")
    width = 8
    sources = []
    for k in range(rng.randint(1, 3)):
        node = dfg.add_node(OpKind.INPUT, width, f"x{k}")
        dfg.inputs[f"x{k}"] = node.id
        dfg.ports.append((f"x{k}", "in", width))
        sources.append(node.id)
    ops = []
    for _ in range(rng.randint(1, max_ops)):
        node = dfg.add_node(OpKind(rng.choice(kinds)), width)
        pool = sources + ops
        for pos in range(2):
            # bias toward recent ops to get deeper graphs
            src = rng.choice(ops[-3:]) if ops and rng.random() < 0.5 else rng.choice(pool)
            dfg.add_edge(src, node.id, pos, width)
        ops.append(node.id)
    sinks = [n for n in ops if not dfg.consumers(n)]
    for k, n in enumerate(sinks):
        out = dfg.add_node(OpKind.OUTPUT, width, f"y{k}")
        dfg.add_edge(n, out.id, 0, width)
        dfg.outputs[f"y{k}"] = out.id
        dfg.ports.append((f"y{k}", "out", width))
    return dfg
