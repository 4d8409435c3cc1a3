"""Source-level cycle counting versus control steps.

An assignment costs one source cycle; ``par`` overlaps its branches and
``seq`` chains them.  The synthesized controller counts something different:
control steps set by operator latencies and the resource budget.
"""

from hlsynth import synthesize
from hlsynth.frontend import parse_source
from hlsynth.sim import interpret, simulate_rtl

decl = "module t(in a: 8, out x: 8, out y: 8, out z: 8)"
for kind in ("par", "seq"):
    src = f"{decl} {{ {kind} {{ x = a * 3; y = a * 5; z = a * 7; }} }}"
    prog = parse_source(src)
    beh = interpret(prog, {"a": 2})
    print(f"{kind}: outputs {beh.outputs}, {beh.cycles} source cycle(s)")
    for muls in (1, 3):
        syn = synthesize(prog, {"mul": muls})
        rtl = simulate_rtl(syn.design, {"a": 2})
        print(f"    {muls} multiplier(s): {syn.schedule.length} control steps, {rtl.cycles} clock edges")
