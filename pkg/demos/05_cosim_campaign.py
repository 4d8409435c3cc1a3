"""Random programs through the whole flow, checked against the interpreter.

Also shows a deliberately broken register binding being caught.
"""

import random

from hlsynth import synthesize
from hlsynth.hls import Binding
from hlsynth.random_designs import random_program
from hlsynth.rtl import build_design
from hlsynth.sim import cosim

rng = random.Random(11)
total = 0
for i in range(50):
    syn = synthesize(random_program(rng, name=f"p{i}"))
    report = cosim(syn.program, syn.design, trials=20, seed=i)
    assert report.passed
    total += report.vectors
print(f"50 random programs, {total} vectors, no mismatches")

syn = synthesize("module s(in a: 4, in b: 4, out s: 9) { s = a*a + b*b + 4*b; }", {"mul": 2, "add": 1})
b = syn.binding
clash = Binding(b.dfg, b.fu_bind, {**b.reg_bind, 6: b.reg_bind[4]}, b.lifetimes)
report = cosim(syn.program, build_design(syn.dfg, syn.schedule, clash), trials=20, seed=3)
bad = report.mismatches[0]
print(f"corrupted binding: {len(report.mismatches)} mismatches, first at {bad.inputs}: "
      f"expected {bad.expected}, got {bad.actual}")
