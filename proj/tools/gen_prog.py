# Copyright 2026 The ahc authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the progNbit.ats corpus fixtures.

Loop program over a k-bit word: the output starts at zero, and every
iteration xors the fixed low input into it. A fresh high-security input is
read each round; when it is nonzero the update runs through a temporary,
taking one step longer. The sequence of output *changes* is therefore the
same on every run, but their timing depends on the high input: the program
satisfies observational determinism only up to stuttering.

Program counter values: 0 init, 1 loop head, 2 read, 3 branch, 4 and 5 the
two-step path through the temporary, 6 the direct update.
"""

import sys
from pathlib import Path


def successors(state, k):
    mask = (1 << k) - 1
    pc, l, o, t, h = state
    if pc == 0:
        return [(1, l, 0, t, h)]
    if pc == 1:
        return [(2, l, o, t, h)]
    if pc == 2:  # fresh high input
        return [(3, l, o, t, nh) for nh in range(mask + 1)]
    if pc == 3:
        if h != 0:
            return [(4, l, o, o ^ l, h)]  # t = o xor l
        return [(6, l, o ^ l, t, h)]  # o = o xor l
    if pc == 4:
        return [(5, l, t, t, h)]  # o = t
    return [(1, l, o, t, h)]  # pc 5 or 6: back to the loop head


def generate(k):
    mask = (1 << k) - 1
    init = (0, mask, 0, 0, 0)
    order = [init]
    index = {init: 0}
    edges = []
    at = 0
    while at < len(order):
        cur = order[at]
        row = []
        for nxt in successors(cur, k):
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        edges.append(row)
        at += 1

    lines = [
        "# Generated by tools/gen_prog.py; do not edit by hand.",
        f"# {k}-bit xor-loop program, fixed low input {mask}, fresh high",
        "# input each round; nonzero high input delays the output update",
        "# by one step.",
        f"system prog{k}bit",
        "var pc : int(0..6)",
        f"var l : int(0..{mask})",
        f"var o : int(0..{mask})",
        f"var t : int(0..{mask})",
        f"var h : int(0..{mask})",
        "",
    ]
    for i, (pc, l, o, t, h) in enumerate(order):
        mark = " init" if i == 0 else ""
        lines.append(
            f"state q{i} {{ pc = {pc}, l = {l}, o = {o}, t = {t}, h = {h} }}"
            f"{mark}"
        )
    lines.append("")
    for i, row in enumerate(edges):
        lines.append(f"trans q{i} -> " + ", ".join(f"q{j}" for j in row))
    lines.append("")
    return "\n".join(lines)


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("corpus")
    for k in (2, 4, 8):
        path = out_dir / f"prog{k}bit.ats"
        path.write_text(generate(k))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
