#!/usr/bin/env python3
"""Exact (rational) simulation of tabular Q-learning on the toy log.

Writes tests/data/hand_trace.md (step-by-step table) and
tests/data/hand_trace_golden.json (final Q-table).

State = set of activities still to run in the case.  Reward = +1 for an
approved step, -1 * (number of earlier steps in the case) for a
disapproved one.  The bootstrap term is the max Q over the next state's
activities (0 for entries never written); terminal steps bootstrap 0.
"""
import json
import sys
from fractions import Fraction

ALPHA = Fraction(1, 10)
GAMMA = Fraction(9, 10)
PASSES = 2

LOG = [
    ("T1", [("A", "Approved"), ("B", "Approved"), ("C", "Disapproved")]),
    ("T2", [("C", "Approved"), ("A", "Disapproved")]),
    ("T3", [("B", "Approved"), ("A", "Approved"), ("C", "Approved")]),
]


def fmt_state(s):
    return "{" + ", ".join(sorted(s)) + "}"


def main(outdir):
    q = {}
    lines = ["# Toy log hand simulation", "",
             "alpha = 1/10, gamma = 9/10, two passes over T1, T2, T3 in order.", "",
             "Traces:", ""]
    for cid, ev in LOG:
        lines.append(f"- {cid}: " + ", ".join(f"{a} ({s})" for a, s in ev))
    lines += ["", "| pass | case | t | state | action | r | max next | old q | new q |",
              "|---|---|---|---|---|---|---|---|---|"]
    for p in range(1, PASSES + 1):
        for cid, ev in LOG:
            remaining = frozenset(a for a, _ in ev)
            for t, (a, status) in enumerate(ev):
                r = Fraction(1) if status != "Disapproved" else Fraction(-t)
                nxt = remaining - {a}
                terminal = t == len(ev) - 1
                best = Fraction(0)
                if not terminal:
                    best = max(q.get((nxt, b), Fraction(0)) for b in nxt)
                old = q.get((remaining, a), Fraction(0))
                new = old + ALPHA * (r + GAMMA * best - old)
                q[(remaining, a)] = new
                lines.append(f"| {p} | {cid} | {t} | {fmt_state(remaining)} | {a} | {r} | {best} | {old} | {new} |")
                remaining = nxt
    lines += ["", "Final table:", "", "| state | action | q (exact) | q (decimal) |", "|---|---|---|---|"]
    entries = []
    for (s, a), v in sorted(q.items(), key=lambda kv: (sorted(kv[0][0]), kv[0][1])):
        lines.append(f"| {fmt_state(s)} | {a} | {v} | {float(v):.17g} |")
        entries.append({"state": sorted(s), "action": a, "q": float(v), "exact": str(v)})
    with open(f"{outdir}/hand_trace.md", "w") as f:
        f.write("\n".join(lines) + "\n")
    with open(f"{outdir}/hand_trace_golden.json", "w") as f:
        json.dump({"alpha": 0.1, "gamma": 0.9, "passes": PASSES, "entries": entries}, f, indent=2)
        f.write("\n")
    with open(f"{outdir}/hand_trace.csv", "w") as f:
        f.write("case_id,activity,timestamp,status\n")
        for i, (cid, ev) in enumerate(LOG):
            for t, (a, s) in enumerate(ev):
                f.write(f"{cid},{a},2022-01-{i + 1:02d}T{8 + t:02d}:00:00Z,{s}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
