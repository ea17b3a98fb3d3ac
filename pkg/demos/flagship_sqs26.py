"""Two-fold secure, two-fold secret: 650 encoding rules on 26 messages.

A cyclic SQS(26) is found by exact-cover search over orbits of Z_26, then its
blocks are ordered so that every message sits 25 times in each column and
every pair of messages sits twice in each pair of columns.  Takes about a
minute.

Run:  python demos/flagship_sqs26.py [seed]
"""

import sys

from steinercodes.cli import run_demo, summary_lines
from steinercodes.exactcover import base_blocks
from steinercodes.ordering import column_frequencies

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
result = run_demo(26, seed=seed)
design, matrix = result.design, result.matrix

bases = base_blocks(design)
print(f"\nDesign seed {result.design_seed} (attempt {result.attempt}): {len(bases)} base blocks, e.g. {bases[:3]}")
by_block = {tuple(sorted(row)): row for row in matrix.rows}
row = by_block[bases[0]]
nxt = by_block[tuple(sorted((x + 1) % 26 for x in row))]
print("Translating a rule by 1 and swapping columns 0<->1 and 2<->3 gives another rule:")
print(f"   {row} -> {nxt}")

singles = column_frequencies(matrix, 1).counts
pairs = column_frequencies(matrix, 2).counts
print(f"point counts per column: {sorted(set(singles.values()))}; pair counts per column pair: {sorted(set(pairs.values()))}")
print()
print("\n".join(summary_lines(result.report)))
