"""A seven-message code for three source states, built from the Fano plane.

Run:  python demos/fano_code.py
"""

from steinercodes.audit import deception_probability, perfect_secrecy_check
from steinercodes.authcode import from_matrix_equiprobable
from steinercodes.designs import construct_sts, verify_design
from steinercodes.errors import NotAuthentic
from steinercodes.ordering import EncodingMatrix, order_design_onefold

fano = construct_sts(7)
print("The Fano plane: every pair of the 7 points lies on exactly one line.")
for block in fano.blocks:
    print("  ", block)
print("valid design:", verify_design(fano).is_valid)

# Each line becomes an encoding rule: source state s is sent as the s-th point.
naive = from_matrix_equiprobable(EncodingMatrix.sorted_rows(fano))
verdict = perfect_secrecy_check(naive, 1)
print("\nWith every line written in ascending order, a single message leaks the source:")
print("   perfect secrecy:", verdict.perfect, "| witness:", verdict.first_violation)

ordered = from_matrix_equiprobable(order_design_onefold(fano))
print("\nAfter balancing the columns by edge colouring, each point sits once in each column:")
for row in ordered.matrix.rows:
    print("  ", row)
print("   perfect secrecy:", perfect_secrecy_check(ordered, 1).perfect)

print("\nAn opponent's best odds, against the lower bound (k - i) / (v - i):")
for i in range(2):
    a = deception_probability(ordered, i)
    print(f"   order {i}: {a.p_deception} vs bound {a.massey_bound}  tight={a.tight}")

rule = 3
message = ordered.encode(rule, 2)
print(f"\nUnder rule {rule}, source 2 goes out as message {message}; decoded: {ordered.decode(rule, message)}")
forged = next(m for m in range(7) if m not in ordered.valid_messages(rule))
try:
    ordered.decode(rule, forged)
except NotAuthentic:
    print(f"A forged message {forged} is rejected.")
