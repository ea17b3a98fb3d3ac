"""Steiner quadruple systems: the binary cube, doubling, and why SQS(8) cannot be balanced.

Run:  python demos/quadruple_systems.py
"""

from steinercodes.audit import deception_probability
from steinercodes.authcode import from_matrix_equiprobable
from steinercodes.designs import construct_boolean_sqs, cube_census, double_sqs, verify_design
from steinercodes.errors import AdmissibilityError
from steinercodes.ordering import EncodingMatrix, OrderingConfig, order_design_multifold

sqs8 = construct_boolean_sqs(3)
print(f"SQS(8): the {sqs8.b} four-point subsets of the cube whose coordinates XOR to zero.")
print("   block shapes:", cube_census(sqs8))

code = from_matrix_equiprobable(EncodingMatrix.sorted_rows(sqs8))
for i in range(3):
    a = deception_probability(code, i)
    print(f"   spoofing order {i}: P = {a.p_deception} (bound {a.massey_bound})")

try:
    order_design_multifold(sqs8, OrderingConfig(secrecy_level=1))
except AdmissibilityError as exc:
    print("   no balanced ordering:", exc)

design = sqs8
for _ in range(2):
    design = double_sqs(design)
    print(f"Doubling gives SQS({design.v}) with {design.b} blocks; valid: {verify_design(design).is_valid}")
