"""Opcode constants for the flattened expression programs.

Both kernel backends (Cython and numpy) interpret the same postfix encoding:
one int32 opcode per step plus a row of three float64 operands.  The Cython
module mirrors these values; ``tests/test_kernels.py`` asserts they agree.
"""

OP_CONST = 1       # push a0
OP_POWER = 2       # push a0 * |u + a1| ** a2
OP_INDICATOR = 3   # push 1.0 if a0 <= u <= a1 else 0.0
OP_SUM = 4         # pop int(a0) values, push their sum
OP_PRODUCT = 5     # pop int(a0) values, push their product
OP_SCALE = 6       # pop one value x, push a0 * x
OP_TRUNC = 7       # pop one value x, push min(|x|, a0)
