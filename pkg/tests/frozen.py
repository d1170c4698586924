"""Reference values produced once by ``oracles`` and frozen here.

``test_oracles.py`` re-derives each of them, so a drifting oracle is caught
separately from a drifting implementation.
"""

J_HALF_AT_1 = 0.6713967071418031            # sqrt(2/pi) sin 1
J0_ZEROS = (2.4048255576957582, 5.520078110286343, 8.65372791291099)
R2 = {9: 4, 25: 12, 65: 16, 1105: 32}        # brute-force counts of a^2 + b^2 = N
GRAM_R1_S17 = 2.1354153022013995             # int_{B_1} exp(i x.v), |v| = 1.7, d = 2
CC_UPPER = {(1, 1): 54, (1, 2): 109, (3, 1): 1020}
TERNARY_N5_WITNESS = (0, 1, 2)               # first residue k0 with |k0|^2 = 5 mod 16

# exact level sets
CIRCLE_25 = {(3, 4), (3, -4), (-3, 4), (-3, -4), (4, 3), (4, -3), (-4, 3), (-4, -3),
             (5, 0), (-5, 0), (0, 5), (0, -5)}
ELL_1_3_LEVEL_4 = {(2, 0), (-2, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)}
HEX_IMAGES_4 = {(2, 0), (-2, 0), (0, 2), (2, -2), (-2, 2), (0, -2)}
SQRT2_K12 = {(1, 2), (1, -2), (-1, 2), (-1, -2)}
