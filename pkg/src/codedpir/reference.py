"""Published reference values the library compares itself against.

``TABLE_A`` holds the best known upper bounds on A(s, k) for s <= 32 and
the server counts in ``TABLE_A_KS``; ``TABLE_A_OPTIMAL`` marks the cells
claimed optimal.  Odd k outside the listed columns follow A(s, k) =
A(s, k + 1) - 1.

``ARRAY_COMPARISON`` lists, per array-code parameter t, the claimed
(s, k, m2, bound on A(s, k), bound is a lower bound).
"""

TABLE_A_KS = (2, 3, 4, 6, 8, 10, 12, 14, 16)

_ROWS = {
    1: (2, 3, 4, 6, 8, 10, 12, 14, 16),
    2: (3, 5, 6, 9, 12, 15, 18, 21, 24),
    3: (4, 6, 7, 11, 14, 18, 21, 25, 28),
    4: (5, 8, 9, 12, 15, 20, 24, 27, 30),
    5: (6, 10, 11, 13, 19, 24, 26, 29, 31),
    6: (7, 11, 12, 14, 21, 26, 28, 35, 40),
    7: (8, 12, 13, 15, 23, 28, 30, 38, 43),
    8: (9, 13, 14, 20, 28, 34, 40, 48, 54),
    9: (10, 14, 15, 23, 30, 38, 45, 53, 60),
    10: (11, 17, 18, 24, 35, 41, 48, 57, 61),
    11: (12, 19, 20, 25, 37, 42, 50, 62, 67),
    12: (13, 20, 21, 26, 39, 43, 52, 64, 69),
    13: (14, 21, 22, 27, 41, 44, 54, 66, 71),
    14: (15, 22, 23, 29, 43, 45, 58, 68, 74),
    15: (16, 23, 24, 34, 44, 46, 62, 70, 80),
    16: (17, 24, 25, 37, 45, 47, 64, 72, 84),
    17: (18, 27, 28, 38, 46, 48, 66, 76, 86),
    18: (19, 28, 29, 39, 47, 49, 68, 78, 88),
    19: (20, 29, 30, 40, 48, 50, 70, 80, 90),
    20: (21, 30, 31, 41, 49, 51, 72, 82, 92),
    21: (22, 31, 32, 42, 50, 52, 74, 84, 94),
    22: (23, 32, 33, 47, 51, 53, 76, 86, 100),
    23: (24, 33, 34, 50, 52, 54, 78, 88, 104),
    24: (25, 34, 35, 51, 53, 55, 80, 90, 106),
    25: (26, 35, 36, 52, 54, 56, 82, 92, 108),
    26: (27, 38, 39, 53, 55, 57, 84, 96, 110),
    27: (28, 39, 40, 54, 56, 58, 86, 98, 112),
    28: (29, 40, 41, 55, 57, 59, 88, 100, 114),
    29: (30, 41, 42, 56, 58, 60, 90, 102, 116),
    30: (31, 42, 43, 57, 59, 61, 92, 104, 118),
    31: (32, 43, 44, 58, 60, 62, 94, 106, 120),
    32: (33, 44, 45, 59, 61, 63, 96, 108, 122),
}

TABLE_A = {(s, k): v for s, row in _ROWS.items() for k, v in zip(TABLE_A_KS, row)}

TABLE_A_OPTIMAL = frozenset(
    [(1, 2),
     (1, 3),
     (1, 4),
     (1, 6),
     (1, 8),
     (1, 10),
     (1, 12),
     (1, 14),
     (1, 16),
     (2, 2),
     (2, 3),
     (2, 4),
     (2, 6),
     (2, 8),
     (2, 10),
     (2, 12),
     (2, 14),
     (2, 16),
     (3, 2),
     (3, 3),
     (3, 4),
     (3, 6),
     (3, 8),
     (3, 10),
     (3, 12),
     (3, 14),
     (3, 16),
     (4, 2),
     (4, 6),
     (4, 8),
     (4, 14),
     (4, 16),
     (5, 2),
     (5, 16),
     (6, 2),
     (7, 2),
     (8, 2),
     (9, 2),
     (10, 2),
     (11, 2),
     (12, 2),
     (13, 2),
     (14, 2),
     (15, 2),
     (16, 2),
     (17, 2),
     (18, 2),
     (19, 2),
     (20, 2),
     (21, 2),
     (22, 2),
     (23, 2),
     (24, 2),
     (25, 2),
     (26, 2),
     (27, 2),
     (28, 2),
     (29, 2),
     (30, 2),
     (31, 2),
     (32, 2)]
)

ARRAY_COMPARISON = {
    2: (3, 15, 25, 26, False),
    3: (4, 220, 385, 413, True),
    4: (5, 4845, 8721, 9387, True),
    5: (6, 142506, 261261, 280559, True),
}


def table_value(s: int, k: int) -> int | None:
    """Reference A(s, k), extending to odd k via A(s, k + 1) - 1."""
    if (s, k) in TABLE_A:
        return TABLE_A[(s, k)]
    if k % 2 == 1 and (s, k + 1) in TABLE_A:
        return TABLE_A[(s, k + 1)] - 1
    return None
