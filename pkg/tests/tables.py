"""Command tables transcribed by hand; kept independent of the package CSV."""

# movement bits 47..24 then 23..0, one row per command, as printed
MOVEMENT_ROWS = {
    "I": (
        "0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0 0 0",
        "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0",
    ),
    "FRR": (
        "0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0 0 0",
        "0 0 0 0 0 0 0 0 0 0 1 0 1 0 0 1 0 0 0 0 1 1 0 1",
    ),
    "FRL": (
        "0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0 0 0",
        "0 0 0 0 0 0 0 0 1 1 0 1 1 0 0 1 0 0 0 0 0 0 1 0",
    ),
    "FD": (
        "0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0 0 0",
        "0 1 0 1 1 0 1 1 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0",
    ),
    "FU": (
        "0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0 0 0",
        "1 0 1 0 0 1 0 1 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0",
    ),
    "FFW": (
        "0 0 0 0 0 0 0 0 1 0 1 0 0 1 0 0 0 0 1 1 0 1 0 0",
        "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0",
    ),
    "FB": (
        "0 0 0 0 0 0 0 0 0 1 1 0 0 1 0 0 0 0 0 0 1 0 1 1",
        "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0",
    ),
    "FFR": (
        "1 0 0 1 0 1 0 0 0 0 0 0 0 1 1 0 0 0 1 0 0 0 0 0",
        "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0",
    ),
    "FFL": (
        "0 1 1 0 1 1 0 0 0 0 0 0 0 0 0 1 0 0 1 0 0 0 0 0",
        "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0",
    ),
    "RDY": (
        "0 1 1 0 1 1 0 0 0 1 1 0 0 0 0 1 0 0 0 0 1 0 1 1",
        "0 1 0 1 1 0 1 1 0 0 1 0 1 0 0 0 0 0 0 0 1 1 0 1",
    ),
}

# altered bit positions; the second set holds the active-low ones
ALTERED = {
    "FRR": ({13, 11, 2, 0}, set()),
    "FRL": ({15, 14, 12, 11, 3, 1}, {3}),
    "FD": ({22, 20, 19, 17, 16, 8}, {8}),
    "FU": ({23, 21, 18, 16}, set()),
    "FFW": ({39, 37, 28, 26}, set()),
    "FB": ({38, 37, 29, 27, 25, 24}, {29}),
    "FFR": ({47, 44, 42, 33}, set()),
    # the bit list in the summary table says 3 where the bit rows say 32
    "FFL": ({46, 45, 43, 42, 34, 32}, {34}),
    "RDY": (
        {46, 45, 43, 42, 38, 37, 34, 32, 29, 27, 25, 24, 22, 20, 19, 17, 16, 13, 11, 8, 2, 0},
        {34, 29, 8},
    ),
}

STATIC_BITS = {41, 40, 36, 35, 31, 30, 10, 9, 7, 6, 5, 4}


def row_value(name: str) -> int:
    hi, lo = MOVEMENT_ROWS[name]
    bits = (hi + lo).replace(" ", "")
    assert len(bits) == 48, name
    return int(bits, 2)
