"""Constants and errors shared by the compiled and pure-Python kernels."""

PREC = 62
FULL = 1 << PREC
HALF = FULL >> 1
QUARTER = HALF >> 1
MASK = FULL - 1


class OffSupport(ValueError):
    """A coded symbol has conditional probability zero."""

    def __init__(self, position):
        self.position = position
        super().__init__(f"symbol {position} has probability zero under the measure")
