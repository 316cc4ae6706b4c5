"""Shared numeric constants.

EULER_GAMMA_STR holds 40 significant digits; the test suite recomputes it by
an independent Euler-Maclaurin procedure so the stored literal is never the
only source of truth.  Main terms like x(log x + 2*gamma - 1) amplify any
constant error by x, hence the extra digits.
"""

import math

EULER_GAMMA_STR = "0.5772156649015328606065120900824024310422"
EULER_GAMMA = float(EULER_GAMMA_STR)

TWO_PI = 2.0 * math.pi

# mpmath working precision (decimal digits) for scalar main terms and oracles
MAIN_TERM_DPS = 40
