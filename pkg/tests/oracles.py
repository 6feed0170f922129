"""Independent reference implementations used by several test modules."""
from fractions import Fraction


def det_bareiss(M) -> Fraction:
    """Fraction-free elimination; independent of the Grassmann machinery."""
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    sign, prev = 1, Fraction(1)
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) / prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]
