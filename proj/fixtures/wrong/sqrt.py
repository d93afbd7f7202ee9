def sqrt(x, epsilon):
    approx = x / 2
    for _ in range(3):
        approx = 0.5 * (approx + x / approx)
    return approx
