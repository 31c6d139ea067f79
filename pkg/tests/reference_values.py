"""Published reference values for the model Poisson experiments.

Keys: ``(p, C11)`` or ``(p, scheme)`` -> values for n = 2, 4, 8, 16, 32,
followed by the printed finest-pair rate where one was printed.
"""

NS = (2, 4, 8, 16, 32)

# CDG, consistent switch, C11 applied on all faces
L2_CONSISTENT = {
    (1, 0): ([4.55e-2, 1.52e-2, 4.63e-3, 1.26e-3, 3.27e-4], 1.9),
    (1, 1): ([4.55e-2, 1.49e-2, 4.56e-3, 1.25e-3, 3.26e-4], 1.9),
    (1, 10): ([2.20e-0, 2.07e-2, 4.24e-3, 1.16e-3, 3.13e-4], 1.9),
    (2, 0): ([9.00e-3, 1.80e-3, 2.56e-4, 3.36e-5, 4.29e-6], 3.0),
    (2, 1): ([9.10e-3, 1.80e-3, 2.56e-4, 3.36e-5, 4.29e-6], 3.0),
    (2, 10): ([2.89e-2, 2.01e-3, 2.62e-4, 3.38e-5, 4.30e-6], 3.0),
    (3, 0): ([2.61e-3, 2.44e-4, 1.72e-5, 1.11e-6, 7.04e-8], 4.0),
    (3, 1): ([2.63e-3, 2.44e-4, 1.72e-5, 1.11e-6, 7.04e-8], 4.0),
    (3, 10): ([4.16e-3, 2.59e-4, 1.73e-5, 1.11e-6, 7.03e-8], 4.0),
    (4, 0): ([1.09e-3, 4.52e-5, 1.57e-6, 5.14e-8, 1.64e-9], 5.0),
    (4, 1): ([1.09e-3, 4.54e-5, 1.57e-6, 5.15e-8, 1.64e-9], 5.0),
    (4, 10): ([1.19e-3, 4.77e-5, 1.60e-6, 5.16e-8, 1.64e-9], 5.0),
    (5, 0): ([3.73e-4, 9.31e-6, 1.76e-7, 2.83e-9, 4.47e-11], 6.0),
    (5, 1): ([3.75e-4, 9.32e-6, 1.76e-7, 2.83e-9, 4.47e-11], 6.0),
    (5, 10): ([4.07e-4, 9.52e-6, 1.77e-7, 2.84e-9, 4.47e-11], 6.0),
}

# same grid with the natural switch
L2_NATURAL = {
    (1, 0): [3.72e-2, 1.61e-2, 4.71e-3, 1.30e-3, 3.39e-4],
    (1, 1): [3.83e-2, 1.50e-2, 4.70e-3, 1.32e-3, 3.38e-4],
    (1, 10): [2.33e-1, 3.40e-2, 4.64e-3, 1.25e-3, 3.31e-4],
    (2, 0): [1.28e-2, 1.96e-3, 3.03e-4, 3.98e-5, 5.04e-6],
    (2, 1): [1.18e-2, 2.07e-3, 2.88e-4, 4.01e-5, 5.02e-6],
    (2, 10): [3.24e-2, 3.00e-3, 3.37e-4, 4.05e-5, 5.16e-6],
    (3, 0): [3.03e-3, 2.68e-4, 2.01e-5, 1.33e-6, 8.63e-8],
    (3, 1): [3.25e-3, 2.74e-4, 2.05e-5, 1.33e-6, 8.61e-8],
    (3, 10): [1.84e-2, 3.56e-4, 2.28e-5, 1.38e-6, 8.79e-8],
    (4, 0): [9.67e-4, 5.15e-5, 1.82e-6, 5.86e-8, 1.87e-9],
    (4, 1): [1.33e-3, 5.24e-5, 1.81e-6, 5.90e-8, 1.88e-9],
    (4, 10): [1.98e-3, 6.30e-5, 1.95e-6, 6.12e-8, 1.90e-9],
    (5, 0): [3.98e-4, 1.01e-5, 1.85e-7, 3.07e-9, 4.83e-11],
    (5, 1): [3.84e-4, 1.02e-5, 1.88e-7, 3.06e-9, 4.85e-11],
    (5, 10): [4.97e-4, 1.15e-5, 1.98e-7, 3.11e-9, 4.88e-11],
}

# broken H1 seminorm, CDG, consistent switch, C11 = 0
H1_CONSISTENT = {
    1: ([1.80e-0, 6.09e-1, 3.05e-1, 1.54e-1, 7.75e-2], 1.0),
    2: ([7.40e-1, 1.57e-1, 3.73e-2, 9.20e-3, 2.28e-3], 2.0),
    3: ([2.57e-1, 3.01e-2, 3.63e-3, 4.37e-4, 5.36e-5], 3.0),
    4: ([9.53e-2, 5.96e-3, 3.61e-4, 2.18e-5, 1.32e-6], 4.0),
    5: ([5.42e-2, 1.33e-3, 3.67e-5, 1.04e-6, 3.11e-8], 5.0),
}

# C11 = 0 inside, 1 on the Dirichlet boundary; BR2 with eta = 3
L2_SCHEMES = {
    (1, "CDG"): ([4.54e-2, 1.52e-2, 4.62e-3, 1.25e-3, 3.27e-4], 1.9),
    (1, "LDG"): ([1.34e-1, 1.73e-2, 4.68e-3, 1.25e-3, 3.26e-4], 1.9),
    (1, "BR2"): ([8.60e-2, 3.08e-2, 9.23e-3, 2.47e-3, 6.36e-4], 2.0),
    (2, "CDG"): ([8.99e-3, 1.79e-3, 2.55e-4, 3.35e-5, 4.28e-6], 3.0),
    (2, "LDG"): ([3.81e-2, 2.92e-3, 3.03e-4, 3.59e-5, 4.42e-6], 3.0),
    (2, "BR2"): ([1.66e-2, 2.75e-3, 3.16e-4, 3.75e-5, 4.60e-6], 3.0),
    (3, "CDG"): ([2.61e-3, 2.44e-4, 1.71e-5, 1.10e-6, 7.03e-8], 4.0),
    (3, "LDG"): ([5.88e-3, 3.81e-4, 2.04e-5, 1.18e-6, 7.23e-8], 4.0),
    (3, "BR2"): ([5.64e-3, 3.77e-4, 2.47e-5, 1.52e-6, 9.46e-8], 4.0),
    (4, "CDG"): ([1.09e-3, 4.52e-5, 1.56e-6, 5.14e-8, 1.63e-9], 5.0),
    (4, "LDG"): ([2.04e-3, 5.00e-5, 1.65e-6, 5.28e-8, 1.66e-9], 5.0),
    (4, "BR2"): ([1.30e-3, 6.22e-5, 2.05e-6, 6.57e-8, 2.07e-9], 5.0),
    (5, "CDG"): ([3.73e-4, 9.30e-6, 1.75e-7, 2.83e-9, 4.46e-11], 6.0),
    (5, "LDG"): ([1.06e-3, 1.32e-5, 1.93e-7, 2.91e-9, 4.50e-11], 6.0),
    (5, "BR2"): ([4.42e-4, 1.08e-5, 2.05e-7, 3.31e-9, 5.23e-11], 6.0),
}

# (h/p)^2 |lambda_max|, consistent switch, same C11 setting as above
SPECTRAL = {
    (1, "CDG"): [153.4, 157.5, 159.4, 159.9, 160.1],
    (1, "LDG"): [149.5, 156.7, 159.2, 159.9, 160.1],
    (1, "BR2"): [244.0, 244.8, 245.2, 245.4, 245.4],
    (2, "CDG"): [137.4, 139.8, 140.8, 141.1, 141.1],
    (2, "LDG"): [135.1, 139.5, 140.7, 141.1, 141.1],
    (2, "BR2"): [216.1, 215.5, 215.3, 215.1, 215.1],
    (3, "CDG"): [159.9, 161.3, 161.8, 162.0, 162.0],
    (3, "LDG"): [159.5, 161.1, 161.8, 162.0, 162.0],
    (3, "BR2"): [244.4, 244.0, 243.8, 243.8, 243.8],
    (4, "CDG"): [198.4, 200.3, 201.0, 201.2, 201.3],
    (4, "LDG"): [197.7, 200.2, 201.0, 201.2, 201.3],
    (4, "BR2"): [302.1, 300.9, 300.6, 300.6, 300.6],
    (5, "CDG"): [244.8, 246.0, 246.4, 246.5, 246.5],
    (5, "LDG"): [245.1, 246.0, 246.4, 246.5, 246.5],
    (5, "BR2"): [368.5, 368.4, 368.4, 368.4, 368.4],
}

# nonzeros per interior element, (d, scheme) -> p = 1..5; alpha = d - 1
MEMORY = {
    (1, "CDG"): [8, 15, 24, 35, 48],
    (1, "LDG"): [8, 15, 24, 35, 48],
    (1, "BR2"): [10, 19, 30, 43, 58],
    (2, "CDG"): [27, 90, 220, 450, 819],
    (2, "LDG"): [31, 99, 236, 475, 855],
    (2, "BR2"): [33, 117, 292, 600, 1089],
    (3, "CDG"): [64, 340, 1200, 3325, 7840],
    (3, "LDG"): [82, 412, 1400, 3775, 8722],
    (3, "BR2"): [76, 436, 1600, 4525, 10780],
}

NULLITY_LDG_NATURAL = [3, 4, 5, 6, 7, 8, 9]
