"""Regenerates the frozen Shapiro-Wilk reference values in tests/normality.rs.

Requires scipy (values in the test were produced with scipy 1.15.3).
"""
from scipy import stats

CASES = {
    "n3": [1, 2, 4],
    "n5": [2.1, 3.4, 1.9, 5.6, 4.0],
    "n8": [10, 10, 11, 12, 12, 15, 20, 31],
    "n12": [89.62, 83.53, 69.89, 75.22, 81.41, 74.55, 62.02, 83.13, 71.44, 66.74, 69.05, 75.73],
    "n20u": [0.0998, 0.7188, 0.8852, 0.8944, 0.1829, 0.0761, 0.6975, 0.7961, 0.3005, 0.1407,
             0.5371, 0.8659, 0.741, 0.1072, 0.5372, 0.3614, 0.0968, 0.5459, 0.9431, 0.2533],
    "n30": [1.064, 8.898, 0.013, 2.437, 1.185, 0.299, 3.138, 5.195, 1.335, 3.039, 1.811, 2.477,
            0.75, 0.643, 1.075, 3.664, 1.576, 1.286, 0.223, 1.214, 0.532, 0.78, 0.629, 0.039,
            1.561, 0.824, 0.776, 3.699, 1.974, 0.21],
}

for name, data in CASES.items():
    res = stats.shapiro(data)
    print(f"{name}: W={res.statistic!r} p={res.pvalue!r}")
