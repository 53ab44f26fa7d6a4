import csv

import numpy as np

TRAJECTORY_HEADER = ["pulse_index", "time_s", "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps", "scatters"]


def write_trajectory_csv(path, trajectory: np.ndarray):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRAJECTORY_HEADER)
        for row in trajectory:
            writer.writerow([str(int(row[0]))] + [f"{value:.9g}" for value in row[1:8]] + [str(int(row[8]))])


def read_trajectory_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory header {header}")
        rows = [[float(value) for value in row] for row in reader]
    return np.array(rows, dtype=float).reshape(-1, len(TRAJECTORY_HEADER))
