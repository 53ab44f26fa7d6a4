import csv

import numpy as np

from pulsecool.imaging.synth import SyntheticImage

PROFILE_HEADER = ["x_m", "counts"]


def write_image(path, image: SyntheticImage):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"pixel_size_m={image.pixel_size!r}\n")
        f.write(f"width={image.width}\n")
        f.write(f"height={image.height}\n")
        for row in image.counts:
            f.write(" ".join(str(int(c)) for c in row) + "\n")


def read_image(path) -> SyntheticImage:
    with open(path, encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    header = {}
    for line in lines[:3]:
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}: expected a key=value header line, got {line!r}")
        header[key.strip()] = value.strip()
    try:
        pixel_size = float(header["pixel_size_m"])
        width = int(header["width"])
        height = int(header["height"])
    except KeyError as e:
        raise ValueError(f"{path}: missing header {e.args[0]}") from None

    counts = np.array([[int(c) for c in line.split()] for line in lines[3:]], dtype=np.int64)
    if counts.shape != (height, width):
        raise ValueError(f"{path}: grid is {counts.shape}, header says {(height, width)}")
    if np.any(counts < 0):
        raise ValueError(f"{path}: negative counts")
    return SyntheticImage(counts=counts, pixel_size=pixel_size, origin=(width // 2, height // 2),
                          metadata={"source": str(path)})


def write_profile_csv(path, positions, values):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(PROFILE_HEADER)
        for x, y in zip(positions, values):
            writer.writerow([f"{x:.9g}", f"{y:.9g}"])


def read_profile_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != PROFILE_HEADER:
            raise ValueError(f"unexpected profile header {header}")
        rows = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, 2)
    return rows[:, 0], rows[:, 1]
