MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, point: int, trial: int) -> int:
    """Seed of one (point, trial) task; independent of scheduling order."""
    key = ((point & 0xFFFFFFFF) << 32) | (trial & 0xFFFFFFFF)
    return (master ^ splitmix64(key)) & MASK64
