import random

import numpy as np
import torch


MASK64 = (1 << 64) - 1


def fix_random_seed(seed):
    random.seed(seed)

    try:
        np.random.seed(seed % (1 << 32))
    except NameError:
        pass

    try:
        torch.manual_seed(seed)
    except NameError:
        pass


def splitmix64(x):
    """
    One step of the splitmix64 mixer (Steele, Lea, Flood 2014).
    Maps a 64-bit integer to a well-mixed 64-bit integer.
    """
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed, *indices):
    """
    Derives the seed of an independent substream from a master seed and a tuple of
    nonnegative indices, e.g. (experiment hash, n, trial).
    """
    s = splitmix64(int(master_seed) & MASK64)
    for i in indices:
        s = splitmix64(s ^ (int(i) & MASK64))
    return s


def make_generator(seed, device='cpu'):
    """
    CPU Mersenne-Twister generator seeded with a 64-bit value.
    Bit-exact reproducibility holds for a fixed torch build.
    """
    gen = torch.Generator(device=device)
    gen.manual_seed(int(seed) & MASK64)
    return gen
