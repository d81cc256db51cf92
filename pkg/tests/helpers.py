import numpy as np

from fdaflock import FlockState


def pair_state(p1, p2, v1=(0, 0, 0), v2=(0, 0, 0), u1=(0, 0, 0), u2=(0, 0, 0)):
    return FlockState(0.0, np.array([p1, p2], float), np.array([v1, v2], float), np.array([u1, u2], float))
