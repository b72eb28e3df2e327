"""Cubical complexes from binary grids and their Euler characteristic.

Foreground voxels are the vertices. An edge appears where two voxels
share a face, a square where four voxels form a 2x2 face-adjacent
block, a cube where eight form a 2x2x2 block. chi alternates the
counts and is blind to deformation: 1 for any blob without holes,
2 for a hollow shell, 0 for a solid ring.
"""
import numpy as np

from voxect import BinaryVolume, cell_counts, count_incident_cubes, euler_characteristic


def describe(name, bits):
    counts = cell_counts(BinaryVolume(bits))
    chi = euler_characteristic(counts)
    print(f"{name:<18} cells {tuple(counts)}  chi={chi}")


solid = np.ones((4, 4, 4), dtype=bool)
describe("solid block", solid)

shell = np.ones((5, 5, 5), dtype=bool)
shell[1:4, 1:4, 1:4] = False   # cavity -> chi jumps to 2
describe("hollow shell", shell)

ring = np.zeros((5, 5, 1), dtype=bool)
ring[:, :, 0] = True
ring[1:4, 1:4, 0] = False      # one loop -> chi drops to 0
describe("flat ring", ring)

two_pieces = np.zeros((7, 3, 3), dtype=bool)
two_pieces[:2] = True
two_pieces[5:] = True
describe("two components", two_pieces)

# local structure: how many cells lean on a single voxel
full = BinaryVolume(np.ones((5, 5, 5), dtype=bool))
for label, voxel in [("interior", (2, 2, 2)), ("face", (2, 2, 0)),
                     ("edge", (2, 0, 0)), ("corner", (0, 0, 0))]:
    print(f"{label:<8} voxel touches {count_incident_cubes(full, voxel):>2} cells")
# the interior count 27 = 3^3 is the worst case in 3d; that cap is what
# makes the loss stable under small voxel flips
