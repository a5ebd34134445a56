# %% [markdown]
# # The polar grid and exact reflections
#
# Fields live on a cell-centred polar grid. Directions are taken from the
# half-angle lattice pi k / ntheta, because reflecting across the line
# orthogonal to such a direction only permutes angular columns. Nothing has
# to be interpolated, so symmetry verdicts are exact.

# %%
import numpy as np

from rotasym import Direction, Field, RadialDomain, build_grid, half_domain_mask, reflect_field, rotate_field

grid = build_grid(RadialDomain(), nr=8, ntheta=16)
print("ring radii:", grid.r)
print("lattice directions:", grid.n_directions)

# %% [markdown]
# Reflection across the vertical line (the plane orthogonal to e = (1, 0))
# sends phi to pi - phi, so cos(phi) flips sign.

# %%
R, P = grid.mesh()
u = Field(grid, R * np.cos(P))
e = Direction(0.0)
print("max |u o sigma_e + u| =", np.abs(reflect_field(u, e).values + u.values).max())

# %% [markdown]
# The half domain B(e) is where x . e > 0. Cells exactly on the mirror line
# are left out.

# %%
mask = half_domain_mask(grid, e)
print("columns in B(e):", np.flatnonzero(mask[0]))

# %% [markdown]
# Reflections are involutions, and rotation conjugates them. Both facts hold
# bit for bit.

# %%
rng = np.random.default_rng(0)
w = Field(grid, rng.normal(size=grid.shape))
k = 5
ek = Direction.from_index(k, grid.ntheta)
print("involution exact:", np.array_equal(reflect_field(reflect_field(w, ek), ek).values, w.values))
lhs = reflect_field(rotate_field(w, 3), Direction.from_index(k + 6, grid.ntheta))
rhs = rotate_field(reflect_field(w, ek), 3)
print("conjugation exact:", np.array_equal(lhs.values, rhs.values))
