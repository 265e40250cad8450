# %% [markdown]
# # Finding critical points, and checking them algebraically
#
# The finder sweeps the gradient field for winding, polishes with Newton, and
# checks the Morse count #saddles - #maxima = n - 2.  For small degree an
# independent route eliminates one variable with a resultant and solves a
# single polynomial.

# %%
from cvlab.critpoints import find_critical_points, morse_defect
from cvlab.ensembles import draw_section
from cvlab.oracle import algebraic_oracle

s = draw_section(5, "gaussian", master_seed=3, sample_id=0)
newton = find_critical_points(s)
oracle = algebraic_oracle(s)
print("Morse defect:", morse_defect(newton, s.n))
for p, q in zip(sorted(newton, key=lambda p: p.value), sorted(oracle, key=lambda p: p.value)):
    print(f"{p.kind:6s} {p.location.chart} {p.location.coordinate:.6f}  value {p.value:.10f}"
          f"  oracle {q.value:.10f}")

# %% [markdown]
# Rescaling the section by a complex constant moves no critical point and scales
# every value by its modulus.

# %%
scaled = find_critical_points(s.scaled(2.5j))
print([round(q.value / p.value, 12) for p, q in zip(newton, scaled)])
