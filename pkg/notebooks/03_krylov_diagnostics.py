# %% [markdown]
# # Krylov diagnostics
#
# Subdiagonal decay of the Hessenberg matrix, GMRES residual stagnation
# near the noise level, and the GMRES/FOM residual relation.

# %%
from atreg import add_noise, make_problem
from atreg import diagnostics as D

# %%
p = make_problem('baart', 64)
rep = D.subdiag_decay(p.A, p.b_ex, 12)
for m, h, s, r in rep.rows():
    print('%2d  h=%.3e  sigma=%.3e  ratio=%.3f' % (m, h, s, r))

# %%
p = make_problem('shaw', 120)
ns = add_noise(p.b_ex, 1e-2, seed=0)
st = D.residual_stagnation(p.A, ns.b, ns.noise_norm, 15)
print('noise norm %.4e, closest approach %.3f at m=%d'
      % (st.noise_norm, st.min_rel_distance, st.argmin_m))

# %%
r, rho = D.gmres_fom_history(p.A, ns.b, 12)
print('FOM >= GMRES at every step:', all(a <= c * (1 + 1e-12) for a, c in zip(r, rho)))
print('peak-plateau defect: %.2e' % D.peak_plateau_violation(r, rho))

# %%
vals = D.noise_revealing_curve(p.A, ns.b, p.b_ex, ns.e, 10)
print(['%.2e' % v for v in vals])
