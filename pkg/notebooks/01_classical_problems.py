# %% [markdown]
# # Classical 1-D test problems
#
# Solve shaw, baart, foxgood and ilaplace with the embedded parameter rule
# and compare against the best grid parameter for the full problem.

# %%
from atreg import SolverConfig, at_solve, add_noise, make_problem
from atreg import diagnostics as D
from atreg.operators import deriv1, deriv2

pairing = {'shaw': deriv1, 'ilaplace': deriv1, 'baart': deriv2, 'foxgood': deriv2}

# %%
for name, regf in pairing.items():
    p = make_problem(name, 120)
    ns = add_noise(p.b_ex, 1e-3, seed=0)
    res = at_solve(p.A, ns.b, regf(120), SolverConfig(), x_ex=p.x_ex)
    lam_opt, err_opt = D.oracle_lambda(p.A.todense(), ns.b, regf(120), p.x_ex)
    print('%-9s m=%2d lambda=%.3e err=%.4f  grid-best err=%.4f (lambda=%.1e)'
          % (name, res.iterations, res.lambda_final,
             D.relative_error(res.x, p.x_ex), err_opt, lam_opt))

# %% [markdown]
# The per-iteration history shows how the parameter settles.

# %%
p = make_problem('shaw', 120)
ns = add_noise(p.b_ex, 1e-3, seed=0)
res = at_solve(p.A, ns.b, deriv1(120), SolverConfig(), x_ex=p.x_ex)
for rec in res.history:
    print(rec.m, '%.3e' % rec.lambda_new, '%.3e' % rec.phi0, '%.3e' % rec.rel_error)
