"""Command-line driver: ``atreg run | deblur | diag | sweep``.

Every flag can also come from a config file (``--config``), either
``key = value`` lines or the JSON summary written by a previous run;
explicit command-line flags win over the file. ``ATREG_SEED`` in the
environment overrides the seed from both.

Exit codes: 0 converged, 2 max_iter, 3 breakdown, 10 I/O failure,
11 non-square image, 12 problem too large for dense diagnostics.
"""
import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import diagnostics as diag
from . import operators as ops
from . import problems
from .errors import ATRegError, FormatError, SizeLimit
from .pgm import DATA_DIR, load_image, write_pgm
from .tikhonov import MODES, SolverConfig, at_solve

EXIT_OK = 0
EXIT_MAX_ITER = 2
EXIT_BREAKDOWN = 3
EXIT_IO = 10
EXIT_NONSQUARE = 11
EXIT_TOO_LARGE = 12

STOP_CODES = {'converged': EXIT_OK, 'max_iter': EXIT_MAX_ITER,
              'breakdown': EXIT_BREAKDOWN}

RUN_COLUMNS = ['m', 'lambda_prev', 'phi0', 'phi_lambda', 'lambda_new',
               'res_change', 'discr_change', 'rel_error']

PAPER_REG = {'shaw': 'l1', 'ilaplace': 'l1', 'baart': 'l2', 'foxgood': 'l2',
             'blur': 'grad2d', 'matrix-file': 'identity'}

DEFAULTS = {
    'problem': 'shaw', 'n': 120, 'noise': 1e-3, 'seed': 0, 'reg': None,
    'mode': 'embedded', 'lambda0': 1.0, 'eta': 1.02, 'tau_res': 5e-2,
    'tau_discr': 5e-2, 'max_iter': 50, 'out': 'atreg_run', 'timing': False,
    'matrix': None, 'solution': None, 'image': None, 'band': 7, 'sigma': 2.0,
    'steps': 12, 'k': 8,
}
FLOAT_KEYS = {'noise', 'lambda0', 'eta', 'tau_res', 'tau_discr', 'sigma'}
INT_KEYS = {'n', 'seed', 'max_iter', 'band', 'steps', 'k'}
BOOL_KEYS = {'timing'}


class CLIError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


def fmt(v):
    """Full double precision text for CSV cells."""
    if v is None:
        return ''
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return '%.17g' % v


def _coerce(key, value):
    if value is None or value == '':
        return None
    if key in FLOAT_KEYS:
        return float(value)
    if key in INT_KEYS:
        return int(value)
    if key in BOOL_KEYS:
        if isinstance(value, str):
            return value.strip().lower() in ('1', 'true', 'yes', 'on')
        return bool(value)
    return value


def read_config(path):
    """Load ``key = value`` lines or a run summary JSON into a dict."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CLIError('cannot read config %s: %s' % (path, exc), EXIT_IO)
    if path.endswith('.json'):
        data = json.loads(text)
        data = data.get('config', data)
    else:
        data = {}
        for line in text.splitlines():
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise CLIError('bad config line: %r' % line, EXIT_IO)
            key, value = (s.strip() for s in line.split('=', 1))
            data[key] = value
    return {k.replace('-', '_'): _coerce(k.replace('-', '_'), v)
            for k, v in data.items()}


def resolve(args, keys):
    """Merge defaults, config file and explicit flags into a plain dict."""
    cfg = {k: DEFAULTS.get(k) for k in keys}
    if getattr(args, 'config', None):
        file_cfg = read_config(args.config)
        cfg.update({k: v for k, v in file_cfg.items() if k in cfg})
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    env_seed = os.environ.get('ATREG_SEED')
    if env_seed is not None and 'seed' in cfg:
        cfg['seed'] = int(env_seed)
    if 'reg' in cfg and cfg['reg'] is None:
        cfg['reg'] = PAPER_REG.get(cfg.get('problem'), 'identity')
    return cfg


def _load_array(path):
    try:
        if path.endswith('.npy'):
            return np.load(path)
        return np.loadtxt(path, ndmin=1)
    except (OSError, ValueError) as exc:
        raise CLIError('cannot load %s: %s' % (path, exc), EXIT_IO)


def _image(path, n=None):
    if path is None:
        path = os.path.join(DATA_DIR, 'shapes%d.pgm' % (n or 64))
    try:
        img = load_image(path)
    except (OSError, FormatError) as exc:
        raise CLIError('cannot read image %s: %s' % (path, exc), EXIT_IO)
    if img.shape[0] != img.shape[1]:
        raise CLIError('image %s is %dx%d, not square' % ((path,) + img.shape),
                       EXIT_NONSQUARE)
    return img


def build_problem(cfg):
    name = cfg['problem']
    if name == 'blur':
        img = _image(cfg.get('image'), cfg['n'] if cfg['n'] in (64, 256) else 64)
        n = img.shape[0]
        return problems.gen_blur(n, cfg['band'], cfg['sigma'],
                                 img.reshape(-1, order='F'))
    if name == 'matrix-file':
        if not cfg.get('matrix') or not cfg.get('solution'):
            raise CLIError('matrix-file needs --matrix and --solution', EXIT_IO)
        A = ops.dense_operator(_load_array(cfg['matrix']))
        x = np.asarray(_load_array(cfg['solution']), dtype=np.float64)
        return problems.TestProblem('matrix-file', A, x, A @ x, A.shape[0])
    return problems.make_problem(name, cfg['n'])


def build_reg(kind, prob):
    N = prob.A.shape[0]
    if kind == 'identity':
        return ops.identity(N)
    if kind == 'l1':
        return ops.deriv1(N)
    if kind == 'l2':
        return ops.deriv2(N)
    if kind == 'grad2d':
        n = int(round(N ** 0.5))
        if n * n != N:
            raise CLIError('grad2d needs a square image problem', EXIT_IO)
        return ops.grad2d(n)
    raise CLIError('unknown regularization %r' % kind, EXIT_IO)


def history_csv(history):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(RUN_COLUMNS)
    for rec in history:
        d = rec.as_dict()
        w.writerow([fmt(d[c]) for c in RUN_COLUMNS])
    return buf.getvalue()


def rows_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _write(path, text):
    try:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, 'w', newline='') as fh:
            fh.write(text)
    except OSError as exc:
        raise CLIError('cannot write %s: %s' % (path, exc), EXIT_IO)


def _dump_json(path, data):
    _write(path, json.dumps(data, indent=2, sort_keys=True) + '\n')


def _solve(cfg, prob, noisy):
    L = build_reg(cfg['reg'], prob)
    config = SolverConfig(
        lambda0=cfg['lambda0'], eta=cfg['eta'], tau_res=cfg['tau_res'],
        tau_discr=cfg['tau_discr'], max_iter=cfg['max_iter'], mode=cfg['mode'],
        noise_norm=noisy.noise_norm if cfg['mode'] != 'embedded' else None)
    t0 = time.perf_counter()
    res = at_solve(prob.A, noisy.b, L, config, x_ex=prob.x_ex)
    return res, time.perf_counter() - t0


def _summary(cfg, res, wall):
    out = {
        'config': cfg,
        'lambda_final': res.lambda_final,
        'lambda_last': res.lambda_last,
        'iterations': res.iterations,
        'stop_reason': res.stop_reason,
        'rel_error': res.history[-1].rel_error,
    }
    if cfg.get('timing'):
        out['wall_time'] = wall
    return out


RUN_KEYS = ['problem', 'n', 'noise', 'seed', 'reg', 'mode', 'lambda0', 'eta',
            'tau_res', 'tau_discr', 'max_iter', 'out', 'timing', 'matrix',
            'solution', 'image', 'band', 'sigma']


def cmd_run(cfg):
    """Build, perturb and solve one problem; write ``<out>.csv/.json``."""
    prob = build_problem(cfg)
    noisy = problems.add_noise(prob.b_ex, cfg['noise'], cfg['seed'])
    if cfg['mode'] != 'embedded' and noisy.noise_norm == 0:
        raise CLIError('mode %s needs a nonzero noise level' % cfg['mode'],
                       EXIT_IO)
    res, wall = _solve(cfg, prob, noisy)
    summary = _summary(cfg, res, wall)
    summary['noise_norm'] = noisy.noise_norm
    _write(cfg['out'] + '.csv', history_csv(res.history))
    _dump_json(cfg['out'] + '.json', summary)
    return STOP_CODES[res.stop_reason], summary


DEBLUR_KEYS = ['image', 'band', 'sigma', 'noise', 'seed', 'mode', 'lambda0',
               'eta', 'tau_res', 'tau_discr', 'max_iter', 'out', 'timing']


def cmd_deblur(cfg):
    """Blur and perturb an image, restore it with the ``grad2d`` penalty."""
    img = _image(cfg.get('image'))
    n = img.shape[0]
    prob = problems.gen_blur(n, cfg['band'], cfg['sigma'],
                             img.reshape(-1, order='F'))
    noisy = problems.add_noise(prob.b_ex, cfg['noise'], cfg['seed'])
    full = dict(cfg, reg='grad2d')
    if cfg['mode'] != 'embedded' and noisy.noise_norm == 0:
        raise CLIError('mode %s needs a nonzero noise level' % cfg['mode'],
                       EXIT_IO)
    res, wall = _solve(full, prob, noisy)
    summary = _summary(cfg, res, wall)
    summary['blurred_rel_error'] = diag.relative_error(noisy.b, prob.x_ex)
    summary['restored_rel_error'] = diag.relative_error(res.x, prob.x_ex)
    prefix = cfg['out']
    try:
        write_pgm(prefix + '_blurred.pgm', noisy.b.reshape((n, n), order='F'))
        write_pgm(prefix + '_restored.pgm', res.x.reshape((n, n), order='F'))
    except OSError as exc:
        raise CLIError('cannot write image: %s' % exc, EXIT_IO)
    _write(prefix + '.csv', history_csv(res.history))
    _dump_json(prefix + '.json', summary)
    return STOP_CODES[res.stop_reason], summary


DIAG_KEYS = ['problem', 'n', 'noise', 'seed', 'steps', 'k', 'out']
DIAG_KINDS = ('decay', 'stagnation', 'noisecurve', 'peakplateau')


def cmd_diag(kind, cfg):
    """Run one diagnostic and write ``<out>.csv`` plus a JSON summary."""
    if cfg['n'] > diag.MAX_DIAG_DIM:
        raise CLIError('N=%d exceeds the dense diagnostics cap %d'
                       % (cfg['n'], diag.MAX_DIAG_DIM), EXIT_TOO_LARGE)
    prob = problems.make_problem(cfg['problem'], cfg['n'])
    summary = {'config': dict(cfg, kind=kind)}
    if kind == 'decay':
        rep = diag.subdiag_decay(prob.A, prob.b_ex, cfg['steps'])
        text = rows_csv(['m', 'h', 'sigma', 'ratio'], rep.rows())
        summary['breakdown'] = rep.breakdown
        summary['max_ratio_over_median'] = float(
            max(rep.ratio) / np.median(rep.ratio))
    elif kind == 'stagnation':
        noisy = problems.add_noise(prob.b_ex, cfg['noise'], cfg['seed'])
        rep = diag.residual_stagnation(prob.A, noisy.b, noisy.noise_norm,
                                       cfg['steps'])
        text = rows_csv(['m', 'residual'], enumerate(rep.residuals, 1))
        summary.update(noise_norm=rep.noise_norm,
                       min_rel_distance=rep.min_rel_distance,
                       argmin_m=rep.argmin_m)
    elif kind == 'noisecurve':
        noisy = problems.add_noise(prob.b_ex, cfg['noise'], cfg['seed'])
        vals = diag.noise_revealing_curve(prob.A, noisy.b, prob.b_ex, noisy.e,
                                          cfg['k'])
        text = rows_csv(['k', 'value'], enumerate(vals, 1))
        summary['values'] = vals
    elif kind == 'peakplateau':
        r, rho = diag.gmres_fom_history(prob.A, prob.b_ex, cfg['steps'])
        text = rows_csv(['m', 'gmres', 'fom'], zip(range(1, len(r) + 1), r, rho))
        summary['violation'] = diag.peak_plateau_violation(r, rho)
    else:
        raise CLIError('unknown diagnostic %r' % kind, EXIT_IO)
    _write(cfg['out'] + '.csv', text)
    _dump_json(cfg['out'] + '.json', summary)
    return EXIT_OK, summary


def _sweep_one(path):
    args = argparse.Namespace(config=path)
    cfg = resolve(args, RUN_KEYS)
    try:
        code, _ = cmd_run(cfg)
    except CLIError as exc:
        return path, exc.code, str(exc)
    return path, code, cfg['out']


def cmd_sweep(paths, jobs):
    """Run several config files as independent experiments."""
    outs = [resolve(argparse.Namespace(config=p), RUN_KEYS)['out']
            for p in paths]
    if len(set(outs)) != len(outs):
        raise CLIError('sweep configs must use distinct out prefixes', EXIT_IO)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, paths))
    else:
        results = [_sweep_one(p) for p in paths]
    return max(code for _, code, _ in results), results


def _add_solver_flags(p):
    p.add_argument('--mode', choices=MODES)
    p.add_argument('--lambda0', type=float)
    p.add_argument('--eta', type=float)
    p.add_argument('--tau-res', dest='tau_res', type=float)
    p.add_argument('--tau-discr', dest='tau_discr', type=float)
    p.add_argument('--max-iter', dest='max_iter', type=int)
    p.add_argument('--timing', action='store_const', const=True,
                   help='add wall time to the JSON summary')


def make_parser():
    parser = argparse.ArgumentParser(
        prog='atreg', description='Arnoldi-Tikhonov regularization with an '
        'embedded discrepancy-based parameter choice.')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='solve a test problem')
    run.add_argument('--config')
    run.add_argument('--problem', choices=sorted(PAPER_REG))
    run.add_argument('--n', type=int)
    run.add_argument('--noise', type=float)
    run.add_argument('--seed', type=int)
    run.add_argument('--reg', choices=['identity', 'l1', 'l2', 'grad2d'])
    run.add_argument('--matrix')
    run.add_argument('--solution')
    run.add_argument('--image')
    run.add_argument('--band', type=int)
    run.add_argument('--sigma', type=float)
    run.add_argument('--out')
    _add_solver_flags(run)

    deb = sub.add_parser('deblur', help='restore a blurred noisy PGM image')
    deb.add_argument('--config')
    deb.add_argument('--image', '--input', dest='image')
    deb.add_argument('--band', type=int)
    deb.add_argument('--sigma', type=float)
    deb.add_argument('--noise', type=float)
    deb.add_argument('--seed', type=int)
    deb.add_argument('--out')
    _add_solver_flags(deb)

    dg = sub.add_parser('diag', help='Krylov diagnostics')
    dg.add_argument('kind', choices=DIAG_KINDS)
    dg.add_argument('--config')
    dg.add_argument('--problem', choices=sorted(problems.GENERATORS))
    dg.add_argument('--n', type=int)
    dg.add_argument('--noise', type=float)
    dg.add_argument('--seed', type=int)
    dg.add_argument('--steps', type=int)
    dg.add_argument('--k', type=int)
    dg.add_argument('--out')

    sw = sub.add_parser('sweep', help='run several config files')
    sw.add_argument('configs', nargs='+')
    sw.add_argument('--jobs', type=int, default=1)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if args.command == 'run':
            code, summary = cmd_run(resolve(args, RUN_KEYS))
        elif args.command == 'deblur':
            cfg = resolve(args, DEBLUR_KEYS)
            if getattr(args, 'config', None) is None and args.out is None:
                cfg['out'] = 'atreg_deblur'
            code, summary = cmd_deblur(cfg)
        elif args.command == 'diag':
            cfg = resolve(args, DIAG_KEYS)
            if args.n is None and not args.config:
                cfg['n'] = 64
            code, summary = cmd_diag(args.kind, cfg)
        else:
            code, results = cmd_sweep(args.configs, args.jobs)
            for path, c, info in results:
                print('%s\t%d\t%s' % (path, c, info))
            return code
    except CLIError as exc:
        print('atreg: error: %s' % exc, file=sys.stderr)
        return exc.code
    except SizeLimit as exc:
        print('atreg: error: %s' % exc, file=sys.stderr)
        return EXIT_TOO_LARGE
    except ATRegError as exc:
        print('atreg: error: %s' % exc, file=sys.stderr)
        return EXIT_IO
    print(json.dumps({k: v for k, v in summary.items() if k != 'config'},
                     sort_keys=True))
    return code


if __name__ == '__main__':
    sys.exit(main())
