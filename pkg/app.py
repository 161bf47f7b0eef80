"""
QHT Money Simulator
Command-Line Front End

Commands:
- transform-check: circuit vs classical-matrix errors and ancilla residuals
- gate-bench: gate tallies of the two Hartley constructions against their models
- money-demo: generate and verify Hartley (and Fourier) banknotes
- walk-recover: serial-number recovery with quantum walks and phase estimation
"""

import logging
import sys
from dataclasses import dataclass

import click
import colorama
import numpy as np

from config import (
    EPS_STATE,
    EXIT_AMBIGUOUS,
    EXIT_BUDGET,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_PRECONDITION,
    MAX_GATE_BENCH_N,
    MAX_MONEY_N,
    MAX_TRANSFORM_CHECK_N,
    MAX_WALK_BITS,
    MAX_WALK_N,
)
from modules.errors import AmbiguousSerialError, MemoryBudgetError, PreconditionError, TransformDomainError
from modules.group_action import ToyGroupAction, hartley_state, twist_unitary
from modules.quantum_money import (
    gen_fourier,
    gen_hartley,
    note_fidelity,
    tamper,
    ver_fourier,
    ver_new,
)
from modules.qwalk_serial import DEFAULT_TIME, experiment_manifest, recover_serial
from modules.reports import render_csv, render_json, with_schema, write_output
from modules.statevector import apply_gate, make_rng
from modules.transforms_classical import dft_matrix, dht_matrix, dst_dct_matrix, max_norm_error
from modules.transforms_quantum import (
    analytic_count_model,
    build_qft,
    build_qht_recursive,
    build_qht_via_qft,
    build_qst1,
    fit_leading_coefficient,
    induced_unitary,
)

logger = logging.getLogger('qht_money')

COMMANDS = ('transform-check', 'gate-bench', 'money-demo', 'walk-recover')

TRANSFORM_COLUMNS = ['transform', 'n', 'max_error', 'ancilla_residual', 'tally']
BENCH_COLUMNS = ['n', 'tally_recursive', 'tally_qft_based', 'model_recursive', 'model_qft_based', 'ratio']


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = None
    N: int = None
    seed: int = 0
    precision_bits: int = 9
    output_path: str = None
    format: str = 'json'
    n_min: int = 4
    runs: int = 1
    min_success: int = None


def log2_exact(N):
    """n with 2^n = N; anything else is a precondition failure."""
    if N is None or N < 2 or N & (N - 1):
        raise TransformDomainError(f"N must be a power of two >= 2, got {N}")
    return N.bit_length() - 1


def _budget(value, limit, what):
    if value > limit:
        raise MemoryBudgetError(f"{what}={value} exceeds the budget of {limit}")


# ==================== COMMANDS ====================

def cmd_transform_check(cfg):
    """Max-norm error of each transform circuit against its classical matrix."""
    n = cfg.n if cfg.n is not None else log2_exact(cfg.N if cfg.N is not None else 8)
    if n < 1:
        raise TransformDomainError(f"n must be at least 1, got {n}")
    _budget(n, MAX_TRANSFORM_CHECK_N, 'n')
    N = 2 ** n

    checks = [
        ('QFT', build_qft(n), dft_matrix(N).entries),
        ('QHT_recursive', build_qht_recursive(n), dht_matrix(N).entries),
        ('QHT_via_QFT', build_qht_via_qft(n), dht_matrix(N).entries),
    ]
    if n >= 2:
        checks.append(('QS_I', build_qst1(n), dst_dct_matrix('S_I', N).entries))

    rows = []
    for name, tc, reference in checks:
        matrix, residual = induced_unitary(tc)
        error = max_norm_error(matrix, reference)
        rows.append({
            'transform': name,
            'n': n,
            'max_error': error,
            'ancilla_residual': residual,
            'tally': tc.tally().total,
        })
        logger.info("%s n=%d: error %.3e, ancilla residual %.3e", name, n, error, residual)

    worst = max(max(row['max_error'], row['ancilla_residual']) for row in rows)
    code = EXIT_OK if worst <= EPS_STATE else EXIT_MISMATCH
    return with_schema('transform-check', {'n': n, 'rows': rows, 'tolerance': EPS_STATE}), rows, code


def cmd_gate_bench(cfg):
    """Gate tallies of both Hartley constructions next to the leading-term models."""
    n_max = cfg.n if cfg.n is not None else (log2_exact(cfg.N) if cfg.N is not None else 10)
    n_min = cfg.n_min
    if not 1 <= n_min <= n_max:
        raise TransformDomainError(f"need 1 <= n-min <= n, got {n_min} and {n_max}")
    _budget(n_max, MAX_GATE_BENCH_N, 'n')

    rows = []
    for n in range(n_min, n_max + 1):
        recursive = build_qht_recursive(n).tally().total
        qft_based = build_qht_via_qft(n).tally().total
        rows.append({
            'n': n,
            'tally_recursive': recursive,
            'tally_qft_based': qft_based,
            'model_recursive': float(analytic_count_model('recursive_qht', n)),
            'model_qft_based': float(analytic_count_model('qft_based_qht', n)),
            'ratio': recursive / qft_based,
        })

    body = {'n_min': n_min, 'n_max': n_max, 'rows': rows,
            'model_ratio': float(analytic_count_model('qft_based_qht', 1) / analytic_count_model('recursive_qht', 1))}
    if len(rows) >= 3:
        ns = [row['n'] for row in rows]
        body['fit_recursive'] = list(fit_leading_coefficient(ns, [row['tally_recursive'] for row in rows]))
        body['fit_qft_based'] = list(fit_leading_coefficient(ns, [row['tally_qft_based'] for row in rows]))
    return with_schema('gate-bench', body), rows, EXIT_OK


def cmd_money_demo(cfg):
    """Generate a Hartley banknote and verify it, a tampered copy and its twist."""
    N = cfg.N if cfg.N is not None else (2 ** cfg.n if cfg.n is not None else 16)
    log2_exact(N)
    _budget(N, MAX_MONEY_N, 'N')
    ga = ToyGroupAction.from_seed(N, cfg.seed)
    rng = make_rng(cfg.seed)

    banknote = gen_hartley(ga, rng)
    h = banknote.serial
    genuine = ver_new(ga, h, banknote.note, rng)
    tampered = ver_new(ga, h, tamper(banknote.note, rng), rng)
    twisted_state = apply_gate(banknote.note.state, twist_unitary(ga))
    twisted = ver_new(ga, h, twisted_state, rng)

    fourier_note = gen_fourier(ga, rng)
    fourier_verdict = ver_fourier(ga, fourier_note.serial, fourier_note.note, rng)

    twist_error = float(np.max(np.abs(twisted_state.amplitudes - hartley_state(ga, -h).amplitudes)))
    body = {
        'action': {'N': N, 'seed': cfg.seed},
        'serial': h,
        'note_fidelity': note_fidelity(banknote.note, hartley_state(ga, h)),
        'twist_error': twist_error,
        'verdicts': {
            'genuine': genuine.to_dict(),
            'tampered': tampered.to_dict(),
            'twisted': twisted.to_dict(),
        },
        'fourier': {'serial': fourier_note.serial, 'verdict': fourier_verdict.to_dict()},
    }
    ok = genuine.accepted and not tampered.accepted and not twisted.accepted and fourier_verdict.accepted
    return with_schema('money-demo', body), None, EXIT_OK if ok else EXIT_MISMATCH


def cmd_walk_recover(cfg):
    """Recover generated serials with phase estimation on Cayley-graph walks."""
    N = cfg.N if cfg.N is not None else (2 ** cfg.n if cfg.n is not None else 64)
    log2_exact(N)
    _budget(N, MAX_WALK_N, 'N')
    _budget(cfg.precision_bits, MAX_WALK_BITS, 'bits')
    if cfg.runs < 1:
        raise TransformDomainError(f"runs must be at least 1, got {cfg.runs}")
    needed = cfg.runs if cfg.min_success is None else cfg.min_success

    manifests = []
    successes = 0
    ambiguous = 0
    for run in range(cfg.runs):
        seed = cfg.seed + run
        ga = ToyGroupAction.from_seed(N, seed)
        rng = make_rng(seed)
        banknote = gen_hartley(ga, rng)
        try:
            estimate = recover_serial(ga, banknote.note, rng, precision_bits=cfg.precision_bits)
        except AmbiguousSerialError as e:
            ambiguous += 1
            logger.warning("run %d: %s", run, e)
            manifests.append({'N': N, 'seed': seed, 'generated_h': banknote.serial, 'error': 'ambiguous',
                              'hint': f"retry with --bits {cfg.precision_bits + 1}"})
            continue
        fid = note_fidelity(estimate.post_state, banknote.note)
        manifests.append(experiment_manifest(N, seed, cfg.precision_bits, DEFAULT_TIME,
                                             banknote.serial, estimate, fid))
        successes += estimate.recovered_h == banknote.serial

    body = {'runs': manifests, 'successes': successes, 'required': needed}
    if successes >= needed:
        code = EXIT_OK
    elif ambiguous and successes + ambiguous >= needed:
        code = EXIT_AMBIGUOUS
    else:
        code = EXIT_MISMATCH
    return with_schema('walk-recover', body), None, code


HANDLERS = {
    'transform-check': (cmd_transform_check, TRANSFORM_COLUMNS),
    'gate-bench': (cmd_gate_bench, BENCH_COLUMNS),
    'money-demo': (cmd_money_demo, None),
    'walk-recover': (cmd_walk_recover, None),
}


def run_command(cfg):
    """
    Execute one command

    Returns:
        tuple: (rendered output text, exit code)
    """
    handler, columns = HANDLERS[cfg.command]
    report, rows, code = handler(cfg)
    if cfg.format == 'csv':
        if columns is None:
            raise click.BadParameter("csv output is only available for table commands", param_hint='--format')
        return render_csv(rows, columns), code
    return render_json(report), code


# ==================== ENTRY POINT ====================

@click.command()
@click.option('--command', 'command', type=click.Choice(COMMANDS), required=True, help='What to run.')
@click.option('--n', 'n_qubits', type=int, default=None, help='log2 of the transform size.')
@click.option('--N', 'dim', type=int, default=None, help='Group order / transform size (power of two).')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--bits', type=int, default=9, show_default=True, help='Phase-estimation precision bits.')
@click.option('--out', 'output_path', type=click.Path(dir_okay=False), default=None, help='Output file.')
@click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default='json', show_default=True)
@click.option('--n-min', type=int, default=4, show_default=True, help='First n for gate-bench.')
@click.option('--runs', type=int, default=1, show_default=True, help='Repetitions for walk-recover.')
@click.option('--min-success', type=int, default=None, help='Required successes for walk-recover.')
@click.option('--verbose', is_flag=True, help='Debug logging.')
def main(command, n_qubits, dim, seed, bits, output_path, fmt, n_min, runs, min_success, verbose):
    """Quantum Hartley transform and quantum money simulator."""
    colorama.just_fix_windows_console()
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
        force=True,
    )
    cfg = RunConfig(command, n_qubits, dim, seed, bits, output_path, fmt, n_min, runs, min_success)

    try:
        text, code = run_command(cfg)
    except MemoryBudgetError as e:
        click.secho(f"[ERROR] budget exceeded: {e}", fg='red', err=True)
        sys.exit(EXIT_BUDGET)
    except AmbiguousSerialError as e:
        click.secho(f"[ERROR] {e}", fg='red', err=True)
        sys.exit(EXIT_AMBIGUOUS)
    except PreconditionError as e:
        click.secho(f"[ERROR] {e}", fg='red', err=True)
        sys.exit(EXIT_PRECONDITION)

    remaining = write_output(text, output_path)
    if remaining is not None:
        click.echo(remaining, nl=False)
    if code == EXIT_OK:
        click.secho(f"[OK] {command} finished", fg='green', err=True)
    else:
        click.secho(f"[ERROR] {command} finished with exit code {code}", fg='red', err=True)
    sys.exit(code)


# ==================== RUN APPLICATION ====================

if __name__ == '__main__':
    main()
